//! Right-angled hexagons and hexagon decompositions of bordered surfaces.
//!
//! A [`TriangulationComplex`] lists hexagons as cyclic sequences of six sides
//! that alternate between arcs (shared by two hexagons) and boundary segments.
//! Marking an independent half of the hexagons fixes the coordinates: the
//! boundary segments of marked hexagons. [`surface_from_coordinates`] solves
//! every hexagon and builds holonomy matrices from which geodesic lengths are
//! read off by traces.

mod complex;
mod surface;
mod trig;

pub use complex::{
    bundled_complex, find_independent_half, Cuff, HexCoordinates, Hexagon, IndependentHalf, Side,
    SideKind, TriangulationComplex, BUNDLED_COMPLEXES, EXHAUSTIVE_SEARCH_LIMIT,
};
pub use surface::{
    displacement, rotation, surface_from_coordinates, translation, translation_length, Sl2,
    SurfaceStructure, HEXAGON_TOLERANCE,
};
pub use trig::{ln_cosh, ln_sinh, log_opposite_side, opposite_side, solve_hexagon};

/// Arcs cut from the dual graph to leave a spanning tree, as arc names.
pub fn cut_system(complex: &TriangulationComplex) -> Vec<String> {
    complex
        .cut()
        .cut_edges()
        .iter()
        .map(|&k| complex.arcs()[k].clone())
        .collect()
}
