use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::graph::{build_transition_structure, TransitionStructure};

use super::complex::{HexCoordinates, TriangulationComplex};
use super::trig::{log_opposite_side, opposite_side};

/// Relative tolerance on the hexagon relation after solving.
pub const HEXAGON_TOLERANCE: f64 = 1e-10;

/// Orientation-preserving isometry of the upper half-plane.
pub type Sl2 = Matrix2<f64>;

/// Translation by `d` along the imaginary axis.
pub fn translation(d: f64) -> Sl2 {
    let h = 0.5 * d;
    Sl2::new(h.exp(), 0.0, 0.0, (-h).exp())
}

/// Counter-clockwise rotation by `theta` about `i`.
pub fn rotation(theta: f64) -> Sl2 {
    let (s, c) = (0.5 * theta).sin_cos();
    Sl2::new(c, s, -s, c)
}

/// `2 arccosh(|tr g| / 2)`.
pub fn translation_length(g: &Sl2) -> Result<f64> {
    let tr = g.trace().abs();
    if !(tr > 2.0) || !tr.is_finite() {
        return Err(Error::NonHyperbolic { trace: tr });
    }
    Ok(2.0 * (0.5 * tr).acosh())
}

/// Hyperbolic distance from `i` to `g(i)`.
pub fn displacement(g: &Sl2) -> f64 {
    (0.5 * g.norm_squared()).max(1.0).acosh()
}

/// A hyperbolic structure assembled from solved hexagons.
///
/// Frames sit at arc midpoints, pointing along the arc in the counter-
/// clockwise direction of the hexagon. Walking along a hexagon turns left by
/// a right angle at each corner; crossing an arc into the neighbouring
/// hexagon turns the frame around.
#[derive(Debug, Clone)]
pub struct SurfaceStructure {
    complex: TriangulationComplex,
    coordinates: HexCoordinates,
    sides: Vec<[f64; 6]>,
    arc_log_lengths: Vec<f64>,
    residuals: Vec<f64>,
    transitions: TransitionStructure,
    generators: Vec<Sl2>,
}

pub fn surface_from_coordinates(
    complex: &TriangulationComplex,
    coords: &HexCoordinates,
) -> Result<SurfaceStructure> {
    if coords.values.len() != 3 * complex.complexity() || !complex.is_marked() {
        return Err(Error::InvalidArgument(
            "coordinates do not match the marked complex".into(),
        ));
    }
    let n = complex.hexagons().len();
    let mut sides = vec![[f64::NAN; 6]; n];
    let mut arc_lengths = vec![f64::NAN; complex.arcs().len()];
    let mut arc_log_lengths = vec![f64::NAN; complex.arcs().len()];
    for (&(h, slot), &value) in complex.coordinate_sides().iter().zip(&coords.values) {
        sides[h][slot] = value;
    }
    for h in complex.marked_hexagons() {
        let s = sides[h];
        for slot in [0, 2, 4] {
            let (a, b, c) = (s[(slot + 3) % 6], s[(slot + 5) % 6], s[(slot + 1) % 6]);
            let arc = complex.arc_at(h, slot);
            arc_lengths[arc] = opposite_side(a, b, c);
            arc_log_lengths[arc] = log_opposite_side(a, b, c);
        }
    }
    for h in 0..n {
        for slot in [0, 2, 4] {
            sides[h][slot] = arc_lengths[complex.arc_at(h, slot)];
        }
    }
    // Complementary hexagons in breadth-first order from the first marked one.
    let order = breadth_first(complex);
    for &h in &order {
        if complex.hexagons()[h].marked {
            continue;
        }
        let s = sides[h];
        for slot in [0, 2, 4] {
            sides[h][(slot + 3) % 6] = opposite_side(s[slot], s[(slot + 2) % 6], s[(slot + 4) % 6]);
        }
    }
    let mut residuals = Vec::with_capacity(n);
    for (h, s) in sides.iter().enumerate() {
        if s.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::ClosureFailure {
                hexagon: h,
                residual: f64::INFINITY,
            });
        }
        let residual = hexagon_residual(s);
        if !(residual <= HEXAGON_TOLERANCE) {
            return Err(Error::ClosureFailure {
                hexagon: h,
                residual,
            });
        }
        residuals.push(residual);
    }
    let transitions = build_transition_structure(complex.dual_graph())?;
    let mut surface = SurfaceStructure {
        complex: complex.clone(),
        coordinates: coords.clone(),
        sides,
        arc_log_lengths,
        residuals,
        transitions,
        generators: Vec::new(),
    };
    surface.generators = surface.build_generators();
    Ok(surface)
}

fn breadth_first(complex: &TriangulationComplex) -> Vec<usize> {
    let n = complex.hexagons().len();
    let start = complex.marked_hexagons().first().copied().unwrap_or(0);
    let mut seen = vec![false; n];
    let mut order = vec![start];
    seen[start] = true;
    let mut next = 0;
    while next < order.len() {
        for w in complex.neighbours(order[next]) {
            if !seen[w] {
                seen[w] = true;
                order.push(w);
            }
        }
        next += 1;
    }
    order
}

/// Largest relative change when the opposite triples are solved back.
fn hexagon_residual(s: &[f64; 6]) -> f64 {
    let mut worst = 0.0f64;
    for slot in 0..6 {
        let back = opposite_side(s[(slot + 3) % 6], s[(slot + 5) % 6], s[(slot + 1) % 6]);
        worst = worst.max((back - s[slot]).abs() / s[slot]);
    }
    worst
}

impl SurfaceStructure {
    pub fn complex(&self) -> &TriangulationComplex {
        &self.complex
    }

    pub fn coordinates(&self) -> &HexCoordinates {
        &self.coordinates
    }

    /// All six side lengths of hexagon `h`, arcs in the even slots.
    pub fn hexagon_sides(&self, h: usize) -> [f64; 6] {
        self.sides[h]
    }

    /// Ortholengths in arc order.
    pub fn ortholengths(&self) -> Vec<f64> {
        (0..self.complex.arcs().len())
            .map(|k| {
                let (h, slot) = self.complex.arc_slots(k)[0];
                self.sides[h][slot]
            })
            .collect()
    }

    /// Natural logs of the ortholengths, computed without forming the
    /// lengths themselves.
    pub fn log_ortholengths(&self) -> &[f64] {
        &self.arc_log_lengths
    }

    /// `(name, length)` of boundary segments of complementary hexagons.
    pub fn complementary_sides(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (h, hex) in self.complex.hexagons().iter().enumerate() {
            if !hex.marked {
                for slot in [1, 3, 5] {
                    out.push((hex.sides[slot].name.clone(), self.sides[h][slot]));
                }
            }
        }
        out
    }

    /// Coordinates read back from the solved hexagons.
    pub fn read_coordinates(&self) -> Vec<f64> {
        self.complex
            .coordinate_sides()
            .into_iter()
            .map(|(h, slot)| self.sides[h][slot])
            .collect()
    }

    /// Sum of segment lengths along each cuff.
    pub fn boundary_lengths(&self) -> Vec<f64> {
        self.complex
            .cuffs()
            .iter()
            .map(|c| {
                c.segments
                    .iter()
                    .map(|&(h, slot)| self.sides[h][slot])
                    .sum()
            })
            .collect()
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Non-backtracking shift on the dual graph: symbols are arc crossings.
    pub fn transitions(&self) -> &TransitionStructure {
        &self.transitions
    }

    /// Walk inside hexagon `h` from the midpoint of the arc in slot `from` to
    /// the midpoint of the arc in slot `to` along the one boundary segment
    /// between them.
    ///
    /// Going the other way round would pass two long sides in opposite
    /// directions and lose most of the precision to cancellation.
    pub fn walk(&self, h: usize, from: usize, to: usize) -> Sl2 {
        let s = &self.sides[h];
        let quarter = rotation(0.5 * PI);
        if from == to {
            Sl2::identity()
        } else if to == (from + 2) % 6 {
            let side = (from + 1) % 6;
            translation(0.5 * s[from])
                * quarter
                * translation(s[side])
                * quarter
                * translation(0.5 * s[to])
        } else if from == (to + 2) % 6 {
            let back = rotation(-0.5 * PI);
            let side = (to + 1) % 6;
            rotation(PI)
                * translation(0.5 * s[from])
                * back
                * translation(s[side])
                * back
                * translation(0.5 * s[to])
                * rotation(PI)
        } else {
            panic!("slots {from} and {to} are not both arc slots")
        }
    }

    fn slot(&self, symbol: usize, hexagon: usize) -> usize {
        self.complex
            .slot_of(symbol / 2, hexagon)
            .expect("symbol touches hexagon")
    }

    /// From the frame at the crossing `e` to the frame at the crossing `f`,
    /// through the hexagon both border.
    pub fn step(&self, e: usize, f: usize) -> Sl2 {
        let dual = self.complex.dual_graph();
        let h = dual.head_of(e);
        debug_assert_eq!(h, dual.tail_of(f));
        rotation(PI) * self.walk(h, self.slot(e, h), self.slot(f, h))
    }

    /// Holonomy of a cyclic word of crossings.
    pub fn cycle_holonomy(&self, cycle: &[usize]) -> Result<Sl2> {
        if cycle.is_empty() {
            return Err(Error::InvalidArgument("empty cycle".into()));
        }
        let ts = &self.transitions;
        let p = cycle.len();
        if cycle.iter().any(|&s| s >= ts.len()) {
            return Err(Error::InvalidArgument("cycle symbol out of range".into()));
        }
        let dual = self.complex.dual_graph();
        for i in 0..p {
            let (e, f) = (cycle[i], cycle[(i + 1) % p]);
            if dual.head_of(e) != dual.tail_of(f) {
                return Err(Error::InvalidArgument(format!(
                    "{} is not followed by {}",
                    ts.label(e),
                    ts.label(f)
                )));
            }
        }
        Ok((0..p).fold(Sl2::identity(), |m, i| {
            m * self.step(cycle[i], cycle[(i + 1) % p])
        }))
    }

    /// Length of the closed geodesic freely homotopic to a cyclic word of
    /// crossings.
    pub fn closed_geodesic_length(&self, cycle: &[usize]) -> Result<f64> {
        translation_length(&self.cycle_holonomy(cycle)?)
    }

    /// Holonomy along a path of crossings from the reference frame (slot 0)
    /// of the first crossing's tail to that of the last crossing's head.
    pub fn path_holonomy(&self, path: &[usize]) -> Sl2 {
        let dual = self.complex.dual_graph();
        let Some(&first) = path.first() else {
            return Sl2::identity();
        };
        let h0 = dual.tail_of(first);
        let mut m = self.walk(h0, 0, self.slot(first, h0));
        for w in path.windows(2) {
            m *= self.step(w[0], w[1]);
        }
        let last = *path.last().expect("non-empty");
        let h = dual.head_of(last);
        m * rotation(PI) * self.walk(h, self.slot(last, h), 0)
    }

    fn build_generators(&self) -> Vec<Sl2> {
        let dual = self.complex.dual_graph();
        let cut = self.complex.cut();
        cut.cut_edges()
            .iter()
            .map(|&k| {
                let symbol = 2 * k;
                let mut path = cut
                    .tree_path(dual, 0, dual.tail_of(symbol))
                    .expect("tree spans");
                path.push(symbol);
                path.extend(
                    cut.tree_path(dual, dual.head_of(symbol), 0)
                        .expect("tree spans"),
                );
                self.path_holonomy(&path)
            })
            .collect()
    }

    /// One generator per cut arc: the loop from hexagon 0 through the tree,
    /// across the cut arc, and back through the tree.
    pub fn generators(&self) -> &[Sl2] {
        &self.generators
    }

    /// Product of generators; `k` stands for generator `k` (1-based) and
    /// `-k` for its inverse.
    pub fn holonomy_of_word(&self, word: &[i64]) -> Result<Sl2> {
        if word.is_empty() {
            return Err(Error::InvalidArgument("empty word".into()));
        }
        let mut m = Sl2::identity();
        for &letter in word {
            let k = letter.unsigned_abs() as usize;
            if k == 0 || k > self.generators.len() {
                return Err(Error::InvalidArgument(format!(
                    "letter {letter} outside 1..={}",
                    self.generators.len()
                )));
            }
            let g = self.generators[k - 1];
            m *= if letter > 0 { g } else { inverse(&g) };
        }
        Ok(m)
    }

    /// `2 arccosh(|tr| / 2)` of a generator word.
    pub fn geodesic_length_of_word(&self, word: &[i64]) -> Result<f64> {
        translation_length(&self.holonomy_of_word(word)?)
    }

    /// Generator word of a cyclic word of crossings: its cut-arc crossings.
    pub fn word_of_cycle(&self, cycle: &[usize]) -> Vec<i64> {
        let cut = self.complex.cut();
        cycle
            .iter()
            .filter_map(|&s| {
                cut.cut_edges().iter().position(|&k| k == s / 2).map(|i| {
                    if s % 2 == 0 {
                        i as i64 + 1
                    } else {
                        -(i as i64 + 1)
                    }
                })
            })
            .collect()
    }

    /// Cuffs as cyclic words of crossings.
    pub fn cuff_cycles(&self) -> Vec<Vec<usize>> {
        self.complex
            .cuffs()
            .iter()
            .map(|c| self.complex.cuff_cycle(c))
            .collect()
    }

    /// Hyperbolic distance between the midpoints of the arcs in slots `from`
    /// and `to` of hexagon `h`.
    pub fn passage(&self, h: usize, from: usize, to: usize) -> f64 {
        displacement(&self.walk(h, from, to))
    }

    /// Distance between the arc midpoints at the first and last crossings of
    /// an admissible word, measured in the universal cover.
    pub fn crossing_distance(&self, word: &[usize]) -> f64 {
        let m = word
            .windows(2)
            .fold(Sl2::identity(), |m, w| m * self.step(w[0], w[1]));
        displacement(&m)
    }
}

fn inverse(g: &Sl2) -> Sl2 {
    Sl2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)])
}
