//! Thermodynamic formalism on metric graphs and degenerating hyperbolic
//! surfaces.
//!
//! - [`graph`]: metric graphs, non-backtracking edge shifts, closed geodesics.
//! - [`thermo`]: pressure, equilibrium states, variance and orbit-counting
//!   oracles for locally constant potentials.
//! - [`metric`]: entropy-one metrics on a graph and the pressure metric.
//! - [`hexagon`]: right-angled hexagons, hexagon decompositions of bordered
//!   surfaces and holonomy.
//! - [`degeneration`]: linear rays of hexagon coordinates and their limit
//!   metric graph.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degeneration;
pub mod error;
pub mod graph;
pub mod hexagon;
pub mod metric;
pub mod numfmt;
pub mod registry;
pub mod thermo;

pub use error::{Error, Result};
