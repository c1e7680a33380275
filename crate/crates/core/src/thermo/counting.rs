//! Periodic-orbit oracles: pressure and entropy computed from explicit orbit
//! enumeration rather than from the transfer matrix.

use crate::error::{Error, Result};
use crate::graph::{
    enumerate_closed_geodesics, enumerate_closed_geodesics_shorter_than, ClosedGeodesic,
    MetricGraph, TransitionStructure, DEFAULT_ENUMERATION_CAP,
};

use super::potential::Potential;

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `(1/n) log sum exp(S_n F(x))` over the fixed points `x` of the `n`-th power
/// of the shift. Returns negative infinity when there are none.
pub fn pressure_by_counting(ts: &TransitionStructure, f: &Potential, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let predicted = ts.fixed_point_count(n);
    if predicted > DEFAULT_ENUMERATION_CAP as f64 {
        return Err(Error::ResourceCap {
            predicted,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let mut sums = Vec::with_capacity(predicted as usize);
    let mut word = Vec::with_capacity(n);
    for start in 0..ts.len() {
        word.clear();
        word.push(start);
        periodic_points(ts, f, n, &mut word, &mut sums)?;
    }
    Ok(log_sum_exp(&sums) / n as f64)
}

fn periodic_points(
    ts: &TransitionStructure,
    f: &Potential,
    n: usize,
    word: &mut Vec<usize>,
    sums: &mut Vec<f64>,
) -> Result<()> {
    let last = *word.last().unwrap();
    if word.len() == n {
        if ts.allows(last, word[0]) {
            sums.push(f.cyclic_sum(word)?);
        }
        return Ok(());
    }
    for &next in ts.successors(last) {
        word.push(next);
        periodic_points(ts, f, n, word, sums)?;
        word.pop();
    }
    Ok(())
}

/// How closed geodesics are weighted when counting `R_T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountingMode {
    /// Every oriented closed geodesic once, proper powers included.
    Cycles,
    /// Primitive oriented closed geodesics only.
    PrimitiveCycles,
    /// Periodic points of the flow's coding: each closed geodesic weighted by
    /// the period of its primitive root.
    #[default]
    PeriodicPoints,
}

/// `log |R_T(l)| / T` with the default counting mode.
pub fn entropy_by_counting(ts: &TransitionStructure, graph: &MetricGraph, t: f64) -> Result<f64> {
    entropy_by_counting_with(ts, graph, t, CountingMode::default())
}

/// Growth-rate estimate `log N(T) / T` of closed geodesics with length
/// strictly less than `T` (lengths within a relative `1e-12` of `T` count as
/// equal to it).
pub fn entropy_by_counting_with(
    ts: &TransitionStructure,
    graph: &MetricGraph,
    t: f64,
    mode: CountingMode,
) -> Result<f64> {
    if ts.len() != 2 * graph.edge_count() {
        return Err(Error::InvalidGraph(
            "transition structure does not belong to this graph".into(),
        ));
    }
    let lengths: Vec<f64> = (0..ts.len()).map(|s| graph.edges()[s / 2].length).collect();
    let geodesics =
        enumerate_closed_geodesics_shorter_than(ts, &lengths, t, DEFAULT_ENUMERATION_CAP)?;
    let count: f64 = geodesics
        .iter()
        .map(|g| match mode {
            CountingMode::Cycles => 1.0,
            CountingMode::PrimitiveCycles => g.is_primitive() as u8 as f64,
            CountingMode::PeriodicPoints => g.primitive_period() as f64,
        })
        .sum();
    if count == 0.0 {
        return Err(Error::NoGeodesics { threshold: t });
    }
    Ok(count.ln() / t)
}

/// Birkhoff sum of `f` over one period of the closed geodesic.
pub fn livsic_period(g: &ClosedGeodesic, f: &Potential) -> Result<f64> {
    f.cyclic_sum(g.symbols())
}

/// Whether `f1` and `f2` have equal periods (within `1e-10`, relative to the
/// period's magnitude) on every closed orbit of period at most `max_period`.
pub fn is_cohomologous(
    f1: &Potential,
    f2: &Potential,
    ts: &TransitionStructure,
    max_period: usize,
) -> Result<bool> {
    for g in enumerate_closed_geodesics(ts, max_period)? {
        let a = livsic_period(&g, f1)?;
        let b = livsic_period(&g, f2)?;
        if (a - b).abs() > 1e-10 * a.abs().max(b.abs()).max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}
