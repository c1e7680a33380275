//! Pressure, equilibrium states and their derivatives for locally constant
//! potentials on a subshift of finite type.
//!
//! A depth-`n` potential is handled on the `n`-block presentation of the
//! shift. The transfer matrix carries `exp F` on the target state of each
//! transition, so the Perron value of the matrix is `exp P(F)`.

mod block;
mod counting;
mod perron;
mod potential;
mod variance;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::TransitionStructure;

pub use block::BlockSystem;
pub use counting::{
    entropy_by_counting, entropy_by_counting_with, is_cohomologous, livsic_period,
    pressure_by_counting, CountingMode,
};
pub use perron::{perron_solvers, DenseEigen, PerronData, PerronSolver, PowerIteration};
pub use potential::Potential;
pub use variance::{variance_methods, FiniteDifference, Fundamental, Perturbation, VarianceMethod};

/// Stationary Markov chain on the states of a block system: the equilibrium
/// state of a potential, or any other Markov measure on the same shift.
#[derive(Debug, Clone)]
pub struct EquilibriumState {
    states: Vec<Vec<usize>>,
    pi: DVector<f64>,
    q: DMatrix<f64>,
    pressure: Option<f64>,
    period: usize,
}

impl EquilibriumState {
    /// Stationary chain with transition matrix `q` on the states of `block`.
    pub fn from_transition_matrix(block: &BlockSystem, q: DMatrix<f64>) -> Result<Self> {
        let n = block.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::InvalidArgument(
                "transition matrix has the wrong size".into(),
            ));
        }
        for i in 0..n {
            let row_sum: f64 = q.row(i).sum();
            if (row_sum - 1.0).abs() > 1e-12 || q.row(i).iter().any(|&x| x < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "row {i} is not a probability vector"
                )));
            }
            for j in 0..n {
                if q[(i, j)] > 0.0 && !block.successors(i).contains(&j) {
                    return Err(Error::InvalidArgument(format!(
                        "transition {i} -> {j} is not admissible"
                    )));
                }
            }
        }
        // stationary vector: (Q^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
        let mut a = q.transpose() - DMatrix::identity(n, n);
        let mut b = DVector::zeros(n);
        a.row_mut(n - 1).fill(1.0);
        b[n - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Numerical("chain has no unique stationary vector".into()))?;
        Ok(EquilibriumState {
            states: block.states().to_vec(),
            pi,
            q,
            pressure: None,
            period: block.period(),
        })
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn depth(&self) -> usize {
        self.states.first().map_or(0, |w| w.len())
    }

    pub fn stationary(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn transitions(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Pressure of the potential this state was computed from, if any.
    pub fn pressure(&self) -> Option<f64> {
        self.pressure
    }

    /// Period of the underlying shift; `1` for mixing chains.
    pub fn period(&self) -> usize {
        self.period
    }

    /// Mass of each symbol (the cylinder of words starting with it).
    pub fn symbol_masses(&self, alphabet: usize) -> Vec<f64> {
        let mut mass = vec![0.0; alphabet];
        for (w, &p) in self.states.iter().zip(self.pi.iter()) {
            mass[w[0]] += p;
        }
        mass
    }

    /// `max |pi Q - pi|` and `max |Q 1 - 1|`.
    pub fn residual(&self) -> f64 {
        let stat = (self.q.tr_mul(&self.pi) - &self.pi).amax();
        let rows = self
            .q
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max);
        stat.max(rows)
    }
}

/// Entropy rate `-sum pi_i Q_ij log Q_ij` of a stationary chain.
pub fn markov_entropy(state: &EquilibriumState) -> f64 {
    let n = state.pi.len();
    let mut h = 0.0;
    for i in 0..n {
        for j in 0..n {
            let q = state.q[(i, j)];
            if q > 0.0 {
                h -= state.pi[i] * q * q.ln();
            }
        }
    }
    h
}

/// Integral of `f` against the chain's measure. The potential may be one
/// symbol deeper than the states, in which case transitions are weighted.
pub fn integrate(f: &Potential, state: &EquilibriumState) -> Result<f64> {
    let depth = state.depth();
    if f.depth() <= depth {
        let mut total = 0.0;
        for (w, &p) in state.states.iter().zip(state.pi.iter()) {
            total += p * f
                .value(w)
                .ok_or_else(|| Error::Potential("alphabet mismatch".into()))?;
        }
        Ok(total)
    } else if f.depth() == depth + 1 {
        let n = state.states.len();
        let mut total = 0.0;
        let mut word = Vec::with_capacity(depth + 1);
        for i in 0..n {
            for j in 0..n {
                let q = state.q[(i, j)];
                if q > 0.0 {
                    word.clear();
                    word.extend_from_slice(&state.states[i]);
                    word.push(*state.states[j].last().unwrap());
                    let v = f
                        .value(&word)
                        .ok_or_else(|| Error::Potential("alphabet mismatch".into()))?;
                    total += state.pi[i] * q * v;
                }
            }
        }
        Ok(total)
    } else {
        Err(Error::DepthMismatch {
            potential: f.depth(),
            state: depth,
        })
    }
}

/// Asymptotic variance with the mean that was removed before computing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub value: f64,
    pub mean: f64,
}

fn centered_state_values(
    g: &Potential,
    state: &EquilibriumState,
    subtract_mean: bool,
) -> Result<(Vec<f64>, f64)> {
    if g.depth() > state.depth() {
        return Err(Error::DepthMismatch {
            potential: g.depth(),
            state: state.depth(),
        });
    }
    let mean = integrate(g, state)?;
    if !subtract_mean && mean.abs() > 1e-10 {
        return Err(Error::NotCentered { mean });
    }
    let values = state
        .states
        .iter()
        .map(|w| g.value(w).map(|v| v - mean))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Potential("alphabet mismatch".into()))?;
    Ok((values, mean))
}

/// Central-limit variance of the Birkhoff sums of `g` under the chain, from
/// the fundamental matrix `Z = (I - Q + 1 pi)^-1`:
/// `sigma^2 = 2 <g, Z g>_pi - <g, g>_pi` for centered `g`.
pub fn variance(
    g: &Potential,
    state: &EquilibriumState,
    subtract_mean: bool,
) -> Result<VarianceEstimate> {
    let (values, mean) = centered_state_values(g, state, subtract_mean)?;
    let n = values.len();
    let gv = DVector::from_vec(values);
    let ones = DVector::from_element(n, 1.0);
    let a = DMatrix::identity(n, n) - &state.q + &ones * state.pi.transpose();
    let zg = a
        .lu()
        .solve(&gv)
        .ok_or_else(|| Error::Numerical("fundamental matrix is singular".into()))?;
    let mut gzg = 0.0;
    let mut gg = 0.0;
    for i in 0..n {
        gzg += state.pi[i] * gv[i] * zg[i];
        gg += state.pi[i] * gv[i] * gv[i];
    }
    Ok(VarianceEstimate {
        value: (2.0 * gzg - gg).max(0.0),
        mean,
    })
}

/// Thermodynamic engine with a selected Perron solver and variance method.
#[derive(Clone)]
pub struct Thermo {
    perron: Arc<dyn PerronSolver>,
    variance: Arc<dyn VarianceMethod>,
}

impl Default for Thermo {
    fn default() -> Self {
        Thermo {
            perron: Arc::new(PowerIteration::default()),
            variance: Arc::new(Fundamental),
        }
    }
}

impl std::fmt::Debug for Thermo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Thermo")
            .field("perron", &self.perron.name())
            .field("variance", &self.variance.name())
            .finish()
    }
}

impl Thermo {
    pub fn new(perron: Arc<dyn PerronSolver>, variance: Arc<dyn VarianceMethod>) -> Self {
        Thermo { perron, variance }
    }

    /// Look up both strategies by registered name.
    pub fn from_names(perron: &str, variance: &str) -> Result<Self> {
        Ok(Thermo {
            perron: perron_solvers().create(perron)?,
            variance: variance_methods().create(variance)?,
        })
    }

    pub fn perron_name(&self) -> &'static str {
        self.perron.name()
    }

    pub fn variance_name(&self) -> &'static str {
        self.variance.name()
    }

    pub fn perron_solver(&self) -> &dyn PerronSolver {
        self.perron.as_ref()
    }

    /// Block system at the potential's depth, the scaled transfer matrix, its
    /// log scale and Perron data.
    pub fn transfer(
        &self,
        ts: &TransitionStructure,
        f: &Potential,
        depth: usize,
    ) -> Result<Transfer> {
        ts.require_irreducible()?;
        let block = BlockSystem::new(ts, depth.max(f.depth()))?;
        if !block.is_irreducible() {
            return Err(Error::Reducible);
        }
        let (matrix, log_scale) = block.weighted_matrix(f)?;
        let perron = self.perron.solve(&matrix)?;
        Ok(Transfer {
            block,
            matrix,
            log_scale,
            perron,
        })
    }

    pub fn pressure(&self, ts: &TransitionStructure, f: &Potential) -> Result<f64> {
        let t = self.transfer(ts, f, f.depth())?;
        Ok(t.pressure())
    }

    pub fn equilibrium_state(
        &self,
        ts: &TransitionStructure,
        f: &Potential,
    ) -> Result<EquilibriumState> {
        self.equilibrium_state_at_depth(ts, f, f.depth())
    }

    /// Equilibrium state presented on blocks of the given depth (at least the
    /// potential's depth).
    pub fn equilibrium_state_at_depth(
        &self,
        ts: &TransitionStructure,
        f: &Potential,
        depth: usize,
    ) -> Result<EquilibriumState> {
        let t = self.transfer(ts, f, depth)?;
        Ok(t.equilibrium())
    }

    /// The unique `h` with `P(-h F) = 0` for a strictly positive potential.
    pub fn topological_entropy(&self, ts: &TransitionStructure, f: &Potential) -> Result<f64> {
        if let Some((w, &v)) = f.values().iter().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::NotPositive {
                word: ts.word_label(w),
                value: v,
            });
        }
        let p = |s: f64| self.pressure(ts, &f.scale(-s));
        let mut lo = 0.0;
        let mut p_lo = p(lo)?;
        if p_lo <= 0.0 {
            return Err(Error::Numerical("shift has no positive entropy".into()));
        }
        let mut hi = 1.0 / f.max_value();
        let mut p_hi = p(hi)?;
        while p_hi >= 0.0 {
            lo = hi;
            p_lo = p_hi;
            hi *= 2.0;
            p_hi = p(hi)?;
            if !hi.is_finite() {
                return Err(Error::Numerical("entropy bracket diverged".into()));
            }
        }
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            let pm = p(mid)?;
            if pm > 0.0 {
                lo = mid;
                p_lo = pm;
            } else {
                hi = mid;
                p_hi = pm;
            }
            if !(p_lo > p_hi) {
                return Err(Error::Numerical(
                    "pressure is not decreasing along the bracket".into(),
                ));
            }
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..3 {
            let neg = f.scale(-s);
            let state = self.equilibrium_state(ts, &neg)?;
            let value = state.pressure.expect("equilibrium carries its pressure");
            let slope = -integrate(f, &state)?;
            if value == 0.0 || slope >= 0.0 {
                break;
            }
            let next = s - value / slope;
            if next.is_finite() && next > 0.0 {
                s = next;
            }
        }
        let residual = p(s)?;
        if residual.abs() > 1e-10 {
            return Err(Error::Numerical(format!(
                "entropy root residual {residual:e}"
            )));
        }
        Ok(s)
    }

    /// Asymptotic variance of `g` under the equilibrium state of `f`, using
    /// the selected variance method.
    pub fn variance(
        &self,
        ts: &TransitionStructure,
        f: &Potential,
        g: &Potential,
        subtract_mean: bool,
    ) -> Result<VarianceEstimate> {
        let depth = f.depth().max(g.depth());
        let state = self.equilibrium_state_at_depth(ts, f, depth)?;
        let mean = integrate(g, &state)?;
        if !subtract_mean && mean.abs() > 1e-10 {
            return Err(Error::NotCentered { mean });
        }
        let value = self.variance.variance(self, ts, f, g)?;
        Ok(VarianceEstimate { value, mean })
    }

    /// Second derivative of `eps -> P(f + eps g)` at zero by the selected method.
    pub fn second_derivative(
        &self,
        ts: &TransitionStructure,
        f: &Potential,
        g: &Potential,
    ) -> Result<f64> {
        self.variance.variance(self, ts, f, g)
    }
}

/// Transfer matrix of a potential with its Perron data.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub block: BlockSystem,
    /// Entries `exp(F - log_scale)` on admissible transitions.
    pub matrix: DMatrix<f64>,
    pub log_scale: f64,
    pub perron: PerronData,
}

impl Transfer {
    pub fn pressure(&self) -> f64 {
        self.perron.rho.ln() + self.log_scale
    }

    /// `Q(i, j) = M(i, j) r_j / (rho r_i)`, `pi_i = l_i r_i`.
    pub fn equilibrium(&self) -> EquilibriumState {
        let n = self.block.len();
        let PerronData { rho, left, right } = &self.perron;
        let mut q = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut row_sum = 0.0;
            for &j in self.block.successors(i) {
                let v = self.matrix[(i, j)] * right[j] / (rho * right[i]);
                q[(i, j)] = v;
                row_sum += v;
            }
            for &j in self.block.successors(i) {
                q[(i, j)] /= row_sum;
            }
        }
        let pi = left.component_mul(right);
        let pi = &pi / pi.sum();
        EquilibriumState {
            states: self.block.states().to_vec(),
            pi,
            q,
            pressure: Some(self.pressure()),
            period: self.block.period(),
        }
    }
}

/// `pressure` with the default engine.
pub fn pressure(ts: &TransitionStructure, f: &Potential) -> Result<f64> {
    Thermo::default().pressure(ts, f)
}

/// `topological_entropy` with the default engine.
pub fn topological_entropy(ts: &TransitionStructure, f: &Potential) -> Result<f64> {
    Thermo::default().topological_entropy(ts, f)
}

/// `equilibrium_state` with the default engine.
pub fn equilibrium_state(ts: &TransitionStructure, f: &Potential) -> Result<EquilibriumState> {
    Thermo::default().equilibrium_state(ts, f)
}

#[cfg(test)]
mod tests;
