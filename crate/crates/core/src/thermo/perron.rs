use std::sync::Arc;

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::registry::Registry;

/// Perron value with positive left and right eigenvectors, normalized so that
/// `right` sums to one and `left . right = 1`.
#[derive(Debug, Clone)]
pub struct PerronData {
    pub rho: f64,
    pub left: DVector<f64>,
    pub right: DVector<f64>,
}

impl PerronData {
    fn from_vectors(m: &DMatrix<f64>, left: DVector<f64>, right: DVector<f64>) -> Result<Self> {
        let right = positive_normalized(right)?;
        let left = positive_normalized(left)?;
        let mr = m * &right;
        let rho = left.dot(&mr) / left.dot(&right);
        let left = &left / left.dot(&right);
        Ok(PerronData { rho, left, right })
    }

    /// `max |M r - rho r|` relative to `rho`.
    pub fn residual(&self, m: &DMatrix<f64>) -> f64 {
        let r = m * &self.right - &self.right * self.rho;
        let l = m.tr_mul(&self.left) - &self.left * self.rho;
        let scale = self.rho * self.right.amax().max(self.left.amax());
        r.amax().max(l.amax()) / scale
    }
}

fn positive_normalized(v: DVector<f64>) -> Result<DVector<f64>> {
    let sum: f64 = v.iter().sum();
    if !(sum.abs() > 0.0) || !sum.is_finite() {
        return Err(Error::Numerical("Perron vector vanished".into()));
    }
    let v = v / sum;
    let tol = 1e-9 * v.amax();
    if v.iter().any(|&x| x < -tol) {
        return Err(Error::Numerical("Perron vector has mixed signs".into()));
    }
    Ok(v.map(|x| x.max(f64::MIN_POSITIVE)))
}

/// Computes Perron data of a nonnegative irreducible matrix.
pub trait PerronSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, m: &DMatrix<f64>) -> Result<PerronData>;
}

/// Shifted power iteration. Iterating `M + cI` with `c > 0` makes the Perron
/// value strictly dominant even when `M` is periodic.
#[derive(Debug, Clone)]
pub struct PowerIteration {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Dimension below which a non-converged iteration is retried densely.
    pub dense_fallback_below: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            tolerance: 1e-14,
            max_iterations: 100_000,
            dense_fallback_below: 200,
        }
    }
}

impl PowerIteration {
    fn iterate(&self, m: &DMatrix<f64>, shift: f64) -> Option<DVector<f64>> {
        let n = m.nrows();
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut lambda = f64::NAN;
        let mut settled = 0;
        for _ in 0..self.max_iterations {
            let mut y = m * &x + &x * shift;
            let next: f64 = y.iter().sum();
            if !(next > 0.0) || !next.is_finite() {
                return None;
            }
            y /= next;
            let moved = (&y - &x).amax();
            let converged =
                ((next - lambda) / next).abs() <= self.tolerance && moved <= 1e3 * self.tolerance;
            x = y;
            lambda = next;
            if converged {
                settled += 1;
                if settled == 2 {
                    return Some(x);
                }
            } else {
                settled = 0;
            }
        }
        None
    }
}

impl PerronSolver for PowerIteration {
    fn name(&self) -> &'static str {
        "power"
    }

    fn solve(&self, m: &DMatrix<f64>) -> Result<PerronData> {
        let shift = m
            .row_iter()
            .map(|r| r.sum())
            .fold(f64::INFINITY, f64::min)
            .max(f64::MIN_POSITIVE);
        let right = self.iterate(m, shift);
        let left = right
            .as_ref()
            .and_then(|_| self.iterate(&m.transpose(), shift));
        match (left, right) {
            (Some(l), Some(r)) => PerronData::from_vectors(m, l, r),
            _ if m.nrows() < self.dense_fallback_below => DenseEigen.solve(m),
            _ => Err(Error::Numerical(format!(
                "power iteration did not converge in {} steps",
                self.max_iterations
            ))),
        }
    }
}

/// Dense eigenvalue decomposition followed by a null-vector solve.
#[derive(Debug, Clone, Default)]
pub struct DenseEigen;

fn null_vector(a: DMatrix<f64>) -> DVector<f64> {
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    v_t.row(k).transpose()
}

impl PerronSolver for DenseEigen {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn solve(&self, m: &DMatrix<f64>) -> Result<PerronData> {
        let n = m.nrows();
        // A diagonal similarity leaves the spectrum alone but breaks the exact
        // symmetries on which QR sweeps can stall.
        let eigenvalues = Schur::try_new(m.clone(), 1e-15, 10_000)
            .or_else(|| {
                let d = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
                let similar =
                    DMatrix::from_diagonal(&d) * m * DMatrix::from_diagonal(&d.map(|x| 1.0 / x));
                Schur::try_new(similar, 1e-15, 10_000)
            })
            .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?
            .complex_eigenvalues();
        let rho = eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(rho > 0.0) {
            return Err(Error::Numerical("no positive leading eigenvalue".into()));
        }
        let shifted = m - DMatrix::identity(n, n) * rho;
        let right = null_vector(shifted.clone());
        let left = null_vector(shifted.transpose());
        PerronData::from_vectors(m, left, right)
    }
}

pub fn perron_solvers() -> Registry<dyn PerronSolver> {
    let mut r: Registry<dyn PerronSolver> = Registry::new("perron");
    r.register("power", || Arc::new(PowerIteration::default()));
    r.register("dense", || Arc::new(DenseEigen));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_transition_structure, bundled_graph};

    fn adjacency(name: &str) -> DMatrix<f64> {
        build_transition_structure(&bundled_graph(name).unwrap())
            .unwrap()
            .adjacency_matrix()
    }

    #[test]
    fn theta_perron_value_is_two_for_both_solvers() {
        let a = adjacency("theta");
        for name in perron_solvers().names() {
            let p = perron_solvers().create(name).unwrap().solve(&a).unwrap();
            assert!((p.rho - 2.0).abs() < 1e-13, "{name}: {}", p.rho);
            assert!(p.residual(&a) < 1e-12);
            assert!((p.left.dot(&p.right) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn solvers_agree_on_k4() {
        let a = adjacency("k4");
        let p = PowerIteration::default().solve(&a).unwrap();
        let d = DenseEigen.solve(&a).unwrap();
        assert!((p.rho - d.rho).abs() < 1e-12);
        assert!((&p.right - &d.right).amax() < 1e-10);
    }

    #[test]
    fn two_loop_value_is_three() {
        let p = PowerIteration::default()
            .solve(&adjacency("two_loop"))
            .unwrap();
        assert!((p.rho - 3.0).abs() < 1e-13);
    }
}
