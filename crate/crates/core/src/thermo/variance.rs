use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::TransitionStructure;
use crate::registry::Registry;

use super::potential::Potential;
use super::{variance, Thermo};

/// Computes `d^2/de^2 P(f + e g)` at `e = 0`, the asymptotic variance of `g`
/// under the equilibrium state of `f`.
pub trait VarianceMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn variance(
        &self,
        engine: &Thermo,
        ts: &TransitionStructure,
        f: &Potential,
        g: &Potential,
    ) -> Result<f64>;
}

/// Closed form from the fundamental matrix of the equilibrium chain.
#[derive(Debug, Clone, Default)]
pub struct Fundamental;

impl VarianceMethod for Fundamental {
    fn name(&self) -> &'static str {
        "fundamental"
    }

    fn variance(
        &self,
        engine: &Thermo,
        ts: &TransitionStructure,
        f: &Potential,
        g: &Potential,
    ) -> Result<f64> {
        let state = engine.equilibrium_state_at_depth(ts, f, f.depth().max(g.depth()))?;
        Ok(variance(g, &state, true)?.value)
    }
}

/// Second-order eigenvalue perturbation of the transfer matrix
/// `M(e) = M diag(exp(e g))`.
///
/// With `l r = 1`: `rho' = l M' r`, `(M - rho) r' = -(M' - rho') r` with
/// `l r' = 0`, and `rho'' = l M'' r + 2 l (M' - rho') r'`.
#[derive(Debug, Clone, Default)]
pub struct Perturbation;

impl VarianceMethod for Perturbation {
    fn name(&self) -> &'static str {
        "perturbation"
    }

    fn variance(
        &self,
        engine: &Thermo,
        ts: &TransitionStructure,
        f: &Potential,
        g: &Potential,
    ) -> Result<f64> {
        let t = engine.transfer(ts, f, f.depth().max(g.depth()))?;
        let gv = DVector::from_vec(t.block.state_values(g)?);
        let n = gv.len();
        let m = &t.matrix;
        let (rho, l, r) = (t.perron.rho, &t.perron.left, &t.perron.right);
        let m1 = m * DMatrix::from_diagonal(&gv);
        let m2 = m * DMatrix::from_diagonal(&gv.component_mul(&gv));
        let rho1 = l.dot(&(&m1 * r));

        let mut bordered = DMatrix::zeros(n + 1, n + 1);
        bordered
            .view_mut((0, 0), (n, n))
            .copy_from(&(m - DMatrix::identity(n, n) * rho));
        bordered.view_mut((0, n), (n, 1)).copy_from(r);
        bordered.view_mut((n, 0), (1, n)).copy_from(&l.transpose());
        let mut rhs = DVector::zeros(n + 1);
        let forcing = -(&m1 * r - r * rho1);
        rhs.rows_mut(0, n).copy_from(&forcing);
        let sol = bordered
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("bordered eigen-system is singular".into()))?;
        let r1 = sol.rows(0, n).into_owned();

        let rho2 = l.dot(&(&m2 * r)) + 2.0 * l.dot(&(&m1 * &r1 - &r1 * rho1));
        Ok(rho2 / rho - (rho1 / rho).powi(2))
    }
}

/// Central second differences of the pressure with one Richardson step.
#[derive(Debug, Clone)]
pub struct FiniteDifference {
    pub step: f64,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        FiniteDifference { step: 1e-3 }
    }
}

impl FiniteDifference {
    fn second_difference(
        &self,
        engine: &Thermo,
        ts: &TransitionStructure,
        f: &Potential,
        g: &Potential,
        h: f64,
        p0: f64,
    ) -> Result<f64> {
        let plus = engine.pressure(ts, &f.combine(1.0, g, h, ts)?)?;
        let minus = engine.pressure(ts, &f.combine(1.0, g, -h, ts)?)?;
        Ok((plus - 2.0 * p0 + minus) / (h * h))
    }
}

impl VarianceMethod for FiniteDifference {
    fn name(&self) -> &'static str {
        "finite-difference"
    }

    fn variance(
        &self,
        engine: &Thermo,
        ts: &TransitionStructure,
        f: &Potential,
        g: &Potential,
    ) -> Result<f64> {
        let p0 = engine.pressure(ts, f)?;
        let coarse = self.second_difference(engine, ts, f, g, 2.0 * self.step, p0)?;
        let fine = self.second_difference(engine, ts, f, g, self.step, p0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

pub fn variance_methods() -> Registry<dyn VarianceMethod> {
    let mut r: Registry<dyn VarianceMethod> = Registry::new("variance");
    r.register("fundamental", || Arc::new(Fundamental));
    r.register("perturbation", || Arc::new(Perturbation));
    r.register(
        "finite-difference",
        || Arc::new(FiniteDifference::default()),
    );
    r
}
