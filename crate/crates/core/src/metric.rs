//! Entropy-one metrics on a graph and the pressure metric on their moduli
//! space.
//!
//! A metric `l` is pulled back to the potential `-F_l` (minus the length of
//! the first edge), which has pressure zero exactly when `h(l) = 1`. A tangent
//! vector `v` is a per-edge rate of change of the lengths, constrained so that
//! the entropy stays one to first order, and its pressure norm is
//! `Var(F_v, mu) / integral of F_l dmu` with `mu` the equilibrium state of
//! `-F_l`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{
    build_transition_structure, enumerate_closed_geodesics_shorter_than, CutSystem, MetricGraph,
    TransitionStructure, DEFAULT_ENUMERATION_CAP,
};
use crate::thermo::{integrate, EquilibriumState, Potential, Thermo};

/// Tolerance on `|h(l) - 1|` for a point of the moduli space.
pub const ENTROPY_TOLERANCE: f64 = 1e-10;
/// Tolerance on the first-order entropy constraint of a tangent vector.
pub const TANGENCY_TOLERANCE: f64 = 1e-10;

/// A metric on a graph with topological entropy one.
#[derive(Debug, Clone)]
pub struct ModuliPoint {
    graph: MetricGraph,
    ts: TransitionStructure,
}

impl ModuliPoint {
    /// Accept a graph whose entropy is already one.
    pub fn new(engine: &Thermo, graph: MetricGraph) -> Result<Self> {
        let ts = build_transition_structure(&graph)?;
        let h = engine.topological_entropy(&ts, &Potential::lengths(&ts, &graph)?)?;
        if (h - 1.0).abs() > ENTROPY_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "metric has entropy {h}, not 1"
            )));
        }
        Ok(ModuliPoint { graph, ts })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn transitions(&self) -> &TransitionStructure {
        &self.ts
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.graph.lengths()
    }

    pub fn dimension(&self) -> usize {
        self.graph.edge_count() - 1
    }

    pub fn length_potential(&self) -> Potential {
        Potential::lengths(&self.ts, &self.graph).expect("lengths match the graph")
    }

    /// Equilibrium state of `-F_l` on directed edges.
    pub fn equilibrium(&self, engine: &Thermo) -> Result<EquilibriumState> {
        engine.equilibrium_state(&self.ts, &thermodynamic_map(self))
    }

    /// `mu(+e) + mu(-e)` for each edge `e`; these sum to one.
    pub fn edge_masses(&self, engine: &Thermo) -> Result<Vec<f64>> {
        let state = self.equilibrium(engine)?;
        let symbol = state.symbol_masses(self.ts.len());
        Ok((0..self.graph.edge_count())
            .map(|k| symbol[2 * k] + symbol[2 * k + 1])
            .collect())
    }
}

/// Scale the lengths by the entropy, `l -> h(l) l`.
pub fn normalize_to_entropy_one(engine: &Thermo, graph: &MetricGraph) -> Result<ModuliPoint> {
    let ts = build_transition_structure(graph)?;
    let h = engine.topological_entropy(&ts, &Potential::lengths(&ts, graph)?)?;
    let graph = graph.scaled(h)?;
    ModuliPoint::new(engine, graph)
}

/// The pressure-zero potential `-F_l`.
pub fn thermodynamic_map(p: &ModuliPoint) -> Potential {
    p.length_potential().scale(-1.0)
}

/// Per-edge length rates at a moduli point, in the graph's edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub rates: Vec<f64>,
}

impl TangentVector {
    pub fn new(rates: Vec<f64>) -> Self {
        TangentVector { rates }
    }

    pub fn zero(dim: usize) -> Self {
        TangentVector {
            rates: vec![0.0; dim],
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        TangentVector::new(self.rates.iter().map(|x| c * x).collect())
    }

    pub fn plus(&self, other: &TangentVector, c: f64) -> Self {
        TangentVector::new(
            self.rates
                .iter()
                .zip(&other.rates)
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }

    pub fn norm_l2(&self) -> f64 {
        self.rates.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// `sum_e mu_e v_e`, zero for tangent vectors.
pub fn tangency_residual(engine: &Thermo, p: &ModuliPoint, v: &TangentVector) -> Result<f64> {
    let masses = p.edge_masses(engine)?;
    check_dimension(p, v)?;
    Ok(masses.iter().zip(&v.rates).map(|(m, x)| m * x).sum())
}

fn check_dimension(p: &ModuliPoint, v: &TangentVector) -> Result<()> {
    if v.rates.len() != p.graph.edge_count() {
        return Err(Error::InvalidArgument(format!(
            "tangent vector has {} entries, graph has {} edges",
            v.rates.len(),
            p.graph.edge_count()
        )));
    }
    Ok(())
}

/// Project onto the tangent hyperplane along the constant direction:
/// `v - (sum mu_e v_e) 1`, using that the masses sum to one.
pub fn project_to_tangent(
    engine: &Thermo,
    p: &ModuliPoint,
    v: &TangentVector,
) -> Result<TangentVector> {
    let shift = tangency_residual(engine, p, v)?;
    Ok(TangentVector::new(
        v.rates.iter().map(|x| x - shift).collect(),
    ))
}

/// The `|E| - 1` projected coordinate differences `e_k - e_{k+1}`.
pub fn tangent_basis(engine: &Thermo, p: &ModuliPoint) -> Result<Vec<TangentVector>> {
    let n = p.graph.edge_count();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "moduli space of a one-edge graph is a point".into(),
        ));
    }
    (0..n - 1)
        .map(|k| {
            let mut rates = vec![0.0; n];
            rates[k] = 1.0;
            rates[k + 1] = -1.0;
            project_to_tangent(engine, p, &TangentVector::new(rates))
        })
        .collect()
}

/// Squared pressure norm `Var(F_v, mu) / integral of F_l dmu`.
pub fn pressure_norm(engine: &Thermo, p: &ModuliPoint, v: &TangentVector) -> Result<f64> {
    check_dimension(p, v)?;
    let state = p.equilibrium(engine)?;
    let masses = state.symbol_masses(p.ts.len());
    let residual: f64 = (0..p.graph.edge_count())
        .map(|k| (masses[2 * k] + masses[2 * k + 1]) * v.rates[k])
        .sum();
    if residual.abs() > TANGENCY_TOLERANCE {
        return Err(Error::NotTangent { residual });
    }
    let fv = Potential::from_edge_values(&p.ts, &v.rates)?;
    let mean_length = integrate(&p.length_potential(), &state)?;
    let var = engine
        .variance(&p.ts, &thermodynamic_map(p), &fv, true)?
        .value;
    Ok(var / mean_length)
}

/// Pressure inner product by polarization.
pub fn pressure_inner(
    engine: &Thermo,
    p: &ModuliPoint,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<f64> {
    let plus = pressure_norm(engine, p, &u.plus(v, 1.0))?;
    let minus = pressure_norm(engine, p, &u.plus(v, -1.0))?;
    Ok((plus - minus) / 4.0)
}

/// Independent estimate of the squared pressure norm from the curve
/// `l_s = normalize(l + s v)` inside the moduli space.
///
/// Along the curve `P(-F_{l_s}) = 0`; differentiating twice gives
/// `Var(F_v) = integral of F_{l''} dmu`, and `l''` is taken by central
/// differences of the normalized curve with one Richardson step.
pub fn pressure_norm_by_curve(
    engine: &Thermo,
    p: &ModuliPoint,
    v: &TangentVector,
    step: f64,
) -> Result<f64> {
    check_dimension(p, v)?;
    let l = p.lengths();
    let point = |s: f64| -> Result<Vec<f64>> {
        let shifted: Vec<f64> = l.iter().zip(&v.rates).map(|(a, b)| a + s * b).collect();
        let g = p.graph.with_lengths(&shifted)?;
        Ok(normalize_to_entropy_one(engine, &g)?.lengths())
    };
    let second = |h: f64| -> Result<Vec<f64>> {
        let (a, b) = (point(h)?, point(-h)?);
        Ok((0..l.len())
            .map(|k| (a[k] - 2.0 * l[k] + b[k]) / (h * h))
            .collect())
    };
    let fine = second(step)?;
    let coarse = second(2.0 * step)?;
    let accel: Vec<f64> = fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect();
    let state = p.equilibrium(engine)?;
    let masses = state.symbol_masses(p.ts.len());
    let weighted = |x: &[f64]| -> f64 {
        (0..x.len())
            .map(|k| (masses[2 * k] + masses[2 * k + 1]) * x[k])
            .sum()
    };
    Ok(weighted(&accel) / weighted(&l))
}

/// Gram matrix of the pressure metric over a tangent basis.
#[derive(Debug, Clone)]
pub struct MetricTensor {
    pub basis: Vec<TangentVector>,
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

impl MetricTensor {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues.iter().all(|&e| e > 0.0)
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Quadratic form on basis coordinates.
    pub fn quadratic_form(&self, coords: &[f64]) -> f64 {
        let x = DVector::from_column_slice(coords);
        x.dot(&(&self.matrix * &x))
    }
}

pub fn metric_tensor(engine: &Thermo, p: &ModuliPoint) -> Result<MetricTensor> {
    let basis = tangent_basis(engine, p)?;
    metric_tensor_on(engine, p, basis)
}

/// Gram matrix of the given tangent vectors.
pub fn metric_tensor_on(
    engine: &Thermo,
    p: &ModuliPoint,
    basis: Vec<TangentVector>,
) -> Result<MetricTensor> {
    let d = basis.len();
    let mut matrix = DMatrix::zeros(d, d);
    for i in 0..d {
        matrix[(i, i)] = pressure_norm(engine, p, &basis[i])?;
        for j in 0..i {
            let g = pressure_inner(engine, p, &basis[i], &basis[j])?;
            matrix[(i, j)] = g;
            matrix[(j, i)] = g;
        }
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(matrix.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(MetricTensor {
        basis,
        matrix,
        eigenvalues,
    })
}

/// Finite-`T` estimate of the renormalized intersection of two metrics on
/// the same graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionEstimate {
    pub value: f64,
    pub geodesics: usize,
    pub t: f64,
}

/// `(h(l2) / h(l1))` times the mean of `l2(g) / l1(g)` over oriented closed
/// geodesics `g` with `l1(g) < T`.
pub fn intersection_j(
    engine: &Thermo,
    l1: &ModuliPoint,
    l2: &ModuliPoint,
    t: f64,
) -> Result<IntersectionEstimate> {
    if l1.graph.edge_count() != l2.graph.edge_count() || l1.ts != l2.ts {
        return Err(Error::InvalidArgument(
            "metrics live on different graphs".into(),
        ));
    }
    let ts = &l1.ts;
    let a: Vec<f64> = (0..ts.len())
        .map(|s| l1.graph.edges()[s / 2].length)
        .collect();
    let b: Vec<f64> = (0..ts.len())
        .map(|s| l2.graph.edges()[s / 2].length)
        .collect();
    let geodesics = enumerate_closed_geodesics_shorter_than(ts, &a, t, DEFAULT_ENUMERATION_CAP)?;
    if geodesics.is_empty() {
        return Err(Error::NoGeodesics { threshold: t });
    }
    let h1 = engine.topological_entropy(ts, &l1.length_potential())?;
    let h2 = engine.topological_entropy(ts, &l2.length_potential())?;
    let sum: f64 = geodesics
        .iter()
        .map(|g| {
            let la: f64 = g.symbols().iter().map(|&s| a[s]).sum();
            let lb: f64 = g.symbols().iter().map(|&s| b[s]).sum();
            lb / la
        })
        .sum();
    Ok(IntersectionEstimate {
        value: h2 / h1 * sum / geodesics.len() as f64,
        geodesics: geodesics.len(),
        t,
    })
}

/// The graph's geodesic flow coded by crossings of the midpoints of the cut
/// edges of a spanning-tree complement.
#[derive(Debug, Clone)]
pub struct MidpointCoding {
    pub cut: CutSystem,
    pub ts: TransitionStructure,
    /// Tree path (as graph symbols) from the head of crossing `x` to the tail
    /// of crossing `y`, indexed `[x][y]`.
    paths: Vec<Vec<Vec<usize>>>,
}

impl MidpointCoding {
    pub fn new(graph: &MetricGraph, cut: CutSystem) -> Result<Self> {
        let ts = cut.coding(graph)?;
        let n = ts.len();
        let paths = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let from = graph.head_of(cut.graph_symbol(x));
                        let to = graph.tail_of(cut.graph_symbol(y));
                        cut.tree_path(graph, from, to).ok_or_else(|| {
                            Error::InvalidGraph("cut system does not leave a spanning tree".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MidpointCoding { cut, ts, paths })
    }

    /// Depth-2 potential: half of the first cut edge, the tree path, and half
    /// of the second cut edge, all weighted by per-edge values.
    pub fn recode(&self, edge_values: &[f64]) -> Result<Potential> {
        Potential::from_fn(&self.ts, 2, |w| {
            let first = edge_values[self.cut.graph_symbol(w[0]) / 2];
            let second = edge_values[self.cut.graph_symbol(w[1]) / 2];
            let tree: f64 = self.paths[w[0]][w[1]]
                .iter()
                .map(|&s| edge_values[s / 2])
                .sum();
            0.5 * first + tree + 0.5 * second
        })
    }
}

/// The pressure norm evaluated in the midpoint coding of a cut system.
pub fn metric_via_midpoint_coding(
    engine: &Thermo,
    p: &ModuliPoint,
    v: &TangentVector,
    cut: &CutSystem,
) -> Result<f64> {
    check_dimension(p, v)?;
    let coding = MidpointCoding::new(&p.graph, cut.clone())?;
    let fl = coding.recode(&p.lengths())?;
    let fv = coding.recode(&v.rates)?;
    let phi = fl.scale(-1.0);
    let state = engine.equilibrium_state(&coding.ts, &phi)?;
    let mean_length = integrate(&fl, &state)?;
    let var = engine.variance(&coding.ts, &phi, &fv, true)?;
    if var.mean.abs() > TANGENCY_TOLERANCE * mean_length.abs().max(1.0) {
        return Err(Error::NotTangent { residual: var.mean });
    }
    Ok(var.value / mean_length)
}

#[cfg(test)]
mod tests;
