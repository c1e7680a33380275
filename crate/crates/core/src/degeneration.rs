//! Rays `lambda b` through the cone of hexagon coordinates whose marked
//! triples satisfy strict triangle inequalities, rescaled by `t = 1/lambda`.
//!
//! Each rescaled hexagon collapses to a tripod with branches
//! `(b_i + b_j - b_k)/2`, and the surface collapses to the dual graph with
//! edge lengths given by the two tripod branches meeting at each arc. The
//! length potential of the rescaled surface is approximated by locally
//! constant potentials on the dual graph's edge shift; the path
//! `r(t) = -h_t F_t` of their entropy-normalized negatives has pressure
//! norm speed tending to zero at `t = 0`.

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, TransitionStructure};
use crate::hexagon::{
    surface_from_coordinates, HexCoordinates, SurfaceStructure, TriangulationComplex,
};
use crate::metric::{normalize_to_entropy_one, ModuliPoint};
use crate::thermo::{integrate, Potential, Thermo};

/// Tolerance on `sum b = 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Default `t` grid: halvings from 0.2 down to 0.0125.
pub const DEFAULT_T_GRID: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

/// Default `lambda` grid for decay fits.
pub const DEFAULT_DECAY_GRID: [f64; 7] = [30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0];

/// Triangle-inequality margins of each marked hexagon.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    /// `min(b_i + b_j - b_k)` per marked hexagon.
    pub margins: Vec<f64>,
    pub margin: f64,
    pub inside: bool,
}

pub fn cone_check(complex: &TriangulationComplex, b: &[f64]) -> Result<ConeReport> {
    let sides = complex.coordinate_sides();
    if b.len() != sides.len() {
        return Err(Error::InvalidArgument(format!(
            "{} coordinates given, the complex has {}",
            b.len(),
            sides.len()
        )));
    }
    let margins: Vec<f64> = b
        .chunks(3)
        .map(|t| {
            (t[0] + t[1] - t[2])
                .min(t[1] + t[2] - t[0])
                .min(t[2] + t[0] - t[1])
        })
        .collect();
    let margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConeReport {
        margins,
        margin,
        inside: margin > 0.0,
    })
}

/// The ray `lambda -> lambda b` with `sum b = 1` inside the cone.
#[derive(Debug, Clone)]
pub struct DegenerationPath {
    complex: TriangulationComplex,
    base: Vec<f64>,
    cone: ConeReport,
}

impl DegenerationPath {
    pub fn new(complex: &TriangulationComplex, b: &[f64]) -> Result<Self> {
        let complex = complex.marked()?;
        let sum: f64 = b.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "coordinates sum to {sum}, not 1"
            )));
        }
        let cone = cone_check(&complex, b)?;
        if !cone.inside {
            return Err(Error::OutsideCone {
                margin: cone.margin,
            });
        }
        Ok(DegenerationPath {
            complex,
            base: b.to_vec(),
            cone,
        })
    }

    /// The ray through `b`, normalized to `sum b = 1` first.
    pub fn through(complex: &TriangulationComplex, b: &[f64]) -> Result<Self> {
        let sum: f64 = b.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidArgument(
                "coordinates must have a positive sum".into(),
            ));
        }
        let normalized: Vec<f64> = b.iter().map(|x| x / sum).collect();
        DegenerationPath::new(complex, &normalized)
    }

    pub fn complex(&self) -> &TriangulationComplex {
        &self.complex
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn cone(&self) -> &ConeReport {
        &self.cone
    }

    pub fn surface_at(&self, lambda: f64) -> Result<SurfaceStructure> {
        let coords = HexCoordinates::new(&self.complex, self.base.clone())?.scaled(lambda);
        surface_from_coordinates(&self.complex, &coords)
    }

    fn base_side(&self, h: usize, slot: usize) -> f64 {
        let i = self
            .complex
            .coordinate_sides()
            .iter()
            .position(|&s| s == (h, slot))
            .expect("marked boundary side");
        self.base[i]
    }

    /// `(b11, b12, b13)` for an arc: the marked side opposite it, then its
    /// two neighbours.
    fn marked_triple(&self, arc: usize) -> (f64, f64, f64) {
        let (h, slot) = self.marked_slot(arc);
        (
            self.base_side(h, (slot + 3) % 6),
            self.base_side(h, (slot + 1) % 6),
            self.base_side(h, (slot + 5) % 6),
        )
    }

    fn marked_slot(&self, arc: usize) -> (usize, usize) {
        self.complex
            .arc_slots(arc)
            .into_iter()
            .find(|&(h, _)| self.complex.hexagons()[h].marked)
            .expect("every arc borders a marked hexagon")
    }

    /// `(b11 - b12 - b13)/2`, the exponential rate of the arc length in
    /// `lambda`.
    pub fn predicted_slope(&self, arc: usize) -> f64 {
        let (o, p, q) = self.marked_triple(arc);
        0.5 * (o - p - q)
    }

    /// Tripod branch of the marked hexagon at each arc,
    /// `(b_i + b_j - b_k)/2` with `b_k` opposite the arc.
    pub fn marked_branches(&self) -> Vec<f64> {
        (0..self.complex.arcs().len())
            .map(|k| {
                let (o, p, q) = self.marked_triple(k);
                0.5 * (p + q - o)
            })
            .collect()
    }

    /// Limits of `b^c / lambda`: each complementary side tends to the sum of
    /// the marked branches at its two neighbouring arcs.
    pub fn complementary_limits(&self) -> Vec<(String, f64)> {
        let branches = self.marked_branches();
        let mut out = Vec::new();
        for (h, hex) in self.complex.hexagons().iter().enumerate() {
            if hex.marked {
                continue;
            }
            for slot in [1, 3, 5] {
                let before = self.complex.arc_at(h, slot - 1);
                let after = self.complex.arc_at(h, (slot + 1) % 6);
                out.push((
                    hex.sides[slot].name.clone(),
                    branches[before] + branches[after],
                ));
            }
        }
        out
    }

    /// Tripod branches of the complementary hexagons at each arc, from the
    /// limits of their sides.
    pub fn complementary_branches(&self) -> Vec<f64> {
        let limits: Vec<f64> = self
            .complementary_limits()
            .into_iter()
            .map(|x| x.1)
            .collect();
        let mut out = vec![f64::NAN; self.complex.arcs().len()];
        let mut next = 0;
        for (h, hex) in self.complex.hexagons().iter().enumerate() {
            if hex.marked {
                continue;
            }
            let side = |slot: usize| limits[next + (slot - 1) / 2];
            for slot in [0, 2, 4] {
                let adjacent = side((slot + 5) % 6) + side(slot + 1);
                let opposite = side((slot + 3) % 6);
                out[self.complex.arc_at(h, slot)] = 0.5 * (adjacent - opposite);
            }
            next += 3;
        }
        out
    }
}

/// The surface at `lambda b` together with the rescaling factor `t = 1/lambda`.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub lambda: f64,
    pub t: f64,
    pub surface: SurfaceStructure,
}

impl PathSample {
    pub fn rescaled_ortholengths(&self) -> Vec<f64> {
        self.surface
            .ortholengths()
            .iter()
            .map(|a| a * self.t)
            .collect()
    }

    pub fn rescaled_coordinates(&self) -> Vec<f64> {
        self.surface
            .read_coordinates()
            .iter()
            .map(|a| a * self.t)
            .collect()
    }

    pub fn rescaled_complementary(&self) -> Vec<(String, f64)> {
        self.surface
            .complementary_sides()
            .into_iter()
            .map(|(n, c)| (n, c * self.t))
            .collect()
    }

    pub fn rescaled_boundary_lengths(&self) -> Vec<f64> {
        self.surface
            .boundary_lengths()
            .iter()
            .map(|x| x * self.t)
            .collect()
    }
}

pub fn rescaled_surface_at(path: &DegenerationPath, lambda: f64) -> Result<PathSample> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be at least 1, got {lambda}"
        )));
    }
    Ok(PathSample {
        lambda,
        t: 1.0 / lambda,
        surface: path.surface_at(lambda)?,
    })
}

/// Least-squares line through `(x, y)`: `(slope, intercept)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fit of `log l(alpha(lambda)) = intercept + slope * lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub arc: usize,
    pub slope: f64,
    pub intercept: f64,
    pub predicted_slope: f64,
    /// `exp(intercept)`, the leading constant of the arc length.
    pub constant: f64,
}

pub fn arc_decay_rate(
    path: &DegenerationPath,
    arc: usize,
    lambda_grid: &[f64],
) -> Result<DecayFit> {
    if lambda_grid.len() < 3 || lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "lambda grid needs at least 3 increasing values".into(),
        ));
    }
    if arc >= path.complex.arcs().len() {
        return Err(Error::InvalidArgument(format!("arc {arc} does not exist")));
    }
    let logs = lambda_grid
        .iter()
        .map(|&l| Ok(path.surface_at(l)?.log_ortholengths()[arc]))
        .collect::<Result<Vec<f64>>>()?;
    let (slope, intercept) = fit_line(lambda_grid, &logs);
    Ok(DecayFit {
        arc,
        slope,
        intercept,
        predicted_slope: path.predicted_slope(arc),
        constant: intercept.exp(),
    })
}

/// Decay fits for every arc over one grid.
pub fn arc_decay_rates(path: &DegenerationPath, lambda_grid: &[f64]) -> Result<Vec<DecayFit>> {
    (0..path.complex.arcs().len())
        .map(|k| arc_decay_rate(path, k, lambda_grid))
        .collect()
}

/// Errors below this are treated as exact and left out of the fit.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Envelope `C exp(-rate lambda)` of the errors `|b^c(lambda)/lambda - limit|`,
/// fitted to the errors above [`ROUNDOFF_FLOOR`]. `rate` is infinite when
/// fewer than two errors are above it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    pub lambdas: Vec<f64>,
    pub errors: Vec<f64>,
    pub rate: f64,
    pub constant: f64,
}

pub fn complementary_convergence(
    path: &DegenerationPath,
    lambda_grid: &[f64],
) -> Result<ConvergenceFit> {
    if lambda_grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 lambda values".into(),
        ));
    }
    let limits = path.complementary_limits();
    let errors = lambda_grid
        .iter()
        .map(|&l| {
            let sample = rescaled_surface_at(path, l)?;
            Ok(sample
                .rescaled_complementary()
                .iter()
                .zip(&limits)
                .map(|((_, c), (_, lim))| (c - lim).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = lambda_grid
        .iter()
        .zip(&errors)
        .filter(|(_, e)| **e > ROUNDOFF_FLOOR)
        .map(|(l, e)| (*l, e.ln()))
        .unzip();
    let rate = if x.len() >= 2 {
        -fit_line(&x, &y).0
    } else {
        f64::INFINITY
    };
    let constant = if rate.is_finite() {
        lambda_grid
            .iter()
            .zip(&errors)
            .map(|(l, e)| e * (rate * l).exp())
            .fold(0.0, f64::max)
    } else {
        errors.iter().copied().fold(0.0, f64::max)
    };
    Ok(ConvergenceFit {
        lambdas: lambda_grid.to_vec(),
        errors,
        rate,
        constant,
    })
}

/// The metric graph at the end of the ray.
#[derive(Debug, Clone)]
pub struct LimitMetric {
    /// Dual graph with the limit edge lengths (sum of lengths equals 1).
    pub graph: MetricGraph,
    pub marked_branches: Vec<f64>,
    pub complementary_branches: Vec<f64>,
    /// Entropy of `graph`.
    pub entropy: f64,
    /// `graph` scaled to entropy one.
    pub point: ModuliPoint,
}

pub fn limit_graph_metric(engine: &Thermo, path: &DegenerationPath) -> Result<LimitMetric> {
    let marked = path.marked_branches();
    let complementary = path.complementary_branches();
    let lengths: Vec<f64> = marked
        .iter()
        .zip(&complementary)
        .map(|(a, b)| a + b)
        .collect();
    let graph = path.complex.dual_graph().with_lengths(&lengths)?;
    let point = normalize_to_entropy_one(engine, &graph)?;
    let entropy = point.lengths()[0] / lengths[0];
    Ok(LimitMetric {
        graph,
        marked_branches: marked,
        complementary_branches: complementary,
        entropy,
        point,
    })
}

/// Edge lengths recovered from rescaled midpoint distances inside each
/// hexagon: for arcs `x, y, z` of one hexagon with rescaled passages `p`,
/// the branch at `x` is `(p(x,y) + p(x,z) - p(y,z))/2`.
pub fn limit_by_passages(sample: &PathSample) -> Vec<f64> {
    let s = &sample.surface;
    let c = s.complex();
    let mut lengths = vec![0.0; c.arcs().len()];
    for h in 0..c.hexagons().len() {
        let p = |x: usize, y: usize| s.passage(h, x, y) * sample.t;
        for (x, y, z) in [(0, 2, 4), (2, 4, 0), (4, 0, 2)] {
            lengths[c.arc_at(h, x)] += 0.5 * (p(x, y) + p(x, z) - p(y, z));
        }
    }
    lengths
}

fn check_depth(depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::InvalidArgument(
            "approximation depth must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Locally constant approximation of the rescaled length potential on the
/// dual graph's edge shift: on a word of `depth + 1` crossings,
/// `t (D(m_0, m_depth) - D(m_1, m_depth))` with `m_i` the lifted midpoint of
/// the `i`-th crossed arc. Depth one gives the midpoint-to-midpoint passage
/// through each hexagon.
pub fn surface_potential_approx(sample: &PathSample, depth: usize) -> Result<Potential> {
    check_depth(depth)?;
    let s = &sample.surface;
    Potential::from_fn(s.transitions(), depth + 1, |w| {
        sample.t * (s.crossing_distance(w) - s.crossing_distance(&w[1..]))
    })
}

/// The same construction on the limit graph, where midpoints are joined
/// through tripod centres.
pub fn limit_potential(
    path: &DegenerationPath,
    ts: &TransitionStructure,
    depth: usize,
) -> Result<Potential> {
    check_depth(depth)?;
    let marked = path.marked_branches();
    let complementary = path.complementary_branches();
    let dual = path.complex.dual_graph();
    let branch = |arc: usize, h: usize| {
        if path.complex.hexagons()[h].marked {
            marked[arc]
        } else {
            complementary[arc]
        }
    };
    let tree_distance = |w: &[usize]| -> f64 {
        w.windows(2)
            .map(|p| {
                let h = dual.head_of(p[0]);
                branch(p[0] / 2, h) + branch(p[1] / 2, h)
            })
            .sum()
    };
    Potential::from_fn(ts, depth + 1, |w| tree_distance(w) - tree_distance(&w[1..]))
}

/// Pressure-norm speed of `r(t) = -h_t F_t` at one `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedEstimate {
    pub t: f64,
    pub step: f64,
    pub depth: usize,
    pub entropy: f64,
    pub speed: f64,
    /// Mean of the difference quotient under the equilibrium state; zero up
    /// to the difference error.
    pub tangency_residual: f64,
}

fn normalized_path_point(
    engine: &Thermo,
    path: &DegenerationPath,
    t: f64,
    depth: usize,
) -> Result<(Potential, f64, PathSample)> {
    let sample = rescaled_surface_at(path, 1.0 / t)?;
    let f = surface_potential_approx(&sample, depth)?;
    let h = engine.topological_entropy(sample.surface.transitions(), &f)?;
    Ok((f, h, sample))
}

pub fn path_speed(
    engine: &Thermo,
    path: &DegenerationPath,
    t: f64,
    depth: usize,
) -> Result<SpeedEstimate> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "t must lie in (0, 1], got {t}"
        )));
    }
    let step = (t / 10.0).min(1e-3);
    let (f, h, sample) = normalized_path_point(engine, path, t, depth)?;
    let ts = sample.surface.transitions();
    let (fp, hp, _) = normalized_path_point(engine, path, t + step, depth)?;
    let (fm, hm, _) = normalized_path_point(engine, path, t - step, depth)?;
    let r = f.scale(-h);
    let derivative = fp.combine(-hp / (2.0 * step), &fm, hm / (2.0 * step), ts)?;
    let state = engine.equilibrium_state(ts, &r)?;
    let mean_length = integrate(&f, &state)?;
    let var = engine.variance(ts, &r, &derivative, true)?;
    Ok(SpeedEstimate {
        t,
        step,
        depth,
        entropy: h,
        speed: (var.value.max(0.0) / (h * mean_length)).sqrt(),
        tangency_residual: var.mean,
    })
}

/// Entropy of the rescaled surface against the band
/// `h_0 / (1 + 4 t e^{-c/2t} / c') <= h_t <= h_0 / (1 - 4 t e^{-c/2t} / c')`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyBand {
    pub t: f64,
    pub entropy: f64,
    pub limit_entropy: f64,
    pub lower: f64,
    /// Infinite while the band's denominator is not positive.
    pub upper: f64,
    pub inside: bool,
}

/// Constants of the band: `c = -2 max(fitted slope)` and `c'` the smallest
/// rescaled side in the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct BandConstants {
    pub c: f64,
    pub c_prime: f64,
}

pub fn band_constants(path: &DegenerationPath, lambda_grid: &[f64]) -> Result<BandConstants> {
    let fits = arc_decay_rates(path, lambda_grid)?;
    let max_slope = fits
        .iter()
        .map(|f| f.slope)
        .fold(f64::NEG_INFINITY, f64::max);
    let c_prime = path
        .base
        .iter()
        .copied()
        .chain(path.complementary_limits().into_iter().map(|x| x.1))
        .fold(f64::INFINITY, f64::min);
    Ok(BandConstants {
        c: -2.0 * max_slope,
        c_prime,
    })
}

pub fn entropy_band(
    engine: &Thermo,
    path: &DegenerationPath,
    constants: &BandConstants,
    limit_entropy: f64,
    t: f64,
    depth: usize,
) -> Result<EntropyBand> {
    let (_, h, _) = normalized_path_point(engine, path, t, depth)?;
    let delta = 4.0 * t * (-constants.c / (2.0 * t)).exp() / constants.c_prime;
    let lower = limit_entropy / (1.0 + delta);
    let upper = if delta < 1.0 {
        limit_entropy / (1.0 - delta)
    } else {
        f64::INFINITY
    };
    Ok(EntropyBand {
        t,
        entropy: h,
        limit_entropy,
        lower,
        upper,
        inside: lower <= h && h <= upper,
    })
}

/// Trapezoid integral of the speed over a geometric `t` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLength {
    /// Decreasing `t` values, from `t_max` to `t_min`.
    pub grid: Vec<f64>,
    pub speeds: Vec<SpeedEstimate>,
    /// Length from `t_max` down to each grid point.
    pub cumulative: Vec<f64>,
    pub total: f64,
    /// `(t/2, t, L(t/2, t))` for each full halving of `t` from `t_max`.
    pub tail_increments: Vec<(f64, f64, f64)>,
    /// Ratios of successive tail increments.
    pub ratios: Vec<f64>,
}

/// Grid points `t_max 2^(-k/m)` down to `t_min`, with `t_min` appended if it
/// is not on the geometric grid.
pub fn octave_grid(t_min: f64, t_max: f64, points_per_octave: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min <= t_max && t_max <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < t_min <= t_max <= 1, got {t_min}, {t_max}"
        )));
    }
    if points_per_octave == 0 {
        return Err(Error::InvalidArgument(
            "points per octave must be positive".into(),
        ));
    }
    let mut grid = vec![t_max];
    let mut k = 1;
    loop {
        let t = t_max * 2f64.powf(-(k as f64) / points_per_octave as f64);
        if t < t_min * (1.0 + 1e-12) {
            break;
        }
        grid.push(t);
        k += 1;
    }
    if (grid.last().unwrap() - t_min).abs() > 1e-12 * t_min {
        grid.push(t_min);
    } else {
        *grid.last_mut().unwrap() = t_min;
    }
    Ok(grid)
}

pub fn path_length(
    engine: &Thermo,
    path: &DegenerationPath,
    t_min: f64,
    t_max: f64,
    depth: usize,
    points_per_octave: usize,
) -> Result<PathLength> {
    let grid = octave_grid(t_min, t_max, points_per_octave)?;
    let speeds = grid
        .iter()
        .map(|&t| path_speed(engine, path, t, depth))
        .collect::<Result<Vec<_>>>()?;
    let mut cumulative = vec![0.0];
    for i in 1..grid.len() {
        let panel = 0.5 * (grid[i - 1] - grid[i]) * (speeds[i - 1].speed + speeds[i].speed);
        cumulative.push(cumulative[i - 1] + panel);
    }
    let total = *cumulative.last().unwrap();
    let mut tail_increments = Vec::new();
    let mut hi = 0;
    while hi + points_per_octave < grid.len() {
        let lo = hi + points_per_octave;
        if (grid[lo] - 0.5 * grid[hi]).abs() > 1e-9 * grid[hi] {
            break;
        }
        tail_increments.push((grid[lo], grid[hi], cumulative[lo] - cumulative[hi]));
        hi = lo;
    }
    let ratios = tail_increments
        .windows(2)
        .map(|w| w[1].2 / w[0].2)
        .collect();
    Ok(PathLength {
        grid,
        speeds,
        cumulative,
        total,
        tail_increments,
        ratios,
    })
}

#[cfg(test)]
mod tests;
