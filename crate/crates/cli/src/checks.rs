//! The invariant suite behind `selftest` and the acceptance target: one
//! function per criterion, each returning its measured residuals.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermograph::degeneration::{
    arc_decay_rates, cone_check, limit_by_passages, limit_graph_metric, path_length, path_speed,
    rescaled_surface_at, DegenerationPath, DEFAULT_DECAY_GRID,
};
use thermograph::graph::{
    build_transition_structure, bundled_graph, CutSystem, TransitionStructure, BUNDLED_GRAPHS,
};
use thermograph::hexagon::{
    bundled_complex, opposite_side, surface_from_coordinates, HexCoordinates,
};
use thermograph::metric::{
    metric_tensor, metric_via_midpoint_coding, normalize_to_entropy_one, pressure_norm,
};
use thermograph::thermo::{
    entropy_by_counting, integrate, markov_entropy, BlockSystem, EquilibriumState, Potential,
    Thermo,
};

use crate::commands::{DECAY_TOLERANCE, PASSAGE_LAMBDA, PASSAGE_TOLERANCE, TAIL_RATIO_BOUND};
use crate::report::Residual;
use crate::CliError;

pub const SAMPLES: usize = 20;
pub const PAIRS: usize = 10;

#[derive(Debug, Clone)]
pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub residuals: Vec<Residual>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(Residual::ok)
    }
}

type Check = fn(&Thermo, u64) -> Result<Vec<Residual>, CliError>;

pub const CRITERIA: [(u32, &str, Check); 9] = [
    (1, "entropy exactness", entropy_exactness),
    (2, "variational principle", variational_principle),
    (3, "derivative consistency", derivative_consistency),
    (4, "coboundary degeneracy", coboundary_degeneracy),
    (5, "metric positivity", metric_positivity),
    (6, "hexagon geometry", hexagon_geometry),
    (7, "degeneration asymptotics", degeneration_asymptotics),
    (8, "limit metric", limit_metric),
    (9, "incompleteness evidence", incompleteness_evidence),
];

pub fn run(id: u32, engine: &Thermo, seed: u64) -> Result<Criterion, CliError> {
    let (_, title, check) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| CliError::Usage(format!("no criterion {id}")))?;
    Ok(Criterion {
        id,
        title,
        residuals: check(engine, seed)?,
    })
}

pub fn all(engine: &Thermo, seed: u64) -> Result<Vec<Criterion>, CliError> {
    CRITERIA.iter().map(|c| run(c.0, engine, seed)).collect()
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn system(name: &str) -> Result<TransitionStructure, CliError> {
    let g = bundled_graph(name).expect("bundled graph");
    Ok(build_transition_structure(&g)?)
}

fn random_potential(ts: &TransitionStructure, rng: &mut ChaCha8Rng) -> Result<Potential, CliError> {
    Ok(Potential::from_fn(ts, 1, |_| rng.gen_range(-1.0..1.0))?)
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn entropy_exactness(engine: &Thermo, _seed: u64) -> Result<Vec<Residual>, CliError> {
    let g = bundled_graph("theta").expect("bundled graph");
    let ts = build_transition_structure(&g)?;
    let h = engine.topological_entropy(&ts, &Potential::lengths(&ts, &g)?)?;
    let counted = entropy_by_counting(&ts, &g, 14.0)?;
    let ln2 = std::f64::consts::LN_2;
    Ok(vec![
        Residual::at_most("theta_entropy_error", (h - ln2).abs(), 1e-10),
        Residual::at_most(
            "theta_counting_relative_T14",
            (counted - ln2).abs() / ln2,
            0.1,
        ),
    ])
}

fn random_markov(block: &BlockSystem, rng: &mut ChaCha8Rng) -> Result<EquilibriumState, CliError> {
    let n = block.len();
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        let w: Vec<f64> = block
            .successors(i)
            .iter()
            .map(|_| rng.gen_range(0.05..1.0))
            .collect();
        let total: f64 = w.iter().sum();
        for (&j, wj) in block.successors(i).iter().zip(&w) {
            q[(i, j)] = wj / total;
        }
    }
    Ok(EquilibriumState::from_transition_matrix(block, q)?)
}

fn variational_principle(engine: &Thermo, seed: u64) -> Result<Vec<Residual>, CliError> {
    let mut rng = rng(seed, 2);
    let mut out = Vec::new();
    for name in BUNDLED_GRAPHS {
        let ts = system(name)?;
        let f = random_potential(&ts, &mut rng)?;
        let p = engine.pressure(&ts, &f)?;
        let block = BlockSystem::new(&ts, 1)?;
        let mut excess = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let mu = random_markov(&block, &mut rng)?;
            excess = excess.max(markov_entropy(&mu) + integrate(&f, &mu)? - p);
        }
        let eq = engine.equilibrium_state(&ts, &f)?;
        let gap = (markov_entropy(&eq) + integrate(&f, &eq)? - p).abs();
        out.push(Residual::at_most(
            format!("{name}_max_excess"),
            excess,
            1e-12,
        ));
        out.push(Residual::at_most(
            format!("{name}_equilibrium_gap"),
            gap,
            1e-10,
        ));
    }
    Ok(out)
}

fn derivative_consistency(engine: &Thermo, seed: u64) -> Result<Vec<Residual>, CliError> {
    let mut rng = rng(seed, 3);
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for k in 0..SAMPLES {
        let ts = system(BUNDLED_GRAPHS[k % BUNDLED_GRAPHS.len()])?;
        let f = random_potential(&ts, &mut rng)?;
        let g = random_potential(&ts, &mut rng)?;
        let p = |eps: f64| -> Result<f64, CliError> {
            Ok(engine.pressure(&ts, &f.combine(1.0, &g, eps, &ts)?)?)
        };
        let eq = engine.equilibrium_state(&ts, &f)?;
        let slope = integrate(&g, &eq)?;
        let e1 = 1e-5;
        let slope_fd = (p(e1)? - p(-e1)?) / (2.0 * e1);
        let e2 = 1e-3;
        let curvature = engine.second_derivative(&ts, &f, &g)?;
        let curvature_fd = (p(e2)? - 2.0 * p(0.0)? + p(-e2)?) / (e2 * e2);
        first = first.max(relative(slope, slope_fd));
        second = second.max(relative(curvature, curvature_fd));
    }
    Ok(vec![
        Residual::at_most("first_derivative_relative", first, 1e-6),
        Residual::at_most("second_derivative_relative", second, 1e-5),
    ])
}

fn coboundary_degeneracy(engine: &Thermo, seed: u64) -> Result<Vec<Residual>, CliError> {
    let mut rng = rng(seed, 4);
    let mut worst = 0.0f64;
    for k in 0..SAMPLES {
        let ts = system(BUNDLED_GRAPHS[k % BUNDLED_GRAPHS.len()])?;
        let f = random_potential(&ts, &mut rng)?;
        let u: Vec<f64> = (0..ts.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = Potential::coboundary(&ts, &u)?;
        worst = worst.max(engine.variance(&ts, &f, &c, true)?.value.abs());
    }
    Ok(vec![Residual::at_most(
        "max_coboundary_variance",
        worst,
        1e-10,
    )])
}

fn metric_positivity(engine: &Thermo, seed: u64) -> Result<Vec<Residual>, CliError> {
    let mut rng = rng(seed, 5);
    let mut out = Vec::new();
    for name in ["theta", "two_loop"] {
        let g = bundled_graph(name).expect("bundled graph");
        let mut min_eig = f64::INFINITY;
        let mut coding = 0.0f64;
        for _ in 0..SAMPLES {
            let lengths: Vec<f64> = (0..g.edge_count())
                .map(|_| rng.gen_range(0.5..2.0))
                .collect();
            let p = normalize_to_entropy_one(engine, &g.with_lengths(&lengths)?)?;
            let t = metric_tensor(engine, &p)?;
            min_eig = min_eig.min(t.min_eigenvalue());
            let cut = CutSystem::spanning_tree_complement(p.graph());
            for v in &t.basis {
                let direct = pressure_norm(engine, &p, v)?;
                coding = coding.max(relative(
                    direct,
                    metric_via_midpoint_coding(engine, &p, v, &cut)?,
                ));
            }
        }
        out.push(Residual::above(
            format!("{name}_min_eigenvalue"),
            min_eig,
            0.0,
        ));
        out.push(Residual::at_most(
            format!("{name}_coding_relative"),
            coding,
            1e-8,
        ));
    }
    Ok(out)
}

fn hexagon_geometry(_engine: &Thermo, seed: u64) -> Result<Vec<Residual>, CliError> {
    let b = 2f64.acosh();
    let self_dual = (opposite_side(b, b, b) - b).abs();
    let pants = bundled_complex("pants")
        .expect("bundled complex")
        .marked()?;
    let mut rng = rng(seed, 6);
    let mut bases = vec![vec![b, b, b], vec![1.0, 1.5, 2.0]];
    bases.extend((0..SAMPLES).map(|_| {
        (0..3)
            .map(|_| rng.gen_range(0.3..4.0))
            .collect::<Vec<f64>>()
    }));
    let mut worst = 0.0f64;
    for base in bases {
        let s = surface_from_coordinates(&pants, &HexCoordinates::new(&pants, base)?)?;
        for (cycle, sum) in s.cuff_cycles().iter().zip(s.boundary_lengths()) {
            worst = worst.max((s.closed_geodesic_length(cycle)? - sum).abs());
        }
    }
    Ok(vec![
        Residual::at_most("self_dual_error", self_dual, 1e-12),
        Residual::at_most("pants_boundary_trace_error", worst, 1e-9),
    ])
}

fn asymptotic_paths() -> Result<Vec<(&'static str, DegenerationPath)>, CliError> {
    let pants = bundled_complex("pants").expect("bundled complex");
    let third = 1.0 / 3.0;
    let torus = bundled_complex("two_holed_torus").expect("bundled complex");
    let n = torus.marked()?.coordinate_names().len();
    let uneven: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i % 3) as f64).collect();
    Ok(vec![
        (
            "pants_equilateral",
            DegenerationPath::new(&pants, &[third, third, 1.0 - 2.0 * third])?,
        ),
        (
            "pants_skew",
            DegenerationPath::new(&pants, &[0.2, 0.35, 0.45])?,
        ),
        (
            "two_holed_torus",
            DegenerationPath::through(&torus, &uneven)?,
        ),
    ])
}

fn degeneration_asymptotics(_engine: &Thermo, _seed: u64) -> Result<Vec<Residual>, CliError> {
    let mut out = Vec::new();
    for (name, path) in asymptotic_paths()? {
        let fits = arc_decay_rates(&path, &DEFAULT_DECAY_GRID)?;
        let slope = max(fits.iter().map(|f| (f.slope - f.predicted_slope).abs()));
        let sample = rescaled_surface_at(&path, 60.0)?;
        let limits = path.complementary_limits();
        let side = max(sample
            .rescaled_complementary()
            .iter()
            .zip(&limits)
            .map(|((_, x), (_, l))| (x - l).abs()));
        out.push(Residual::at_most(
            format!("{name}_slope_error"),
            slope,
            DECAY_TOLERANCE,
        ));
        out.push(Residual::at_most(
            format!("{name}_complementary_error_60"),
            side,
            1e-3,
        ));
    }
    Ok(out)
}

fn random_pants_base(rng: &mut ChaCha8Rng, min_margin: f64) -> Result<Vec<f64>, CliError> {
    let pants = bundled_complex("pants").expect("bundled complex");
    loop {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = x.iter().sum();
        let b = vec![x[0] / s, x[1] / s, 1.0 - x[0] / s - x[1] / s];
        if cone_check(&pants, &b)?.margin > min_margin {
            return Ok(b);
        }
    }
}

fn limit_metric(engine: &Thermo, seed: u64) -> Result<Vec<Residual>, CliError> {
    let mut gap = 0.0f64;
    for (_, path) in asymptotic_paths()? {
        let lim = limit_graph_metric(engine, &path)?;
        let passages = limit_by_passages(&rescaled_surface_at(&path, PASSAGE_LAMBDA)?);
        gap = gap.max(max(passages
            .iter()
            .zip(lim.graph.lengths())
            .map(|(p, l)| (p - l).abs())));
    }
    let pants = bundled_complex("pants").expect("bundled complex");
    let mut rng = rng(seed, 8);
    let mut closest = f64::INFINITY;
    for _ in 0..PAIRS {
        let a = random_pants_base(&mut rng, 0.02)?;
        let b = random_pants_base(&mut rng, 0.02)?;
        let la = limit_graph_metric(engine, &DegenerationPath::new(&pants, &a)?)?;
        let lb = limit_graph_metric(engine, &DegenerationPath::new(&pants, &b)?)?;
        let d = max(la
            .point
            .lengths()
            .iter()
            .zip(lb.point.lengths())
            .map(|(x, y)| (x - y).abs()));
        closest = closest.min(d);
    }
    Ok(vec![
        Residual::at_most("limit_vs_passages_60", gap, PASSAGE_TOLERANCE),
        Residual::above("closest_pair_of_limits", closest, 1e-9),
    ])
}

fn incompleteness_evidence(engine: &Thermo, _seed: u64) -> Result<Vec<Residual>, CliError> {
    let third = 1.0 / 3.0;
    let pants = bundled_complex("pants").expect("bundled complex");
    let path = DegenerationPath::new(&pants, &[third, third, 1.0 - 2.0 * third])?;
    let speeds = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&t| Ok(path_speed(engine, &path, t, 2)?.speed))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let step = max(speeds.windows(2).map(|w| w[1] - w[0]));
    let pl = path_length(engine, &path, 0.0125, 0.2, 2, 1)?;
    Ok(vec![
        Residual::below("speed_step_max", step, 0.0),
        Residual::below(
            "tail_ratio_max",
            max(pl.ratios.iter().copied()),
            TAIL_RATIO_BOUND,
        ),
        Residual::above("tail_halvings", pl.ratios.len() as f64, 1.0),
    ])
}
