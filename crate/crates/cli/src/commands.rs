//! One function per subcommand, each turning a validated [`RunConfig`] into a
//! [`Report`].

use std::path::Path;

use thermograph::degeneration::{
    arc_decay_rates, band_constants, complementary_convergence, entropy_band, limit_by_passages,
    limit_graph_metric, path_length, path_speed, rescaled_surface_at, DegenerationPath,
};
use thermograph::graph::{build_transition_structure, bundled_graph, CutSystem, MetricGraph};
use thermograph::hexagon::{
    bundled_complex, surface_from_coordinates, HexCoordinates, TriangulationComplex,
};
use thermograph::metric::{
    intersection_j, metric_tensor, metric_via_midpoint_coding, normalize_to_entropy_one,
    pressure_norm_by_curve, ModuliPoint,
};
use thermograph::thermo::{entropy_by_counting, Potential, Thermo};

use crate::checks;
use crate::config::{Command, RunConfig};
use crate::report::{Json, Report, Residual, Table};
use crate::CliError;

/// Tolerance on the symmetry of the metric tensor.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-12;
/// Relative agreement of the tensor with the curve oracle.
pub const CURVE_TOLERANCE: f64 = 1e-5;
/// Relative agreement of the tensor with the midpoint coding.
pub const CODING_TOLERANCE: f64 = 1e-8;
/// Relative agreement of traced cuff lengths with summed sides.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;
pub const DECAY_TOLERANCE: f64 = 1e-3;
pub const PASSAGE_TOLERANCE: f64 = 1e-4;
/// `lambda` at which the limit metric is compared with rescaled passages.
pub const PASSAGE_LAMBDA: f64 = 60.0;
/// Bound on the tail-increment ratio of `pathlen`.
pub const TAIL_RATIO_BOUND: f64 = 0.7;
/// Bound on the mean of the speed difference quotient.
pub const SPEED_TANGENCY_TOLERANCE: f64 = 1e-3;

pub fn dispatch(config: &RunConfig) -> Result<Report, CliError> {
    let engine = Thermo::from_names(&config.perron, &config.variance)?;
    match config.command {
        Command::Entropy => entropy(config, &engine),
        Command::Normalize => normalize(config, &engine),
        Command::Tensor => tensor(config, &engine),
        Command::Intersect => intersect(config, &engine),
        Command::Surface => surface(config),
        Command::Degenerate => degenerate(config, &engine),
        Command::Pathlen => pathlen(config, &engine),
        Command::Selftest => selftest(config, &engine),
    }
}

fn require<'a, T: ?Sized>(value: Option<&'a T>, flag: &str) -> Result<&'a T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

/// A graph file, or a bundled graph named by the file stem when no such file
/// exists.
pub fn load_graph(name: &str) -> Result<MetricGraph, CliError> {
    let path = Path::new(name);
    if path.exists() {
        return Ok(MetricGraph::load(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    bundled_graph(stem)
        .ok_or_else(|| CliError::Input(format!("no graph file or bundled graph '{name}'")))
}

pub fn load_complex(name: &str) -> Result<TriangulationComplex, CliError> {
    let path = Path::new(name);
    if path.exists() {
        return Ok(TriangulationComplex::load(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    bundled_complex(stem)
        .ok_or_else(|| CliError::Input(format!("no complex file or bundled complex '{name}'")))
}

fn graph_with(name: &str, lengths: Option<&Vec<f64>>) -> Result<MetricGraph, CliError> {
    let g = load_graph(name)?;
    Ok(match lengths {
        Some(l) => g.with_lengths(l)?,
        None => g,
    })
}

fn primary_graph(config: &RunConfig) -> Result<MetricGraph, CliError> {
    graph_with(
        require(config.graph.as_deref(), "graph")?,
        config.lengths.as_ref(),
    )
}

fn edge_entries(report: &mut Report, kind: &str, graph: &MetricGraph) {
    for e in graph.edges() {
        report.entry(kind, e.name.clone(), e.length);
    }
}

fn entropy_residual(
    engine: &Thermo,
    p: &ModuliPoint,
    name: &str,
    tolerance: f64,
) -> Result<Residual, CliError> {
    let h = engine.topological_entropy(p.transitions(), &p.length_potential())?;
    Ok(Residual::at_most(name, (h - 1.0).abs(), tolerance))
}

fn entropy(config: &RunConfig, engine: &Thermo) -> Result<Report, CliError> {
    let g = primary_graph(config)?;
    let ts = build_transition_structure(&g)?;
    let f = Potential::lengths(&ts, &g)?;
    let h = engine.topological_entropy(&ts, &f)?;
    let mut r = Report::new(config);
    r.entry("graph", "vertices", g.vertex_count() as f64);
    r.entry("graph", "edges", g.edge_count() as f64);
    r.entry("graph", "period", ts.period() as f64);
    edge_entries(&mut r, "length", &g);
    r.entry("entropy", "h", h);
    if let Some(t) = config.count_t {
        let estimate = entropy_by_counting(&ts, &g, t)?;
        r.entry("counting", "T", t);
        r.entry("counting", "h_T", estimate);
        r.entry("counting", "relative_error", (estimate - h).abs() / h);
    }
    let phi = f.scale(-h);
    r.check(Residual::at_most(
        "pressure_at_entropy",
        engine.pressure(&ts, &phi)?.abs(),
        config.tolerance,
    ));
    let state = engine.equilibrium_state(&ts, &phi)?;
    r.check(Residual::at_most(
        "equilibrium_stationarity",
        state.residual(),
        config.tolerance,
    ));
    Ok(r)
}

fn normalize(config: &RunConfig, engine: &Thermo) -> Result<Report, CliError> {
    let g = primary_graph(config)?;
    let p = normalize_to_entropy_one(engine, &g)?;
    let mut r = Report::new(config);
    r.entry("entropy", "h_input", p.lengths()[0] / g.lengths()[0]);
    edge_entries(&mut r, "length", p.graph());
    r.check(entropy_residual(
        engine,
        &p,
        "normalized_entropy",
        config.tolerance,
    )?);
    let graph: serde_json::Value =
        serde_json::from_str(&p.graph().to_json_string()).expect("graph JSON");
    r.extra.push(("graph".into(), Json::from_value(&graph)));
    Ok(r)
}

fn moduli_point(
    config: &RunConfig,
    engine: &Thermo,
    g: MetricGraph,
) -> Result<ModuliPoint, CliError> {
    Ok(if config.normalize {
        normalize_to_entropy_one(engine, &g)?
    } else {
        ModuliPoint::new(engine, g)?
    })
}

fn tensor(config: &RunConfig, engine: &Thermo) -> Result<Report, CliError> {
    let p = moduli_point(config, engine, primary_graph(config)?)?;
    let t = metric_tensor(engine, &p)?;
    let mut r = Report::new(config);
    edge_entries(&mut r, "length", p.graph());
    let d = t.basis.len();
    for i in 0..d {
        for j in 0..d {
            r.entry("matrix", format!("g[{i}][{j}]"), t.matrix[(i, j)]);
        }
    }
    for (i, e) in t.eigenvalues.iter().enumerate() {
        r.entry("eigenvalue", i.to_string(), *e);
    }
    let edges = p.graph().edges();
    for (i, v) in t.basis.iter().enumerate() {
        for (e, x) in edges.iter().zip(&v.rates) {
            r.entry("basis", format!("v{i}[{}]", e.name), *x);
        }
    }
    let cut = CutSystem::spanning_tree_complement(p.graph());
    let mut curve = 0.0f64;
    let mut coding = 0.0f64;
    for (i, v) in t.basis.iter().enumerate() {
        let g = t.matrix[(i, i)];
        curve =
            curve.max((pressure_norm_by_curve(engine, &p, v, config.curve_step)? - g).abs() / g);
        coding = coding.max((metric_via_midpoint_coding(engine, &p, v, &cut)? - g).abs() / g);
    }
    r.check(entropy_residual(
        engine,
        &p,
        "entropy_one",
        config.tolerance,
    )?);
    r.check(Residual::at_most(
        "asymmetry",
        t.asymmetry(),
        ASYMMETRY_TOLERANCE,
    ));
    r.check(Residual::above("min_eigenvalue", t.min_eigenvalue(), 0.0));
    r.check(Residual::at_most(
        "curve_oracle_relative",
        curve,
        CURVE_TOLERANCE,
    ));
    r.check(Residual::at_most(
        "midpoint_coding_relative",
        coding,
        CODING_TOLERANCE,
    ));
    Ok(r)
}

fn intersect(config: &RunConfig, engine: &Thermo) -> Result<Report, CliError> {
    let g1 = primary_graph(config)?;
    let spec2 = config
        .graph2
        .as_deref()
        .or(config.graph.as_deref())
        .expect("graph checked");
    let g2 = graph_with(spec2, config.lengths2.as_ref())?;
    let p1 = normalize_to_entropy_one(engine, &g1)?;
    let p2 = normalize_to_entropy_one(engine, &g2)?;
    let j = intersection_j(engine, &p1, &p2, config.t)?;
    let mut r = Report::new(config);
    edge_entries(&mut r, "length1", p1.graph());
    edge_entries(&mut r, "length2", p2.graph());
    r.entry("intersection", "T", j.t);
    r.entry("intersection", "geodesics", j.geodesics as f64);
    r.entry("intersection", "J", j.value);
    r.check(entropy_residual(
        engine,
        &p1,
        "entropy_one_first",
        config.tolerance,
    )?);
    r.check(entropy_residual(
        engine,
        &p2,
        "entropy_one_second",
        config.tolerance,
    )?);
    Ok(r)
}

fn marked_complex(config: &RunConfig) -> Result<TriangulationComplex, CliError> {
    let c = load_complex(require(config.complex.as_deref(), "complex")?)?;
    Ok(if c.is_marked() { c } else { c.marked()? })
}

fn surface(config: &RunConfig) -> Result<Report, CliError> {
    let complex = marked_complex(config)?;
    let b = require(config.b.as_ref(), "b")?;
    let coords = HexCoordinates::new(&complex, b.clone())?.scaled(config.lambda);
    let s = surface_from_coordinates(&complex, &coords)?;
    let mut r = Report::new(config);
    r.entry("topology", "genus", complex.genus() as f64);
    r.entry("topology", "boundaries", complex.boundary_count() as f64);
    r.entry("topology", "hexagons", complex.hexagons().len() as f64);
    for (n, v) in complex.coordinate_names().iter().zip(&coords.values) {
        r.entry("coordinate", n.clone(), *v);
    }
    for (n, v) in complex.arcs().iter().zip(s.ortholengths()) {
        r.entry("arc", n.clone(), v);
    }
    for (n, v) in complex.arcs().iter().zip(s.log_ortholengths()) {
        r.entry("log_arc", n.clone(), *v);
    }
    for (n, v) in s.complementary_sides() {
        r.entry("complementary", n, v);
    }
    let summed = s.boundary_lengths();
    let mut mismatch = 0.0f64;
    for (i, (cycle, sum)) in s.cuff_cycles().iter().zip(&summed).enumerate() {
        let traced = s.closed_geodesic_length(cycle)?;
        r.entry("boundary", i.to_string(), *sum);
        r.entry("boundary_trace", i.to_string(), traced);
        mismatch = mismatch.max((traced - sum).abs() / sum);
    }
    let mut det = 0.0f64;
    for (k, g) in s.generators().iter().enumerate() {
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            r.entry("generator", format!("g{}[{i}][{j}]", k + 1), g[(i, j)]);
        }
        det = det.max((g.determinant() - 1.0).abs());
    }
    r.check(Residual::at_most(
        "hexagon_closure",
        s.max_residual(),
        config.tolerance,
    ));
    r.check(Residual::at_most(
        "boundary_trace_relative",
        mismatch,
        BOUNDARY_TOLERANCE,
    ));
    r.check(Residual::at_most(
        "generator_determinant",
        det,
        BOUNDARY_TOLERANCE,
    ));
    Ok(r)
}

fn degeneration_path(config: &RunConfig) -> Result<DegenerationPath, CliError> {
    let complex = marked_complex(config)?;
    Ok(DegenerationPath::through(
        &complex,
        require(config.b.as_ref(), "b")?,
    )?)
}

fn base_entries(r: &mut Report, path: &DegenerationPath) {
    for (n, v) in path.complex().coordinate_names().iter().zip(path.base()) {
        r.entry("base", n.clone(), *v);
    }
    r.entry("cone", "margin", path.cone().margin);
}

fn degenerate(config: &RunConfig, engine: &Thermo) -> Result<Report, CliError> {
    let path = degeneration_path(config)?;
    let depth = config.depth();
    let arcs = path.complex().arcs().to_vec();
    let limit = limit_graph_metric(engine, &path)?;
    let fits = arc_decay_rates(&path, &config.decay_grid)?;
    let convergence = complementary_convergence(&path, &config.decay_grid)?;
    let consts = band_constants(&path, &config.decay_grid)?;

    let mut columns = vec!["t".to_string(), "lambda".to_string()];
    columns.extend(arcs.iter().map(|a| format!("arc_{a}")));
    columns.extend(["h_t", "speed", "cumulative"].map(String::from));
    let mut rows = Vec::new();
    let mut closure = 0.0f64;
    let mut tangency = 0.0f64;
    let mut band_excess = f64::NEG_INFINITY;
    let mut bands = Vec::new();
    let mut cumulative = 0.0;
    let mut previous: Option<(f64, f64)> = None;
    for &t in &config.t_grid {
        let sample = rescaled_surface_at(&path, 1.0 / t)?;
        closure = closure.max(sample.surface.max_residual());
        let speed = path_speed(engine, &path, t, depth)?;
        tangency = tangency.max(speed.tangency_residual.abs());
        let band = entropy_band(engine, &path, &consts, limit.entropy, t, depth)?;
        band_excess = band_excess.max((band.lower - band.entropy).max(band.entropy - band.upper));
        if let Some((t0, s0)) = previous {
            cumulative += 0.5 * (t0 - t) * (s0 + speed.speed);
        }
        previous = Some((t, speed.speed));
        let mut row = vec![t, sample.lambda];
        row.extend(sample.rescaled_ortholengths());
        row.extend([speed.entropy, speed.speed, cumulative]);
        rows.push(row);
        bands.push(Json::obj([
            ("t", Json::Num(t)),
            ("entropy", Json::Num(band.entropy)),
            ("lower", Json::Num(band.lower)),
            ("upper", Json::Num(band.upper)),
            ("inside", Json::Bool(band.inside)),
        ]));
    }

    let passages = limit_by_passages(&rescaled_surface_at(&path, PASSAGE_LAMBDA)?);
    let passage_gap = passages
        .iter()
        .zip(limit.graph.lengths())
        .map(|(p, l)| (p - l).abs())
        .fold(0.0, f64::max);
    let decay_gap = fits
        .iter()
        .map(|f| (f.slope - f.predicted_slope).abs())
        .fold(0.0, f64::max);

    let mut r = Report::new(config);
    base_entries(&mut r, &path);
    r.entry("depth", "n", depth as f64);
    edge_entries(&mut r, "limit", &limit.graph);
    edge_entries(&mut r, "limit_normalized", limit.point.graph());
    r.entry("limit", "entropy", limit.entropy);
    for f in &fits {
        r.entry("decay_slope", arcs[f.arc].clone(), f.slope);
        r.entry("decay_predicted", arcs[f.arc].clone(), f.predicted_slope);
        r.entry("decay_constant", arcs[f.arc].clone(), f.constant);
    }
    r.entry("band", "c", consts.c);
    r.entry("band", "c_prime", consts.c_prime);
    r.entry("complementary", "rate", convergence.rate);
    r.entry("complementary", "constant", convergence.constant);
    r.table = Some(Table { columns, rows });
    r.extra.push((
        "convergence".into(),
        Json::obj([
            (
                "decay",
                Json::Arr(
                    fits.iter()
                        .map(|f| {
                            Json::obj([
                                ("arc", Json::str(&arcs[f.arc])),
                                ("slope", Json::Num(f.slope)),
                                ("intercept", Json::Num(f.intercept)),
                                ("predicted_slope", Json::Num(f.predicted_slope)),
                                ("constant", Json::Num(f.constant)),
                            ])
                        })
                        .collect(),
                ),
            ),
            (
                "complementary",
                Json::obj([
                    ("lambdas", Json::nums(&convergence.lambdas)),
                    ("errors", Json::nums(&convergence.errors)),
                    ("rate", Json::Num(convergence.rate)),
                    ("constant", Json::Num(convergence.constant)),
                ]),
            ),
            ("band", Json::Arr(bands)),
            ("passages_at_60", Json::nums(&passages)),
        ]),
    ));
    r.check(Residual::at_most(
        "hexagon_closure",
        closure,
        config.tolerance,
    ));
    r.check(Residual::at_most(
        "decay_slope_error",
        decay_gap,
        DECAY_TOLERANCE,
    ));
    r.check(Residual::at_most(
        "limit_vs_passages",
        passage_gap,
        PASSAGE_TOLERANCE,
    ));
    r.check(Residual::at_most("band_excess", band_excess, 0.0));
    r.check(Residual::at_most(
        "speed_tangency",
        tangency,
        SPEED_TANGENCY_TOLERANCE,
    ));
    Ok(r)
}

fn pathlen(config: &RunConfig, engine: &Thermo) -> Result<Report, CliError> {
    let path = degeneration_path(config)?;
    let depth = config.depth();
    let pl = path_length(
        engine,
        &path,
        config.tmin,
        config.tmax,
        depth,
        config.points_per_octave,
    )?;
    let mut r = Report::new(config);
    base_entries(&mut r, &path);
    r.entry("depth", "n", depth as f64);
    r.entry("length", "total", pl.total);
    for (k, (lo, hi, inc)) in pl.tail_increments.iter().enumerate() {
        r.entry("tail_t_lo", k.to_string(), *lo);
        r.entry("tail_t_hi", k.to_string(), *hi);
        r.entry("tail_increment", k.to_string(), *inc);
    }
    for (k, q) in pl.ratios.iter().enumerate() {
        r.entry("tail_ratio", k.to_string(), *q);
    }
    let rows = pl
        .grid
        .iter()
        .zip(&pl.speeds)
        .zip(&pl.cumulative)
        .map(|((t, s), c)| vec![*t, 1.0 / t, s.entropy, s.speed, *c])
        .collect();
    r.table = Some(Table {
        columns: ["t", "lambda", "h_t", "speed", "cumulative"]
            .map(String::from)
            .to_vec(),
        rows,
    });
    let step = pl
        .speeds
        .windows(2)
        .map(|w| w[1].speed - w[0].speed)
        .fold(f64::NEG_INFINITY, f64::max);
    let tangency = pl
        .speeds
        .iter()
        .map(|s| s.tangency_residual.abs())
        .fold(0.0, f64::max);
    r.check(Residual::below("speed_step_max", step, 0.0));
    if !pl.ratios.is_empty() {
        let worst = pl.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        r.check(Residual::below("tail_ratio_max", worst, TAIL_RATIO_BOUND));
    }
    r.check(Residual::at_most(
        "speed_tangency",
        tangency,
        SPEED_TANGENCY_TOLERANCE,
    ));
    Ok(r)
}

fn selftest(config: &RunConfig, engine: &Thermo) -> Result<Report, CliError> {
    let mut r = Report::new(config);
    for c in checks::all(engine, config.seed)? {
        r.entry(
            "criterion",
            c.id.to_string(),
            if c.passed() { 1.0 } else { 0.0 },
        );
        for res in c.residuals {
            r.check(Residual {
                name: format!("c{}.{}", c.id, res.name),
                ..res
            });
        }
    }
    Ok(r)
}
