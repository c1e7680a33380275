//! Command-line driver for thermograph experiments.
//!
//! Every subcommand writes one artifact (CSV or JSON) carrying the tool
//! version, an echo of the configuration, the seed and the invariant-check
//! residuals of the run. Exit status is 0 on success, 1 on a domain error or
//! a failed residual check, and 2 on a usage, I/O or parse error.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{Command, Format, RunConfig};
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Domain(thermograph::Error),
    #[error("residual checks failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Domain(e) if e.is_input_error() => 2,
            CliError::Domain(_) | CliError::Failed(_) => 1,
        }
    }
}

impl From<thermograph::Error> for CliError {
    fn from(e: thermograph::Error) -> Self {
        match e {
            thermograph::Error::UnknownStrategy { .. } => CliError::Usage(e.to_string()),
            e => CliError::Domain(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "thermograph",
    version,
    about = "Pressure metrics on metric graphs and degenerating hyperbolic surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file whose keys override the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Shorthand for --format json
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the artifact here instead of standard output
    #[arg(long, global = true)]
    out: Option<String>,
    /// Perron solver: power or dense
    #[arg(long, global = true)]
    perron: Option<String>,
    /// Variance method: fundamental, perturbation or finite-difference
    #[arg(long, global = true)]
    variance: Option<String>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Graph file, or a bundled graph name (theta, two_loop, k4, dumbbell)
    #[arg(long)]
    graph: Option<String>,
    /// Edge lengths in edge-name order, replacing those in the file
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lengths: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct ComplexArgs {
    /// Complex file, or a bundled complex name
    #[arg(long)]
    complex: Option<String>,
    /// Hexagon coordinates, one per marked boundary side
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Topological entropy of a metric graph
    Entropy {
        #[command(flatten)]
        graph: GraphArgs,
        /// Also estimate the entropy by counting closed geodesics shorter than this
        #[arg(long)]
        count_t: Option<f64>,
    },
    /// Rescale a metric graph to entropy one
    Normalize {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Pressure metric tensor on a tangent basis
    Tensor {
        #[command(flatten)]
        graph: GraphArgs,
        /// Normalize to entropy one first
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        curve_step: Option<f64>,
    },
    /// Intersection number of two metrics on one graph
    Intersect {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        graph2: Option<String>,
        #[arg(long, value_delimiter = ',')]
        lengths2: Option<Vec<f64>>,
        /// Length threshold on closed geodesics
        #[arg(long)]
        t: Option<f64>,
    },
    /// Hyperbolic structure from hexagon coordinates
    Surface {
        #[command(flatten)]
        complex: ComplexArgs,
        /// Scale applied to the coordinates
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Sweep along the ray through the coordinates
    Degenerate {
        #[command(flatten)]
        complex: ComplexArgs,
        /// Decreasing t values
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
        /// Increasing lambda values for the decay fits
        #[arg(long, value_delimiter = ',')]
        decay_grid: Option<Vec<f64>>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Pressure-metric length of the ray between two values of t
    Pathlen {
        #[command(flatten)]
        complex: ComplexArgs,
        #[arg(long)]
        tmin: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        points_per_octave: Option<usize>,
    },
    /// Run the invariant suite
    Selftest,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_graph(c: &mut RunConfig, g: GraphArgs) {
    c.graph = g.graph;
    c.lengths = g.lengths;
}

fn set_complex(c: &mut RunConfig, x: ComplexArgs) {
    c.complex = x.complex;
    c.b = x.b;
}

impl Cli {
    fn into_config(self) -> (RunConfig, Option<PathBuf>) {
        let mut c = RunConfig::default();
        match self.command {
            Sub::Entropy { graph, count_t } => {
                c.command = Command::Entropy;
                set_graph(&mut c, graph);
                c.count_t = count_t;
            }
            Sub::Normalize { graph } => {
                c.command = Command::Normalize;
                set_graph(&mut c, graph);
            }
            Sub::Tensor {
                graph,
                normalize,
                curve_step,
            } => {
                c.command = Command::Tensor;
                set_graph(&mut c, graph);
                c.normalize = normalize;
                set(&mut c.curve_step, curve_step);
            }
            Sub::Intersect {
                graph,
                graph2,
                lengths2,
                t,
            } => {
                c.command = Command::Intersect;
                set_graph(&mut c, graph);
                c.graph2 = graph2;
                c.lengths2 = lengths2;
                set(&mut c.t, t);
            }
            Sub::Surface { complex, lambda } => {
                c.command = Command::Surface;
                set_complex(&mut c, complex);
                set(&mut c.lambda, lambda);
            }
            Sub::Degenerate {
                complex,
                t_grid,
                decay_grid,
                depth,
            } => {
                c.command = Command::Degenerate;
                set_complex(&mut c, complex);
                set(&mut c.t_grid, t_grid);
                set(&mut c.decay_grid, decay_grid);
                c.depth = depth;
            }
            Sub::Pathlen {
                complex,
                tmin,
                tmax,
                depth,
                points_per_octave,
            } => {
                c.command = Command::Pathlen;
                set_complex(&mut c, complex);
                set(&mut c.tmin, tmin);
                set(&mut c.tmax, tmax);
                c.depth = depth;
                set(&mut c.points_per_octave, points_per_octave);
            }
            Sub::Selftest => c.command = Command::Selftest,
        }
        let m = self.common;
        set(&mut c.format, m.format);
        if m.json {
            c.format = Format::Json;
        }
        set(&mut c.seed, m.seed);
        c.out = m.out;
        set(&mut c.perron, m.perron);
        set(&mut c.variance, m.variance);
        set(&mut c.tolerance, m.tolerance);
        (c, m.config)
    }
}

/// Parse arguments into a validated configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (config, _) = Cli::try_parse_from(args)?.into_config();
    Ok(config)
}

/// Run one experiment and produce its report; fails when the artifact cannot
/// be produced.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    commands::dispatch(config)
}

/// Full command-line entry point. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let (mut config, file) = cli.into_config();
    if let Some(path) = file {
        config = match config.override_from_file(&path) {
            Ok(c) => c,
            Err(e) => return fail(stderr, &e),
        };
    }
    let report = match execute(&config) {
        Ok(r) => r,
        Err(e) => return fail(stderr, &e),
    };
    let text = report.render();
    let written = match &config.out {
        Some(path) => report::write_atomic(Path::new(path), &text)
            .map_err(|e| CliError::Input(format!("cannot write {path}: {e}"))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write output: {e}"))),
    };
    if let Err(e) = written {
        return fail(stderr, &e);
    }
    if !report.passed() {
        let names: Vec<&str> = report
            .residuals
            .iter()
            .filter(|r| !r.ok())
            .map(|r| r.name.as_str())
            .collect();
        return fail(stderr, &CliError::Failed(names.join(", ")));
    }
    0
}

fn fail(stderr: &mut dyn Write, e: &CliError) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    e.exit_code()
}
