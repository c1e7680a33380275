//! Run configuration shared by every subcommand.
//!
//! A [`RunConfig`] is assembled from command-line flags and then, if
//! `--config` names a JSON file, overridden key by key from that file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thermograph::degeneration::{DEFAULT_DECAY_GRID, DEFAULT_T_GRID};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Entropy,
    Normalize,
    Tensor,
    Intersect,
    Surface,
    Degenerate,
    Pathlen,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::Normalize => "normalize",
            Command::Tensor => "tensor",
            Command::Intersect => "intersect",
            Command::Surface => "surface",
            Command::Degenerate => "degenerate",
            Command::Pathlen => "pathlen",
            Command::Selftest => "selftest",
        }
    }

    /// Approximation depth used when none is configured.
    pub fn default_depth(self) -> usize {
        match self {
            Command::Pathlen => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Graph file, or the name of a bundled graph.
    pub graph: Option<String>,
    pub lengths: Option<Vec<f64>>,
    /// Second graph for `intersect`; defaults to `graph`.
    pub graph2: Option<String>,
    pub lengths2: Option<Vec<f64>>,
    /// Complex file, or the name of a bundled complex.
    pub complex: Option<String>,
    /// Hexagon coordinates, one per marked boundary side.
    pub b: Option<Vec<f64>>,
    /// Scale applied to `b` by `surface`.
    pub lambda: f64,
    pub normalize: bool,
    /// Length threshold for the orbit-counting entropy estimate.
    pub count_t: Option<f64>,
    /// Length threshold for `intersect`.
    pub t: f64,
    pub t_grid: Vec<f64>,
    pub decay_grid: Vec<f64>,
    pub tmin: f64,
    pub tmax: f64,
    pub depth: Option<usize>,
    pub points_per_octave: usize,
    /// Step of the curve oracle in `tensor`.
    pub curve_step: f64,
    /// Residual tolerance for hexagon closure and normalization checks.
    pub tolerance: f64,
    pub perron: String,
    pub variance: String,
    pub format: Format,
    pub seed: u64,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::default(),
            graph: None,
            lengths: None,
            graph2: None,
            lengths2: None,
            complex: None,
            b: None,
            lambda: 1.0,
            normalize: false,
            count_t: None,
            t: 12.0,
            t_grid: DEFAULT_T_GRID.to_vec(),
            decay_grid: DEFAULT_DECAY_GRID.to_vec(),
            tmin: 0.0125,
            tmax: 0.2,
            depth: None,
            points_per_octave: 1,
            curve_step: 1e-2,
            tolerance: 1e-10,
            perron: "power".into(),
            variance: "fundamental".into(),
            format: Format::Csv,
            seed: 0,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn depth(&self) -> usize {
        self.depth.unwrap_or_else(|| self.command.default_depth())
    }

    /// Replace fields with those present in the JSON object in `path`.
    pub fn override_from_file(&self, path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let patch: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.override_from_value(patch)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn override_from_value(&self, patch: Value) -> Result<RunConfig, String> {
        let Value::Object(patch) = patch else {
            return Err("configuration must be a JSON object".into());
        };
        let mut merged = serde_json::to_value(self).expect("config serializes");
        let target = merged.as_object_mut().expect("config is an object");
        for (k, v) in patch {
            if k == "command" && v != target["command"] {
                return Err(format!(
                    "configuration names command {v}, the command line {}",
                    target["command"]
                ));
            }
            target.insert(k, v);
        }
        serde_json::from_value(merged).map_err(|e| e.to_string())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        for (name, v) in [
            ("tolerance", self.tolerance),
            ("curve_step", self.curve_step),
            ("lambda", self.lambda),
            ("t", self.t),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.t_grid.is_empty() || self.t_grid.windows(2).any(|w| w[1] >= w[0]) {
            return bad("t_grid must be non-empty and strictly decreasing".into());
        }
        if self.t_grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return bad("t_grid values must lie in (0, 1]".into());
        }
        if self.decay_grid.len() < 3 || self.decay_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("decay_grid needs at least 3 strictly increasing values".into());
        }
        if self.decay_grid[0] < 1.0 {
            return bad("decay_grid values must be at least 1".into());
        }
        if !(self.tmin > 0.0 && self.tmin <= self.tmax && self.tmax <= 1.0) {
            return bad(format!(
                "need 0 < tmin <= tmax <= 1, got {} and {}",
                self.tmin, self.tmax
            ));
        }
        if self.points_per_octave == 0 || self.depth == Some(0) {
            return bad("points_per_octave and depth must be positive".into());
        }
        if let Some(t) = self.count_t {
            if !(t > 0.0) || !t.is_finite() {
                return bad(format!("count_t must be positive and finite, got {t}"));
            }
        }
        Ok(())
    }
}
