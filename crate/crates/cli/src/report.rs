//! Output artifacts: a header (tool version, command, config echo, seed,
//! residuals), summary rows and an optional table, rendered as CSV or JSON.

use std::io::Write;
use std::path::Path;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::Value;
use thermograph::numfmt::{csv, Sig17};

use crate::config::{Format, RunConfig};

pub const TOOL: &str = "thermograph";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON tree whose floats render with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj<K: Into<String>>(entries: impl IntoIterator<Item = (K, Json)>) -> Json {
        Json::Obj(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn nums(values: &[f64]) -> Json {
        Json::Arr(values.iter().map(|v| Json::Num(*v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    /// Convert a `serde_json` value, turning non-integral numbers into
    /// 17-digit floats.
    pub fn from_value(v: &Value) -> Json {
        match v {
            Value::Null => Json::Null,
            Value::Bool(b) => Json::Bool(*b),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Json::Int(i),
                None => match n.as_u64() {
                    Some(u) => Json::Num(u as f64),
                    None => Json::Num(n.as_f64().unwrap_or(f64::NAN)),
                },
            },
            Value::String(s) => Json::Str(s.clone()),
            Value::Array(a) => Json::Arr(a.iter().map(Json::from_value).collect()),
            Value::Object(o) => Json::Obj(
                o.iter()
                    .map(|(k, v)| (k.clone(), Json::from_value(v)))
                    .collect(),
            ),
        }
    }
}

impl Serialize for Json {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Json::Null => s.serialize_none(),
            Json::Bool(b) => s.serialize_bool(*b),
            Json::Int(i) => s.serialize_i64(*i),
            Json::Num(x) => Sig17(*x).serialize(s),
            Json::Str(t) => s.serialize_str(t),
            Json::Arr(a) => {
                let mut seq = s.serialize_seq(Some(a.len()))?;
                for x in a {
                    seq.serialize_element(x)?;
                }
                seq.end()
            }
            Json::Obj(o) => {
                let mut map = s.serialize_map(Some(o.len()))?;
                for (k, v) in o {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}

/// One invariant check: a measured value against its acceptance rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub rule: Rule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    AtMost(f64),
    Below(f64),
    Above(f64),
}

impl Residual {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Residual {
            name: name.into(),
            value,
            rule: Rule::AtMost(tolerance),
        }
    }

    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Residual {
            name: name.into(),
            value,
            rule: Rule::Below(bound),
        }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Residual {
            name: name.into(),
            value,
            rule: Rule::Above(bound),
        }
    }

    pub fn ok(&self) -> bool {
        match self.rule {
            Rule::AtMost(t) => self.value <= t,
            Rule::Below(t) => self.value < t,
            Rule::Above(t) => self.value > t,
        }
    }

    fn relation(&self) -> (&'static str, f64) {
        match self.rule {
            Rule::AtMost(t) => ("<=", t),
            Rule::Below(t) => ("<", t),
            Rule::Above(t) => (">", t),
        }
    }

    fn to_json(&self) -> Json {
        let (rel, bound) = self.relation();
        Json::obj([
            ("name", Json::str(&self.name)),
            ("value", Json::Num(self.value)),
            ("relation", Json::str(rel)),
            ("bound", Json::Num(bound)),
            ("ok", Json::Bool(self.ok())),
        ])
    }

    pub fn csv_line(&self) -> String {
        let (rel, bound) = self.relation();
        format!(
            "{},{},{},{},{}",
            self.name,
            csv(self.value),
            rel,
            csv(bound),
            if self.ok() { "ok" } else { "FAIL" }
        )
    }
}

/// A row of `kind,name,value`.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub kind: String,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: RunConfig,
    pub residuals: Vec<Residual>,
    pub entries: Vec<Entry>,
    pub table: Option<Table>,
    /// Sections that only appear in JSON output.
    pub extra: Vec<(String, Json)>,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Report {
            config: config.clone(),
            residuals: Vec::new(),
            entries: Vec::new(),
            table: None,
            extra: Vec::new(),
        }
    }

    pub fn entry(&mut self, kind: &str, name: impl Into<String>, value: f64) {
        self.entries.push(Entry {
            kind: kind.into(),
            name: name.into(),
            value,
        });
    }

    pub fn check(&mut self, r: Residual) {
        self.residuals.push(r);
    }

    pub fn passed(&self) -> bool {
        self.residuals.iter().all(Residual::ok)
    }

    fn config_echo(&self) -> Value {
        serde_json::to_value(&self.config).expect("config serializes")
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("# {TOOL} {VERSION}"));
        line(format!("# command {}", self.config.command.name()));
        line(format!("# config {}", self.config_echo()));
        line(format!("# seed {}", self.config.seed));
        for r in &self.residuals {
            line(format!("# residual {}", r.csv_line()));
        }
        match &self.table {
            Some(t) => {
                for e in &self.entries {
                    line(format!("# {},{},{}", e.kind, e.name, csv(e.value)));
                }
                line(t.columns.join(","));
                for row in &t.rows {
                    line(row.iter().map(|v| csv(*v)).collect::<Vec<_>>().join(","));
                }
            }
            None => {
                line("kind,name,value".into());
                for e in &self.entries {
                    line(format!("{},{},{}", e.kind, e.name, csv(e.value)));
                }
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut top = vec![
            ("tool".to_string(), Json::str(TOOL)),
            ("version".to_string(), Json::str(VERSION)),
            ("command".to_string(), Json::str(self.config.command.name())),
            ("config".to_string(), Json::from_value(&self.config_echo())),
            ("seed".to_string(), Json::Int(self.config.seed as i64)),
            (
                "residuals".to_string(),
                Json::Arr(self.residuals.iter().map(Residual::to_json).collect()),
            ),
            (
                "results".to_string(),
                Json::Arr(
                    self.entries
                        .iter()
                        .map(|e| {
                            Json::obj([
                                ("kind", Json::str(&e.kind)),
                                ("name", Json::str(&e.name)),
                                ("value", Json::Num(e.value)),
                            ])
                        })
                        .collect(),
                ),
            ),
        ];
        if let Some(t) = &self.table {
            top.push((
                "table".to_string(),
                Json::obj([
                    (
                        "columns",
                        Json::Arr(t.columns.iter().map(Json::str).collect()),
                    ),
                    (
                        "rows",
                        Json::Arr(t.rows.iter().map(|r| Json::nums(r)).collect()),
                    ),
                ]),
            ));
        }
        top.extend(self.extra.iter().cloned());
        let mut text = serde_json::to_string_pretty(&Json::Obj(top)).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Write `text` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "output path has no file name",
        )
    })?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(format: Format) -> Report {
        let config = RunConfig {
            format,
            seed: 5,
            ..RunConfig::default()
        };
        let mut r = Report::new(&config);
        r.entry("entropy", "h", std::f64::consts::LN_2);
        r.check(Residual::at_most("pressure", 1e-16, 1e-10));
        r
    }

    #[test]
    fn csv_layout() {
        let text = sample(Format::Csv).render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# thermograph {VERSION}"));
        assert!(lines[2].starts_with("# config {"));
        assert_eq!(lines[3], "# seed 5");
        assert_eq!(
            lines[4],
            "# residual pressure,1.00000000e-16,<=,1.00000000e-10,ok"
        );
        assert_eq!(lines[5], "kind,name,value");
        assert_eq!(lines[6], "entropy,h,6.93147181e-1");
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn json_has_seventeen_digits() {
        let text = sample(Format::Json).render();
        assert!(text.contains("6.9314718055994529e-1"));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["seed"], 5);
        assert_eq!(v["residuals"][0]["ok"], true);
        assert_eq!(v["config"]["tolerance"].as_f64(), Some(1e-10));
    }

    #[test]
    fn rules() {
        assert!(Residual::below("x", 0.5, 0.7).ok());
        assert!(!Residual::below("x", 0.7, 0.7).ok());
        assert!(Residual::at_most("x", 0.7, 0.7).ok());
        assert!(!Residual::above("x", 0.0, 0.0).ok());
        assert!(!Residual::at_most("x", f64::NAN, 1.0).ok());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "a\n").unwrap();
        write_atomic(&p, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
