use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, TransitionStructure};
use crate::numfmt::Sig17;

/// A locally constant function on the shift space: its value on a sequence
/// depends only on the first `depth` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    depth: usize,
    values: BTreeMap<Vec<usize>, f64>,
}

#[derive(Serialize)]
struct PotentialFileOut<'a> {
    depth: usize,
    values: &'a BTreeMap<String, Sig17>,
}

#[derive(Deserialize)]
struct PotentialFileIn {
    depth: usize,
    values: BTreeMap<String, f64>,
}

impl Potential {
    /// Evaluate `f` on every admissible word of length `depth`.
    pub fn from_fn(
        ts: &TransitionStructure,
        depth: usize,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Potential("depth must be at least 1".into()));
        }
        let values = ts
            .admissible_words(depth)
            .into_iter()
            .map(|w| {
                let v = f(&w);
                (w, v)
            })
            .collect();
        Ok(Potential { depth, values })
    }

    /// Build from explicit word values, checking that exactly the admissible
    /// words of the given depth are present.
    pub fn from_values(
        ts: &TransitionStructure,
        depth: usize,
        values: BTreeMap<Vec<usize>, f64>,
    ) -> Result<Self> {
        let p = Potential { depth, values };
        p.validate(ts)?;
        Ok(p)
    }

    pub fn constant(ts: &TransitionStructure, c: f64) -> Self {
        Potential::from_fn(ts, 1, |_| c).expect("depth 1 is valid")
    }

    pub fn zero(ts: &TransitionStructure) -> Self {
        Potential::constant(ts, 0.0)
    }

    /// Depth-1 potential with one value per symbol.
    pub fn from_symbol_values(ts: &TransitionStructure, values: &[f64]) -> Result<Self> {
        if values.len() != ts.len() {
            return Err(Error::Potential(format!(
                "expected {} symbol values, got {}",
                ts.len(),
                values.len()
            )));
        }
        Potential::from_fn(ts, 1, |w| values[w[0]])
    }

    /// Depth-1 potential with one value per undirected edge, shared by both
    /// orientations; `ts` must be the directed-edge system of the graph the
    /// values refer to.
    pub fn from_edge_values(ts: &TransitionStructure, values: &[f64]) -> Result<Self> {
        if 2 * values.len() != ts.len() {
            return Err(Error::Potential(format!(
                "expected {} edge values, got {}",
                ts.len() / 2,
                values.len()
            )));
        }
        Potential::from_fn(ts, 1, |w| values[w[0] / 2])
    }

    /// The length potential of a metric graph: the length of the first edge.
    pub fn lengths(ts: &TransitionStructure, graph: &MetricGraph) -> Result<Self> {
        Potential::from_edge_values(ts, &graph.lengths())
    }

    /// The depth-2 coboundary `u(x0) - u(x1)` of a function on symbols.
    pub fn coboundary(ts: &TransitionStructure, u: &[f64]) -> Result<Self> {
        if u.len() != ts.len() {
            return Err(Error::Potential(
                "coboundary needs one value per symbol".into(),
            ));
        }
        Potential::from_fn(ts, 2, |w| u[w[0]] - u[w[1]])
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.values.iter().map(|(w, &v)| (w.as_slice(), v))
    }

    /// Value on a word of length at least `depth` (only the prefix is read).
    pub fn value(&self, word: &[usize]) -> Option<f64> {
        if word.len() < self.depth {
            return None;
        }
        self.values.get(&word[..self.depth]).copied()
    }

    pub fn min_value(&self) -> f64 {
        self.values.values().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .values()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self, ts: &TransitionStructure) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::Potential("depth must be at least 1".into()));
        }
        let words = ts.admissible_words(self.depth);
        for w in &words {
            if !self.values.contains_key(w) {
                return Err(Error::Potential(format!(
                    "missing value on admissible word {}",
                    ts.word_label(w)
                )));
            }
        }
        if words.len() != self.values.len() {
            let extra = self
                .values
                .keys()
                .find(|w| !ts.is_admissible(w) || w.len() != self.depth)
                .map(|w| format!("{w:?}"))
                .unwrap_or_default();
            return Err(Error::Potential(format!(
                "value on non-admissible word {extra}"
            )));
        }
        Ok(())
    }

    /// The same function seen as a potential of larger depth.
    pub fn lift(&self, ts: &TransitionStructure, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::DepthMismatch {
                potential: self.depth,
                state: depth,
            });
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        Potential::from_fn(ts, depth, |w| self.values[&w[..self.depth]])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Potential {
            depth: self.depth,
            values: self
                .values
                .iter()
                .map(|(w, &v)| (w.clone(), f(v)))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// `a * self + b * other`, lifted to the larger depth.
    pub fn combine(
        &self,
        a: f64,
        other: &Potential,
        b: f64,
        ts: &TransitionStructure,
    ) -> Result<Self> {
        let depth = self.depth.max(other.depth);
        let x = self.lift(ts, depth)?;
        let y = other.lift(ts, depth)?;
        let values = x
            .values
            .iter()
            .map(|(w, &v)| {
                let u = y.values.get(w).copied().ok_or_else(|| {
                    Error::Potential("potentials are defined on different alphabets".into())
                })?;
                Ok((w.clone(), a * v + b * u))
            })
            .collect::<Result<_>>()?;
        Ok(Potential { depth, values })
    }

    pub fn add(&self, other: &Potential, ts: &TransitionStructure) -> Result<Self> {
        self.combine(1.0, other, 1.0, ts)
    }

    pub fn sub(&self, other: &Potential, ts: &TransitionStructure) -> Result<Self> {
        self.combine(1.0, other, -1.0, ts)
    }

    /// Birkhoff sum over one period of the periodic sequence generated by `cycle`.
    pub fn cyclic_sum(&self, cycle: &[usize]) -> Result<f64> {
        let p = cycle.len();
        let mut window = Vec::with_capacity(self.depth);
        let mut total = 0.0;
        for i in 0..p {
            window.clear();
            window.extend((0..self.depth).map(|k| cycle[(i + k) % p]));
            total += self.values.get(&window).copied().ok_or_else(|| {
                Error::Potential(format!("cycle is not admissible at position {i}"))
            })?;
        }
        Ok(total)
    }

    /// Serialize as `{"depth": n, "values": {"+a.-b": value, ...}}`.
    pub fn to_json_string(&self, ts: &TransitionStructure) -> String {
        let labelled: BTreeMap<String, Sig17> = self
            .values
            .iter()
            .map(|(w, &v)| (ts.word_label(w), Sig17(v)))
            .collect();
        serde_json::to_string_pretty(&PotentialFileOut {
            depth: self.depth,
            values: &labelled,
        })
        .expect("potential serialization cannot fail")
    }

    pub fn from_json_str(ts: &TransitionStructure, text: &str, origin: &str) -> Result<Self> {
        let file: PotentialFileIn = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        let mut values = BTreeMap::new();
        for (label, v) in file.values {
            let word = ts.parse_word(&label).ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                message: format!("unknown symbol in word '{label}'"),
            })?;
            values.insert(word, v);
        }
        Potential::from_values(ts, file.depth, values)
    }
}
