use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{irreducibility_and_period, TransitionStructure};

use super::potential::Potential;

/// Higher-block presentation of a shift: states are admissible words of
/// length `depth`, and `w -> w'` is allowed when `w'` continues `w` by one
/// symbol.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    depth: usize,
    states: Vec<Vec<usize>>,
    successors: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    irreducible: bool,
    period: usize,
}

impl BlockSystem {
    pub fn new(ts: &TransitionStructure, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Potential("block depth must be at least 1".into()));
        }
        let states = ts.admissible_words(depth);
        let index: HashMap<Vec<usize>, usize> = states
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let successors = states
            .iter()
            .map(|w| {
                let last = w[depth - 1];
                ts.successors(last)
                    .iter()
                    .map(|&s| {
                        let mut next = w[1..].to_vec();
                        next.push(s);
                        index[&next]
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let (irreducible, period) = irreducibility_and_period(&successors);
        Ok(BlockSystem {
            depth,
            states,
            successors,
            index,
            irreducible,
            period,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn state_index(&self, word: &[usize]) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn successors(&self, state: usize) -> &[usize] {
        &self.successors[state]
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Values of a potential (depth at most the block depth) on each state.
    pub fn state_values(&self, f: &Potential) -> Result<Vec<f64>> {
        if f.depth() > self.depth {
            return Err(Error::DepthMismatch {
                potential: f.depth(),
                state: self.depth,
            });
        }
        self.states
            .iter()
            .map(|w| {
                f.value(w).ok_or_else(|| {
                    Error::Potential("potential and shift use different alphabets".into())
                })
            })
            .collect()
    }

    /// Transfer matrix `M(i, j) = exp(F(j) - shift)` on allowed transitions,
    /// with `shift = max F` so that entries lie in `(0, 1]`.
    pub fn weighted_matrix(&self, f: &Potential) -> Result<(DMatrix<f64>, f64)> {
        let values = self.state_values(f)?;
        let shift = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.successors.iter().enumerate() {
            for &j in row {
                m[(i, j)] = (values[j] - shift).exp();
            }
        }
        Ok((m, shift))
    }
}
