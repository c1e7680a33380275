//! Metric graphs, their non-backtracking edge shifts, and closed geodesics.
//!
//! A [`MetricGraph`] is a finite connected graph with every vertex of valence
//! at least three and a positive length on every edge. Each edge has two
//! oriented lifts; the symbol of `+e` is `2k` and the symbol of `-e` is
//! `2k + 1` where `k` is the position of `e` in identifier order. A
//! [`TransitionStructure`] is the subshift of finite type over those symbols:
//! `e'` may follow `e` when `e'` starts where `e` ends and `e'` is not the
//! reversal of `e`.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of closed geodesics an enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub name: String,
    pub length: f64,
}

/// Undirected graph with positive edge lengths.
///
/// Edges are stored sorted by identifier; that order fixes the symbol
/// numbering of every derived structure.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    vertices: usize,
    edges: Vec<(usize, usize, String, f64)>,
}

impl MetricGraph {
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= vertex_count || e.head >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edges[{i}] ('{}') references a vertex outside 0..{vertex_count}",
                    e.name
                )));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::NonPositiveLength {
                    index: i,
                    edge: e.name.clone(),
                    length: e.length,
                });
            }
        }
        let mut sorted = edges;
        sorted.sort_by(|a, b| a.name.cmp(&b.name));
        if let Some(w) = sorted.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge identifier '{}'",
                w[0].name
            )));
        }
        let graph = MetricGraph {
            vertex_count,
            edges: sorted,
        };
        for v in 0..vertex_count {
            let valence = graph.valence(v);
            if valence < 3 {
                return Err(Error::ValenceBelowThree { vertex: v, valence });
            }
        }
        if let Some(v) = graph.first_unreachable_vertex() {
            return Err(Error::Disconnected { vertex: v });
        }
        Ok(graph)
    }

    /// Parse the JSON graph format `{"vertices": n, "edges": [[u, v, "name", length], ...]}`.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        let edges = file
            .edges
            .into_iter()
            .map(|(tail, head, name, length)| Edge {
                tail,
                head,
                name,
                length,
            })
            .collect();
        MetricGraph::new(file.vertices, edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            vertices: self.vertex_count,
            edges: self
                .edges
                .iter()
                .map(|e| (e.tail, e.head, e.name.clone(), e.length))
                .collect(),
        };
        serde_json::to_string(&file).expect("graph serialization cannot fail")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges
            .binary_search_by(|e| e.name.as_str().cmp(name))
            .ok()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }

    pub fn volume(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Same combinatorics with new lengths, given in identifier order.
    pub fn with_lengths(&self, lengths: &[f64]) -> Result<Self> {
        if lengths.len() != self.edges.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} lengths, got {}",
                self.edges.len(),
                lengths.len()
            )));
        }
        let edges = self
            .edges
            .iter()
            .zip(lengths)
            .map(|(e, &length)| Edge {
                length,
                ..e.clone()
            })
            .collect();
        MetricGraph::new(self.vertex_count, edges)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let lengths: Vec<f64> = self.lengths().iter().map(|l| l * factor).collect();
        self.with_lengths(&lengths)
    }

    /// Loops count twice.
    pub fn valence(&self, vertex: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.tail == vertex) as usize + (e.head == vertex) as usize)
            .sum()
    }

    fn first_unreachable_vertex(&self) -> Option<usize> {
        if self.vertex_count == 0 {
            return None;
        }
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for e in &self.edges {
                for (a, b) in [(e.tail, e.head), (e.head, e.tail)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn directed(&self, symbol: usize) -> DirectedEdge {
        DirectedEdge::from_symbol(symbol)
    }

    pub fn tail_of(&self, symbol: usize) -> usize {
        let d = DirectedEdge::from_symbol(symbol);
        let e = &self.edges[d.edge];
        match d.orientation {
            Orientation::Forward => e.tail,
            Orientation::Backward => e.head,
        }
    }

    pub fn head_of(&self, symbol: usize) -> usize {
        let d = DirectedEdge::from_symbol(symbol);
        let e = &self.edges[d.edge];
        match d.orientation {
            Orientation::Forward => e.head,
            Orientation::Backward => e.tail,
        }
    }

    pub fn symbol_label(&self, symbol: usize) -> String {
        let d = DirectedEdge::from_symbol(symbol);
        format!("{}{}", d.orientation, self.edges[d.edge].name)
    }

    /// Whether `next` may follow `prev` in a geodesic.
    pub fn follows(&self, prev: usize, next: usize) -> bool {
        self.head_of(prev) == self.tail_of(next) && next != (prev ^ 1)
    }

    /// Relabel edges by a permutation: edge `k` becomes edge `perm[k]`,
    /// traversed backwards when `flip[k]` is set.
    pub fn symbol_permutation(perm: &[usize], flip: &[bool]) -> Vec<usize> {
        let mut out = vec![0; 2 * perm.len()];
        for (k, (&p, &f)) in perm.iter().zip(flip).enumerate() {
            out[2 * k] = 2 * p + f as usize;
            out[2 * k + 1] = 2 * p + (!f) as usize;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    Forward,
    Backward,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::Forward => write!(f, "+"),
            Orientation::Backward => write!(f, "-"),
        }
    }
}

/// One of the two oriented lifts of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedEdge {
    pub edge: usize,
    pub orientation: Orientation,
}

impl DirectedEdge {
    pub fn from_symbol(symbol: usize) -> Self {
        DirectedEdge {
            edge: symbol / 2,
            orientation: if symbol.is_multiple_of(2) {
                Orientation::Forward
            } else {
                Orientation::Backward
            },
        }
    }

    pub fn symbol(self) -> usize {
        2 * self.edge + (self.orientation == Orientation::Backward) as usize
    }

    pub fn reversed(self) -> Self {
        DirectedEdge::from_symbol(self.symbol() ^ 1)
    }
}

/// A subshift of finite type whose alphabet carries a fixed-point-free
/// reversal involution.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionStructure {
    labels: Vec<String>,
    reversal: Vec<usize>,
    successors: Vec<Vec<usize>>,
    irreducible: bool,
    period: usize,
}

impl TransitionStructure {
    pub fn new(
        labels: Vec<String>,
        reversal: Vec<usize>,
        successors: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = labels.len();
        if reversal.len() != n || successors.len() != n {
            return Err(Error::InvalidGraph("alphabet size mismatch".into()));
        }
        for (i, &r) in reversal.iter().enumerate() {
            if r >= n || r == i || reversal[r] != i {
                return Err(Error::InvalidGraph(format!(
                    "reversal is not a fixed-point-free involution at symbol {i}"
                )));
            }
        }
        let mut successors = successors;
        for row in successors.iter_mut() {
            row.sort_unstable();
            row.dedup();
            if row.iter().any(|&j| j >= n) {
                return Err(Error::InvalidGraph("successor out of range".into()));
            }
        }
        let (irreducible, period) = irreducibility_and_period(&successors);
        Ok(TransitionStructure {
            labels,
            reversal,
            successors,
            irreducible,
            period,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, symbol: usize) -> &str {
        &self.labels[symbol]
    }

    pub fn symbol_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn reversal(&self, symbol: usize) -> usize {
        self.reversal[symbol]
    }

    pub fn successors(&self, symbol: usize) -> &[usize] {
        &self.successors[symbol]
    }

    pub fn allows(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// Period of the irreducible transition graph (1 means aperiodic).
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn is_aperiodic(&self) -> bool {
        self.irreducible && self.period == 1
    }

    pub fn require_irreducible(&self) -> Result<()> {
        if self.irreducible {
            Ok(())
        } else {
            Err(Error::Reducible)
        }
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.allows(i, j) as u8 as f64)
    }

    /// Number of fixed points of the `p`-th power of the shift, `trace(A^p)`.
    pub fn fixed_point_count(&self, p: usize) -> f64 {
        if p == 0 {
            return self.len() as f64;
        }
        let a = self.adjacency_matrix();
        let mut power = a.clone();
        for _ in 1..p {
            power = &power * &a;
        }
        power.trace()
    }

    /// All admissible words of length `n`, in lexicographic order.
    pub fn admissible_words(&self, n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut words: Vec<Vec<usize>> = (0..self.len()).map(|s| vec![s]).collect();
        for _ in 1..n {
            let mut next = Vec::new();
            for w in &words {
                let last = *w.last().unwrap();
                for &s in self.successors(last) {
                    let mut ext = w.clone();
                    ext.push(s);
                    next.push(ext);
                }
            }
            words = next;
        }
        words
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.len()) && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    pub fn word_label(&self, word: &[usize]) -> String {
        word.iter()
            .map(|&s| self.labels[s].as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse_word(&self, text: &str) -> Option<Vec<usize>> {
        text.split('.').map(|l| self.symbol_index(l)).collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn reachable(successors: &[Vec<usize>], forward: bool) -> (Vec<bool>, Vec<usize>) {
    let n = successors.len();
    let mut preds = vec![Vec::new(); n];
    if !forward {
        for (i, row) in successors.iter().enumerate() {
            for &j in row {
                preds[j].push(i);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut level = vec![0usize; n];
    if n == 0 {
        return (seen, level);
    }
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let next = if forward { &successors[v] } else { &preds[v] };
        for &w in next {
            if !seen[w] {
                seen[w] = true;
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (seen, level)
}

/// Strong connectivity by forward/backward reachability; the period is the
/// gcd of `level(u) + 1 - level(v)` over all transitions `u -> v`.
pub(crate) fn irreducibility_and_period(successors: &[Vec<usize>]) -> (bool, usize) {
    if successors.is_empty() {
        return (false, 0);
    }
    let (fwd, level) = reachable(successors, true);
    let (bwd, _) = reachable(successors, false);
    let irreducible = fwd.iter().all(|&s| s) && bwd.iter().all(|&s| s);
    if !irreducible {
        return (false, 0);
    }
    let mut g = 0usize;
    for (u, row) in successors.iter().enumerate() {
        for &v in row {
            let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs() as usize;
            g = gcd(g, diff);
        }
    }
    (true, g)
}

/// Directed-edge transition system of a metric graph (the branched double
/// cover with backtracking removed).
pub fn build_transition_structure(graph: &MetricGraph) -> Result<TransitionStructure> {
    let n = 2 * graph.edge_count();
    let labels = (0..n).map(|s| graph.symbol_label(s)).collect();
    let reversal = (0..n).map(|s| s ^ 1).collect();
    let successors: Vec<Vec<usize>> = (0..n)
        .map(|s| (0..n).filter(|&t| graph.follows(s, t)).collect())
        .collect();
    if let Some(s) = successors.iter().position(|row| row.len() < 2) {
        return Err(Error::InvalidGraph(format!(
            "directed edge {} has fewer than two continuations",
            graph.symbol_label(s)
        )));
    }
    TransitionStructure::new(labels, reversal, successors)
}

/// An oriented closed geodesic: a cyclic admissible word, stored as its
/// lexicographically minimal rotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClosedGeodesic {
    symbols: Vec<usize>,
    primitive_period: usize,
}

impl ClosedGeodesic {
    /// Canonicalize a cyclic word. Admissibility is the caller's concern.
    pub fn from_cycle(word: &[usize]) -> Self {
        assert!(
            !word.is_empty(),
            "closed geodesic needs at least one symbol"
        );
        let symbols = minimal_rotation(word);
        let primitive_period = primitive_period(&symbols);
        ClosedGeodesic {
            symbols,
            primitive_period,
        }
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn period(&self) -> usize {
        self.symbols.len()
    }

    /// Length of the primitive root; also the number of distinct rotations.
    pub fn primitive_period(&self) -> usize {
        self.primitive_period
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive_period == self.symbols.len()
    }

    /// The same geodesic traversed backwards.
    pub fn reversed(&self, ts: &TransitionStructure) -> Self {
        let word: Vec<usize> = self.symbols.iter().rev().map(|&s| ts.reversal(s)).collect();
        ClosedGeodesic::from_cycle(&word)
    }

    pub fn is_admissible_in(&self, ts: &TransitionStructure) -> bool {
        let p = self.symbols.len();
        (0..p).all(|i| {
            let a = self.symbols[i];
            let b = self.symbols[(i + 1) % p];
            a < ts.len() && b < ts.len() && ts.allows(a, b)
        })
    }

    pub fn label(&self, ts: &TransitionStructure) -> String {
        ts.word_label(&self.symbols)
    }
}

pub(crate) fn minimal_rotation(word: &[usize]) -> Vec<usize> {
    let p = word.len();
    let best = (0..p)
        .min_by(|&a, &b| {
            (0..p)
                .map(|i| word[(a + i) % p])
                .cmp((0..p).map(|i| word[(b + i) % p]))
        })
        .unwrap_or(0);
    (0..p).map(|i| word[(best + i) % p]).collect()
}

pub(crate) fn primitive_period(word: &[usize]) -> usize {
    let p = word.len();
    (1..=p)
        .find(|&d| p.is_multiple_of(d) && (0..p).all(|i| word[i] == word[(i + d) % p]))
        .unwrap_or(p)
}

/// Enumerate oriented closed geodesics of period at most `max_period` with the
/// default resource cap.
pub fn enumerate_closed_geodesics(
    ts: &TransitionStructure,
    max_period: usize,
) -> Result<Vec<ClosedGeodesic>> {
    enumerate_closed_geodesics_capped(ts, max_period, DEFAULT_ENUMERATION_CAP)
}

/// Enumerate all cyclic admissible words (proper powers included) of period
/// `1..=max_period`, sorted by period and then lexicographically.
///
/// Refuses with [`Error::ResourceCap`] when `sum_p trace(A^p)`, an upper bound
/// on the output size, exceeds `cap`.
pub fn enumerate_closed_geodesics_capped(
    ts: &TransitionStructure,
    max_period: usize,
    cap: usize,
) -> Result<Vec<ClosedGeodesic>> {
    if max_period == 0 || ts.is_empty() {
        return Ok(Vec::new());
    }
    let a = ts.adjacency_matrix();
    let mut power = a.clone();
    let mut predicted = power.trace();
    for _ in 1..max_period {
        power = &power * &a;
        predicted += power.trace();
        if predicted > cap as f64 {
            break;
        }
    }
    if predicted > cap as f64 {
        return Err(Error::ResourceCap { predicted, cap });
    }

    let mut out = Vec::new();
    let mut word = Vec::with_capacity(max_period);
    for start in 0..ts.len() {
        word.clear();
        word.push(start);
        extend_cycles(ts, start, max_period, &mut word, &mut out);
    }
    out.sort_by(|a: &ClosedGeodesic, b| {
        a.period()
            .cmp(&b.period())
            .then_with(|| a.symbols.cmp(&b.symbols))
    });
    Ok(out)
}

fn extend_cycles(
    ts: &TransitionStructure,
    start: usize,
    max_period: usize,
    word: &mut Vec<usize>,
    out: &mut Vec<ClosedGeodesic>,
) {
    let last = *word.last().unwrap();
    if ts.allows(last, start) && minimal_rotation(word) == *word {
        out.push(ClosedGeodesic {
            symbols: word.clone(),
            primitive_period: primitive_period(word),
        });
    }
    if word.len() == max_period {
        return;
    }
    for &next in ts.successors(last) {
        if next < start {
            continue;
        }
        word.push(next);
        extend_cycles(ts, start, max_period, word, out);
        word.pop();
    }
}

/// Oriented closed geodesics whose length, with `symbol_lengths[s]` the
/// length of symbol `s`, is strictly less than `t` (within a relative
/// `1e-12`). Sorted like [`enumerate_closed_geodesics`].
pub fn enumerate_closed_geodesics_shorter_than(
    ts: &TransitionStructure,
    symbol_lengths: &[f64],
    t: f64,
    cap: usize,
) -> Result<Vec<ClosedGeodesic>> {
    if symbol_lengths.len() != ts.len() || symbol_lengths.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument(
            "need one positive length per symbol".into(),
        ));
    }
    let shortest = symbol_lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let max_period = (t / shortest).ceil() as usize;
    let a = ts.adjacency_matrix();
    let mut power = DMatrix::identity(ts.len(), ts.len());
    let mut predicted = 0.0;
    for _ in 0..max_period {
        power = &power * &a;
        predicted += power.trace();
        if predicted > cap as f64 {
            return Err(Error::ResourceCap { predicted, cap });
        }
    }
    let bound = t * (1.0 - 1e-12);
    let mut out = Vec::new();
    let mut word = Vec::new();
    for start in 0..ts.len() {
        if symbol_lengths[start] >= bound {
            continue;
        }
        word.clear();
        word.push(start);
        extend_by_length(
            ts,
            symbol_lengths,
            bound,
            start,
            symbol_lengths[start],
            &mut word,
            &mut out,
        );
    }
    out.sort_by(|a, b| {
        a.period()
            .cmp(&b.period())
            .then_with(|| a.symbols.cmp(&b.symbols))
    });
    Ok(out)
}

fn extend_by_length(
    ts: &TransitionStructure,
    lengths: &[f64],
    bound: f64,
    start: usize,
    length: f64,
    word: &mut Vec<usize>,
    out: &mut Vec<ClosedGeodesic>,
) {
    let last = *word.last().unwrap();
    if ts.allows(last, start) && minimal_rotation(word) == *word {
        out.push(ClosedGeodesic {
            symbols: word.clone(),
            primitive_period: primitive_period(word),
        });
    }
    for &next in ts.successors(last) {
        if next < start || length + lengths[next] >= bound {
            continue;
        }
        word.push(next);
        extend_by_length(ts, lengths, bound, start, length + lengths[next], word, out);
        word.pop();
    }
}

/// Sum of edge lengths along the cycle, with multiplicity.
pub fn geodesic_length(g: &ClosedGeodesic, graph: &MetricGraph) -> Result<f64> {
    let n = 2 * graph.edge_count();
    let p = g.period();
    let mut total = 0.0;
    for i in 0..p {
        let a = g.symbols[i];
        let b = g.symbols[(i + 1) % p];
        if a >= n || b >= n || !graph.follows(a, b) {
            return Err(Error::InvalidGraph(format!(
                "geodesic step {i} is not a legal transition of this graph"
            )));
        }
        total += graph.edges[a / 2].length;
    }
    Ok(total)
}

/// Edges cut to leave a spanning tree; the tree is the greedy
/// (identifier-order) spanning tree, hence lexicographically minimal.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSystem {
    tree_edges: Vec<usize>,
    cut_edges: Vec<usize>,
}

impl CutSystem {
    pub fn spanning_tree_complement(graph: &MetricGraph) -> Self {
        let mut parent: Vec<usize> = (0..graph.vertex_count()).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        let mut tree_edges = Vec::new();
        let mut cut_edges = Vec::new();
        for (k, e) in graph.edges().iter().enumerate() {
            let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
            if a != b {
                parent[a] = b;
                tree_edges.push(k);
            } else {
                cut_edges.push(k);
            }
        }
        CutSystem {
            tree_edges,
            cut_edges,
        }
    }

    /// Validate an explicit cut set: its complement must be a spanning tree.
    pub fn from_cut_edges(graph: &MetricGraph, cut_edges: Vec<usize>) -> Result<Self> {
        let mut cut = cut_edges;
        cut.sort_unstable();
        cut.dedup();
        if cut.iter().any(|&k| k >= graph.edge_count()) {
            return Err(Error::InvalidGraph("cut edge out of range".into()));
        }
        let tree_edges: Vec<usize> = (0..graph.edge_count())
            .filter(|k| cut.binary_search(k).is_err())
            .collect();
        let system = CutSystem {
            tree_edges,
            cut_edges: cut,
        };
        if system.tree_edges.len() + 1 != graph.vertex_count() || !system.tree_is_spanning(graph) {
            return Err(Error::InvalidGraph(
                "cut system complement is not a spanning tree".into(),
            ));
        }
        Ok(system)
    }

    fn tree_is_spanning(&self, graph: &MetricGraph) -> bool {
        (0..graph.vertex_count()).all(|v| self.tree_path(graph, 0, v).is_some())
    }

    pub fn tree_edges(&self) -> &[usize] {
        &self.tree_edges
    }

    pub fn cut_edges(&self) -> &[usize] {
        &self.cut_edges
    }

    /// Symbols of the unique tree path from `from` to `to`.
    pub fn tree_path(&self, graph: &MetricGraph, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = graph.vertex_count();
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &k in &self.tree_edges {
                for symbol in [2 * k, 2 * k + 1] {
                    if graph.tail_of(symbol) == v {
                        let w = graph.head_of(symbol);
                        if !seen[w] {
                            seen[w] = true;
                            via[w] = Some(symbol);
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = to;
        while v != from {
            let symbol = via[v]?;
            path.push(symbol);
            v = graph.tail_of(symbol);
        }
        path.reverse();
        Some(path)
    }

    /// The coding by crossings of cut-edge midpoints: symbols are the two
    /// orientations of each cut edge and every transition except immediate
    /// reversal is admissible.
    pub fn coding(&self, graph: &MetricGraph) -> Result<TransitionStructure> {
        let n = 2 * self.cut_edges.len();
        let labels = (0..n)
            .map(|j| graph.symbol_label(2 * self.cut_edges[j / 2] + j % 2))
            .collect();
        let reversal = (0..n).map(|j| j ^ 1).collect();
        let successors = (0..n)
            .map(|j| (0..n).filter(|&k| k != (j ^ 1)).collect())
            .collect();
        TransitionStructure::new(labels, reversal, successors)
    }

    /// Graph symbol of a cut-coding symbol.
    pub fn graph_symbol(&self, coding_symbol: usize) -> usize {
        2 * self.cut_edges[coding_symbol / 2] + coding_symbol % 2
    }
}

/// Bundled example graphs (`theta`, `two_loop`, `k4`, `dumbbell`).
pub fn bundled_graph(name: &str) -> Option<MetricGraph> {
    let text = match name {
        "theta" => include_str!("../data/theta.json"),
        "two_loop" => include_str!("../data/two_loop.json"),
        "k4" => include_str!("../data/k4.json"),
        "dumbbell" => include_str!("../data/dumbbell.json"),
        _ => return None,
    };
    Some(MetricGraph::from_json_str(text, name).expect("bundled graph is valid"))
}

pub const BUNDLED_GRAPHS: [&str; 4] = ["theta", "two_loop", "k4", "dumbbell"];
