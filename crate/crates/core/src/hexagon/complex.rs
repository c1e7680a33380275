use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{CutSystem, Edge, MetricGraph};

/// Largest hexagon count for which the independent-half search is exhaustive.
pub const EXHAUSTIVE_SEARCH_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideKind {
    Arc,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Side {
    pub kind: SideKind,
    pub name: String,
}

impl Side {
    fn parse(text: &str) -> Result<Self> {
        let (kind, name) = match text.split_once(':') {
            Some(("a", name)) => (SideKind::Arc, name),
            Some(("b", name)) => (SideKind::Boundary, name),
            _ => {
                return Err(Error::Triangulation(format!(
                    "side '{text}' is not of the form 'a:NAME' or 'b:NAME'"
                )))
            }
        };
        if name.is_empty() {
            return Err(Error::Triangulation(format!(
                "side '{text}' has an empty name"
            )));
        }
        Ok(Side {
            kind,
            name: name.to_string(),
        })
    }
}

/// Six sides in counter-clockwise order, arcs in the even slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hexagon {
    pub sides: [Side; 6],
    pub marked: bool,
}

/// A boundary component: its segments as `(hexagon, slot)` in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cuff {
    pub segments: Vec<(usize, usize)>,
}

#[derive(Debug, Deserialize)]
struct HexagonRecord {
    sides: Vec<String>,
    #[serde(default)]
    marked: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ComplexFile {
    Named {
        #[serde(default)]
        name: String,
        hexagons: Vec<HexagonRecord>,
    },
    Bare(Vec<HexagonRecord>),
}

/// Combinatorics of a decomposition of a bordered surface into right-angled
/// hexagons along disjoint arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangulationComplex {
    name: String,
    hexagons: Vec<Hexagon>,
    /// Arc names, sorted.
    arcs: Vec<String>,
    /// The two `(hexagon, slot)` occurrences of each arc, lower hexagon first.
    arc_slots: Vec<[(usize, usize); 2]>,
    cuffs: Vec<Cuff>,
    dual: MetricGraph,
    cut: CutSystem,
}

impl TriangulationComplex {
    /// Build from hexagon side lists. If any hexagon is marked, the marking
    /// must be an independent half.
    pub fn new(name: &str, hexagons: Vec<(Vec<String>, bool)>) -> Result<Self> {
        if hexagons.is_empty() || !hexagons.len().is_multiple_of(2) {
            return Err(Error::Triangulation(format!(
                "need a positive even number of hexagons, got {}",
                hexagons.len()
            )));
        }
        let mut parsed = Vec::with_capacity(hexagons.len());
        for (h, (sides, marked)) in hexagons.into_iter().enumerate() {
            if sides.len() != 6 {
                return Err(Error::Triangulation(format!(
                    "hexagons[{h}] has {} sides, expected 6",
                    sides.len()
                )));
            }
            let mut sides = sides
                .iter()
                .map(|s| Side::parse(s))
                .collect::<Result<Vec<_>>>()?;
            if sides[0].kind == SideKind::Boundary {
                sides.rotate_left(1);
            }
            for (slot, side) in sides.iter().enumerate() {
                let expected = if slot % 2 == 0 {
                    SideKind::Arc
                } else {
                    SideKind::Boundary
                };
                if side.kind != expected {
                    return Err(Error::Triangulation(format!(
                        "hexagons[{h}] sides do not alternate between arcs and boundary segments"
                    )));
                }
            }
            let sides: [Side; 6] = sides.try_into().expect("six sides");
            parsed.push(Hexagon { sides, marked });
        }

        let mut arc_map: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
        let mut boundary_names = HashSet::new();
        for (h, hex) in parsed.iter().enumerate() {
            for (slot, side) in hex.sides.iter().enumerate() {
                match side.kind {
                    SideKind::Arc => arc_map
                        .entry(side.name.clone())
                        .or_default()
                        .push((h, slot)),
                    SideKind::Boundary => {
                        if !boundary_names.insert(side.name.clone()) {
                            return Err(Error::Triangulation(format!(
                                "boundary segment '{}' appears twice",
                                side.name
                            )));
                        }
                    }
                }
            }
        }
        let mut arcs = Vec::new();
        let mut arc_slots = Vec::new();
        for (name, slots) in arc_map {
            if slots.len() != 2 {
                return Err(Error::Triangulation(format!(
                    "arc '{name}' borders {} hexagon sides, expected 2",
                    slots.len()
                )));
            }
            if slots[0].0 == slots[1].0 {
                return Err(Error::Triangulation(format!(
                    "arc '{name}' borders hexagon {} on both sides",
                    slots[0].0
                )));
            }
            arcs.push(name);
            arc_slots.push([slots[0], slots[1]]);
        }

        let edges = arcs
            .iter()
            .zip(&arc_slots)
            .map(|(name, s)| Edge {
                tail: s[0].0,
                head: s[1].0,
                name: name.clone(),
                length: 1.0,
            })
            .collect();
        let dual = MetricGraph::new(parsed.len(), edges)
            .map_err(|e| Error::Triangulation(format!("dual graph is invalid: {e}")))?;
        let cut = CutSystem::spanning_tree_complement(&dual);
        let mut complex = TriangulationComplex {
            name: name.to_string(),
            hexagons: parsed,
            arcs,
            arc_slots,
            cuffs: Vec::new(),
            dual,
            cut,
        };
        complex.cuffs = complex.trace_cuffs();
        let marked: Vec<usize> = (0..complex.hexagons.len())
            .filter(|&h| complex.hexagons[h].marked)
            .collect();
        if !marked.is_empty() {
            complex.check_marking(&marked)?;
        }
        Ok(complex)
    }

    /// Parse the JSON format: `{"name": ..., "hexagons": [{"sides": [...],
    /// "marked": bool}, ...]}` or a bare list of hexagon records.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let file: ComplexFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        let (name, records) = match file {
            ComplexFile::Named { name, hexagons } => (name, hexagons),
            ComplexFile::Bare(hexagons) => (String::new(), hexagons),
        };
        let name = if name.is_empty() {
            origin.to_string()
        } else {
            name
        };
        let hexagons = records.into_iter().map(|r| (r.sides, r.marked)).collect();
        TriangulationComplex::new(&name, hexagons).map_err(|e| match e {
            Error::Triangulation(message) => Error::Parse {
                path: origin.to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hexagons(&self) -> &[Hexagon] {
        &self.hexagons
    }

    pub fn arcs(&self) -> &[String] {
        &self.arcs
    }

    pub fn arc_index(&self, name: &str) -> Option<usize> {
        self.arcs.binary_search_by(|a| a.as_str().cmp(name)).ok()
    }

    pub fn arc_slots(&self, arc: usize) -> [(usize, usize); 2] {
        self.arc_slots[arc]
    }

    /// Slot of `arc` in hexagon `h`.
    pub fn slot_of(&self, arc: usize, h: usize) -> Option<usize> {
        self.arc_slots[arc].iter().find(|s| s.0 == h).map(|s| s.1)
    }

    /// Arc index in a given slot.
    pub fn arc_at(&self, h: usize, slot: usize) -> usize {
        self.arc_index(&self.hexagons[h].sides[slot].name)
            .expect("arc is indexed")
    }

    /// `s = -chi(S)`.
    pub fn complexity(&self) -> usize {
        self.hexagons.len() / 2
    }

    pub fn cuffs(&self) -> &[Cuff] {
        &self.cuffs
    }

    pub fn boundary_count(&self) -> usize {
        self.cuffs.len()
    }

    pub fn genus(&self) -> usize {
        (2 + self.complexity() - self.boundary_count()) / 2
    }

    /// Dual graph: a vertex per hexagon, an edge per arc (unit lengths).
    pub fn dual_graph(&self) -> &MetricGraph {
        &self.dual
    }

    pub fn cut(&self) -> &CutSystem {
        &self.cut
    }

    pub fn is_marked(&self) -> bool {
        self.hexagons.iter().any(|h| h.marked)
    }

    pub fn marked_hexagons(&self) -> Vec<usize> {
        (0..self.hexagons.len())
            .filter(|&h| self.hexagons[h].marked)
            .collect()
    }

    /// Hexagons sharing an arc with `h`.
    pub fn neighbours(&self, h: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..6)
            .step_by(2)
            .map(|slot| {
                let arc = self.arc_at(h, slot);
                let s = self.arc_slots[arc];
                if s[0].0 == h {
                    s[1].0
                } else {
                    s[0].0
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn check_marking(&self, marked: &[usize]) -> Result<()> {
        if marked.len() != self.complexity() {
            return Err(Error::Triangulation(format!(
                "{} hexagons marked, expected {}",
                marked.len(),
                self.complexity()
            )));
        }
        for &h in marked {
            if let Some(&w) = self.neighbours(h).iter().find(|w| marked.contains(w)) {
                return Err(Error::Triangulation(format!(
                    "marked hexagons {h} and {w} are adjacent"
                )));
            }
        }
        Ok(())
    }

    /// The same complex with exactly the given hexagons marked.
    pub fn with_marking(&self, marked: &[usize]) -> Result<Self> {
        if let Some(&h) = marked.iter().find(|&&h| h >= self.hexagons.len()) {
            return Err(Error::Triangulation(format!("hexagon {h} does not exist")));
        }
        let mut out = self.clone();
        for (h, hex) in out.hexagons.iter_mut().enumerate() {
            hex.marked = marked.contains(&h);
        }
        out.check_marking(&out.marked_hexagons())?;
        Ok(out)
    }

    /// Marked copy: the existing marking if any, otherwise the result of
    /// [`find_independent_half`].
    pub fn marked(&self) -> Result<Self> {
        if self.is_marked() {
            return Ok(self.clone());
        }
        match find_independent_half(self).hexagons {
            Some(h) => self.with_marking(&h),
            None => Err(Error::Triangulation(
                "no independent half of the hexagons exists".into(),
            )),
        }
    }

    /// `(hexagon, slot)` of every coordinate: the boundary segments of marked
    /// hexagons, in hexagon then slot order.
    pub fn coordinate_sides(&self) -> Vec<(usize, usize)> {
        self.marked_hexagons()
            .into_iter()
            .flat_map(|h| [(h, 1), (h, 3), (h, 5)])
            .collect()
    }

    pub fn coordinate_names(&self) -> Vec<String> {
        self.coordinate_sides()
            .into_iter()
            .map(|(h, s)| self.hexagons[h].sides[s].name.clone())
            .collect()
    }

    /// Follow boundary segments: segment `i` of `v` ends at the arc in slot
    /// `i + 1`, across which the boundary continues with the segment after
    /// that arc's slot in the neighbouring hexagon.
    fn trace_cuffs(&self) -> Vec<Cuff> {
        let mut seen = HashSet::new();
        let mut cuffs = Vec::new();
        for h in 0..self.hexagons.len() {
            for start in [1, 3, 5] {
                if seen.contains(&(h, start)) {
                    continue;
                }
                let mut segments = Vec::new();
                let (mut v, mut i) = (h, start);
                while seen.insert((v, i)) {
                    segments.push((v, i));
                    let arc = self.arc_at(v, (i + 1) % 6);
                    let other = self.arc_slots[arc]
                        .iter()
                        .copied()
                        .find(|s| s.0 != v)
                        .expect("arc joins two hexagons");
                    v = other.0;
                    i = (other.1 + 1) % 6;
                }
                cuffs.push(Cuff { segments });
            }
        }
        cuffs
    }

    /// Dual-graph symbol for crossing `arc` out of hexagon `from`.
    pub fn crossing(&self, arc: usize, from: usize) -> usize {
        if self.arc_slots[arc][0].0 == from {
            2 * arc
        } else {
            2 * arc + 1
        }
    }

    /// The cuff as a cyclic word of dual-graph symbols (arcs crossed between
    /// consecutive segments).
    pub fn cuff_cycle(&self, cuff: &Cuff) -> Vec<usize> {
        cuff.segments
            .iter()
            .map(|&(v, i)| self.crossing(self.arc_at(v, (i + 1) % 6), v))
            .collect()
    }

    /// Export of the dual graph in the graph file format.
    pub fn dual_graph_json(&self) -> String {
        self.dual.to_json_string()
    }
}

/// Bundled complexes: `pants`, `one_holed_torus`, `two_holed_torus`,
/// `four_holed_sphere` and the unmarkable `k4_complex`.
pub fn bundled_complex(name: &str) -> Option<TriangulationComplex> {
    let text = match name {
        "pants" => include_str!("../../data/pants.json"),
        "one_holed_torus" => include_str!("../../data/one_holed_torus.json"),
        "two_holed_torus" => include_str!("../../data/two_holed_torus.json"),
        "four_holed_sphere" => include_str!("../../data/four_holed_sphere.json"),
        "k4_complex" => include_str!("../../data/k4_complex.json"),
        _ => return None,
    };
    Some(TriangulationComplex::from_json_str(text, name).expect("bundled complex is valid"))
}

pub const BUNDLED_COMPLEXES: [&str; 5] = [
    "pants",
    "one_holed_torus",
    "two_holed_torus",
    "four_holed_sphere",
    "k4_complex",
];

/// Outcome of the search for `s` pairwise non-adjacent hexagons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependentHalf {
    /// Lexicographically smallest such set when the search is exhaustive.
    pub hexagons: Option<Vec<usize>>,
    /// False when the greedy fallback was used; then `None` is inconclusive.
    pub exhaustive: bool,
}

pub fn find_independent_half(complex: &TriangulationComplex) -> IndependentHalf {
    let n = complex.hexagons.len();
    let need = complex.complexity();
    let neighbours: Vec<u64> = (0..n)
        .map(|h| {
            complex
                .neighbours(h)
                .iter()
                .fold(0u64, |m, &w| m | (1 << w))
        })
        .collect();
    if n <= EXHAUSTIVE_SEARCH_LIMIT {
        let mut failed = HashSet::new();
        let mut chosen = Vec::new();
        let found = search(0, need, 0, &neighbours, &mut chosen, &mut failed);
        IndependentHalf {
            hexagons: found.then_some(chosen),
            exhaustive: true,
        }
    } else {
        let mut blocked = vec![false; n];
        let mut chosen = Vec::new();
        for h in 0..n {
            if chosen.len() == need {
                break;
            }
            if !blocked[h] {
                chosen.push(h);
                for w in complex.neighbours(h) {
                    blocked[w] = true;
                }
            }
        }
        IndependentHalf {
            hexagons: (chosen.len() == need).then_some(chosen),
            exhaustive: false,
        }
    }
}

fn search(
    h: usize,
    need: usize,
    blocked: u64,
    neighbours: &[u64],
    chosen: &mut Vec<usize>,
    failed: &mut HashSet<(usize, usize, u64)>,
) -> bool {
    if need == 0 {
        return true;
    }
    let n = neighbours.len();
    if n - h < need {
        return false;
    }
    let key = (h, need, blocked >> h);
    if failed.contains(&key) {
        return false;
    }
    if blocked & (1 << h) == 0 {
        chosen.push(h);
        if search(
            h + 1,
            need - 1,
            blocked | neighbours[h],
            neighbours,
            chosen,
            failed,
        ) {
            return true;
        }
        chosen.pop();
    }
    if search(h + 1, need, blocked, neighbours, chosen, failed) {
        return true;
    }
    failed.insert(key);
    false
}

/// Coordinates: lengths of the boundary segments of marked hexagons, in the
/// order of [`TriangulationComplex::coordinate_sides`].
#[derive(Debug, Clone, PartialEq)]
pub struct HexCoordinates {
    pub values: Vec<f64>,
}

impl HexCoordinates {
    pub fn new(complex: &TriangulationComplex, values: Vec<f64>) -> Result<Self> {
        let expected = 3 * complex.complexity();
        if !complex.is_marked() {
            return Err(Error::Triangulation(
                "complex has no marked hexagons".into(),
            ));
        }
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates given, the complex has {expected}",
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "coordinate {i} is not positive: {v}"
            )));
        }
        Ok(HexCoordinates { values })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        HexCoordinates {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}
