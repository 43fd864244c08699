//! Multi-hypergraphs over `n` labelled vertices with multiplicities in `Z_d`.
//!
//! Vertex labels are 1-based. A hyperedge is any subset of `{1..n}`,
//! including the empty set, and carries a multiplicity in `1..d`; subsets
//! with multiplicity zero are simply absent. Multiplicities are reduced
//! modulo `d` on every mutation so that equal hypergraphs compare equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sorted, duplicate-free set of 1-based vertex labels.
///
/// Ordered by cardinality first and lexicographically second, which is the
/// canonical edge order used for iteration and serialization.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// The set with `v` removed.
    pub fn without(&self, v: usize) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&u| u != v).collect())
    }

    /// The set with `v` added.
    pub fn with(&self, v: usize) -> VertexSet {
        VertexSet::new(self.0.iter().copied().chain(std::iter::once(v)))
    }

    /// Bitmask over 0-based positions (bit `v-1` for label `v`).
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &v| acc | (1u64 << (v - 1)))
    }

    pub fn from_mask(mask: u64) -> VertexSet {
        VertexSet(
            (0..64)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| b + 1)
                .collect(),
        )
    }
}

impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        VertexSet::new(v)
    }
}

impl From<&[usize]> for VertexSet {
    fn from(v: &[usize]) -> Self {
        VertexSet::new(v.iter().copied())
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(v: [usize; N]) -> Self {
        VertexSet::new(v)
    }
}

impl From<&VertexSet> for VertexSet {
    fn from(v: &VertexSet) -> Self {
        v.clone()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// A multi-hypergraph `H_d = (V, E)` with its multiplicity function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiHypergraph {
    n: usize,
    d: u32,
    edges: BTreeMap<VertexSet, u32>,
}

impl MultiHypergraph {
    /// Vertex counts are capped so that subsets fit in a `u64` mask.
    pub const MAX_VERTICES: usize = 63;

    /// The edgeless hypergraph on `n` vertices of level `d`.
    pub fn new(n: usize, d: u32) -> Result<Self> {
        if n == 0 || n > Self::MAX_VERTICES {
            return Err(Error::domain(format!(
                "vertex count must be in 1..={}, got {n}",
                Self::MAX_VERTICES
            )));
        }
        if d < 2 {
            return Err(Error::domain(format!(
                "qudit level must be at least 2, got {d}"
            )));
        }
        Ok(MultiHypergraph {
            n,
            d,
            edges: BTreeMap::new(),
        })
    }

    /// Builds a hypergraph by accumulating `(subset, multiplicity)` pairs;
    /// repeated subsets add up modulo `d`.
    pub fn from_edges<V, I>(n: usize, d: u32, edges: I) -> Result<Self>
    where
        V: Into<VertexSet>,
        I: IntoIterator<Item = (V, i64)>,
    {
        let mut h = Self::new(n, d)?;
        for (v, m) in edges {
            h.add_edge_in_place(v, m)?;
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Stored edges in canonical order (cardinality, then lexicographic).
    pub fn edges(&self) -> impl Iterator<Item = (&VertexSet, u32)> + '_ {
        self.edges.iter().map(|(e, &m)| (e, m))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn max_cardinality(&self) -> Option<usize> {
        self.edges.keys().map(VertexSet::len).max()
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n {
            Err(Error::domain(format!(
                "vertex {v} out of range 1..={}",
                self.n
            )))
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_vertices(&self, e: &VertexSet) -> Result<()> {
        e.iter().try_for_each(|v| self.check_vertex(v))
    }

    /// Returns a copy with `m_e` replaced by `(m_e + delta) mod d`.
    pub fn add_edge(&self, vertices: impl Into<VertexSet>, delta: i64) -> Result<Self> {
        let mut h = self.clone();
        h.add_edge_in_place(vertices, delta)?;
        Ok(h)
    }

    pub fn add_edge_in_place(&mut self, vertices: impl Into<VertexSet>, delta: i64) -> Result<()> {
        let e = vertices.into();
        self.check_vertices(&e)?;
        let d = i64::from(self.d);
        let old = i64::from(self.edges.get(&e).copied().unwrap_or(0));
        let new = (old + delta.rem_euclid(d)).rem_euclid(d) as u32;
        if new == 0 {
            self.edges.remove(&e);
        } else {
            self.edges.insert(e, new);
        }
        Ok(())
    }

    /// `m_e`, or 0 when `e` is not a stored edge.
    pub fn multiplicity(&self, vertices: impl Into<VertexSet>) -> Result<u32> {
        let e = vertices.into();
        self.check_vertices(&e)?;
        Ok(self.edges.get(&e).copied().unwrap_or(0))
    }

    /// Vertex classes linked by chains of edges of cardinality at least two.
    /// Each component is sorted; components are ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.n);
        for e in self.edges.keys().filter(|e| e.len() >= 2) {
            let first = e.as_slice()[0] - 1;
            for v in e.iter().skip(1) {
                uf.union(first, v - 1);
            }
        }
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.n {
            by_root.entry(uf.find(v)).or_default().push(v + 1);
        }
        let mut comps: Vec<Vec<usize>> = by_root.into_values().collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// Stored edges with at least one vertex on each side of `p`.
    pub fn crossing_edges(&self, p: &Bipartition) -> Result<Vec<(VertexSet, u32)>> {
        p.check_for(self.n)?;
        Ok(self
            .edges
            .iter()
            .filter(|(e, _)| {
                e.iter().any(|v| p.in_control(v)) && e.iter().any(|v| !p.in_control(v))
            })
            .map(|(e, &m)| (e.clone(), m))
            .collect())
    }

    /// Renames vertex `v` to `perm[v - 1]`; `perm` must be a permutation of `1..=n`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n {
            return Err(Error::domain("relabeling must cover every vertex"));
        }
        for &p in perm {
            if p == 0 || p > self.n || seen[p - 1] {
                return Err(Error::domain("relabeling is not a permutation"));
            }
            seen[p - 1] = true;
        }
        let edges = self
            .edges
            .iter()
            .map(|(e, &m)| (VertexSet::new(e.iter().map(|v| perm[v - 1])), m))
            .collect();
        Ok(MultiHypergraph {
            n: self.n,
            d: self.d,
            edges,
        })
    }

    /// The sub-hypergraph induced on `block`, relabelled `1..=block.len()` in
    /// ascending order of the original labels. Only non-empty edges lying
    /// entirely inside the block are kept.
    pub fn induced(&self, block: &[usize]) -> Result<Self> {
        let block = VertexSet::new(block.iter().copied());
        self.check_vertices(&block)?;
        let mut h = MultiHypergraph::new(block.len(), self.d)?;
        let pos = |v: usize| block.as_slice().binary_search(&v).ok().map(|i| i + 1);
        for (e, &m) in self.edges.iter().filter(|(e, _)| !e.is_empty()) {
            let mapped: Option<Vec<usize>> = e.iter().map(pos).collect();
            if let Some(mapped) = mapped {
                h.edges.insert(VertexSet(mapped), m);
            }
        }
        Ok(h)
    }

    /// Uniformly random multiplicity for each subset, present with probability one half.
    pub fn random<R: Rng + ?Sized>(n: usize, d: u32, rng: &mut R) -> Result<Self> {
        if n > 16 {
            return Err(Error::domain(
                "random hypergraphs are limited to 16 vertices",
            ));
        }
        let mut h = Self::new(n, d)?;
        for mask in 0u64..(1u64 << n) {
            if rng.random_bool(0.5) {
                let m = rng.random_range(1..d);
                h.edges.insert(VertexSet::from_mask(mask), m);
            }
        }
        Ok(h)
    }

    /// Parses the JSON hypergraph document.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        if doc.d < 2 || doc.d > i64::from(u32::MAX) {
            return Err(Error::parse(
                "field \"d\"",
                format!("d must be >= 2, got {}", doc.d),
            ));
        }
        if doc.n < 1 || doc.n > Self::MAX_VERTICES as i64 {
            return Err(Error::parse(
                "field \"n\"",
                format!("n must be in 1..={}, got {}", Self::MAX_VERTICES, doc.n),
            ));
        }
        let mut h = Self::new(doc.n as usize, doc.d as u32)?;
        for (i, edge) in doc.edges.iter().enumerate() {
            let loc = format!("edges[{i}]");
            if edge.m < 1 || edge.m >= doc.d {
                return Err(Error::parse(
                    loc,
                    format!("multiplicity {} outside 1..{}", edge.m, doc.d),
                ));
            }
            if edge.v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::parse(loc, "vertex list must be sorted and distinct"));
            }
            if let Some(&bad) = edge.v.iter().find(|&&v| v < 1 || v > doc.n) {
                return Err(Error::parse(
                    loc,
                    format!("vertex {bad} out of range 1..={}", doc.n),
                ));
            }
            let e = VertexSet(edge.v.iter().map(|&v| v as usize).collect());
            if h.edges.contains_key(&e) {
                return Err(Error::parse(loc, format!("duplicate vertex set {e}")));
            }
            h.edges.insert(e, edge.m as u32);
        }
        Ok(h)
    }

    /// Canonical JSON document; `parse(to_json(h)) == h`.
    pub fn to_json(&self) -> String {
        let doc = Document {
            d: i64::from(self.d),
            n: self.n as i64,
            edges: self
                .edges
                .iter()
                .map(|(e, &m)| EdgeDoc {
                    v: e.iter().map(|v| v as i64).collect(),
                    m: i64::from(m),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("hypergraph document serializes")
    }
}

impl fmt::Display for MultiHypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H(n={}, d={};", self.n, self.d)?;
        for (e, m) in self.edges() {
            write!(f, " {e}^{m}")?;
        }
        f.write_str(")")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    d: i64,
    n: i64,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    v: Vec<i64>,
    m: i64,
}

/// A split of the vertices into a control part and a target part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n: usize,
    control: Vec<usize>,
    target: Vec<usize>,
}

impl Bipartition {
    /// Control part as given; the target is the complement in `1..=n`.
    pub fn new(n: usize, control: &[usize]) -> Result<Self> {
        let control = VertexSet::new(control.iter().copied());
        if control.iter().any(|v| v == 0 || v > n) {
            return Err(Error::domain("bipartition vertex out of range"));
        }
        if control.is_empty() || control.len() == n {
            return Err(Error::domain(
                "both sides of a bipartition must be nonempty",
            ));
        }
        let target = (1..=n).filter(|&v| !control.contains(v)).collect();
        Ok(Bipartition {
            n,
            control: control.0,
            target,
        })
    }

    /// Checks that `control` and `target` partition `1..=n` exactly.
    pub fn from_parts(n: usize, control: &[usize], target: &[usize]) -> Result<Self> {
        let p = Self::new(n, control)?;
        if VertexSet::new(target.iter().copied()).as_slice() != p.target.as_slice()
            || target.len() != p.target.len()
        {
            return Err(Error::domain(
                "control and target must be disjoint and cover every vertex",
            ));
        }
        Ok(p)
    }

    /// Parses `"1,2|3,4"`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let (left, right) = text
            .split_once('|')
            .ok_or_else(|| Error::domain(format!("partition {text:?} lacks a '|'")))?;
        let side = |s: &str| -> Result<Vec<usize>> {
            s.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::domain(format!("bad vertex label {t:?}")))
                })
                .collect()
        };
        Self::from_parts(n, &side(left)?, &side(right)?)
    }

    /// All `2^(n-1) - 1` bipartitions with vertex 1 in the control part,
    /// ordered by control size and then lexicographically.
    pub fn all(n: usize) -> Vec<Bipartition> {
        if n < 2 {
            return Vec::new();
        }
        let mut out: Vec<Bipartition> = (0u64..(1u64 << (n - 1)))
            .map(|rest| {
                let control: Vec<usize> = std::iter::once(1)
                    .chain((0..n - 1).filter(|b| rest >> b & 1 == 1).map(|b| b + 2))
                    .collect();
                control
            })
            .filter(|c| c.len() < n)
            .map(|c| Bipartition::new(n, &c).expect("enumerated bipartitions are valid"))
            .collect();
        out.sort_by(|a, b| {
            a.control
                .len()
                .cmp(&b.control.len())
                .then_with(|| a.control.cmp(&b.control))
        });
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn control(&self) -> &[usize] {
        &self.control
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn in_control(&self, v: usize) -> bool {
        self.control.binary_search(&v).is_ok()
    }

    /// The same cut with the roles of the two parts exchanged.
    pub fn swapped(&self) -> Bipartition {
        Bipartition {
            n: self.n,
            control: self.target.clone(),
            target: self.control.clone(),
        }
    }

    pub(crate) fn check_for(&self, n: usize) -> Result<()> {
        if self.n != n {
            Err(Error::domain(format!(
                "bipartition is over {} vertices, state has {n}",
                self.n
            )))
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}|{}", join(&self.control), join(&self.target))
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            Ordering::Less => self.parent[a] = b,
            Ordering::Greater => self.parent[b] = a,
            Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn add_edge_cancels_cyclically() {
        let h = MultiHypergraph::from_edges(2, 3, [(vec![1, 2], 2)]).unwrap();
        let h = h.add_edge([1, 2], 1).unwrap();
        assert!(h.is_empty());
        assert_eq!(h.multiplicity([1, 2]).unwrap(), 0);
    }

    #[test]
    fn add_empty_edge() {
        let h = MultiHypergraph::new(3, 2)
            .unwrap()
            .add_edge(VertexSet::empty(), 1)
            .unwrap();
        assert_eq!(h.multiplicity(VertexSet::empty()).unwrap(), 1);
        assert_eq!(h.edge_count(), 1);
    }

    #[test]
    fn add_edge_wraps_modulo_d() {
        let h = MultiHypergraph::from_edges(3, 5, [(vec![2], 3)]).unwrap();
        assert_eq!(
            h.add_edge([2], 4).unwrap().multiplicity([2]).unwrap(),
            (3 + 4) % 5
        );
        assert_eq!(h.add_edge([2], -3).unwrap().multiplicity([2]).unwrap(), 0);
    }

    #[test]
    fn add_edge_rejects_out_of_range_vertex() {
        let h = MultiHypergraph::new(3, 2).unwrap();
        assert!(matches!(h.add_edge([4], 1), Err(Error::Domain(_))));
        assert!(matches!(h.add_edge([0, 1], 1), Err(Error::Domain(_))));
        assert!(matches!(h.multiplicity([1, 7]), Err(Error::Domain(_))));
    }

    #[test]
    fn multiplicities_of_qutrit_sample() {
        let h = qutrit_sample();
        assert_eq!(h.multiplicity([1, 2, 3]).unwrap(), 2);
        assert_eq!(h.multiplicity([1, 2]).unwrap(), 0);
        assert_eq!(
            MultiHypergraph::new(2, 4)
                .unwrap()
                .multiplicity(VertexSet::empty())
                .unwrap(),
            0
        );
    }

    #[test]
    fn components() {
        assert_eq!(doubled_path(3).connected_components(), vec![vec![1, 2, 3]]);

        let h = MultiHypergraph::from_edges(3, 2, [(vec![], 1), (vec![2], 1)]).unwrap();
        assert_eq!(h.connected_components(), vec![vec![1], vec![2], vec![3]]);

        let h = MultiHypergraph::from_edges(4, 2, [(vec![1, 2, 3], 1)]).unwrap();
        assert_eq!(h.connected_components(), vec![vec![1, 2, 3], vec![4]]);

        let h = MultiHypergraph::from_edges(5, 3, [(vec![2, 5], 1), (vec![1, 3], 2)]).unwrap();
        assert_eq!(
            h.connected_components(),
            vec![vec![1, 3], vec![2, 5], vec![4]]
        );
    }

    #[test]
    fn crossing_edges_examples() {
        let n = 5;
        let h = MultiHypergraph::from_edges(n, 4, [((1..=n).collect::<Vec<_>>(), 3)]).unwrap();
        let p = Bipartition::new(n, &[1]).unwrap();
        assert_eq!(
            h.crossing_edges(&p).unwrap(),
            vec![(VertexSet::new(1..=n), 3)]
        );

        let p = Bipartition::new(3, &[1]).unwrap();
        assert!(MultiHypergraph::new(3, 2)
            .unwrap()
            .crossing_edges(&p)
            .unwrap()
            .is_empty());
        assert_eq!(
            qubit_sample().crossing_edges(&p).unwrap(),
            vec![(VertexSet::from([1, 2, 3]), 1)]
        );

        let wrong = Bipartition::new(4, &[1]).unwrap();
        assert!(qubit_sample().crossing_edges(&wrong).is_err());
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[1, 2, 3]).is_err());
        assert!(Bipartition::new(3, &[4]).is_err());
        assert!(Bipartition::from_parts(3, &[1], &[2]).is_err());
        assert!(Bipartition::from_parts(3, &[1, 2], &[2, 3]).is_err());
        let p = Bipartition::parse(4, "1,2|3,4").unwrap();
        assert_eq!(p.control(), &[1, 2]);
        assert_eq!(p.target(), &[3, 4]);
        assert_eq!(p.to_string(), "1,2|3,4");
        assert!(Bipartition::parse(4, "1,2,3,4").is_err());
    }

    #[test]
    fn bipartition_enumeration_order() {
        let all = Bipartition::all(4);
        assert_eq!(all.len(), 7);
        let names: Vec<String> = all.iter().map(ToString::to_string).collect();
        assert_eq!(
            names,
            ["1|2,3,4", "1,2|3,4", "1,3|2,4", "1,4|2,3", "1,2,3|4", "1,2,4|3", "1,3,4|2"]
        );
        assert!(Bipartition::all(1).is_empty());
    }

    #[test]
    fn parse_qubit_sample_document() {
        let text = r#"{"d":2,"n":3,"edges":[{"v":[],"m":1},{"v":[1],"m":1},{"v":[2,3],"m":1},{"v":[1,2,3],"m":1}]}"#;
        let h = MultiHypergraph::parse(text).unwrap();
        assert_eq!(h, qubit_sample());
        assert_eq!(h.to_json(), text);
    }

    #[test]
    fn parse_empty_document() {
        let h = MultiHypergraph::parse(r#"{"d":4,"n":1,"edges":[]}"#).unwrap();
        assert_eq!(h, MultiHypergraph::new(1, 4).unwrap());
    }

    #[test]
    fn parse_rejections() {
        let cases = [
            r#"{"d":3,"n":3,"edges":[{"v":[1,2],"m":1},{"v":[1,2],"m":2}]}"#,
            r#"{"d":3,"n":3,"edges":[{"v":[1,2],"m":3}]}"#,
            r#"{"d":3,"n":3,"edges":[{"v":[1,2],"m":0}]}"#,
            r#"{"d":3,"n":3,"edges":[{"v":[1,4],"m":1}]}"#,
            r#"{"d":3,"n":3,"edges":[{"v":[2,1],"m":1}]}"#,
            r#"{"d":3,"n":3,"edges":[{"v":[1,1],"m":1}]}"#,
            r#"{"d":1,"n":3,"edges":[]}"#,
            r#"{"d":3,"n":0,"edges":[]}"#,
            r#"{"d":3,"n":3,"edges":[{"v":[1],"m":1}"#,
            r#"{"d":3,"n":3}"#,
        ];
        for text in cases {
            assert!(
                matches!(MultiHypergraph::parse(text), Err(Error::Parse { .. })),
                "{text}"
            );
        }
        match MultiHypergraph::parse(cases[0]) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "edges[1]"),
            other => panic!("{other:?}"),
        }
        match MultiHypergraph::parse("{\"d\":3,\n\"n\":x}") {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("line 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serialize_is_canonical() {
        let h = MultiHypergraph::from_edges(
            3,
            3,
            [(vec![2, 3], 1), (vec![1], 2), (vec![1, 3], 1), (vec![], 1)],
        )
        .unwrap();
        assert_eq!(
            h.to_json(),
            r#"{"d":3,"n":3,"edges":[{"v":[],"m":1},{"v":[1],"m":2},{"v":[1,3],"m":1},{"v":[2,3],"m":1}]}"#
        );
    }

    #[test]
    fn induced_relabels() {
        let h = MultiHypergraph::from_edges(
            4,
            3,
            [(vec![], 1), (vec![2, 4], 2), (vec![4], 1), (vec![1, 2], 1)],
        )
        .unwrap();
        let b = h.induced(&[2, 4]).unwrap();
        assert_eq!(
            b,
            MultiHypergraph::from_edges(2, 3, [(vec![1, 2], 2), (vec![2], 1)]).unwrap()
        );
    }

    fn arb_hypergraph() -> impl Strategy<Value = MultiHypergraph> {
        (1usize..=5, 2u32..=6, any::<u64>()).prop_map(|(n, d, seed)| {
            MultiHypergraph::random(n, d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn add_edge_is_additive(h in arb_hypergraph(), mask in any::<u64>(), a in -20i64..20, b in -20i64..20) {
            let e = VertexSet::from_mask(mask & ((1u64 << h.n()) - 1));
            let twice = h.add_edge(&e, a).unwrap().add_edge(&e, b).unwrap();
            prop_assert_eq!(twice, h.add_edge(&e, a + b).unwrap());
            prop_assert_eq!(h.add_edge(&e, i64::from(h.d())).unwrap(), h.clone());
        }

        #[test]
        fn json_round_trip(h in arb_hypergraph()) {
            prop_assert_eq!(MultiHypergraph::parse(&h.to_json()).unwrap(), h);
        }

        #[test]
        fn components_commute_with_relabeling(h in arb_hypergraph(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut perm: Vec<usize> = (1..=h.n()).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut inverse = vec![0; h.n()];
            for (i, &p) in perm.iter().enumerate() {
                inverse[p - 1] = i + 1;
            }
            let back = h.relabel(&perm).unwrap().relabel(&inverse).unwrap();
            prop_assert_eq!(back.connected_components(), h.connected_components());

            let mapped: Vec<Vec<usize>> = {
                let mut c: Vec<Vec<usize>> = h.connected_components().into_iter()
                    .map(|c| { let mut c: Vec<usize> = c.into_iter().map(|v| perm[v - 1]).collect(); c.sort(); c })
                    .collect();
                c.sort_by_key(|c| c[0]);
                c
            };
            prop_assert_eq!(h.relabel(&perm).unwrap().connected_components(), mapped);
        }

        #[test]
        fn crossing_iff_component_straddles(h in arb_hypergraph()) {
            let comps = h.connected_components();
            for p in Bipartition::all(h.n()) {
                let straddles = comps.iter().any(|c| {
                    c.iter().any(|&v| p.in_control(v)) && c.iter().any(|&v| !p.in_control(v))
                });
                prop_assert_eq!(!h.crossing_edges(&p).unwrap().is_empty(), straddles);
            }
        }
    }
}
