//! Labelled trees, canonical level-sequence codes, and enumeration of
//! unlabelled trees.
//!
//! A [`TreeCode`] is the level sequence of a tree rooted at its center, with
//! the children of every vertex ordered by descending subtree code. For a
//! bicentral tree both centers are tried and the smaller code is kept. Two
//! labelled trees receive the same code exactly when they are isomorphic.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest order accepted by [`enumerate_trees`].
pub const MAX_ENUMERATION_ORDER: usize = 16;
/// Largest order accepted by [`prufer_oracle`].
pub const MAX_ORACLE_ORDER: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("a tree needs at least one vertex")]
    Empty,
    #[error("a tree on {n} vertices needs {expected} edges, got {got}")]
    EdgeCount { n: usize, expected: usize, got: usize },
    #[error("vertex {vertex} out of range for a tree on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("edge set is not connected")]
    Disconnected,
    #[error("vertex {0} is not a leaf")]
    NotALeaf(usize),
    #[error("order {n} outside the supported range {min}..={max}")]
    OrderOutOfRange { n: usize, min: usize, max: usize },
    #[error("invalid level sequence: {0}")]
    InvalidCode(String),
}

/// An undirected tree on the vertices `0..n`.
///
/// Edges are stored as `(min, max)` pairs in insertion order; that order is
/// what an [`Orientation`](crate::matrices::Orientation) indexes into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledTree {
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl LabelledTree {
    /// Builds a tree after checking that `edges` span a tree on `0..n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if edges.len() != n - 1 {
            return Err(TreeError::EdgeCount {
                n,
                expected: n - 1,
                got: edges.len(),
            });
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(TreeError::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(TreeError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(TreeError::DuplicateEdge(e.0, e.1));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            normalized.push(e);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let tree = LabelledTree {
            edges: normalized,
            adjacency,
        };
        if tree.distances_from(0).iter().any(|&d| d == usize::MAX) {
            return Err(TreeError::Disconnected);
        }
        Ok(tree)
    }

    pub fn single_vertex() -> Self {
        LabelledTree {
            edges: Vec::new(),
            adjacency: vec![Vec::new()],
        }
    }

    /// The path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self, TreeError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    /// The star with center `0`.
    pub fn star(n: usize) -> Result<Self, TreeError> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::from_edges(n, &edges)
    }

    /// Decodes a Prüfer sequence over `0..n` (length `n - 2`).
    pub fn from_prufer(n: usize, sequence: &[usize]) -> Result<Self, TreeError> {
        if n < 2 {
            return Err(TreeError::OrderOutOfRange { n, min: 2, max: usize::MAX });
        }
        if sequence.len() != n - 2 {
            return Err(TreeError::EdgeCount {
                n,
                expected: n - 1,
                got: sequence.len() + 1,
            });
        }
        let mut degree = vec![1usize; n];
        for &s in sequence {
            if s >= n {
                return Err(TreeError::VertexOutOfRange { vertex: s, n });
            }
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &s in sequence {
            let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always remains");
            edges.push((leaf, s));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        Self::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.degree(v) == 1
    }

    pub fn are_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn leaf_count(&self) -> usize {
        (0..self.n()).filter(|&v| self.is_leaf(v)).count()
    }

    /// BFS distances from `source`; unreachable vertices get `usize::MAX`.
    pub fn distances_from(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// The unique path from `from` to `to`, endpoints included.
    pub fn path_between(&self, from: usize, to: usize) -> Vec<usize> {
        let mut parent = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::from([from]);
        parent[from] = from;
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &w in &self.adjacency[u] {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// The one or two central vertices (minimum eccentricity).
    pub fn centers(&self) -> Vec<usize> {
        let n = self.n();
        if n <= 2 {
            return (0..n).collect();
        }
        let mut degree: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        let mut remaining = n;
        while remaining > 2 {
            remaining -= layer.len();
            let mut next = Vec::new();
            for &leaf in &layer {
                for &w in &self.adjacency[leaf] {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
            layer = next;
        }
        layer.sort_unstable();
        layer
    }

    /// Applies `perm` (old label to new label) to every vertex.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, TreeError> {
        let edges: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Self::from_edges(self.n(), &edges)
    }

    /// Subtree induced on `vertices`, relabelled `0..k` in the given order.
    /// Returns the old-to-new map alongside.
    pub fn induced(&self, vertices: &[usize]) -> Result<(Self, Vec<Option<usize>>), TreeError> {
        let mut map = vec![None; self.n()];
        for (new, &old) in vertices.iter().enumerate() {
            if old >= self.n() {
                return Err(TreeError::VertexOutOfRange { vertex: old, n: self.n() });
            }
            map[old] = Some(new);
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((map[a]?, map[b]?)))
            .collect();
        Ok((Self::from_edges(vertices.len(), &edges)?, map))
    }

    pub fn canonical_code(&self) -> TreeCode {
        self.centers()
            .into_iter()
            .map(|c| {
                let mut code = Vec::with_capacity(self.n());
                self.rooted_code(c, usize::MAX, 0, &mut code);
                code
            })
            .min()
            .map(TreeCode)
            .expect("a tree has at least one center")
    }

    fn rooted_code(&self, v: usize, parent: usize, depth: u32, out: &mut Vec<u32>) {
        out.push(depth);
        let mut children: Vec<Vec<u32>> = self.adjacency[v]
            .iter()
            .filter(|&&w| w != parent)
            .map(|&w| {
                let mut sub = Vec::new();
                self.rooted_code(w, v, depth + 1, &mut sub);
                sub
            })
            .collect();
        children.sort_unstable_by(|a, b| b.cmp(a));
        for child in children {
            out.extend(child);
        }
    }

    pub fn is_isomorphic(&self, other: &LabelledTree) -> bool {
        self.n() == other.n() && self.canonical_code() == other.canonical_code()
    }
}

/// Canonical isomorphism-class key: a center-rooted level sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TreeCode(Vec<u32>);

impl TreeCode {
    /// Wraps a level sequence after checking it describes a rooted tree.
    /// The result is not necessarily canonical; see [`TreeCode::canonicalize`].
    pub fn from_levels(levels: Vec<u32>) -> Result<Self, TreeError> {
        match levels.first() {
            None => return Err(TreeError::InvalidCode("empty sequence".into())),
            Some(&0) => {}
            Some(_) => return Err(TreeError::InvalidCode("first level must be 0".into())),
        }
        for (i, w) in levels.windows(2).enumerate() {
            if w[1] == 0 || w[1] > w[0] + 1 {
                return Err(TreeError::InvalidCode(format!(
                    "level {} at position {} cannot follow {}",
                    w[1],
                    i + 1,
                    w[0]
                )));
            }
        }
        Ok(TreeCode(levels))
    }

    pub fn levels(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Rebuilds a labelled tree: vertex `i` is the `i`-th entry, its parent
    /// the closest earlier entry one level up.
    pub fn to_tree(&self) -> LabelledTree {
        let mut edges = Vec::with_capacity(self.0.len().saturating_sub(1));
        let mut last_at_level: Vec<usize> = Vec::new();
        for (i, &level) in self.0.iter().enumerate() {
            let level = level as usize;
            if level > 0 {
                edges.push((last_at_level[level - 1], i));
            }
            last_at_level.truncate(level);
            last_at_level.push(i);
        }
        LabelledTree::from_edges(self.0.len(), &edges).expect("validated level sequence")
    }

    pub fn canonicalize(&self) -> TreeCode {
        self.to_tree().canonical_code()
    }
}

impl fmt::Display for TreeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for TreeCode {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let levels = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| TreeError::InvalidCode(format!("bad entry {p:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        TreeCode::from_levels(levels)
    }
}

/// Result of removing a leaf: the smaller tree plus label bookkeeping.
#[derive(Debug, Clone)]
pub struct LeafDeletion {
    pub tree: LabelledTree,
    /// `old_to_new[v]` is the label of old vertex `v`, `None` for the leaf.
    pub old_to_new: Vec<Option<usize>>,
    /// New label of the deleted leaf's neighbor.
    pub neighbor: usize,
}

pub fn delete_leaf(t: &LabelledTree, leaf: usize) -> Result<LeafDeletion, TreeError> {
    if leaf >= t.n() {
        return Err(TreeError::VertexOutOfRange { vertex: leaf, n: t.n() });
    }
    if !t.is_leaf(leaf) {
        return Err(TreeError::NotALeaf(leaf));
    }
    let keep: Vec<usize> = (0..t.n()).filter(|&v| v != leaf).collect();
    let (tree, old_to_new) = t.induced(&keep)?;
    let neighbor = old_to_new[t.neighbors(leaf)[0]].expect("neighbor survives");
    Ok(LeafDeletion {
        tree,
        old_to_new,
        neighbor,
    })
}

fn check_order(n: usize, min: usize, max: usize) -> Result<(), TreeError> {
    if n < min || n > max {
        Err(TreeError::OrderOutOfRange { n, min, max })
    } else {
        Ok(())
    }
}

/// Every unlabelled tree on `n` vertices, once each, in sorted code order.
///
/// Grows trees one leaf at a time and deduplicates by canonical code.
pub fn enumerate_trees(n: usize) -> Result<Vec<TreeCode>, TreeError> {
    check_order(n, 1, MAX_ENUMERATION_ORDER)?;
    let mut current: BTreeSet<TreeCode> = BTreeSet::from([LabelledTree::single_vertex().canonical_code()]);
    for size in 2..=n {
        let parents: Vec<TreeCode> = current.into_iter().collect();
        current = parents
            .par_iter()
            .flat_map_iter(|code| {
                let tree = code.to_tree();
                (0..size - 1).map(move |v| {
                    let mut edges = tree.edges().to_vec();
                    edges.push((v, size - 1));
                    LabelledTree::from_edges(size, &edges)
                        .expect("adding a leaf keeps a tree")
                        .canonical_code()
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
    }
    Ok(current.into_iter().collect())
}

/// Independent enumeration: decode all `n^(n-2)` Prüfer sequences and keep
/// the distinct canonical codes.
pub fn prufer_oracle(n: usize) -> Result<Vec<TreeCode>, TreeError> {
    check_order(n, 2, MAX_ORACLE_ORDER)?;
    if n == 2 {
        return Ok(vec![LabelledTree::path(2)?.canonical_code()]);
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let codes: BTreeSet<TreeCode> = (0..n)
        .into_par_iter()
        .flat_map_iter(|first| {
            let block = total / n;
            (0..block).map(move |rest| {
                let mut seq = vec![first; len];
                let mut r = rest;
                for slot in seq.iter_mut().skip(1) {
                    *slot = r % n;
                    r /= n;
                }
                LabelledTree::from_prufer(n, &seq)
                    .expect("every Prüfer sequence decodes")
                    .canonical_code()
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(codes.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> TreeCode {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_malformed_edge_sets() {
        assert_eq!(LabelledTree::from_edges(0, &[]), Err(TreeError::Empty));
        assert!(matches!(
            LabelledTree::from_edges(3, &[(0, 1)]),
            Err(TreeError::EdgeCount { .. })
        ));
        assert_eq!(
            LabelledTree::from_edges(3, &[(0, 1), (1, 1)]),
            Err(TreeError::SelfLoop(1))
        );
        assert_eq!(
            LabelledTree::from_edges(3, &[(0, 1), (1, 0)]),
            Err(TreeError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            LabelledTree::from_edges(4, &[(0, 1), (1, 2), (2, 0)]),
            Err(TreeError::Disconnected)
        );
        assert!(matches!(
            LabelledTree::from_edges(2, &[(0, 2)]),
            Err(TreeError::VertexOutOfRange { vertex: 2, .. })
        ));
    }

    #[test]
    fn path_code_is_relabelling_invariant() {
        let a = LabelledTree::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let b = LabelledTree::from_edges(3, &[(2, 0), (0, 1)]).unwrap();
        assert_eq!(a.canonical_code(), b.canonical_code());
        assert_eq!(a.canonical_code(), code("0,1,1"));
    }

    #[test]
    fn star_code_ignores_center_label() {
        let s0 = LabelledTree::star(4).unwrap();
        let s3 = LabelledTree::from_edges(4, &[(3, 0), (3, 1), (3, 2)]).unwrap();
        assert_eq!(s0.canonical_code(), s3.canonical_code());
        assert_eq!(s0.canonical_code(), code("0,1,1,1"));
    }

    #[test]
    fn four_vertex_prufer_sequences_give_two_codes() {
        let mut codes = BTreeSet::new();
        for a in 0..4 {
            for b in 0..4 {
                codes.insert(LabelledTree::from_prufer(4, &[a, b]).unwrap().canonical_code());
            }
        }
        assert_eq!(codes.len(), 2);
        assert!(codes.contains(&LabelledTree::path(4).unwrap().canonical_code()));
        assert!(codes.contains(&LabelledTree::star(4).unwrap().canonical_code()));
    }

    #[test]
    fn centers_of_paths_and_stars() {
        assert_eq!(LabelledTree::path(5).unwrap().centers(), vec![2]);
        assert_eq!(LabelledTree::path(6).unwrap().centers(), vec![2, 3]);
        assert_eq!(LabelledTree::star(6).unwrap().centers(), vec![0]);
        assert_eq!(LabelledTree::single_vertex().centers(), vec![0]);
    }

    #[test]
    fn level_sequence_validation() {
        assert!("0,1,2,2,1,1".parse::<TreeCode>().is_ok());
        assert!("1,2".parse::<TreeCode>().is_err());
        assert!("0,2".parse::<TreeCode>().is_err());
        assert!("0,1,0".parse::<TreeCode>().is_err());
        assert!("0,x".parse::<TreeCode>().is_err());
        assert!("".parse::<TreeCode>().is_err());
        assert_eq!(code("0,1,2,2,1,1").to_string(), "0,1,2,2,1,1");
    }

    #[test]
    fn decode_round_trips_to_isomorphic_tree() {
        let t = LabelledTree::from_edges(6, &[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)]).unwrap();
        let c = t.canonical_code();
        assert_eq!(c.to_tree().canonical_code(), c);
        assert_eq!(code("0,1,1,2").canonicalize(), LabelledTree::path(4).unwrap().canonical_code());
    }

    #[test]
    fn small_enumeration_counts() {
        assert_eq!(enumerate_trees(1).unwrap().len(), 1);
        assert_eq!(enumerate_trees(1).unwrap()[0].to_string(), "0");
        assert_eq!(enumerate_trees(6).unwrap().len(), 6);
        assert_eq!(prufer_oracle(2).unwrap().len(), 1);
        assert_eq!(prufer_oracle(4).unwrap().len(), 2);
        assert_eq!(prufer_oracle(7).unwrap().len(), 11);
    }

    #[test]
    fn order_bounds() {
        assert!(enumerate_trees(0).is_err());
        assert!(enumerate_trees(17).is_err());
        assert!(prufer_oracle(1).is_err());
        assert!(prufer_oracle(10).is_err());
    }

    #[test]
    fn delete_leaf_cases() {
        let p3 = LabelledTree::path(3).unwrap();
        let d = delete_leaf(&p3, 0).unwrap();
        assert_eq!(d.tree.canonical_code(), LabelledTree::path(2).unwrap().canonical_code());
        assert_eq!(d.old_to_new, vec![None, Some(0), Some(1)]);
        assert_eq!(d.neighbor, 0);
        assert_eq!(delete_leaf(&p3, 1).unwrap_err(), TreeError::NotALeaf(1));

        let s5 = LabelledTree::star(5).unwrap();
        for leaf in 1..5 {
            let d = delete_leaf(&s5, leaf).unwrap();
            assert_eq!(d.tree.canonical_code(), LabelledTree::star(4).unwrap().canonical_code());
            assert_eq!(d.neighbor, 0);
        }

        // caterpillar: spine 0-1-2 with pendant 3 on 1 and tail 4 on 2
        let cat = LabelledTree::from_edges(5, &[(0, 1), (1, 2), (1, 3), (2, 4)]).unwrap();
        let d = delete_leaf(&cat, 4).unwrap();
        let expected = LabelledTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        assert_eq!(d.tree.canonical_code(), expected.canonical_code());
        assert_eq!(d.tree.canonical_code(), LabelledTree::star(4).unwrap().canonical_code());
        assert_eq!(d.neighbor, 2);
    }

    #[test]
    fn path_between_and_distances() {
        let t = LabelledTree::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(t.path_between(0, 4), vec![0, 1, 3, 4]);
        assert_eq!(t.path_between(2, 2), vec![2]);
        assert_eq!(t.distances_from(2), vec![2, 1, 0, 2, 3]);
    }
}
