//! Generalized tree shifts and the Hasse diagram of the shift poset.
//!
//! A shift site is a pair of vertices `u`, `v` whose connecting path has only
//! degree-2 interior vertices. Shifting moves every neighbor of `v` that is
//! off the path over to `u`. When both endpoints are internal vertices the
//! result covers the original tree in the poset; otherwise the shift returns
//! an isomorphic tree.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trees::{enumerate_trees, LabelledTree, TreeCode, TreeError};

pub const MAX_HASSE_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error("invalid shift site: {0}")]
    InvalidSite(String),
    #[error("site {u}-{v} is not a cover shift (an endpoint is a leaf)")]
    NotCover { u: usize, v: usize },
    #[error("order {n} outside the supported range {min}..={max}")]
    OrderOutOfRange { n: usize, min: usize, max: usize },
    #[error("malformed poset: {0}")]
    MalformedPoset(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Endpoints `u` (receiving side) and `v` (donating side) plus the path
/// between them, listed from `u` to `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSite {
    pub u: usize,
    pub v: usize,
    pub path: Vec<usize>,
}

impl ShiftSite {
    /// Builds the site for `u`, `v` in `t`, checking the degree-2 condition.
    pub fn new(t: &LabelledTree, u: usize, v: usize) -> Result<Self, ShiftError> {
        if u >= t.n() || v >= t.n() {
            return Err(ShiftError::InvalidSite(format!("vertex out of range ({u}, {v})")));
        }
        if u == v {
            return Err(ShiftError::InvalidSite(format!("endpoints coincide at {u}")));
        }
        let site = ShiftSite {
            u,
            v,
            path: t.path_between(u, v),
        };
        site.validate(t)?;
        Ok(site)
    }

    pub fn validate(&self, t: &LabelledTree) -> Result<(), ShiftError> {
        let n = t.n();
        if self.u >= n || self.v >= n || self.u == self.v {
            return Err(ShiftError::InvalidSite(format!("bad endpoints ({}, {})", self.u, self.v)));
        }
        if self.path != t.path_between(self.u, self.v) {
            return Err(ShiftError::InvalidSite(format!(
                "{:?} is not the {}-{} path",
                self.path, self.u, self.v
            )));
        }
        if let Some(&w) = self.interior().iter().find(|&&w| t.degree(w) != 2) {
            return Err(ShiftError::InvalidSite(format!(
                "interior vertex {w} has degree {}",
                t.degree(w)
            )));
        }
        Ok(())
    }

    pub fn interior(&self) -> &[usize] {
        &self.path[1..self.path.len() - 1]
    }

    /// The path neighbor of `v`.
    pub fn before_v(&self) -> usize {
        self.path[self.path.len() - 2]
    }
}

/// All shift sites of `t`, one per unordered endpoint pair, with `u < v`.
///
/// Walks outward from every vertex through runs of degree-2 vertices.
pub fn shift_sites(t: &LabelledTree) -> Vec<ShiftSite> {
    let mut sites = Vec::new();
    for u in 0..t.n() {
        for &first in t.neighbors(u) {
            let mut path = vec![u, first];
            loop {
                let cur = *path.last().unwrap();
                if u < cur {
                    sites.push(ShiftSite {
                        u,
                        v: cur,
                        path: path.clone(),
                    });
                }
                if t.degree(cur) != 2 {
                    break;
                }
                let prev = path[path.len() - 2];
                let next = t.neighbors(cur).iter().copied().find(|&w| w != prev).unwrap();
                path.push(next);
            }
        }
    }
    sites.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
    sites
}

/// Moves every neighbor of `s.v` other than its path neighbor onto `s.u`.
/// Vertex labels are preserved.
pub fn apply_shift(t: &LabelledTree, s: &ShiftSite) -> Result<LabelledTree, ShiftError> {
    s.validate(t)?;
    let keep = s.before_v();
    let edges: Vec<(usize, usize)> = t
        .edges()
        .iter()
        .map(|&(a, b)| {
            if a == s.v && b != keep {
                (s.u, b)
            } else if b == s.v && a != keep {
                (a, s.u)
            } else {
                (a, b)
            }
        })
        .collect();
    Ok(LabelledTree::from_edges(t.n(), &edges)?)
}

pub fn is_cover_shift(t: &LabelledTree, s: &ShiftSite) -> bool {
    t.degree(s.u) >= 2 && t.degree(s.v) >= 2
}

/// A subtree together with its distinguished join vertex.
#[derive(Debug, Clone)]
pub struct PinnedTree {
    pub tree: LabelledTree,
    /// Join vertex, in the subtree's own labels.
    pub join: usize,
    /// `vertices[i]` is the host label of subtree vertex `i`.
    pub vertices: Vec<usize>,
}

impl PinnedTree {
    fn induced(host: &LabelledTree, vertices: Vec<usize>, join_host: usize) -> Result<Self, TreeError> {
        let (tree, map) = host.induced(&vertices)?;
        let join = map[join_host].expect("join vertex is part of the subtree");
        Ok(PinnedTree { tree, join, vertices })
    }
}

/// The path subtree and the two components hanging off its endpoints.
#[derive(Debug, Clone)]
pub struct CoverDecomposition {
    /// The shift path, joined at `u`.
    pub path: PinnedTree,
    /// Component of `u` after deleting the path edges, joined at `u`.
    pub h1: PinnedTree,
    /// Component of `v` after deleting the path edges, joined at `v`.
    pub h2: PinnedTree,
}

impl CoverDecomposition {
    pub fn parts(&self) -> [&PinnedTree; 3] {
        [&self.path, &self.h1, &self.h2]
    }
}

pub fn decompose_cover(t1: &LabelledTree, s: &ShiftSite) -> Result<CoverDecomposition, ShiftError> {
    s.validate(t1)?;
    if !is_cover_shift(t1, s) {
        return Err(ShiftError::NotCover { u: s.u, v: s.v });
    }
    let on_path_edge = |a: usize, b: usize| {
        s.path
            .windows(2)
            .any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
    };
    let component = |start: usize| {
        let mut seen = vec![false; t1.n()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut out = vec![start];
        while let Some(x) = queue.pop_front() {
            for &w in t1.neighbors(x) {
                if !seen[w] && !on_path_edge(x, w) {
                    seen[w] = true;
                    out.push(w);
                    queue.push_back(w);
                }
            }
        }
        out.sort_unstable();
        out
    };
    Ok(CoverDecomposition {
        path: PinnedTree::induced(t1, s.path.clone(), s.u)?,
        h1: PinnedTree::induced(t1, component(s.u), s.u)?,
        h2: PinnedTree::induced(t1, component(s.v), s.v)?,
    })
}

/// One edge of the Hasse diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub lower: usize,
    pub upper: usize,
    /// Site on the stored representative of `lower` producing `upper`.
    /// `None` only for edges injected by hand.
    pub witness: Option<ShiftSite>,
}

/// Hasse diagram of the shift poset on `n`-vertex trees.
#[derive(Debug, Clone)]
pub struct HasseDiagram {
    pub n: usize,
    pub nodes: Vec<TreeCode>,
    pub representatives: Vec<LabelledTree>,
    pub covers: Vec<Cover>,
}

#[derive(Serialize, Deserialize)]
struct PosetJson {
    n: usize,
    nodes: Vec<TreeCode>,
    covers: Vec<[usize; 2]>,
}

pub fn build_hasse(n: usize) -> Result<HasseDiagram, ShiftError> {
    if !(2..=MAX_HASSE_ORDER).contains(&n) {
        return Err(ShiftError::OrderOutOfRange {
            n,
            min: 2,
            max: MAX_HASSE_ORDER,
        });
    }
    let nodes = enumerate_trees(n)?;
    let representatives: Vec<LabelledTree> = nodes.iter().map(TreeCode::to_tree).collect();
    let index: BTreeMap<&TreeCode, usize> = nodes.iter().enumerate().map(|(i, c)| (c, i)).collect();

    let mut covers: Vec<Cover> = representatives
        .par_iter()
        .enumerate()
        .flat_map_iter(|(lower, rep)| {
            let mut found: BTreeMap<usize, ShiftSite> = BTreeMap::new();
            for site in shift_sites(rep).into_iter().filter(|s| is_cover_shift(rep, s)) {
                let shifted = apply_shift(rep, &site).expect("enumerated sites are valid");
                let upper = index[&shifted.canonical_code()];
                if upper != lower {
                    found.entry(upper).or_insert(site);
                }
            }
            found.into_iter().map(move |(upper, site)| Cover {
                lower,
                upper,
                witness: Some(site),
            })
        })
        .collect();
    covers.sort_by_key(|c| (c.lower, c.upper));
    Ok(HasseDiagram {
        n,
        nodes,
        representatives,
        covers,
    })
}

impl HasseDiagram {
    pub fn index_of(&self, code: &TreeCode) -> Option<usize> {
        self.nodes.binary_search(code).ok()
    }

    pub fn cover_pairs(&self) -> Vec<(usize, usize)> {
        self.covers.iter().map(|c| (c.lower, c.upper)).collect()
    }

    /// Nodes with no incoming cover.
    pub fn sources(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.covers.iter().any(|c| c.upper == i))
            .collect()
    }

    /// Nodes with no outgoing cover.
    pub fn sinks(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.covers.iter().any(|c| c.lower == i))
            .collect()
    }

    /// True when the cover graph has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let m = self.nodes.len();
        let mut indegree = vec![0usize; m];
        for c in &self.covers {
            indegree[c.upper] += 1;
        }
        let mut stack: Vec<usize> = (0..m).filter(|&i| indegree[i] == 0).collect();
        let mut visited = 0;
        while let Some(i) = stack.pop() {
            visited += 1;
            for c in self.covers.iter().filter(|c| c.lower == i) {
                indegree[c.upper] -= 1;
                if indegree[c.upper] == 0 {
                    stack.push(c.upper);
                }
            }
        }
        visited == m
    }

    /// Adds an unwitnessed edge; used to feed deliberately wrong posets to
    /// the checkers.
    pub fn inject_cover(&mut self, lower: usize, upper: usize) {
        self.covers.push(Cover {
            lower,
            upper,
            witness: None,
        });
        self.covers.sort_by_key(|c| (c.lower, c.upper));
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "digraph gts_{} {{", self.n).unwrap();
        writeln!(out, "  rankdir=BT;").unwrap();
        for (i, code) in self.nodes.iter().enumerate() {
            writeln!(out, "  n{i} [label=\"{code}\"];").unwrap();
        }
        for c in &self.covers {
            writeln!(out, "  n{} -> n{};", c.lower, c.upper).unwrap();
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        let doc = PosetJson {
            n: self.n,
            nodes: self.nodes.clone(),
            covers: self.covers.iter().map(|c| [c.lower, c.upper]).collect(),
        };
        serde_json::to_string(&doc).expect("poset serializes")
    }

    /// Re-ingests [`HasseDiagram::to_json`] output, recomputing witnesses.
    /// Every edge must be realized by a cover shift.
    pub fn from_json(text: &str) -> Result<Self, ShiftError> {
        let doc: PosetJson =
            serde_json::from_str(text).map_err(|e| ShiftError::MalformedPoset(e.to_string()))?;
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for code in &doc.nodes {
            let code = TreeCode::from_levels(code.levels().to_vec())?;
            if code.order() != doc.n {
                return Err(ShiftError::MalformedPoset(format!("node {code} has wrong order")));
            }
            nodes.push(code);
        }
        let representatives: Vec<LabelledTree> = nodes.iter().map(TreeCode::to_tree).collect();
        let mut covers = Vec::with_capacity(doc.covers.len());
        for [lower, upper] in doc.covers {
            if lower >= nodes.len() || upper >= nodes.len() {
                return Err(ShiftError::MalformedPoset(format!("edge {lower}->{upper} out of range")));
            }
            let rep = &representatives[lower];
            let target = nodes[upper].canonicalize();
            let witness = shift_sites(rep)
                .into_iter()
                .filter(|s| is_cover_shift(rep, s))
                .find(|s| apply_shift(rep, s).map(|t| t.canonical_code() == target).unwrap_or(false))
                .ok_or_else(|| ShiftError::MalformedPoset(format!("edge {lower}->{upper} is not a cover shift")))?;
            covers.push(Cover {
                lower,
                upper,
                witness: Some(witness),
            });
        }
        Ok(HasseDiagram {
            n: doc.n,
            nodes,
            representatives,
            covers,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(sites: &[ShiftSite]) -> Vec<(usize, usize)> {
        sites.iter().map(|s| (s.u, s.v)).collect()
    }

    /// Independent scan: every unordered pair, BFS path, interior degrees.
    fn brute_force_sites(t: &LabelledTree) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..t.n() {
            for v in u + 1..t.n() {
                let dist = t.distances_from(u);
                let mut path = vec![v];
                let mut cur = v;
                while cur != u {
                    cur = *t.neighbors(cur).iter().find(|&&w| dist[w] + 1 == dist[cur]).unwrap();
                    path.push(cur);
                }
                if path[1..path.len() - 1].iter().all(|&w| t.degree(w) == 2) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    #[test]
    fn path_sites_include_everything() {
        let p4 = LabelledTree::path(4).unwrap();
        let sites = shift_sites(&p4);
        assert_eq!(pairs(&sites), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let full = sites.iter().find(|s| (s.u, s.v) == (0, 3)).unwrap();
        assert_eq!(full.path, vec![0, 1, 2, 3]);
    }

    #[test]
    fn star_sites_are_center_leaf_edges() {
        let s5 = LabelledTree::star(5).unwrap();
        assert_eq!(pairs(&shift_sites(&s5)), vec![(0, 1), (0, 2), (0, 3), (0, 4)]);
    }

    #[test]
    fn spider_sites_match_brute_force() {
        // legs of length 2, 1, 1 around center 0
        let spider = LabelledTree::from_edges(5, &[(0, 1), (1, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(pairs(&shift_sites(&spider)), brute_force_sites(&spider));
        for code in enumerate_trees(8).unwrap() {
            let t = code.to_tree();
            assert_eq!(pairs(&shift_sites(&t)), brute_force_sites(&t), "tree {code}");
        }
    }

    #[test]
    fn leaf_endpoint_shift_is_isomorphism() {
        for code in enumerate_trees(7).unwrap() {
            let t = code.to_tree();
            for s in shift_sites(&t) {
                let shifted = apply_shift(&t, &s).unwrap();
                assert_eq!(shifted.n(), t.n());
                if t.is_leaf(s.u) || t.is_leaf(s.v) {
                    assert!(!is_cover_shift(&t, &s));
                    assert!(shifted.is_isomorphic(&t));
                } else {
                    assert!(is_cover_shift(&t, &s));
                    assert_eq!(shifted.leaf_count(), t.leaf_count() + 1);
                }
            }
        }
    }

    #[test]
    fn full_path_shift_returns_path() {
        let p = LabelledTree::path(6).unwrap();
        let s = ShiftSite::new(&p, 0, 5).unwrap();
        assert!(apply_shift(&p, &s).unwrap().is_isomorphic(&p));
        let inner = ShiftSite::new(&p, 1, 4).unwrap();
        assert!(is_cover_shift(&p, &inner));
    }

    #[test]
    fn invalid_sites_are_rejected() {
        let s5 = LabelledTree::star(5).unwrap();
        assert!(ShiftSite::new(&s5, 1, 2).is_err());
        assert!(ShiftSite::new(&s5, 1, 1).is_err());
        assert!(ShiftSite::new(&s5, 1, 9).is_err());
        let forged = ShiftSite { u: 1, v: 2, path: vec![1, 2] };
        assert!(apply_shift(&s5, &forged).is_err());
    }

    #[test]
    fn hasse_small_orders() {
        let h2 = build_hasse(2).unwrap();
        assert_eq!(h2.nodes.len(), 1);
        assert!(h2.covers.is_empty());

        let h4 = build_hasse(4).unwrap();
        assert_eq!(h4.nodes.len(), 2);
        let p4 = h4.index_of(&LabelledTree::path(4).unwrap().canonical_code()).unwrap();
        let s4 = h4.index_of(&LabelledTree::star(4).unwrap().canonical_code()).unwrap();
        assert_eq!(h4.cover_pairs(), vec![(p4, s4)]);

        let h6 = build_hasse(6).unwrap();
        assert_eq!(h6.nodes.len(), 6);
        let p6 = h6.index_of(&LabelledTree::path(6).unwrap().canonical_code()).unwrap();
        let s6 = h6.index_of(&LabelledTree::star(6).unwrap().canonical_code()).unwrap();
        assert_eq!(h6.sources(), vec![p6]);
        assert_eq!(h6.sinks(), vec![s6]);
        assert!(h6.is_acyclic());

        assert!(build_hasse(1).is_err());
        assert!(build_hasse(13).is_err());
    }

    #[test]
    fn decomposition_sizes_and_parity() {
        for n in 4..=8 {
            let h = build_hasse(n).unwrap();
            for c in &h.covers {
                let rep = &h.representatives[c.lower];
                let d = decompose_cover(rep, c.witness.as_ref().unwrap()).unwrap();
                let sizes: Vec<usize> = d.parts().iter().map(|p| p.tree.n()).collect();
                assert_eq!(sizes.iter().sum::<usize>(), n + 2);
                let odd = sizes.iter().filter(|&&s| s % 2 == 1).count();
                if n % 2 == 0 {
                    assert!(odd == 0 || odd == 2, "n={n} sizes={sizes:?}");
                } else {
                    assert!(odd == 1 || odd == 3, "n={n} sizes={sizes:?}");
                }
            }
        }
    }

    #[test]
    fn decomposition_of_spider() {
        // X = {5, 6} hangs off u = 0; Y = {7} hangs off v = 3; path 0-1-2-3
        let t = LabelledTree::from_edges(8, &[(0, 1), (1, 2), (2, 3), (0, 5), (0, 6), (3, 7), (6, 4)]).unwrap();
        let s = ShiftSite::new(&t, 0, 3).unwrap();
        let d = decompose_cover(&t, &s).unwrap();
        assert_eq!(d.path.vertices, vec![0, 1, 2, 3]);
        assert_eq!(d.h1.vertices, vec![0, 4, 5, 6]);
        assert_eq!(d.h2.vertices, vec![3, 7]);
        assert_eq!(d.h1.vertices[d.h1.join], 0);
        assert_eq!(d.h2.vertices[d.h2.join], 3);
        assert_eq!(d.path.join, 0);

        let leafy = ShiftSite::new(&t, 7, 3).unwrap();
        assert!(matches!(decompose_cover(&t, &leafy), Err(ShiftError::NotCover { .. })));
    }

    #[test]
    fn json_round_trip_and_dot() {
        let h = build_hasse(7).unwrap();
        let back = HasseDiagram::from_json(&h.to_json()).unwrap();
        assert_eq!(back.nodes, h.nodes);
        assert_eq!(back.covers, h.covers);
        let dot = h.to_dot();
        assert!(dot.starts_with("digraph gts_7 {"));
        assert_eq!(dot.matches("->").count(), h.covers.len());

        let mut bad = h.clone();
        let (p, s) = (h.sources()[0], h.sinks()[0]);
        bad.inject_cover(s, p);
        assert!(HasseDiagram::from_json(&bad.to_json()).is_err());
    }
}
