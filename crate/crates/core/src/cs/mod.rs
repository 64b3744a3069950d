//! Candidate spaces: which data vertices can play which query vertex.
//!
//! A candidate space for query `q` in data graph `g` keeps
//!
//! * a candidate set `C(u)` per query vertex `u`, and
//! * for every query edge `(u, u')` and every `v ∈ C(u)`, the candidate
//!   neighbors `C(u'|u,v)`: the data vertices `v'` adjacent to `v` that can
//!   play `u'` when `v` plays `u`.
//!
//! Storage is symmetric — `v' ∈ C(u'|u,v)` iff `v ∈ C(u|u',v')` — and the
//! per-edge pair counts `|E(u,u')|` are maintained incrementally so edge
//! densities are O(1) to read. The completeness contract every construction
//! and pruning step preserves: if `M` is an embedding of `q`, then
//! `M(u) ∈ C(u)` for all `u` and `M(u') ∈ C(u'|u,M(u))` for all edges.
//!
//! The initial space admits `v` into `C(u)` when labels match and `v` has at
//! least as many neighbors of every label as `u` does; candidate neighbors
//! start as all data edges between candidate sets. Refinement
//! ([`refine::refine_candidate_space`]) then shrinks both.

pub mod bipartite;
pub mod refine;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::{LabeledGraph, VertexId};
use crate::util::{contains_sorted, intersect_sorted};

/// Reason a stage concluded the embedding count is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroReason {
    /// `C(u)` became empty for this query vertex.
    EmptyCandidateSet(VertexId),
    /// A query edge (by index) has no candidate pairs left.
    EmptyCandidateEdges(u32),
}

impl std::fmt::Display for ZeroReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ZeroReason::EmptyCandidateSet(u) => {
                write!(f, "query vertex {u} has no candidates")
            }
            ZeroReason::EmptyCandidateEdges(e) => {
                write!(f, "query edge {e} has no candidate pairs")
            }
        }
    }
}

/// Candidate sets plus symmetric per-edge candidate-neighbor lists.
#[derive(Debug, Clone)]
pub struct CandidateSpace {
    /// Query edges in canonical `(a, b)` form with `a < b`; the index in this
    /// vector is the edge id used everywhere else.
    query_edges: Vec<(VertexId, VertexId)>,
    /// Per query vertex: `(neighbor, edge id)` sorted by neighbor.
    query_adj: Vec<Vec<(VertexId, u32)>>,
    /// Per query vertex: sorted candidate list `C(u)`.
    candidates: Vec<Vec<VertexId>>,
    /// Per edge, per endpoint side: `v -> C(other|this,v)` with sorted lists.
    /// Side 0 is keyed by candidates of the smaller endpoint.
    lists: Vec<[BTreeMap<VertexId, Vec<VertexId>>; 2]>,
    /// Per edge: current number of candidate pairs `|E(u,u')|`.
    edge_counts: Vec<usize>,
}

impl CandidateSpace {
    pub fn query_vertex_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn query_edge_count(&self) -> usize {
        self.query_edges.len()
    }

    /// Canonical `(a, b)` endpoints of a query edge id.
    pub fn query_edge(&self, e: u32) -> (VertexId, VertexId) {
        self.query_edges[e as usize]
    }

    pub fn query_edges(&self) -> &[(VertexId, VertexId)] {
        &self.query_edges
    }

    /// Query neighbors of `u` as `(neighbor, edge id)`, sorted by neighbor.
    pub fn query_neighbors(&self, u: VertexId) -> &[(VertexId, u32)] {
        &self.query_adj[u as usize]
    }

    pub fn query_degree(&self, u: VertexId) -> usize {
        self.query_adj[u as usize].len()
    }

    /// Edge id joining `u` and `u2`, if the query has that edge.
    pub fn edge_id(&self, u: VertexId, u2: VertexId) -> Option<u32> {
        let adj = &self.query_adj[u as usize];
        adj.binary_search_by_key(&u2, |&(n, _)| n).ok().map(|i| adj[i].1)
    }

    /// Sorted candidate set `C(u)`.
    pub fn candidates(&self, u: VertexId) -> &[VertexId] {
        &self.candidates[u as usize]
    }

    pub fn candidate_count(&self, u: VertexId) -> usize {
        self.candidates[u as usize].len()
    }

    /// Position of `v` within the sorted `C(u)`.
    pub fn candidate_position(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.candidates[u as usize].binary_search(&v).ok()
    }

    /// Number of candidate pairs on edge `e`.
    pub fn edge_pair_count(&self, e: u32) -> usize {
        self.edge_counts[e as usize]
    }

    /// Density numerator/denominator for edge `e`:
    /// `|E(a,b)| / (|C(a)|·|C(b)|)`, kept as integers for exact comparison.
    pub fn density(&self, e: u32) -> (u64, u64) {
        let (a, b) = self.query_edges[e as usize];
        let den = self.candidate_count(a) as u64 * self.candidate_count(b) as u64;
        (self.edge_counts[e as usize] as u64, den)
    }

    fn side(&self, e: u32, u: VertexId) -> usize {
        if self.query_edges[e as usize].0 == u {
            0
        } else {
            debug_assert_eq!(self.query_edges[e as usize].1, u);
            1
        }
    }

    /// Candidate neighbors `C(u2|u,v)` for the query edge joining `u` and
    /// `u2`. Empty when `v` has none (or was removed).
    pub fn candidate_neighbors(&self, e: u32, u: VertexId, v: VertexId) -> &[VertexId] {
        self.lists[e as usize][self.side(e, u)].get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// True iff `v2 ∈ C(u2|u,v)` (equivalently `(v, v2)` is a candidate pair
    /// of the query edge `(u, u2)`).
    pub fn has_candidate_pair(&self, u: VertexId, v: VertexId, u2: VertexId, v2: VertexId) -> bool {
        match self.edge_id(u, u2) {
            Some(e) => contains_sorted(self.candidate_neighbors(e, u, v), v2),
            None => false,
        }
    }

    /// Removes the candidate pair `(v@u, v2@u2)` from edge `e`, maintaining
    /// symmetry and counts. No-op if the pair is absent.
    pub fn remove_candidate_pair(&mut self, e: u32, u: VertexId, v: VertexId, v2: VertexId) {
        let side = self.side(e, u);
        let maps = &mut self.lists[e as usize];
        let mut removed = false;
        if let Some(list) = maps[side].get_mut(&v) {
            if let Ok(i) = list.binary_search(&v2) {
                list.remove(i);
                removed = true;
                if list.is_empty() {
                    maps[side].remove(&v);
                }
            }
        }
        if !removed {
            return;
        }
        let list = maps[1 - side].get_mut(&v2).expect("symmetric entry present");
        let i = list.binary_search(&v).expect("symmetric entry present");
        list.remove(i);
        if list.is_empty() {
            maps[1 - side].remove(&v2);
        }
        self.edge_counts[e as usize] -= 1;
    }

    /// Removes `v` from `C(u)` together with all its candidate pairs on every
    /// incident query edge (symmetrically).
    pub fn remove_candidate(&mut self, u: VertexId, v: VertexId) {
        let adj = self.query_adj[u as usize].clone();
        for (_, e) in adj {
            let side = self.side(e, u);
            let maps = &mut self.lists[e as usize];
            if let Some(list) = maps[side].remove(&v) {
                for v2 in &list {
                    let other = maps[1 - side].get_mut(v2).expect("symmetric entry present");
                    let i = other.binary_search(&v).expect("symmetric entry present");
                    other.remove(i);
                    if other.is_empty() {
                        maps[1 - side].remove(v2);
                    }
                }
                self.edge_counts[e as usize] -= list.len();
            }
        }
        if let Ok(i) = self.candidates[u as usize].binary_search(&v) {
            self.candidates[u as usize].remove(i);
        }
    }

    /// Builds a space from explicit parts; intended for tests and tools that
    /// need full control over the structure. `pairs_per_edge[i]` lists the
    /// candidate pairs `(x, y)` of `query_edges[i]` with `x` on the side of
    /// the edge's first endpoint as written. Panics on inconsistent input.
    pub fn from_parts(
        query_vertex_count: usize,
        query_edges: &[(VertexId, VertexId)],
        mut candidates: Vec<Vec<VertexId>>,
        pairs_per_edge: &[Vec<(VertexId, VertexId)>],
    ) -> CandidateSpace {
        assert_eq!(candidates.len(), query_vertex_count);
        assert_eq!(pairs_per_edge.len(), query_edges.len());
        for list in &mut candidates {
            list.sort_unstable();
            list.dedup();
        }
        let mut canonical = Vec::with_capacity(query_edges.len());
        let mut lists = Vec::with_capacity(query_edges.len());
        let mut edge_counts = Vec::with_capacity(query_edges.len());
        for (&(a, b), pairs) in query_edges.iter().zip(pairs_per_edge) {
            assert_ne!(a, b, "query self-loop");
            let swap = a > b;
            let (a, b) = if swap { (b, a) } else { (a, b) };
            canonical.push((a, b));
            let mut side0: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
            let mut side1: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
            for &(x, y) in pairs {
                let (x, y) = if swap { (y, x) } else { (x, y) };
                assert!(contains_sorted(&candidates[a as usize], x), "pair endpoint not a candidate");
                assert!(contains_sorted(&candidates[b as usize], y), "pair endpoint not a candidate");
                side0.entry(x).or_default().push(y);
                side1.entry(y).or_default().push(x);
            }
            let mut count = 0;
            for list in side0.values_mut().chain(side1.values_mut()) {
                list.sort_unstable();
                list.dedup();
            }
            for list in side0.values() {
                count += list.len();
            }
            lists.push([side0, side1]);
            edge_counts.push(count);
        }
        let query_adj = build_query_adj(query_vertex_count, &canonical);
        let cs = CandidateSpace { query_edges: canonical, query_adj, candidates, lists, edge_counts };
        cs.debug_validate();
        cs
    }

    /// Full structural consistency check (sortedness, symmetry, counts);
    /// panics on violation. Used by tests and `from_parts`.
    #[doc(hidden)]
    pub fn debug_validate(&self) {
        for (u, list) in self.candidates.iter().enumerate() {
            assert!(list.windows(2).all(|w| w[0] < w[1]), "C({u}) not strictly sorted");
        }
        for (e, maps) in self.lists.iter().enumerate() {
            let (a, b) = self.query_edges[e];
            let mut count = 0;
            for (side, (this, other)) in [(a, b), (b, a)].into_iter().enumerate() {
                for (&v, list) in &maps[side] {
                    assert!(
                        contains_sorted(&self.candidates[this as usize], v),
                        "list key {v} not in C({this})"
                    );
                    assert!(!list.is_empty(), "empty list kept for {v}");
                    assert!(list.windows(2).all(|w| w[0] < w[1]), "list not strictly sorted");
                    for &v2 in list {
                        assert!(
                            contains_sorted(&self.candidates[other as usize], v2),
                            "list member {v2} not in C({other})"
                        );
                        let mirror = maps[1 - side].get(&v2).map(Vec::as_slice).unwrap_or(&[]);
                        assert!(contains_sorted(mirror, v), "asymmetric pair ({v},{v2}) on edge {e}");
                    }
                    if side == 0 {
                        count += list.len();
                    }
                }
            }
            assert_eq!(count, self.edge_counts[e], "stale pair count on edge {e}");
        }
    }

    /// Text dump of the whole space, for golden tests and `inspect`:
    /// one `C(u)` line per query vertex, then one `C(u'|u,v)` line per
    /// directed query edge and kept key, in deterministic order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (u, list) in self.candidates.iter().enumerate() {
            let _ = write!(out, "C(u{u}):");
            for v in list {
                let _ = write!(out, " v{v}");
            }
            out.push('\n');
        }
        for (e, maps) in self.lists.iter().enumerate() {
            let (a, b) = self.query_edges[e];
            for (side, (from, to)) in [(a, b), (b, a)].into_iter().enumerate() {
                for (v, list) in &maps[side] {
                    let _ = write!(out, "C(u{to}|u{from},v{v}):");
                    for v2 in list {
                        let _ = write!(out, " v{v2}");
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

fn build_query_adj(n: usize, edges: &[(VertexId, VertexId)]) -> Vec<Vec<(VertexId, u32)>> {
    let mut adj: Vec<Vec<(VertexId, u32)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a as usize].push((b, e as u32));
        adj[b as usize].push((a, e as u32));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Builds the initial candidate space: `v ∈ C(u)` iff labels match and `v`
/// has at least as many neighbors of each label as `u`; candidate neighbors
/// are all data edges between candidate sets. Errors with the offending query
/// vertex as soon as some `C(u)` comes out empty.
pub fn build_initial_cs(q: &LabeledGraph, g: &LabeledGraph) -> Result<CandidateSpace, ZeroReason> {
    let nq = q.vertex_count();
    let mut candidates: Vec<Vec<VertexId>> = Vec::with_capacity(nq);
    for u in 0..nq as VertexId {
        let profile = q.label_degree_profile(u);
        let mut set = Vec::new();
        'data: for v in 0..g.vertex_count() as VertexId {
            if g.label(v) != q.label(u) {
                continue;
            }
            for &(l, need) in profile {
                if g.label_degree(v, l) < need {
                    continue 'data;
                }
            }
            set.push(v);
        }
        if set.is_empty() {
            return Err(ZeroReason::EmptyCandidateSet(u));
        }
        candidates.push(set);
    }

    let query_edges: Vec<(VertexId, VertexId)> = q.edges().collect();
    let query_adj = build_query_adj(nq, &query_edges);
    let mut lists = Vec::with_capacity(query_edges.len());
    let mut edge_counts = Vec::with_capacity(query_edges.len());
    for &(a, b) in &query_edges {
        let mut side0: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        let mut side1: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        let mut count = 0;
        for &v in &candidates[a as usize] {
            let list = intersect_sorted(g.neighbors(v), &candidates[b as usize]);
            if !list.is_empty() {
                count += list.len();
                for &v2 in &list {
                    side1.entry(v2).or_default().push(v);
                }
                side0.insert(v, list);
            }
        }
        // side1 lists were appended in ascending v order, so they are sorted.
        lists.push([side0, side1]);
        edge_counts.push(count);
    }

    Ok(CandidateSpace { query_edges, query_adj, candidates, lists, edge_counts })
}
