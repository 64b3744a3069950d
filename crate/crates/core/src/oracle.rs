//! Ground truth by exhaustive backtracking.
//!
//! Everything statistical in this crate is validated against these routines:
//! an exact embedding counter (over raw adjacency or over a candidate
//! space — the two must agree whenever the space is complete) and a
//! brute-force enumerator of tree assignments that the counting DP is
//! checked against. Counts are exact integers; speed is secondary.

use std::time::{Duration, Instant};

use num_bigint::BigUint;

use crate::cs::CandidateSpace;
use crate::graph::{LabeledGraph, VertexId};
use crate::stratified::{extendable_candidates, matching_order, PartialEmbedding};
use crate::tree::{count_candidate_trees, RootedSpanningTree};

/// Limits for one oracle run. Everything optional; the default runs to
/// completion.
#[derive(Debug, Clone, Default)]
pub struct OracleConfig {
    /// Stop once this many embeddings were counted.
    pub limit: Option<u64>,
    /// Give up after this much wall-clock time (checked every 4096 nodes).
    pub timeout: Option<Duration>,
    /// Record the first this-many embeddings.
    pub collect_embeddings: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub count: BigUint,
    /// Collected mappings (query vertex index → data vertex), present iff
    /// requested; capped, so possibly shorter than `count`.
    pub embeddings: Option<Vec<Vec<VertexId>>>,
    pub elapsed: Duration,
    /// True when a limit or timeout cut the search short.
    pub partial: bool,
}

impl OracleResult {
    /// The count as u64; panics if it overflows (not reachable by counting
    /// one embedding at a time within any realistic run).
    pub fn count_u64(&self) -> u64 {
        u64::try_from(&self.count).expect("count fits u64")
    }
}

struct SearchLimits {
    limit: Option<u128>,
    deadline: Option<Instant>,
    nodes: u64,
    count: u128,
    partial: bool,
    collected: Option<Vec<Vec<VertexId>>>,
    collect_cap: usize,
}

impl SearchLimits {
    fn new(config: &OracleConfig) -> Self {
        SearchLimits {
            limit: config.limit.map(u128::from),
            deadline: config.timeout.map(|t| Instant::now() + t),
            nodes: 0,
            count: 0,
            partial: false,
            collected: config.collect_embeddings.map(|_| Vec::new()),
            collect_cap: config.collect_embeddings.unwrap_or(0),
        }
    }

    /// True to keep searching.
    fn enter_node(&mut self) -> bool {
        if let Some(deadline) = self.deadline {
            if self.nodes & 4095 == 0 && Instant::now() >= deadline {
                self.partial = true;
                return false;
            }
        }
        self.nodes += 1;
        true
    }

    /// Records one full embedding; true to keep searching.
    fn record(&mut self, mapping: impl FnOnce() -> Vec<VertexId>) -> bool {
        self.count += 1;
        if let Some(list) = &mut self.collected {
            if list.len() < self.collect_cap {
                list.push(mapping());
            }
        }
        if let Some(limit) = self.limit {
            if self.count >= limit {
                self.partial = true;
                return false;
            }
        }
        true
    }
}

/// Exact number of isomorphic embeddings of `q` in `g`, by backtracking on
/// raw adjacency with label and label-degree pruning at each step.
pub fn exact_count(q: &LabeledGraph, g: &LabeledGraph, config: &OracleConfig) -> OracleResult {
    let started = Instant::now();
    let order = raw_matching_order(q, g);
    let mut limits = SearchLimits::new(config);
    let mut assignment: Vec<VertexId> = vec![u32::MAX; q.vertex_count()];
    let mut used = vec![false; g.vertex_count()];
    raw_recurse(q, g, &order, 0, &mut assignment, &mut used, &mut limits);
    finish(limits, started)
}

/// Exact embedding count over a candidate space: injective walks through the
/// stored candidate-neighbor lists. Must agree with [`exact_count`] whenever
/// the space is complete for its query/data pair.
pub fn exact_count_with(cs: &CandidateSpace, config: &OracleConfig) -> OracleResult {
    let started = Instant::now();
    let order = matching_order(cs);
    let mut limits = SearchLimits::new(config);
    let mut m = PartialEmbedding::new(cs.query_vertex_count());
    cs_recurse(cs, &order, &mut m, &mut limits);
    finish(limits, started)
}

fn finish(limits: SearchLimits, started: Instant) -> OracleResult {
    OracleResult {
        count: BigUint::from(limits.count),
        embeddings: limits.collected,
        elapsed: started.elapsed(),
        partial: limits.partial,
    }
}

/// First the rarest label (fewest data vertices), then greedy most-placed-
/// neighbors, ties to the smaller id — mirroring the sampler's order without
/// needing a candidate space.
fn raw_matching_order(q: &LabeledGraph, g: &LabeledGraph) -> Vec<VertexId> {
    let label_count = |u: VertexId| {
        (0..g.vertex_count() as u32).filter(|&v| g.label(v) == q.label(u)).count()
    };
    let n = q.vertex_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let first = (0..n as u32).min_by_key(|&u| (label_count(u), u)).expect("nonempty query");
    placed[first as usize] = true;
    order.push(first);
    while order.len() < n {
        let next = (0..n as u32)
            .filter(|&u| !placed[u as usize])
            .max_by_key(|&u| {
                let k = q.neighbors(u).iter().filter(|&&u2| placed[u2 as usize]).count();
                (k, std::cmp::Reverse(u))
            })
            .unwrap();
        placed[next as usize] = true;
        order.push(next);
    }
    order
}

fn raw_recurse(
    q: &LabeledGraph,
    g: &LabeledGraph,
    order: &[VertexId],
    depth: usize,
    assignment: &mut Vec<VertexId>,
    used: &mut Vec<bool>,
    limits: &mut SearchLimits,
) -> bool {
    if !limits.enter_node() {
        return false;
    }
    if depth == order.len() {
        return limits.record(|| assignment.clone());
    }
    let u = order[depth];
    let placed: Vec<VertexId> = q
        .neighbors(u)
        .iter()
        .copied()
        .filter(|&u2| assignment[u2 as usize] != u32::MAX)
        .collect();
    let try_vertex = |v: VertexId,
                      assignment: &mut Vec<VertexId>,
                      used: &mut Vec<bool>,
                      limits: &mut SearchLimits|
     -> bool {
        if used[v as usize] || g.label(v) != q.label(u) {
            return true;
        }
        if !placed.iter().all(|&u2| g.has_edge(v, assignment[u2 as usize])) {
            return true;
        }
        assignment[u as usize] = v;
        used[v as usize] = true;
        let keep_going = raw_recurse(q, g, order, depth + 1, assignment, used, limits);
        used[v as usize] = false;
        assignment[u as usize] = u32::MAX;
        keep_going
    };
    if let Some(&anchor) = placed.first() {
        // Scan the smallest placed neighbor's adjacency.
        let smallest = placed
            .iter()
            .copied()
            .min_by_key(|&u2| g.degree(assignment[u2 as usize]))
            .unwrap_or(anchor);
        let around = assignment[smallest as usize];
        for &v in g.neighbors(around) {
            if !try_vertex(v, assignment, used, limits) {
                return false;
            }
        }
    } else {
        for v in 0..g.vertex_count() as u32 {
            if !try_vertex(v, assignment, used, limits) {
                return false;
            }
        }
    }
    true
}

fn cs_recurse(
    cs: &CandidateSpace,
    order: &[VertexId],
    m: &mut PartialEmbedding,
    limits: &mut SearchLimits,
) -> bool {
    if !limits.enter_node() {
        return false;
    }
    if m.len() == order.len() {
        return limits.record(|| {
            (0..order.len() as u32).map(|u| m.get(u).expect("full embedding")).collect()
        });
    }
    let u = order[m.len()];
    for v in extendable_candidates(cs, m, u) {
        m.push(u, v);
        let keep_going = cs_recurse(cs, order, m, limits);
        m.pop(u);
        if !keep_going {
            return false;
        }
    }
    true
}

/// Error for tree-assignment enumerations that would be too large to
/// materialize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSpaceTooLarge {
    pub total: BigUint,
}

impl std::fmt::Display for TreeSpaceTooLarge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "candidate-tree space of size {} exceeds the enumeration guard", self.total)
    }
}

impl std::error::Error for TreeSpaceTooLarge {}

/// Exhaustively lists every tree assignment (homomorphism of the spanning
/// tree into the candidate space), as full query-indexed mappings. Refuses
/// spaces larger than 10^6; the result length always equals the counting
/// DP's total.
pub fn enumerate_candidate_trees(
    cs: &CandidateSpace,
    tree: &RootedSpanningTree,
) -> Result<Vec<Vec<VertexId>>, TreeSpaceTooLarge> {
    let table = count_candidate_trees::<BigUint>(cs, tree);
    if table.total > BigUint::from(1_000_000u32) {
        return Err(TreeSpaceTooLarge { total: table.total });
    }
    let mut out = Vec::new();
    let mut assignment: Vec<VertexId> = vec![u32::MAX; cs.query_vertex_count()];
    expand(cs, tree, 0, &mut assignment, &mut out);
    Ok(out)
}

fn expand(
    cs: &CandidateSpace,
    tree: &RootedSpanningTree,
    position: usize,
    assignment: &mut Vec<VertexId>,
    out: &mut Vec<Vec<VertexId>>,
) {
    if position == tree.bfs_order.len() {
        out.push(assignment.clone());
        return;
    }
    let u = tree.bfs_order[position];
    let pool: Vec<VertexId> = if position == 0 {
        cs.candidates(u).to_vec()
    } else {
        let p = tree.parent[u as usize];
        let e = tree.parent_edge[u as usize];
        cs.candidate_neighbors(e, p, assignment[p as usize]).to_vec()
    };
    for v in pool {
        assignment[u as usize] = v;
        expand(cs, tree, position + 1, assignment, out);
    }
    assignment[u as usize] = u32::MAX;
}
