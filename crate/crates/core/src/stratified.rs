//! Stratified recursive sampling over partial embeddings.
//!
//! When tree sampling finds too few hits to certify a ratio, this estimator
//! walks the query in a fixed matching order, at each step intersecting the
//! candidate-neighbor lists of the already-placed neighbors ("extendable
//! candidates"), recursing into a random subset of them, and scaling the
//! result back up by the subset fraction. Every candidate subset receives a
//! proportional share of the remaining sample budget, so effort spreads
//! across strata instead of drilling into one corner of the search space.
//! The estimate is unbiased for any budget; with an infinite budget and
//! subset divisor 1 it degenerates to exact backtracking.

use rand::Rng;

use crate::cs::CandidateSpace;
use crate::graph::VertexId;
use crate::util::intersect_sorted;

/// An injective, prefix-consistent assignment of data vertices to a prefix
/// of the matching order.
#[derive(Debug, Clone)]
pub struct PartialEmbedding {
    assigned: Vec<Option<VertexId>>,
    /// Assignment stack, most recent last.
    image: Vec<VertexId>,
}

impl PartialEmbedding {
    pub fn new(query_vertex_count: usize) -> Self {
        PartialEmbedding {
            assigned: vec![None; query_vertex_count],
            image: Vec::with_capacity(query_vertex_count),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn get(&self, u: VertexId) -> Option<VertexId> {
        self.assigned[u as usize]
    }

    pub fn uses(&self, v: VertexId) -> bool {
        self.image.contains(&v)
    }

    pub fn push(&mut self, u: VertexId, v: VertexId) {
        debug_assert!(self.assigned[u as usize].is_none());
        debug_assert!(!self.uses(v));
        self.assigned[u as usize] = Some(v);
        self.image.push(v);
    }

    pub fn pop(&mut self, u: VertexId) {
        let v = self.image.pop().expect("pop from empty embedding");
        debug_assert_eq!(self.assigned[u as usize], Some(v));
        self.assigned[u as usize] = None;
    }
}

/// Static matching order: start at the smallest candidate set, then always
/// take the vertex with the most already-placed neighbors (ties: smaller id).
pub fn matching_order(cs: &CandidateSpace) -> Vec<VertexId> {
    let n = cs.query_vertex_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let first = (0..n as u32)
        .min_by_key(|&u| (cs.candidate_count(u), u))
        .expect("nonempty query");
    placed[first as usize] = true;
    order.push(first);
    while order.len() < n {
        let next = (0..n as u32)
            .filter(|&u| !placed[u as usize])
            .max_by_key(|&u| {
                let placed_neighbors = cs
                    .query_neighbors(u)
                    .iter()
                    .filter(|&&(u2, _)| placed[u2 as usize])
                    .count();
                (placed_neighbors, std::cmp::Reverse(u))
            })
            .unwrap();
        placed[next as usize] = true;
        order.push(next);
    }
    order
}

/// Data vertices that can extend `m` at `u`: the intersection of the
/// candidate-neighbor lists of all placed neighbors (computed smallest list
/// first), minus the vertices already used. With no placed neighbor the base
/// pool is C(u).
pub fn extendable_candidates(
    cs: &CandidateSpace,
    m: &PartialEmbedding,
    u: VertexId,
) -> Vec<VertexId> {
    let mut lists: Vec<&[VertexId]> = Vec::new();
    for &(u2, e) in cs.query_neighbors(u) {
        if let Some(v2) = m.get(u2) {
            lists.push(cs.candidate_neighbors(e, u2, v2));
        }
    }
    let mut result: Vec<VertexId> = if lists.is_empty() {
        cs.candidates(u).to_vec()
    } else {
        lists.sort_by_key(|l| l.len());
        let mut acc = lists[0].to_vec();
        for rest in &lists[1..] {
            if acc.is_empty() {
                break;
            }
            acc = intersect_sorted(&acc, rest);
        }
        acc
    };
    result.retain(|&v| !m.uses(v));
    result
}

/// Total sample budget for one estimation run, shrinking as the tree stage
/// reports more successes: |V_q| · scale / √(successes + 1).
pub fn get_sample_size(query_vertex_count: usize, tree_successes: u64, scale: f64) -> f64 {
    query_vertex_count as f64 * scale / ((tree_successes + 1) as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct StratifiedConfig {
    /// Subset divisor: each stratum explores about 1/k of its candidates.
    pub k: u64,
    /// Global budget scale (the constant in `get_sample_size`).
    pub scale: f64,
}

impl Default for StratifiedConfig {
    fn default() -> Self {
        StratifiedConfig { k: 4, scale: 100_000.0 }
    }
}

/// Recursive stratified estimate of the number of full embeddings extending
/// `m`, with at most ~`ub` base-case visits. Returns the estimate and the
/// exact number of base cases visited (≤ ⌊ub⌋ for ub ≥ 1).
///
/// An infinite `ub` together with `k = 1` expands every candidate and
/// reproduces exact backtracking.
pub fn estimate_w(
    cs: &CandidateSpace,
    order: &[VertexId],
    m: &mut PartialEmbedding,
    ub: f64,
    k: u64,
    rng: &mut impl Rng,
) -> (f64, u64) {
    debug_assert!(ub >= 1.0);
    if m.len() == order.len() {
        return (1.0, 1);
    }
    let u = order[m.len()];
    let mut pool = extendable_candidates(cs, m, u);
    if pool.is_empty() {
        return (0.0, 1);
    }
    let by_k = pool.len().div_ceil(k.max(1) as usize);
    let budget_cap = if ub.is_finite() { ub.floor() as usize } else { usize::MAX };
    let sz = by_k.min(budget_cap).max(1);
    // Partial Fisher-Yates: the first `sz` slots become a uniform subset.
    for i in 0..sz {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut sum = 0.0;
    let mut used = 0u64;
    for i in 0..sz {
        let child_ub = (ub - used as f64) / (sz - i) as f64;
        // Every stratum keeps at least its proportional share.
        debug_assert!(!child_ub.is_finite() || child_ub >= ub / sz as f64 - 1e-6 * ub.max(1.0));
        debug_assert!(child_ub >= 1.0 - 1e-9);
        let v = pool[i];
        m.push(u, v);
        let (w, n) = estimate_w(cs, order, m, child_ub.max(1.0), k, rng);
        m.pop(u);
        sum += w;
        used += n;
    }
    (pool.len() as f64 / sz as f64 * sum, used)
}

/// The graph-sampling stage: stratified estimation from an empty embedding,
/// budgeted by the tree stage's success count. Returns the estimate and the
/// number of base-case samples spent.
pub fn candidate_graph_sampling(
    cs: &CandidateSpace,
    tree_successes: u64,
    config: &StratifiedConfig,
    rng: &mut impl Rng,
) -> (f64, u64) {
    let order = matching_order(cs);
    let ub = get_sample_size(cs.query_vertex_count(), tree_successes, config.scale).max(1.0);
    let mut m = PartialEmbedding::new(cs.query_vertex_count());
    estimate_w(cs, &order, &mut m, ub, config.k, rng)
}
