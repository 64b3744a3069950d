//! Candidate-space refinement.
//!
//! Repeatedly picks the most promising query vertex (lowest penalty) and
//! re-checks each of its candidates against three structural conditions:
//! a local bipartite matching that must cover all query neighbors, and
//! triangle / four-cycle realizability per candidate edge. Removals cascade
//! symmetrically, so each pass can expose more pruning for the neighbors —
//! whose penalties shrink accordingly. The loop stops once every vertex
//! looks settled (min penalty above `tau`) or a degree budget proportional
//! to the query size is spent.
//!
//! Everything removed here is provably absent from any embedding, so the
//! candidate space stays complete.

use crate::cs::bipartite::{
    max_bipartite_matching, maximally_matchable_mask, LocalBipartiteGraph,
};
use crate::cs::{CandidateSpace, ZeroReason};
use crate::cycles::CycleIndex;
use crate::graph::{LabeledGraph, VertexId};
use crate::util::contains_sorted;

/// Which pruning conditions run per candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    /// Bipartite cover + maximally-matchable pruning + triangle and
    /// four-cycle checks. The production path.
    Full,
    /// Label-multiset coverage of the query neighborhood only. Weaker
    /// baseline, kept for comparison runs.
    NeighborSafety,
}

#[derive(Debug, Clone)]
pub struct RefineConfig {
    /// Initial penalty assigned to every query vertex.
    pub phi: f64,
    /// Stop once the minimum penalty exceeds this.
    pub tau: f64,
    /// Degree budget: refinement may spend up to `budget_multiplier * |E_q|`
    /// total query degree (the vertex that crosses the line finishes).
    pub budget_multiplier: u32,
    pub filter: FilterMode,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            phi: 2.0 / 3.0,
            tau: 0.9,
            budget_multiplier: 5,
            filter: FilterMode::Full,
        }
    }
}

/// Penalty bookkeeping for promising-first vertex selection.
#[derive(Debug, Clone)]
pub struct RefinementState {
    penalty: Vec<f64>,
    pub degree_budget_used: u64,
}

impl RefinementState {
    pub fn new(query_vertex_count: usize, phi: f64) -> Self {
        RefinementState {
            penalty: vec![phi; query_vertex_count],
            degree_budget_used: 0,
        }
    }

    pub fn min_penalty(&self) -> f64 {
        self.penalty.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn penalty(&self, u: VertexId) -> f64 {
        self.penalty[u as usize]
    }

    /// Lowest-penalty vertex, smallest id on ties.
    pub fn select(&self) -> VertexId {
        let mut best = 0usize;
        for (i, &p) in self.penalty.iter().enumerate().skip(1) {
            if p < self.penalty[best] {
                best = i;
            }
        }
        best as VertexId
    }

    /// Records a finished pass over `u`: its penalty resets to 1 and each
    /// neighbor's penalty scales by the survival ratio of C(u).
    pub fn refined(
        &mut self,
        u: VertexId,
        neighbors: &[(VertexId, u32)],
        candidates_before: usize,
        candidates_after: usize,
    ) {
        debug_assert!(candidates_before > 0);
        let ratio = candidates_after as f64 / candidates_before as f64;
        self.penalty[u as usize] = 1.0;
        for &(u2, _) in neighbors {
            self.penalty[u2 as usize] *= ratio;
        }
    }
}

/// Counters from one refinement run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RefineStats {
    /// Vertex passes executed.
    pub passes: usize,
    pub removed_candidates: usize,
    pub removed_pairs: usize,
    pub degree_budget_used: u64,
    pub degree_budget_limit: u64,
}

/// True iff every query triangle through `(u, u2)` can be realized around
/// the candidate edge `(v, v2)`: the data edge closes at least as many
/// triangles, and each query apex has a data apex present in both
/// candidate-neighbor lists. No-op (true) when either index is disabled.
pub fn triangle_safe(
    cs: &CandidateSpace,
    cycle_q: &CycleIndex,
    cycle_g: &CycleIndex,
    u: VertexId,
    u2: VertexId,
    v: VertexId,
    v2: VertexId,
) -> bool {
    if !cycle_q.triangles_enabled() || !cycle_g.triangles_enabled() {
        return true;
    }
    let query_apexes = cycle_q.triangle_apexes(u, u2);
    if query_apexes.is_empty() {
        return true;
    }
    let data_apexes = cycle_g.triangle_apexes(v, v2);
    if query_apexes.len() > data_apexes.len() {
        return false;
    }
    query_apexes.iter().all(|&ua| {
        let e1 = cs.edge_id(u, ua).expect("triangle apex adjacent to u");
        let e2 = cs.edge_id(u2, ua).expect("triangle apex adjacent to u2");
        let from_u = cs.candidate_neighbors(e1, u, v);
        let from_u2 = cs.candidate_neighbors(e2, u2, v2);
        // Scan whichever list is shortest; membership checks are binary
        // searches on the other two.
        if from_u.len() <= from_u2.len() {
            from_u
                .iter()
                .any(|&va| contains_sorted(from_u2, va) && contains_sorted(data_apexes, va))
        } else {
            from_u2
                .iter()
                .any(|&va| contains_sorted(from_u, va) && contains_sorted(data_apexes, va))
        }
    })
}

/// True iff every query four-cycle through `(u, u2)` can be realized around
/// the candidate edge `(v, v2)` with a consistently oriented data four-cycle:
/// opposite edges pair position-by-position along the cycle, and the data
/// opposite edge must itself be a candidate edge for the query opposite edge.
pub fn four_cycle_safe(
    cs: &CandidateSpace,
    cycle_q: &CycleIndex,
    cycle_g: &CycleIndex,
    u: VertexId,
    u2: VertexId,
    v: VertexId,
    v2: VertexId,
) -> bool {
    if !cycle_q.four_cycles_enabled() || !cycle_g.four_cycles_enabled() {
        return true;
    }
    let query_count = cycle_q.four_cycle_count(u, u2);
    if query_count == 0 {
        return true;
    }
    if query_count > cycle_g.four_cycle_count(v, v2) {
        return false;
    }
    // Entries are oriented for the argument order: (x, y) has x adjacent to
    // the second argument and y adjacent to the first.
    let data_opposites: Vec<(VertexId, VertexId)> = cycle_g.four_cycle_opposites(v, v2).collect();
    cycle_q.four_cycle_opposites(u, u2).all(|(ua, ub)| {
        let e_next = cs.edge_id(u2, ua).expect("four-cycle edge (u2, ua)");
        let e_prev = cs.edge_id(u, ub).expect("four-cycle edge (u, ub)");
        let e_opp = cs.edge_id(ua, ub).expect("four-cycle opposite edge");
        let next = cs.candidate_neighbors(e_next, u2, v2);
        let prev = cs.candidate_neighbors(e_prev, u, v);
        data_opposites.iter().any(|&(va, vb)| {
            contains_sorted(next, va)
                && contains_sorted(prev, vb)
                && contains_sorted(cs.candidate_neighbors(e_opp, ua, va), vb)
        })
    })
}

/// Label-multiset coverage: for each neighbor label, `u` has no more query
/// neighbors with that label than `v` has distinct candidate neighbors for
/// them. Weaker than the bipartite cover; used by `FilterMode::NeighborSafety`.
pub fn neighbor_safe(cs: &CandidateSpace, q: &LabeledGraph, u: VertexId, v: VertexId) -> bool {
    use std::collections::{BTreeMap, BTreeSet};
    let mut per_label: BTreeMap<u32, (usize, BTreeSet<VertexId>)> = BTreeMap::new();
    for &(u2, e) in cs.query_neighbors(u) {
        let entry = per_label.entry(q.label(u2)).or_default();
        entry.0 += 1;
        entry.1.extend(cs.candidate_neighbors(e, u, v).iter().copied());
    }
    per_label.values().all(|(need, have)| *need <= have.len())
}

/// Builds the local bipartite graph for `u -> v` and applies both matching
/// conditions. Returns `(false, [])` when no matching covers the query
/// neighbors (the caller must drop `v`); otherwise removes every candidate
/// edge of `v` that no maximum matching uses and returns the removed
/// `(query neighbor, data vertex)` pairs.
pub fn edge_bipartite_refine(
    cs: &mut CandidateSpace,
    u: VertexId,
    v: VertexId,
) -> (bool, Vec<(VertexId, VertexId)>) {
    let neighbors: Vec<(VertexId, u32)> = cs.query_neighbors(u).to_vec();
    let degree = neighbors.len();
    let mut right: Vec<VertexId> = Vec::new();
    for &(_, e) in &neighbors {
        right.extend_from_slice(cs.candidate_neighbors(e, u, v));
    }
    right.sort_unstable();
    right.dedup();
    let adj: Vec<Vec<usize>> = neighbors
        .iter()
        .map(|&(_, e)| {
            cs.candidate_neighbors(e, u, v)
                .iter()
                .map(|v2| right.binary_search(v2).expect("right side is the union"))
                .collect()
        })
        .collect();
    let local = LocalBipartiteGraph {
        left: neighbors.iter().map(|&(u2, _)| u2).collect(),
        right,
        adj,
    };
    let matching = max_bipartite_matching(&local);
    if matching.size < degree {
        return (false, Vec::new());
    }
    let mask = maximally_matchable_mask(&local, &matching);
    let mut removed = Vec::new();
    for (i, &(u2, e)) in neighbors.iter().enumerate() {
        let doomed: Vec<VertexId> = local.adj[i]
            .iter()
            .zip(&mask[i])
            .filter(|&(_, keep)| !keep)
            .map(|(&r, _)| local.right[r])
            .collect();
        for v2 in doomed {
            cs.remove_candidate_pair(e, u, v, v2);
            removed.push((u2, v2));
        }
    }
    (true, removed)
}

/// One pass over C(u): per candidate, the vertex-level matching check, then
/// triangle / four-cycle pruning per surviving candidate edge, then removal
/// if any candidate-neighbor list emptied.
fn refine_vertex(
    cs: &mut CandidateSpace,
    q: &LabeledGraph,
    cycle_q: &CycleIndex,
    cycle_g: &CycleIndex,
    filter: FilterMode,
    u: VertexId,
    stats: &mut RefineStats,
) -> Result<(), ZeroReason> {
    let snapshot: Vec<VertexId> = cs.candidates(u).to_vec();
    let neighbors: Vec<(VertexId, u32)> = cs.query_neighbors(u).to_vec();
    for v in snapshot {
        match filter {
            FilterMode::Full => {
                let (vertex_ok, removed) = edge_bipartite_refine(cs, u, v);
                stats.removed_pairs += removed.len();
                if !vertex_ok {
                    cs.remove_candidate(u, v);
                    stats.removed_candidates += 1;
                    continue;
                }
                for &(u2, e) in &neighbors {
                    let list: Vec<VertexId> = cs.candidate_neighbors(e, u, v).to_vec();
                    for v2 in list {
                        if !triangle_safe(cs, cycle_q, cycle_g, u, u2, v, v2)
                            || !four_cycle_safe(cs, cycle_q, cycle_g, u, u2, v, v2)
                        {
                            cs.remove_candidate_pair(e, u, v, v2);
                            stats.removed_pairs += 1;
                        }
                    }
                }
            }
            FilterMode::NeighborSafety => {
                if !neighbor_safe(cs, q, u, v) {
                    cs.remove_candidate(u, v);
                    stats.removed_candidates += 1;
                    continue;
                }
            }
        }
        if neighbors.iter().any(|&(_, e)| cs.candidate_neighbors(e, u, v).is_empty()) {
            cs.remove_candidate(u, v);
            stats.removed_candidates += 1;
        }
    }
    if cs.candidate_count(u) == 0 {
        return Err(ZeroReason::EmptyCandidateSet(u));
    }
    Ok(())
}

/// Runs the promising-first refinement loop to a fixpoint-ish stop: exits
/// when the minimum penalty exceeds `tau` or the degree budget is spent.
/// Errors with the emptied vertex if some C(u) loses its last candidate.
pub fn refine_candidate_space(
    cs: &mut CandidateSpace,
    q: &LabeledGraph,
    cycle_q: &CycleIndex,
    cycle_g: &CycleIndex,
    config: &RefineConfig,
) -> Result<RefineStats, ZeroReason> {
    let mut state = RefinementState::new(cs.query_vertex_count(), config.phi);
    let limit = config.budget_multiplier as u64 * cs.query_edge_count() as u64;
    let mut stats = RefineStats {
        degree_budget_limit: limit,
        ..RefineStats::default()
    };
    while state.min_penalty() <= config.tau && state.degree_budget_used <= limit {
        let u = state.select();
        state.degree_budget_used += cs.query_degree(u) as u64;
        let before = cs.candidate_count(u);
        refine_vertex(cs, q, cycle_q, cycle_g, config.filter, u, &mut stats)?;
        let after = cs.candidate_count(u);
        state.refined(u, cs.query_neighbors(u), before, after);
        stats.passes += 1;
    }
    stats.degree_budget_used = state.degree_budget_used;
    Ok(stats)
}
