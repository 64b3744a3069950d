//! Tree-based sampling: spanning-tree choice, exact counting of tree
//! assignments, uniform draws, and the adaptive estimation loop.
//!
//! The sample space is the set of homomorphisms of a spanning tree `T_q`
//! into the candidate space ("candidate trees"). Counting them exactly is a
//! product-of-sums dynamic program over the tree; sampling root-down with
//! weights proportional to the subtree counts makes every candidate tree
//! equally likely. A sampled tree is a hit when it is injective and every
//! non-tree query edge lands on a stored candidate edge, so the success
//! ratio times the space size estimates the embedding count — with a
//! Clopper-Pearson interval deciding when the ratio is trustworthy enough
//! to stop.

use rand::Rng;

use crate::cs::{CandidateSpace, ZeroReason};
use crate::graph::VertexId;
use crate::stats::clopper_pearson;

/// A spanning tree of the query graph rooted for sampling.
#[derive(Debug, Clone)]
pub struct RootedSpanningTree {
    pub root: VertexId,
    /// Parent per vertex; the root maps to itself.
    pub parent: Vec<VertexId>,
    /// Query-edge id of (parent[u], u); unused entry for the root.
    pub parent_edge: Vec<u32>,
    /// Root-first traversal order; parents precede children.
    pub bfs_order: Vec<VertexId>,
    /// Children per vertex, ascending.
    pub children: Vec<Vec<VertexId>>,
    /// Query edges outside the tree, as (vertex, vertex) with smaller first.
    pub non_tree_edges: Vec<(VertexId, VertexId)>,
}

impl RootedSpanningTree {
    /// Assembles the rooted structure from an explicit tree-edge set.
    /// Used by tests and exhaustive enumerations; `choose_spanning_tree` is
    /// the production entry point.
    pub fn from_edges(
        cs: &CandidateSpace,
        root: VertexId,
        tree_edges: &[(VertexId, VertexId)],
    ) -> Self {
        let n = cs.query_vertex_count();
        assert_eq!(tree_edges.len(), n.saturating_sub(1));
        let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for &(a, b) in tree_edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut parent = vec![u32::MAX; n];
        let mut order = Vec::with_capacity(n);
        parent[root as usize] = root;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &w in &adj[u as usize] {
                if parent[w as usize] == u32::MAX {
                    parent[w as usize] = u;
                    order.push(w);
                }
            }
        }
        assert_eq!(order.len(), n, "tree edges must span the query");
        Self::assemble(cs, root, parent, order)
    }

    fn assemble(
        cs: &CandidateSpace,
        root: VertexId,
        parent: Vec<VertexId>,
        bfs_order: Vec<VertexId>,
    ) -> Self {
        let n = parent.len();
        let mut parent_edge = vec![u32::MAX; n];
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        let mut in_tree = vec![false; cs.query_edge_count()];
        for &u in &bfs_order {
            if u == root {
                continue;
            }
            let p = parent[u as usize];
            let e = cs.edge_id(p, u).expect("tree edge must be a query edge");
            parent_edge[u as usize] = e;
            in_tree[e as usize] = true;
            children[p as usize].push(u);
        }
        for list in &mut children {
            list.sort_unstable();
        }
        let non_tree_edges = (0..cs.query_edge_count() as u32)
            .filter(|&e| !in_tree[e as usize])
            .map(|e| cs.query_edge(e))
            .collect();
        RootedSpanningTree {
            root,
            parent,
            parent_edge,
            bfs_order,
            children,
            non_tree_edges,
        }
    }
}

/// Exact comparison of two candidate-edge densities |pairs|/(|C(a)|·|C(b)|)
/// by cross-multiplication; avoids float ties on exact equality.
fn density_less(a: (usize, usize), b: (usize, usize)) -> std::cmp::Ordering {
    let (pa, da) = a;
    let (pb, db) = b;
    let lhs = pa as u128 * db as u128;
    let rhs = pb as u128 * da as u128;
    lhs.cmp(&rhs)
}

/// Grows a minimum-density spanning tree with Prim's algorithm.
///
/// The start vertex (which becomes the root) has the smallest candidate set,
/// ties to the smaller id. Vertex selection takes the smallest connecting
/// density, ties to the smaller vertex id; a vertex's best edge is replaced
/// only by a strictly less dense one, or an equally dense one from a smaller
/// parent. Fully deterministic.
///
/// Errors with the offending edge if any query edge has no candidate pairs
/// (the embedding count is provably zero).
pub fn choose_spanning_tree(cs: &CandidateSpace) -> Result<RootedSpanningTree, ZeroReason> {
    for e in 0..cs.query_edge_count() as u32 {
        if cs.edge_pair_count(e) == 0 {
            return Err(ZeroReason::EmptyCandidateEdges(e));
        }
    }
    let n = cs.query_vertex_count();
    let root = (0..n as u32)
        .min_by_key(|&u| (cs.candidate_count(u), u))
        .expect("nonempty query");
    if n == 1 {
        return Ok(RootedSpanningTree::assemble(cs, root, vec![root], vec![root]));
    }

    let density = |e: u32| -> (usize, usize) {
        let (a, b) = cs.query_edge(e);
        (cs.edge_pair_count(e), cs.candidate_count(a) * cs.candidate_count(b))
    };

    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<(u32, VertexId)>> = vec![None; n]; // (edge id, parent)
    let mut parent = vec![u32::MAX; n];
    let mut order = Vec::with_capacity(n);
    in_tree[root as usize] = true;
    parent[root as usize] = root;
    order.push(root);
    let relax = |from: VertexId, best: &mut Vec<Option<(u32, VertexId)>>| {
        for &(to, e) in cs.query_neighbors(from) {
            let candidate = (e, from);
            let better = match best[to as usize] {
                None => true,
                Some((cur_e, cur_p)) => match density_less(density(e), density(cur_e)) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Equal => from < cur_p,
                    std::cmp::Ordering::Greater => false,
                },
            };
            if better {
                best[to as usize] = Some(candidate);
            }
        }
    };
    relax(root, &mut best);
    for _ in 1..n {
        let next = (0..n as u32)
            .filter(|&u| !in_tree[u as usize] && best[u as usize].is_some())
            .min_by(|&x, &y| {
                let (ex, _) = best[x as usize].unwrap();
                let (ey, _) = best[y as usize].unwrap();
                density_less(density(ex), density(ey)).then(x.cmp(&y))
            })
            .expect("query is connected");
        let (_, p) = best[next as usize].unwrap();
        in_tree[next as usize] = true;
        parent[next as usize] = p;
        order.push(next);
        relax(next, &mut best);
    }
    // Re-walk in true BFS order (parents first, children ascending) rather
    // than Prim's selection order.
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for u in 0..n as u32 {
        if u != root {
            children[parent[u as usize] as usize].push(u);
        }
    }
    for list in &mut children {
        list.sort_unstable();
    }
    let mut bfs = Vec::with_capacity(n);
    bfs.push(root);
    let mut head = 0;
    while head < bfs.len() {
        let u = bfs[head];
        head += 1;
        bfs.extend_from_slice(&children[u as usize]);
    }
    Ok(RootedSpanningTree::assemble(cs, root, parent, bfs))
}

/// Per-(query vertex, candidate) subtree counts plus their root total.
/// `values[u][i]` pairs with `cs.candidates(u)[i]`.
#[derive(Debug, Clone)]
pub struct TreeCountTable<T> {
    pub values: Vec<Vec<T>>,
    pub total: T,
}

/// Counts candidate trees bottom-up: a leaf contributes 1; an inner vertex
/// multiplies, over its children, the sums of child counts reachable through
/// the candidate-neighbor lists. Generic over the number type so the same
/// program runs in f64 (production) and exact big integers (tests).
pub fn count_candidate_trees<T>(cs: &CandidateSpace, tree: &RootedSpanningTree) -> TreeCountTable<T>
where
    T: num_traits::Zero + num_traits::One + Clone,
    for<'a> T: std::ops::AddAssign<&'a T> + std::ops::MulAssign<&'a T>,
{
    let n = cs.query_vertex_count();
    let mut values: Vec<Vec<T>> = vec![Vec::new(); n];
    for &u in tree.bfs_order.iter().rev() {
        let mut row: Vec<T> = Vec::with_capacity(cs.candidate_count(u));
        for &v in cs.candidates(u) {
            let mut d = T::one();
            for &c in &tree.children[u as usize] {
                let e = tree.parent_edge[c as usize];
                let mut sum = T::zero();
                for &vc in cs.candidate_neighbors(e, u, v) {
                    let i = cs
                        .candidate_position(c, vc)
                        .expect("candidate neighbor is a candidate");
                    sum += &values[c as usize][i];
                }
                d *= &sum;
            }
            row.push(d);
        }
        values[u as usize] = row;
    }
    let mut total = T::zero();
    for d in &values[tree.root as usize] {
        total += d;
    }
    TreeCountTable { values, total }
}

/// Index into an inclusive-prefix-sum weight table, proportionally to the
/// weights. The final clamp plus zero-weight walk-back covers the rare case
/// where rounding pushes the draw to the very end of the table.
fn weighted_pick(prefix: &[f64], rng: &mut impl Rng) -> usize {
    let total = *prefix.last().expect("nonempty weights");
    debug_assert!(total > 0.0);
    let x = rng.gen::<f64>() * total;
    let mut i = prefix.partition_point(|&c| c <= x);
    if i >= prefix.len() {
        i = prefix.len() - 1;
        while i > 0 && prefix[i] == prefix[i - 1] {
            i -= 1;
        }
    }
    i
}

/// Draws candidate trees uniformly at random. Holds the per-root prefix sums
/// (computed once) and scratch space reused across draws.
pub struct TreeSampler<'a> {
    cs: &'a CandidateSpace,
    tree: &'a RootedSpanningTree,
    table: &'a TreeCountTable<f64>,
    root_prefix: Vec<f64>,
    cumulative: Vec<f64>,
    assignment: Vec<VertexId>,
}

impl<'a> TreeSampler<'a> {
    /// Requires a positive total (an empty sample space has nothing to draw).
    pub fn new(
        cs: &'a CandidateSpace,
        tree: &'a RootedSpanningTree,
        table: &'a TreeCountTable<f64>,
    ) -> Self {
        assert!(table.total > 0.0, "sample space is empty");
        let mut root_prefix = Vec::with_capacity(table.values[tree.root as usize].len());
        let mut acc = 0.0;
        for &d in &table.values[tree.root as usize] {
            acc += d;
            root_prefix.push(acc);
        }
        TreeSampler {
            cs,
            tree,
            table,
            root_prefix,
            cumulative: Vec::new(),
            assignment: vec![0; cs.query_vertex_count()],
        }
    }

    /// One uniform draw over candidate trees; the returned slice maps each
    /// query vertex to its sampled data vertex and is valid until the next
    /// draw.
    pub fn sample(&mut self, rng: &mut impl Rng) -> &[VertexId] {
        let root = self.tree.root;
        let i = weighted_pick(&self.root_prefix, rng);
        self.assignment[root as usize] = self.cs.candidates(root)[i];
        for &u in &self.tree.bfs_order[1..] {
            let p = self.tree.parent[u as usize];
            let e = self.tree.parent_edge[u as usize];
            let vp = self.assignment[p as usize];
            let pool = self.cs.candidate_neighbors(e, p, vp);
            self.cumulative.clear();
            let mut acc = 0.0;
            for &v in pool {
                let i = self.cs.candidate_position(u, v).expect("stored candidate");
                acc += self.table.values[u as usize][i];
                self.cumulative.push(acc);
            }
            let picked = weighted_pick(&self.cumulative, rng);
            self.assignment[u as usize] = pool[picked];
        }
        &self.assignment
    }
}

/// A sampled candidate tree is an embedding iff the mapping is injective and
/// every non-tree query edge lands on a stored candidate edge.
pub fn check_embedding(cs: &CandidateSpace, s: &[VertexId], tree: &RootedSpanningTree) -> bool {
    let n = s.len();
    for i in 0..n {
        for j in i + 1..n {
            if s[i] == s[j] {
                return false;
            }
        }
    }
    tree.non_tree_edges
        .iter()
        .all(|&(a, b)| cs.has_candidate_pair(a, s[a as usize], b, s[b as usize]))
}

/// Adaptive stopping parameters for the sampling loop.
#[derive(Debug, Clone)]
pub struct StoppingConfig {
    /// Acceptable failure probability of the interval guarantee.
    pub alpha: f64,
    /// Tolerable relative error; the loop stops when the interval pins the
    /// success ratio within a factor of `c` both ways.
    pub c: f64,
    /// Give up and fall back when this many trials produced at most
    /// `early_fail_successes` hits.
    pub early_fail_trials: u64,
    pub early_fail_successes: u64,
    /// Hard ceiling on trials.
    pub trial_cap: u64,
    /// Evaluate the interval on every success, and otherwise at this cadence.
    pub check_interval: u64,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        StoppingConfig {
            alpha: 0.05,
            c: 1.25,
            early_fail_trials: 50_000,
            early_fail_successes: 10,
            trial_cap: 400_000,
            check_interval: 1024,
        }
    }
}

/// What the sampling loop concluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeSamplingOutcome {
    /// Success ratio times the sample-space size.
    pub estimate: f64,
    pub successes: u64,
    pub trials: u64,
    /// True when the loop gave up for lack of successes; the caller should
    /// fall back to graph sampling.
    pub early_fail: bool,
}

/// Runs Bernoulli trials until the Clopper-Pearson interval certifies the
/// success ratio to within a factor of `c` (checked on each success and
/// every `check_interval` trials), the early-fail rule trips, or the trial
/// cap is hit. Factored over an injectable trial closure so statistical
/// tests can drive it with synthetic streams.
pub fn sampling_loop(
    total: f64,
    config: &StoppingConfig,
    mut trial: impl FnMut() -> bool,
) -> TreeSamplingOutcome {
    if total <= 0.0 {
        return TreeSamplingOutcome { estimate: 0.0, successes: 0, trials: 0, early_fail: false };
    }
    let mut trials = 0u64;
    let mut successes = 0u64;
    while trials < config.trial_cap {
        let hit = trial();
        trials += 1;
        if hit {
            successes += 1;
        }
        if successes > 0 && (hit || trials % config.check_interval == 0) {
            let rho = successes as f64 / trials as f64;
            let (lower, upper) = clopper_pearson(trials, successes, config.alpha);
            if rho / config.c <= lower && upper <= config.c * rho {
                break;
            }
        }
        if trials == config.early_fail_trials && successes <= config.early_fail_successes {
            return TreeSamplingOutcome {
                estimate: successes as f64 / trials as f64 * total,
                successes,
                trials,
                early_fail: true,
            };
        }
    }
    let estimate = successes as f64 / trials as f64 * total;
    TreeSamplingOutcome { estimate, successes, trials, early_fail: false }
}

/// The full tree-sampling stage: count, then sample-and-check under the
/// adaptive stopping rule.
pub fn candidate_tree_sampling(
    cs: &CandidateSpace,
    tree: &RootedSpanningTree,
    table: &TreeCountTable<f64>,
    config: &StoppingConfig,
    rng: &mut impl Rng,
) -> TreeSamplingOutcome {
    if table.total <= 0.0 {
        return TreeSamplingOutcome { estimate: 0.0, successes: 0, trials: 0, early_fail: false };
    }
    let mut sampler = TreeSampler::new(cs, tree, table);
    sampling_loop(table.total, config, || {
        let s = sampler.sample(rng);
        check_embedding(cs, s, tree)
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::cs::CandidateSpace;

    /// Five-vertex query whose tree sample space has exactly 6 candidate
    /// trees and 2 embeddings: root u0 with children u1, u2, u3 and u4 under
    /// u2; non-tree edges (u1,u3) and (u2,u3).
    pub(crate) fn six_tree_fixture() -> (CandidateSpace, RootedSpanningTree) {
        let edges = vec![(0, 1), (0, 2), (0, 3), (1, 3), (2, 3), (2, 4)];
        let candidates = vec![
            vec![1, 2],    // C(u0)
            vec![3, 4],    // C(u1)
            vec![5, 6],    // C(u2)
            vec![7, 8, 9], // C(u3)
            vec![3, 4],    // C(u4)
        ];
        let pairs: Vec<Vec<(u32, u32)>> = vec![
            vec![(1, 3), (2, 4)],                 // u0-u1
            vec![(1, 5), (2, 6)],                 // u0-u2
            vec![(1, 7), (2, 8), (2, 9)],         // u0-u3
            vec![(4, 8), (4, 9)],                 // u1-u3
            vec![(5, 7), (6, 8), (6, 9)],         // u2-u3
            vec![(5, 3), (5, 4), (6, 3), (6, 4)], // u2-u4
        ];
        let cs = CandidateSpace::from_parts(5, &edges, candidates, &pairs);
        cs.debug_validate();
        let tree = RootedSpanningTree::from_edges(&cs, 0, &[(0, 1), (0, 2), (0, 3), (2, 4)]);
        (cs, tree)
    }

    /// Path query of 3 where every candidate pairing is allowed, including
    /// repeats: 2·2·2 homomorphisms.
    pub(crate) fn eight_tree_fixture() -> (CandidateSpace, RootedSpanningTree) {
        let edges = vec![(0, 1), (1, 2)];
        let all = vec![(7, 7), (7, 8), (8, 7), (8, 8)];
        let cs = CandidateSpace::from_parts(
            3,
            &edges,
            vec![vec![7, 8], vec![7, 8], vec![7, 8]],
            &[all.clone(), all],
        );
        let tree = choose_spanning_tree(&cs).unwrap();
        assert!(tree.non_tree_edges.is_empty());
        (cs, tree)
    }
}
