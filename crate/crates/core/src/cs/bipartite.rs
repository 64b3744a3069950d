//! Local bipartite consistency: matchings between a query vertex's neighbors
//! and a data vertex's neighbors.
//!
//! For a candidate assignment `u -> v`, the local bipartite graph has the
//! query neighbors of `u` on the left, data vertices on the right, and an
//! edge wherever the right vertex is a candidate neighbor for the left one.
//! The assignment is viable only if this graph has a matching covering the
//! whole left side, and an individual edge survives only if some maximum
//! matching uses it.
//!
//! Edge classification uses the standard orientation trick: direct matched
//! edges right→left and unmatched edges left→right. An unmatched edge is then
//! part of some maximum matching iff its endpoints share a strongly connected
//! component, or its left endpoint is reachable from an unmatched left
//! vertex, or its right endpoint reaches an unmatched right vertex.

use crate::graph::VertexId;

/// Bipartite graph between query neighbors (left) and data vertices (right).
#[derive(Debug, Clone)]
pub struct LocalBipartiteGraph {
    /// Query vertex per left node.
    pub left: Vec<VertexId>,
    /// Data vertex per right node.
    pub right: Vec<VertexId>,
    /// Per left node: right node indices, ascending.
    pub adj: Vec<Vec<usize>>,
}

/// A matching, kept from both sides. `size` is the number of matched pairs.
#[derive(Debug, Clone)]
pub struct Matching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
    pub size: usize,
}

/// Maximum bipartite matching by repeated augmenting-path search, processing
/// left nodes and their adjacency in index order (deterministic).
pub fn max_bipartite_matching(b: &LocalBipartiteGraph) -> Matching {
    let nl = b.left.len();
    let nr = b.right.len();
    let mut left_to_right: Vec<Option<usize>> = vec![None; nl];
    let mut right_to_left: Vec<Option<usize>> = vec![None; nr];
    let mut size = 0;
    let mut seen = vec![false; nr];
    for l in 0..nl {
        seen.iter_mut().for_each(|s| *s = false);
        if augment(b, l, &mut seen, &mut left_to_right, &mut right_to_left) {
            size += 1;
        }
    }
    Matching { left_to_right, right_to_left, size }
}

fn augment(
    b: &LocalBipartiteGraph,
    l: usize,
    seen: &mut [bool],
    l2r: &mut [Option<usize>],
    r2l: &mut [Option<usize>],
) -> bool {
    for &r in &b.adj[l] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let free = match r2l[r] {
            None => true,
            Some(l2) => augment(b, l2, seen, l2r, r2l),
        };
        if free {
            l2r[l] = Some(r);
            r2l[r] = Some(l);
            return true;
        }
    }
    false
}

fn has_augmenting_path(b: &LocalBipartiteGraph, m: &Matching) -> bool {
    let mut l2r = m.left_to_right.clone();
    let mut r2l = m.right_to_left.clone();
    let mut seen = vec![false; b.right.len()];
    for l in 0..b.left.len() {
        if l2r[l].is_none() {
            seen.iter_mut().for_each(|s| *s = false);
            if augment(b, l, &mut seen, &mut l2r, &mut r2l) {
                return true;
            }
        }
    }
    false
}

/// For each adjacency slot of `b`, whether that edge belongs to at least one
/// maximum matching. `matching` must be maximum (checked in debug builds).
pub fn maximally_matchable_mask(b: &LocalBipartiteGraph, matching: &Matching) -> Vec<Vec<bool>> {
    debug_assert!(!has_augmenting_path(b, matching), "matching is not maximum");
    let nl = b.left.len();
    let nr = b.right.len();
    let n = nl + nr;
    // Node ids: left l -> l, right r -> nl + r.
    let mut fwd: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for l in 0..nl {
        for &r in &b.adj[l] {
            let (from, to) = if matching.left_to_right[l] == Some(r) {
                (nl + r, l) // matched: right -> left
            } else {
                (l, nl + r) // unmatched: left -> right
            };
            fwd[from].push(to as u32);
            rev[to].push(from as u32);
        }
    }

    let scc = strongly_connected_components(&fwd);

    // Reachable from some unmatched left node, along fwd edges.
    let mut from_free_left = vec![false; n];
    let mut stack: Vec<u32> = (0..nl)
        .filter(|&l| matching.left_to_right[l].is_none())
        .map(|l| l as u32)
        .collect();
    for &s in &stack {
        from_free_left[s as usize] = true;
    }
    while let Some(x) = stack.pop() {
        for &y in &fwd[x as usize] {
            if !from_free_left[y as usize] {
                from_free_left[y as usize] = true;
                stack.push(y);
            }
        }
    }

    // Reaches some unmatched right node: reverse reachability.
    let mut to_free_right = vec![false; n];
    let mut stack: Vec<u32> = (0..nr)
        .filter(|&r| matching.right_to_left[r].is_none())
        .map(|r| (nl + r) as u32)
        .collect();
    for &s in &stack {
        to_free_right[s as usize] = true;
    }
    while let Some(x) = stack.pop() {
        for &y in &rev[x as usize] {
            if !to_free_right[y as usize] {
                to_free_right[y as usize] = true;
                stack.push(y);
            }
        }
    }

    b.adj
        .iter()
        .enumerate()
        .map(|(l, list)| {
            list.iter()
                .map(|&r| {
                    matching.left_to_right[l] == Some(r)
                        || scc[l] == scc[nl + r]
                        || from_free_left[l]
                        || to_free_right[nl + r]
                })
                .collect()
        })
        .collect()
}

/// Maximally matchable edges as `(query vertex, data vertex)` pairs, in
/// adjacency order.
pub fn maximally_matchable_edges(
    b: &LocalBipartiteGraph,
    matching: &Matching,
) -> Vec<(VertexId, VertexId)> {
    let mask = maximally_matchable_mask(b, matching);
    let mut out = Vec::new();
    for (l, list) in b.adj.iter().enumerate() {
        for (i, &r) in list.iter().enumerate() {
            if mask[l][i] {
                out.push((b.left[l], b.right[r]));
            }
        }
    }
    out
}

/// Kosaraju's algorithm with explicit stacks; returns a component id per node.
fn strongly_connected_components(fwd: &[Vec<u32>]) -> Vec<u32> {
    let n = fwd.len();
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (x, outs) in fwd.iter().enumerate() {
        for &y in outs {
            rev[y as usize].push(x as u32);
        }
    }
    // Pass 1: finish order on the forward graph.
    let mut visited = vec![false; n];
    let mut order: Vec<u32> = Vec::with_capacity(n);
    for s in 0..n {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut stack: Vec<(u32, usize)> = vec![(s as u32, 0)];
        while let Some(&mut (x, ref mut i)) = stack.last_mut() {
            if *i < fwd[x as usize].len() {
                let y = fwd[x as usize][*i];
                *i += 1;
                if !visited[y as usize] {
                    visited[y as usize] = true;
                    stack.push((y, 0));
                }
            } else {
                order.push(x);
                stack.pop();
            }
        }
    }
    // Pass 2: components on the reverse graph in reverse finish order.
    let mut component = vec![u32::MAX; n];
    let mut current = 0;
    for &s in order.iter().rev() {
        if component[s as usize] != u32::MAX {
            continue;
        }
        component[s as usize] = current;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &y in &rev[x as usize] {
                if component[y as usize] == u32::MAX {
                    component[y as usize] = current;
                    stack.push(y);
                }
            }
        }
        current += 1;
    }
    component
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nl: usize, nr: usize, edges: &[(usize, usize)]) -> LocalBipartiteGraph {
        let mut adj = vec![Vec::new(); nl];
        for &(l, r) in edges {
            adj[l].push(r);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        LocalBipartiteGraph {
            left: (0..nl as u32).collect(),
            right: (100..100 + nr as u32).collect(),
            adj,
        }
    }

    /// All matchings by brute force: which edges appear in some maximum one.
    fn brute_force(b: &LocalBipartiteGraph) -> (usize, Vec<(usize, usize)>) {
        fn go(
            b: &LocalBipartiteGraph,
            l: usize,
            used: &mut Vec<bool>,
            picked: &mut Vec<(usize, usize)>,
            best: &mut usize,
            winners: &mut std::collections::BTreeSet<Vec<(usize, usize)>>,
        ) {
            if l == b.left.len() {
                match picked.len().cmp(best) {
                    std::cmp::Ordering::Greater => {
                        *best = picked.len();
                        winners.clear();
                        winners.insert(picked.clone());
                    }
                    std::cmp::Ordering::Equal => {
                        winners.insert(picked.clone());
                    }
                    std::cmp::Ordering::Less => {}
                }
                return;
            }
            go(b, l + 1, used, picked, best, winners); // leave l unmatched
            for &r in &b.adj[l] {
                if !used[r] {
                    used[r] = true;
                    picked.push((l, r));
                    go(b, l + 1, used, picked, best, winners);
                    picked.pop();
                    used[r] = false;
                }
            }
        }
        let mut used = vec![false; b.right.len()];
        let mut picked = Vec::new();
        let mut best = 0;
        let mut winners = std::collections::BTreeSet::new();
        go(b, 0, &mut used, &mut picked, &mut best, &mut winners);
        let mut edges: std::collections::BTreeSet<(usize, usize)> = Default::default();
        for w in &winners {
            edges.extend(w.iter().copied());
        }
        (best, edges.into_iter().collect())
    }

    fn matchable_pairs(b: &LocalBipartiteGraph) -> (usize, Vec<(usize, usize)>) {
        let m = max_bipartite_matching(b);
        let mask = maximally_matchable_mask(b, &m);
        let mut out = Vec::new();
        for (l, list) in b.adj.iter().enumerate() {
            for (i, &r) in list.iter().enumerate() {
                if mask[l][i] {
                    out.push((l, r));
                }
            }
        }
        (m.size, out)
    }

    #[test]
    fn forced_pair_excludes_alternative() {
        // left a has {x,y}, left b only {x}: any maximum matching uses (b,x)
        // and (a,y); the edge (a,x) belongs to none.
        let b = graph(2, 2, &[(0, 0), (0, 1), (1, 0)]);
        let (size, pairs) = matchable_pairs(&b);
        assert_eq!(size, 2);
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn perfect_square_keeps_all_edges() {
        let b = graph(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let (size, pairs) = matchable_pairs(&b);
        assert_eq!(size, 2);
        assert_eq!(pairs.len(), 4); // alternating cycle keeps both matchings alive
    }

    #[test]
    fn shared_pool_starves_third_vertex() {
        // lefts 0 and 1 compete for {0,1}; left 2 additionally owns right 2.
        // Edges (2,0) and (2,1) can't be in any maximum matching.
        let b = graph(3, 4, &[(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]);
        let (size, pairs) = matchable_pairs(&b);
        assert_eq!(size, 3);
        assert_eq!(pairs, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn uncovered_left_side_reported_by_size() {
        let b = graph(3, 2, &[(0, 0), (1, 0), (1, 1), (2, 1)]);
        let m = max_bipartite_matching(&b);
        assert_eq!(m.size, 2);
    }

    #[test]
    fn left_vertex_with_no_edges() {
        let b = graph(2, 1, &[(0, 0)]);
        let (size, pairs) = matchable_pairs(&b);
        assert_eq!(size, 1);
        assert_eq!(pairs, vec![(0, 0)]);
    }

    #[test]
    fn free_right_vertex_enables_swap() {
        // M = {(0,0)}; right 1 stays free, so (0,1) is also matchable.
        let b = graph(1, 2, &[(0, 0), (0, 1)]);
        let (_, pairs) = matchable_pairs(&b);
        assert_eq!(pairs, vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn agrees_with_brute_force_on_randoms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let nl = rng.gen_range(1..=5);
            let nr = rng.gen_range(1..=5);
            let p = rng.gen_range(0.15..0.85);
            let mut edges = Vec::new();
            for l in 0..nl {
                for r in 0..nr {
                    if rng.gen_bool(p) {
                        edges.push((l, r));
                    }
                }
            }
            let b = graph(nl, nr, &edges);
            let (size, pairs) = matchable_pairs(&b);
            let (bsize, bpairs) = brute_force(&b);
            assert_eq!(size, bsize);
            assert_eq!(pairs, bpairs, "nl={nl} nr={nr} edges={edges:?}");
        }
    }
}
