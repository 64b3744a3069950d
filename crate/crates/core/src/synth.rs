//! Synthetic instance generators for tests and benchmarks.

use rand::Rng;

use crate::graph::{LabelId, LabeledGraph, VertexId};

/// Erdős–Rényi graph with labels drawn uniformly from `0..label_count`.
pub fn random_labeled_graph(
    rng: &mut impl Rng,
    n: usize,
    edge_prob: f64,
    label_count: u32,
) -> LabeledGraph {
    let labels: Vec<LabelId> = (0..n).map(|_| rng.gen_range(0..label_count)).collect();
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.gen_bool(edge_prob) {
                edges.push((a, b));
            }
        }
    }
    LabeledGraph::new(labels, &edges).expect("generator produces valid edges")
}

/// Connected graph on `n` vertices: a random attachment tree plus independent
/// extra edges with probability `extra_edge_prob`. Labels uniform in
/// `0..label_count`.
pub fn random_connected_query(
    rng: &mut impl Rng,
    n: usize,
    extra_edge_prob: f64,
    label_count: u32,
) -> LabeledGraph {
    assert!(n >= 1);
    let labels: Vec<LabelId> = (0..n).map(|_| rng.gen_range(0..label_count)).collect();
    let mut edges = Vec::new();
    for v in 1..n as u32 {
        let parent = rng.gen_range(0..v);
        edges.push((parent, v));
    }
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if !edges.contains(&(a, b)) && rng.gen_bool(extra_edge_prob) {
                edges.push((a, b));
            }
        }
    }
    LabeledGraph::new(labels, &edges).expect("generator produces valid edges")
}

/// Extracts a connected pattern from `g`: picks a random connected set of
/// `n` vertices by BFS-style growth and keeps each induced edge beyond a
/// spanning tree with probability `keep_extra_prob`. The pattern inherits the
/// labels of the extracted vertices, so `g` contains at least one embedding
/// of it. Returns `None` when `g` has no connected set of `n` vertices
/// reachable from the chosen start.
pub fn extract_query(
    rng: &mut impl Rng,
    g: &LabeledGraph,
    n: usize,
    keep_extra_prob: f64,
) -> Option<LabeledGraph> {
    assert!(n >= 1);
    if g.vertex_count() < n {
        return None;
    }
    let start = rng.gen_range(0..g.vertex_count() as u32);
    let mut chosen: Vec<VertexId> = vec![start];
    let mut frontier: Vec<VertexId> = g.neighbors(start).to_vec();
    while chosen.len() < n {
        if frontier.is_empty() {
            return None;
        }
        let pick = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        if chosen.contains(&pick) {
            continue;
        }
        chosen.push(pick);
        for &w in g.neighbors(pick) {
            if !chosen.contains(&w) && !frontier.contains(&w) {
                frontier.push(w);
            }
        }
    }
    // Map data ids to pattern ids in discovery order.
    let index_of = |v: VertexId| chosen.iter().position(|&c| c == v).unwrap() as VertexId;
    let labels: Vec<LabelId> = chosen.iter().map(|&v| g.label(v)).collect();
    let mut induced: Vec<(VertexId, VertexId)> = Vec::new();
    for (i, &v) in chosen.iter().enumerate() {
        for &w in g.neighbors(v) {
            if let Some(j) = chosen.iter().position(|&c| c == w) {
                if i < j {
                    induced.push((i as VertexId, index_of(chosen[j])));
                }
            }
        }
    }
    // Keep a spanning tree of the induced subgraph, then a random subset of
    // the remaining edges, so the pattern stays connected but not always
    // induced.
    let mut keep: Vec<(VertexId, VertexId)> = Vec::new();
    let mut component: Vec<usize> = (0..n).collect();
    fn root(component: &mut Vec<usize>, mut x: usize) -> usize {
        while component[x] != x {
            component[x] = component[component[x]];
            x = component[x];
        }
        x
    }
    let mut extras: Vec<(VertexId, VertexId)> = Vec::new();
    for &(a, b) in &induced {
        let (ra, rb) = (root(&mut component, a as usize), root(&mut component, b as usize));
        if ra != rb {
            component[ra] = rb;
            keep.push((a, b));
        } else {
            extras.push((a, b));
        }
    }
    for e in extras {
        if rng.gen_bool(keep_extra_prob) {
            keep.push(e);
        }
    }
    let q = LabeledGraph::new(labels, &keep).expect("extracted pattern is valid");
    if q.is_connected() {
        Some(q)
    } else {
        None
    }
}

/// Path graph with the given labels.
pub fn path_graph(labels: &[LabelId]) -> LabeledGraph {
    let edges: Vec<_> = (1..labels.len() as u32).map(|v| (v - 1, v)).collect();
    LabeledGraph::new(labels.to_vec(), &edges).unwrap()
}

/// Cycle on `n` vertices, all carrying `label`.
pub fn cycle_graph(n: usize, label: LabelId) -> LabeledGraph {
    assert!(n >= 3);
    let mut edges: Vec<_> = (1..n as u32).map(|v| (v - 1, v)).collect();
    edges.push((n as u32 - 1, 0));
    LabeledGraph::new(vec![label; n], &edges).unwrap()
}

/// Complete graph on `n` vertices, all carrying `label`.
pub fn complete_graph(n: usize, label: LabelId) -> LabeledGraph {
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            edges.push((a, b));
        }
    }
    LabeledGraph::new(vec![label; n], &edges).unwrap()
}
