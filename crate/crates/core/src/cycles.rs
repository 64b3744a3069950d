//! Per-edge triangle and four-cycle indexes.
//!
//! For an edge `(a, b)` the index records which local cycles it participates
//! in:
//!
//! * triangles: every apex `c` with `(a, c)` and `(b, c)` edges;
//! * four-cycles: every opposite edge `(c, d)` such that `a-b-c-d-a` is a
//!   cycle on four distinct vertices (`c` adjacent to `b`, `d` adjacent to
//!   `a`).
//!
//! Each four-cycle is stored once per participating edge, oriented by cycle
//! order relative to the canonical `(min, max)` form of the base edge, so a
//! consumer can pair opposite endpoints consistently. Construction refuses to
//! keep an index whose total cycle count exceeds its cap; the corresponding
//! safety checks then degrade to no-ops.

use std::collections::HashMap;

use crate::graph::{LabeledGraph, VertexId};

type Edge = (VertexId, VertexId);

#[derive(Debug, Clone)]
pub struct CycleIndex {
    triangles_enabled: bool,
    four_cycles_enabled: bool,
    triangle_apexes: HashMap<Edge, Vec<VertexId>>,
    four_cycle_edges: HashMap<Edge, Vec<Edge>>,
    total_triangles: u64,
    total_four_cycles: u64,
}

fn canonical(a: VertexId, b: VertexId) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CycleIndex {
    pub fn triangles_enabled(&self) -> bool {
        self.triangles_enabled
    }

    pub fn four_cycles_enabled(&self) -> bool {
        self.four_cycles_enabled
    }

    /// Total number of distinct triangles in the graph.
    pub fn total_triangles(&self) -> u64 {
        self.total_triangles
    }

    /// Total number of distinct four-cycles in the graph.
    pub fn total_four_cycles(&self) -> u64 {
        self.total_four_cycles
    }

    /// Triangle apexes of edge `(a, b)`, sorted ascending. Empty when the
    /// index is disabled or the edge closes no triangle.
    pub fn triangle_apexes(&self, a: VertexId, b: VertexId) -> &[VertexId] {
        self.triangle_apexes.get(&canonical(a, b)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn triangle_count(&self, a: VertexId, b: VertexId) -> usize {
        self.triangle_apexes(a, b).len()
    }

    /// Opposite edges of the four-cycles through `(a, b)`, oriented for the
    /// argument order: each returned `(c, d)` has `c` adjacent to `b` and `d`
    /// adjacent to `a`.
    pub fn four_cycle_opposites(
        &self,
        a: VertexId,
        b: VertexId,
    ) -> impl Iterator<Item = Edge> + '_ {
        let stored = self.four_cycle_edges.get(&canonical(a, b)).map(Vec::as_slice).unwrap_or(&[]);
        let swap = a > b;
        stored.iter().map(move |&(c, d)| if swap { (d, c) } else { (c, d) })
    }

    pub fn four_cycle_count(&self, a: VertexId, b: VertexId) -> usize {
        self.four_cycle_edges.get(&canonical(a, b)).map(Vec::len).unwrap_or(0)
    }
}

/// Builds both cycle indexes for `g`. If the total triangle (resp.
/// four-cycle) count exceeds `triangle_cap` (resp. `four_cycle_cap`), that
/// index is disabled and dropped; totals are still reported.
pub fn build_cycle_index(g: &LabeledGraph, triangle_cap: u64, four_cycle_cap: u64) -> CycleIndex {
    let mut triangle_apexes = HashMap::new();
    let mut apex_entries = 0u64;
    for (a, b) in g.edges() {
        let apexes = intersect_sorted(g.neighbors(a), g.neighbors(b));
        if !apexes.is_empty() {
            apex_entries += apexes.len() as u64;
            triangle_apexes.insert((a, b), apexes);
        }
    }
    // Every triangle appears once per participating edge.
    let total_triangles = apex_entries / 3;

    let mut four_cycle_edges = HashMap::new();
    let mut opposite_entries = 0u64;
    for (a, b) in g.edges() {
        let mut opposites = Vec::new();
        for &c in g.neighbors(b) {
            if c == a {
                continue;
            }
            for &d in g.neighbors(a) {
                if d == b || d == c {
                    continue;
                }
                if g.has_edge(c, d) {
                    opposites.push((c, d));
                }
            }
        }
        if !opposites.is_empty() {
            opposite_entries += opposites.len() as u64;
            four_cycle_edges.insert((a, b), opposites);
        }
    }
    let total_four_cycles = opposite_entries / 4;

    let triangles_enabled = total_triangles <= triangle_cap;
    if !triangles_enabled {
        triangle_apexes.clear();
    }
    let four_cycles_enabled = total_four_cycles <= four_cycle_cap;
    if !four_cycles_enabled {
        four_cycle_edges.clear();
    }

    CycleIndex {
        triangles_enabled,
        four_cycles_enabled,
        triangle_apexes,
        four_cycle_edges,
        total_triangles,
        total_four_cycles,
    }
}

fn intersect_sorted(xs: &[VertexId], ys: &[VertexId]) -> Vec<VertexId> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        match xs[i].cmp(&ys[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(xs[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
