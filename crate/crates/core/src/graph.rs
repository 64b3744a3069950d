//! Vertex-labeled undirected simple graphs.
//!
//! Graphs are stored as sorted adjacency lists with per-vertex label-degree
//! statistics. The text format is line oriented:
//!
//! ```text
//! # comment
//! t <num_vertices> <num_edges>
//! v <vertex_id> <label> [ignored...]
//! e <src> <dst>
//! ```
//!
//! Vertex ids must lie in `0..num_vertices`. A trailing field on `v` lines
//! (some corpora emit the degree there) is ignored. Duplicate edge lines and
//! both orientations of the same edge are deduplicated; self-loops are
//! rejected.

use std::collections::HashMap;
use std::fmt;
use std::io;
use std::path::Path;

pub type VertexId = u32;
pub type LabelId = u32;

/// Undirected simple graph with one integer label per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: Vec<LabelId>,
    adjacency: Vec<Vec<VertexId>>,
    /// Per vertex: `(label, count)` pairs sorted by label, counting neighbors.
    label_degrees: Vec<Vec<(LabelId, u32)>>,
    edge_count: usize,
    max_degree: u32,
    degeneracy: u32,
}

/// Structural errors raised when assembling a graph from parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    SelfLoop(VertexId),
    VertexOutOfRange { vertex: u64, vertex_count: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::SelfLoop(v) => write!(f, "self-loop at vertex {v}"),
            GraphError::VertexOutOfRange { vertex, vertex_count } => {
                write!(f, "vertex {vertex} out of range (graph has {vertex_count} vertices)")
            }
        }
    }
}

impl std::error::Error for GraphError {}

impl LabeledGraph {
    /// Builds a graph from labels and an edge list. Duplicate edges (in either
    /// orientation) are merged; self-loops are an error.
    pub fn new(labels: Vec<LabelId>, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            for v in [a, b] {
                if v as usize >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v as u64, vertex_count: n });
                }
            }
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        edge_count /= 2;
        let label_degrees = compute_label_degrees(&labels, &adjacency);
        let max_degree = adjacency.iter().map(|l| l.len() as u32).max().unwrap_or(0);
        let degeneracy = compute_degeneracy(&adjacency);
        Ok(LabeledGraph { labels, adjacency, label_degrees, edge_count, max_degree, degeneracy })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn label(&self, v: VertexId) -> LabelId {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.labels
    }

    /// Neighbors of `v`, sorted strictly increasing.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.adjacency[v as usize].len() as u32
    }

    /// Number of neighbors of `v` carrying label `l`.
    pub fn label_degree(&self, v: VertexId, l: LabelId) -> u32 {
        let ld = &self.label_degrees[v as usize];
        match ld.binary_search_by_key(&l, |&(lbl, _)| lbl) {
            Ok(i) => ld[i].1,
            Err(_) => 0,
        }
    }

    /// All `(label, count)` pairs for `v`'s neighborhood, sorted by label.
    pub fn label_degree_profile(&self, v: VertexId) -> &[(LabelId, u32)] {
        &self.label_degrees[v as usize]
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Degeneracy: the largest minimum degree over all subgraphs, computed by
    /// min-degree peeling. Always at most `max_degree`.
    pub fn degeneracy(&self) -> u32 {
        self.degeneracy
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    /// All edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| {
                let a = a as VertexId;
                list.iter().copied().filter(move |&b| a < b).map(move |b| (a, b))
            })
    }

    /// True when every vertex is reachable from vertex 0 (vacuously true for
    /// the empty graph).
    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut visited = 1usize;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    visited += 1;
                    stack.push(w);
                }
            }
        }
        visited == n
    }

    /// Serializes to the `t`/`v`/`e` text format; `load_graph` round-trips it.
    pub fn to_text(&self) -> String {
        use fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "t {} {}", self.vertex_count(), self.edge_count);
        for (v, &l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "v {v} {l}");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "e {a} {b}");
        }
        out
    }
}

fn compute_label_degrees(labels: &[LabelId], adjacency: &[Vec<VertexId>]) -> Vec<Vec<(LabelId, u32)>> {
    adjacency
        .iter()
        .map(|list| {
            let mut pairs: Vec<(LabelId, u32)> = Vec::new();
            let mut sorted: Vec<LabelId> = list.iter().map(|&w| labels[w as usize]).collect();
            sorted.sort_unstable();
            for l in sorted {
                match pairs.last_mut() {
                    Some(last) if last.0 == l => last.1 += 1,
                    _ => pairs.push((l, 1)),
                }
            }
            pairs
        })
        .collect()
}

/// Min-degree peeling. Returns the maximum degree observed at removal time.
fn compute_degeneracy(adjacency: &[Vec<VertexId>]) -> u32 {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = adjacency.len();
    if n == 0 {
        return 0;
    }
    let mut degree: Vec<u32> = adjacency.iter().map(|l| l.len() as u32).collect();
    let mut removed = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(u32, u32)>> =
        degree.iter().enumerate().map(|(v, &d)| Reverse((d, v as u32))).collect();
    let mut degeneracy = 0;
    while let Some(Reverse((d, v))) = heap.pop() {
        let v = v as usize;
        if removed[v] || d != degree[v] {
            continue; // stale heap entry
        }
        removed[v] = true;
        degeneracy = degeneracy.max(d);
        for &w in &adjacency[v] {
            let w = w as usize;
            if !removed[w] {
                degree[w] -= 1;
                heap.push(Reverse((degree[w], w as u32)));
            }
        }
    }
    degeneracy
}

/// Maps arbitrary label tokens to dense integer ids, in first-appearance
/// order. Share one interner across the data and query graph loads so both
/// sides agree on label ids.
#[derive(Debug, Default, Clone)]
pub struct LabelInterner {
    tokens: Vec<String>,
    index: HashMap<String, LabelId>,
}

impl LabelInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> LabelId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len() as LabelId;
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    /// Token for an id, in the order ids were assigned.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Errors from the text loader, with 1-based line numbers where applicable.
#[derive(Debug)]
pub enum ParseError {
    Io(io::Error),
    Line { line: usize, message: String },
    MissingLabels { first_missing: VertexId },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Io(e) => write!(f, "io error: {e}"),
            ParseError::Line { line, message } => write!(f, "line {line}: {message}"),
            ParseError::MissingLabels { first_missing } => {
                write!(f, "vertex {first_missing} has no `v` line")
            }
        }
    }
}

impl std::error::Error for ParseError {}

impl From<io::Error> for ParseError {
    fn from(e: io::Error) -> Self {
        ParseError::Io(e)
    }
}

fn line_err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Line { line, message: message.into() }
}

/// Parses the text format. Labels must be non-negative integers; use
/// [`load_graph_interned`] for corpora with arbitrary label tokens.
pub fn load_graph(text: &str) -> Result<LabeledGraph, ParseError> {
    parse_graph(text, &mut None)
}

/// Like [`load_graph`], but maps every label token (numeric or not) through
/// `interner`, so files with string labels load consistently.
pub fn load_graph_interned(
    text: &str,
    interner: &mut LabelInterner,
) -> Result<LabeledGraph, ParseError> {
    let mut slot = Some(interner);
    parse_graph_dyn(text, &mut slot)
}

/// Reads and parses a graph file.
pub fn load_graph_file(path: impl AsRef<Path>) -> Result<LabeledGraph, ParseError> {
    let text = std::fs::read_to_string(path)?;
    load_graph(&text)
}

fn parse_graph(
    text: &str,
    interner: &mut Option<&mut LabelInterner>,
) -> Result<LabeledGraph, ParseError> {
    parse_graph_dyn(text, interner)
}

fn parse_graph_dyn(
    text: &str,
    interner: &mut Option<&mut LabelInterner>,
) -> Result<LabeledGraph, ParseError> {
    let mut vertex_count: Option<usize> = None;
    let mut labels: Vec<Option<LabelId>> = Vec::new();
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let tag = fields.next().unwrap();
        match tag {
            "t" => {
                if vertex_count.is_some() {
                    return Err(line_err(line_no, "duplicate `t` header"));
                }
                let nv: usize = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| line_err(line_no, "header needs `t <vertices> <edges>`"))?;
                let _ne: usize = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| line_err(line_no, "header needs `t <vertices> <edges>`"))?;
                labels = vec![None; nv];
                vertex_count = Some(nv);
            }
            "v" => {
                let n = vertex_count.ok_or_else(|| line_err(line_no, "`v` before `t` header"))?;
                let id: u64 = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| line_err(line_no, "vertex line needs `v <id> <label>`"))?;
                if id >= n as u64 {
                    return Err(line_err(line_no, format!("vertex id {id} out of range 0..{n}")));
                }
                let token = fields
                    .next()
                    .ok_or_else(|| line_err(line_no, "vertex line needs `v <id> <label>`"))?;
                let label = match interner {
                    Some(intern) => intern.intern(token),
                    None => token.parse::<LabelId>().map_err(|_| {
                        line_err(line_no, format!("label `{token}` is not a non-negative integer"))
                    })?,
                };
                // A trailing degree field, if present, is ignored.
                if labels[id as usize].replace(label).is_some() {
                    return Err(line_err(line_no, format!("vertex {id} defined twice")));
                }
            }
            "e" => {
                let n = vertex_count.ok_or_else(|| line_err(line_no, "`e` before `t` header"))?;
                let mut endpoint = |what: &str| -> Result<VertexId, ParseError> {
                    let id: u64 = fields
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| line_err(line_no, format!("edge line needs `e <src> <dst>`, missing {what}")))?;
                    if id >= n as u64 {
                        return Err(line_err(line_no, format!("vertex id {id} out of range 0..{n}")));
                    }
                    Ok(id as VertexId)
                };
                let a = endpoint("src")?;
                let b = endpoint("dst")?;
                if fields.next().is_some() {
                    return Err(line_err(line_no, "edge line has extra fields"));
                }
                if a == b {
                    return Err(line_err(line_no, format!("self-loop at vertex {a}")));
                }
                edges.push((a, b));
            }
            _ => return Err(line_err(line_no, format!("unknown line tag `{tag}`"))),
        }
    }

    if vertex_count.is_none() {
        return Err(line_err(1, "missing `t <vertices> <edges>` header"));
    }
    let mut resolved = Vec::with_capacity(labels.len());
    for (v, l) in labels.iter().enumerate() {
        match l {
            Some(l) => resolved.push(*l),
            None => return Err(ParseError::MissingLabels { first_missing: v as VertexId }),
        }
    }
    LabeledGraph::new(resolved, &edges).map_err(|e| line_err(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: usize) -> LabeledGraph {
        let mut edges = Vec::new();
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                edges.push((a, b));
            }
        }
        LabeledGraph::new(vec![0; n], &edges).unwrap()
    }

    #[test]
    fn minimal_two_vertex_graph() {
        let g = load_graph("t 2 1\nv 0 0\nv 1 1\ne 0 1\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.label(0), 0);
        assert_eq!(g.label(1), 1);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.label_degree(0, 1), 1);
        assert_eq!(g.label_degree(0, 0), 0);
    }

    #[test]
    fn k5_statistics() {
        let g = k(5);
        assert_eq!(g.edge_count(), 10);
        assert_eq!(g.max_degree(), 4);
        assert_eq!(g.degeneracy(), 4);
        assert_eq!(g.label_degree(0, 0), 4);
        assert!(g.is_connected());
    }

    #[test]
    fn degeneracy_of_tree_is_one() {
        // star plus a pendant path
        let g = LabeledGraph::new(vec![0; 6], &[(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)]).unwrap();
        assert_eq!(g.degeneracy(), 1);
        assert_eq!(g.max_degree(), 3);
    }

    #[test]
    fn degeneracy_of_cycle_is_two() {
        let g = LabeledGraph::new(vec![0; 6], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)])
            .unwrap();
        assert_eq!(g.degeneracy(), 2);
    }

    #[test]
    fn self_loop_rejected_with_line_number() {
        let err = load_graph("t 2 1\nv 0 0\nv 1 0\ne 1 1\n").unwrap_err();
        match err {
            ParseError::Line { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("self-loop"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn out_of_range_vertex_rejected() {
        let err = load_graph("t 2 1\nv 0 0\nv 1 0\ne 0 2\n").unwrap_err();
        match err {
            ParseError::Line { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("out of range"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_edges_deduplicated() {
        let g = load_graph("t 3 4\nv 0 0\nv 1 0\nv 2 0\ne 0 1\ne 1 0\ne 0 1\ne 1 2\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let g = load_graph("# header\n\nt 2 1\n# vertices\nv 0 3\nv 1 3\n\ne 0 1\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.label(0), 3);
    }

    #[test]
    fn missing_vertex_label_reported() {
        let err = load_graph("t 2 1\nv 0 0\ne 0 1\n").unwrap_err();
        match err {
            ParseError::MissingLabels { first_missing } => assert_eq!(first_missing, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn string_labels_via_interner() {
        let mut interner = LabelInterner::new();
        let g = load_graph_interned("t 2 1\nv 0 person\nv 1 city\ne 0 1\n", &mut interner).unwrap();
        let q = load_graph_interned("t 1 0\nv 0 city\n", &mut interner).unwrap();
        assert_eq!(g.label(0), 0);
        assert_eq!(g.label(1), 1);
        assert_eq!(q.label(0), 1); // same token, same id across files
        assert_eq!(interner.tokens(), &["person".to_string(), "city".to_string()]);
    }

    #[test]
    fn integer_labels_required_without_interner() {
        let err = load_graph("t 1 0\nv 0 person\n").unwrap_err();
        match err {
            ParseError::Line { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn disconnected_graph_detected() {
        let g = LabeledGraph::new(vec![0; 4], &[(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
        let h = LabeledGraph::new(vec![0], &[]).unwrap();
        assert!(h.is_connected());
    }

    #[test]
    fn text_round_trip() {
        let g = LabeledGraph::new(vec![2, 0, 1, 0], &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let reparsed = load_graph(&g.to_text()).unwrap();
        assert_eq!(g, reparsed);
    }
}
