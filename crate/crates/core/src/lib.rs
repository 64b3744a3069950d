//! Subgraph cardinality estimation for vertex-labeled graphs.
//!
//! Given a small connected query graph and a larger data graph, this crate
//! estimates the number of label-preserving embeddings (subgraph
//! isomorphisms) of the query in the data graph. The estimator runs in three
//! stages:
//!
//! 1. **Candidate-space filtering** ([`cs`]): per query vertex, compute a set
//!    of data vertices that could participate in an embedding, connected by
//!    per-edge candidate lists. The space is shrunk by local safety checks
//!    (triangle, four-cycle, and bipartite-matching consistency) under a
//!    penalty-driven refinement schedule.
//! 2. **Spanning-tree sampling** ([`tree`]): choose a low-density spanning
//!    tree of the query, count all tree-consistent assignments exactly by
//!    dynamic programming, then sample them uniformly and test each for full
//!    embedding-ness. An adaptive Clopper-Pearson stopping rule bounds the
//!    number of trials needed for a multiplicative accuracy target.
//! 3. **Stratified fallback** ([`stratified`]): when tree sampling sees too
//!    few successes, a recursive stratified sampler walks the candidate space
//!    directly under an explicit sample budget.
//!
//! An exact backtracking counter ([`oracle`]) provides ground truth at small
//! scale, and [`pipeline`] ties the stages together behind one configuration.

pub mod cs;
pub(crate) mod util;
pub mod cycles;
pub mod graph;
pub mod oracle;
pub mod pipeline;
pub mod stats;
pub mod stratified;
pub mod synth;
pub mod tree;

pub use cs::{build_initial_cs, CandidateSpace, ZeroReason};
pub use cycles::{build_cycle_index, CycleIndex};
pub use graph::{load_graph, LabelInterner, LabeledGraph, ParseError};
pub use pipeline::{
    derive_seed, estimate, q_error, signed_log_q_error, EstimateResult, EstimatorConfig, Method,
    PipelineError, SamplerMode, StageTimings,
};
