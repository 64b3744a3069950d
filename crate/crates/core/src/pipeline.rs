//! End-to-end estimator: filtering, tree sampling, and the stratified
//! fallback behind one configuration struct.
//!
//! [`estimate`] is the production entry point. It owns the control flow —
//! build the candidate space, refine it, sample spanning-tree assignments
//! until the adaptive stopping rule is satisfied, and only if that stage
//! sees too few successes fall back to stratified graph sampling. Any stage
//! that proves the count is zero short-circuits the rest.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cs::refine::{refine_candidate_space, FilterMode, RefineConfig};
use crate::cs::build_initial_cs;
use crate::cycles::{build_cycle_index, CycleIndex};
use crate::graph::LabeledGraph;
use crate::stratified::{candidate_graph_sampling, StratifiedConfig};
use crate::tree::{
    candidate_tree_sampling, choose_spanning_tree, count_candidate_trees, StoppingConfig,
};

/// Which sampling stages may run. `Auto` is the production policy; the other
/// two force a single sampler for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMode {
    /// Tree sampling first, stratified fallback only on early failure.
    Auto,
    /// Tree sampling only; an early failure keeps its (poor) estimate.
    TreeOnly,
    /// Stratified sampling only; the tree stage never runs.
    GraphOnly,
}

/// Every tunable of the estimator, with production defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Significance level of the stopping rule's confidence interval.
    pub alpha: f64,
    /// Multiplicative accuracy target; sampling stops once the interval is
    /// within a factor `c` of the point estimate on both sides.
    pub c: f64,
    /// Refinement runs while the cheapest pending vertex has penalty ≤ tau.
    pub tau: f64,
    /// Refinement degree budget, as a multiple of the query edge count.
    pub budget_multiplier: u32,
    /// Penalty decay applied to neighbors of a refined vertex.
    pub phi: f64,
    /// Global scale for the stratified stage's sample budget.
    pub scale: f64,
    /// Stratified subset-size divisor: each call keeps ~1/strata of a pool.
    pub strata: u64,
    /// Triangle-index size cap; beyond it triangle pruning is disabled.
    pub triangle_cap: u64,
    /// Four-cycle-index size cap; beyond it four-cycle pruning is disabled.
    pub four_cycle_cap: u64,
    /// Trial count at which the early-failure check fires.
    pub early_fail_trials: u64,
    /// Success count at or below which the tree stage gives up.
    pub early_fail_successes: u64,
    /// Hard ceiling on tree-sampling trials.
    pub trial_cap: u64,
    /// Master RNG seed; identical inputs and seed reproduce the result.
    pub seed: u64,
    /// Pruning conditions used during refinement.
    pub filter: FilterMode,
    /// Stage policy (see [`SamplerMode`]).
    pub mode: SamplerMode,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            alpha: 0.05,
            c: 1.25,
            tau: 0.9,
            budget_multiplier: 5,
            phi: 2.0 / 3.0,
            scale: 100_000.0,
            strata: 4,
            triangle_cap: 10_000_000_000,
            four_cycle_cap: 10_000_000_000,
            early_fail_trials: 50_000,
            early_fail_successes: 10,
            trial_cap: 400_000,
            seed: 0,
            filter: FilterMode::Full,
            mode: SamplerMode::Auto,
        }
    }
}

/// Which stage produced the final number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Tree sampling satisfied the stopping rule (or was forced).
    Tree,
    /// Stratified fallback after the tree stage early-failed (or was forced).
    Graph,
    /// A stage proved the count is exactly zero.
    ZeroShortcut,
}

/// Wall-clock milliseconds per stage; stages that never ran stay 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub build_ms: f64,
    pub refine_ms: f64,
    pub tree_ms: f64,
    pub graph_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.build_ms + self.refine_ms + self.tree_ms + self.graph_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimate: f64,
    pub method: Method,
    pub tree_trials: u64,
    pub tree_successes: u64,
    pub graph_samples_used: u64,
    pub timings: StageTimings,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineError {
    /// Embedding counts of a disconnected pattern decompose per component;
    /// the estimator only handles connected queries.
    DisconnectedQuery,
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PipelineError::DisconnectedQuery => {
                write!(f, "query graph is not connected; estimate each component separately")
            }
        }
    }
}

impl std::error::Error for PipelineError {}

/// Estimates the number of embeddings of `q` in `g`.
///
/// `data_cycles` is the data graph's triangle/four-cycle index, built once
/// per data graph (via [`build_cycle_index`]) and shared across queries; the
/// query's own index is cheap and built here per call.
pub fn estimate(
    q: &LabeledGraph,
    g: &LabeledGraph,
    data_cycles: &CycleIndex,
    config: &EstimatorConfig,
) -> Result<EstimateResult, PipelineError> {
    if q.vertex_count() == 0 || !q.is_connected() {
        return Err(PipelineError::DisconnectedQuery);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut timings = StageTimings::default();
    let zero = |timings: StageTimings| EstimateResult {
        estimate: 0.0,
        method: Method::ZeroShortcut,
        tree_trials: 0,
        tree_successes: 0,
        graph_samples_used: 0,
        timings,
        seed: config.seed,
    };

    let started = Instant::now();
    let query_cycles = build_cycle_index(q, config.triangle_cap, config.four_cycle_cap);
    let mut cs = match build_initial_cs(q, g) {
        Ok(cs) => cs,
        Err(_) => {
            timings.build_ms = millis_since(started);
            return Ok(zero(timings));
        }
    };
    timings.build_ms = millis_since(started);

    let started = Instant::now();
    let refine_config = RefineConfig {
        phi: config.phi,
        tau: config.tau,
        budget_multiplier: config.budget_multiplier,
        filter: config.filter,
    };
    let refined = refine_candidate_space(&mut cs, q, &query_cycles, data_cycles, &refine_config);
    timings.refine_ms = millis_since(started);
    if refined.is_err() {
        return Ok(zero(timings));
    }

    let mut tree_trials = 0;
    let mut tree_successes = 0;
    if config.mode != SamplerMode::GraphOnly {
        let started = Instant::now();
        let tree = match choose_spanning_tree(&cs) {
            Ok(tree) => tree,
            Err(_) => {
                timings.tree_ms = millis_since(started);
                return Ok(zero(timings));
            }
        };
        let table = count_candidate_trees::<f64>(&cs, &tree);
        if table.total <= 0.0 {
            timings.tree_ms = millis_since(started);
            return Ok(zero(timings));
        }
        let stopping = StoppingConfig {
            alpha: config.alpha,
            c: config.c,
            early_fail_trials: config.early_fail_trials,
            early_fail_successes: config.early_fail_successes,
            trial_cap: config.trial_cap,
            ..Default::default()
        };
        let outcome = candidate_tree_sampling(&cs, &tree, &table, &stopping, &mut rng);
        timings.tree_ms = millis_since(started);
        tree_trials = outcome.trials;
        tree_successes = outcome.successes;
        let fall_back = outcome.early_fail && config.mode == SamplerMode::Auto;
        if !fall_back {
            return Ok(EstimateResult {
                estimate: outcome.estimate,
                method: Method::Tree,
                tree_trials,
                tree_successes,
                graph_samples_used: 0,
                timings,
                seed: config.seed,
            });
        }
    }

    let started = Instant::now();
    let stratified = StratifiedConfig { k: config.strata, scale: config.scale };
    let (estimate, samples_used) =
        candidate_graph_sampling(&cs, tree_successes, &stratified, &mut rng);
    timings.graph_ms = millis_since(started);
    Ok(EstimateResult {
        estimate,
        method: Method::Graph,
        tree_trials,
        tree_successes,
        graph_samples_used: samples_used,
        timings,
        seed: config.seed,
    })
}

fn millis_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Multiplicative error of `estimate` against `truth`, clamped below at 1 on
/// both sides so zero counts compare sanely; always ≥ 1.
pub fn q_error(estimate: f64, truth: f64) -> f64 {
    let e = estimate.max(1.0);
    let t = truth.max(1.0);
    (e / t).max(t / e)
}

/// Log-scale signed error: positive when overestimating, negative when
/// underestimating, zero when both round up to the same clamped value.
pub fn signed_log_q_error(estimate: f64, truth: f64) -> f64 {
    estimate.max(1.0).log10() - truth.max(1.0).log10()
}

/// Mixes a batch index into a master seed so concurrent queries get
/// independent, reproducible streams (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
