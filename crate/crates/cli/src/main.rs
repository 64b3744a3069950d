//! `cardest`: estimate or exactly count subgraph embeddings from the shell.
//!
//! Four subcommands: `estimate` runs the sampling pipeline on one query and
//! prints a JSON record; `exact` runs the backtracking counter; `bench` runs
//! a directory of queries (optionally in parallel) and emits one record per
//! query as CSV or JSON lines plus a q-error summary on standard error;
//! `inspect` dumps the filtered candidate space and the chosen spanning tree
//! for debugging. All numeric output except the `*_ms` timing fields is
//! reproducible from `--seed`.
//!
//! Both graph files are read through one shared label dictionary, so labels
//! may be arbitrary tokens (`v 3 protein`) as long as the query and data
//! files spell them identically.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use cardest_core::cs::refine::{refine_candidate_space, FilterMode, RefineConfig};
use cardest_core::graph::{load_graph_interned, LabelInterner, LabeledGraph};
use cardest_core::oracle::{exact_count, exact_count_with, OracleConfig};
use cardest_core::tree::{choose_spanning_tree, count_candidate_trees};
use cardest_core::{
    build_cycle_index, build_initial_cs, derive_seed, estimate, q_error, signed_log_q_error,
    CandidateSpace, EstimatorConfig, Method, SamplerMode,
};

fn main() {
    // `cardest inspect | head` must exit quietly when the reader hangs up,
    // not panic mid-print: restore the default SIGPIPE disposition.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

#[derive(Parser)]
#[command(
    name = "cardest",
    version,
    about = "Subgraph cardinality estimation over vertex-labeled graphs",
    long_about = "Estimates (or exactly counts) the embeddings of a small connected query \
                  graph in a larger data graph. Graph files use the line-oriented text \
                  format: a `t <vertices> <edges>` header, one `v <id> <label>` line per \
                  vertex, and one `e <src> <dst>` line per edge."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the embedding count of one query; prints a JSON record.
    Estimate(EstimateArgs),
    /// Count embeddings exactly by backtracking; prints a JSON record.
    Exact(ExactArgs),
    /// Run every query file in a directory; records to stdout, summary to stderr.
    Bench(BenchArgs),
    /// Dump the candidate space, densities, and spanning tree for one query.
    Inspect(InspectArgs),
}

/// Estimator tunables, exposed one-to-one as flags. Defaults mirror
/// [`EstimatorConfig::default`].
#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Master RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Significance level of the stopping rule's confidence interval.
    #[arg(long, default_value_t = defaults().alpha)]
    alpha: f64,
    /// Multiplicative accuracy target of the stopping rule.
    #[arg(long, default_value_t = defaults().c)]
    c: f64,
    /// Refinement runs while the cheapest pending vertex has penalty <= tau.
    #[arg(long, default_value_t = defaults().tau)]
    tau: f64,
    /// Refinement degree budget, as a multiple of the query edge count.
    #[arg(long, default_value_t = defaults().budget_multiplier)]
    budget_multiplier: u32,
    /// Penalty decay applied to neighbors of a refined vertex.
    #[arg(long, default_value_t = defaults().phi)]
    phi: f64,
    /// Global scale for the stratified stage's sample budget.
    #[arg(long, default_value_t = defaults().scale)]
    scale: f64,
    /// Stratified subset-size divisor: each call keeps ~1/strata of a pool.
    #[arg(long, default_value_t = defaults().strata)]
    strata: u64,
    /// Triangle-index size cap; beyond it triangle pruning is disabled.
    #[arg(long, default_value_t = defaults().triangle_cap)]
    triangle_cap: u64,
    /// Four-cycle-index size cap; beyond it four-cycle pruning is disabled.
    #[arg(long, default_value_t = defaults().four_cycle_cap)]
    four_cycle_cap: u64,
    /// Trial count at which the tree stage's early-failure check fires.
    #[arg(long, default_value_t = defaults().early_fail_trials)]
    early_fail_trials: u64,
    /// Success count at or below which the tree stage gives up.
    #[arg(long, default_value_t = defaults().early_fail_successes)]
    early_fail_successes: u64,
    /// Hard ceiling on tree-sampling trials.
    #[arg(long, default_value_t = defaults().trial_cap)]
    trial_cap: u64,
    /// Pruning conditions used during refinement.
    #[arg(long, value_enum, default_value_t = FilterArg::Full)]
    filter: FilterArg,
    /// Stage policy: auto falls back to graph sampling on early failure;
    /// tree-only and graph-only force a single sampler.
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
}

fn defaults() -> EstimatorConfig {
    EstimatorConfig::default()
}

impl ConfigArgs {
    fn to_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            alpha: self.alpha,
            c: self.c,
            tau: self.tau,
            budget_multiplier: self.budget_multiplier,
            phi: self.phi,
            scale: self.scale,
            strata: self.strata,
            triangle_cap: self.triangle_cap,
            four_cycle_cap: self.four_cycle_cap,
            early_fail_trials: self.early_fail_trials,
            early_fail_successes: self.early_fail_successes,
            trial_cap: self.trial_cap,
            seed: self.seed,
            filter: self.filter.into(),
            mode: self.mode.into(),
        }
    }

    fn refine_config(&self) -> RefineConfig {
        RefineConfig {
            phi: self.phi,
            tau: self.tau,
            budget_multiplier: self.budget_multiplier,
            filter: self.filter.into(),
        }
    }
}

// clap's ValueEnum can't be derived for the core enums, so mirror them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FilterArg {
    Full,
    NeighborSafety,
}

impl From<FilterArg> for FilterMode {
    fn from(f: FilterArg) -> Self {
        match f {
            FilterArg::Full => FilterMode::Full,
            FilterArg::NeighborSafety => FilterMode::NeighborSafety,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Auto,
    TreeOnly,
    GraphOnly,
}

impl From<ModeArg> for SamplerMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => SamplerMode::Auto,
            ModeArg::TreeOnly => SamplerMode::TreeOnly,
            ModeArg::GraphOnly => SamplerMode::GraphOnly,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Data graph file.
    #[arg(long)]
    data: PathBuf,
    /// Query graph file.
    #[arg(long)]
    query: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct ExactArgs {
    /// Data graph file.
    #[arg(long)]
    data: PathBuf,
    /// Query graph file.
    #[arg(long)]
    query: PathBuf,
    /// Stop once this many embeddings are counted (sets `partial`).
    #[arg(long)]
    limit: Option<u64>,
    /// Give up after this many milliseconds (sets `partial`).
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Filter a candidate space first and search it instead of raw adjacency.
    #[arg(long)]
    use_cs: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Data graph file.
    #[arg(long)]
    data: PathBuf,
    /// Directory of query graph files (every regular file is one query).
    #[arg(long)]
    queries: PathBuf,
    /// CSV of `query_path,count` ground truths; enables the q-error columns.
    /// Rows match a query by full path first, then by file name.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Record format on standard output.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads; 0 means one per core. Records always come out in
    /// sorted file order, independent of this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct InspectArgs {
    /// Data graph file.
    #[arg(long)]
    data: PathBuf,
    /// Query graph file.
    #[arg(long)]
    query: PathBuf,
    /// Also print every candidate set and candidate-neighbor list.
    #[arg(long)]
    dump_cs: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Inspect(args) => cmd_inspect(args),
    }
}

/// Loads the data and query graphs through one shared label dictionary and
/// rejects disconnected queries up front (their counts decompose per
/// component, which no subcommand handles).
fn load_pair(data: &Path, query: &Path) -> Result<(LabeledGraph, LabeledGraph)> {
    let mut interner = LabelInterner::new();
    let g = load_one(data, &mut interner)?;
    let q = load_one(query, &mut interner)?;
    check_connected(&q, query)?;
    Ok((g, q))
}

fn load_one(path: &Path, interner: &mut LabelInterner) -> Result<LabeledGraph> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read graph file {}", path.display()))?;
    load_graph_interned(&text, interner).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn check_connected(q: &LabeledGraph, path: &Path) -> Result<()> {
    if q.vertex_count() == 0 || !q.is_connected() {
        bail!(
            "query graph {} is not connected; estimate each component separately",
            path.display()
        );
    }
    Ok(())
}

/// One `estimate` run as written to standard output. Timings are wall-clock
/// and excluded from the seed-reproducibility guarantee.
#[derive(Serialize)]
struct EstimateRecord {
    data: String,
    query: String,
    estimate: f64,
    method: Method,
    tree_trials: u64,
    tree_successes: u64,
    graph_samples_used: u64,
    build_ms: f64,
    refine_ms: f64,
    tree_ms: f64,
    graph_ms: f64,
    total_ms: f64,
    seed: u64,
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let (g, q) = load_pair(&args.data, &args.query)?;
    let config = args.config.to_config();
    let cycles = build_cycle_index(&g, config.triangle_cap, config.four_cycle_cap);
    let r = estimate(&q, &g, &cycles, &config)?;
    let record = EstimateRecord {
        data: args.data.display().to_string(),
        query: args.query.display().to_string(),
        estimate: r.estimate,
        method: r.method,
        tree_trials: r.tree_trials,
        tree_successes: r.tree_successes,
        graph_samples_used: r.graph_samples_used,
        build_ms: r.timings.build_ms,
        refine_ms: r.timings.refine_ms,
        tree_ms: r.timings.tree_ms,
        graph_ms: r.timings.graph_ms,
        total_ms: r.timings.total_ms(),
        seed: r.seed,
    };
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let (g, q) = load_pair(&args.data, &args.query)?;
    let config = OracleConfig {
        limit: args.limit,
        timeout: args.timeout_ms.map(Duration::from_millis),
        collect_embeddings: None,
    };
    let started = Instant::now();
    let (count, partial, mode) = if args.use_cs {
        match refined_space(&q, &g, &EstimatorConfig::default()) {
            Some(cs) => {
                let r = exact_count_with(&cs, &config);
                (r.count, r.partial, "candidate-space")
            }
            // Filtering alone proved the count is zero.
            None => (BigUint::from(0u32), false, "candidate-space"),
        }
    } else {
        let r = exact_count(&q, &g, &config);
        (r.count, r.partial, "raw")
    };
    // Counts can exceed u64; fall back to a decimal string when they do.
    let count_json = match u64::try_from(&count) {
        Ok(n) => serde_json::Value::from(n),
        Err(_) => serde_json::Value::from(count.to_string()),
    };
    let record = serde_json::json!({
        "data": args.data.display().to_string(),
        "query": args.query.display().to_string(),
        "count": count_json,
        "partial": partial,
        "mode": mode,
        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    println!("{record}");
    Ok(())
}

/// Builds and refines the candidate space; `None` when any stage proves the
/// count is zero.
fn refined_space(
    q: &LabeledGraph,
    g: &LabeledGraph,
    config: &EstimatorConfig,
) -> Option<CandidateSpace> {
    let cycles_q = build_cycle_index(q, config.triangle_cap, config.four_cycle_cap);
    let cycles_g = build_cycle_index(g, config.triangle_cap, config.four_cycle_cap);
    let refine = RefineConfig {
        phi: config.phi,
        tau: config.tau,
        budget_multiplier: config.budget_multiplier,
        filter: config.filter,
    };
    let mut cs = build_initial_cs(q, g).ok()?;
    refine_candidate_space(&mut cs, q, &cycles_q, &cycles_g, &refine).ok()?;
    Some(cs)
}

/// One `bench` row. Optional fields stay empty (CSV) or null (JSON lines)
/// for queries without ground truth.
#[derive(Serialize)]
struct BenchRecord {
    query: String,
    estimate: f64,
    truth: Option<f64>,
    q_error: Option<f64>,
    signed_log_q_error: Option<f64>,
    method: Method,
    tree_trials: u64,
    tree_successes: u64,
    graph_samples_used: u64,
    build_ms: f64,
    refine_ms: f64,
    tree_ms: f64,
    graph_ms: f64,
    total_ms: f64,
    seed: u64,
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let master = args.config.seed;
    let base_config = args.config.to_config();

    // Load everything serially so the shared label dictionary (and thus the
    // output) never depends on --jobs.
    let mut interner = LabelInterner::new();
    let g = load_one(&args.data, &mut interner)?;
    let mut query_files: Vec<PathBuf> = std::fs::read_dir(&args.queries)
        .with_context(|| format!("cannot read query directory {}", args.queries.display()))?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.file_type().map(|t| t.is_file()).unwrap_or(false))
        .map(|entry| entry.path())
        .collect();
    query_files.sort();
    if query_files.is_empty() {
        bail!("no query files in {}", args.queries.display());
    }
    let mut queries = Vec::with_capacity(query_files.len());
    for path in &query_files {
        let q = load_one(path, &mut interner)?;
        check_connected(&q, path)?;
        queries.push(q);
    }
    let truths = match &args.truth {
        Some(path) => Some(TruthTable::load(path)?),
        None => None,
    };

    let cycles = build_cycle_index(&g, base_config.triangle_cap, base_config.four_cycle_cap);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("cannot build worker pool")?;
    let results: Vec<_> = pool.install(|| {
        use rayon::prelude::*;
        queries
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                let config =
                    EstimatorConfig { seed: derive_seed(master, i as u64), ..base_config.clone() };
                estimate(q, &g, &cycles, &config)
            })
            .collect()
    });

    let mut records = Vec::with_capacity(results.len());
    for (path, result) in query_files.iter().zip(results) {
        let r = result.with_context(|| format!("query {}", path.display()))?;
        let truth = truths.as_ref().and_then(|t| t.lookup(path));
        records.push(BenchRecord {
            query: path.display().to_string(),
            estimate: r.estimate,
            truth,
            q_error: truth.map(|t| q_error(r.estimate, t)),
            signed_log_q_error: truth.map(|t| signed_log_q_error(r.estimate, t)),
            method: r.method,
            tree_trials: r.tree_trials,
            tree_successes: r.tree_successes,
            graph_samples_used: r.graph_samples_used,
            build_ms: r.timings.build_ms,
            refine_ms: r.timings.refine_ms,
            tree_ms: r.timings.tree_ms,
            graph_ms: r.timings.graph_ms,
            total_ms: r.timings.total_ms(),
            seed: r.seed,
        });
    }

    match args.format {
        FormatArg::Csv => {
            let mut writer = csv::Writer::from_writer(std::io::stdout().lock());
            for record in &records {
                writer.serialize(record)?;
            }
            writer.flush()?;
        }
        FormatArg::Jsonl => {
            for record in &records {
                println!("{}", serde_json::to_string(record)?);
            }
        }
    }
    eprint!("{}", summarize(&records));
    Ok(())
}

/// Ground-truth counts from a `query_path,count` CSV. A header row is
/// tolerated; counts are read as reals so they may exceed u64.
struct TruthTable {
    by_path: HashMap<String, f64>,
    /// File-name fallback; `None` marks an ambiguous (repeated) name.
    by_name: HashMap<String, Option<f64>>,
}

impl TruthTable {
    fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .with_context(|| format!("cannot read truth file {}", path.display()))?;
        let mut by_path = HashMap::new();
        let mut by_name: HashMap<String, Option<f64>> = HashMap::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.with_context(|| format!("truth file {}", path.display()))?;
            if record.len() < 2 {
                bail!(
                    "truth file {} row {}: expected `query_path,count`",
                    path.display(),
                    row + 1
                );
            }
            let count = match record[1].parse::<f64>() {
                Ok(c) => c,
                Err(_) if row == 0 => continue, // header row
                Err(_) => bail!(
                    "truth file {} row {}: count `{}` is not a number",
                    path.display(),
                    row + 1,
                    &record[1]
                ),
            };
            let key = record[0].to_string();
            let name = Path::new(&key)
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| key.clone());
            by_name.entry(name).and_modify(|slot| *slot = None).or_insert(Some(count));
            by_path.insert(key, count);
        }
        Ok(TruthTable { by_path, by_name })
    }

    fn lookup(&self, query: &Path) -> Option<f64> {
        if let Some(&count) = self.by_path.get(&query.display().to_string()) {
            return Some(count);
        }
        let name = query.file_name()?.to_string_lossy();
        self.by_name.get(name.as_ref()).copied().flatten()
    }
}

/// Boxplot-style q-error summary over the records that have truth, plus
/// method counts, written to standard error.
fn summarize(records: &[BenchRecord]) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let _ = writeln!(out, "queries: {}", records.len());
    let (mut tree, mut graph, mut zero) = (0, 0, 0);
    for r in records {
        match r.method {
            Method::Tree => tree += 1,
            Method::Graph => graph += 1,
            Method::ZeroShortcut => zero += 1,
        }
    }
    let _ = writeln!(out, "methods: tree {tree}, graph {graph}, zero-shortcut {zero}");
    let total_ms: f64 = records.iter().map(|r| r.total_ms).sum();
    let _ = writeln!(out, "pipeline time: {total_ms:.1} ms");

    let mut qs: Vec<f64> = records.iter().filter_map(|r| r.q_error).collect();
    if qs.is_empty() {
        let _ = writeln!(out, "q-error: no ground truth matched; pass --truth for accuracy stats");
        return out;
    }
    qs.sort_by(|a, b| a.total_cmp(b));
    let mean = qs.iter().sum::<f64>() / qs.len() as f64;
    let _ = writeln!(
        out,
        "q-error ({} with truth): mean {:.4} min {:.4} p25 {:.4} median {:.4} p75 {:.4} p95 {:.4} max {:.4}",
        qs.len(),
        mean,
        qs[0],
        quantile(&qs, 0.25),
        quantile(&qs, 0.5),
        quantile(&qs, 0.75),
        quantile(&qs, 0.95),
        qs[qs.len() - 1],
    );
    let signed: Vec<f64> = records.iter().filter_map(|r| r.signed_log_q_error).collect();
    let signed_mean = signed.iter().sum::<f64>() / signed.len() as f64;
    let _ = writeln!(out, "signed log10 q-error: mean {signed_mean:+.4}");
    out
}

/// Empirical quantile with linear interpolation between order statistics;
/// `sorted` must be ascending and non-empty.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn cmd_inspect(args: InspectArgs) -> Result<()> {
    let (g, q) = load_pair(&args.data, &args.query)?;
    let config = &args.config;

    println!(
        "query: {} vertices, {} edges | data: {} vertices, {} edges",
        q.vertex_count(),
        q.edge_count(),
        g.vertex_count(),
        g.edge_count()
    );

    let cycles_q = build_cycle_index(&q, config.triangle_cap, config.four_cycle_cap);
    let cycles_g = build_cycle_index(&g, config.triangle_cap, config.four_cycle_cap);
    let mut cs = match build_initial_cs(&q, &g) {
        Ok(cs) => cs,
        Err(zero) => {
            println!("initial filtering proves the count is 0: {zero}");
            return Ok(());
        }
    };
    let stats = match refine_candidate_space(&mut cs, &q, &cycles_q, &cycles_g, &config.refine_config()) {
        Ok(stats) => stats,
        Err(zero) => {
            println!("refinement proves the count is 0: {zero}");
            return Ok(());
        }
    };
    println!(
        "refinement: {} passes, removed {} candidates and {} candidate edges, degree budget {}/{}",
        stats.passes,
        stats.removed_candidates,
        stats.removed_pairs,
        stats.degree_budget_used,
        stats.degree_budget_limit
    );

    println!("candidates per query vertex:");
    for u in 0..cs.query_vertex_count() {
        println!("  u{u}: {}", cs.candidate_count(u as u32));
    }
    println!("density per query edge:");
    for e in 0..cs.query_edge_count() as u32 {
        let (a, b) = cs.query_edge(e);
        let (pairs, slots) = cs.density(e);
        let ratio = if slots == 0 { 0.0 } else { pairs as f64 / slots as f64 };
        println!("  (u{a},u{b}): {pairs}/{slots} = {ratio:.6}");
    }

    let tree = match choose_spanning_tree(&cs) {
        Ok(tree) => tree,
        Err(zero) => {
            println!("spanning tree proves the count is 0: {zero}");
            return Ok(());
        }
    };
    let edges: Vec<String> = tree
        .bfs_order
        .iter()
        .filter(|&&u| u != tree.root)
        .map(|&u| format!("(u{},u{u})", tree.parent[u as usize]))
        .collect();
    println!("spanning tree: root u{}; edges {}", tree.root, edges.join(" "));

    let table = count_candidate_trees::<BigUint>(&cs, &tree);
    println!("tree assignments (exact DP total): {}", table.total);

    if args.dump_cs {
        print!("{}", cs.dump());
    }
    Ok(())
}
