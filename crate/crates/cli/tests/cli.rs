//! End-to-end tests of the `cardest` binary: spawn it, parse its output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const K4: &str = "t 4 6\nv 0 0\nv 1 0\nv 2 0\nv 3 0\ne 0 1\ne 0 2\ne 0 3\ne 1 2\ne 1 3\ne 2 3\n";
const K3: &str = "t 3 3\nv 0 0\nv 1 0\nv 2 0\ne 0 1\ne 1 2\ne 0 2\n";
const TRIANGLE: &str = "t 3 3\nv 0 0\nv 1 0\nv 2 0\ne 0 1\ne 1 2\ne 0 2\n";
const PATH3: &str = "t 3 2\nv 0 0\nv 1 0\nv 2 0\ne 0 1\ne 1 2\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cardest"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {:?}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON record")
}

/// Drops wall-clock fields so runs can be compared for reproducibility.
fn strip_timings(value: &Value) -> Value {
    let mut map = value.as_object().unwrap().clone();
    map.retain(|key, _| !key.ends_with("_ms"));
    Value::Object(map)
}

#[test]
fn estimate_emits_one_wellformed_json_record() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let query = write(dir.path(), "query.graph", TRIANGLE);
    let out = run_ok(bin().args(["estimate", "--data"]).arg(&data).arg("--query").arg(&query));
    let record = stdout_json(&out);
    assert_eq!(record["seed"], 0);
    assert_eq!(record["method"], "tree");
    let estimate = record["estimate"].as_f64().unwrap();
    assert!(estimate > 0.0, "triangle in K4 must not estimate zero");
    assert!(record["tree_trials"].as_u64().unwrap() > 0);
    assert!(record["total_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn estimate_reproduces_everything_but_timings_from_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let query = write(dir.path(), "query.graph", TRIANGLE);
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = run_ok(
            bin()
                .args(["estimate", "--seed", "7", "--data"])
                .arg(&data)
                .arg("--query")
                .arg(&query),
        );
        runs.push(stdout_json(&out));
    }
    assert_eq!(strip_timings(&runs[0]), strip_timings(&runs[1]));
}

#[test]
fn exact_counts_known_instances_in_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = write(dir.path(), "k4.graph", K4);
    let k3 = write(dir.path(), "k3.graph", K3);
    let triangle = write(dir.path(), "triangle.graph", TRIANGLE);
    let path3 = write(dir.path(), "path3.graph", PATH3);

    for extra in [&[][..], &["--use-cs"][..]] {
        let out = run_ok(
            bin().args(["exact", "--data"]).arg(&k4).arg("--query").arg(&triangle).args(extra),
        );
        let record = stdout_json(&out);
        assert_eq!(record["count"], 24, "triangle in K4, flags {extra:?}");
        assert_eq!(record["partial"], false);

        let out = run_ok(
            bin().args(["exact", "--data"]).arg(&k3).arg("--query").arg(&path3).args(extra),
        );
        assert_eq!(stdout_json(&out)["count"], 6, "path3 in K3, flags {extra:?}");
    }
}

#[test]
fn exact_limit_cuts_the_search_short() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let query = write(dir.path(), "query.graph", TRIANGLE);
    let out = run_ok(
        bin()
            .args(["exact", "--limit", "5", "--data"])
            .arg(&data)
            .arg("--query")
            .arg(&query),
    );
    let record = stdout_json(&out);
    assert_eq!(record["count"], 5);
    assert_eq!(record["partial"], true);
}

#[test]
fn disconnected_query_exits_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let query = write(dir.path(), "query.graph", "t 3 1\nv 0 0\nv 1 0\nv 2 0\ne 0 1\n");
    for sub in ["estimate", "exact", "inspect"] {
        let out = bin().args([sub, "--data"]).arg(&data).arg("--query").arg(&query).output().unwrap();
        assert!(!out.status.success(), "{sub} must reject a disconnected query");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains("not connected"), "{sub} stderr: {stderr}");
    }
}

#[test]
fn missing_and_malformed_files_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);

    let out = bin()
        .args(["estimate", "--data"])
        .arg(&data)
        .arg("--query")
        .arg(dir.path().join("absent.graph"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("absent.graph"), "stderr: {stderr}");

    let bad = write(dir.path(), "bad.graph", "t 2 1\nv 0 0\nv 1 0\nz 0 1\n");
    let out = bin().args(["estimate", "--data"]).arg(&data).arg("--query").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 4"), "stderr: {stderr}");
}

#[test]
fn string_labels_work_through_the_shared_dictionary() {
    let dir = tempfile::tempdir().unwrap();
    // A blue-red-green triangle exists exactly once (6 ordered embeddings
    // would need all three labels distinct; here one triangle matches).
    let data = write(
        dir.path(),
        "data.graph",
        "t 4 4\nv 0 blue\nv 1 red\nv 2 green\nv 3 blue\ne 0 1\ne 1 2\ne 0 2\ne 2 3\n",
    );
    let query = write(
        dir.path(),
        "query.graph",
        "t 3 3\nv 0 red\nv 1 green\nv 2 blue\ne 0 1\ne 1 2\ne 0 2\n",
    );
    let out = run_ok(bin().args(["exact", "--data"]).arg(&data).arg("--query").arg(&query));
    assert_eq!(stdout_json(&out)["count"], 1);
}

#[test]
fn zero_count_reports_the_shortcut_method() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let query = write(dir.path(), "query.graph", "t 2 1\nv 0 0\nv 1 9\ne 0 1\n");
    let out = run_ok(bin().args(["estimate", "--data"]).arg(&data).arg("--query").arg(&query));
    let record = stdout_json(&out);
    assert_eq!(record["method"], "zero-shortcut");
    assert_eq!(record["estimate"], 0.0);
}

/// Three queries, truth for two of them: one row keyed by bare file name,
/// one by full path. Checks CSV shape, sorted record order, and the
/// `q_error present iff truth present` rule.
#[test]
fn bench_csv_has_truth_columns_and_sorted_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let queries = dir.path().join("queries");
    std::fs::create_dir(&queries).unwrap();
    write(&queries, "q1.graph", TRIANGLE);
    let q2 = write(&queries, "q2.graph", PATH3);
    write(&queries, "q3.graph", "t 2 1\nv 0 0\nv 1 0\ne 0 1\n");
    // q1 by bare name, q2 by full path, q3 left without truth.
    let truth = write(
        dir.path(),
        "truth.csv",
        &format!("query_path,count\nq1.graph,24\n{},24\n", q2.display()),
    );

    let out = run_ok(
        bin()
            .args(["bench", "--data"])
            .arg(&data)
            .arg("--queries")
            .arg(&queries)
            .arg("--truth")
            .arg(&truth),
    );
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "query");
    let q_error_col = headers.iter().position(|h| h == "q_error").unwrap();
    let truth_col = headers.iter().position(|h| h == "truth").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0][0].ends_with("q1.graph"));
    assert!(rows[1][0].ends_with("q2.graph"));
    assert!(rows[2][0].ends_with("q3.graph"));
    for row in &rows[..2] {
        assert_eq!(&row[truth_col], "24.0");
        assert!(row[q_error_col].parse::<f64>().unwrap() >= 1.0);
    }
    assert_eq!(&rows[2][truth_col], "");
    assert_eq!(&rows[2][q_error_col], "");

    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("queries: 3"), "stderr: {stderr}");
    assert!(stderr.contains("q-error (2 with truth)"), "stderr: {stderr}");
}

#[test]
fn bench_records_are_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let queries = dir.path().join("queries");
    std::fs::create_dir(&queries).unwrap();
    write(&queries, "q1.graph", TRIANGLE);
    write(&queries, "q2.graph", PATH3);
    write(&queries, "q3.graph", K3);

    let mut runs = Vec::new();
    for jobs in ["1", "4"] {
        let out = run_ok(
            bin()
                .args(["bench", "--format", "jsonl", "--seed", "11", "--jobs", jobs, "--data"])
                .arg(&data)
                .arg("--queries")
                .arg(&queries),
        );
        let records: Vec<Value> = String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .map(|line| strip_timings(&serde_json::from_str(line).unwrap()))
            .collect();
        assert_eq!(records.len(), 3);
        runs.push(records);
    }
    assert_eq!(runs[0], runs[1]);
}

/// A bench row must be reproducible by a standalone `estimate` run with the
/// row's derived seed.
#[test]
fn bench_rows_match_standalone_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let queries = dir.path().join("queries");
    std::fs::create_dir(&queries).unwrap();
    let q1 = write(&queries, "q1.graph", PATH3);

    let out = run_ok(
        bin()
            .args(["bench", "--format", "jsonl", "--seed", "3", "--data"])
            .arg(&data)
            .arg("--queries")
            .arg(&queries),
    );
    let row: Value = serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap()).unwrap();
    let derived = row["seed"].as_u64().unwrap();
    assert_eq!(derived, cardest_core::derive_seed(3, 0));

    let out = run_ok(
        bin()
            .args(["estimate", "--seed", &derived.to_string(), "--data"])
            .arg(&data)
            .arg("--query")
            .arg(&q1),
    );
    let single = stdout_json(&out);
    assert_eq!(single["estimate"], row["estimate"]);
    assert_eq!(single["tree_trials"], row["tree_trials"]);
    assert_eq!(single["tree_successes"], row["tree_successes"]);
}

#[test]
fn bench_on_an_empty_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let queries = dir.path().join("queries");
    std::fs::create_dir(&queries).unwrap();
    let out = bin().args(["bench", "--data"]).arg(&data).arg("--queries").arg(&queries).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no query files"));
}

/// Closing the read end mid-stream (as `cardest inspect | head` does) must
/// not spray a panic; the default SIGPIPE disposition kills the process
/// quietly. The complete graph makes the dump far larger than a pipe
/// buffer, so the writer is guaranteed to block until we hang up.
#[cfg(unix)]
#[test]
fn broken_pipe_is_not_a_panic() {
    use std::io::Read;

    let n = 60u32;
    let mut text = format!("t {n} {}\n", n * (n - 1) / 2);
    for v in 0..n {
        text.push_str(&format!("v {v} 0\n"));
    }
    for a in 0..n {
        for b in a + 1..n {
            text.push_str(&format!("e {a} {b}\n"));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", &text);
    let query = write(dir.path(), "query.graph", TRIANGLE);

    let mut child = bin()
        .args(["inspect", "--dump-cs", "--data"])
        .arg(&data)
        .arg("--query")
        .arg(&query)
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdout = child.stdout.take().unwrap();
    let mut first = [0u8; 64];
    stdout.read_exact(&mut first).unwrap();
    drop(stdout); // reader hangs up while the dump is still streaming
    let out = child.wait_with_output().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(!stderr.contains("panic"), "stderr: {stderr}");
}

#[test]
fn inspect_reports_tree_densities_and_total() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.graph", K4);
    let query = write(dir.path(), "query.graph", TRIANGLE);
    let out = run_ok(bin().args(["inspect", "--data"]).arg(&data).arg("--query").arg(&query));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("query: 3 vertices, 3 edges"), "{text}");
    assert!(text.contains("density per query edge:"), "{text}");
    assert!(text.contains("spanning tree: root u"), "{text}");
    assert!(text.contains("tree assignments (exact DP total): 36"), "{text}");
    assert!(!text.contains("C(u0):"), "dump only appears with --dump-cs: {text}");

    let out = run_ok(
        bin().args(["inspect", "--dump-cs", "--data"]).arg(&data).arg("--query").arg(&query),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("C(u0): v0 v1 v2 v3"), "{text}");
}
