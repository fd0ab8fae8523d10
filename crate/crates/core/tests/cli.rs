//! CLI contract tests: exit codes, determinism of emitted CSV, and the
//! subcommand surface.

use std::path::Path;
use std::process::{Command, Output};

fn atpf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atpf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn exit_codes() {
    // 0: success
    assert_eq!(atpf(&["bounds", "--n", "3"]).status.code(), Some(0));
    // 2: usage errors (clap)
    assert_eq!(atpf(&["bounds"]).status.code(), Some(2));
    assert_eq!(atpf(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        atpf(&["rank-est", "--det", "2", "--basis", "1,2"]).status.code(),
        Some(2),
        "mutually exclusive sources"
    );
    // 3: numeric/domain failures
    assert_eq!(atpf(&["bounds", "--n", "2", "--k", "1"]).status.code(), Some(3));
    assert_eq!(atpf(&["bounds", "--n", "40"]).status.code(), Some(3));
    assert_eq!(
        atpf(&["rank-est", "--file", "/nonexistent/tensor.txt"]).status.code(),
        Some(3)
    );
}

#[test]
fn bounds_prints_table_and_triviality() {
    let out = atpf(&["bounds", "--n", "3", "--k", "3"]);
    let text = stdout(&out);
    assert!(text.contains("lower 3, upper 5"));
    assert!(text.contains("dim binom(K,N) = 1"));

    let out = atpf(&["bounds", "--n", "20"]);
    assert!(stdout(&out).contains("184756"));

    let out = atpf(&["bounds", "--n", "2", "--k", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("trivial"));
}

#[test]
fn rank_est_deterministic_and_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let args = |path: &Path| {
        vec![
            "rank-est".to_string(),
            "--det".into(),
            "2".into(),
            "--pmax".into(),
            "3".into(),
            "--out".into(),
            path.to_str().unwrap().into(),
        ]
    };
    let run_a = Command::new(env!("CARGO_BIN_EXE_atpf"))
        .args(args(&csv_a))
        .output()
        .unwrap();
    let run_b = Command::new(env!("CARGO_BIN_EXE_atpf"))
        .args(args(&csv_b))
        .output()
        .unwrap();
    assert_eq!(run_a.status.code(), Some(0));
    assert_eq!(run_a.stdout, run_b.stdout, "stdout must be byte-identical");
    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "CSV bodies must be byte-identical");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# lower=2 upper=2 heuristic=true\n"));
    assert!(text.lines().nth(1) == Some("rank,best_residual,restarts_used"));
    assert!(stdout(&run_a).contains("estimated rank: 2"));
}

#[test]
fn rank_est_not_found_is_exit_zero() {
    // rank search that cannot reach the tolerance still exits 0: "not
    // found" is a valid heuristic outcome
    let out = atpf(&[
        "rank-est", "--det", "3", "--pmax", "4", "--restarts", "2", "--max-sweeps", "60",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("not found"));
}

#[test]
fn basis_emits_tensor_text() {
    let out = atpf(&["basis", "--indices", "1,3", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tensor 2 3 3"));
    // lexicographic nonzeros: (1,3)=+1 then (3,1)=-1
    assert!(lines.next().unwrap().starts_with("1 3 1"));
    assert!(lines.next().unwrap().starts_with("3 1 -1"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("det3.txt");
    let out = atpf(&["basis", "--det", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let tensor = atpf::DenseTensor::read_from_path(&path).unwrap();
    let expect = atpf::determinant_tensor(3).unwrap();
    assert_eq!(tensor.max_abs_diff(&expect).unwrap(), 0.0);
}

#[test]
fn roundtrip_command_passes() {
    let out = atpf(&[
        "roundtrip", "--order", "3", "--dim", "4", "--rank", "3", "--seed", "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("roundtrip OK"));
}

#[test]
fn report_emits_bound_table() {
    let out = atpf(&["report", "--nmax", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("n,lower,det_upper,antisym_upper,asymptotic\n"));
    // N=6 row carries the exactly-floored upper bound 500
    let row6 = text.lines().nth(6).unwrap();
    assert!(row6.starts_with("6,20,500,500,"));
}

fn li1_system(dir: &Path) -> String {
    let path = dir.join("li1.txt");
    write(&path, "nucleus 0.0 3.0\nelectrons 1\n");
    path.to_str().unwrap().to_string()
}

#[test]
fn train_zero_iterations_single_row_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.txt");
    write(
        &config,
        "iterations = 0\nrank = 2\nwidth = 5\nhidden_layers = 2\nseed = 1\n",
    );
    let system = li1_system(dir.path());
    let out_dir = dir.path().join("out");
    let out = atpf(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--system",
        &system,
        "--out",
        out_dir.to_str().unwrap(),
        "--subintervals",
        "10",
        "--qpoints",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2); // header + initial point
    assert_eq!(lines[0], "iter,loss,energy,penalty,lr,seconds");
    assert!(lines[1].starts_with("0,"));
    assert!(out_dir.join("loss.svg").exists());
}

/// Strips the wall-time column; everything else must be byte-identical
/// across reruns.
fn strip_seconds(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            match line.rsplit_once(',') {
                Some((rest, _seconds)) => rest.to_string(),
                None => line.to_string(),
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn train_deterministic_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.txt");
    write(
        &config,
        "iterations = 30\neval_stride = 10\nrank = 2\nwidth = 5\nhidden_layers = 2\nseed = 7\n",
    );
    let system = li1_system(dir.path());
    let mut csvs = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("out{run}"));
        let out = atpf(&[
            "train",
            "--config",
            config.to_str().unwrap(),
            "--system",
            &system,
            "--out",
            out_dir.to_str().unwrap(),
            "--subintervals",
            "8",
            "--qpoints",
            "8",
        ]);
        assert_eq!(out.status.code(), Some(0));
        csvs.push(std::fs::read_to_string(out_dir.join("trace.csv")).unwrap());
    }
    assert_eq!(strip_seconds(&csvs[0]), strip_seconds(&csvs[1]));
}

#[test]
fn compare_n1_traces_coincide() {
    // with one electron there are no swap pairs: the penalty is vacuous and
    // the antisymmetrizer is the identity, so the paired traces coincide
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.txt");
    write(
        &config,
        "iterations = 20\neval_stride = 5\nrank = 2\nwidth = 5\nhidden_layers = 2\nbeta = 200\n",
    );
    let system = li1_system(dir.path());
    let out_dir = dir.path().join("cmp");
    let out = atpf(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--system",
        &system,
        "--seeds",
        "5",
        "--out",
        out_dir.to_str().unwrap(),
        "--subintervals",
        "8",
        "--qpoints",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let pen = std::fs::read_to_string(out_dir.join("trace_penalized_seed5.csv")).unwrap();
    let anti =
        std::fs::read_to_string(out_dir.join("trace_antisymmetrized_seed5.csv")).unwrap();
    assert_eq!(pen.lines().count(), anti.lines().count());
    assert_eq!(strip_seconds(&pen), strip_seconds(&anti));
    assert!(out_dir.join("compare_seed5.svg").exists());
}

#[test]
fn compare_schedule_flag_reaches_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.txt");
    write(
        &config,
        "iterations = 10\neval_stride = 5\nrank = 2\nwidth = 5\nhidden_layers = 2\nlr0 = 1e-3\n",
    );
    let system = li1_system(dir.path());
    let out_dir = dir.path().join("cmp");
    let out = atpf(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--system",
        &system,
        "--seeds",
        "2",
        "--schedule",
        "inverse_time",
        "--alpha",
        "1e-3",
        "--out",
        out_dir.to_str().unwrap(),
        "--subintervals",
        "8",
        "--qpoints",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("trace_penalized_seed2.csv")).unwrap();
    // lr column of the iter-10 row: 1e-3 / (1 + 1e-3 * 10)
    let last = csv.lines().last().unwrap();
    let lr: f64 = last.split(',').nth(4).unwrap().parse().unwrap();
    assert!((lr - 1e-3 / 1.01).abs() < 1e-18);
}

#[test]
fn env_var_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.txt");
    write(&config, "iterations = 0\nrank = 1\nwidth = 3\nhidden_layers = 1\n");
    let system = li1_system(dir.path());
    let out_dir = dir.path().join("envout");
    let out = Command::new(env!("CARGO_BIN_EXE_atpf"))
        .args([
            "train",
            "--config",
            config.to_str().unwrap(),
            "--system",
            &system,
            "--subintervals",
            "6",
            "--qpoints",
            "6",
        ])
        .env("ATPF_OUT_DIR", out_dir.to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.join("trace.csv").exists());
}
