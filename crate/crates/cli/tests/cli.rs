//! End-to-end tests of the `sbm` binary: pipeline composition, exit codes,
//! and environment-variable overrides.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sbm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sbm"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn sbm");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("spawn sbm").status.code().unwrap_or(-1)
}

#[test]
fn pipeline_composes() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net");
    let run = dir.path().join("run");
    run_ok(sbm()
        .args(["generate", "spike", "--n1", "4", "--r", "2"])
        .arg("--out")
        .arg(&net));
    assert!(net.join("edges.txt").exists());
    assert!(net.join("labels.txt").exists());
    assert!(net.join("metadata.json").exists());

    run_ok(sbm()
        .arg("fit")
        .arg("--graph")
        .arg(net.join("edges.txt"))
        .args([
            "--k", "2", "--iters", "80", "--burnin", "20", "--chains", "2", "--restarts", "2",
            "--seed", "5",
        ])
        .arg("--out")
        .arg(&run));
    for f in [
        "trace_chain0.csv",
        "trace_chain1.csv",
        "sigma_chain0.csv",
        "counts.csv",
        "eta_mean.csv",
        "metadata.json",
        "psrf.json",
        "mode.json",
    ] {
        assert!(run.join(f).exists(), "{f} missing");
    }

    for estimator in ["centroid", "binder", "map"] {
        run_ok(sbm()
            .arg("estimate")
            .arg("--trace-dir")
            .arg(&run)
            .args(["--estimator", estimator]));
        assert!(run.join(format!("labels_{estimator}.txt")).exists());
        assert!(run.join(format!("summary_{estimator}.json")).exists());
    }
    assert!(run.join("gamma_ci.csv").exists());
    assert!(run.join("eta_degree.csv").exists());

    let out = run_ok(sbm()
        .arg("evaluate")
        .arg("--estimate")
        .arg(run.join("labels_centroid.txt"))
        .arg("--reference")
        .arg(net.join("labels.txt")));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("error_rate"), "unexpected output: {text}");
}

#[test]
fn binder_risk_never_exceeds_centroid_risk() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net");
    let run = dir.path().join("run");
    run_ok(sbm()
        .args(["generate", "spike", "--n1", "4", "--r", "1"])
        .arg("--out")
        .arg(&net));
    run_ok(sbm()
        .arg("fit")
        .arg("--graph")
        .arg(net.join("edges.txt"))
        .args([
            "--k", "2", "--iters", "120", "--burnin", "20", "--chains", "1", "--restarts", "2",
            "--seed", "9",
        ])
        .arg("--out")
        .arg(&run));
    run_ok(sbm()
        .arg("estimate")
        .arg("--trace-dir")
        .arg(&run)
        .args(["--estimator", "centroid"]));
    run_ok(sbm()
        .arg("estimate")
        .arg("--trace-dir")
        .arg(&run)
        .args(["--estimator", "binder"]));
    let risk = |name: &str| -> f64 {
        let text = fs::read_to_string(run.join(format!("summary_{name}.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["expected_binder_risk"].as_f64().unwrap()
    };
    // the binder candidate search includes the centroid, so it can only improve
    assert!(risk("binder") <= risk("centroid") + 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.txt");
    fs::write(&edges, "a b\nb c\nc d\nd a\n").unwrap();
    // K < 2
    assert_eq!(
        exit_code(sbm().arg("fit").arg("--graph").arg(&edges).args([
            "--k", "1", "--iters", "10", "--burnin", "1", "--out", "/tmp/x"
        ])),
        2
    );
    // q outside (0, 1)
    assert_eq!(
        exit_code(sbm()
            .arg("evaluate")
            .arg("--estimate")
            .arg(&edges)
            .arg("--reference")
            .arg(&edges)
            .args(["--q", "1.5"])),
        2
    );
    // missing required --mu
    assert_eq!(
        exit_code(sbm().args([
            "generate",
            "benchmark",
            "--n",
            "50",
            "--a",
            "2",
            "--b",
            "1",
            "--avg-degree",
            "6",
            "--out",
            "/tmp/x"
        ])),
        2
    );
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.txt");
    fs::write(&edges, "a b\nb c\nc d\nd a\n").unwrap();
    // unreadable graph
    assert_eq!(
        exit_code(sbm().arg("fit").args([
            "--graph",
            "/nonexistent/path.txt",
            "--k",
            "2",
            "--out",
            "/tmp/x"
        ])),
        3
    );
    // n < 2K
    assert_eq!(
        exit_code(sbm().arg("fit").arg("--graph").arg(&edges).args([
            "--k", "3", "--iters", "10", "--burnin", "1", "--out", "/tmp/x"
        ])),
        3
    );
    // mismatched node sets in evaluate
    let ref_labels = dir.path().join("ref.txt");
    let est_labels = dir.path().join("est.txt");
    fs::write(&ref_labels, "a 1\nb 1\nc 2\nd 2\n").unwrap();
    fs::write(&est_labels, "a 1\nb 1\nc 2\nz 2\n").unwrap();
    assert_eq!(
        exit_code(sbm()
            .arg("evaluate")
            .arg("--estimate")
            .arg(&est_labels)
            .arg("--reference")
            .arg(&ref_labels)),
        3
    );
}

#[test]
fn evaluate_identical_partitions_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.txt");
    fs::write(&labels, "a 1\nb 1\nc 2\nd 2\n").unwrap();
    let out = run_ok(sbm()
        .arg("evaluate")
        .arg("--estimate")
        .arg(&labels)
        .arg("--reference")
        .arg(&labels));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("error_rate 0\n"), "output: {text}");
}

#[test]
fn evaluate_glob_reports_interval() {
    let dir = tempfile::tempdir().unwrap();
    let ref_labels = dir.path().join("ref.txt");
    fs::write(&ref_labels, "a 1\nb 1\nc 2\nd 2\n").unwrap();
    for (i, flip) in [("1", "1"), ("2", "2"), ("3", "1")].iter().enumerate() {
        fs::write(
            dir.path().join(format!("est_{i}.txt")),
            format!("a 1\nb 1\nc {}\nd {}\n", flip.0, flip.1),
        )
        .unwrap();
    }
    let pattern = dir.path().join("est_*.txt");
    let out = run_ok(sbm()
        .arg("evaluate")
        .arg("--runs-glob")
        .arg(pattern.to_str().unwrap())
        .arg("--reference")
        .arg(&ref_labels)
        .args(["--q", "0.2"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("q_error_interval(q=0.2)"), "output: {text}");
    assert_eq!(text.matches("error_rate ").count(), 3, "output: {text}");
}

#[test]
fn env_overrides_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net");
    run_ok(sbm()
        .args(["generate", "spike", "--n1", "4", "--r", "1"])
        .arg("--out")
        .arg(&net));
    let run_env = dir.path().join("run_env");
    run_ok(sbm()
        .env("SBM_SEED", "99")
        .arg("fit")
        .arg("--graph")
        .arg(net.join("edges.txt"))
        .args([
            "--k", "2", "--iters", "30", "--burnin", "5", "--chains", "1", "--restarts", "1",
        ])
        .arg("--out")
        .arg(&run_env));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_env.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 99);

    let run_flag = dir.path().join("run_flag");
    run_ok(sbm()
        .env("SBM_SEED", "99")
        .arg("fit")
        .arg("--graph")
        .arg(net.join("edges.txt"))
        .args([
            "--k", "2", "--iters", "30", "--burnin", "5", "--chains", "1", "--restarts", "1",
            "--seed", "7",
        ])
        .arg("--out")
        .arg(&run_flag));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_flag.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
}

#[test]
fn fit_reads_standard_input() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net");
    run_ok(sbm()
        .args(["generate", "spike", "--n1", "4", "--r", "1"])
        .arg("--out")
        .arg(&net));
    let edges = fs::read(net.join("edges.txt")).unwrap();
    let run = dir.path().join("run");
    let mut child = sbm()
        .args([
            "fit", "--graph", "-", "--k", "2", "--iters", "30", "--burnin", "5", "--chains", "1",
            "--restarts", "1",
        ])
        .arg("--out")
        .arg(&run)
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.as_mut().unwrap().write_all(&edges).unwrap();
    let status = child.wait().unwrap();
    assert!(status.success());
    assert!(run.join("trace_chain0.csv").exists());
    assert!(!Path::new("-").exists());
}
