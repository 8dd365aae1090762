use std::path::Path;
use std::process::Command;

fn kinterp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kinterp"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"{
  "kernel": {"family": "cosine", "beta": 2.0, "zeta": 0.0, "m": 256},
  "gamma": 0.5,
  "n_grid": [8, 16, 32],
  "replicates": 4,
  "lambda_grid": [0.001, 0.01, 0.1]
}"#;

#[test]
fn inconsistency_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let status = kinterp()
        .args(["inconsistency", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "3", "--threads", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let errors = std::fs::read_to_string(out.join("errors.csv")).unwrap();
    assert!(errors.starts_with("n,replicate,gamma_error_sq\n"));
    assert_eq!(errors.lines().count(), 1 + 12);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 3);
    assert!(summary["fitted_slope"]["slope"].is_number());
    let plot = std::fs::read_to_string(out.join("plot.gp")).unwrap();
    assert!(plot.contains("errors.csv"));
}

#[test]
fn variance_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let status = kinterp()
        .args(["variance", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let curve = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    assert!(curve.starts_with("lambda,v_coeff,v_gram,v1,v2,envelope\n"));
    assert_eq!(curve.lines().count(), 4);
    assert!(out.join("curve_n8.csv").exists());
    assert!(std::fs::read_to_string(out.join("plot.gp")).unwrap().contains("curve.csv"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for sub in ["variance", "inconsistency"] {
        let mut files = Vec::new();
        for (run, threads) in [("a", "1"), ("b", "3")] {
            let out = dir.path().join(format!("{sub}_{run}"));
            let status = kinterp()
                .arg(sub)
                .arg("--config")
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .args(["--threads", threads])
                .status()
                .unwrap();
            assert!(status.success());
            files.push(out);
        }
        let name = if sub == "variance" { "curve.csv" } else { "errors.csv" };
        assert_eq!(
            std::fs::read(files[0].join(name)).unwrap(),
            std::fs::read(files[1].join(name)).unwrap()
        );
    }
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"kernel": {"family": "cosine", "beta": 0.5, "zeta": 0.0, "m": 8}, "gamma": 0.5}"#);
    let status = kinterp().args(["inconsistency", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    let status = kinterp().args(["variance", "--config"]).arg(&missing).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let exact = write_config(dir.path(), r#"{"kernel": {"family": "exact_cosine", "beta": 2.0}, "gamma": 0.5, "n_grid": [8]}"#);
    let out = dir.path().join("x");
    let status = kinterp().args(["variance", "--config"]).arg(&exact).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn widespread_failures_exit_with_3() {
    // a constant target is outside the space when the constant mode has eigenvalue 0
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kernel": {"family": "dot_product", "spectrum": {"d": 2, "a": [0.0, 1.0, 0.5]}},
            "gamma": 0.5, "f_star": {"single_mode": {"b1": 1.0}}, "n_grid": [8, 16, 32], "replicates": 3}"#,
    );
    let out = dir.path().join("run");
    let status = kinterp().args(["inconsistency", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(3));
    let errors = std::fs::read_to_string(out.join("errors.csv")).unwrap();
    assert!(errors.lines().nth(1).unwrap().ends_with("NaN"));
}
