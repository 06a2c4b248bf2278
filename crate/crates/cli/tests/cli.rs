use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ndarray::Array2;
use serde_json::Value;
use spearfact::simulate::replication_rng;
use spearfact::{make_loadings, sample_factor_model, LoadingCase, LoadingSpec, Population};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spearfact"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_matrix(dir: &Path, name: &str, header: bool, m: &Array2<f64>) -> PathBuf {
    let path = dir.join(name);
    let mut s = String::new();
    if header {
        let names: Vec<String> = (0..m.ncols()).map(|j| format!("x{j}")).collect();
        s.push_str(&names.join(","));
        s.push('\n');
    }
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    std::fs::write(&path, s).unwrap();
    path
}

fn factor_data(p: usize, n: usize, seed: u64) -> Array2<f64> {
    let spec = LoadingSpec::new(LoadingCase::C1, p, 3).unwrap();
    let mut rng = replication_rng(seed, 0);
    let (b, psi) = make_loadings(&spec, &mut rng).unwrap();
    sample_factor_model(&b, &psi, Population::Normal, n, &mut rng).unwrap().into_inner()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn estimate_reports_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "y.csv", true, &factor_data(60, 120, 1));
    let o = run(&["estimate", path.to_str().unwrap(), "--method", "all", "--kmax", "8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 120);
    assert_eq!(v["p"], 60);
    let results = v["results"].as_array().unwrap();
    let names: Vec<&str> = results.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(names, ["sr", "ne", "ed", "mktcr", "act"]);
    assert_eq!(results[0]["k_hat"], 3);
    assert_eq!(results[0]["diagnostics"]["ratios"].as_array().unwrap().len(), 8);

    let o = run(&["estimate", path.to_str().unwrap(), "--out", "csv", "--kmax", "8"]);
    assert_eq!(stdout(&o), "method,k_hat,k_max\nsr,3,8\n");
}

#[test]
fn estimate_is_invariant_to_transpose_layout() {
    let dir = tempfile::tempdir().unwrap();
    let m = factor_data(30, 80, 2);
    let a = write_matrix(dir.path(), "a.csv", false, &m);
    let b = write_matrix(dir.path(), "b.csv", false, &m.t().to_owned());
    let oa = run(&["estimate", a.to_str().unwrap(), "--kmax", "6"]);
    let ob = run(&["estimate", b.to_str().unwrap(), "--kmax", "6", "--transpose"]);
    assert!(oa.status.success() && ob.status.success());
    assert_eq!(oa.stdout, ob.stdout);
}

#[test]
fn input_errors_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,c\n1,2,3\n4,oops,6\n").unwrap();
    let o = run(&["estimate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2 (line 3), column 2"), "{}", stderr(&o));

    std::fs::write(&bad, "1,2,3\n4,5\n").unwrap();
    let o = run(&["estimate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ragged"));

    std::fs::write(&bad, "1,2,3\n4,,6\n").unwrap();
    assert_eq!(run(&["estimate", bad.to_str().unwrap()]).status.code(), Some(2));

    let o = run(&["estimate", "/nonexistent/input.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["estimate", bad.to_str().unwrap(), "--method", "bcv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_variance_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = factor_data(12, 40, 3);
    m.column_mut(4).fill(2.5);
    let path = write_matrix(dir.path(), "z.csv", true, &m);
    let o = run(&["estimate", path.to_str().unwrap(), "--method", "act", "--kmax", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column 5 ('x4') has zero variance"), "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "zero.csv", false, &Array2::zeros((10, 4)));
    let o = run(&["estimate", path.to_str().unwrap(), "--method", "ne"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn spectrum_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "y.csv", false, &factor_data(20, 50, 4));
    let o = run(&["spectrum", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 20);
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
    assert!((values.iter().sum::<f64>() - 20.0).abs() < 1e-9);

    let o = run(&["spectrum", path.to_str().unwrap(), "--top", "50", "--matrix", "mkendall"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
    assert_eq!(stdout(&o).lines().count(), 21);
    let o = run(&["spectrum", path.to_str().unwrap(), "--top", "5", "--matrix", "pearson"]);
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn simulate_is_deterministic_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"population":"t2","case":"C2","p":40,"n":80,"K":3,"kmax":8,"reps":6,"seed":7,"estimators":["sr","act"]}"#,
    );
    let a = run(&["simulate", "--config", cfg.to_str().unwrap(), "--threads", "1"]);
    let b = run(&["simulate", "--config", cfg.to_str().unwrap(), "--threads", "3"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("method,correct_pct,over_pct,under_pct,failed_pct,mean_k_hat\nsr,"));
    assert_eq!(text.lines().count(), 3);

    let out = dir.path().join("t.csv");
    let log = dir.path().join("log.json");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--log", log.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(v["rows"][0]["k_hats"].as_array().unwrap().len(), 6);
    assert_eq!(v["scenario"]["K"], 3);

    let one = write_config(
        dir.path(),
        "one.json",
        r#"{"population":"normal","case":"C1","p":40,"n":80,"K":3,"kmax":8,"reps":1,"seed":1,"estimators":["sr"]}"#,
    );
    let o = run(&["simulate", "--config", one.to_str().unwrap()]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let cells: Vec<f64> = row.split(',').skip(1).take(4).map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells.iter().filter(|&&c| c == 100.0).count(), 1);
    assert_eq!(cells.iter().filter(|&&c| c == 0.0).count(), 3);

    for (body, pointer) in [
        (r#"{"population":"normal","case":"C1","p":40,"n":80,"K":3,"kmax":8,"reps":1,"seed":1,"estimators":["sr"],"x":1}"#, "/x"),
        (r#"{"population":"normal","case":"C9","p":40,"n":80,"K":3,"kmax":8,"reps":1,"seed":1,"estimators":["sr"]}"#, "/case"),
        (r#"{"population":"normal","case":"C1","p":40,"n":80,"K":3,"kmax":8,"reps":1,"seed":1,"estimators":["sr","nope"]}"#, "/estimators/1"),
        (r#"{"population":"normal","case":"C1","p":40,"n":"80","K":3,"kmax":8,"reps":1,"seed":1,"estimators":["sr"]}"#, "/n"),
    ] {
        let cfg = write_config(dir.path(), "bad.json", body);
        let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains(&format!("at {pointer}:")), "{}", stderr(&o));
    }
}

#[test]
fn theory_command() {
    let o = run(&["theory", "--spikes", "3.0,1.2", "--bulk-atoms", "1.0:1.0", "--c", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k0"], 1);
    assert_eq!(v["spikes"][0]["detectable"], true);
    assert_eq!(v["spikes"][1]["detectable"], false);
    assert!((v["threshold"].as_f64().unwrap() - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);

    let o = run(&["theory", "--spikes", "2", "--bulk-atoms", "1", "--c", "0.0001"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["spikes"][0]["predicted_limit"].as_f64().unwrap() - 2.0).abs() < 1e-3);

    let o = run(&["theory", "--spikes", "0.5", "--bulk-atoms", "1.0:1.0", "--c", "0.5"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["spikes"][0]["inside_bulk"], true);
    assert_eq!(v["k0"], 0);

    for bad in [["--spikes", "3,x"], ["--bulk-atoms", "1:0.5"]] {
        let mut args = vec!["theory", "--spikes", "3", "--bulk-atoms", "1:1", "--c", "0.5"];
        let i = args.iter().position(|a| *a == bad[0]).unwrap();
        args[i + 1] = bad[1];
        assert_eq!(run(&args).status.code(), Some(2));
    }
    assert_eq!(run(&["theory", "--spikes", "3", "--bulk-atoms", "1", "--c", "-1"]).status.code(), Some(2));
}

#[test]
fn gamma_command() {
    let o = run(&["gamma", "--population", "normal", "--samples", "10000"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["gamma"].as_f64().unwrap() - 3.0 / std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(v["stderr"], 0.0);
    assert_eq!(v["diverged"], false);

    let o = run(&["gamma", "--population", "cauchy", "--samples", "100000", "--seed", "3"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["diverged"], true);
    assert!(v["gamma"].is_null());

    let g = |seed: &str| -> (f64, f64) {
        let o = run(&["gamma", "--population", "uniform_chisq", "--samples", "1000000", "--seed", seed]);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["diverged"], false);
        (v["gamma"].as_f64().unwrap(), v["stderr"].as_f64().unwrap())
    };
    let (a, sa) = g("1");
    let (b, sb) = g("2");
    assert!((a - b).abs() < 3.0 * (sa * sa + sb * sb).sqrt(), "{a} vs {b}");
    assert_eq!(run(&["gamma", "--population", "normal", "--samples", "10"]).status.code(), Some(2));
    assert_eq!(run(&["gamma", "--population", "laplace"]).status.code(), Some(2));
}

#[test]
fn ingest_command() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    std::fs::write(
        &raw,
        "sasdate,LEVEL,GROWTH,GAPPY\nTransform:,1,5,2\n1/1/1959,1.5,100,3\n2/1/1959,2.5,110,\n3/1/1959,3.5,121,4\n",
    )
    .unwrap();
    let out = dir.path().join("m.csv");
    let o = run(&["ingest-fredmd", raw.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("dropped column 'GAPPY'"));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "LEVEL,GROWTH");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2.5,0.0953101798"));

    // the output feeds straight back into estimate-style parsing
    let o = run(&["spectrum", out.to_str().unwrap(), "--matrix", "covariance"]);
    assert!(o.status.success());

    std::fs::write(&raw, "sasdate,A\nTransform:,8\n1/1/1959,1\n2/1/1959,2\n").unwrap();
    assert_eq!(run(&["ingest-fredmd", raw.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&raw, "sasdate,A\nTransform:,2\n1/1/1959,\n2/1/1959,2\n").unwrap();
    assert_eq!(run(&["ingest-fredmd", raw.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["estimate"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
