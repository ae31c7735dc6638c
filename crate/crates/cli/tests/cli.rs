use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kmtrade(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmtrade")).current_dir(dir).args(args).output().expect("spawn kmtrade")
}

fn manifest(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn gen_data(dir: &Path, n: &str) {
    let out = kmtrade(dir, &["gen", "--n", n, "--d", "4", "--k-true", "6", "--seed", "7", "--out", "data.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_is_reproducible_and_writes_truth() {
    let dir = tempfile::tempdir().unwrap();
    gen_data(dir.path(), "500");
    let first = fs::read(dir.path().join("data.csv")).unwrap();
    let truth = fs::read_to_string(dir.path().join("data.truth.csv")).unwrap();
    gen_data(dir.path(), "500");
    assert_eq!(first, fs::read(dir.path().join("data.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 501);
    assert_eq!(text.lines().next().unwrap(), "x0,x1,x2,x3");
    assert_eq!(truth.lines().count(), 7);
    let weights: f64 = truth.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((weights - 1.0).abs() < 1e-9);
    let m = manifest(dir.path(), "data.manifest.json");
    assert_eq!(m["command"], "gen");
    assert_eq!(m["seed"], 7);
    assert!(m["error"].is_null());
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_then_pareto() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_data(d, "2000");
    for (proc, out) in [("uniform", "u.csv"), ("coreset", "c.csv")] {
        let o = kmtrade(
            d,
            &[
                "sweep",
                "-i",
                "data.csv",
                "--has-header",
                "--procedure",
                proc,
                "--n-values",
                "500,2000",
                "--s-values",
                "20,100",
                "--repeats",
                "2",
                "--k",
                "4",
                "--seed",
                "1",
                "--out",
                out,
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(d.join(out)).unwrap();
        let rows: Vec<_> = text.lines().collect();
        assert_eq!(rows[0], "procedure,n,s,repeats,mean_time_s,median_time_s,mean_risk,std_risk,seed");
        assert_eq!(rows.len(), 5);
        assert!(rows[1..].iter().all(|r| r.starts_with(proc)));
    }

    let o = kmtrade(d, &["pareto", "--lambda", "u.csv", "--lambda", "c.csv", "--eps", "1e12", "--out", "f.csv"]);
    assert!(o.status.success());
    let text = fs::read_to_string(d.join("f.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n_or_eps,time_s,source");
    assert_eq!(text.lines().count(), 5);

    let o = kmtrade(d, &["pareto", "--lambda", "u.csv", "--n", "2000", "--out", "r.csv"]);
    assert!(o.status.success());
    assert!(fs::read_to_string(d.join("r.csv")).unwrap().lines().count() >= 2);

    let o = kmtrade(d, &["pareto", "--lambda", "u.csv", "--eps", "1e-12", "--out", "e.csv"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(fs::read_to_string(d.join("e.csv")).unwrap(), "n_or_eps,time_s,source\n");
}

#[test]
fn pareto_modes_are_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let o = kmtrade(dir.path(), &["pareto", "--lambda", "x.csv", "--eps", "1", "--n", "5", "--out", "f.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = kmtrade(dir.path(), &["pareto", "--lambda", "x.csv", "--out", "f.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tram_writes_trace_and_centers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_data(d, "3000");
    let o = kmtrade(
        d,
        &["tram", "-i", "data.csv", "--has-header", "--eps", "100", "--k", "4", "--seed", "2", "--out", "t.csv"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(d.join("t.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "i,m,s,a,val_risk,stopped,t_solver_ms,t_val_ms");
    assert!(trace.lines().count() >= 2);
    let centers = fs::read_to_string(d.join("t.centers.csv")).unwrap();
    assert_eq!(centers.lines().count(), 5);
    assert_eq!(manifest(d, "t.manifest.json")["command"], "tram");
}

#[test]
fn tram_rejects_large_delta() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        kmtrade(dir.path(), &["tram", "-i", "data.csv", "--eps", "1", "--k", "2", "--delta", "0.25", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
}

#[test]
fn analytic_defaults_and_no_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = kmtrade(d, &["analytic", "--mode", "data-time", "--points", "5", "--out", "a.csv"]);
    assert!(o.status.success());
    let text = fs::read_to_string(d.join("a.csv")).unwrap();
    let rows: Vec<_> = text.lines().collect();
    assert_eq!(rows[0], "x,t_subs,t_core,m_star_subs,m_star_core,s_star_core,regime");
    assert_eq!(rows.len(), 6);
    assert!(rows[1].ends_with(",,,,,,data-bounded"));
    assert!(rows[5].starts_with("999999.99") && rows[5].contains(",6028568,"));

    let o = kmtrade(d, &["analytic", "--mode", "risk-time", "--points", "3", "--no-sigma", "--out", "b.csv"]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(d.join("b.csv")).unwrap().lines().count(), 4);
}

#[test]
fn runtime_error_exits_one_and_records_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = kmtrade(
        d,
        &[
            "sweep",
            "-i",
            "missing.csv",
            "--procedure",
            "uniform",
            "--n-values",
            "10",
            "--s-values",
            "5",
            "--k",
            "2",
            "--out",
            "m.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    let m = manifest(d, "m.manifest.json");
    assert!(m["error"].as_str().unwrap().contains("missing.csv"));
    assert!(m["outputs"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_grid_larger_than_data_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_data(d, "100");
    let o = kmtrade(
        d,
        &[
            "sweep",
            "-i",
            "data.csv",
            "--has-header",
            "--procedure",
            "coreset",
            "--n-values",
            "50,200",
            "--s-values",
            "10",
            "--k",
            "2",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(manifest(d, "s.manifest.json")["error"].as_str().unwrap().contains("200"));
}
