use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn holodyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holodyn")).args(args).output().expect("binary runs")
}

fn holodyn_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holodyn"))
        .args(args)
        .env("HOLODYN_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn dbar_between_unit_fibers_is_one() {
    let r = report(&holodyn(&["dbar", "--system", "bc_n1", "--from", "z=0", "--to", "z=1", "--sampled-step", "1e-5"]));
    assert_eq!(r["schema"], 1);
    assert_eq!(r["operation"], "dbar");
    let d = r["result"]["defect"].as_f64().unwrap();
    assert!((d - 1.0).abs() < 1e-9);
    assert!(r["residuals"]["sampled_minus_closed"].as_f64().unwrap() < 1e-6);
    let refs = r["references"].as_array().unwrap();
    assert_eq!(refs.len(), 1);
    assert!(!refs[0]["source"].as_str().unwrap().is_empty());
}

#[test]
fn accessibility_dimensions() {
    for (system, dim) in [("h5acc", 5), ("iwasawa", 6)] {
        let r = report(&holodyn(&["accessibility", "--system", system]));
        assert_eq!(r["result"]["dim"], dim, "{system}");
        assert_eq!(r["result"]["exact"], true);
    }
    let r = report(&holodyn(&["accessibility", "--system", "h5acc"]));
    assert_eq!(r["result"]["j_invariant"], false);
}

#[test]
fn nijenhuis_vanishes_on_catalog_structures() {
    for system in ["iwasawa", "h5acc"] {
        let r = report(&holodyn(&["nijenhuis", "--system", system]));
        assert_eq!(r["result"]["vanishes"], true, "{system}");
    }
}

#[test]
fn elliptic_quotient_has_sixteen_singular_fibers() {
    let r = report(&holodyn(&["lattice", "singular-fibers", "--system", "elliptic_quotient"]));
    assert_eq!(r["result"]["count"], 16);
    let r = report(&holodyn(&["lattice", "moduli"]));
    assert_eq!(r["result"]["distinct"], true);
}

#[test]
fn cat_map_lyapunov_matches_closed_form() {
    let r = report(&holodyn(&["lyapunov", "--system", "cat2c", "--n", "10000", "--seed", "2"]));
    assert!(r["residuals"]["exponent_error"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["seed"], 2);
}

#[test]
fn exit_codes() {
    assert_eq!(holodyn(&["bogus"]).status.code(), Some(1));
    assert_eq!(holodyn(&["lyapunov", "--system", "no_such_system"]).status.code(), Some(1));
    assert_eq!(holodyn(&["lyapunov", "--n", "not_a_number"]).status.code(), Some(1));
    // Stochastic operation without a seed.
    assert_eq!(holodyn(&["gibbs"]).status.code(), Some(2));
    assert_eq!(holodyn(&["holonomy", "--tol=-1"]).status.code(), Some(2));
    assert_eq!(holodyn(&["nijenhuis", "--system", "cat2c"]).status.code(), Some(2));
    // An unreachable tolerance exhausts the iteration budget.
    assert_eq!(holodyn(&["holonomy", "--tol", "1e-300", "--max-iter", "3"]).status.code(), Some(3));
    assert_eq!(holodyn(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical_across_worker_counts() {
    let args = ["gibbs", "--seed", "11", "--n", "40", "--samples", "300"];
    let one = holodyn_env(&args, "1");
    let four = holodyn_env(&args, "4");
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    let seq = holodyn(&seq_args);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, seq.stdout);
    let again = holodyn_env(&args, "1");
    assert_eq!(one.stdout, again.stdout);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    assert_eq!(holodyn_env(&["lattice", "check"], "zero").status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# lyapunov run\nsystem = cat2c\nn = 500\nseed = 4\ninverse = true\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let r = report(&holodyn(&["lyapunov", "--config", cfg_s]));
    assert_eq!(r["parameters"]["n"], 500);
    assert_eq!(r["parameters"]["inverse"], true);
    assert_eq!(r["seed"], 4);
    let r = report(&holodyn(&["lyapunov", "--config", cfg_s, "--n", "800"]));
    assert_eq!(r["parameters"]["n"], 800);
    assert_eq!(r["iterations"], 800);

    std::fs::write(&cfg, "no_such_flag = 1\n").unwrap();
    assert_eq!(holodyn(&["lyapunov", "--config", cfg_s]).status.code(), Some(1));
    std::fs::write(&cfg, "missing separator\n").unwrap();
    assert_eq!(holodyn(&["lyapunov", "--config", cfg_s]).status.code(), Some(1));
}

fn csv_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn curves_and_reports_go_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = (dir.path().join("r.json"), dir.path().join("c.csv"));
    let o = holodyn(&[
        "dichotomy",
        "--system",
        "mobius_loxodromic",
        "--n",
        "20",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["verdict"], "Contraction");
    assert!(r["residuals"]["exceptional_point_distance"].as_f64().unwrap() < 1e-12);
    let lines = csv_lines(&csv);
    assert_eq!(lines[0], "n,growth");
    assert_eq!(lines.len(), 22);
    assert!(String::from_utf8_lossy(&o.stderr).contains("wall time"));

    let particles = dir.path().join("p.csv");
    let o = holodyn(&["gibbs", "--seed", "1", "--n", "5", "--samples", "10", "--particles", particles.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let lines = csv_lines(&particles);
    assert!(lines[0].starts_with("chart,re0,im0"));
    assert!(lines[0].ends_with(",weight"));
}

#[test]
fn heat_decay_rates() {
    for (lattice, shortest) in [("square", 1.0), ("hexagonal", 4.0 / 3.0)] {
        let r = report(&holodyn(&["heat", "--lattice", lattice]));
        let rate = r["result"]["fitted_rate"].as_f64().unwrap();
        let expected = 4.0 * std::f64::consts::PI.powi(2) * shortest;
        assert!((rate - expected).abs() < 0.01 * expected, "{lattice}: {rate}");
    }
    assert_eq!(holodyn(&["heat", "--system", "cat2c"]).status.code(), Some(2));
}

#[test]
fn report_all_runs_the_registry() {
    let r = report(&holodyn(&["report-all", "--seed", "3"]));
    assert_eq!(r["result"]["failed"], 0);
    let runs = r["result"]["runs"].as_array().unwrap();
    let systems: std::collections::BTreeSet<_> = runs.iter().map(|e| e["report"]["system"].as_str().unwrap()).collect();
    assert_eq!(systems.len(), 11);
}
