//! End-to-end checks of the `kpz` binary: exit-code contract, CSV/JSON
//! shape, oracle value for the GUE table, and seed determinism.

use std::process::{Command, Output};

fn kpz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpz"))
        .args(args)
        .env_remove("KPZ_SEED")
        .env_remove("KPZ_THREADS")
        .output()
        .expect("binary runs")
}

#[test]
fn missing_required_parameter_is_a_usage_error() {
    let out = kpz(&["dist", "--kind", "edge", "--s", "0:0:1", "--preset", "coarse"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_grid_is_a_usage_error() {
    let out = kpz(&["dist", "--kind", "gue", "--s", "0..1", "--preset", "coarse"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn zero_trials_is_a_usage_error() {
    let out = kpz(&[
        "compare", "--eps", "0.25", "--trials", "0", "--preset", "coarse",
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn gue_single_point_matches_tracy_widom_value() {
    // F_GUE(0) from the Painlevé II representation (Tracy-Widom).
    let out = kpz(&["dist", "--kind", "gue", "--s", "0:0:1", "--preset", "coarse"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let body = String::from_utf8(out.stdout).unwrap();
    let mut lines = body.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# {"), "config header missing: {header}");
    assert!(header.contains("\"version\""), "{header}");
    assert_eq!(lines.next().unwrap(), "s,F,imag_residual");
    let row = lines.next().unwrap();
    let f: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((f - 0.969_372_828_355).abs() < 1e-6, "F_GUE(0) = {f}");
}

#[test]
fn edge_table_is_monotone_and_in_range() {
    let out = kpz(&[
        "dist", "--kind", "edge", "--T", "1", "--X", "0", "--s", "-2:2:5", "--preset", "coarse",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let body = String::from_utf8(out.stdout).unwrap();
    let f: Vec<f64> = body
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(f.len(), 5);
    for w in f.windows(2) {
        assert!(w[0] < w[1], "not monotone: {f:?}");
    }
    assert!(f.iter().all(|&v| (0.0..=1.0).contains(&v)), "{f:?}");
}

#[test]
fn simulate_is_deterministic_in_the_seed() {
    let args = [
        "simulate", "--eps", "0.25", "--T", "0.5", "--trials", "40", "--seed", "9",
    ];
    let a = kpz(&args);
    let b = kpz(&args);
    assert_eq!(a.status.code(), Some(0), "{a:?}");
    assert_eq!(a.stdout, b.stdout, "same seed must give identical output");
    let c = kpz(&[
        "simulate", "--eps", "0.25", "--T", "0.5", "--trials", "40", "--seed", "10",
    ]);
    assert_ne!(a.stdout, c.stdout, "different seeds should differ");
}

#[test]
fn seed_env_variable_is_honored() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_kpz"))
            .args(["simulate", "--eps", "0.25", "--T", "0.5", "--trials", "20"])
            .env("KPZ_SEED", seed)
            .output()
            .expect("binary runs")
    };
    let a = run("4");
    let b = kpz(&[
        "simulate", "--eps", "0.25", "--T", "0.5", "--trials", "20", "--seed", "4",
    ]);
    assert_eq!(a.status.code(), Some(0), "{a:?}");
    assert_eq!(a.stdout, b.stdout, "KPZ_SEED must act like --seed");
}

#[test]
fn particle_mode_emits_integer_positions() {
    let out = kpz(&[
        "simulate", "--eps", "0.09", "--m", "1", "--t", "1", "--trials", "10", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let body = String::from_utf8(out.stdout).unwrap();
    assert_eq!(body.lines().nth(1).unwrap(), "trial,position");
    for l in body.lines().skip(2) {
        let _: i64 = l.split(',').nth(1).unwrap().parse().expect("integer site");
    }
}

#[test]
fn validate_quick_passes_and_reports_json() {
    let out = kpz(&["validate", "--quick", "--seed", "5", "--preset", "coarse"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true, "{report}");
    assert!(report["checks"].as_array().unwrap().len() >= 7);
}

#[test]
fn tails_table_bounds_hold() {
    let out = kpz(&["tails", "--T", "1", "--y", "0.5:2:4", "--preset", "coarse"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let body = String::from_utf8(out.stdout).unwrap();
    for l in body.lines().skip(2) {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols[7], "true", "tail bound violated: {l}");
        let (ll, lu): (f64, f64) = (cols[8].parse().unwrap(), cols[9].parse().unwrap());
        let (rl, ru): (f64, f64) = (cols[10].parse().unwrap(), cols[11].parse().unwrap());
        assert!(ll <= lu && rl <= ru, "sandwich brackets inverted: {l}");
    }
}
