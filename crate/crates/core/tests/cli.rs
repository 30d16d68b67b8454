use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn slsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slsync"))
        .args(args)
        .env_remove("OSC_SEED")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

// Short runs on small populations; enough to exercise every output.
const QUICK: &[&str] = &["-n", "60", "--t-transient", "200", "--t-measure", "20"];

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(slsync(&["--help"]).status.code(), Some(0));
    assert_eq!(slsync(&["--version"]).status.code(), Some(0));
    assert_eq!(slsync(&["sweep", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(slsync(&[]).status.code(), Some(1));
    assert_eq!(slsync(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(slsync(&["simulate", "--alpha", "sideways"]).status.code(), Some(1));
    // valid syntax, invalid parameter: β outside [0, π/2)
    let dir = tempfile::tempdir().unwrap();
    let out = slsync(&["theory", "--beta", "0.6pi", "-n", "20", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let out = slsync(&["theory", "--source", "/nonexistent/couplings.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_writes_couplings_and_graph() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = slsync(&["gen", "-n", "200", "--graph", "--dist-seed", "4", "-o", d.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let k = csv_rows(&d.join("couplings.csv"));
    assert_eq!(k.len(), 200);
    let values: Vec<f64> = k.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(values.iter().all(|v| *v > 0.0));

    let edges = csv_rows(&d.join("edges.csv"));
    assert_eq!(edges[0], ["src", "dst"]);
    let mut degree = vec![0usize; 200];
    for e in &edges[1..] {
        let (a, b): (usize, usize) = (e[0].parse().unwrap(), e[1].parse().unwrap());
        assert_ne!(a, b);
        degree[a] += 1;
    }
    // the graph realizes round(K_j N), up to one padded node for parity
    let want: Vec<usize> = values.iter().map(|k| (k * 200.0).round() as usize).collect();
    let off: usize = degree.iter().zip(&want).map(|(a, b)| a.abs_diff(*b)).sum();
    assert!(off <= 2, "degree mismatch {off}");
    assert!(d.join("config.toml").exists());
}

#[test]
fn simulate_writes_summary_profiles_and_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let mut args = vec!["simulate", "--alpha", "0.5pi", "--beta", "0.1pi", "--d0", "0.6", "--theory", "--trajectory"];
    args.extend_from_slice(QUICK);
    args.extend_from_slice(&["-o", d]);
    let out = slsync(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let s = json(&dir.path().join("summary.json"));
    for key in ["R_tilde_mean", "Omega", "Delta", "n_locked", "mean_amp_slope", "inflection", "state_label"] {
        assert!(s.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(s["N"], 60);
    let omega = s["Omega"].as_f64().unwrap();
    let delta = s["Delta"].as_f64().unwrap();
    assert!((delta - (std::f64::consts::PI - omega)).abs() < 1e-12);
    assert!(s["theory"]["R_tilde"].as_f64().unwrap() > 0.5);

    let prof = csv_rows(&dir.path().join("profiles.csv"));
    assert_eq!(prof[0], ["K", "phi_star", "r_star", "locked"]);
    assert_eq!(prof.len(), 61);
    let pred = csv_rows(&dir.path().join("prediction.csv"));
    assert_eq!(pred[0], ["K", "phi_star_pred", "r_star_pred", "locked_pred"]);
    let traj = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(traj[0], ["t", "osc_id", "theta", "r"]);
    // 20 time units sampled every 10 × 0.01: 201 inclusive snapshots
    assert_eq!(traj.len() - 1, 201 * 60);
}

#[test]
fn simulate_is_reproducible_and_honours_osc_seed() {
    let run = |env_seed: Option<&str>, extra: &[&str]| {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec!["simulate", "--alpha", "0.5pi", "--beta", "0.2pi", "--d0", "1"];
        args.extend_from_slice(QUICK);
        args.extend_from_slice(extra);
        args.extend_from_slice(&["-o", dir.path().to_str().unwrap()]);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_slsync"));
        cmd.args(&args).env_remove("OSC_SEED");
        if let Some(s) = env_seed {
            cmd.env("OSC_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        let s = json(&dir.path().join("summary.json"));
        let cfg = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
        (s["R_tilde_mean"].as_f64().unwrap(), cfg)
    };
    let (a, _) = run(None, &["--seed", "9"]);
    let (b, cfg) = run(Some("9"), &[]);
    assert_eq!(a, b);
    assert!(cfg.contains("seed = 9"), "{cfg}");
    // an explicit flag wins over the environment
    let (c, _) = run(Some("9"), &["--seed", "10"]);
    assert_ne!(a, c);
}

#[test]
fn theory_then_classify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = slsync(&[
        "theory", "--alpha", "0.5pi", "--beta", "0.1pi", "--d0", "0.6", "-n", "300", "-o", d.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = json(&d.join("theory.json"));
    assert_eq!(t["converged"], true);
    assert_eq!(t["state_label"], "S1_l+");
    assert!(t["Delta"].as_f64().unwrap() < 0.0);

    let sim = d.join("sim");
    let mut args = vec!["simulate", "--alpha", "0.5pi", "--beta", "0.1pi", "--d0", "0.6"];
    args.extend_from_slice(&["-n", "300", "--t-transient", "600", "--t-measure", "50", "-o"]);
    args.push(sim.to_str().unwrap());
    assert!(slsync(&args).status.success());
    let out = slsync(&["classify", "-n", "300", sim.join("summary.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "S1_l+");
}

#[test]
fn smoke_sweep_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let grid = d.join("grid");
    let mut args = vec!["sweep", "--mode", "both", "--alpha", "0.5pi", "--beta-steps", "2", "--d0-steps", "2"];
    args.extend_from_slice(&["--n-seeds", "2", "--workers", "2"]);
    args.extend_from_slice(QUICK);
    args.extend_from_slice(&["-o", grid.to_str().unwrap()]);
    let out = slsync(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let header = "alpha,beta,d0,R_tilde,Delta,amp_slope,inflection_frac,state,fully_drifting,status";
    for kind in ["simulate", "theory"] {
        let text = std::fs::read_to_string(grid.join(format!("grid_{kind}.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.ends_with(",ok") || r.ends_with(",unconverged")), "{kind}: {rows:?}");
        let meta = json(&grid.join(format!("grid_{kind}.json")));
        assert_eq!(meta["n_cells"], 4);
        assert_eq!(meta["n_failed"], 0);
    }
    assert_eq!(
        std::fs::read_to_string(grid.join("boundaries.csv")).unwrap().lines().next(),
        Some("curve_id,beta,d0")
    );

    // replay writes into the recorded output directory; move the first run
    // aside and compare
    let first = d.join("first");
    std::fs::rename(&grid, &first).unwrap();
    let out = slsync(&["replay", first.join("config.toml").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["grid_simulate.csv", "grid_theory.csv", "boundaries.csv"] {
        assert_eq!(
            std::fs::read_to_string(first.join(f)).unwrap(),
            std::fs::read_to_string(grid.join(f)).unwrap(),
            "{f} differs on replay"
        );
    }
}

#[test]
fn grid_failures_set_the_exit_code() {
    // RK4 at dt = 0.6 is unstable only where λ − S K d₀ is large, i.e. d₀ = −2
    let base = [
        "sweep", "--mode", "simulate", "--lambda", "0.1", "-S", "50", "--dt", "0.6", "--d0-min", "-2", "--d0-max", "2",
        "--d0-steps", "2", "--beta-steps", "2", "-n", "20", "--t-transient", "50", "--t-measure", "20", "--n-seeds",
        "1",
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut args = base.to_vec();
    args.extend_from_slice(&["-o", dir.path().to_str().unwrap()]);
    assert_eq!(slsync(&args).status.code(), Some(3));
    let rows = csv_rows(&dir.path().join("grid_simulate.csv"));
    let failed: Vec<&Vec<String>> = rows[1..].iter().filter(|r| r[9] == "failed").collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0][2], "-2");
    assert!(failed[0][3].is_empty(), "failed cells carry empty numeric fields");

    let dir = tempfile::tempdir().unwrap();
    let mut args = base.to_vec();
    args[8] = "0.9";
    args.extend_from_slice(&["-o", dir.path().to_str().unwrap()]);
    assert_eq!(slsync(&args).status.code(), Some(2));
}

#[test]
fn network_input_runs_the_full_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // a ring of 40 nodes with next-nearest neighbours, plus an isolated node
    let mut edges = String::from("src,dst\n");
    for j in 0..40 {
        for s in [1, 2] {
            edges += &format!("{},{}\n", j, (j + s) % 40);
        }
    }
    edges += "40,40\n";
    let path = d.join("ring.csv");
    std::fs::write(&path, edges).unwrap();
    let out = slsync(&[
        "simulate", "--network", path.to_str().unwrap(), "--symmetrize", "--alpha", "0.5pi", "--beta", "0", "--d0",
        "0", "--t-transient", "100", "--t-measure", "20", "-o", d.join("out").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&d.join("out/summary.json"));
    // the self-loop is dropped and the isolated node removed
    assert_eq!(s["N"], 40);
}
