//! Command-line interface of the `slsync` binary.
//!
//! Each command writes `config.toml` next to its outputs: the parsed
//! arguments with every default and the effective seed filled in. Running
//! `slsync replay config.toml` repeats the run exactly.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::integrator::{IntegrationPlan, Trajectory, RNG_ALGORITHM};
use crate::model::{CouplingSet, ModelParams};
use crate::networks::{
    degrees_from_couplings, gaussian_degrees, generate_graph_from_degrees, load_adjacency, load_couplings,
    sample_couplings, write_couplings, write_edge_list, DistributionKind, DistributionSpec,
};
use crate::observables::{measure, RunMeasurement, DEFAULT_N_BINS, DEFAULT_TOL_PHASE};
use crate::sweep::{
    boundary_curves, export_boundaries, export_grid, label_run, run_grid, AxisRange, CouplingSource, GridMetadata,
    SweepGrid, SweepMode, SweepSpec,
};
use crate::theory::{classify_state, predict_point, PredictedPoint, SolverOptions, StateLabel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

/// Parses an angle given in radians or as a multiple of π (`0.25pi`, `pi`,
/// `-0.5π`).
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let body = t.strip_suffix("pi").or_else(|| t.strip_suffix('π'));
    let value = match body {
        Some(b) => {
            let b = b.trim().trim_end_matches('*');
            let factor = match b {
                "" | "+" => 1.0,
                "-" => -1.0,
                _ => b.parse::<f64>().map_err(|_| format!("`{s}` is not an angle"))?,
            };
            factor * PI
        }
        None => t.parse::<f64>().map_err(|_| format!("`{s}` is not an angle"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "slsync", version, about = "Coupled Stuart-Landau oscillators with inhomogeneous coupling")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Worker threads for parallel runs; defaults to the available cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Generate a coupling set and optionally a degree-matched network.
    Gen(GenArgs),
    /// Simulate one (α, β, d₀) point over a list of seeds.
    Simulate(SimulateArgs),
    /// Phase-diagram grid over (β, d₀) at fixed α.
    Sweep(SweepArgs),
    /// Solve the self-consistency problem at one point.
    Theory(TheoryArgs),
    /// Label a simulation summary with the state taxonomy.
    Classify(ClassifyArgs),
    /// Re-run a command from the config.toml it wrote.
    #[serde(skip)]
    Replay {
        config: PathBuf,
    },
}

/// Sampling parameters of a coupling distribution.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DistArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub dist: DistributionKind,
    #[arg(long, default_value_t = 0.02)]
    pub mean: f64,
    #[arg(long, default_value_t = 0.0045)]
    pub sd: f64,
    /// Power-law exponent γ₀.
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, requires = "k_max")]
    pub k_min: Option<f64>,
    #[arg(long, requires = "k_min")]
    pub k_max: Option<f64>,
    /// Coupling file for `--dist file`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(short = 'n', long, default_value_t = 1000)]
    pub n: usize,
    /// Seed of the coupling draw.
    #[arg(long, default_value_t = 0)]
    pub dist_seed: u64,
}

impl DistArgs {
    pub fn spec(&self) -> DistributionSpec {
        DistributionSpec {
            kind: self.dist,
            mean: self.mean,
            sd: self.sd,
            gamma0: self.gamma,
            k_bounds: self.k_min.zip(self.k_max),
            path: self.input.clone(),
            seed: self.dist_seed,
        }
    }
}

/// Where the couplings of a run come from. Without `--source` or `--network`
/// a set is drawn from the distribution flags.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SourceArgs {
    /// Coupling CSV, one K per line.
    #[arg(long, alias = "couplings", conflicts_with = "network")]
    pub source: Option<PathBuf>,
    /// Adjacency matrix CSV or `src,dst` edge list; runs the full-network model.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Symmetrize the network on load.
    #[arg(long, requires = "network")]
    pub symmetrize: bool,
    /// Use the mean-field reduction K_j = k_j/N of the network.
    #[arg(long, requires = "network")]
    pub mean_field: bool,
    #[command(flatten)]
    pub dist: DistArgs,
}

impl SourceArgs {
    pub fn resolve(&self) -> Result<CouplingSource> {
        if let Some(path) = &self.source {
            return Ok(CouplingSource::MeanField(load_couplings(path)?));
        }
        if let Some(path) = &self.network {
            let loaded = load_adjacency(path, self.symmetrize)?;
            if loaded.graph.n() != loaded.original_n {
                info!(
                    "removed {} zero in-degree nodes, N = {}",
                    loaded.original_n - loaded.graph.n(),
                    loaded.graph.n()
                );
            }
            let source = CouplingSource::Network(loaded.graph);
            return if self.mean_field {
                Ok(CouplingSource::MeanField(source.couplings()?))
            } else {
                Ok(source)
            };
        }
        Ok(CouplingSource::MeanField(sample_couplings(&self.dist.spec(), self.dist.n)?))
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Intrinsic frequency ω (radians or `pi` multiples).
    #[arg(long, default_value = "pi", value_parser = parse_angle)]
    pub omega: f64,
    /// Global coupling scale S.
    #[arg(short = 'S', long = "coupling-scale", default_value_t = 1.0)]
    pub coupling_scale: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub d0: f64,
}

impl ModelArgs {
    pub fn params(&self, n: usize) -> ModelParams {
        ModelParams {
            lambda: self.lambda,
            omega: self.omega,
            coupling_scale: self.coupling_scale,
            alpha: self.alpha,
            beta: self.beta,
            d0: self.d0,
            n,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PlanArgs {
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 500.0)]
    pub t_transient: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_measure: f64,
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Master seed; `OSC_SEED` replaces the default.
    #[arg(long, env = "OSC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of initial conditions per point.
    #[arg(long, default_value_t = 1)]
    pub n_seeds: usize,
    /// Lock detection tolerance on the rotating-frame phase range.
    #[arg(long, default_value_t = DEFAULT_TOL_PHASE)]
    pub tol_phase: f64,
    /// K bins used for profile slopes.
    #[arg(long, default_value_t = DEFAULT_N_BINS)]
    pub n_bins: usize,
}

impl PlanArgs {
    pub fn plan(&self) -> IntegrationPlan {
        IntegrationPlan {
            dt: self.dt,
            t_transient: self.t_transient,
            t_measure: self.t_measure,
            record_stride: self.stride,
            seed: self.seed,
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_seeds as u64).map(|r| self.seed.wrapping_add(r)).collect()
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Also generate a random graph with degrees round(K_j N).
    #[arg(long)]
    pub graph: bool,
    /// Take the couplings for the graph from this file instead of sampling.
    #[arg(long)]
    pub from_couplings: Option<PathBuf>,
    /// Reduce this adjacency file to couplings K_j = k_j/N instead of sampling.
    #[arg(long, conflicts_with_all = ["graph", "from_couplings"])]
    pub adjacency: Option<PathBuf>,
    #[arg(long, requires = "adjacency")]
    pub symmetrize: bool,
    /// Seed of the graph generator.
    #[arg(long, default_value_t = 0)]
    pub graph_seed: u64,
    #[arg(short, long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Also solve the self-consistency problem from the simulated (R̃, Δ).
    #[arg(long)]
    pub theory: bool,
    /// Write the first seed's trajectory as `trajectory.csv`.
    #[arg(long)]
    pub trajectory: bool,
    /// Unwrap θ in the trajectory CSV.
    #[arg(long, requires = "trajectory")]
    pub unwrap: bool,
    #[arg(short, long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long, value_enum, default_value = "simulate")]
    pub mode: SweepMode,
    #[arg(long, default_value = "0", value_parser = parse_angle)]
    pub beta_min: f64,
    #[arg(long, default_value = "0.49pi", value_parser = parse_angle)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 41)]
    pub beta_steps: usize,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub d0_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub d0_max: f64,
    #[arg(long, default_value_t = 41)]
    pub d0_steps: usize,
    /// Skip tracing boundary curves in theory mode.
    #[arg(long)]
    pub no_boundaries: bool,
    #[arg(short, long, default_value = ".")]
    pub out_dir: PathBuf,
}

impl SweepArgs {
    pub fn spec(&self) -> SweepSpec {
        SweepSpec {
            alpha: self.model.alpha,
            beta_range: AxisRange::new(self.beta_min, self.beta_max, self.beta_steps),
            d0_range: AxisRange::new(self.d0_min, self.d0_max, self.d0_steps),
            seeds: self.plan.seeds(),
            mode: self.mode,
            base: self.model.params(1),
            plan: self.plan.plan(),
            tol_phase: self.plan.tol_phase,
            n_bins: self.plan.n_bins,
            solver: SolverOptions::default(),
            boundaries: !self.no_boundaries,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Initial R̃ for Newton; the grid scan is used otherwise.
    #[arg(long, requires = "init_delta")]
    pub init_r: Option<f64>,
    #[arg(long, requires = "init_r", allow_hyphen_values = true)]
    pub init_delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_N_BINS)]
    pub n_bins: usize,
    #[arg(short, long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifyArgs {
    /// Summary JSON written by `simulate`.
    pub summary: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
}

/// Resolved configuration written as `config.toml`.
#[derive(Debug, Serialize, Deserialize)]
struct RunConfig {
    version: String,
    rng: String,
    #[serde(flatten)]
    command: Command,
}

fn write_config(dir: &Path, command: &Command) -> Result<()> {
    let cfg = RunConfig {
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_ALGORITHM.to_string(),
        command: command.clone(),
    };
    let text = toml::to_string_pretty(&cfg).map_err(|e| Error::Config(e.to_string()))?;
    let path = dir.join("config.toml");
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn read_config(path: &Path) -> Result<Command> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg.command)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn stats_json(k: &CouplingSet) -> serde_json::Value {
    json!({
        "N": k.len(),
        "K_min": k.k_min(),
        "K_max": k.k_max(),
        "K_mean": k.k_mean(),
        "sigma_K": k.sigma_k(),
    })
}

fn cmd_gen(args: &GenArgs) -> Result<i32> {
    prepare_dir(&args.out_dir)?;
    let couplings = if let Some(path) = &args.adjacency {
        let loaded = load_adjacency(path, args.symmetrize)?;
        println!("loaded {} nodes, kept {}", loaded.original_n, loaded.graph.n());
        CouplingSource::Network(loaded.graph).couplings()?
    } else if let Some(path) = &args.from_couplings {
        load_couplings(path)?
    } else {
        let spec = args.dist.spec();
        spec.validate()?;
        sample_couplings(&spec, args.dist.n)?
    };
    let kpath = args.out_dir.join("couplings.csv");
    write_couplings(&kpath, &couplings)?;
    println!("{}", serde_json::to_string_pretty(&stats_json(&couplings)).expect("plain JSON"));

    if args.graph {
        let n = couplings.len();
        let degrees = if args.from_couplings.is_none() && args.dist.dist == DistributionKind::Gaussian {
            gaussian_degrees(&args.dist.spec(), n)?
        } else {
            let nf = n as f64;
            let lo = ((couplings.k_min() * nf).round() as usize).max(1);
            let hi = ((couplings.k_max() * nf).round() as usize).min(n.saturating_sub(1)).max(lo);
            degrees_from_couplings(&couplings, lo, hi)
        };
        let graph = generate_graph_from_degrees(&degrees, args.graph_seed)?;
        let epath = args.out_dir.join("edges.csv");
        write_edge_list(&epath, &graph)?;
        let d = graph.degrees();
        println!(
            "graph: N = {}, edges = {}, degree range [{}, {}]",
            graph.n(),
            graph.nnz() / 2,
            d.iter().min().copied().unwrap_or(0),
            d.iter().max().copied().unwrap_or(0)
        );
    }
    Ok(EXIT_OK)
}

fn write_profile(path: &Path, m: &RunMeasurement, couplings: &CouplingSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["K", "phi_star", "r_star", "locked"]).map_err(|e| Error::csv(path, e))?;
    let k = couplings.values();
    let mut order: Vec<usize> = (0..k.len()).collect();
    order.sort_by(|&a, &b| k[a].total_cmp(&k[b]));
    for j in order {
        let locked = u8::from(m.partition.is_locked(j));
        w.write_record([
            k[j].to_string(),
            m.partition.phi[j].to_string(),
            m.partition.r[j].to_string(),
            locked.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_trajectory(path: &Path, traj: &Trajectory, unwrap: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["t", "osc_id", "theta", "r"]).map_err(|e| Error::csv(path, e))?;
    let n = traj.n_oscillators();
    let mut previous = vec![0.0; n];
    for (i, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        let ts = t.to_string();
        for (j, z) in s.z.iter().enumerate() {
            let mut theta = z.arg();
            if unwrap && i > 0 {
                theta = previous[j] + crate::observables::wrap_angle(theta - previous[j]);
            }
            previous[j] = theta;
            w.write_record([ts.clone(), j.to_string(), theta.to_string(), z.norm().to_string()])
                .map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_prediction(path: &Path, point: &PredictedPoint) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["K", "phi_star_pred", "r_star_pred", "locked_pred"])
        .map_err(|e| Error::csv(path, e))?;
    for row in &point.profile {
        let phi = if row.phi_star_pred.is_finite() { row.phi_star_pred.to_string() } else { String::new() };
        w.write_record([row.k.to_string(), phi, row.r_star_pred.to_string(), u8::from(row.locked_pred).to_string()])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Theory output JSON for one point.
pub fn theory_json(point: &PredictedPoint) -> serde_json::Value {
    let s = &point.solution;
    json!({
        "R_tilde": s.r_tilde,
        "Delta": finite(s.delta),
        "converged": s.converged,
        "residual": s.residual,
        "branch_note": s.branch_note,
        "state_label": point.label.to_string(),
        "K_lock_lo": point.lock_interval.map(|i| i.0),
        "K_lock_hi": point.lock_interval.map(|i| i.1),
        "locked_fraction": point.membership.locked_fraction(),
        "mean_amp_slope": point.amp.mean_slope,
        "inflection": point.amp.inflection,
    })
}

fn mean_of(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    prepare_dir(&args.out_dir)?;
    let source = args.source.resolve()?;
    let couplings = source.couplings()?;
    let params = args.model.params(source.n());
    params.validate()?;
    let plan = args.plan.plan();
    plan.validate()?;
    let seeds = args.plan.seeds();
    if seeds.is_empty() {
        return Err(Error::param("n_seeds", "need at least one seed"));
    }

    let mut runs = Vec::new();
    for (r, &seed) in seeds.iter().enumerate() {
        info!("seed {seed}");
        let traj = match &source {
            CouplingSource::MeanField(k) => crate::integrator::simulate_mean_field(&params, k, &plan.with_seed(seed)),
            CouplingSource::Network(g) => crate::integrator::simulate_network(&params, g, &plan.with_seed(seed)),
        }?;
        let m = measure(&traj, args.plan.tol_phase, args.plan.n_bins);
        if r == 0 {
            write_profile(&args.out_dir.join("profiles.csv"), &m, &couplings)?;
            if args.trajectory {
                write_trajectory(&args.out_dir.join("trajectory.csv"), &traj, args.unwrap)?;
            }
        }
        let label = label_run(&m, &params, &couplings);
        runs.push((seed, m, label));
    }

    let r_tilde = mean_of(&runs.iter().map(|r| r.1.r_tilde_mean()).collect::<Vec<_>>()).unwrap_or(0.0);
    let omegas: Vec<f64> = runs.iter().filter_map(|r| r.1.series.omega).collect();
    let deltas: Vec<f64> = runs.iter().filter_map(|r| r.1.series.delta).collect();
    let slopes: Vec<f64> = runs.iter().filter_map(|r| r.1.amp.mean_slope).collect();
    let n_locked = mean_of(&runs.iter().map(|r| r.1.partition.locked.len() as f64).collect::<Vec<_>>())
        .unwrap_or(0.0)
        .round() as usize;
    let labels: Vec<StateLabel> = runs.iter().map(|r| r.2).collect();
    let label = labels
        .iter()
        .max_by_key(|l| (labels.iter().filter(|m| m == l).count(), std::cmp::Reverse(labels.iter().position(|m| m == *l))))
        .copied()
        .expect("at least one seed");
    let per_seed: Vec<serde_json::Value> = runs
        .iter()
        .map(|(seed, m, l)| {
            json!({
                "seed": seed,
                "R_tilde_mean": m.r_tilde_mean(),
                "Omega": m.series.omega,
                "Delta": m.series.delta,
                "n_locked": m.partition.locked.len(),
                "mean_amp_slope": m.amp.mean_slope,
                "inflection": m.amp.inflection,
                "state_label": l.to_string(),
            })
        })
        .collect();
    let mut summary = json!({
        "R_tilde_mean": r_tilde,
        "Omega": mean_of(&omegas),
        "Delta": mean_of(&deltas),
        "n_locked": n_locked,
        "N": params.n,
        "mean_amp_slope": mean_of(&slopes),
        "inflection": runs.iter().filter(|r| r.1.amp.inflection).count() * 2 > runs.len(),
        "state_label": label.to_string(),
        "params": params,
        "plan": plan,
        "seeds": per_seed,
        "couplings": stats_json(&couplings),
    });

    if args.theory {
        let init = mean_of(&deltas).map(|d| (r_tilde, d));
        let point = predict_point(&params, &couplings, init, &SolverOptions::default(), args.plan.n_bins);
        write_prediction(&args.out_dir.join("prediction.csv"), &point)?;
        summary["theory"] = theory_json(&point);
    }
    write_json(&args.out_dir.join("summary.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary["state_label"]).expect("plain JSON"));
    info!("R_tilde = {r_tilde}, Delta = {:?}", mean_of(&deltas));
    Ok(EXIT_OK)
}

fn cmd_theory(args: &TheoryArgs) -> Result<i32> {
    prepare_dir(&args.out_dir)?;
    let couplings = args.source.resolve()?.couplings()?;
    let params = args.model.params(couplings.len());
    params.validate()?;
    let init = args.init_r.zip(args.init_delta);
    let point = predict_point(&params, &couplings, init, &SolverOptions::default(), args.n_bins);
    let mut out = theory_json(&point);
    out["params"] = serde_json::to_value(&params).expect("plain struct");
    write_json(&args.out_dir.join("theory.json"), &out)?;
    write_prediction(&args.out_dir.join("prediction.csv"), &point)?;
    println!("{}", serde_json::to_string_pretty(&out).expect("plain JSON"));
    Ok(EXIT_OK)
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    prepare_dir(&args.out_dir)?;
    let source = args.source.resolve()?;
    let spec = args.spec();
    let result = run_grid(&spec, &source)?;
    let mut failed = 0;
    let mut total = 0;
    let mut write = |grid: &SweepGrid, kind: &str| -> Result<()> {
        let csv = args.out_dir.join(format!("grid_{kind}.csv"));
        export_grid(grid, &csv)?;
        GridMetadata::new(&spec, &source, grid, kind, result.wall_time_s)
            .write(&args.out_dir.join(format!("grid_{kind}.json")))?;
        failed += grid.n_failed();
        total += grid.cells.len();
        Ok(())
    };
    if let Some(g) = &result.simulated {
        write(g, "simulate")?;
    }
    if let Some(g) = &result.theory {
        write(g, "theory")?;
        if spec.boundaries {
            let couplings = source.couplings()?;
            let pts = boundary_curves(&spec, &couplings, g, &result.theory_solutions);
            export_boundaries(&pts, &args.out_dir.join("boundaries.csv"))?;
        }
    }
    println!("{} cells, {} failed, {:.1} s", total, failed, result.wall_time_s);
    Ok(match failed {
        0 => EXIT_OK,
        f if f == total => EXIT_RUNTIME,
        _ => EXIT_PARTIAL,
    })
}

/// Fields of a simulation summary the classifier needs.
#[derive(Debug, Deserialize)]
struct SummaryInput {
    #[serde(rename = "R_tilde_mean")]
    r_tilde: f64,
    #[serde(rename = "Delta")]
    delta: Option<f64>,
    params: ModelParams,
}

fn cmd_classify(args: &ClassifyArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.summary).map_err(|e| Error::io(&args.summary, e))?;
    let s: SummaryInput = serde_json::from_str(&text).map_err(|e| Error::json(&args.summary, e))?;
    let couplings = args.source.resolve()?.couplings()?;
    let params = ModelParams {
        n: couplings.len(),
        ..s.params
    };
    let label = match s.delta {
        Some(d) => classify_state(s.r_tilde, d, &params, &couplings),
        None => StateLabel::incoherent(&params),
    };
    println!("{label}");
    Ok(EXIT_OK)
}

fn dispatch(command: &Command) -> Result<i32> {
    let out_dir = match command {
        Command::Gen(a) => Some(&a.out_dir),
        Command::Simulate(a) => Some(&a.out_dir),
        Command::Sweep(a) => Some(&a.out_dir),
        Command::Theory(a) => Some(&a.out_dir),
        Command::Classify(_) | Command::Replay { .. } => None,
    };
    if let Some(dir) = out_dir {
        prepare_dir(dir)?;
        write_config(dir, command)?;
    }
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Theory(a) => cmd_theory(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Replay { config } => {
            let cmd = read_config(config)?;
            if matches!(cmd, Command::Replay { .. }) {
                return Err(Error::Config("a replay config cannot replay itself".into()));
            }
            dispatch(&cmd)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            warn!("could not size the worker pool: {e}");
        }
    }
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter { .. } | Error::Config(_) => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            }
        }
    }
}
