//! (β, d₀) phase-diagram grids at fixed α, by simulation and by theory.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{simulate_mean_field, simulate_network, IntegrationPlan, RNG_ALGORITHM};
use crate::model::{CouplingSet, ModelParams, NetworkGraph};
use crate::networks::degrees_to_couplings;
use crate::observables::{measure, RunMeasurement, DEFAULT_N_BINS, DEFAULT_TOL_PHASE};
use crate::theory::{
    classify_observed, lock_margin, predict_point, solve_amplitude, solve_self_consistency, ObservedEnds,
    PredictedPoint, SelfConsistentSolution, SolverOptions, StateLabel,
};

/// Grid CSV header, shared with the plotting tools.
pub const GRID_HEADER: [&str; 10] = [
    "alpha",
    "beta",
    "d0",
    "R_tilde",
    "Delta",
    "amp_slope",
    "inflection_frac",
    "state",
    "fully_drifting",
    "status",
];

/// Mean locked fraction below which a cell counts as fully drifting.
pub const FULLY_DRIFTING_FRACTION: f64 = 0.01;

/// Bisection steps when refining a boundary crossing between two cells.
const BOUNDARY_BISECTIONS: usize = 12;

/// Where the per-oscillator couplings come from.
#[derive(Clone, Debug)]
pub enum CouplingSource {
    MeanField(CouplingSet),
    /// Full-network model; the theory side uses `K_j = k_j / N`.
    Network(NetworkGraph),
}

impl CouplingSource {
    pub fn n(&self) -> usize {
        match self {
            CouplingSource::MeanField(k) => k.len(),
            CouplingSource::Network(g) => g.n(),
        }
    }

    /// Couplings seen by the mean-field theory.
    pub fn couplings(&self) -> Result<CouplingSet> {
        match self {
            CouplingSource::MeanField(k) => Ok(k.clone()),
            CouplingSource::Network(g) => degrees_to_couplings(g),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CouplingSource::MeanField(k) => format!(
                "mean-field coupling set, N = {}, K in [{}, {}], mean {}, sd {}",
                k.len(),
                k.k_min(),
                k.k_max(),
                k.k_mean(),
                k.sigma_k()
            ),
            CouplingSource::Network(g) => format!("network, N = {}, {} directed edges", g.n(), g.nnz()),
        }
    }

    fn simulate(&self, params: &ModelParams, plan: &IntegrationPlan) -> Result<crate::integrator::Trajectory> {
        match self {
            CouplingSource::MeanField(k) => simulate_mean_field(params, k, plan),
            CouplingSource::Network(g) => simulate_network(params, g, plan),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Simulate,
    Theory,
    Both,
}

impl SweepMode {
    pub fn simulates(self) -> bool {
        matches!(self, SweepMode::Simulate | SweepMode::Both)
    }

    pub fn solves(self) -> bool {
        matches!(self, SweepMode::Theory | SweepMode::Both)
    }
}

/// Inclusive, evenly spaced axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

/// Everything a grid run needs apart from the coupling source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub alpha: f64,
    pub beta_range: AxisRange,
    pub d0_range: AxisRange,
    pub seeds: Vec<u64>,
    pub mode: SweepMode,
    /// λ, ω and S are taken from here; α, β, d₀ and N are set per cell.
    pub base: ModelParams,
    pub plan: IntegrationPlan,
    pub tol_phase: f64,
    pub n_bins: usize,
    pub solver: SolverOptions,
    pub boundaries: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta_range: AxisRange::new(0.0, 0.49 * std::f64::consts::PI, 41),
            d0_range: AxisRange::new(-2.0, 2.0, 41),
            seeds: (0..10).collect(),
            mode: SweepMode::Simulate,
            base: ModelParams::default(),
            plan: IntegrationPlan::default(),
            tol_phase: DEFAULT_TOL_PHASE,
            n_bins: DEFAULT_N_BINS,
            solver: SolverOptions::default(),
            boundaries: true,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let b = &self.beta_range;
        if !(b.lo >= 0.0 && b.hi < half_pi && b.lo <= b.hi) {
            return Err(Error::param("beta_range", format!("[{}, {}] must lie in [0, π/2)", b.lo, b.hi)));
        }
        let d = &self.d0_range;
        if !(d.lo <= d.hi && d.lo.is_finite() && d.hi.is_finite()) {
            return Err(Error::param("d0_range", format!("[{}, {}] is not an interval", d.lo, d.hi)));
        }
        if b.n < 2 || d.n < 2 {
            return Err(Error::param("n_steps", "every axis needs at least 2 steps"));
        }
        if self.mode.simulates() {
            if self.seeds.is_empty() {
                return Err(Error::param("seeds", "simulation needs at least one seed"));
            }
            self.plan.validate()?;
        }
        self.base.with_shape(self.alpha, b.lo, d.lo).validate()
    }

    pub fn params_at(&self, beta: f64, d0: f64, n: usize) -> ModelParams {
        ModelParams {
            n,
            ..self.base.with_shape(self.alpha, beta, d0)
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of repetition `i_rep` in cell (`i_beta`, `i_d0`), independent of the
/// order in which cells are evaluated.
pub fn cell_seed(master: u64, i_beta: usize, i_d0: usize, i_rep: usize) -> u64 {
    [i_beta as u64, i_d0 as u64, i_rep as u64]
        .iter()
        .fold(mix64(master), |h, &v| mix64(h ^ v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// Theory cell whose solver did not reach tolerance; values are the best
    /// estimate.
    Unconverged,
    Failed,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Unconverged => "unconverged",
            CellStatus::Failed => "failed",
        }
    }
}

/// Aggregate of one (β, d₀) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub beta: f64,
    pub d0: f64,
    pub r_tilde: f64,
    /// Mean over seeds with a defined Ω; NaN when none has one.
    pub delta: f64,
    /// Mean amplitude slope; NaN when undefined for every seed.
    pub amp_slope: f64,
    pub inflection_frac: f64,
    pub locked_fraction: f64,
    pub state: Option<StateLabel>,
    pub fully_drifting: bool,
    pub status: CellStatus,
    /// Seeds whose integration failed.
    #[serde(default)]
    pub failed_seeds: Vec<u64>,
}

impl CellRecord {
    fn failed(beta: f64, d0: f64, failed_seeds: Vec<u64>) -> Self {
        Self {
            beta,
            d0,
            r_tilde: f64::NAN,
            delta: f64::NAN,
            amp_slope: f64::NAN,
            inflection_frac: f64::NAN,
            locked_fraction: f64::NAN,
            state: None,
            fully_drifting: false,
            status: CellStatus::Failed,
            failed_seeds,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status != CellStatus::Failed
    }
}

/// Summary of one simulated seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedOutcome {
    pub r_tilde: f64,
    pub delta: Option<f64>,
    pub amp_slope: Option<f64>,
    pub inflection: bool,
    pub locked_fraction: f64,
    pub label: StateLabel,
}

/// Label of a measured run.
pub fn label_run(m: &RunMeasurement, params: &ModelParams, couplings: &CouplingSet) -> StateLabel {
    let Some(delta) = m.series.delta else {
        return StateLabel::incoherent(params);
    };
    let k = couplings.values();
    let extreme = |pick_max: bool| {
        (0..k.len())
            .filter(|&j| if pick_max { k[j] == couplings.k_max() } else { k[j] == couplings.k_min() })
            .all(|j| m.partition.is_locked(j))
    };
    let observed = ObservedEnds {
        lowest_locked: extreme(false),
        highest_locked: extreme(true),
        n_locked: m.partition.locked.len(),
        n: m.partition.n(),
    };
    let amp = crate::theory::AmpSlope::from_slope(m.amp.mean_slope, m.amp.inflection);
    classify_observed(m.r_tilde_mean(), delta, params, couplings, observed).with_amp_slope(amp)
}

fn simulate_seed(
    params: &ModelParams,
    source: &CouplingSource,
    plan: &IntegrationPlan,
    tol_phase: f64,
    n_bins: usize,
) -> Result<SeedOutcome> {
    let traj = source.simulate(params, plan)?;
    let m = measure(&traj, tol_phase, n_bins);
    let label = label_run(&m, params, &traj.couplings);
    Ok(SeedOutcome {
        r_tilde: m.r_tilde_mean(),
        delta: m.series.delta,
        amp_slope: m.amp.mean_slope,
        inflection: m.amp.inflection,
        locked_fraction: m.partition.locked_fraction(),
        label,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Most frequent label; ties go to the label seen first.
fn modal_label(labels: &[StateLabel]) -> Option<StateLabel> {
    let mut counts: HashMap<StateLabel, usize> = HashMap::new();
    for l in labels {
        *counts.entry(*l).or_default() += 1;
    }
    let best = counts.values().copied().max()?;
    labels.iter().find(|l| counts[l] == best).copied()
}

/// Aggregates per-seed outcomes; a single failed seed fails the cell.
pub fn aggregate(beta: f64, d0: f64, seeds: &[u64], outcomes: Vec<Result<SeedOutcome>>) -> CellRecord {
    let failed: Vec<u64> = seeds
        .iter()
        .zip(&outcomes)
        .filter(|(_, o)| o.is_err())
        .map(|(s, _)| *s)
        .collect();
    if !failed.is_empty() || outcomes.is_empty() {
        return CellRecord::failed(beta, d0, failed);
    }
    let ok: Vec<SeedOutcome> = outcomes.into_iter().map(|o| o.expect("checked above")).collect();
    let locked_fraction = mean(ok.iter().map(|o| o.locked_fraction));
    let labels: Vec<StateLabel> = ok.iter().map(|o| o.label).collect();
    CellRecord {
        beta,
        d0,
        r_tilde: mean(ok.iter().map(|o| o.r_tilde)),
        delta: mean(ok.iter().filter_map(|o| o.delta)),
        amp_slope: mean(ok.iter().filter_map(|o| o.amp_slope)),
        inflection_frac: mean(ok.iter().map(|o| if o.inflection { 1.0 } else { 0.0 })),
        locked_fraction,
        state: modal_label(&labels),
        fully_drifting: locked_fraction < FULLY_DRIFTING_FRACTION,
        status: CellStatus::Ok,
        failed_seeds: Vec::new(),
    }
}

/// Simulates one parameter point for every seed and aggregates the results.
pub fn run_point(
    params: &ModelParams,
    source: &CouplingSource,
    seeds: &[u64],
    plan: &IntegrationPlan,
    tol_phase: f64,
    n_bins: usize,
) -> CellRecord {
    let outcomes: Vec<Result<SeedOutcome>> = seeds
        .par_iter()
        .map(|&s| simulate_seed(params, source, &plan.with_seed(s), tol_phase, n_bins))
        .collect();
    aggregate(params.beta, params.d0, seeds, outcomes)
}

/// Theory cell from a prediction.
pub fn theory_cell(point: &PredictedPoint, beta: f64, d0: f64) -> CellRecord {
    let sol = &point.solution;
    let locked_fraction = point.membership.locked_fraction();
    CellRecord {
        beta,
        d0,
        r_tilde: sol.r_tilde,
        delta: sol.delta,
        amp_slope: point.amp.mean_slope.unwrap_or(f64::NAN),
        inflection_frac: if point.amp.inflection { 1.0 } else { 0.0 },
        locked_fraction,
        state: Some(point.label),
        fully_drifting: locked_fraction < FULLY_DRIFTING_FRACTION,
        status: if sol.converged || sol.is_incoherent() {
            CellStatus::Ok
        } else {
            CellStatus::Unconverged
        },
        failed_seeds: Vec::new(),
    }
}

/// Cells of one grid, β-major, with the spec that produced them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepGrid {
    pub alpha: f64,
    pub betas: Vec<f64>,
    pub d0s: Vec<f64>,
    pub cells: Vec<CellRecord>,
}

impl SweepGrid {
    pub fn cell(&self, i_beta: usize, i_d0: usize) -> &CellRecord {
        &self.cells[i_beta * self.d0s.len() + i_d0]
    }

    pub fn n_failed(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_ok()).count()
    }

    /// Mean of `f` over cells that did not fail and give a finite value.
    pub fn mean_of(&self, f: impl Fn(&CellRecord) -> f64) -> f64 {
        mean(self.cells.iter().filter(|c| c.is_ok()).map(f).filter(|v| v.is_finite()))
    }
}

/// Output of [`run_grid`]; either grid is present depending on the mode.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub simulated: Option<SweepGrid>,
    pub theory: Option<SweepGrid>,
    pub theory_solutions: Vec<SelfConsistentSolution>,
    pub wall_time_s: f64,
}

/// Evaluates every cell of the grid; cells and seeds run in parallel on the
/// current rayon pool. Failed cells are recorded, not propagated.
pub fn run_grid(spec: &SweepSpec, source: &CouplingSource) -> Result<SweepResult> {
    spec.validate()?;
    let start = Instant::now();
    let betas = spec.beta_range.values();
    let d0s = spec.d0_range.values();
    let n = source.n();
    let cells: Vec<(usize, usize)> = (0..betas.len())
        .flat_map(|i| (0..d0s.len()).map(move |j| (i, j)))
        .collect();
    let grid = |cells| SweepGrid {
        alpha: spec.alpha,
        betas: betas.clone(),
        d0s: d0s.clone(),
        cells,
    };

    let simulated = if spec.mode.simulates() {
        let jobs: Vec<(usize, usize, usize)> = cells
            .iter()
            .flat_map(|&(i, j)| (0..spec.seeds.len()).map(move |r| (i, j, r)))
            .collect();
        let outcomes: Vec<Result<SeedOutcome>> = jobs
            .par_iter()
            .map(|&(i, j, r)| {
                let params = spec.params_at(betas[i], d0s[j], n);
                let plan = spec.plan.with_seed(cell_seed(spec.seeds[r], i, j, r));
                simulate_seed(&params, source, &plan, spec.tol_phase, spec.n_bins)
            })
            .collect();
        let mut outcomes = outcomes.into_iter();
        let records = cells
            .iter()
            .map(|&(i, j)| {
                let seeds: Vec<u64> = (0..spec.seeds.len()).map(|r| cell_seed(spec.seeds[r], i, j, r)).collect();
                let chunk: Vec<Result<SeedOutcome>> = outcomes.by_ref().take(seeds.len()).collect();
                aggregate(betas[i], d0s[j], &seeds, chunk)
            })
            .collect();
        Some(grid(records))
    } else {
        None
    };

    let mut theory_solutions = Vec::new();
    let theory = if spec.mode.solves() {
        let couplings = source.couplings()?;
        let points: Vec<PredictedPoint> = cells
            .par_iter()
            .map(|&(i, j)| {
                let params = spec.params_at(betas[i], d0s[j], couplings.len());
                let init = simulated.as_ref().and_then(|g| {
                    let c = g.cell(i, j);
                    (c.is_ok() && c.r_tilde > 0.0 && c.delta.is_finite()).then_some((c.r_tilde, c.delta))
                });
                predict_point(&params, &couplings, init, &spec.solver, spec.n_bins)
            })
            .collect();
        let records = cells
            .iter()
            .zip(&points)
            .map(|(&(i, j), p)| theory_cell(p, betas[i], d0s[j]))
            .collect();
        theory_solutions = points.into_iter().map(|p| p.solution).collect();
        Some(grid(records))
    } else {
        None
    };

    Ok(SweepResult {
        simulated,
        theory,
        theory_solutions,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// One vertex of a phase-diagram boundary curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub curve_id: String,
    pub beta: f64,
    pub d0: f64,
}

/// Boundary curves traced in theory mode:
/// `delta_zero` (Δ = 0), `r_eq_d0` (R̃ = |d₀ sin α| r*(K_max)),
/// `lock_kmin` and `lock_kmax` (locking boundary at the ends of the K range).
pub const BOUNDARY_CURVES: [&str; 4] = ["delta_zero", "r_eq_d0", "lock_kmin", "lock_kmax"];

fn boundary_fields(sol: &SelfConsistentSolution, params: &ModelParams, couplings: &CouplingSet) -> [f64; 4] {
    if sol.is_incoherent() || !sol.delta.is_finite() {
        return [f64::NAN; 4];
    }
    let (r, d) = (sol.r_tilde, sol.delta);
    let r_max = solve_amplitude(couplings.k_max(), r, d, params).value();
    [
        d,
        r - params.d0_sin_alpha().abs() * r_max,
        lock_margin(couplings.k_min(), r, d, params),
        lock_margin(couplings.k_max(), r, d, params),
    ]
}

/// Locates every sign change of the boundary fields between adjacent grid
/// cells and refines it by bisection along the connecting segment, re-solving
/// the self-consistency problem from the nearer end's solution.
pub fn boundary_curves(
    spec: &SweepSpec,
    couplings: &CouplingSet,
    grid: &SweepGrid,
    solutions: &[SelfConsistentSolution],
) -> Vec<BoundaryPoint> {
    let (nb, nd) = (grid.betas.len(), grid.d0s.len());
    let n = couplings.len();
    let fields: Vec<[f64; 4]> = (0..nb * nd)
        .map(|c| boundary_fields(&solutions[c], &spec.params_at(grid.betas[c / nd], grid.d0s[c % nd], n), couplings))
        .collect();
    let mut edges = Vec::new();
    for i in 0..nb {
        for j in 0..nd {
            if i + 1 < nb {
                edges.push(((i, j), (i + 1, j)));
            }
            if j + 1 < nd {
                edges.push(((i, j), (i, j + 1)));
            }
        }
    }
    let mut jobs = Vec::new();
    for &(a, b) in &edges {
        let (ca, cb) = (a.0 * nd + a.1, b.0 * nd + b.1);
        for f in 0..4 {
            let (fa, fb) = (fields[ca][f], fields[cb][f]);
            if fa.is_finite() && fb.is_finite() && (fa > 0.0) != (fb > 0.0) {
                jobs.push((ca, cb, f));
            }
        }
    }
    let mut points: Vec<BoundaryPoint> = jobs
        .par_iter()
        .map(|&(ca, cb, f)| {
            let at = |t: f64| {
                (
                    grid.betas[ca / nd] + t * (grid.betas[cb / nd] - grid.betas[ca / nd]),
                    grid.d0s[ca % nd] + t * (grid.d0s[cb % nd] - grid.d0s[ca % nd]),
                )
            };
            let (mut t0, mut t1) = (0.0, 1.0);
            let (mut s0, mut s1) = (solutions[ca].clone(), solutions[cb].clone());
            let mut f0 = fields[ca][f];
            for _ in 0..BOUNDARY_BISECTIONS {
                let tm = 0.5 * (t0 + t1);
                let (beta, d0) = at(tm);
                let params = spec.params_at(beta, d0, n);
                let near = if tm - t0 <= t1 - tm { &s0 } else { &s1 };
                let sol = solve_self_consistency(&params, couplings, Some((near.r_tilde, near.delta)), &spec.solver);
                let fm = boundary_fields(&sol, &params, couplings)[f];
                if !fm.is_finite() {
                    break;
                }
                if (fm > 0.0) == (f0 > 0.0) {
                    t0 = tm;
                    f0 = fm;
                    s0 = sol;
                } else {
                    t1 = tm;
                    s1 = sol;
                }
            }
            let (beta, d0) = at(0.5 * (t0 + t1));
            BoundaryPoint {
                curve_id: BOUNDARY_CURVES[f].to_string(),
                beta,
                d0,
            }
        })
        .collect();
    points.sort_by(|a, b| {
        a.curve_id
            .cmp(&b.curve_id)
            .then(a.beta.total_cmp(&b.beta))
            .then(a.d0.total_cmp(&b.d0))
    });
    points
}

fn num(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

/// Writes the grid CSV; failed cells carry empty numeric fields.
pub fn export_grid(grid: &SweepGrid, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(GRID_HEADER).map_err(|e| Error::csv(path, e))?;
    for c in &grid.cells {
        let failed = c.status == CellStatus::Failed;
        let field = |x: f64| if failed { String::new() } else { num(x) };
        let row = [
            num(grid.alpha),
            num(c.beta),
            num(c.d0),
            field(c.r_tilde),
            field(c.delta),
            field(c.amp_slope),
            field(c.inflection_frac),
            c.state.map(|s| s.to_string()).unwrap_or_default(),
            if failed { String::new() } else { u8::from(c.fully_drifting).to_string() },
            c.status.as_str().to_string(),
        ];
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row of a grid CSV as read back.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct GridRow {
    pub alpha: f64,
    pub beta: f64,
    pub d0: f64,
    #[serde(rename = "R_tilde")]
    pub r_tilde: Option<f64>,
    #[serde(rename = "Delta")]
    pub delta: Option<f64>,
    pub amp_slope: Option<f64>,
    pub inflection_frac: Option<f64>,
    pub state: String,
    pub fully_drifting: Option<u8>,
    pub status: String,
}

pub fn load_grid(path: &Path) -> Result<Vec<GridRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| Error::csv(path, e))).collect()
}

pub fn export_boundaries(points: &[BoundaryPoint], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["curve_id", "beta", "d0"]).map_err(|e| Error::csv(path, e))?;
    for p in points {
        w.write_record([p.curve_id.clone(), num(p.beta), num(p.d0)])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// JSON sidecar written next to a grid CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridMetadata {
    pub spec: SweepSpec,
    pub source: String,
    pub kind: String,
    pub version: String,
    pub rng: String,
    pub wall_time_s: f64,
    pub n_cells: usize,
    pub n_failed: usize,
}

impl GridMetadata {
    pub fn new(spec: &SweepSpec, source: &CouplingSource, grid: &SweepGrid, kind: &str, wall_time_s: f64) -> Self {
        Self {
            spec: spec.clone(),
            source: source.describe(),
            kind: kind.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_ALGORITHM.to_string(),
            wall_time_s,
            n_cells: grid.cells.len(),
            n_failed: grid.n_failed(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(f, "{text}").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_spec(mode: SweepMode) -> SweepSpec {
        SweepSpec {
            alpha: 0.5 * PI,
            beta_range: AxisRange::new(0.0, 0.3 * PI, 2),
            d0_range: AxisRange::new(0.5, 1.5, 2),
            seeds: vec![1, 2],
            mode,
            plan: IntegrationPlan {
                t_transient: 20.0,
                t_measure: 10.0,
                ..IntegrationPlan::default()
            },
            ..SweepSpec::default()
        }
    }

    fn source() -> CouplingSource {
        CouplingSource::MeanField(CouplingSet::new((0..40).map(|j| 0.015 + 2.5e-4 * j as f64).collect()).unwrap())
    }

    #[test]
    fn axis_is_inclusive() {
        let v = AxisRange::new(-2.0, 2.0, 41).values();
        assert_eq!(v.len(), 41);
        assert_eq!((v[0], v[20], v[40]), (-2.0, 0.0, 2.0));
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let mut all = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                for r in 0..3 {
                    all.push(cell_seed(7, i, j, r));
                }
            }
        }
        assert_eq!(cell_seed(7, 1, 2, 0), cell_seed(7, 1, 2, 0));
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 75);
        assert_ne!(cell_seed(7, 0, 0, 0), cell_seed(8, 0, 0, 0));
    }

    #[test]
    fn spec_validation() {
        assert!(small_spec(SweepMode::Simulate).validate().is_ok());
        let mut s = small_spec(SweepMode::Simulate);
        s.beta_range.hi = 0.5 * PI;
        assert!(s.validate().is_err());
        let mut s = small_spec(SweepMode::Simulate);
        s.seeds.clear();
        assert!(s.validate().is_err());
        s.mode = SweepMode::Theory;
        assert!(s.validate().is_ok());
        let mut s = small_spec(SweepMode::Theory);
        s.d0_range.n = 1;
        assert!(s.validate().is_err());
    }

    #[test]
    fn modal_label_prefers_first_on_tie() {
        let a: StateLabel = "S1_l+".parse().unwrap();
        let b: StateLabel = "S3_l+d".parse().unwrap();
        assert_eq!(modal_label(&[a, b, b, a]), Some(a));
        assert_eq!(modal_label(&[a, b, b]), Some(b));
        assert_eq!(modal_label(&[]), None);
    }

    #[test]
    fn failed_seed_fails_cell() {
        let ok = SeedOutcome {
            r_tilde: 0.5,
            delta: Some(0.1),
            amp_slope: None,
            inflection: false,
            locked_fraction: 1.0,
            label: "S2_l-".parse().unwrap(),
        };
        let bad = Err(Error::Config("boom".into()));
        let c = aggregate(0.1, 1.0, &[3, 4], vec![Ok(ok.clone()), bad]);
        assert_eq!(c.status, CellStatus::Failed);
        assert_eq!(c.failed_seeds, vec![4]);
        let c = aggregate(0.1, 1.0, &[3, 4], vec![Ok(ok.clone()), Ok(ok)]);
        assert_eq!(c.status, CellStatus::Ok);
        assert!(c.amp_slope.is_nan());
        assert_eq!(c.delta, 0.1);
    }

    #[test]
    fn grid_is_schedule_independent() {
        let spec = small_spec(SweepMode::Simulate);
        let a = run_grid(&spec, &source()).unwrap().simulated.unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_grid(&spec, &source())).unwrap().simulated.unwrap();
        assert_eq!(a.cells.len(), 4);
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.r_tilde.to_bits(), y.r_tilde.to_bits());
            assert_eq!(x.state, y.state);
        }
    }

    #[test]
    fn export_round_trip() {
        let spec = small_spec(SweepMode::Both);
        let res = run_grid(&spec, &source()).unwrap();
        let mut grid = res.theory.unwrap();
        grid.cells[3] = CellRecord::failed(grid.cells[3].beta, grid.cells[3].d0, vec![9]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        export_grid(&grid, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().next().unwrap(), GRID_HEADER.join(","));
        let rows = load_grid(&path).unwrap();
        for (row, cell) in rows.iter().zip(&grid.cells) {
            assert_eq!(row.beta, cell.beta);
            assert_eq!(row.d0, cell.d0);
            if cell.is_ok() {
                assert_eq!(row.r_tilde, Some(cell.r_tilde));
                assert_eq!(row.delta.map(f64::to_bits), Some(cell.delta.to_bits()));
                assert_eq!(row.state, cell.state.unwrap().to_string());
            }
        }
        assert_eq!(rows[3].status, "failed");
        assert_eq!(rows[3].r_tilde, None);
        assert!(res.simulated.is_some());
    }

    #[test]
    fn boundary_points_lie_inside_the_grid() {
        let couplings = CouplingSet::new((0..60).map(|j| 0.01 + 3e-4 * j as f64).collect()).unwrap();
        let spec = SweepSpec {
            alpha: 0.5 * PI,
            beta_range: AxisRange::new(0.0, 0.4 * PI, 5),
            d0_range: AxisRange::new(0.0, 1.5, 5),
            mode: SweepMode::Theory,
            ..SweepSpec::default()
        };
        let src = CouplingSource::MeanField(couplings.clone());
        let res = run_grid(&spec, &src).unwrap();
        let grid = res.theory.unwrap();
        let pts = boundary_curves(&spec, &couplings, &grid, &res.theory_solutions);
        let dz: Vec<&BoundaryPoint> = pts.iter().filter(|p| p.curve_id == "delta_zero").collect();
        assert!(!dz.is_empty());
        for p in dz {
            // The in-phase line of a nearly homogeneous set is d₀ ≈ sin β.
            assert!((p.d0 - p.beta.sin()).abs() < 0.1, "{p:?}");
        }
    }
}
