//! Fixed-step RK4 integration, seeded initial conditions and trajectories.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    CouplingSet, EnsembleState, MeanFieldSystem, ModelParams, NetworkGraph, NetworkSystem,
    VectorField, C64,
};

/// Name of the generator behind every seeded draw, echoed into configs.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

/// Standard deviation of the initial amplitudes around √λ.
pub const INIT_R_SD: f64 = 0.1;

/// Step size, durations and recording stride for one integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationPlan {
    pub dt: f64,
    pub t_transient: f64,
    pub t_measure: f64,
    pub record_stride: usize,
    pub seed: u64,
}

impl Default for IntegrationPlan {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_transient: 500.0,
            t_measure: 100.0,
            record_stride: 10,
            seed: 0,
        }
    }
}

impl IntegrationPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("{} must be > 0", self.dt)));
        }
        if !(self.t_transient >= 0.0 && self.t_transient.is_finite()) {
            return Err(Error::param("t_transient", format!("{} must be >= 0", self.t_transient)));
        }
        if !(self.t_measure >= 10.0 * self.dt && self.t_measure.is_finite()) {
            return Err(Error::param(
                "t_measure",
                format!("{} must be at least 10 dt = {}", self.t_measure, 10.0 * self.dt),
            ));
        }
        if self.record_stride == 0 {
            return Err(Error::param("record_stride", "must be >= 1"));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        ((self.t_transient + self.t_measure) / self.dt).round() as usize
    }

    pub fn transient_steps(&self) -> usize {
        ((self.t_transient / self.dt).round() as usize).min(self.total_steps())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Snapshots recorded during the measurement window of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<EnsembleState>,
    pub params: ModelParams,
    /// Per-oscillator coupling; for network runs this is `k_j / N`.
    pub couplings: CouplingSet,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_oscillators(&self) -> usize {
        self.states.first().map_or(0, EnsembleState::len)
    }

    pub fn last_state(&self) -> Option<&EnsembleState> {
        self.states.last()
    }
}

/// Random phases on [0, 2π) and amplitudes from N(√λ, 0.1), redrawn while ≤ 0.
pub fn init_state(params: &ModelParams, seed: u64) -> Result<EnsembleState> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(params.lambda.sqrt(), INIT_R_SD).expect("sd is positive");
    let theta: Vec<f64> = (0..params.n).map(|_| rng.random_range(0.0..TAU)).collect();
    let r: Vec<f64> = (0..params.n)
        .map(|_| loop {
            let r = normal.sample(&mut rng);
            if r > 0.0 {
                break r;
            }
        })
        .collect();
    EnsembleState::from_polar(&theta, &r, 0.0)
}

/// Scratch buffers for repeated RK4 steps of a fixed dimension.
struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        let zero = vec![C64::new(0.0, 0.0); dim];
        Self {
            k1: zero.clone(),
            k2: zero.clone(),
            k3: zero.clone(),
            k4: zero.clone(),
            tmp: zero,
        }
    }

    /// Advances `z` into `next`; returns false if the result is not finite.
    fn step<F: VectorField + ?Sized>(&mut self, rhs: &F, z: &[C64], next: &mut [C64], dt: f64) -> bool {
        let h2 = 0.5 * dt;
        rhs.eval(z, &mut self.k1);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(z).zip(&self.k1) {
            *t = y + k * h2;
        }
        rhs.eval(&self.tmp, &mut self.k2);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(z).zip(&self.k2) {
            *t = y + k * h2;
        }
        rhs.eval(&self.tmp, &mut self.k3);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(z).zip(&self.k3) {
            *t = y + k * dt;
        }
        rhs.eval(&self.tmp, &mut self.k4);
        let h6 = dt / 6.0;
        let mut finite = true;
        for (i, (o, &y)) in next.iter_mut().zip(z).enumerate() {
            let incr = self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i];
            *o = y + incr * h6;
            finite &= o.re.is_finite() && o.im.is_finite();
        }
        finite
    }
}

/// One classical RK4 step.
pub fn rk4_step<F: VectorField + ?Sized>(state: &EnsembleState, rhs: &F, dt: f64) -> Result<EnsembleState> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("{dt} must be > 0")));
    }
    crate::error::check_len("state", rhs.dim(), state.len())?;
    let mut next = vec![C64::new(0.0, 0.0); state.len()];
    if !Rk4::new(state.len()).step(rhs, &state.z, &mut next, dt) {
        return Err(Error::IntegrationFailure {
            t: state.t + dt,
            last_finite: Box::new(state.clone()),
        });
    }
    Ok(EnsembleState::new(next, state.t + dt))
}

/// Runs the transient unrecorded, then records every `record_stride`-th step
/// of the measurement window including both endpoints of the stride grid.
pub fn integrate<F: VectorField + ?Sized>(
    initial: &EnsembleState,
    rhs: &F,
    plan: &IntegrationPlan,
) -> Result<(Vec<f64>, Vec<EnsembleState>)> {
    plan.validate()?;
    crate::error::check_len("state", rhs.dim(), initial.len())?;
    let total = plan.total_steps();
    let first_record = plan.transient_steps();
    let t0 = initial.t;
    let time_at = |step: usize| t0 + step as f64 * plan.dt;

    let mut rk = Rk4::new(initial.len());
    let mut z = initial.z.clone();
    let mut next = z.clone();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let record = |step: usize, z: &[C64], times: &mut Vec<f64>, states: &mut Vec<EnsembleState>| {
        if step >= first_record && (step - first_record).is_multiple_of(plan.record_stride) {
            times.push(time_at(step));
            states.push(EnsembleState::new(z.to_vec(), time_at(step)));
        }
    };

    record(0, &z, &mut times, &mut states);
    for step in 1..=total {
        if !rk.step(rhs, &z, &mut next, plan.dt) {
            return Err(Error::IntegrationFailure {
                t: time_at(step),
                last_finite: Box::new(EnsembleState::new(z, time_at(step - 1))),
            });
        }
        std::mem::swap(&mut z, &mut next);
        record(step, &z, &mut times, &mut states);
    }
    Ok((times, states))
}

/// Mean-field run from the plan's seeded initial state.
pub fn simulate_mean_field(
    params: &ModelParams,
    couplings: &CouplingSet,
    plan: &IntegrationPlan,
) -> Result<Trajectory> {
    let system = MeanFieldSystem::new(params, couplings)?;
    crate::error::check_len("couplings", params.n, couplings.len())?;
    let initial = init_state(params, plan.seed)?;
    let (times, states) = integrate(&initial, &system, plan)?;
    Ok(Trajectory {
        times,
        states,
        params: params.clone(),
        couplings: couplings.clone(),
    })
}

/// Full-network run from the plan's seeded initial state.
pub fn simulate_network(
    params: &ModelParams,
    graph: &NetworkGraph,
    plan: &IntegrationPlan,
) -> Result<Trajectory> {
    let system = NetworkSystem::new(params, graph)?;
    let couplings = crate::networks::degrees_to_couplings(graph)?;
    let initial = init_state(params, plan.seed)?;
    let (times, states) = integrate(&initial, &system, plan)?;
    Ok(Trajectory {
        times,
        states,
        params: params.clone(),
        couplings,
    })
}
