//! Theory predictions for one parameter point: solution, label, profiles.

use serde::{Deserialize, Serialize};

use super::amplitude::Shape;
use super::classify::{classify_state, AmpSlope, StateLabel};
use super::contributions::{locking_range, Membership};
use super::solver::{solve_self_consistency, SelfConsistentSolution, SolverOptions};
use crate::model::{CouplingSet, ModelParams};
use crate::observables::{amplitude_slope, AmplitudeSlope, ProfilePoint};

const BOUNDARY_SCAN: usize = 400;

/// `K R̃ − |Δ'| √(λ − K d₀ cos α)`; positive exactly where K locks, since the
/// stable amplitude at a locking boundary is the incoherent one.
fn lock_margin_eff(shape: &Shape, k: f64, r_tilde: f64, delta: f64) -> f64 {
    let ke = shape.scale * k;
    ke * r_tilde - shape.delta_prime(ke, delta).abs() * shape.l(ke).max(0.0).sqrt()
}

/// Signed distance from the locking boundary at coupling `k`: positive inside
/// the locked range.
pub fn lock_margin(k: f64, r_tilde: f64, delta: f64, params: &ModelParams) -> f64 {
    lock_margin_eff(&Shape::new(params), k, r_tilde, delta)
}

/// K values in `[k_lo, k_hi]` where the locking condition switches.
pub fn locking_boundaries(r_tilde: f64, delta: f64, params: &ModelParams, k_lo: f64, k_hi: f64) -> Vec<f64> {
    let shape = Shape::new(params);
    let f = |k: f64| lock_margin_eff(&shape, k, r_tilde, delta);
    let mut roots = Vec::new();
    let step = (k_hi - k_lo) / BOUNDARY_SCAN as f64;
    if !(step > 0.0) {
        return roots;
    }
    let mut a = k_lo;
    let mut fa = f(a);
    for i in 1..=BOUNDARY_SCAN {
        let b = k_lo + step * i as f64;
        let fb = f(b);
        if (fa > 0.0) != (fb > 0.0) {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            for _ in 0..100 {
                let m = 0.5 * (x0 + x1);
                let fm = f(m);
                if (fm > 0.0) == (f0 > 0.0) {
                    x0 = m;
                    f0 = fm;
                } else {
                    x1 = m;
                }
                if x1 - x0 < 1e-15 * x1.abs() {
                    break;
                }
            }
            roots.push(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// The locked part `[K_lock_lo, K_lock_hi]` of the coupling range, or `None`
/// when nothing locks.
pub fn lock_interval(r_tilde: f64, delta: f64, params: &ModelParams, k_min: f64, k_max: f64) -> Option<(f64, f64)> {
    if !(r_tilde > 0.0) || !delta.is_finite() {
        return None;
    }
    let shape = Shape::new(params);
    let locked = |k: f64| lock_margin_eff(&shape, k, r_tilde, delta) > 0.0;
    let roots = locking_boundaries(r_tilde, delta, params, k_min, k_max);
    let lo = if locked(k_min) { Some(k_min) } else { roots.first().copied() };
    let hi = if locked(k_max) { Some(k_max) } else { roots.last().copied() };
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo < hi || (lo == hi && locked(lo)) => Some((lo, hi)),
        _ => None,
    }
}

/// One row of the predicted (K, φ*) / (K, r*) curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedProfileRow {
    #[serde(rename = "K")]
    pub k: f64,
    /// NaN for drifting oscillators.
    pub phi_star_pred: f64,
    pub r_star_pred: f64,
    pub locked_pred: bool,
}

/// Full theory output for a parameter point.
#[derive(Clone, Debug)]
pub struct PredictedPoint {
    pub solution: SelfConsistentSolution,
    pub label: StateLabel,
    pub membership: Membership,
    pub lock_interval: Option<(f64, f64)>,
    pub profile: Vec<PredictedProfileRow>,
    pub amp: AmplitudeSlope,
}

impl PredictedPoint {
    /// Builds the prediction around a known (R̃, Δ).
    pub fn at(solution: SelfConsistentSolution, params: &ModelParams, couplings: &CouplingSet, n_bins: usize) -> Self {
        let (r, d) = (solution.r_tilde, solution.delta);
        let membership = if solution.is_incoherent() {
            locking_range(0.0, 0.0, params, couplings)
        } else {
            locking_range(r, d, params, couplings)
        };
        let mut profile: Vec<PredictedProfileRow> = couplings
            .values()
            .iter()
            .enumerate()
            .map(|(j, &k)| PredictedProfileRow {
                k,
                phi_star_pred: membership.phi_star[j].unwrap_or(f64::NAN),
                r_star_pred: membership.r_star[j],
                locked_pred: membership.locked[j],
            })
            .collect();
        profile.sort_by(|a, b| a.k.total_cmp(&b.k));
        let locked: Vec<ProfilePoint> = profile
            .iter()
            .filter(|p| p.locked_pred)
            .map(|p| ProfilePoint {
                k: p.k,
                phi_star: p.phi_star_pred,
                r_star: p.r_star_pred,
            })
            .collect();
        let amp = amplitude_slope(&locked, couplings.k_min(), couplings.k_max(), n_bins);
        let label = classify_state(r, d, params, couplings)
            .with_amp_slope(AmpSlope::from_slope(amp.mean_slope, amp.inflection));
        Self {
            lock_interval: lock_interval(r, d, params, couplings.k_min(), couplings.k_max()),
            solution,
            label,
            membership,
            profile,
            amp,
        }
    }
}

/// Solves the self-consistency problem and assembles the prediction.
pub fn predict_point(
    params: &ModelParams,
    couplings: &CouplingSet,
    init: Option<(f64, f64)>,
    opts: &SolverOptions,
    n_bins: usize,
) -> PredictedPoint {
    let solution = solve_self_consistency(params, couplings, init, opts);
    PredictedPoint::at(solution, params, couplings, n_bins)
}
