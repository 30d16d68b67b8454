//! Locked and drifting contributions to the order parameter over the
//! empirical coupling measure.

use log::warn;
use serde::{Deserialize, Serialize};

use super::amplitude::{locked_phase_eff, solve_amplitude_eff, Amplitude, Shape};
use crate::model::{CouplingSet, ModelParams, C64};

/// Predicted state of every oscillator for one (R̃, Δ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub locked: Vec<bool>,
    /// Stable amplitude for locked oscillators, incoherent amplitude for
    /// drifting ones, 0 where the amplitude collapses.
    pub r_star: Vec<f64>,
    /// φ* for locked oscillators.
    pub phi_star: Vec<Option<f64>>,
}

impl Membership {
    pub fn n_locked(&self) -> usize {
        self.locked.iter().filter(|&&l| l).count()
    }

    pub fn locked_fraction(&self) -> f64 {
        if self.locked.is_empty() {
            0.0
        } else {
            self.n_locked() as f64 / self.locked.len() as f64
        }
    }
}

/// Locked iff `K R̃ > |Δ + K d₀ sin α| r*`, with r* from the stable root.
pub fn locking_range(r_tilde: f64, delta: f64, params: &ModelParams, couplings: &CouplingSet) -> Membership {
    let shape = Shape::new(params);
    let n = couplings.len();
    let mut m = Membership {
        locked: Vec::with_capacity(n),
        r_star: Vec::with_capacity(n),
        phi_star: Vec::with_capacity(n),
    };
    for &k in couplings.values() {
        let ke = shape.scale * k;
        let amp = solve_amplitude_eff(&shape, ke, r_tilde, delta);
        let phi = amp.locked().and_then(|r| locked_phase_eff(&shape, ke, r, r_tilde, delta));
        m.locked.push(phi.is_some());
        m.r_star.push(amp.value());
        m.phi_star.push(phi);
    }
    m
}

/// Both contributions plus the number of drifting terms dropped because
/// `λ − K d₀ cos α < 0` invalidates the perturbative expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contributions {
    pub locked: C64,
    pub drift: C64,
    pub excluded: usize,
}

/// One pass over the coupling set computing the locked sum in polar form and
/// the perturbative drift sum.
pub(crate) fn contributions_eff(shape: &Shape, r_tilde: f64, delta: f64, couplings: &CouplingSet) -> Contributions {
    let n = couplings.len() as f64;
    let mut locked = C64::new(0.0, 0.0);
    let mut drift = C64::new(0.0, 0.0);
    let mut excluded = 0;
    for &k in couplings.values() {
        let ke = shape.scale * k;
        let amp = solve_amplitude_eff(shape, ke, r_tilde, delta);
        if let Some(phi) = amp.locked().and_then(|r| locked_phase_eff(shape, ke, r, r_tilde, delta)) {
            locked += C64::from_polar(amp.value(), phi);
        } else {
            let a2 = shape.l(ke);
            if a2 < 0.0 {
                excluded += 1;
                continue;
            }
            let dp = shape.delta_prime(ke, delta);
            drift += C64::new(2.0 * a2, dp) * (0.5 * ke * r_tilde / (dp * dp + 4.0 * a2 * a2));
        }
    }
    let rot = C64::from_polar(1.0, -shape.beta);
    Contributions {
        locked: locked / n,
        drift: drift * rot / n,
        excluded,
    }
}

pub fn contributions(r_tilde: f64, delta: f64, params: &ModelParams, couplings: &CouplingSet) -> Contributions {
    contributions_eff(&Shape::new(params), r_tilde, delta, couplings)
}

/// `(1/N) Σ_{locked} r*_j e^{iφ*_j}`.
pub fn locked_contribution(r_tilde: f64, delta: f64, params: &ModelParams, couplings: &CouplingSet) -> C64 {
    contributions(r_tilde, delta, params, couplings).locked
}

/// The locked contribution written as
/// `e^{−iβ} (1/N) Σ r* (√(K²R̃² − Δ'² r*²) + i Δ' r*) / (K R̃)`.
pub fn locked_contribution_integrand(r_tilde: f64, delta: f64, params: &ModelParams, couplings: &CouplingSet) -> C64 {
    let shape = Shape::new(params);
    let mut sum = C64::new(0.0, 0.0);
    for &k in couplings.values() {
        let ke = shape.scale * k;
        let Amplitude::Locked(r) = solve_amplitude_eff(&shape, ke, r_tilde, delta) else {
            continue;
        };
        let dp = shape.delta_prime(ke, delta);
        let kr = ke * r_tilde;
        if kr <= dp.abs() * r {
            continue;
        }
        let root = (kr * kr - dp * dp * r * r).sqrt();
        sum += C64::new(root, dp * r) * (r / kr);
    }
    sum * C64::from_polar(1.0, -shape.beta) / couplings.len() as f64
}

/// `(1/N) Σ_{drifting} e^{−iβ} K R̃ (2a² + iΔ') / (2((Δ')² + 4a⁴))`.
pub fn drift_contribution(r_tilde: f64, delta: f64, params: &ModelParams, couplings: &CouplingSet) -> C64 {
    let c = contributions(r_tilde, delta, params, couplings);
    if c.excluded > 0 {
        warn!("{} drifting oscillators have λ − K d₀ cos α < 0 and were excluded", c.excluded);
    }
    c.drift
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn gaussian_like(n: usize) -> CouplingSet {
        CouplingSet::new((0..n).map(|j| 0.01 + 0.02 * j as f64 / n as f64).collect()).unwrap()
    }

    #[test]
    fn all_locked_when_no_shift() {
        let p = ModelParams::default().with_shape(0.0, 0.2, 1.0);
        let m = locking_range(0.8, 0.0, &p, &gaussian_like(50));
        assert_eq!(m.n_locked(), 50);
    }

    #[test]
    fn empty_sets_give_zero() {
        let p = ModelParams::default().with_shape(0.0, 0.2, 1.0);
        let k = gaussian_like(20);
        // Δ far beyond any K R̃: nobody locks.
        assert_eq!(locked_contribution(0.5, 5.0, &p, &k), C64::new(0.0, 0.0));
        // Δ = 0 with no self shift: nobody drifts.
        assert_eq!(drift_contribution(0.5, 0.0, &p, &k), C64::new(0.0, 0.0));
    }

    #[test]
    fn homogeneous_in_phase_contribution() {
        let p = ModelParams::default();
        let k = CouplingSet::homogeneous(0.02, 10).unwrap();
        let c = locked_contribution(1.0, 0.0, &p, &k);
        assert!((c - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn polar_and_integrand_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = ModelParams {
                coupling_scale: rng.random_range(0.5..3.0),
                ..ModelParams::default().with_shape(
                    rng.random_range(0.0..PI),
                    rng.random_range(0.0..PI / 2.0),
                    rng.random_range(-2.0..2.0),
                )
            };
            let k = gaussian_like(200);
            let rt = rng.random_range(0.05..1.2);
            let d = rng.random_range(-0.05..0.05);
            let a = locked_contribution(rt, d, &p, &k);
            let b = locked_contribution_integrand(rt, d, &p, &k);
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn drift_phase_factor() {
        let k = gaussian_like(40);
        let p0 = ModelParams::default().with_shape(0.4, 0.0, 1.5);
        let p3 = ModelParams::default().with_shape(0.4, 0.3, 1.5);
        let d0 = drift_contribution(0.3, 0.08, &p0, &k);
        let d3 = drift_contribution(0.3, 0.08, &p3, &k);
        assert!(d0.norm() > 0.0);
        assert!((d3 - d0 * C64::from_polar(1.0, -0.3)).norm() < 1e-15);
    }

    #[test]
    fn collapsed_amplitudes_always_lock() {
        // With λ − K d₀ cos α < 0 the cubic has a root above 0 for any R̃ > 0,
        // so such oscillators never reach the drift sum.
        let p = ModelParams::default().with_shape(0.0, 0.0, 80.0);
        let k = gaussian_like(10);
        let c = contributions(0.01, 1.0, &p, &k);
        assert_eq!(c.excluded, 0);
        let m = locking_range(0.01, 1.0, &p, &k);
        for (j, &kj) in k.values().iter().enumerate() {
            if 1.0 - 80.0 * kj < 0.0 {
                assert!(m.locked[j]);
            }
        }
    }
}
