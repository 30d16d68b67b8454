//! Per-oscillator fixed points in the rotating frame.
//!
//! Every function takes the raw coupling `K` and folds the coupling scale in
//! as `S K`, so the formulas below are written with `S = 1`.

use serde::{Deserialize, Serialize};

use crate::model::ModelParams;

/// Relative step or bracket width at which the root search on u = r² stops.
const ROOT_TOL: f64 = 1e-12;

/// Constants of the coupling function that the fixed-point formulas need.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Shape {
    pub lambda: f64,
    /// d₀ cos α
    pub c: f64,
    /// d₀ sin α
    pub s: f64,
    pub beta: f64,
    pub scale: f64,
}

impl Shape {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            lambda: params.lambda,
            c: params.d0_cos_alpha(),
            s: params.d0_sin_alpha(),
            beta: params.beta,
            scale: params.coupling_scale,
        }
    }

    /// λ − K d₀ cos α for an effective coupling.
    pub fn l(&self, k: f64) -> f64 {
        self.lambda - k * self.c
    }

    /// Δ + K d₀ sin α for an effective coupling.
    pub fn delta_prime(&self, k: f64, delta: f64) -> f64 {
        delta + k * self.s
    }
}

/// Outcome of the stable-amplitude solve for one oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Amplitude {
    /// Stable locked amplitude r*.
    Locked(f64),
    /// No stable locked root; the oscillator drifts near the incoherent
    /// amplitude `a = √(λ − K d₀ cos α)`.
    Incoherent(f64),
    /// `λ − K d₀ cos α ≤ 0` and no locked root: the amplitude collapses.
    Collapsed,
}

impl Amplitude {
    pub fn locked(self) -> Option<f64> {
        match self {
            Amplitude::Locked(r) => Some(r),
            _ => None,
        }
    }

    /// The locked amplitude, else the incoherent one, else 0.
    pub fn value(self) -> f64 {
        match self {
            Amplitude::Locked(r) | Amplitude::Incoherent(r) => r,
            Amplitude::Collapsed => 0.0,
        }
    }
}

/// `p(u) = u((u − L)² + Δ'²) − (K R̃)²`, whose stable root gives r*².
fn cubic(u: f64, l: f64, dp: f64, kr: f64) -> f64 {
    u * ((u - l) * (u - l) + dp * dp) - kr * kr
}

pub(crate) fn solve_amplitude_eff(shape: &Shape, k: f64, r_tilde: f64, delta: f64) -> Amplitude {
    let l = shape.l(k);
    let dp = shape.delta_prime(k, delta);
    let kr = k * r_tilde;
    // p is increasing on u > max(0, L): p' = (u − L)² + Δ'² + 2u(u − L) > 0,
    // so the stable branch has at most one root there.
    let lo0 = l.max(0.0);
    if kr <= 0.0 || cubic(lo0, l, dp, kr) >= 0.0 {
        return if l > 0.0 { Amplitude::Incoherent(l.sqrt()) } else { Amplitude::Collapsed };
    }
    // p(lo0 + t) ≥ t³, so t = (K R̃)^{2/3} already brackets the root.
    let mut lo = lo0;
    let mut hi = lo0 + kr.powf(2.0 / 3.0) * (1.0 + 1e-12) + 1e-300;
    while cubic(hi, l, dp, kr) < 0.0 {
        hi = lo0 + 2.0 * (hi - lo0);
    }
    // p is also convex there (p'' = 6u − 4L > 0), so Newton started at the
    // right end of the bracket decreases monotonically onto the root. A
    // bisection step takes over if rounding ever pushes an iterate outside.
    let mut u = hi;
    for _ in 0..200 {
        let f = cubic(u, l, dp, kr);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let step = f / ((u - l) * (u - l) + dp * dp + 2.0 * u * (u - l));
        if step.abs() <= ROOT_TOL * u {
            u -= step;
            break;
        }
        u = if u - step > lo && u - step < hi { u - step } else { 0.5 * (lo + hi) };
        if hi - lo <= ROOT_TOL * hi {
            break;
        }
    }
    Amplitude::Locked(u.sqrt())
}

/// Stable locked amplitude of an oscillator with coupling `k` for the given
/// population state, or the incoherent/collapsed fallback.
pub fn solve_amplitude(k: f64, r_tilde: f64, delta: f64, params: &ModelParams) -> Amplitude {
    let shape = Shape::new(params);
    solve_amplitude_eff(&shape, shape.scale * k, r_tilde, delta)
}

pub(crate) fn locked_phase_eff(shape: &Shape, k: f64, r_star: f64, r_tilde: f64, delta: f64) -> Option<f64> {
    let dp = shape.delta_prime(k, delta);
    let kr = k * r_tilde;
    if !(kr > dp.abs() * r_star) {
        return None;
    }
    Some((dp * r_star / kr).asin() - shape.beta)
}

/// `φ* = arcsin(Δ' r* / (K R̃)) − β` on the principal branch, or `None` when
/// the locking condition `K R̃ > |Δ'| r*` fails.
pub fn locked_phase(k: f64, r_star: f64, r_tilde: f64, delta: f64, params: &ModelParams) -> Option<f64> {
    let shape = Shape::new(params);
    locked_phase_eff(&shape, shape.scale * k, r_star, r_tilde, delta)
}

/// Locking condition `K R̃ > |Δ + K d₀ sin α| r*`.
pub fn is_locked(k: f64, r_star: f64, r_tilde: f64, delta: f64, params: &ModelParams) -> bool {
    let shape = Shape::new(params);
    let k = shape.scale * k;
    k * r_tilde > shape.delta_prime(k, delta).abs() * r_star
}

/// Residuals of the two stationarity conditions
/// `Δ' r = K R̃ sin(φ + β)` and `(L − r²) r = −K R̃ cos(φ + β)`.
pub fn fixed_point_residuals(k: f64, phi: f64, r: f64, r_tilde: f64, delta: f64, params: &ModelParams) -> (f64, f64) {
    let shape = Shape::new(params);
    let k = shape.scale * k;
    let psi = phi + shape.beta;
    (
        shape.delta_prime(k, delta) * r - k * r_tilde * psi.sin(),
        (shape.l(k) - r * r) * r + k * r_tilde * psi.cos(),
    )
}

/// dr*/dK of the locked branch by implicit differentiation of the cubic.
pub fn amplitude_derivative(k: f64, r_tilde: f64, delta: f64, params: &ModelParams) -> Option<f64> {
    let shape = Shape::new(params);
    let ke = shape.scale * k;
    let r = solve_amplitude_eff(&shape, ke, r_tilde, delta).locked()?;
    let u = r * r;
    let l = shape.l(ke);
    let dp = shape.delta_prime(ke, delta);
    let f_u = (u - l) * (u - l) + dp * dp + 2.0 * u * (u - l);
    let f_k = u * (2.0 * (u - l) * shape.c + 2.0 * dp * shape.s) - 2.0 * ke * r_tilde * r_tilde;
    Some(-f_k / f_u / (2.0 * r) * shape.scale)
}

/// dφ*/dK of the locked branch, `(K Δ' r' − Δ r) / (K² R̃ cos(φ* + β))`,
/// which includes the variation of r* with K.
pub fn phase_derivative(k: f64, r_tilde: f64, delta: f64, params: &ModelParams) -> Option<f64> {
    let shape = Shape::new(params);
    let ke = shape.scale * k;
    let r = solve_amplitude_eff(&shape, ke, r_tilde, delta).locked()?;
    let phi = locked_phase_eff(&shape, ke, r, r_tilde, delta)?;
    let dr = amplitude_derivative(k, r_tilde, delta, params)? / shape.scale;
    let dp = shape.delta_prime(ke, delta);
    let cos_psi = (phi + shape.beta).cos();
    Some((ke * dp * dr - delta * r) / (ke * ke * r_tilde * cos_psi) * shape.scale)
}

fn sign(x: f64, eps: f64) -> i8 {
    if x > eps {
        1
    } else if x < -eps {
        -1
    } else {
        0
    }
}

/// Sign law for the (K, φ*) curve: −sign(Δ), 0 when |Δ| < 1e−9.
pub fn phi_slope_sign(delta: f64) -> i8 {
    -sign(delta, 1e-9)
}

/// Sign law for the (K, r*) curve, `sign(Δ sin(φ* + β))`. `None` when
/// φ* + β lies outside (−π/2, π/2), which contradicts stability.
pub fn r_slope_sign(delta: f64, phi_star: f64, beta: f64) -> Option<i8> {
    let psi = phi_star + beta;
    if psi.abs() >= std::f64::consts::FRAC_PI_2 {
        return None;
    }
    Some(sign(delta, 0.0) * sign(psi, 0.0))
}

/// Sign of the exact dr*/dK.
pub fn r_slope_sign_exact(k: f64, r_tilde: f64, delta: f64, params: &ModelParams) -> Option<i8> {
    amplitude_derivative(k, r_tilde, delta, params).map(|d| sign(d, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(alpha: f64, beta: f64, d0: f64) -> ModelParams {
        ModelParams::default().with_shape(alpha, beta, d0)
    }

    /// Scan for sign changes of the cubic on the stable branch at 1e−6
    /// resolution, interpolating linearly inside the bracket.
    fn scan_roots(k: f64, r: f64, delta: f64, p: &ModelParams) -> Vec<f64> {
        let shape = Shape::new(p);
        let l = shape.l(k);
        let dp = shape.delta_prime(k, delta);
        let h = 1e-6;
        let mut roots = Vec::new();
        let mut u0 = h;
        let mut f0 = cubic(u0, l, dp, k * r);
        while u0 < 4.0 * p.lambda {
            let u1 = u0 + h;
            let f1 = cubic(u1, l, dp, k * r);
            if f0 < 0.0 && f1 >= 0.0 {
                let root = u0 + h * f0 / (f0 - f1);
                if p.lambda - root - shape.c * k < 0.0 && p.lambda - 3.0 * root - shape.c * k < 0.0 {
                    roots.push(root.sqrt());
                }
            }
            u0 = u1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn in_phase_root() {
        let r = solve_amplitude(0.02, 1.0, 0.0, &params(0.0, 0.3, 1.0));
        assert!((r.locked().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incoherent_fallback() {
        assert_eq!(solve_amplitude(0.02, 0.0, 0.0, &params(PI / 2.0, 0.0, 1.0)), Amplitude::Incoherent(1.0));
        let p = params(0.0, 0.0, 60.0);
        assert_eq!(solve_amplitude(0.02, 0.0, 0.1, &p), Amplitude::Collapsed);
    }

    #[test]
    fn matches_dense_scan() {
        let p = params(0.25 * PI, 0.0, 1.0);
        let r = solve_amplitude(0.02, 0.1, 0.05, &p);
        let roots = scan_roots(0.02, 0.1, 0.05, &p);
        // (K R̃)² = 4e−6 against L Δ'² ≈ 0.0032: no locked root exists here.
        assert!(roots.is_empty());
        assert!(matches!(r, Amplitude::Incoherent(_)));

        let r = solve_amplitude(0.02, 1.0, 0.005, &p).locked().unwrap();
        let roots = scan_roots(0.02, 1.0, 0.005, &p);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - r).abs() < 1e-9, "{} vs {}", roots[0], r);
    }

    #[test]
    fn phase_examples() {
        let p = params(0.0, 0.0, 1.0);
        assert_eq!(locked_phase(0.02, 1.0, 1.0, 0.0, &p), Some(0.0));
        let p = params(0.0, 0.2 * PI, 1.0);
        assert!((locked_phase(0.02, 1.0, 1.0, 0.0, &p).unwrap() + 0.2 * PI).abs() < 1e-15);
        assert!(locked_phase(0.02, 1.0, 0.5, 0.5, &p).is_none());
    }

    #[test]
    fn fixed_point_consistency() {
        let p = params(0.3 * PI, 0.15 * PI, 1.3);
        for &(k, rt, d) in &[(0.02, 0.9, -0.01), (0.03, 0.95, -0.02), (0.01, 1.0, -0.003)] {
            let r = solve_amplitude(k, rt, d, &p).locked().unwrap();
            let phi = locked_phase(k, r, rt, d, &p).unwrap();
            let (e1, e2) = fixed_point_residuals(k, phi, r, rt, d, &p);
            assert!(e1.abs() < 1e-10 && e2.abs() < 1e-10, "{e1} {e2}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = ModelParams {
            coupling_scale: 3.0,
            ..params(0.3 * PI, 0.15 * PI, 1.3)
        };
        let (rt, d) = (0.9, -0.02);
        for &k in &[0.01, 0.02, 0.04] {
            let h = 1e-6;
            let r = |k| solve_amplitude(k, rt, d, &p).locked().unwrap();
            let phi = |k| locked_phase(k, r(k), rt, d, &p).unwrap();
            let fd_r = (r(k + h) - r(k - h)) / (2.0 * h);
            let fd_phi = (phi(k + h) - phi(k - h)) / (2.0 * h);
            let dr = amplitude_derivative(k, rt, d, &p).unwrap();
            let dphi = phase_derivative(k, rt, d, &p).unwrap();
            assert!((dr - fd_r).abs() <= 1e-5 * fd_r.abs().max(1e-3), "{dr} {fd_r}");
            assert!((dphi - fd_phi).abs() <= 1e-5 * fd_phi.abs(), "{dphi} {fd_phi}");
        }
    }

    #[test]
    fn slope_signs() {
        assert_eq!(phi_slope_sign(-0.1), 1);
        assert_eq!(phi_slope_sign(0.1), -1);
        assert_eq!(phi_slope_sign(0.0), 0);
        assert_eq!(r_slope_sign(-0.1, -0.3, 0.1), Some(1));
        assert_eq!(r_slope_sign(0.1, -0.1, 0.1), Some(0));
        assert_eq!(r_slope_sign(0.1, 0.2, 0.1), Some(1));
        assert_eq!(r_slope_sign(0.1, 1.6, 0.1), None);
    }
}
