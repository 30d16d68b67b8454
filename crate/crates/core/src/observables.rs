//! Order parameters, population frequency, lock detection and profiles.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::integrator::Trajectory;
use crate::model::{CouplingSet, EnsembleState, C64};

/// Default width of the rotating-frame phase band that counts as locked.
pub const DEFAULT_TOL_PHASE: f64 = 0.05;
/// Default number of equal-width K bins for slope estimates.
pub const DEFAULT_N_BINS: usize = 25;
/// Below this time-averaged R̃ the population phase is treated as noise.
pub const INCOHERENT_R: f64 = 1e-3;

/// Magnitude and argument of the population centroid; Θ = 0 when R̃ < 1e−12.
pub fn order_parameter(state: &EnsembleState) -> (f64, f64) {
    if state.is_empty() {
        return (0.0, 0.0);
    }
    let mean = state.z.iter().sum::<C64>() / state.len() as f64;
    let r = mean.norm();
    if r < 1e-12 {
        (r, 0.0)
    } else {
        (r, mean.arg())
    }
}

/// Wraps into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Removes jumps larger than π between consecutive samples.
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phases {
        if let Some(q) = prev {
            let jump = p - q;
            if jump > PI {
                offset -= TAU * ((jump + PI) / TAU).floor();
            } else if jump < -PI {
                offset += TAU * ((-jump + PI) / TAU).floor();
            }
        }
        out.push(p + offset);
        prev = Some(p);
    }
    out
}

/// Ordinary least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// R̃(t), unwrapped Θ(t) and the fitted population frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderParameterSeries {
    pub times: Vec<f64>,
    pub r_tilde: Vec<f64>,
    pub theta: Vec<f64>,
    /// `None` when the population is incoherent.
    pub omega: Option<f64>,
    /// `ω − Ω`, `None` when Ω is undefined.
    pub delta: Option<f64>,
}

impl OrderParameterSeries {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let (r_tilde, theta): (Vec<f64>, Vec<f64>) = traj.states.iter().map(order_parameter).unzip();
        let theta = unwrap(&theta);
        let fit = estimate_omega(&traj.times, &theta, &r_tilde, traj.params.omega);
        Self {
            times: traj.times.clone(),
            r_tilde,
            theta,
            omega: fit.map(|f| f.0),
            delta: fit.map(|f| f.1),
        }
    }

    pub fn r_tilde_mean(&self) -> f64 {
        if self.r_tilde.is_empty() {
            0.0
        } else {
            self.r_tilde.iter().sum::<f64>() / self.r_tilde.len() as f64
        }
    }

    pub fn is_incoherent(&self) -> bool {
        self.omega.is_none()
    }
}

/// Least-squares Ω of the unwrapped Θ(t) and Δ = ω − Ω, or `None` if the
/// window-mean R̃ does not exceed [`INCOHERENT_R`].
pub fn estimate_omega(times: &[f64], theta: &[f64], r_tilde: &[f64], omega: f64) -> Option<(f64, f64)> {
    if times.len() < 2 || r_tilde.is_empty() {
        return None;
    }
    let mean_r = r_tilde.iter().sum::<f64>() / r_tilde.len() as f64;
    if mean_r <= INCOHERENT_R {
        return None;
    }
    let (slope, _) = linear_fit(times, theta);
    Some((slope, omega - slope))
}

/// Measured split of the population into locked and drifting oscillators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LockPartition {
    pub locked: Vec<usize>,
    pub drifting: Vec<usize>,
    /// Per oscillator: window-mean of θ_j − Θ wrapped to (−π, π]. This is
    /// φ*_j for locked oscillators (Φ = 0 convention) and a circular mean for
    /// drifting ones.
    pub phi: Vec<f64>,
    /// Per oscillator window-mean amplitude.
    pub r: Vec<f64>,
    /// Per oscillator range of θ_j − Ωt over the window.
    pub phase_range: Vec<f64>,
}

impl LockPartition {
    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn locked_fraction(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.locked.len() as f64 / self.n() as f64
        }
    }

    pub fn is_locked(&self, j: usize) -> bool {
        self.locked.binary_search(&j).is_ok()
    }

    pub fn phi_star(&self, j: usize) -> Option<f64> {
        self.is_locked(j).then(|| self.phi[j])
    }

    pub fn r_star(&self, j: usize) -> Option<f64> {
        self.is_locked(j).then(|| self.r[j])
    }
}

/// Locks oscillator j iff `max φ_j − min φ_j < tol_phase` with
/// `φ_j(t) = θ_j(t) − Ωt` unwrapped over the recorded window.
pub fn detect_locked(traj: &Trajectory, omega: f64, tol_phase: f64) -> LockPartition {
    let n = traj.n_oscillators();
    let m = traj.len();
    let big_theta: Vec<f64> = traj.states.iter().map(|s| order_parameter(s).1).collect();
    let mut locked = Vec::new();
    let mut drifting = Vec::new();
    let mut phi = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut phase_range = Vec::with_capacity(n);
    let mut rel = Vec::with_capacity(m);
    let mut rot = Vec::with_capacity(m);
    for j in 0..n {
        rel.clear();
        rot.clear();
        let mut r_sum = 0.0;
        for (s, (&t, &th)) in traj.states.iter().zip(traj.times.iter().zip(&big_theta)) {
            let (rj, thj) = s.z[j].to_polar();
            r_sum += rj;
            rot.push(wrap_angle(thj - omega * t));
            rel.push(wrap_angle(thj - th));
        }
        let rot = unwrap(&rot);
        let (lo, hi) = rot
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let range = if m == 0 { 0.0 } else { hi - lo };
        let rel = unwrap(&rel);
        let mean_rel = rel.iter().sum::<f64>() / m.max(1) as f64;
        phi.push(wrap_angle(mean_rel));
        r.push(r_sum / m.max(1) as f64);
        phase_range.push(range);
        if m > 0 && range < tol_phase {
            locked.push(j);
        } else {
            drifting.push(j);
        }
    }
    LockPartition {
        locked,
        drifting,
        phi,
        r,
        phase_range,
    }
}

/// One oscillator's stationary point on the (K, φ*) and (K, r*) curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    #[serde(rename = "K")]
    pub k: f64,
    pub phi_star: f64,
    pub r_star: f64,
}

/// Locked oscillators' (K, φ*, r*) sorted by K.
pub fn stationary_profiles(partition: &LockPartition, couplings: &CouplingSet) -> Vec<ProfilePoint> {
    let mut profile: Vec<ProfilePoint> = partition
        .locked
        .iter()
        .map(|&j| ProfilePoint {
            k: couplings.values()[j],
            phi_star: partition.phi[j],
            r_star: partition.r[j],
        })
        .collect();
    profile.sort_by(|a, b| a.k.total_cmp(&b.k));
    profile
}

/// Bin-mean values of one K bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileBin {
    pub k: f64,
    pub phi: f64,
    pub r: f64,
    pub count: usize,
}

/// Averages the profile into `n_bins` equal-width bins over `[k_lo, k_hi]`;
/// empty bins are dropped.
pub fn bin_profile(profile: &[ProfilePoint], k_lo: f64, k_hi: f64, n_bins: usize) -> Vec<ProfileBin> {
    let n_bins = n_bins.max(1);
    let width = (k_hi - k_lo) / n_bins as f64;
    let mut acc = vec![(0.0, 0.0, 0.0, 0usize); n_bins];
    for p in profile {
        let idx = if width > 0.0 {
            (((p.k - k_lo) / width).floor().max(0.0) as usize).min(n_bins - 1)
        } else {
            0
        };
        let a = &mut acc[idx];
        a.0 += p.k;
        a.1 += p.phi_star;
        a.2 += p.r_star;
        a.3 += 1;
    }
    acc.into_iter()
        .filter(|a| a.3 > 0)
        .map(|(k, phi, r, c)| {
            let c_f = c as f64;
            ProfileBin {
                k: k / c_f,
                phi: phi / c_f,
                r: r / c_f,
                count: c,
            }
        })
        .collect()
}

/// Centered differences at interior points and one-sided at the ends.
pub fn finite_difference_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return Vec::new();
    }
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (y[b] - y[a]) / (x[b] - x[a])
        })
        .collect()
}

/// True iff the signs of `slopes` (zeros ignored) change exactly once, from + to −.
pub fn single_pos_to_neg_change(slopes: &[f64]) -> bool {
    let signs: Vec<bool> = slopes.iter().filter(|s| **s != 0.0).map(|s| *s > 0.0).collect();
    let changes: Vec<(bool, bool)> = signs.windows(2).filter(|w| w[0] != w[1]).map(|w| (w[0], w[1])).collect();
    changes.len() == 1 && changes[0] == (true, false)
}

/// Amplitude-slope summary of a locked profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSlope {
    /// Mean of the bin slopes of r*(K); `None` with fewer than two bins.
    pub mean_slope: Option<f64>,
    pub inflection: bool,
    pub bin_slopes: Vec<f64>,
}

pub fn amplitude_slope(profile: &[ProfilePoint], k_lo: f64, k_hi: f64, n_bins: usize) -> AmplitudeSlope {
    let bins = bin_profile(profile, k_lo, k_hi, n_bins);
    let k: Vec<f64> = bins.iter().map(|b| b.k).collect();
    let r: Vec<f64> = bins.iter().map(|b| b.r).collect();
    let slopes = finite_difference_slopes(&k, &r);
    if slopes.is_empty() {
        return AmplitudeSlope {
            mean_slope: None,
            inflection: false,
            bin_slopes: slopes,
        };
    }
    AmplitudeSlope {
        mean_slope: Some(slopes.iter().sum::<f64>() / slopes.len() as f64),
        inflection: single_pos_to_neg_change(&slopes),
        bin_slopes: slopes,
    }
}

/// Bin slopes of φ*(K), for checking the phase-slope sign law.
pub fn phase_slopes(profile: &[ProfilePoint], k_lo: f64, k_hi: f64, n_bins: usize) -> Vec<f64> {
    let bins = bin_profile(profile, k_lo, k_hi, n_bins);
    let k: Vec<f64> = bins.iter().map(|b| b.k).collect();
    let phi: Vec<f64> = bins.iter().map(|b| b.phi).collect();
    finite_difference_slopes(&k, &phi)
}

/// Everything measured from one trajectory.
#[derive(Clone, Debug)]
pub struct RunMeasurement {
    pub series: OrderParameterSeries,
    pub partition: LockPartition,
    pub profile: Vec<ProfilePoint>,
    pub amp: AmplitudeSlope,
}

impl RunMeasurement {
    pub fn r_tilde_mean(&self) -> f64 {
        self.series.r_tilde_mean()
    }
}

/// Order parameter, partition, profile and amplitude slope of a trajectory.
/// An incoherent run is reported with every oscillator drifting.
pub fn measure(traj: &Trajectory, tol_phase: f64, n_bins: usize) -> RunMeasurement {
    let series = OrderParameterSeries::from_trajectory(traj);
    let partition = match series.omega {
        Some(omega) => detect_locked(traj, omega, tol_phase),
        None => {
            let mut p = detect_locked(traj, traj.params.omega, f64::NEG_INFINITY);
            p.drifting = (0..p.n()).collect();
            p
        }
    };
    let profile = stationary_profiles(&partition, &traj.couplings);
    let amp = amplitude_slope(&profile, traj.couplings.k_min(), traj.couplings.k_max(), n_bins);
    RunMeasurement {
        series,
        partition,
        profile,
        amp,
    }
}
