//! State taxonomy S1–S4 with locking patterns.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::amplitude::{solve_amplitude_eff, Shape};
use crate::error::Error;
use crate::model::{CouplingSet, ModelParams};

/// Tolerance for the strict inequalities of the taxonomy.
pub const TIE_TOL: f64 = 1e-9;
/// |Δ| below which the in-phase family is considered.
pub const IN_PHASE_DELTA: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Major {
    S1,
    S2,
    S3,
    S4,
}

/// Locking pattern from K_min to K_max; the sign is the slope of (K, φ*).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    L0,
    LPlus,
    LMinus,
    DLPlus,
    DLMinus,
    LPlusD,
    LMinusD,
    DLPlusD,
    DLMinusD,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmpSlope {
    Positive,
    Negative,
    MixedPosToNeg,
    Undefined,
}

impl AmpSlope {
    pub fn from_slope(mean_slope: Option<f64>, inflection: bool) -> Self {
        match (mean_slope, inflection) {
            (_, true) => AmpSlope::MixedPosToNeg,
            (Some(s), false) if s > 0.0 => AmpSlope::Positive,
            (Some(s), false) if s < 0.0 => AmpSlope::Negative,
            _ => AmpSlope::Undefined,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateLabel {
    pub major: Major,
    pub pattern: Pattern,
    pub amp_slope: AmpSlope,
    /// Set when the inputs straddle a table boundary.
    pub ambiguous: bool,
}

const TABLE_I: &[(Major, Pattern)] = &[
    (Major::S1, Pattern::L0),
    (Major::S1, Pattern::LPlus),
    (Major::S1, Pattern::DLPlus),
    (Major::S2, Pattern::LMinus),
    (Major::S2, Pattern::DLMinus),
    (Major::S2, Pattern::D),
    (Major::S3, Pattern::LPlus),
    (Major::S3, Pattern::LPlusD),
    (Major::S3, Pattern::DLPlus),
    (Major::S3, Pattern::DLPlusD),
    (Major::S3, Pattern::D),
    (Major::S4, Pattern::D),
];

const TABLE_II: &[(Major, Pattern)] = &[
    (Major::S1, Pattern::L0),
    (Major::S1, Pattern::LPlus),
    (Major::S1, Pattern::DLPlus),
    (Major::S2, Pattern::LMinus),
    (Major::S2, Pattern::DLMinus),
    (Major::S2, Pattern::D),
    (Major::S3, Pattern::LMinus),
    (Major::S3, Pattern::LMinusD),
    (Major::S3, Pattern::DLMinus),
    (Major::S3, Pattern::DLMinusD),
    (Major::S3, Pattern::D),
    (Major::S4, Pattern::D),
];

/// Legal (major, pattern) rows for the table selected by the sign of d₀ sin α.
pub fn legal_rows(d0_sin_alpha: f64) -> &'static [(Major, Pattern)] {
    if d0_sin_alpha >= 0.0 {
        TABLE_I
    } else {
        TABLE_II
    }
}

impl StateLabel {
    pub fn new(major: Major, pattern: Pattern) -> Self {
        Self {
            major,
            pattern,
            amp_slope: AmpSlope::Undefined,
            ambiguous: false,
        }
    }

    pub fn with_amp_slope(self, amp_slope: AmpSlope) -> Self {
        Self { amp_slope, ..self }
    }

    pub fn is_legal(&self, d0_sin_alpha: f64) -> bool {
        legal_rows(d0_sin_alpha).contains(&(self.major, self.pattern))
    }

    pub fn is_fully_locked(&self) -> bool {
        matches!(self.pattern, Pattern::L0 | Pattern::LPlus | Pattern::LMinus)
    }

    pub fn is_fully_drifting(&self) -> bool {
        self.pattern == Pattern::D
    }

    /// Label used for a run whose population frequency is undefined. With no
    /// self shift the incoherent state belongs to S2 (R̃ > D₀ = 0 in the limit
    /// of finite-size fluctuations); otherwise it is S4.
    pub fn incoherent(params: &ModelParams) -> Self {
        let major = if params.d0_sin_alpha().abs() < TIE_TOL { Major::S2 } else { Major::S4 };
        Self::new(major, Pattern::D)
    }
}

impl fmt::Display for Major {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Major::S1 => "S1",
            Major::S2 => "S2",
            Major::S3 => "S3",
            Major::S4 => "S4",
        })
    }
}

impl Pattern {
    pub fn as_str(&self) -> &'static str {
        match self {
            Pattern::L0 => "l0",
            Pattern::LPlus => "l+",
            Pattern::LMinus => "l-",
            Pattern::DLPlus => "dl+",
            Pattern::DLMinus => "dl-",
            Pattern::LPlusD => "l+d",
            Pattern::LMinusD => "l-d",
            Pattern::DLPlusD => "dl+d",
            Pattern::DLMinusD => "dl-d",
            Pattern::D => "d",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.major, self.pattern.as_str())?;
        if self.ambiguous {
            f.write_str("?")?;
        }
        Ok(())
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("`{s}` is not a state label"));
        let (body, ambiguous) = match s.strip_suffix('?') {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (major, pattern) = body.split_once('_').ok_or_else(bad)?;
        let major = match major {
            "S1" => Major::S1,
            "S2" => Major::S2,
            "S3" => Major::S3,
            "S4" => Major::S4,
            _ => return Err(bad()),
        };
        let pattern = [
            Pattern::L0,
            Pattern::LPlus,
            Pattern::LMinus,
            Pattern::DLPlus,
            Pattern::DLMinus,
            Pattern::LPlusD,
            Pattern::LMinusD,
            Pattern::DLPlusD,
            Pattern::DLMinusD,
            Pattern::D,
        ]
        .into_iter()
        .find(|p| p.as_str() == pattern)
        .ok_or_else(bad)?;
        Ok(Self {
            ambiguous,
            ..Self::new(major, pattern)
        })
    }
}

/// Where an end of the coupling range sits relative to the locking window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    /// Drifting with Δ' of the same sign as Δ: below the lower boundary.
    Low,
    Locked,
    /// Drifting with Δ' of the opposite sign: above the upper boundary.
    High,
}

fn side(shape: &Shape, k: f64, r: f64, r_tilde: f64, delta: f64) -> Side {
    let dp = shape.delta_prime(k, delta);
    // The tie tolerance keeps exact-equality inputs on the drifting side.
    if k * r_tilde > dp.abs() * r + TIE_TOL * k {
        Side::Locked
    } else if dp * delta >= 0.0 {
        Side::Low
    } else {
        Side::High
    }
}

/// Everything the taxonomy needs at the two ends of the coupling range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndPoints {
    pub k_min: f64,
    pub k_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl EndPoints {
    /// Amplitudes from the stable root at K_min and K_max, or the incoherent
    /// amplitude where no locked root exists (that is the amplitude at a
    /// locking boundary).
    pub fn solve(r_tilde: f64, delta: f64, params: &ModelParams, couplings: &CouplingSet) -> Self {
        let shape = Shape::new(params);
        let amp = |k: f64| solve_amplitude_eff(&shape, shape.scale * k, r_tilde, delta).value();
        Self {
            k_min: couplings.k_min(),
            k_max: couplings.k_max(),
            r_min: amp(couplings.k_min()),
            r_max: amp(couplings.k_max()),
        }
    }
}

/// Table I / II label for a stationary (R̃, Δ).
pub fn classify_state(r_tilde: f64, delta: f64, params: &ModelParams, couplings: &CouplingSet) -> StateLabel {
    let ends = EndPoints::solve(r_tilde, delta, params, couplings);
    classify_with_ends(r_tilde, delta, params, &ends)
}

/// Classification with the end amplitudes supplied by the caller.
pub fn classify_with_ends(r_tilde: f64, delta: f64, params: &ModelParams, ends: &EndPoints) -> StateLabel {
    if !(r_tilde > 0.0) || !delta.is_finite() {
        return StateLabel::incoherent(params);
    }
    let shape = Shape::new(params);
    let s = shape.s;
    let (kmin, kmax) = (shape.scale * ends.k_min, shape.scale * ends.k_max);
    let d_min = s.abs() * ends.r_min;
    let d_max = s.abs() * ends.r_max;
    let lo = side(&shape, kmin, ends.r_min, r_tilde, delta);
    let hi = side(&shape, kmax, ends.r_max, r_tilde, delta);
    let above = |d: f64| r_tilde > d + TIE_TOL;
    let straddle = above(d_min) != above(d_max) || (r_tilde - d_max).abs() <= TIE_TOL || (r_tilde - d_min).abs() <= TIE_TOL;

    if delta.abs() < IN_PHASE_DELTA && lo == Side::Locked && hi == Side::Locked && above(d_min) && above(d_max) {
        return StateLabel::new(Major::S1, Pattern::L0);
    }

    let positive_slope = delta < 0.0;
    let (l, dl, ld, dld) = if positive_slope {
        (Pattern::LPlus, Pattern::DLPlus, Pattern::LPlusD, Pattern::DLPlusD)
    } else {
        (Pattern::LMinus, Pattern::DLMinus, Pattern::LMinusD, Pattern::DLMinusD)
    };
    let mut ambiguous = straddle;
    let mut pattern = match (lo, hi) {
        (Side::Locked, Side::Locked) => l,
        (Side::Low, Side::Locked) => dl,
        (Side::Locked, Side::High) => ld,
        (Side::Low, Side::High) => dld,
        (Side::Low, Side::Low) | (Side::High, Side::High) => Pattern::D,
        _ => {
            ambiguous = true;
            Pattern::D
        }
    };

    // Families with an upper locking boundary: Δ < 0 in Table I (S1 / S3)
    // and Δ > 0 in Table II (S2 / S3). The others have S1 or S2 against S4.
    let bounded_family = (s >= 0.0 && delta < 0.0) || (s < 0.0 && delta > 0.0);
    let major = if bounded_family {
        let primary = if s >= 0.0 { Major::S1 } else { Major::S2 };
        let has_high = lo == Side::High || hi == Side::High;
        if has_high || r_tilde < d_max - TIE_TOL {
            Major::S3
        } else {
            primary
        }
    } else {
        let primary = if s >= 0.0 { Major::S2 } else { Major::S1 };
        if delta.abs() < IN_PHASE_DELTA && pattern == Pattern::D {
            Major::S4
        } else if lo == Side::Locked || hi == Side::Locked || above(d_max) {
            primary
        } else {
            Major::S4
        }
    };

    // Nearest legal row for combinations that the ends cannot realize.
    let mut label = StateLabel::new(major, pattern);
    if !label.is_legal(s) {
        ambiguous = true;
        pattern = match pattern {
            p if p == ld => l,
            p if p == dld => dl,
            _ => Pattern::D,
        };
        label = StateLabel::new(major, pattern);
        if !label.is_legal(s) {
            label = StateLabel::new(Major::S4, Pattern::D);
        }
    }
    label.ambiguous = ambiguous;
    label
}

/// Which ends of the K-sorted population a simulation found locked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObservedEnds {
    pub lowest_locked: bool,
    pub highest_locked: bool,
    pub n_locked: usize,
    pub n: usize,
}

/// Label for a simulated run: the pattern comes from the measured partition,
/// the major class from the theory classifier at the measured (R̃, Δ). When
/// the two disagree the closest legal row carrying the measured pattern is
/// used and the label is flagged ambiguous.
pub fn classify_observed(
    r_tilde: f64,
    delta: f64,
    params: &ModelParams,
    couplings: &CouplingSet,
    observed: ObservedEnds,
) -> StateLabel {
    let theory = classify_state(r_tilde, delta, params, couplings);
    let all = observed.n_locked == observed.n && observed.n > 0;
    if all && theory.pattern == Pattern::L0 {
        return theory;
    }
    let plus = delta < 0.0;
    let pick = |a: Pattern, b: Pattern| if plus { a } else { b };
    let pattern = match (observed.n_locked, observed.lowest_locked, observed.highest_locked) {
        (0, _, _) => Pattern::D,
        _ if all => pick(Pattern::LPlus, Pattern::LMinus),
        (_, false, true) => pick(Pattern::DLPlus, Pattern::DLMinus),
        (_, true, false) => pick(Pattern::LPlusD, Pattern::LMinusD),
        (_, false, false) => pick(Pattern::DLPlusD, Pattern::DLMinusD),
        // Both ends locked with drifters in between has no table row.
        (_, true, true) => pick(Pattern::LPlus, Pattern::LMinus),
    };
    let s = params.d0_sin_alpha();
    let mut label = StateLabel::new(theory.major, pattern);
    label.ambiguous = theory.ambiguous || (observed.lowest_locked && observed.highest_locked && !all);
    if !label.is_legal(s) {
        label.ambiguous = true;
        if let Some(&(major, _)) = legal_rows(s).iter().find(|(_, p)| *p == pattern) {
            label.major = major;
        } else {
            label.major = Major::S4;
            label.pattern = Pattern::D;
        }
    }
    label
}
