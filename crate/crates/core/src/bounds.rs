//! Analytic break-probability bounds and the security-parameter formula.
//!
//! All logarithms are natural.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("invalid bound parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, BoundError>;

/// `π²/4 − π⁴/48 ≈ 0.438`.
pub fn c_const() -> f64 {
    PI * PI / 4.0 - PI.powi(4) / 48.0
}

/// Per-iteration success ceiling `1 − c/(t+2)²` for an adversary holding `t`
/// black boxes.
pub fn per_iteration_bound(t: u32) -> f64 {
    1.0 - c_const() / f64::from(t + 2).powi(2)
}

/// Ceiling on success of the `ell`-th attempt, `(1 − c/(t+ℓ+1)²)^s`. Later
/// attempts are charged the extra copies used to simulate earlier ones.
pub fn attempt_bound(ell: u32, t: u32, s: u32) -> f64 {
    let base = 1.0 - c_const() / f64::from(t + ell + 1).powi(2);
    base.powi(s as i32)
}

/// `r(1 − c/(2r+1)²)^s` before clamping.
fn raw_break_bound(r: u32, s: u32) -> f64 {
    f64::from(r) * (1.0 - c_const() / f64::from(2 * r + 1).powi(2)).powf(f64::from(s))
}

/// `min(1, r(1 − c/(2r+1)²)^s)`.
pub fn break_probability_bound(r: u32, s: u32) -> f64 {
    raw_break_bound(r, s).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SMode {
    /// Least integer above `(2r+1)² ln(r/ε)/c`.
    Sufficient,
    /// Least integer `s` with `r(1 − c/(2r+1)²)^s < ε`.
    Exact,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(BoundError::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

fn check_r(r: u32) -> Result<()> {
    if r == 0 {
        return Err(BoundError::InvalidParams("r must be at least 1".into()));
    }
    Ok(())
}

/// Sufficient `s` for error `epsilon` at reusability `r`.
pub fn required_s(r: u32, epsilon: f64) -> Result<u64> {
    required_s_with(r, epsilon, SMode::Sufficient)
}

pub fn required_s_with(r: u32, epsilon: f64, mode: SMode) -> Result<u64> {
    check_r(r)?;
    check_epsilon(epsilon)?;
    let x = c_const() / f64::from(2 * r + 1).powi(2);
    let ln_ratio = (f64::from(r) / epsilon).ln();
    let threshold = match mode {
        SMode::Sufficient => ln_ratio / x,
        SMode::Exact => -ln_ratio / (-x).ln_1p(),
    };
    let mut s = threshold.floor() as u64 + 1;
    if mode == SMode::Exact {
        // Guard the floor against rounding at the boundary.
        while s > 1 && raw_break_bound(r, (s - 1) as u32) < epsilon {
            s -= 1;
        }
        while raw_break_bound(r, s as u32) >= epsilon {
            s += 1;
        }
    }
    Ok(s)
}

/// Threshold `ln(ε/r)/ln(1 − c/(2r+1)²)` that `s` must exceed.
pub fn exact_threshold(r: u32, epsilon: f64) -> f64 {
    let x = c_const() / f64::from(2 * r + 1).powi(2);
    (epsilon / f64::from(r)).ln() / (-x).ln_1p()
}

/// Sufficient threshold `(2r+1)² ln(r/ε)/c`.
pub fn sufficient_threshold(r: u32, epsilon: f64) -> f64 {
    f64::from(2 * r + 1).powi(2) * (f64::from(r) / epsilon).ln() / c_const()
}

/// Full bound chain for one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub r: u32,
    pub s: u32,
    pub t: u32,
    pub t_prime: u32,
    pub c: f64,
    pub per_iteration_bound: f64,
    /// `(1 − c/(t+ℓ+1)²)^s` for `ℓ = 1..=r−t'`.
    pub per_attempt_bounds: Vec<f64>,
    /// Sum of `per_attempt_bounds`, clamped to 1.
    pub union_bound: f64,
    pub p_break_bound: f64,
    /// True when either union value exceeded 1 and was clamped.
    pub clamped: bool,
    pub epsilon: Option<f64>,
    pub required_s: Option<u64>,
    pub required_s_exact: Option<u64>,
}

impl BoundReport {
    pub fn new(r: u32, s: u32, t_prime: u32) -> Result<Self> {
        check_r(r)?;
        if t_prime >= r {
            return Err(BoundError::InvalidParams(format!(
                "t' = {t_prime} must be below r = {r}"
            )));
        }
        let t = r + t_prime;
        let per_attempt_bounds: Vec<f64> =
            (1..=r - t_prime).map(|l| attempt_bound(l, t, s)).collect();
        let union_raw: f64 = per_attempt_bounds.iter().sum();
        let p_raw = raw_break_bound(r, s);
        Ok(Self {
            r,
            s,
            t,
            t_prime,
            c: c_const(),
            per_iteration_bound: per_iteration_bound(t),
            per_attempt_bounds,
            union_bound: union_raw.min(1.0),
            p_break_bound: p_raw.min(1.0),
            clamped: union_raw > 1.0 || p_raw > 1.0,
            epsilon: None,
            required_s: None,
            required_s_exact: None,
        })
    }

    /// Report for the `s` a target `epsilon` requires (sufficient mode), with the
    /// exact threshold alongside.
    pub fn for_epsilon(r: u32, epsilon: f64, t_prime: u32) -> Result<Self> {
        let s_thm = required_s_with(r, epsilon, SMode::Sufficient)?;
        let s_exact = required_s_with(r, epsilon, SMode::Exact)?;
        let s = u32::try_from(s_thm)
            .map_err(|_| BoundError::InvalidParams(format!("required s = {s_thm} overflows")))?;
        let mut report = Self::new(r, s, t_prime)?;
        report.epsilon = Some(epsilon);
        report.required_s = Some(s_thm);
        report.required_s_exact = Some(s_exact);
        Ok(report)
    }
}
