//! Non-asymptotic concentration bounds for the drift MLE:
//!
//! ```text
//! P(|θ̂_T − θ| ≥ x) ≤ 2 exp(−x² h_T(y_x) / 2),   y_x = argmax_{y>0} h_T(y)
//! ```
//!
//! plus the regime-specific closed forms obtained by plugging explicit `y`
//! values, and the Laplace-transform bound on `E[exp(b S_T)]` they rest on.
//! Bounds are carried as `(log_bound, bound)` pairs and capped at one.

use std::f64::consts::LN_2;

use serde::Serialize;
use thiserror::Error;

use crate::model::Regime;
use crate::optimize::{bracket_geometric, golden_max, Bracket};

/// Bracket expansion stops here; a maximizer beyond it is reported as monotone.
pub const Y_MAX: f64 = 1e12;
pub const Y_MIN: f64 = 1e-12;
pub const Y_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConcentrationError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("Laplace bound needs b < 0, got {0}")]
    NonNegativeTilt(f64),
    #[error("argmax search did not converge (bracket [{lo}, {hi}])")]
    NoConvergence { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiQuery {
    pub theta: f64,
    pub horizon: f64,
    pub x: f64,
}

impl CiQuery {
    pub fn new(theta: f64, horizon: f64, x: f64) -> Result<Self, ConcentrationError> {
        if !theta.is_finite() {
            return Err(ConcentrationError::InvalidQuery(format!("θ = {theta}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(ConcentrationError::InvalidQuery(format!("T = {horizon}")));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(ConcentrationError::InvalidQuery(format!("x = {x}")));
        }
        Ok(Self { theta, horizon, x })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    NumericArgmax,
    /// Stable closed form; `small_deviation` records whether `x ≤ −θ`.
    CorollaryStable {
        small_deviation: bool,
    },
    CorollaryUnstable,
    CorollaryExplosive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiBoundReport {
    pub bound: f64,
    pub log_bound: f64,
    /// The `y` at which the exponent function was evaluated.
    pub y_star: f64,
    /// Exponent function value at `y_star`; `bound = min(1, 2e^{−x² h/2})`.
    pub h_value: f64,
    pub method: CiMethod,
    /// The uncapped bound exceeded one.
    pub capped: bool,
    /// The exponent kept increasing up to the search limit.
    pub monotone: bool,
}

impl CiBoundReport {
    fn from_exponent(
        q: &CiQuery,
        y_star: f64,
        h_value: f64,
        method: CiMethod,
        monotone: bool,
    ) -> Self {
        let raw = LN_2 - q.x * q.x * h_value / 2.0;
        let log_bound = raw.min(0.0);
        Self {
            bound: log_bound.exp(),
            log_bound,
            y_star,
            h_value,
            method,
            capped: raw > 0.0,
            monotone,
        }
    }
}

/// The exponent function `h_T(y)`, branch chosen by the sign of `θ`.
pub fn h_t(q: &CiQuery, y: f64) -> f64 {
    let CiQuery {
        theta,
        horizon: t,
        x,
    } = *q;
    match Regime::of(theta) {
        Regime::Stable => {
            (-theta * t * y + (y + 2.0).ln() - (2.0 * (y + 1.0)).ln())
                / (x * x + theta * theta * y * (y + 2.0))
        }
        Regime::Unstable => (t * y - LN_2) / (x * x + y * y),
        Regime::Explosive => {
            (theta * t * (y + 2.0) + y.ln() - (2.0 * (y + 1.0)).ln())
                / (x * x + theta * theta * y * (y + 2.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArgMax {
    pub y: f64,
    pub h: f64,
    pub monotone: bool,
}

/// `argmax_{y>0} h_T(y)`: geometric bracketing from `y = 1` by factors of 4,
/// golden-section search to [`Y_TOL`], then bisection on the derivative.
pub fn optimal_y(q: &CiQuery) -> Result<ArgMax, ConcentrationError> {
    let f = |y: f64| h_t(q, y);
    match bracket_geometric(&f, 1.0, 4.0, Y_MIN, Y_MAX) {
        Bracket::Interior { lo, mid, hi } => {
            let tol = Y_TOL.min(1e-6 * mid);
            let m = golden_max(f, lo, hi, tol, 10_000);
            if !m.value.is_finite() {
                return Err(ConcentrationError::NoConvergence { lo, hi });
            }
            let y = polish(q, (m.arg - 2.0 * tol).max(lo), (m.arg + 2.0 * tol).min(hi))
                .unwrap_or(m.arg);
            Ok(ArgMax {
                y,
                h: f(y),
                monotone: false,
            })
        }
        Bracket::AtUpper { hi } => Ok(ArgMax {
            y: hi,
            h: f(hi),
            monotone: true,
        }),
        Bracket::AtLower { lo } => Ok(ArgMax {
            y: lo,
            h: f(lo),
            monotone: true,
        }),
    }
}

/// Sign of `h_T'(y)`, from the quotient rule on the closed form.
fn h_slope(q: &CiQuery, y: f64) -> f64 {
    let CiQuery {
        theta,
        horizon: t,
        x,
    } = *q;
    let (den, den_dy) = match Regime::of(theta) {
        Regime::Unstable => (x * x + y * y, 2.0 * y),
        _ => (
            x * x + theta * theta * y * (y + 2.0),
            2.0 * theta * theta * (y + 1.0),
        ),
    };
    let (num, num_dy) = match Regime::of(theta) {
        Regime::Stable => (
            -theta * t * y + (y + 2.0).ln() - (2.0 * (y + 1.0)).ln(),
            -theta * t + 1.0 / (y + 2.0) - 1.0 / (y + 1.0),
        ),
        Regime::Unstable => (t * y - LN_2, t),
        Regime::Explosive => (
            theta * t * (y + 2.0) + y.ln() - (2.0 * (y + 1.0)).ln(),
            theta * t + 1.0 / y - 1.0 / (y + 1.0),
        ),
    };
    num_dy * den - num * den_dy
}

/// Bisection on the sign of `h_T'` inside `[lo, hi]`, when it changes sign there.
fn polish(q: &CiQuery, mut lo: f64, mut hi: f64) -> Option<f64> {
    if !(h_slope(q, lo) > 0.0 && h_slope(q, hi) < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h_slope(q, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Concentration bound at the numerically located `y_x`.
pub fn ci_bound(q: &CiQuery) -> Result<CiBoundReport, ConcentrationError> {
    let m = optimal_y(q)?;
    Ok(CiBoundReport::from_exponent(
        q,
        m.y,
        m.h,
        CiMethod::NumericArgmax,
        m.monotone,
    ))
}

/// Stable-case surrogate `ℓ_T(y) = (−θTy − log 2)/(x² + θ²y(y+2)) < h_T(y)`.
pub fn ell_t(q: &CiQuery, y: f64) -> f64 {
    let CiQuery {
        theta,
        horizon: t,
        x,
    } = *q;
    (-theta * t * y - LN_2) / (x * x + theta * theta * y * (y + 2.0))
}

/// Closed-form bounds at explicit values of `y`:
///
/// * stable: the maximizer of `ℓ_T`, `y = −(log 2 + √(T²x² − 2θT log 2 + log²2))/(θT)`;
/// * unstable: the exact maximizer `y = (log 2 + √(T²x² + log²2))/T`;
/// * explosive: `y = log 2/(θT)`.
pub fn corollary_bound(q: &CiQuery) -> CiBoundReport {
    let CiQuery {
        theta,
        horizon: t,
        x,
    } = *q;
    let (tx2, l2) = (t * t * x * x, LN_2 * LN_2);
    match Regime::of(theta) {
        Regime::Stable => {
            let root = (tx2 - 2.0 * theta * t * LN_2 + l2).sqrt();
            let y = -(LN_2 + root) / (theta * t);
            // x² ℓ_T(y)/2 = T²x² / (4(log 2 − θT + root))
            let h = t * t / (2.0 * (LN_2 - theta * t + root));
            let method = CiMethod::CorollaryStable {
                small_deviation: x <= -theta,
            };
            CiBoundReport::from_exponent(q, y, h, method, false)
        }
        Regime::Unstable => {
            let root = (tx2 + l2).sqrt();
            let y = (LN_2 + root) / t;
            let h = t * t / (2.0 * (LN_2 + root));
            CiBoundReport::from_exponent(q, y, h, CiMethod::CorollaryUnstable, false)
        }
        Regime::Explosive => {
            let y = LN_2 / (theta * t);
            let num = 2.0 * theta * t + LN_2.ln() - (theta * t + LN_2).ln();
            let h = t * t * num / (tx2 + 2.0 * theta * t * LN_2 + l2);
            CiBoundReport::from_exponent(q, y, h, CiMethod::CorollaryExplosive, false)
        }
    }
}

/// The weaker closed forms of the stable and unstable corollaries, valid
/// for `0 < x ≤ −θ` (stable), `x > −θ` (stable) and all `x` (unstable).
pub fn corollary_simplified(q: &CiQuery) -> Option<f64> {
    let CiQuery {
        theta,
        horizon: t,
        x,
    } = *q;
    let tx2 = t * t * x * x;
    let exponent = match Regime::of(theta) {
        Regime::Stable if x <= -theta => tx2 / (8.0 * (-theta * t + LN_2)),
        Regime::Stable => tx2 / (4.0 * (t * (x - theta) + 2.0 * LN_2)),
        Regime::Unstable => tx2 / (4.0 * (t * x + 2.0 * LN_2)),
        Regime::Explosive => return None,
    };
    Some((LN_2 - exponent).min(0.0).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceBound {
    pub log_bound: f64,
    pub bound: f64,
    pub phi: f64,
}

/// Upper bound on `E[exp(b S_T)]` for `b < 0`:
///
/// * `θ ≤ 0`, `φ = √(θ² − 2b)`: `exp(−T(φ + θ)/2 − ½ log((φ − θ)/(2φ)))`;
/// * `θ > 0`, `φ = −√(θ² − 2b)`: `exp(T(φ − θ)/2 − ½ log((φ + θ)/(2φ)))`.
pub fn laplace_upper_bound(
    theta: f64,
    horizon: f64,
    b: f64,
) -> Result<LaplaceBound, ConcentrationError> {
    if !(b < 0.0) {
        return Err(ConcentrationError::NonNegativeTilt(b));
    }
    if !(horizon > 0.0) {
        return Err(ConcentrationError::InvalidQuery(format!("T = {horizon}")));
    }
    let r = (theta * theta - 2.0 * b).sqrt();
    let (phi, log_bound) = if theta <= 0.0 {
        let phi = r;
        (
            phi,
            -horizon * (phi + theta) / 2.0 - 0.5 * ((phi - theta) / (2.0 * phi)).ln(),
        )
    } else {
        let phi = -r;
        (
            phi,
            horizon * (phi - theta) / 2.0 - 0.5 * ((phi + theta) / (2.0 * phi)).ln(),
        )
    };
    Ok(LaplaceBound {
        log_bound,
        bound: log_bound.exp(),
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn q(theta: f64, t: f64, x: f64) -> CiQuery {
        CiQuery::new(theta, t, x).unwrap()
    }

    #[test]
    fn exponent_hand_values() {
        assert_abs_diff_eq!(
            h_t(&q(0.0, 10.0, 1.0), 1.0),
            (10.0 - LN_2) / 2.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            h_t(&q(0.0, 10.0, 1.0), 1.0),
            4.653_426_409_720_03,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            h_t(&q(-1.0, 10.0, 1.0), 1.0),
            2.428_079_481_887_05,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            h_t(&q(1.0, 10.0, 1.0), 1.0),
            7.153_426_409_720_03,
            epsilon = 1e-12
        );
    }

    #[test]
    fn query_validation() {
        assert!(CiQuery::new(0.0, 0.0, 1.0).is_err());
        assert!(CiQuery::new(0.0, 1.0, 0.0).is_err());
        assert!(CiQuery::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn unstable_argmax_matches_stationarity() {
        let (t, x) = (10.0, 1.0);
        let m = optimal_y(&q(0.0, t, x)).unwrap();
        let exact = (LN_2 + (t * t * x * x + LN_2 * LN_2).sqrt()) / t;
        assert_abs_diff_eq!(exact, 1.071_714_104_597_7, epsilon = 1e-12);
        assert_abs_diff_eq!(m.y, exact, epsilon = 1e-7);
        assert!(!m.monotone);
    }

    #[test]
    fn stable_argmax_beats_surrogate_maximizer() {
        let qq = q(-1.0, 10.0, 1.0);
        let c = corollary_bound(&qq);
        assert_abs_diff_eq!(c.y_star, 1.138_629_436_111_99, epsilon = 1e-12);
        assert_relative_eq!(ell_t(&qq, c.y_star), c.h_value, max_relative = 1e-12);
        let m = optimal_y(&qq).unwrap();
        assert_abs_diff_eq!(m.y, 1.025_317_124_609_65, epsilon = 1e-7);
        assert!(m.h >= h_t(&qq, c.y_star));
    }

    #[test]
    fn explosive_argmax_beats_corollary_point() {
        let qq = q(1.0, 5.0, 1.0);
        let y0 = LN_2 / 5.0;
        assert_abs_diff_eq!(y0, 0.138_629, epsilon = 1e-6);
        let m = optimal_y(&qq).unwrap();
        assert_abs_diff_eq!(m.y, 0.105_823_676_938_235, epsilon = 1e-7);
        assert!(m.h >= h_t(&qq, y0));
        let c = corollary_bound(&qq);
        assert_relative_eq!(c.h_value, h_t(&qq, y0), max_relative = 1e-12);
    }

    #[test]
    fn corollary_hand_values() {
        assert_relative_eq!(
            corollary_bound(&q(-1.0, 10.0, 1.0)).bound,
            0.621,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            corollary_bound(&q(0.0, 10.0, 1.0)).bound,
            0.194,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            corollary_bound(&q(1.0, 5.0, 1.0)).bound,
            0.0952,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            corollary_bound(&q(-1.0, 10.0, 1.0)).bound,
            0.621_371_723_398_353,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            corollary_bound(&q(0.0, 10.0, 1.0)).bound,
            0.194_064_540_810_796,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            corollary_bound(&q(1.0, 5.0, 1.0)).bound,
            0.095_241_133_268_309_2,
            max_relative = 1e-12
        );
        assert_eq!(
            corollary_bound(&q(-1.0, 10.0, 1.0)).method,
            CiMethod::CorollaryStable {
                small_deviation: true
            }
        );
    }

    #[test]
    fn numeric_bound_improves_on_corollaries() {
        assert!(ci_bound(&q(0.0, 10.0, 1.0)).unwrap().bound <= 0.194 * (1.0 + 1e-3));
        assert!(ci_bound(&q(-1.0, 10.0, 1.0)).unwrap().bound <= 0.621 * (1.0 + 1e-3));
    }

    #[test]
    fn vacuous_bounds_are_capped() {
        let r = ci_bound(&q(-0.1, 1.0, 0.25)).unwrap();
        assert!(r.capped);
        assert_eq!(r.bound, 1.0);
        assert_eq!(r.log_bound, 0.0);
        let c = corollary_bound(&q(2.0, 0.01, 0.1));
        assert!(c.capped && c.bound == 1.0);
    }

    #[test]
    fn simplified_forms_are_weaker() {
        for &(theta, t, x) in &[
            (-1.0, 10.0, 0.5),
            (-1.0, 10.0, 2.0),
            (0.0, 5.0, 1.0),
            (-2.0, 1.0, 0.3),
        ] {
            let qq = q(theta, t, x);
            assert!(corollary_simplified(&qq).unwrap() >= corollary_bound(&qq).bound - 1e-15);
        }
        assert!(corollary_simplified(&q(1.0, 1.0, 1.0)).is_none());
    }

    #[test]
    fn laplace_bound_values() {
        let lb = laplace_upper_bound(0.0, 1.0, -0.5).unwrap();
        assert_abs_diff_eq!(lb.bound, 2f64.sqrt() * (-0.5f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(lb.bound, 0.857_763_884_960_707, epsilon = 1e-12);
        assert!(1.0f64.cosh().powf(-0.5) <= lb.bound);
        let near_zero = laplace_upper_bound(-1.0, 3.0, -1e-12).unwrap();
        assert_abs_diff_eq!(near_zero.bound, 1.0, epsilon = 1e-9);
        assert!(
            laplace_upper_bound(1.0, 1.0, -0.5).unwrap().bound >= (-0.394_568_296_929_075f64).exp()
        );
        assert!(laplace_upper_bound(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn argmax_is_stationary() {
        for &theta in &[-2.0, -1.0, -0.1, 0.0, 0.1, 1.0, 2.0] {
            for &t in &[1.0, 5.0, 10.0, 20.0] {
                for &x in &[0.25, 0.5, 1.0, 2.0] {
                    let qq = q(theta, t, x);
                    let m = optimal_y(&qq).unwrap();
                    assert!(!m.monotone, "{qq:?}");
                    // five-point centered stencil; h_T''' reaches 1e10 near small y*
                    let f = |k: f64| h_t(&qq, m.y + k * 1e-3 * m.y);
                    let d = (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * 1e-3 * m.y);
                    assert!(d.abs() < 1e-6, "{qq:?}: derivative {d}");
                }
            }
        }
    }
}
