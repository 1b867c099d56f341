//! Normalized cumulant generating functions of the couples
//! `V_T = (X_T/√T, S_T/T)` and `W_T = (X_T²/T, S_T/T)`.
//!
//! A drift change to `φ` with `φ² = θ² − 2b` removes the `S_T` term from the
//! exponent, leaving a Gaussian integral in `X_T ~ N(0, σ_T²)` under the
//! tilted law. Writing `γ_T = 1 + (φ − θ)σ_T²`,
//!
//! ```text
//! L_T(a,b) = (φ − θ)/2 + a²σ_T²/(2γ_T) − log(γ_T)/(2T)
//! Λ_T(a,b) = (φ − θ)/2 − log(γ_T − 2aσ_T²)/(2T)
//! ```
//!
//! and the limit `L(a,b) = −(θ + √(θ²−2b))/2 + a²/(2(√(θ²−2b) − θ))` on its
//! effective domain. `σ_T²` and `γ_T` are handled in log-space once
//! `2|φ|T` exceeds [`LOG_SPACE_THRESHOLD`].

use serde::Serialize;
use thiserror::Error;

use crate::extended::ExtendedReal;

/// Half-width of the guard band around effective-domain boundaries.
pub const DOMAIN_EPS: f64 = 1e-12;

/// `2|φ|T` above which `e^{2φT}` is never formed directly.
pub const LOG_SPACE_THRESHOLD: f64 = 700.0;

const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CgfError {
    #[error("θ² − 2b = {disc} is not positive; no real tilt exists")]
    NoRealTilt { disc: f64 },
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("the domain of Λ is only characterized for θ ≥ 0, got θ = {0}")]
    UnsupportedRegime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Finite(f64),
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgfQuery {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub horizon: Horizon,
}

impl CgfQuery {
    pub fn finite(theta: f64, horizon: f64, a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            theta,
            horizon: Horizon::Finite(horizon),
        }
    }

    pub fn limit(theta: f64, a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            theta,
            horizon: Horizon::Limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgfValue {
    pub value: ExtendedReal,
    pub phi: f64,
    /// `σ_T²`; `+inf` in the limiting case or past the float range.
    pub sigma2: f64,
    pub ln_sigma2: f64,
    /// `γ_T`; `+inf` in the limiting case or past the float range.
    pub gamma: f64,
    /// Set when the closed form is used outside the regime it was derived for.
    pub extrapolated: bool,
}

/// Where a point sits relative to an effective domain, with a guard band of
/// [`DOMAIN_EPS`] around the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainStatus {
    Interior,
    Boundary,
    Exterior,
}

impl DomainStatus {
    fn from_margin(margin: f64) -> Self {
        if margin > DOMAIN_EPS {
            DomainStatus::Interior
        } else if margin >= -DOMAIN_EPS {
            DomainStatus::Boundary
        } else {
            DomainStatus::Exterior
        }
    }
}

/// The tilt `φ = ±√(θ² − 2b)`: positive root for `θ ≤ 0`, negative for `θ > 0`.
pub fn phi(theta: f64, b: f64) -> Result<f64, CgfError> {
    let disc = theta * theta - 2.0 * b;
    if !(disc > 0.0) {
        return Err(CgfError::NoRealTilt { disc });
    }
    Ok(signed_root(theta, disc))
}

fn signed_root(theta: f64, disc: f64) -> f64 {
    let r = disc.sqrt();
    if theta > 0.0 {
        -r
    } else {
        r
    }
}

/// `(e^u − 1)/u`, with the removable singularity at zero filled in.
fn expm1_ratio(u: f64) -> f64 {
    if u.abs() < SERIES_THRESHOLD {
        1.0 + u / 2.0 + u * u / 6.0
    } else {
        u.exp_m1() / u
    }
}

/// `ln σ_T²` for `σ_T² = (e^{2φT} − 1)/(2φ)`.
fn ln_sigma2(phi: f64, horizon: f64) -> f64 {
    let u = 2.0 * phi * horizon;
    if u > LOG_SPACE_THRESHOLD {
        u + (-(-u).exp()).ln_1p() - (2.0 * phi).ln()
    } else {
        horizon.ln() + expm1_ratio(u).ln()
    }
}

/// `ln(1 + κσ²)` given `ln σ²`, or `None` when `1 + κσ² ≤ 0`.
fn ln_one_plus(kappa: f64, ln_s2: f64) -> Option<f64> {
    if ln_s2 < LOG_SPACE_THRESHOLD {
        let t = kappa * ln_s2.exp();
        (t > -1.0).then(|| t.ln_1p())
    } else if kappa > 0.0 {
        Some(ln_s2 + kappa.ln() + ((-ln_s2).exp() / kappa).ln_1p())
    } else if kappa == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

fn finite_horizon(q: &CgfQuery) -> Result<f64, CgfError> {
    match q.horizon {
        Horizon::Finite(t) if t > 0.0 && t.is_finite() => Ok(t),
        Horizon::Finite(t) => Err(CgfError::InvalidHorizon(t)),
        Horizon::Limit => Err(CgfError::InvalidHorizon(f64::INFINITY)),
    }
}

/// Tilt and variance pieces shared by both finite-horizon CGFs. Accepts
/// `θ² − 2b = 0` (then `φ = 0` and `σ_T² = T`).
fn tilt(theta: f64, b: f64, horizon: f64) -> Result<(f64, f64), CgfError> {
    let disc = theta * theta - 2.0 * b;
    if disc < 0.0 || disc.is_nan() {
        return Err(CgfError::NoRealTilt { disc });
    }
    let phi = signed_root(theta, disc);
    Ok((phi, ln_sigma2(phi, horizon)))
}

fn exp_or_inf(ln: f64) -> f64 {
    if ln > f64::MAX.ln() {
        f64::INFINITY
    } else {
        ln.exp()
    }
}

/// `L_T(a,b) = (1/T) log E[exp(a√T X_T + b S_T)]`, exactly.
pub fn finite_cgf(q: &CgfQuery) -> Result<CgfValue, CgfError> {
    let horizon = finite_horizon(q)?;
    let (phi, ln_s2) = tilt(q.theta, q.b, horizon)?;
    let kappa = phi - q.theta;
    let value = match ln_one_plus(kappa, ln_s2) {
        Some(ln_gamma) => {
            // a²σ²/(2γ) = a² / (2(1/σ² + κ))
            let quad = q.a * q.a / (2.0 * ((-ln_s2).exp() + kappa));
            ExtendedReal::Finite(kappa / 2.0 + quad - ln_gamma / (2.0 * horizon))
        }
        None => ExtendedReal::PosInf,
    };
    Ok(CgfValue {
        value,
        phi,
        sigma2: exp_or_inf(ln_s2),
        ln_sigma2: ln_s2,
        gamma: gamma_value(kappa, ln_s2),
        extrapolated: false,
    })
}

fn gamma_value(kappa: f64, ln_s2: f64) -> f64 {
    match ln_one_plus(kappa, ln_s2) {
        Some(ln_gamma) => exp_or_inf(ln_gamma),
        None => 1.0 + kappa * ln_s2.exp(),
    }
}

/// `Λ_T(a,b) = (1/T) log E[exp(a X_T² + b S_T)]`, exactly.
///
/// The closed form holds for every `θ`; results for `θ < 0` are flagged
/// `extrapolated` because the domain of `Λ` is only characterized for `θ ≥ 0`.
pub fn finite_cgf_w(q: &CgfQuery) -> Result<CgfValue, CgfError> {
    let horizon = finite_horizon(q)?;
    let (phi, ln_s2) = tilt(q.theta, q.b, horizon)?;
    let kappa = phi - q.theta;
    let value = match ln_one_plus(kappa - 2.0 * q.a, ln_s2) {
        Some(ln_g) => ExtendedReal::Finite(kappa / 2.0 - ln_g / (2.0 * horizon)),
        None => ExtendedReal::PosInf,
    };
    Ok(CgfValue {
        value,
        phi,
        sigma2: exp_or_inf(ln_s2),
        ln_sigma2: ln_s2,
        gamma: gamma_value(kappa, ln_s2),
        extrapolated: q.theta < 0.0,
    })
}

/// The limiting CGF `L(a,b)`, `+∞` off its effective domain.
pub fn limiting_cgf(theta: f64, a: f64, b: f64) -> ExtendedReal {
    let bound = if theta <= 0.0 {
        theta * theta / 2.0
    } else {
        0.0
    };
    if !(b < bound) {
        return ExtendedReal::PosInf;
    }
    let s = (theta * theta - 2.0 * b).sqrt();
    ExtendedReal::Finite(-(theta + s) / 2.0 + a * a / (2.0 * (s - theta)))
}

/// Dispatches on the query horizon: exact `L_T` or the limit `L`.
pub fn cgf(q: &CgfQuery) -> Result<CgfValue, CgfError> {
    match q.horizon {
        Horizon::Finite(_) => finite_cgf(q),
        Horizon::Limit => {
            let disc = q.theta * q.theta - 2.0 * q.b;
            Ok(CgfValue {
                value: limiting_cgf(q.theta, q.a, q.b),
                phi: if disc >= 0.0 {
                    signed_root(q.theta, disc)
                } else {
                    f64::NAN
                },
                sigma2: f64::INFINITY,
                ln_sigma2: f64::INFINITY,
                gamma: f64::INFINITY,
                extrapolated: false,
            })
        }
    }
}

/// Position of `(a,b)` relative to `D_L`: `b < θ²/2` for `θ ≤ 0`, `b < 0` for `θ > 0`.
pub fn classify_l(theta: f64, _a: f64, b: f64) -> DomainStatus {
    let bound = if theta <= 0.0 {
        theta * theta / 2.0
    } else {
        0.0
    };
    DomainStatus::from_margin(bound - b)
}

/// Membership in the interior of `D_L` (boundary guard band excluded).
pub fn domain_l(theta: f64, a: f64, b: f64) -> bool {
    classify_l(theta, a, b) == DomainStatus::Interior
}

/// Position of `(a,b)` relative to `D_Λ = {θ² − 2b > 0, 2a + θ < √(θ² − 2b)}`.
pub fn classify_lambda(theta: f64, a: f64, b: f64) -> Result<DomainStatus, CgfError> {
    if theta < 0.0 {
        return Err(CgfError::UnsupportedRegime(theta));
    }
    let disc = theta * theta - 2.0 * b;
    let root = disc.max(0.0).sqrt();
    Ok(DomainStatus::from_margin(disc.min(root - 2.0 * a - theta)))
}

pub fn domain_lambda(theta: f64, a: f64, b: f64) -> Result<bool, CgfError> {
    Ok(classify_lambda(theta, a, b)? == DomainStatus::Interior)
}
