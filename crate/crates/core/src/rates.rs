//! Large-deviation rate functions.
//!
//! * [`joint_rate`]: closed-form rate of `V_T = (X_T/√T, S_T/T)` in all
//!   three regimes, with the explosive plateau.
//! * [`mle_rate`]: closed-form rate of the drift MLE.
//! * [`numeric_legendre`]: the Fenchel-Legendre transform of the limiting
//!   CGF computed by direct numerical maximization, independent of the
//!   closed forms.
//! * [`contraction_infimum`]: the MLE rate obtained by minimizing the joint
//!   rate over the fibre `{(x, y) : (x² − 1)/(2y) = z}`.

use serde::Serialize;
use thiserror::Error;

use crate::extended::ExtendedReal;
use crate::optimize::{bracket_additive, golden_max, Bracket};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("the exposed set is only defined for θ > 0, got θ = {0}")]
    UnsupportedRegime(f64),
    #[error(
        "Legendre search did not converge after {iterations} iterations \
         (last iterate a = {a}, b = {b}, value = {value}, spread = {spread:e})"
    )]
    NoConvergence {
        iterations: usize,
        a: f64,
        b: f64,
        value: f64,
        spread: f64,
    },
}

/// Which piece of a piecewise definition produced a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `y ≤ 0`: outside the support of the energy.
    OffDomain,
    Interior,
    /// Explosive regime, constant value `θ`.
    Plateau,
    /// The constraint `1 + 2yz ≥ 0` binds in the contraction.
    Border,
    /// Explosive regime at `z = θ`.
    Truth,
    /// Infimum approached as `y → ∞` and never attained.
    Limit,
    /// Supremum approached at the edge of the CGF domain.
    BoundaryLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateValue {
    pub value: ExtendedReal,
    pub branch: Branch,
}

impl RateValue {
    fn finite(value: f64, branch: Branch) -> Self {
        Self {
            value: ExtendedReal::Finite(value),
            branch,
        }
    }

    fn infinite(branch: Branch) -> Self {
        Self {
            value: ExtendedReal::PosInf,
            branch,
        }
    }
}

/// Closed-form joint rate `𝓘_θ(x, y)`.
pub fn joint_rate(theta: f64, x: f64, y: f64) -> RateValue {
    if !(y > 0.0) {
        return RateValue::infinite(Branch::OffDomain);
    }
    let r = 1.0 + x * x;
    if theta > 0.0 && y >= r / (2.0 * theta) {
        return RateValue::finite(theta, Branch::Plateau);
    }
    RateValue::finite(
        theta * (1.0 - x * x + theta * y) / 2.0 + r * r / (8.0 * y),
        Branch::Interior,
    )
}

/// Closed-form MLE rate `I_θ(z)`.
pub fn mle_rate(theta: f64, z: f64) -> RateValue {
    let border = |z: f64| -(z - theta).powi(2) / (4.0 * z);
    if theta <= 0.0 {
        if z < theta / 3.0 {
            RateValue::finite(border(z), Branch::Border)
        } else {
            RateValue::finite(2.0 * z - theta, Branch::Interior)
        }
    } else if z <= -theta {
        RateValue::finite(border(z), Branch::Border)
    } else if z < theta {
        RateValue::finite(theta, Branch::Plateau)
    } else if z == theta {
        RateValue::finite(0.0, Branch::Truth)
    } else {
        RateValue::finite(2.0 * z - theta, Branch::Interior)
    }
}

/// Membership in the exposed set `𝓕 = {0 < y < (1 + x²)/(2θ)}`.
pub fn exposed_member(theta: f64, x: f64, y: f64) -> Result<bool, RateError> {
    if !(theta > 0.0) {
        return Err(RateError::UnsupportedRegime(theta));
    }
    Ok(y > 0.0 && y < (1.0 + x * x) / (2.0 * theta))
}

/// `h(y) = (z − θ)² y/2 + z + 1/(2y)`: the joint rate along the fibre
/// `x² = 1 + 2yz`, expanded.
pub fn fibre_rate(theta: f64, z: f64, y: f64) -> f64 {
    (z - theta).powi(2) * y / 2.0 + z + 1.0 / (2.0 * y)
}

/// `inf { h(y) : y > 0, 1 + 2yz ≥ 0 }`.
///
/// `h` is convex with critical point `1/|z − θ|`; the feasible set is
/// `(0, −1/(2z)]` for `z < 0` and `(0, ∞)` otherwise. Candidates are the
/// critical point when feasible, the border point when `z < 0`, and the
/// `y → ∞` limit when `z = θ ≥ 0`; the smallest wins.
pub fn contraction_infimum(theta: f64, z: f64) -> RateValue {
    let mut best: Option<RateValue> = None;
    let mut offer = |value: f64, branch: Branch| {
        let cand = RateValue::finite(value, branch);
        best = Some(match best {
            Some(b) if b.value <= cand.value => b,
            _ => cand,
        });
    };

    if z != theta {
        let y = 1.0 / (z - theta).abs();
        if 1.0 + 2.0 * y * z >= 0.0 {
            offer(fibre_rate(theta, z, y), Branch::Interior);
        }
    }
    if z < 0.0 {
        offer(fibre_rate(theta, z, -1.0 / (2.0 * z)), Branch::Border);
    } else if z == theta {
        offer(z, Branch::Limit);
    }
    best.unwrap_or(RateValue::infinite(Branch::OffDomain))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreOptions {
    /// Target accuracy of the supremum value.
    pub tol: f64,
    /// Maximum golden-section iterations along `log u`.
    pub max_iter: usize,
    /// Smallest distance `u` from the domain boundary that is evaluated.
    pub u_min: f64,
    pub u_max: f64,
    /// Coarse grid points along `log u`.
    pub grid_u: usize,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50,
            u_min: 1e-6,
            u_max: 1e8,
            grid_u: 48,
        }
    }
}

/// The objective `ax + by − L(a, b)` on the reparametrized domain.
///
/// `b = θ²/2 − u²/2` (θ ≤ 0) or `b = −u²/2` (θ > 0) with `u = e^t`, so every
/// `t` is inside `D_L` and `t → −∞` walks onto its boundary.
struct DualObjective {
    theta: f64,
    x: f64,
    y: f64,
}

impl DualObjective {
    /// `(b, s, s − θ)` with `s = √(θ² − 2b)`, cancellation-free.
    fn tilt(&self, u: f64) -> (f64, f64, f64) {
        let th = self.theta;
        if th <= 0.0 {
            (th * th / 2.0 - u * u / 2.0, u, u - th)
        } else {
            let s = th.hypot(u);
            (-u * u / 2.0, s, u * u / (s + th))
        }
    }

    fn eval(&self, a: f64, t: f64) -> f64 {
        let (b, s, gap) = self.tilt(t.exp());
        let l = -(self.theta + s) / 2.0 + a * a / (2.0 * gap);
        a * self.x + b * self.y - l
    }

    fn b_of(&self, t: f64) -> f64 {
        self.tilt(t.exp()).0
    }

    /// `max_a` of the objective at fixed `t`, as `(value, a)`.
    fn profile(&self, t: f64) -> (f64, f64) {
        let f = |a: f64| self.eval(a, t);
        let a = match bracket_additive(&f, 0.0, 0.1 * (1.0 + self.x.abs()), -1e12, 1e12) {
            Bracket::Interior { lo, hi, .. } => {
                golden_max(f, lo, hi, 1e-13 * (1.0 + lo.abs().max(hi.abs())), 400).arg
            }
            Bracket::AtUpper { hi } => hi,
            Bracket::AtLower { lo } => lo,
        };
        (f(a), a)
    }
}

/// Numerical Fenchel-Legendre transform `sup_{(a,b) ∈ D_L} {ax + by − L(a,b)}`.
///
/// The inner maximization over `a` gives a profile in `t = log u` that is
/// concave in `b`, hence unimodal in `t`. A coarse log-spaced grid locates
/// the peak and golden-section search refines it. When the profile is
/// still increasing at `u = u_min` the boundary limit `u → 0` is reported
/// instead of the last iterate.
pub fn numeric_legendre(
    theta: f64,
    x: f64,
    y: f64,
    opts: &LegendreOptions,
) -> Result<RateValue, RateError> {
    if !(y > 0.0) {
        return Ok(RateValue::infinite(Branch::OffDomain));
    }
    let obj = DualObjective { theta, x, y };
    let p = |t: f64| obj.profile(t).0;
    let t_lo = opts.u_min.ln();
    let t_hi = opts.u_max.ln();

    // Coarse stage.
    let coarse_hi = 1e4f64.ln().min(t_hi);
    let n = opts.grid_u.max(3);
    let ts: Vec<f64> = (0..n)
        .map(|i| t_lo + (coarse_hi - t_lo) * i as f64 / (n - 1) as f64)
        .collect();
    let values: Vec<f64> = ts.iter().map(|&t| p(t)).collect();
    let k = (0..n).fold(0, |k, i| if values[i] > values[k] { i } else { k });

    if k == 0 && p(t_lo) >= p(t_lo + 1e-3) {
        // Limit of the profile as u → 0, extrapolated in u².
        let limit = (4.0 * p(t_lo - std::f64::consts::LN_2) - p(t_lo)) / 3.0;
        return Ok(RateValue::finite(limit, Branch::BoundaryLimit));
    }
    let (lo, hi) = if k + 1 == n {
        match bracket_additive(&p, ts[k], ts[1] - ts[0], t_lo, t_hi) {
            Bracket::Interior { lo, hi, .. } => (lo, hi),
            _ => {
                let (value, a) = obj.profile(t_hi);
                return Err(RateError::NoConvergence {
                    iterations: 0,
                    a,
                    b: obj.b_of(t_hi),
                    value,
                    spread: f64::INFINITY,
                });
            }
        }
    } else {
        (ts[k.saturating_sub(1)], ts[k + 1])
    };

    // Refinement: the spread of the profile over the final bracket bounds
    // the remaining error.
    let m = golden_max(p, lo, hi, 0.0, opts.max_iter);
    let half = 0.618_033_988_749_894_9f64.powi(m.iterations as i32) * (hi - lo) / 2.0;
    let spread = m.value - p((m.arg - half).max(lo)).min(p((m.arg + half).min(hi)));
    if spread > opts.tol * 1e-3 * (1.0 + m.value.abs()) {
        let a = obj.profile(m.arg).1;
        return Err(RateError::NoConvergence {
            iterations: m.iterations,
            a,
            b: obj.b_of(m.arg),
            value: m.value,
            spread,
        });
    }
    Ok(RateValue::finite(m.value, Branch::Interior))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(r: RateValue) -> f64 {
        r.value.finite().expect("finite rate")
    }

    #[test]
    fn joint_rate_pieces() {
        assert_eq!(joint_rate(-1.0, 0.0, -1.0).value, ExtendedReal::PosInf);
        assert_eq!(joint_rate(0.0, 1.0, 0.0).branch, Branch::OffDomain);
        assert_abs_diff_eq!(v(joint_rate(-1.0, 0.0, 0.5)), 0.0, epsilon = 1e-15);
        assert_eq!(
            joint_rate(1.0, 0.0, 2.0),
            RateValue::finite(1.0, Branch::Plateau)
        );
        assert_eq!(v(joint_rate(0.0, 1.0, 1.0)), 0.5);
    }

    #[test]
    fn joint_rate_stationary_at_ergodic_limit() {
        let (theta, h) = (-1.0, 1e-6);
        let y0 = -1.0 / (2.0 * theta);
        let dx = (v(joint_rate(theta, h, y0)) - v(joint_rate(theta, -h, y0))) / (2.0 * h);
        let dy =
            (v(joint_rate(theta, 0.0, y0 + h)) - v(joint_rate(theta, 0.0, y0 - h))) / (2.0 * h);
        assert!(dx.abs() < 1e-8 && dy.abs() < 1e-8);
    }

    #[test]
    fn mle_rate_values() {
        assert_eq!(mle_rate(-1.0, -1.0), RateValue::finite(0.0, Branch::Border));
        assert_eq!(v(mle_rate(0.0, -1.0)), 0.25);
        assert_eq!(v(mle_rate(0.0, 1.0)), 2.0);
        assert_eq!(v(mle_rate(0.0, 0.0)), 0.0);
        assert_eq!(v(mle_rate(1.0, 0.0)), 1.0);
        assert_eq!(v(mle_rate(1.0, 2.0)), 3.0);
        assert_eq!(mle_rate(1.0, -1.0), RateValue::finite(1.0, Branch::Border));
        assert_eq!(mle_rate(1.0, 1.0), RateValue::finite(0.0, Branch::Truth));
    }

    #[test]
    fn mle_rate_branch_continuity() {
        for &theta in &[-2.0f64, -1.0, -0.3] {
            let z = theta / 3.0;
            let below = mle_rate(theta, z - 1e-9);
            let above = mle_rate(theta, z + 1e-9);
            assert_eq!(below.branch, Branch::Border);
            assert_eq!(above.branch, Branch::Interior);
            assert_abs_diff_eq!(v(below), -theta / 3.0, epsilon = 1e-8);
            assert_abs_diff_eq!(v(above), -theta / 3.0, epsilon = 1e-8);
        }
        for &theta in &[0.5, 1.0, 2.0] {
            assert_abs_diff_eq!(v(mle_rate(theta, -theta)), theta, epsilon = 1e-12);
            assert_abs_diff_eq!(v(mle_rate(theta, -theta + 1e-12)), theta, epsilon = 1e-12);
        }
    }

    #[test]
    fn explosive_jump_at_truth() {
        let theta = 1.5;
        assert_eq!(v(mle_rate(theta, theta)), 0.0);
        assert_eq!(v(mle_rate(theta, theta - 1e-9)), theta);
        assert!((v(mle_rate(theta, theta + 1e-9)) - theta).abs() < 1e-8);
    }

    #[test]
    fn exposed_set() {
        assert!(exposed_member(1.0, 0.0, 0.25).unwrap());
        assert!(!exposed_member(1.0, 0.0, 0.5).unwrap());
        assert!(!exposed_member(1.0, 0.0, -1.0).unwrap());
        assert!(exposed_member(0.0, 0.0, 0.25).is_err());
        assert!(exposed_member(-1.0, 0.0, 0.25).is_err());
    }

    #[test]
    fn plateau_is_flat_off_exposed_set() {
        let theta = 0.8;
        for i in 0..50 {
            let x = -3.0 + 0.12 * i as f64;
            let edge = (1.0 + x * x) / (2.0 * theta);
            for &k in &[1.0, 1.3, 2.0, 10.0] {
                let y = edge * k;
                assert!(!exposed_member(theta, x, y).unwrap());
                assert_eq!(v(joint_rate(theta, x, y)), theta);
            }
            // continuity across the edge
            assert!((v(joint_rate(theta, x, edge * (1.0 - 1e-9))) - theta).abs() < 1e-7);
        }
    }

    #[test]
    fn contraction_hand_values() {
        assert_eq!(
            contraction_infimum(-1.0, -1.0),
            RateValue::finite(0.0, Branch::Border)
        );
        assert_eq!(
            contraction_infimum(-1.0, 0.0),
            RateValue::finite(1.0, Branch::Interior)
        );
        assert_eq!(v(contraction_infimum(0.0, 0.0)), 0.0);
        // Explosive truth: the contraction only reaches the plateau value.
        assert_eq!(
            contraction_infimum(1.0, 1.0),
            RateValue::finite(1.0, Branch::Limit)
        );
    }

    #[test]
    fn legendre_hand_values() {
        let o = LegendreOptions::default();
        assert_abs_diff_eq!(
            v(numeric_legendre(-1.0, 0.0, 0.5, &o).unwrap()),
            0.0,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            v(numeric_legendre(-1.0, 1.0, 1.0, &o).unwrap()),
            1.0,
            epsilon = 1e-4
        );
        let plateau = numeric_legendre(1.0, 0.0, 2.0, &o).unwrap();
        assert_eq!(plateau.branch, Branch::BoundaryLimit);
        assert_abs_diff_eq!(v(plateau), 1.0, epsilon = 1e-4);
        assert_eq!(
            numeric_legendre(0.0, 1.0, 0.0, &o).unwrap().value,
            ExtendedReal::PosInf
        );
    }

    #[test]
    fn legendre_reports_non_convergence() {
        let o = LegendreOptions {
            max_iter: 1,
            tol: 1e-15,
            ..Default::default()
        };
        match numeric_legendre(-1.0, 2.3, 0.4, &o) {
            Err(RateError::NoConvergence { iterations, .. }) => assert_eq!(iterations, 1),
            Ok(r) => panic!("converged in one iteration: {r:?}"),
            Err(e) => panic!("{e}"),
        }
    }

    proptest! {
        #[test]
        fn contraction_matches_closed_form(theta in -3.0f64..0.0, z in -6.0f64..6.0) {
            let c = v(contraction_infimum(theta, z));
            let m = v(mle_rate(theta, z));
            prop_assert!((c - m).abs() < 1e-8, "θ={} z={}: {} vs {}", theta, z, c, m);
        }

        #[test]
        fn mle_rate_nonnegative_zero_only_at_truth(theta in -3.0f64..3.0, z in -6.0f64..6.0) {
            let r = v(mle_rate(theta, z));
            prop_assert!(r >= 0.0);
            if z != theta {
                prop_assert!(r > 0.0 || (theta <= 0.0 && (z - theta).abs() < 1e-12));
            }
        }

        #[test]
        fn joint_rate_minimum_is_at_ergodic_point(theta in -3.0f64..-0.05, x in -3.0f64..3.0, y in 0.01f64..10.0) {
            prop_assert!(v(joint_rate(theta, x, y)) >= -1e-12);
        }
    }
}
