//! Property suites: each function runs one verification battery over a fixed
//! grid and returns a [`CheckReport`]. The Monte Carlo suites take the path
//! count and run configuration so callers can trade accuracy for time.

use rayon::prelude::*;
use serde::Serialize;

use crate::cgf::{finite_cgf, CgfQuery};
use crate::concentration::{ci_bound, corollary_bound, laplace_upper_bound, CiQuery};
use crate::extended::ExtendedReal;
use crate::mc::{
    ldp_slope, map_paths, mean_girsanov_weight, mean_se, Estimator, EventSpec, McError, RunConfig,
};
use crate::model::{mle, GridSpec, OuModel};
use crate::rates::{contraction_infimum, joint_rate, mle_rate, numeric_legendre, LegendreOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Largest value of the suite's error statistic (see each suite).
    pub worst: f64,
    pub failures: Vec<String>,
}

impl CheckReport {
    /// One-line human summary.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} {} ({} cases, worst {:.3e})",
            self.name, self.cases, self.worst
        );
        if let Some(first) = self.failures.first() {
            s.push_str(&format!(": {first}"));
            if self.failures.len() > 1 {
                s.push_str(&format!(" (+{} more)", self.failures.len() - 1));
            }
        }
        s
    }
}

struct Tally {
    name: &'static str,
    cases: usize,
    worst: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            worst: 0.0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, stat: f64, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if stat.is_nan() || stat > self.worst {
            self.worst = stat;
        }
        if !ok {
            self.failures.push(detail());
        }
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            name: self.name.to_string(),
            passed: self.failures.is_empty() && self.cases > 0,
            cases: self.cases,
            worst: self.worst,
            failures: self.failures,
        }
    }
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (stop - start) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                stop
            } else {
                start + i as f64 * step
            }
        })
        .collect()
}

/// Numeric Legendre transform against the closed-form joint rate on
/// `x ∈ [−3, 3]` (21 points) × `y ∈ (0, 3]` (21 points), `θ ∈ {−1, 0, 1}`.
/// Every explosive cell lies in the exposed set or on the plateau.
/// Statistic: absolute difference.
pub fn legendre_duality(opts: &LegendreOptions) -> CheckReport {
    const TOL: f64 = 1e-4;
    let xs = linspace(-3.0, 3.0, 21);
    let ys: Vec<f64> = (1..=21).map(|j| 3.0 * j as f64 / 21.0).collect();
    let mut cells = Vec::with_capacity(3 * xs.len() * ys.len());
    for &th in &[-1.0, 0.0, 1.0] {
        for &x in &xs {
            cells.extend(ys.iter().map(|&y| (th, x, y)));
        }
    }
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(th, x, y)| (th, x, y, numeric_legendre(th, x, y, opts)))
        .collect();

    let mut t = Tally::new("legendre-duality");
    for (th, x, y, r) in results {
        let exact = joint_rate(th, x, y).value.to_f64();
        match r {
            Ok(v) => {
                let err = (v.value.to_f64() - exact).abs();
                t.record(err < TOL, err, || {
                    format!("θ={th} x={x} y={y}: numeric {} vs {exact}", v.value)
                });
            }
            Err(e) => t.record(false, f64::INFINITY, || format!("θ={th} x={x} y={y}: {e}")),
        }
    }
    t.finish()
}

/// The contraction infimum against the closed-form MLE rate: 100 points per
/// regime, `z ∈ [θ−5, θ+5]` for `θ ∈ {−1, 0}` and, for `θ = 1`, 50 points on
/// `[−6, −1]` plus 50 on `(1, 6]`. Statistic: absolute difference.
pub fn contraction_identity() -> CheckReport {
    const TOL: f64 = 1e-8;
    let mut t = Tally::new("contraction-identity");
    let mut grids: Vec<(f64, Vec<f64>)> = vec![
        (-1.0, linspace(-6.0, 4.0, 100)),
        (0.0, linspace(-5.0, 5.0, 100)),
    ];
    let mut explosive = linspace(-6.0, -1.0, 50);
    explosive.extend(linspace(1.1, 6.0, 50));
    grids.push((1.0, explosive));
    for (th, zs) in grids {
        for z in zs {
            let a = contraction_infimum(th, z).value.to_f64();
            let b = mle_rate(th, z).value.to_f64();
            let err = (a - b).abs();
            t.record(err < TOL, err, || {
                format!("θ={th} z={z}: contraction {a} vs closed form {b}")
            });
        }
    }
    t.finish()
}

/// `θ = 0, a = 0`: `L_T(0, b) = −log cosh(√(−2b) T)/(2T)`.
/// Statistic: absolute difference.
pub fn cameron_martin() -> CheckReport {
    const TOL: f64 = 1e-10;
    let mut t = Tally::new("cameron-martin");
    for &b in &[-5.0_f64, -2.0, -1.0, -0.5, -0.1] {
        for &horizon in &[0.5, 1.0, 5.0] {
            let exact = -((-2.0 * b).sqrt() * horizon).cosh().ln() / (2.0 * horizon);
            let got = finite_cgf(&CgfQuery::finite(0.0, horizon, 0.0, b)).map(|v| v.value);
            let err = match got {
                Ok(ExtendedReal::Finite(v)) => (v - exact).abs(),
                _ => f64::INFINITY,
            };
            t.record(err < TOL, err, || {
                format!("b={b} T={horizon}: {got:?} vs {exact}")
            });
        }
    }
    t.finish()
}

/// `(a, b)` points at which the Monte Carlo CGF is compared; all have
/// `(2a, 2b)` inside the finite-horizon domain at `T = 1`.
pub const CGF_MC_POINTS: [(f64, f64); 3] = [(0.3, -0.5), (-0.2, -0.1), (0.5, -1.0)];

/// Monte Carlo `(1/T) log E[exp(a√T X_T + b S_T)]` against `finite_cgf` at
/// `T = 1`, `θ ∈ {−1, 0, 1}`; paths are shared across the three points.
/// Statistic: `|MC − exact| / SE`, threshold 4.
pub fn cgf_monte_carlo(n: usize, run: RunConfig) -> Result<CheckReport, McError> {
    let horizon = 1.0;
    let mut t = Tally::new("cgf-monte-carlo");
    for (k, &th) in [-1.0, 0.0, 1.0].iter().enumerate() {
        let model = OuModel::new(th, horizon)?;
        let grid = GridSpec::default_for(&model);
        let sub = RunConfig {
            seed: run.seed.wrapping_add(k as u64),
            ..run
        };
        let samples = map_paths(&model, &grid, n, sub, |s| {
            Ok(CGF_MC_POINTS.map(|(a, b)| (a * horizon.sqrt() * s.x_t + b * s.s_t).exp()))
        })?;
        for (j, &(a, b)) in CGF_MC_POINTS.iter().enumerate() {
            let column: Vec<f64> = samples.iter().map(|row| row[j]).collect();
            let m = mean_se(&column);
            let value = m.mean.ln() / horizon;
            let se = m.se / (m.mean * horizon);
            let exact = finite_cgf(&CgfQuery::finite(th, horizon, a, b))
                .map(|v| v.value.to_f64())
                .unwrap_or(f64::NAN);
            let z = (value - exact).abs() / se;
            t.record(z < 4.0, z, || {
                format!("θ={th} (a,b)=({a},{b}): MC {value} ± {se} vs {exact}")
            });
        }
    }
    Ok(t.finish())
}

/// Stable branches meet at `z = θ/3` with value `−θ/3`; the rate vanishes at
/// the truth; the explosive border and plateau meet at `z = −θ` with value
/// `θ`. Statistic: absolute gap.
pub fn continuity_and_truth() -> CheckReport {
    let mut t = Tally::new("continuity-and-truth");
    let v = |th: f64, z: f64| mle_rate(th, z).value.to_f64();
    for &th in &[-2.0, -1.0, -0.5, -0.1] {
        let z = th / 3.0;
        let (left, right) = (v(th, z.next_down()), v(th, z));
        let gap = (left - right).abs();
        t.record(gap < 1e-12, gap, || format!("θ={th}: {left} | {right}"));
        let err = (right + th / 3.0).abs();
        t.record(err < 1e-12, err, || {
            format!("θ={th}: I(θ/3) = {right}, expected {}", -th / 3.0)
        });
    }
    for &th in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
        let r = v(th, th);
        t.record(r == 0.0, r.abs(), || format!("θ={th}: I(θ) = {r}"));
    }
    for &th in &[0.5, 1.0, 2.0] {
        let (border, plateau) = (v(th, -th), v(th, (-th).next_up()));
        let err = (border - th).abs().max((plateau - th).abs());
        t.record(err < 1e-12, err, || {
            format!("θ={th}: border {border}, plateau {plateau}")
        });
    }
    t.finish()
}

/// Fitted large-deviation slopes of `P(θ̂_T ≤ c)` for `θ = −1, c = −2`
/// (`T ∈ {8, 16, 24}`) and `θ = 0, c = −1` (`T ∈ {4, 8, 12}`), drift-tilted
/// estimator. Statistic: relative slope error, threshold 0.3.
pub fn ldp_slopes(n: usize, run: RunConfig) -> Result<CheckReport, McError> {
    let mut t = Tally::new("ldp-slopes");
    let cases: [(f64, f64, [f64; 3]); 2] = [
        (-1.0, -2.0, [8.0, 16.0, 24.0]),
        (0.0, -1.0, [4.0, 8.0, 12.0]),
    ];
    for (k, (th, c, ladder)) in cases.into_iter().enumerate() {
        let sub = RunConfig {
            seed: run.seed.wrapping_add(k as u64),
            ..run
        };
        let r = ldp_slope(
            th,
            &ladder,
            &EventSpec::mle_le(c),
            n,
            sub,
            Estimator::Tilted { theta_sim: None },
        )?;
        match r.extrapolated_slope {
            Some(slope) => {
                let rel = ((slope - r.target) / r.target).abs();
                t.record(rel <= 0.3 && slope < 0.0, rel, || {
                    format!("θ={th} c={c}: slope {slope} vs target {}", r.target)
                });
            }
            None => t.record(false, f64::INFINITY, || {
                format!("θ={th} c={c}: {}", r.warnings.join("; "))
            }),
        }
    }
    Ok(t.finish())
}

/// Monte Carlo `P(|θ̂_T − θ| ≥ x)` against the bounds for `θ ∈ {−1, 0, 1}`,
/// `T ∈ {1, 5, 10}`, `x ∈ {0.5, 1, 2}`: `p̂ − 3 se ≤ ci_bound ≤
/// corollary_bound ≤ 1`. Paths are shared across `x`. Statistic: largest
/// `(p̂ − 3 se) − ci_bound`, or chain violation.
pub fn ci_dominance(n: usize, run: RunConfig) -> Result<CheckReport, McError> {
    let mut t = Tally::new("ci-dominance");
    t.worst = f64::NEG_INFINITY;
    let xs = [0.5, 1.0, 2.0];
    let mut k = 0u64;
    for &th in &[-1.0, 0.0, 1.0] {
        for &horizon in &[1.0, 5.0, 10.0] {
            let model = OuModel::new(th, horizon)?;
            let grid = GridSpec::default_for(&model);
            let sub = RunConfig {
                seed: run.seed.wrapping_add(k),
                ..run
            };
            k += 1;
            let devs = map_paths(&model, &grid, n, sub, |s| Ok((mle(s, horizon)? - th).abs()))?;
            for &x in &xs {
                let hits = devs.iter().filter(|&&d| d >= x).count() as f64;
                let p = hits / n as f64;
                let se = (p * (1.0 - p) / n as f64).sqrt();
                let q = CiQuery::new(th, horizon, x).expect("valid grid point");
                let numeric = ci_bound(&q).map(|r| r.bound).unwrap_or(f64::NAN);
                let closed = corollary_bound(&q).bound;
                let excess = (p - 3.0 * se) - numeric;
                let chain = numeric <= closed * (1.0 + 1e-12) && closed <= 1.0;
                t.record(excess <= 0.0 && chain, excess, || {
                    format!(
                        "θ={th} T={horizon} x={x}: p̂={p} se={se} ci={numeric} corollary={closed}"
                    )
                });
            }
        }
    }
    Ok(t.finish())
}

/// The closed-form bounds at three reference points, to `1e-3` relative.
/// Statistic: relative error.
pub fn corollary_values() -> CheckReport {
    let mut t = Tally::new("corollary-values");
    for &(th, horizon, x, expected) in &[
        (-1.0, 10.0, 1.0, 0.621),
        (0.0, 10.0, 1.0, 0.194),
        (1.0, 5.0, 1.0, 0.0952),
    ] {
        let q = CiQuery::new(th, horizon, x).expect("valid point");
        let got = corollary_bound(&q).bound;
        let rel = ((got - expected) / expected).abs();
        t.record(rel < 1e-3, rel, || {
            format!("θ={th} T={horizon} x={x}: {got} vs {expected}")
        });
    }
    t.finish()
}

/// Mean `W_T(a)` stays below `1 + 3 se` for `a ∈ {0.1, 0.5}`,
/// `θ ∈ {−1, 0, 1}`, `T = 1`; the Girsanov weight from `θ_s = 1` to
/// `θ_t = 0` averages to one within `4 se`. Statistic: z-score.
pub fn stochastic_properties(n: usize, run: RunConfig) -> Result<CheckReport, McError> {
    let horizon = 1.0;
    let tilts = [0.1, 0.5];
    let mut t = Tally::new("stochastic-properties");
    t.worst = f64::NEG_INFINITY;
    for (k, &th) in [-1.0, 0.0, 1.0].iter().enumerate() {
        let model = OuModel::new(th, horizon)?;
        let grid = GridSpec::default_for(&model);
        let sub = RunConfig {
            seed: run.seed.wrapping_add(k as u64),
            ..run
        };
        let samples = map_paths(&model, &grid, n, sub, |s| {
            let m = (s.x_t * s.x_t - horizon) / 2.0 - th * s.s_t;
            Ok(tilts.map(|a| (a * m - a * a * s.s_t / 2.0).exp()))
        })?;
        for (j, &a) in tilts.iter().enumerate() {
            let column: Vec<f64> = samples.iter().map(|row| row[j]).collect();
            let m = mean_se(&column);
            let z = (m.mean - 1.0) / m.se;
            t.record(z <= 3.0, z, || {
                format!("θ={th} a={a}: mean W = {} ± {}", m.mean, m.se)
            });
        }
    }
    let sub = RunConfig {
        seed: run.seed.wrapping_add(3),
        ..run
    };
    let w = mean_girsanov_weight(0.0, 1.0, horizon, n, sub)?;
    let z = (w.mean - 1.0).abs() / w.se;
    t.record(z <= 4.0, z, || {
        format!("θ_s=1 → θ_t=0: mean weight {} ± {}", w.mean, w.se)
    });
    Ok(t.finish())
}

/// `exp(T L_T(0, b)) ≤` the Laplace upper bound for 50 values of
/// `b ∈ [−5, −0.1]`, `θ ∈ {−1, 0, 1}`, `T ∈ {1, 5, 10}`.
/// Statistic: largest `log(exact) − log(bound)`.
pub fn laplace_dominance() -> CheckReport {
    let mut t = Tally::new("laplace-dominance");
    t.worst = f64::NEG_INFINITY;
    for &th in &[-1.0, 0.0, 1.0] {
        for &horizon in &[1.0, 5.0, 10.0] {
            for b in linspace(-5.0, -0.1, 50) {
                let exact = finite_cgf(&CgfQuery::finite(th, horizon, 0.0, b))
                    .map(|v| v.value.to_f64() * horizon)
                    .unwrap_or(f64::NAN);
                let bound = laplace_upper_bound(th, horizon, b)
                    .map(|l| l.log_bound)
                    .unwrap_or(f64::NAN);
                // compare logs, with a relative allowance for rounding
                let excess = exact - bound;
                t.record(excess <= 1e-12 * (1.0 + bound.abs()), excess, || {
                    format!("θ={th} T={horizon} b={b}: log E = {exact} > log bound {bound}")
                });
            }
        }
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_suites_pass() {
        for r in [
            contraction_identity(),
            cameron_martin(),
            continuity_and_truth(),
            corollary_values(),
            laplace_dominance(),
        ] {
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(-3.0, 1.0, 9);
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], -3.0);
        assert_eq!(v[4], -1.0);
        assert_eq!(v[8], 1.0);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }

    #[test]
    fn report_line_mentions_first_failure() {
        let mut t = Tally::new("demo");
        t.record(true, 0.1, String::new);
        t.record(false, 2.0, || "bad cell".into());
        let r = t.finish();
        assert!(!r.passed);
        assert_eq!(r.worst, 2.0);
        assert!(r.line().starts_with("FAIL demo (2 cases"));
        assert!(r.line().contains("bad cell"));
    }
}
