//! Monte Carlo estimation: tail probabilities of the MLE (plain and
//! drift-tilted), empirical large-deviation slopes, and the stochastic
//! identities behind the bounds.
//!
//! Every path draws from its own counter-based stream keyed by
//! `(seed, path index)`, per-path results are collected in index order and
//! reduced by pairwise summation. Estimates are therefore bit-identical for
//! any worker count.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::extended::ExtendedReal;
use crate::model::{mle, simulate_path, GridSpec, ModelError, OuModel, PathSummary, StreamId};
use crate::rates::mle_rate;

/// Log-weights beyond this are reported as overflowed.
const MAX_LOG_WEIGHT: f64 = 700.0;

/// Minimum expected hit count `p̂·n` before a horizon enters a slope fit.
pub const MIN_HITS: f64 = 50.0;

/// Explosive slope ladders must satisfy `θT ≤` this.
pub const EXPLOSIVE_HORIZON_CAP: f64 = 12.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("need at least {min} paths, got {got}")]
    TooFewPaths { min: usize, got: usize },
    #[error("a tilted estimate of this event needs an explicit sampling drift")]
    MissingTilt,
    #[error("Girsanov weight overflowed on path {path} (log-weight {log_weight})")]
    WeightOverflow { path: u64, log_weight: f64 },
    #[error("explosive ladder horizon T = {horizon} exceeds {cap}/θ")]
    HorizonTooLong { horizon: f64, cap: f64 },
    #[error("empty horizon ladder")]
    EmptyLadder,
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `θ̂_T ≥ c`
    MleGe,
    /// `θ̂_T ≤ c`
    MleLe,
    /// `|θ̂_T − θ| ≥ x`
    AbsDevGe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventSpec {
    pub kind: EventKind,
    pub threshold: f64,
}

impl EventSpec {
    pub fn mle_ge(c: f64) -> Self {
        Self {
            kind: EventKind::MleGe,
            threshold: c,
        }
    }

    pub fn mle_le(c: f64) -> Self {
        Self {
            kind: EventKind::MleLe,
            threshold: c,
        }
    }

    pub fn abs_dev_ge(x: f64) -> Self {
        Self {
            kind: EventKind::AbsDevGe,
            threshold: x,
        }
    }

    pub fn contains(&self, estimate: f64, theta: f64) -> bool {
        match self.kind {
            EventKind::MleGe => estimate >= self.threshold,
            EventKind::MleLe => estimate <= self.threshold,
            EventKind::AbsDevGe => (estimate - theta).abs() >= self.threshold,
        }
    }

    /// `−inf I_θ` over the event, from the closed-form MLE rate.
    pub fn limiting_log_rate(&self, theta: f64) -> ExtendedReal {
        let rate = |z: f64| mle_rate(theta, z).value;
        match self.kind {
            EventKind::MleGe | EventKind::MleLe => rate(self.threshold),
            EventKind::AbsDevGe => rate(theta - self.threshold).min(rate(theta + self.threshold)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Plain,
    /// Simulate under `theta_sim` and reweight; `None` picks the event threshold.
    Tilted {
        theta_sim: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorKind {
    Plain,
    Tilted { theta_sim: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub se: f64,
    pub n: usize,
    pub estimator: EstimatorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

/// Seed and parallelism for a Monte Carlo run. `workers = None` uses the
/// global rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Sum with O(log n) error growth; the split points depend only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    let mean = pairwise_sum(xs) / n as f64;
    let se = if n > 1 {
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    MeanEstimate { mean, se, n }
}

/// Simulates `n` paths and maps each summary through `f`, in path order.
pub fn map_paths<T, F>(
    model: &OuModel,
    grid: &GridSpec,
    n: usize,
    run: RunConfig,
    f: F,
) -> Result<Vec<T>, McError>
where
    T: Send,
    F: Fn(&PathSummary) -> Result<T, McError> + Sync,
{
    let job = || {
        (0..n as u64)
            .into_par_iter()
            .map(|path| {
                let s = simulate_path(model, grid, StreamId::new(run.seed, path))?;
                f(&s)
            })
            .collect::<Vec<Result<T, McError>>>()
    };
    let results = match run.workers {
        None => job(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| McError::Pool(e.to_string()))?
            .install(job),
    };
    // first failure by path index, independent of scheduling
    results.into_iter().collect()
}

pub fn simulate_batch(
    model: &OuModel,
    grid: &GridSpec,
    n: usize,
    run: RunConfig,
) -> Result<Vec<PathSummary>, McError> {
    map_paths(model, grid, n, run, |s| Ok(*s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GirsanovWeight {
    pub log_weight: f64,
    /// `None` when `exp(log_weight)` would overflow.
    pub weight: Option<f64>,
}

/// Likelihood ratio `dP_target/dP_sim` of one path:
/// `exp((θ_t − θ_s)(X_T² − T)/2 − (θ_t² − θ_s²) S_T / 2)`.
pub fn girsanov_weight(
    summary: &PathSummary,
    horizon: f64,
    theta_target: f64,
    theta_sim: f64,
) -> GirsanovWeight {
    let log_weight = (theta_target - theta_sim) * (summary.x_t * summary.x_t - horizon) / 2.0
        - (theta_target * theta_target - theta_sim * theta_sim) * summary.s_t / 2.0;
    let weight = (log_weight <= MAX_LOG_WEIGHT).then(|| log_weight.exp());
    GirsanovWeight { log_weight, weight }
}

/// Estimates `P(event)` under `model`.
///
/// Plain: indicator mean with binomial standard error. Tilted: paths are
/// drawn under the sampling drift and indicators reweighted by
/// [`girsanov_weight`], with the empirical standard error of the weighted
/// samples.
pub fn estimate_tail(
    model: &OuModel,
    grid: &GridSpec,
    event: &EventSpec,
    n: usize,
    run: RunConfig,
    estimator: Estimator,
) -> Result<TailEstimate, McError> {
    if n < 100 {
        return Err(McError::TooFewPaths { min: 100, got: n });
    }
    let theta = model.theta();
    let horizon = model.horizon();
    match estimator {
        Estimator::Plain => {
            let hits = map_paths(model, grid, n, run, |s| {
                Ok(if event.contains(mle(s, horizon)?, theta) {
                    1.0
                } else {
                    0.0
                })
            })?;
            let p_hat = pairwise_sum(&hits) / n as f64;
            Ok(TailEstimate {
                p_hat,
                se: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
                n,
                estimator: EstimatorKind::Plain,
            })
        }
        Estimator::Tilted { theta_sim } => {
            let theta_sim = match (theta_sim, event.kind) {
                (Some(t), _) => t,
                (None, EventKind::AbsDevGe) => return Err(McError::MissingTilt),
                (None, _) if event.threshold.is_finite() => event.threshold,
                (None, _) => return Err(McError::MissingTilt),
            };
            let sampler = OuModel::new(theta_sim, horizon)?;
            let samples = map_paths(&sampler, grid, n, run, |s| {
                if !event.contains(mle(s, horizon)?, theta) {
                    return Ok(0.0);
                }
                let w = girsanov_weight(s, horizon, theta, theta_sim);
                w.weight.ok_or(McError::WeightOverflow {
                    path: s.stream.path,
                    log_weight: w.log_weight,
                })
            })?;
            let m = mean_se(&samples);
            Ok(TailEstimate {
                p_hat: m.mean,
                se: m.se,
                n,
                estimator: EstimatorKind::Tilted { theta_sim },
            })
        }
    }
}

/// Mean of `W_T(a) = exp(a M_T − a² S_T / 2)` with
/// `M_T = (X_T² − T)/2 − θ S_T`.
pub fn supermartingale_check(
    theta: f64,
    horizon: f64,
    a: f64,
    n: usize,
    run: RunConfig,
) -> Result<MeanEstimate, McError> {
    if n < 1000 {
        return Err(McError::TooFewPaths { min: 1000, got: n });
    }
    let model = OuModel::new(theta, horizon)?;
    let grid = GridSpec::default_for(&model);
    let samples = map_paths(&model, &grid, n, run, |s| {
        let m = (s.x_t * s.x_t - horizon) / 2.0 - theta * s.s_t;
        Ok((a * m - a * a * s.s_t / 2.0).exp())
    })?;
    Ok(mean_se(&samples))
}

/// Mean Girsanov weight of paths drawn under `theta_sim`, reweighted to
/// `theta_target`. Unbiasedness of the change of measure makes this one.
pub fn mean_girsanov_weight(
    theta_target: f64,
    theta_sim: f64,
    horizon: f64,
    n: usize,
    run: RunConfig,
) -> Result<MeanEstimate, McError> {
    let model = OuModel::new(theta_sim, horizon)?;
    let grid = GridSpec::default_for(&model);
    let samples = map_paths(&model, &grid, n, run, |s| {
        let w = girsanov_weight(s, horizon, theta_target, theta_sim);
        w.weight.ok_or(McError::WeightOverflow {
            path: s.stream.path,
            log_weight: w.log_weight,
        })
    })?;
    Ok(mean_se(&samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgfEstimate {
    /// `(1/T) log` of the sample mean.
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub se: f64,
    pub mean: MeanEstimate,
}

/// Monte Carlo estimate of `(1/T) log E[exp(a√T X_T + b S_T)]`.
pub fn estimate_cgf(
    theta: f64,
    horizon: f64,
    a: f64,
    b: f64,
    n: usize,
    run: RunConfig,
) -> Result<CgfEstimate, McError> {
    if n < 100 {
        return Err(McError::TooFewPaths { min: 100, got: n });
    }
    let model = OuModel::new(theta, horizon)?;
    let grid = GridSpec::default_for(&model);
    let scale = a * horizon.sqrt();
    let samples = map_paths(&model, &grid, n, run, |s| {
        Ok((scale * s.x_t + b * s.s_t).exp())
    })?;
    let mean = mean_se(&samples);
    Ok(CgfEstimate {
        value: mean.mean.ln() / horizon,
        se: mean.se / (mean.mean * horizon),
        mean,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopePoint {
    pub horizon: f64,
    pub p_hat: f64,
    pub se: f64,
    /// `log(p̂)/T`, absent when nothing was hit.
    pub log_p_over_t: Option<f64>,
    /// Enough hits to enter the fit.
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub theta: f64,
    pub event: EventSpec,
    pub points: Vec<SlopePoint>,
    /// Least-squares slope of `log p̂` against `T`.
    pub extrapolated_slope: Option<f64>,
    pub intercept: Option<f64>,
    /// `−I_θ(c)` from the closed-form rate.
    pub target: f64,
    pub warnings: Vec<String>,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = pairwise_sum(xs) / n as f64;
    let my = pairwise_sum(ys) / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Estimates the event probability over a ladder of horizons and fits the
/// exponential decay rate. Horizons with `p̂·n <` [`MIN_HITS`] are kept in the
/// report but left out of the fit, with a warning.
pub fn ldp_slope(
    theta: f64,
    ladder: &[f64],
    event: &EventSpec,
    n: usize,
    run: RunConfig,
    estimator: Estimator,
) -> Result<SlopeReport, McError> {
    if ladder.is_empty() {
        return Err(McError::EmptyLadder);
    }
    if theta > 0.0 {
        if let Some(&t) = ladder.iter().find(|&&t| theta * t > EXPLOSIVE_HORIZON_CAP) {
            return Err(McError::HorizonTooLong {
                horizon: t,
                cap: EXPLOSIVE_HORIZON_CAP,
            });
        }
    }

    let mut points = Vec::with_capacity(ladder.len());
    let mut warnings = Vec::new();
    for (k, &horizon) in ladder.iter().enumerate() {
        let model = OuModel::new(theta, horizon)?;
        let grid = GridSpec::default_for(&model);
        let sub = RunConfig {
            seed: run
                .seed
                .wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..run
        };
        let est = estimate_tail(&model, &grid, event, n, sub, estimator)?;
        let used = est.p_hat * n as f64 >= MIN_HITS;
        if !used {
            warnings.push(format!(
                "T = {horizon}: p_hat*n = {:.1} below {MIN_HITS}, excluded from fit",
                est.p_hat * n as f64
            ));
        }
        points.push(SlopePoint {
            horizon,
            p_hat: est.p_hat,
            se: est.se,
            log_p_over_t: (est.p_hat > 0.0).then(|| est.p_hat.ln() / horizon),
            used,
        });
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.used)
        .map(|p| (p.horizon, p.p_hat.ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys);
    if fit.is_none() {
        warnings.push("fewer than two usable horizons; no slope reported".to_string());
    }
    Ok(SlopeReport {
        theta,
        event: *event,
        points,
        extrapolated_slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        target: -event.limiting_log_rate(theta).to_f64(),
        warnings,
    })
}
