//! The Ornstein-Uhlenbeck model `dX_t = θ X_t dt + dB_t` started at zero,
//! exact-transition path simulation and the drift MLE.
//!
//! Grid points are sampled from the exact Gaussian transition, so the law of
//! `(X_{t_0}, …, X_{t_n})` carries no discretization error. Only the energy
//! `S_T = ∫ X_t² dt` is approximated, by the trapezoidal rule on the grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

/// Below this value of `|2θΔ|` the transition variance uses its Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Largest magnitude any accumulated path statistic may reach.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("drift must be finite, got {0}")]
    InvalidDrift(f64),
    #[error("grid needs at least one step")]
    EmptyGrid,
    #[error("explosive path overflows at step {step} of {n_steps} (|x| = {magnitude:e})")]
    Overflow {
        step: usize,
        n_steps: usize,
        magnitude: f64,
    },
    #[error("estimator undefined: path energy is zero")]
    ZeroEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Stable,
    Unstable,
    Explosive,
}

impl Regime {
    pub fn of(theta: f64) -> Regime {
        if theta < 0.0 {
            Regime::Stable
        } else if theta == 0.0 {
            Regime::Unstable
        } else {
            Regime::Explosive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuModel {
    theta: f64,
    horizon: f64,
}

impl OuModel {
    pub fn new(theta: f64, horizon: f64) -> Result<Self, ModelError> {
        if !theta.is_finite() {
            return Err(ModelError::InvalidDrift(theta));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(ModelError::InvalidHorizon(horizon));
        }
        Ok(Self { theta, horizon })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// The process always starts at the origin.
    pub fn x0(&self) -> f64 {
        0.0
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.theta)
    }

    /// Exact variance of `X_T`: `(e^{2θT} − 1)/(2θ)`, `T` when `θ = 0`.
    pub fn terminal_variance(&self) -> f64 {
        transition_variance(self.theta, self.horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    n_steps: usize,
}

impl GridSpec {
    pub fn new(n_steps: usize) -> Result<Self, ModelError> {
        if n_steps == 0 {
            return Err(ModelError::EmptyGrid);
        }
        Ok(Self { n_steps })
    }

    /// `max(1000, ⌈100·|θ|·T⌉)` steps, fine enough that the trapezoidal
    /// energy bias sits far below Monte Carlo noise.
    pub fn default_for(model: &OuModel) -> Self {
        let scaled = (100.0 * model.theta.abs() * model.horizon).ceil();
        let n_steps = if scaled > 1000.0 {
            scaled as usize
        } else {
            1000
        };
        Self { n_steps }
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self, model: &OuModel) -> f64 {
        model.horizon / self.n_steps as f64
    }
}

/// Identifies one counter-based random stream: the run seed plus the path index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StreamId {
    pub seed: u64,
    pub path: u64,
}

impl StreamId {
    pub fn new(seed: u64, path: u64) -> Self {
        Self { seed, path }
    }

    /// ChaCha keyed by `seed` with the path index as the stream number, so
    /// every path owns a disjoint stream no matter which worker draws it.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.path);
        rng
    }
}

/// Sufficient statistics of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSummary {
    pub x_t: f64,
    pub s_t: f64,
    pub n_steps: usize,
    pub stream: StreamId,
}

/// `V_T = (X_T/√T, S_T/T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupleStats {
    pub x: f64,
    pub y: f64,
}

/// Conditional variance of `X_{t+Δ}` given `X_t`.
pub fn transition_variance(theta: f64, delta: f64) -> f64 {
    let u = theta * delta;
    if (2.0 * u).abs() < SERIES_THRESHOLD {
        // (e^{2u} − 1)/(2u) = 1 + u + (2/3)u² + O(u³)
        delta * (1.0 + u + 2.0 / 3.0 * u * u)
    } else {
        (2.0 * u).exp_m1() / (2.0 * theta)
    }
}

/// One exact transition from `x` over a step of length `delta`, driven by the
/// standard normal draw `z`.
pub fn exact_step(x: f64, theta: f64, delta: f64, z: f64) -> f64 {
    (theta * delta).exp() * x + transition_variance(theta, delta).sqrt() * z
}

/// Simulates one path on `grid` and returns its sufficient statistics.
///
/// Deterministic in `(model, grid, stream)`.
pub fn simulate_path(
    model: &OuModel,
    grid: &GridSpec,
    stream: StreamId,
) -> Result<PathSummary, ModelError> {
    let n = grid.n_steps;
    let delta = grid.step(model);
    let theta = model.theta;

    // e^{θT} past the float range: fail before drawing anything.
    let ln_limit = OVERFLOW_LIMIT.ln();
    if theta * model.horizon > ln_limit {
        let step = ((ln_limit / (theta * delta)).ceil() as usize).clamp(1, n);
        return Err(ModelError::Overflow {
            step,
            n_steps: n,
            magnitude: f64::INFINITY,
        });
    }

    let decay = (theta * delta).exp();
    let sd = transition_variance(theta, delta).sqrt();
    let mut rng = stream.rng();

    let mut x = model.x0();
    let mut prev_sq = x * x;
    let mut energy = 0.0;
    for step in 1..=n {
        let z: f64 = StandardNormal.sample(&mut rng);
        x = decay * x + sd * z;
        let sq = x * x;
        energy += 0.5 * delta * (prev_sq + sq);
        if !(sq <= OVERFLOW_LIMIT && energy <= OVERFLOW_LIMIT) {
            return Err(ModelError::Overflow {
                step,
                n_steps: n,
                magnitude: x.abs(),
            });
        }
        prev_sq = sq;
    }

    Ok(PathSummary {
        x_t: x,
        s_t: energy,
        n_steps: n,
        stream,
    })
}

/// `θ̂_T = (X_T² − T) / (2 S_T)`.
pub fn mle(summary: &PathSummary, horizon: f64) -> Result<f64, ModelError> {
    mle_from_stats(summary.x_t, summary.s_t, horizon)
}

pub fn mle_from_stats(x_t: f64, s_t: f64, horizon: f64) -> Result<f64, ModelError> {
    if !(horizon > 0.0) {
        return Err(ModelError::InvalidHorizon(horizon));
    }
    if s_t <= 0.0 {
        return Err(ModelError::ZeroEnergy);
    }
    Ok((x_t * x_t - horizon) / (2.0 * s_t))
}

pub fn couple_stats(summary: &PathSummary, horizon: f64) -> CoupleStats {
    CoupleStats {
        x: summary.x_t / horizon.sqrt(),
        y: summary.s_t / horizon,
    }
}
