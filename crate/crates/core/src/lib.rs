//! Large deviations and concentration inequalities for the maximum
//! likelihood estimator of the Ornstein-Uhlenbeck drift,
//!
//! ```text
//! dX_t = θ X_t dt + dB_t,   X_0 = 0,   θ̂_T = (X_T² − T) / (2 ∫₀ᵀ X_t² dt),
//! ```
//!
//! in the stable (`θ < 0`), unstable (`θ = 0`) and explosive (`θ > 0`)
//! regimes.
//!
//! | module | contents |
//! |---|---|
//! | [`model`] | model types, exact-transition simulation, the MLE |
//! | [`cgf`] | finite-horizon and limiting cumulant generating functions |
//! | [`rates`] | closed-form rates, numerical Legendre transform, contraction |
//! | [`concentration`] | non-asymptotic tail bounds |
//! | [`mc`] | Monte Carlo tail estimates, slopes, change of measure |
//! | [`checks`] | property suites over fixed grids |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cgf;
pub mod checks;
pub mod concentration;
pub mod extended;
pub mod mc;
pub mod model;
pub mod optimize;
pub mod rates;

pub use cgf::{CgfError, CgfQuery, CgfValue, DomainStatus, Horizon};
pub use checks::CheckReport;
pub use concentration::{CiBoundReport, CiMethod, CiQuery, ConcentrationError, LaplaceBound};
pub use extended::ExtendedReal;
pub use mc::{
    CgfEstimate, Estimator, EstimatorKind, EventKind, EventSpec, McError, MeanEstimate, RunConfig,
    SlopeReport, TailEstimate,
};
pub use model::{CoupleStats, GridSpec, ModelError, OuModel, PathSummary, Regime, StreamId};
pub use rates::{Branch, LegendreOptions, RateError, RateValue};
