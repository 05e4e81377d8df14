//! Estimation of time-since-last-sex (TSLS) and time-between-sex (TBS)
//! distributions from heaped, multi-unit cross-sectional survey reports.
//!
//! The TSLS distribution is a monotone non-increasing probability vector over
//! days `0..=729`, parameterized by reflected integrated B-splines with
//! positive coefficients. Reports in days, weeks, months or years are linked
//! to it through interval-censoring rules that also absorb digit preference
//! (heaping). The posterior is sampled with HMC, and each draw is mapped to a
//! TBS distribution through the current-duration identity
//! `f_Y(y) = S_X(y) / E[X]`.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below name the double-precision instantiations used by the CLI.
//!
//! ```
//! use tsls_core::{BasisConfig, ModelParams, SplineBasisF64};
//!
//! let basis = SplineBasisF64::build(&BasisConfig::default()).unwrap();
//! let params = ModelParams::zeros(basis.num_functions());
//! let phi = tsls_core::phi_from_params(&params, &basis).unwrap();
//! assert!((phi.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod estimates;
pub mod io;
pub mod model;
pub mod reporting;
pub mod sampler;
pub mod scalar;
pub mod simulator;

pub use basis::{build_basis, evaluate_gamma, BasisConfig, SplineBasis};
pub use diagnostics::{ess_bulk, ess_tail, split_rank_rhat, Diagnostic, DiagnosticsReport};
pub use error::{Error, Result};
pub use estimates::{
    expected_tbs, summarize, survival_from_tsls, tbs_from_tsls, tsls_from_tbs, EstimateSummary,
    TbsDistribution,
};
pub use model::{
    alpha_from_delta, grad_log_posterior, log_posterior, log_prior, phi_from_params, ModelParams,
    NonCentered, Posterior, TslsDistribution,
};
pub use reporting::{
    day_interval, reported_prob, spread_mass, DayInterval, HeapSet, ReportedDataset,
    ReportedDuration, Unit,
};
pub use sampler::{sample, LogDensity, Parameterization, PosteriorDraws, SamplerConfig};
pub use scalar::Scalar;
pub use simulator::{
    apply_reporting, sample_tsls_exact, simulate_survey, ReportingBehavior, TrueTbs,
};

/// Number of representable TSLS days: `0..=729`, i.e. two years.
pub const SUPPORT_DAYS: usize = 730;

/// Last observable day of the support.
pub const LAST_DAY: usize = SUPPORT_DAYS - 1;

pub type SplineBasisF64 = SplineBasis<f64>;
pub type ModelParamsF64 = ModelParams<f64>;
pub type TslsDistributionF64 = TslsDistribution<f64>;
pub type TbsDistributionF64 = TbsDistribution<f64>;
pub type PosteriorDrawsF64 = PosteriorDraws<f64>;
pub type TrueTbsF64 = TrueTbs<f64>;

pub type SplineBasisF32 = SplineBasis<f32>;
pub type ModelParamsF32 = ModelParams<f32>;
pub type TslsDistributionF32 = TslsDistribution<f32>;
