//! Outlier detection in the extreme tails of a sample, adapted to the
//! tail heaviness of the data.
//!
//! The crate is organised bottom-up:
//!
//! - [`sample`]: validated, sorted samples, dithering, quartiles, the
//!   classical boxplot rule and the lower-tail transforms.
//! - [`estimators`]: log-spacings, Hill, trimmed Hill, generalized Hill and
//!   the QQ / diagnostic plot coordinates.
//! - [`outlier_test`]: the `T -> E -> U` statistic chain and the level
//!   schedule of the sequential test.
//! - [`dast`]: domain adapted sequential testing and the tail-adjusted
//!   boxplot.
//! - [`simgen`]: samplers, outlier injection and the Monte Carlo harness.
//!
//! Order statistics follow the usual 1-based notation
//! `X_{1,n} <= ... <= X_{n,n}`; the j-th largest observation
//! `X_{n-j+1,n}` lives at `values()[n - j]`.

pub mod dast;
pub mod error;
pub mod estimators;
mod keywords;
pub mod sample;
pub mod simgen;
mod sum;

pub use dast::{
    default_k0_star, detect, initial_estimates, lower_tail, tail_adjusted_boxplot, upper_tail,
    DastConfig, DastResult, InitialEstimates, Regime, Tail, TailAdjustedBoxplot, TailOutliers,
    K0_STAR_EXPONENT, K0_STAR_FACTOR,
};
pub use error::{Error, Result};
pub use estimators::{
    diagnostic_k0_series, generalized_hill, hill, hill_path, log_spacings, qq_points,
    trimmed_generalized_hill, trimmed_hill, trimmed_hill_inner, DiagnosticSeries, EstimatorKind,
    HillPath, LogSpacings, QqKind,
};
pub use outlier_test::{
    alpha_schedule, e_statistic, t_statistic, test_statistic, u_statistic, AlphaSchedule,
    EvidenceSide, TestStatistic,
};
pub use sample::{
    classical_flags, fence_exceedance_probability, ingest, quantile, quartiles, transform_lower,
    LowerTransform, OrderedSample, Provenance, QuartileSummary,
};
pub use simgen::{
    estimate_k_opt, inject, run_study, sample as draw_sample, Distribution, Injection,
    InjectionSpec, KCell, KOptEstimate, StudyMetrics,
};
