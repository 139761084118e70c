//! Goodness-of-fit testing for sparse multinomial data.
//!
//! When the number of cells `k` grows with (or beyond) the sample size `n`,
//! the classical chi-squared approximation for Pearson's statistic breaks
//! down and the statistic itself can lose all power against natural
//! alternatives. This crate works in that sparse regime:
//!
//! - [`stats`] decomposes `X^2` into a quadratic part `S_n1` and a linear
//!   part `S_n2`, with variances, alternative-hypothesis mean shifts, moment
//!   gaps, and normal-approximation diagnostics;
//! - [`limit`] evaluates the limiting CDF `Psi(x, s)` of `Z1 + s|Z2|` and its
//!   upper-tail critical values;
//! - [`decision`] turns statistics into rejection decisions and one-sided
//!   p-values, with Bonferroni combination across datasets;
//! - [`families`] builds the parametric test-bed models and samples
//!   multinomial counts reproducibly;
//! - [`sim`] estimates size and power by deterministic parallel Monte Carlo.
//!
//! Everything is generic over the scalar type through [`Real`] (`f32` or
//! `f64`); the `*64` aliases below fix `f64`, the precision the stated
//! tolerances are calibrated for.

pub mod decision;
pub mod error;
pub mod families;
pub mod limit;
pub mod model;
pub mod real;
pub mod sim;
pub mod stats;

pub use decision::{bonferroni, run_test, TestKind, TestReport, TestSpec};
pub use error::{GofError, Result};
pub use families::{sample_counts, topk0_weights, AliasTable, FamilySpec, SamplerSeed};
pub use limit::{
    psi_cdf, psi_critical, psi_pdf, psi_sf, std_normal_cdf, std_normal_pdf, std_normal_quantile,
    std_normal_sf, CriticalQuery, QuadratureSpec,
};
pub use model::{CellModel, CountVector, WeightVector};
pub use real::Real;
pub use sim::{ecdf_vs_theory, estimate_size_power, EcdfReport, SizePowerReport, StudyConfig};
pub use stats::{
    alternative_shift, beta_moment, condition_diagnostics, decompose, pearson_statistic,
    stat_report, variances, weighted_s2, AlternativeShift, ConditionDiagnostics, StatReport,
    Variances,
};

/// `f64` instantiations of the generic types.
pub type CellModel64 = model::CellModel<f64>;
pub type WeightVector64 = model::WeightVector<f64>;
pub type StatReport64 = stats::StatReport<f64>;
pub type AlternativeShift64 = stats::AlternativeShift<f64>;
pub type ConditionDiagnostics64 = stats::ConditionDiagnostics<f64>;
pub type Variances64 = stats::Variances<f64>;
pub type QuadratureSpec64 = limit::QuadratureSpec<f64>;
pub type CriticalQuery64 = limit::CriticalQuery<f64>;
pub type TestSpec64 = decision::TestSpec<f64>;
pub type TestReport64 = decision::TestReport<f64>;
pub type FamilySpec64 = families::FamilySpec<f64>;
pub type StudyConfig64 = sim::StudyConfig<f64>;
pub type SizePowerReport64 = sim::SizePowerReport<f64>;
pub type EcdfReport64 = sim::EcdfReport<f64>;
