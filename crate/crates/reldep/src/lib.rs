//! Testing relevant independence hypotheses in high-dimensional samples.
//!
//! Given `n` i.i.d. observations of a `p`-dimensional vector, this crate
//! tests whether any pair of components carries a *relevant* amount of
//! dependence: the null hypothesis is `max_{i<j} |d_ij| <= delta`, where
//! `d_ij` is a pairwise dependence measure and `delta` a practitioner-chosen
//! margin. Six measures are supported, each estimable by a U-statistic of
//! order 2 to 6: covariance, Kendall's tau, the dominating degree-3 part of
//! Spearman's rho, Bergsma and Dassios' tau-star, Hoeffding's D, and the
//! Blum-Kiefer-Rosenblatt R.
//!
//! The building blocks are exposed layer by layer:
//!
//! - [`kernels`]: the six symmetric kernels evaluated on explicit points.
//! - [`ustat`]: samples, pair enumeration, fast per-pair U-statistics,
//!   V-statistics, and the jackknife variance estimator.
//! - [`testing`]: the max-type test statistics, the asymptotic Gumbel
//!   calibration, and the bootstrap calibrations (normalized, non-normalized
//!   squared, and absolute variants; relevant, interchanged, and classical
//!   directions).
//! - [`datagen`]: deterministic seeded streams, the simulation-study
//!   correlation models, and multivariate normal and t samplers.
//! - [`harness`]: Monte Carlo cells, power curves, table runs, and CSV I/O.
//!
//! Numeric code is generic over the scalar through [`num::Real`]; the
//! `*64`/`*32` aliases at the crate root pin the common concrete choices.
//!
//! # Example
//!
//! Test 40 draws of 5 weakly coupled components for relevant dependence
//! beyond `delta = 0.2` at level 10%:
//!
//! ```
//! use reldep::{
//!     run_full_test, sample, stream_rng, CorrelationModel, Distribution, KernelId, ModelTag,
//!     TestConfig64, STREAM_DATA,
//! };
//!
//! let model = CorrelationModel::new(ModelTag::M1, 5, 0.3);
//! let mut rng = stream_rng(7, &[STREAM_DATA, 0]);
//! let data = sample(Distribution::Normal, &model.matrix()?, 5, 40, &mut rng)?;
//!
//! let cfg = TestConfig64 {
//!     delta: 0.2,
//!     boot: 50,
//!     ..TestConfig64::default()
//! };
//! let report = run_full_test(&data, KernelId::KendallTau, &cfg)?;
//! println!(
//!     "T = {:.3}, critical = {:.3}, reject = {}",
//!     report.statistic, report.critical_value, report.reject
//! );
//! # Ok::<(), reldep::Error>(())
//! ```

pub mod datagen;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod num;
pub mod rank;
pub mod testing;
pub mod ustat;

pub use datagen::{
    cholesky, mix_seed, model_matrix, rho_from_tau, sample, stream_rng, tau_from_rho,
    CorrelationModel, Distribution, Draw, ModelTag, MvSampler, STREAM_BOOT, STREAM_DATA,
    STREAM_REP,
};
pub use error::{Error, Result};
pub use harness::{
    format_results_csv, format_sample_csv, load_csv, parse_sample_csv, parse_tau_grid, run_cell,
    run_power_curve, run_table, table_cells, SimConfig, SimResult, TableSpec, RESULTS_HEADER,
};
pub use kernels::{eval_kernel, kernel_order, KernelId};
pub use num::Real;
pub use testing::{
    asymptotic_test, bootstrap_test, gumbel_quantile, norming_constants, resample, run_full_test,
    stat_abs, stat_nonnormalized_sq, stat_normalized_sq, truncate_v, Direction, Method,
    TestConfig, TestReport, Variant, SIGMA_FLOOR,
};
pub use ustat::{
    jackknife_sigma2, pair_ustat, ustat_matrix, ustat_naive, ustat_vector, vech_index,
    vech_unindex, vstat, PairGrid, Sample, UStatResult, DEFAULT_ENUM_CAP,
};

/// Double-precision sample.
pub type Sample64 = Sample<f64>;
/// Single-precision sample.
pub type Sample32 = Sample<f32>;
/// Double-precision test configuration.
pub type TestConfig64 = TestConfig<f64>;
/// Single-precision test configuration.
pub type TestConfig32 = TestConfig<f32>;
/// Double-precision test report.
pub type TestReport64 = TestReport<f64>;
/// Double-precision per-pair U-statistic summary.
pub type UStatResult64 = UStatResult<f64>;
/// Double-precision correlation model.
pub type CorrelationModel64 = CorrelationModel<f64>;
/// Double-precision sampling distribution.
pub type Distribution64 = Distribution<f64>;
/// Double-precision simulation cell.
pub type SimConfig64 = SimConfig<f64>;
/// Double-precision simulation outcome.
pub type SimResult64 = SimResult<f64>;
/// Double-precision table spec.
pub type TableSpec64 = TableSpec<f64>;
