//! Win-statistic treatment effects (win ratio, win odds, win difference)
//! for cluster randomized trials with ordinal outcomes.
//!
//! The estimator weights each treated-control cluster pair: `ω = N_i·N_j`
//! recovers the individual-level comparison, `ω = 1` the cluster-level one,
//! and arbitrary size-based expressions are accepted in between. Inference
//! is leave-one-cluster-out jackknife with t intervals. The crate also
//! ships the machinery to study the estimator: an exact-rational estimand
//! oracle for finite superpopulations, a latent proportional-odds data
//! generator with informative cluster size, Gauss-Hermite quadrature truths,
//! and a Monte Carlo harness reporting bias and coverage.
//!
//! Numeric work is generic over [`numeric::WinScalar`]: `f64` with
//! compensated summation for speed, `BigRational` for exact results.
//! Parallelism (rayon) is behind the default `parallel` feature; disabling
//! it yields bit-identical sequential results.

pub mod data_model;
pub mod dgp;
pub mod error;
pub mod estimand_oracle;
pub mod jackknife;
pub mod numeric;
pub mod pair_engine;
pub mod parallel;
pub mod study;
pub mod truth_quadrature;
pub mod win_estimators;

pub use data_model::{
    summarize, Arm, ClusterRecord, Measure, OrdinalScale, RatioValue, TrialDataset, WeightScheme,
    WinSummary, WinTriple,
};
pub use error::{Error, Result};
pub use jackknife::{jackknife, jackknife_all, CiScale, DfRule, JackknifeResult};
pub use win_estimators::{estimate_summary, estimate_triple, EstimateTable};
