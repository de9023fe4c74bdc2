//! Estimating coder reliability from multi-rater categorical data.
//!
//! Each coder labels an item with its true category with probability `β`
//! and otherwise guesses from an a-priori distribution `p`. The crate
//! computes the coincidence statistics such data induces, recovers `β`
//! (and where possible `τ` and `p`) from them, refines the closed forms by
//! least squares, and runs Monte-Carlo accuracy studies.

pub mod baselines;
pub mod coincidence;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod model;
mod nelder_mead;
pub mod refine;

pub use baselines::{coefficients, CoefficientReport};
pub use coincidence::{empirical_stats, enumerate_stats_oracle, theoretical_stats, CoincidenceStats, StatsSource};
pub use error::{Error, Result};
pub use estimators::{default_eps, detect_cstar, estimate, indeterminacy_region, EstimateResult, Method};
pub use harness::{quantiles, run_replications, sweep, QuantileReport, SweepAxis, SweepConfig, SweepValue};
pub use model::{sample_ratings, AprioriDist, CategorySet, CoderModel, RatingsMatrix, TrueLabeling};
pub use refine::{refine, RefineOptions};
