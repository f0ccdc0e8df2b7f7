//! Finite-size experiments: random datasets, greedy binary iterative hard
//! thresholding, and exact separability checks.

pub mod dataset;
pub mod greedy;
pub mod oracle;
pub mod threshold;

pub use dataset::{generate_dataset, generate_dataset_with, trial_rng, Dataset, Ensemble};
pub use greedy::{biht_run, greedy_biht, run_trial, BIHTConfig, BihtRun, InitScale, StageBudget, TrialResult};
pub use oracle::{exhaustive_capacity, exhaustive_capacity_curve, separability_oracle, OracleRow};
pub use threshold::{hard_threshold, hard_threshold_with_support};
