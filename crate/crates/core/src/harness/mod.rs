//! Experiment driver: random instances, ratio estimation and the identity suite.

pub mod experiment;
pub mod generate;
pub mod identities;
pub mod tolerances;

pub use experiment::{
    lprf_ratio, lprf_ratios, run_experiment, ExperimentConfig, PRecord, PartitionKind, RatioReport,
    RatioThreshold, TrialRow, DEFAULT_THRESHOLDS,
};
pub use generate::{
    check_partition, gen_guillotine_partition, sample_spectral_function,
    sample_spectral_function_seeded, CoefficientDist, GuillotineParams,
};
pub use identities::{verify_identities, CheckResult, Fault, IdentityConfig, SuiteReport};
