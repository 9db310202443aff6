//! Monte-Carlo experiments: the MSE-ratio study, the bootstrap and
//! empirical checks of the asymptotic theory.
//!
//! Replicate j of an experiment with master seed m always draws from
//! `SeedPath::new(m, j)` (or a labelled derivative of m), and results are
//! collected in replicate order before pairwise summation, so reports are
//! bit-identical for any number of worker threads.

pub mod bootstrap;
pub mod mse;
pub mod theory;

pub use bootstrap::{
    bootstrap_distribution, bootstrap_replicates, percentile_nearest_rank, table2, BootstrapConfig,
    ResampleScheme, Table2, DEFAULT_BOOTSTRAP_REPLICATES, DEFAULT_CI_LEVEL,
};
pub use mse::{
    experiment_truth, mse_ratio_experiment, mse_ratio_with, run_table1, MseExperimentConfig, MseRatioReport,
    Table1, Table1Spec, DEFAULT_REPLICATES,
};
pub use theory::{
    clt_check, consistency_sweep, prescan_lambda, theory_check_theorem1, theory_check_theorem2, BoundsSummary,
    CltReport, DecayReport,
};
