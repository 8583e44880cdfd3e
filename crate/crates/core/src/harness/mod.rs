//! Monte Carlo experiments comparing simulated coalescence times with the
//! limit law, plus drift and coupling diagnostics. Everything here runs in
//! `f64`.

mod config;
mod diagnostics;
mod experiment;
pub mod stats;

use thiserror::Error;

use crate::coalescent::CoalescentError;
use crate::limits::LimitsError;
use crate::rates::RatesError;
use crate::simulator::SimulationError;

pub use config::{ExperimentConfig, SuperlinearConfig};
pub use diagnostics::{coupling_diagnostic, drift_diagnostic, CouplingDiagnostic, CouplingRow, DriftRow, DriftTable};
pub use experiment::{
    convergence_study, read_tau_csv, run_experiment, tau_rows_to_csv, write_experiment, write_tau_csv, ConvergenceRow,
    ConvergenceStudy, ExperimentResult, KappaResult, PartitionComparison, ReplicateRecord, ReplicateStatus,
    MAX_PARTITION_M,
};
pub use stats::{chi_square_test, ks_distance, ks_two_sample};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Rates(#[from] RatesError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Coalescent(#[from] CoalescentError),
    #[error(transparent)]
    Limits(#[from] LimitsError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
