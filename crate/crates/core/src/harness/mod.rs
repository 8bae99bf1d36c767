//! Reproducible experiments on top of the simulator and the estimators:
//! configuration, the trajectory-by-trajectory rule comparison, dt-refinement
//! studies, the ensemble check, and CSV output.

use std::path::PathBuf;

use thiserror::Error;

use crate::noise::NoiseSeed;

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{parse_rules, ConfigOverrides, ExperimentConfig};
pub use experiment::{
    run_compare, run_convergence, run_ensemble_check, ConvergenceRow, EnsembleReport,
    EstimateReport, RuleMetrics, TrajectoryPaths, TrajectoryReport,
};
pub use output::{
    emit_compare, emit_convergence, emit_ensemble, emit_fields, emit_simulate, Manifest,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure in trajectory {} (seed {}, stream {}): {source}", seed.stream, seed.master, seed.stream)]
    Numerical {
        seed: NoiseSeed,
        #[source]
        source: crate::Error,
    },
    #[error("{0}")]
    Model(#[from] crate::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 1 configuration, 2 numerical failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Numerical { .. } => 2,
            HarnessError::Model(e) => match e {
                crate::Error::StepOverflow { .. } => 2,
                _ => 1,
            },
            HarnessError::Io { .. } => 3,
        }
    }

    /// Attaches the trajectory identity to a simulation failure.
    pub fn for_seed(seed: NoiseSeed, source: crate::Error) -> Self {
        match source {
            crate::Error::StepOverflow { .. } => HarnessError::Numerical { seed, source },
            other => HarnessError::Model(other),
        }
    }
}
