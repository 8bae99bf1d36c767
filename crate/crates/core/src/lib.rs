//! Continuous homodyne measurement of a dispersively coupled qubit.
//!
//! The crate simulates conditional qubit trajectories and their homodyne
//! current records, and reconstructs the qubit state from a record in one
//! step with an exact quantum Bayesian rule. Two approximate rules are
//! included as baselines.
//!
//! * [`cavity`]: conditional cavity fields and the measurement rates.
//! * [`trajectory`]: Itô and Stratonovich integrators, ensemble references.
//! * [`estimators`]: the exact, Gaussian and bad-cavity Bayesian rules.
//! * [`harness`]: configuration, experiments and CSV output for the CLI.

pub mod cavity;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod noise;
pub mod state;
pub mod trajectory;

pub use cavity::{CavityQubitParams, FieldPair, RateGrid, RateSample};
pub use error::{Error, Result};
pub use estimators::{BayesFactors, PointContactParams, Rule};
pub use noise::NoiseSeed;
pub use state::QubitState;
pub use trajectory::{CurrentRecord, Trajectory};
