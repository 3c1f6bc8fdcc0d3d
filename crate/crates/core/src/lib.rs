//! Rule-fact expert system whose rule weightings are learned from a truth
//! network by distributing output error back over contributing rules.
//!
//! The crate is split along the lines of the system it models:
//!
//! - [`network`]: facts, weighted two-input rules, random generation and the
//!   derived network conditions (base, fully connected, random, augmented,
//!   error-injected), plus a line-oriented text file format.
//! - [`inference`]: the forward-chaining engine.
//! - [`training`]: contribution analysis and velocity-scaled weight updates
//!   under the four training modes.
//! - [`experiments`]: the Monte-Carlo trial harness, summary statistics,
//!   preset table suites and CSV output.

pub mod error;
pub mod experiments;
pub mod inference;
pub mod network;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
pub use inference::{run_forward, FactValueMap, FiringPlan, QuerySpec, RunOutcome, RunStatus};
pub use network::{FactId, NetworkCondition, Rule, RuleFactNetwork, RuleId, WeightReset};
pub use training::{train, TrainingConfig, TrainingMode, UpdateRule};
