use thiserror::Error;

use crate::network::FactId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot place {requested} distinct rules: only {capacity} (input pair, output) slots exist for {num_facts} facts")]
    InfeasibleNetwork {
        requested: usize,
        capacity: usize,
        num_facts: usize,
    },

    #[error("invalid network parameters: {0}")]
    InvalidParameters(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid network: {0}")]
    Validation(String),

    #[error("fact {fact} is not part of a {num_facts}-fact network")]
    UnknownFact { fact: FactId, num_facts: usize },

    #[error("fact value map holds {actual} values but the network has {expected} facts")]
    IncompleteValues { expected: usize, actual: usize },

    #[error("no contributions: the forward run did not complete")]
    NoContribution,

    #[error("fact count mismatch: trainee has {trainee} facts, truth has {truth}")]
    DimensionMismatch { trainee: usize, truth: usize },

    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
