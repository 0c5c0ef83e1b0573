use thiserror::Error;

use crate::group::GroupError;

/// Errors shared by every algorithm in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("letter '{0}' is not in the alphabet")]
    UnknownLetter(char),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("state {0:?} is declared twice")]
    DuplicateState(String),
    #[error("automata are over different alphabets")]
    AlphabetMismatch,
    #[error("automata are over different groups")]
    ContextMismatch,
    #[error("{what} exceeds the configured bound of {limit}")]
    SizeBoundExceeded { what: &'static str, limit: usize },
    #[error("automaton has no initial pair")]
    EmptyAutomaton,
    #[error("no transition on '{0}' from any state of the subset")]
    DeadEnd(char),
    #[error("exploration visited more than {limit} states")]
    StateCapExceeded { limit: usize },
    #[error("the automaton is not sequentializable: {0}")]
    NotTwinned(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("the BTP decision is not supported for group {0}")]
    UnsupportedGroup(String),
    #[error("transducer has a weight outside B*: {0}")]
    NotPositive(String),
    #[error("run of length {len} is shorter than the loop bound {bound}")]
    TooShort { len: usize, bound: usize },
    #[error("no delay in the subset exceeds the threshold {threshold}")]
    NoLargeDelay { threshold: u64 },
    #[error("the automaton violates the branching twinning property of order {k}")]
    BtpViolated { k: usize },
    #[error("budget exhausted: {0}")]
    BudgetExceeded(String),
    #[error("input machine {0} is not sequential")]
    NotSequentialInput(usize),
    #[error("cost register automaton has dependent registers")]
    NotIndependent,
    #[error("cost register automaton does not compute a relation into B*: {0}")]
    NotWordRelation(String),
    #[error("invalid counterexample: {0}")]
    InvalidCounterexample(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
