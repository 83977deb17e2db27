use thiserror::Error;

use crate::model::EdgeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A syntax or schema error in a system file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("system failed validation: {0}")]
    Validation(String),

    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),

    #[error("point {point} lies outside the domain {domain}")]
    OutOfDomain { point: String, domain: String },

    #[error("no probability piece of edge {edge} covers {point}")]
    Uncovered { edge: EdgeId, point: String },

    #[error("enumerating {required} cylinders exceeds the budget of {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    #[error("probabilities at {0} do not sum to one; the process has nowhere to go")]
    ZeroMassState(String),

    #[error("probability functions are not all piecewise constant")]
    NotPiecewiseConstant,

    #[error("no finite Markov partition found within {cap} breakpoints")]
    RefinementBudgetExceeded { cap: usize },

    #[error("edge {edge} has a non-constant probability on cell {cell}")]
    NonConstantOnCell { cell: String, edge: EdgeId },

    #[error("image of cell {cell} under edge {edge} meets more than one cell")]
    ImageSplitsCells { cell: String, edge: EdgeId },

    #[error("state {0} does not exist")]
    InvalidState(usize),

    #[error("inconsistent merge: {0}")]
    InconsistentMerge(String),

    #[error("{0} terminal strongly connected components; the stationary distribution is not unique")]
    MultipleTerminalComponents(usize),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("trace has no steps to average over")]
    EmptyTrace,

    #[error("empty sample set")]
    EmptySamples,

    #[error("every sampled cell is a single point; no pairs x != y exist")]
    DegenerateCellOnly,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors that mean a configured cap was hit rather than a bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::RefinementBudgetExceeded { .. })
    }

    /// True for violated internal invariants.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::InconsistentMerge(_)
                | Error::NonConstantOnCell { .. }
                | Error::ImageSplitsCells { .. }
                | Error::ZeroMassState(_)
        )
    }
}
