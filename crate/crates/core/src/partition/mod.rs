//! The fundamental Markov system: an exact Markov partition of the domain,
//! the labeled chain it induces, and the merging of cells whose path measures
//! are mutually absolutely continuous.

mod certificates;
mod chain;
mod fundamental;
mod refine;

pub use certificates::{coupling_merge_test, measure_equality, support_separation, EqualityOutcome, MergeCertificate};
pub use chain::{extract_symbolic_chain, symbolic_chain, LabeledChain, Transition};
pub use fundamental::{
    fundamental_partition, lift_check, operator_discrepancy, FmsEdge, FundamentalPartition, PairOutcome, PairRecord,
    PartitionParams,
};
pub use refine::{
    base_partition, refine_markov_partition, tag_partition, BreakpointOrigin, Cell, IntervalPartition,
    DEFAULT_BREAKPOINT_CAP,
};

#[cfg(test)]
mod tests;
