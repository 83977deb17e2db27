//! Systems, their exact pointwise evaluation, and the system file format.

mod format;
mod interval;
mod point;
mod probability;
mod system;
mod validate;

pub use format::{parse_system, write_system};
pub use interval::Interval;
pub use point::{AffineMap, Point};
pub use probability::{Piece, PointClass, ProbabilityFunction};
pub use system::{DiscreteMeasure, Edge, EdgeId, SystemSpec};
pub use validate::{atoms_of, probability_breakpoints, validate_system, CellSum, ValidationIssue, ValidationReport};
