use std::cmp::Ordering;
use std::fmt;

use super::{EdgeId, Interval, Point, ProbabilityFunction, SystemSpec};
use crate::scalar::Scalar;

/// One row of the common refinement: a cell (an open gap or a single
/// breakpoint), optionally restricted to rational or irrational members.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSum<S> {
    pub cell: Interval<S>,
    /// `None` when no edge distinguishes rationals from irrationals.
    pub irrational: Option<bool>,
    pub sum: S,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValidationIssue<S> {
    NonUnitSum { cell: Interval<S>, irrational: Option<bool>, sum: S },
    MapEscapesDomain { edge: EdgeId, image: Interval<S> },
    OverlappingPieces { edge: EdgeId },
    PiecesDoNotCover { edge: EdgeId, detail: String },
    ValueOutOfRange { edge: EdgeId, value: S },
}

impl<S: Scalar> fmt::Display for ValidationIssue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NonUnitSum { cell, irrational, sum } => {
                write!(f, "NonUnitSum: probabilities sum to {sum} on {cell}")?;
                match irrational {
                    Some(true) => write!(f, " (irrational points)"),
                    Some(false) => write!(f, " (rational points)"),
                    None => Ok(()),
                }
            }
            ValidationIssue::MapEscapesDomain { edge, image } => {
                write!(f, "MapEscapesDomain: edge {edge} maps the domain onto {image}")
            }
            ValidationIssue::OverlappingPieces { edge } => {
                write!(f, "OverlappingPieces: pieces of edge {edge} overlap")
            }
            ValidationIssue::PiecesDoNotCover { edge, detail } => {
                write!(f, "PiecesDoNotCover: edge {edge}: {detail}")
            }
            ValidationIssue::ValueOutOfRange { edge, value } => {
                write!(f, "ValueOutOfRange: edge {edge} has probability {value} outside [0, 1]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<S> {
    pub cells: Vec<CellSum<S>>,
    pub issues: Vec<ValidationIssue<S>>,
}

impl<S: Scalar> ValidationReport<S> {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> crate::Result<Self> {
        if self.is_ok() {
            Ok(self)
        } else {
            let msgs: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
            Err(crate::Error::Validation(msgs.join("; ")))
        }
    }
}

/// Sorted distinct breakpoints of all piecewise probabilities, clipped to the
/// domain and including both domain endpoints.
pub fn probability_breakpoints<S: Scalar>(spec: &SystemSpec<S>) -> Vec<S> {
    let mut pts = vec![spec.domain.lo.clone(), spec.domain.hi.clone()];
    for e in &spec.edges {
        pts.extend(e.prob.breakpoints().into_iter().filter(|b| spec.domain.contains(b)));
    }
    sort_dedup(&mut pts);
    pts
}

pub(crate) fn sort_dedup<S: Scalar>(pts: &mut Vec<S>) {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    pts.dedup();
}

/// Alternating single points and open gaps between consecutive breakpoints.
pub fn atoms_of<S: Scalar>(breakpoints: &[S]) -> Vec<Interval<S>> {
    let mut atoms = Vec::with_capacity(2 * breakpoints.len());
    for (k, b) in breakpoints.iter().enumerate() {
        atoms.push(Interval::point(b.clone()));
        if let Some(next) = breakpoints.get(k + 1) {
            atoms.push(Interval::open(b.clone(), next.clone()));
        }
    }
    atoms
}

/// Checks that probabilities sum to one everywhere, pieces tile the domain,
/// values lie in `[0, 1]`, and every map sends the domain into itself.
pub fn validate_system<S: Scalar>(spec: &SystemSpec<S>) -> ValidationReport<S> {
    let mut issues = Vec::new();

    for e in &spec.edges {
        let image = e.map.image(&spec.domain);
        if !image.is_subset_of(&spec.domain) {
            issues.push(ValidationIssue::MapEscapesDomain { edge: e.id, image });
        }
        match &e.prob {
            ProbabilityFunction::Piecewise(pieces) => {
                check_tiling(e.id, pieces.iter().map(|p| &p.interval).collect(), &spec.domain, &mut issues);
                for p in pieces {
                    check_range(e.id, &p.value, &mut issues);
                }
            }
            ProbabilityFunction::Rationality { on_rationals, on_irrationals } => {
                check_range(e.id, on_rationals, &mut issues);
                check_range(e.id, on_irrationals, &mut issues);
            }
        }
    }

    let tagged = !spec.is_piecewise();
    let mut cells = Vec::new();
    for atom in atoms_of(&probability_breakpoints(spec)) {
        let rep = atom.representative();
        let variants: &[Option<bool>] = if !tagged {
            &[None]
        } else if atom.is_degenerate() {
            &[Some(false)]
        } else {
            &[Some(false), Some(true)]
        };
        for &irr in variants {
            let x = Point { value: rep.clone(), irrational: irr.unwrap_or(false) };
            // uncovered points count as zero and are reported by the tiling check
            let sum = spec
                .edges
                .iter()
                .filter_map(|e| e.prob.eval(&x))
                .fold(S::zero(), |a, b| a + b);
            if !sum.is_one() {
                issues.push(ValidationIssue::NonUnitSum { cell: atom.clone(), irrational: irr, sum: sum.clone() });
            }
            cells.push(CellSum { cell: atom.clone(), irrational: irr, sum });
        }
    }

    ValidationReport { cells, issues }
}

fn check_range<S: Scalar>(edge: EdgeId, v: &S, issues: &mut Vec<ValidationIssue<S>>) {
    if v.is_negative() || *v > S::one() {
        issues.push(ValidationIssue::ValueOutOfRange { edge, value: v.clone() });
    }
}

fn check_tiling<S: Scalar>(
    edge: EdgeId,
    mut ivs: Vec<&Interval<S>>,
    domain: &Interval<S>,
    issues: &mut Vec<ValidationIssue<S>>,
) {
    ivs.retain(|iv| !iv.is_empty());
    ivs.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal).then(b.lo_closed.cmp(&a.lo_closed)));
    let Some(first) = ivs.first() else {
        issues.push(ValidationIssue::PiecesDoNotCover { edge, detail: "no pieces".into() });
        return;
    };
    if !(first.lo == domain.lo && first.lo_closed) {
        issues.push(ValidationIssue::PiecesDoNotCover { edge, detail: format!("domain start {} not covered", domain.lo) });
    }
    let last = ivs[ivs.len() - 1];
    if !(last.hi == domain.hi && last.hi_closed) {
        issues.push(ValidationIssue::PiecesDoNotCover { edge, detail: format!("domain end {} not covered", domain.hi) });
    }
    let mut overlap = false;
    for pair in ivs.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        match a.hi.partial_cmp(&b.lo) {
            Some(Ordering::Greater) => overlap = true,
            Some(Ordering::Equal) if a.hi_closed && b.lo_closed => overlap = true,
            Some(Ordering::Equal) if !a.hi_closed && !b.lo_closed => issues.push(ValidationIssue::PiecesDoNotCover {
                edge,
                detail: format!("point {} belongs to no piece", a.hi),
            }),
            Some(Ordering::Less) => issues.push(ValidationIssue::PiecesDoNotCover {
                edge,
                detail: format!("gap between {} and {}", a.hi, b.lo),
            }),
            _ => {}
        }
    }
    if overlap {
        issues.push(ValidationIssue::OverlappingPieces { edge });
    }
    if ivs.iter().any(|iv| !iv.is_subset_of(domain)) {
        issues.push(ValidationIssue::PiecesDoNotCover { edge, detail: "a piece extends beyond the domain".into() });
    }
}
