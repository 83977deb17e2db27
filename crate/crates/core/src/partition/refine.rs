use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{atoms_of, probability_breakpoints, EdgeId, Interval, Point, PointClass};
use crate::scalar::{rational_from_f64, Rational};
use crate::{ExactPoint, ExactSystem};

pub const DEFAULT_BREAKPOINT_CAP: usize = 256;

/// An interval, possibly restricted to its rational or irrational members.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub interval: Interval<Rational>,
    pub points: PointClass,
}

impl Cell {
    pub fn contains(&self, x: &ExactPoint) -> bool {
        self.interval.contains(&x.value) && self.points.admits(x.irrational)
    }

    /// The point itself for a single-point cell, the midpoint otherwise; the
    /// irrational part of a tagged cell is represented by a tagged
    /// approximation of `lo + (hi - lo)/sqrt(2)`.
    pub fn representative(&self) -> ExactPoint {
        match self.points {
            PointClass::Irrationals => {
                let frac = rational_from_f64(FRAC_1_SQRT_2).expect("finite");
                Point::irrational(self.interval.lo.clone() + self.interval.length() * frac)
            }
            PointClass::Rationals => Point::rational(self.interval.lo.clone()),
            PointClass::All => Point::rational(self.interval.representative()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.points {
            PointClass::All => write!(f, "{}", self.interval),
            PointClass::Rationals => write!(f, "{} rationals", self.interval),
            PointClass::Irrationals => write!(f, "{} irrationals", self.interval),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakpointOrigin {
    DomainEnd,
    Discontinuity,
    /// Preimage of an earlier breakpoint under this edge's map.
    Preimage(EdgeId),
}

impl fmt::Display for BreakpointOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BreakpointOrigin::DomainEnd => f.write_str("domain end"),
            BreakpointOrigin::Discontinuity => f.write_str("probability discontinuity"),
            BreakpointOrigin::Preimage(e) => write!(f, "preimage under edge {e}"),
        }
    }
}

/// Disjoint cells covering the domain, ordered left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalPartition {
    pub cells: Vec<Cell>,
    /// The closed breakpoint set the cells were cut from, sorted.
    pub breakpoints: Vec<(Rational, BreakpointOrigin)>,
}

impl IntervalPartition {
    pub fn locate(&self, x: &ExactPoint) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x))
    }

    /// Distinct left endpoints of the cells.
    pub fn cut_points(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::new();
        for c in &self.cells {
            if out.last() != Some(&c.interval.lo) {
                out.push(c.interval.lo.clone());
            }
        }
        out
    }

    pub fn is_tagged(&self) -> bool {
        self.cells.iter().any(|c| c.points != PointClass::All)
    }
}

/// Piecewise systems are refined; pure rationality-predicate systems get the
/// two-cell tag partition; anything else is rejected.
pub fn base_partition(spec: &ExactSystem, cap: usize) -> Result<IntervalPartition> {
    if spec.is_piecewise() {
        refine_markov_partition(spec, cap)
    } else if spec.is_rationality_only() {
        Ok(tag_partition(spec))
    } else {
        Err(Error::NotPiecewiseConstant)
    }
}

/// Rational and irrational members of the domain. Maps with rational
/// coefficients and nonzero slope preserve both sets.
pub fn tag_partition(spec: &ExactSystem) -> IntervalPartition {
    let dom = spec.domain.clone();
    IntervalPartition {
        cells: vec![
            Cell { interval: dom.clone(), points: PointClass::Rationals },
            Cell { interval: dom.clone(), points: PointClass::Irrationals },
        ],
        breakpoints: vec![(dom.lo, BreakpointOrigin::DomainEnd), (dom.hi, BreakpointOrigin::DomainEnd)],
    }
}

/// Coarsest partition into intervals (and single points) on which every
/// probability is constant and every positive-probability map sends each cell
/// into a single cell.
///
/// The breakpoint set starts from the probability discontinuities and the
/// domain ends and is closed under preimages; between consecutive breakpoints
/// no map image can straddle a breakpoint. Adjacent pieces are then grouped
/// and split until each group's members agree on where every edge sends them.
pub fn refine_markov_partition(spec: &ExactSystem, cap: usize) -> Result<IntervalPartition> {
    if !spec.is_piecewise() {
        return Err(Error::NotPiecewiseConstant);
    }
    let dom = &spec.domain;
    let mut points: BTreeMap<Rational, BreakpointOrigin> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for b in probability_breakpoints(spec) {
        let origin = if b == dom.lo || b == dom.hi { BreakpointOrigin::DomainEnd } else { BreakpointOrigin::Discontinuity };
        points.insert(b.clone(), origin);
        queue.push_back(b);
    }
    while let Some(b) = queue.pop_front() {
        for e in &spec.edges {
            let Some(pre) = e.map.preimage(&b) else { continue };
            if dom.contains(&pre) && !points.contains_key(&pre) {
                if points.len() >= cap {
                    return Err(Error::RefinementBudgetExceeded { cap });
                }
                points.insert(pre.clone(), BreakpointOrigin::Preimage(e.id));
                queue.push_back(pre);
            }
        }
    }
    let sorted: Vec<Rational> = points.keys().cloned().collect();
    let atoms = atoms_of(&sorted);

    let mut probs = Vec::with_capacity(atoms.len());
    let mut targets = Vec::with_capacity(atoms.len());
    for atom in &atoms {
        let rep = Point::rational(atom.representative());
        let row = spec.probs(&rep)?;
        let mut row_targets = Vec::with_capacity(row.len());
        for (e, p) in spec.edges.iter().zip(&row) {
            if p.is_zero() {
                row_targets.push(None);
                continue;
            }
            let image = e.map.image(atom);
            let hit = atoms.iter().position(|a| image.is_subset_of(a)).ok_or_else(|| {
                Error::Validation(format!("MapEscapesDomain: edge {} maps {atom} onto {image}", e.id))
            })?;
            row_targets.push(Some(hit));
        }
        probs.push(row);
        targets.push(row_targets);
    }

    // initial groups: maximal runs with equal probability vectors
    let mut group = vec![0usize; atoms.len()];
    for k in 1..atoms.len() {
        group[k] = group[k - 1] + usize::from(probs[k] != probs[k - 1]);
    }
    loop {
        let signature = |k: usize, g: &[usize]| -> (usize, Vec<Option<usize>>) {
            (g[k], targets[k].iter().map(|t| t.map(|a| g[a])).collect())
        };
        let mut next = vec![0usize; atoms.len()];
        for k in 1..atoms.len() {
            next[k] = next[k - 1] + usize::from(signature(k, &group) != signature(k - 1, &group));
        }
        let stable = next.last() == group.last();
        group = next;
        if stable {
            break;
        }
    }

    let mut cells = Vec::new();
    let mut start = 0;
    for k in 0..atoms.len() {
        if k + 1 == atoms.len() || group[k + 1] != group[k] {
            let (first, last) = (&atoms[start], &atoms[k]);
            cells.push(Cell {
                interval: Interval::new(first.lo.clone(), last.hi.clone(), first.lo_closed, last.hi_closed),
                points: PointClass::All,
            });
            start = k + 1;
        }
    }
    Ok(IntervalPartition { cells, breakpoints: points.into_iter().collect() })
}
