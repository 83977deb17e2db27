use std::cmp::Ordering;
use std::fmt;

use crate::scalar::Scalar;

/// A real interval with explicit endpoint ownership.
///
/// `lo == hi` with both ends closed is the single point `{lo}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<S: Scalar> Interval<S> {
    pub fn new(lo: S, hi: S, lo_closed: bool, hi_closed: bool) -> Self {
        Interval { lo, hi, lo_closed, hi_closed }
    }

    pub fn closed(lo: S, hi: S) -> Self {
        Self::new(lo, hi, true, true)
    }

    /// `(lo, hi]`
    pub fn left_open(lo: S, hi: S) -> Self {
        Self::new(lo, hi, false, true)
    }

    pub fn open(lo: S, hi: S) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn point(v: S) -> Self {
        Self::new(v.clone(), v, true, true)
    }

    pub fn contains(&self, v: &S) -> bool {
        let above = match self.lo.partial_cmp(v) {
            Some(Ordering::Less) => true,
            Some(Ordering::Equal) => self.lo_closed,
            _ => false,
        };
        let below = match v.partial_cmp(&self.hi) {
            Some(Ordering::Less) => true,
            Some(Ordering::Equal) => self.hi_closed,
            _ => false,
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.partial_cmp(&self.hi) {
            Some(Ordering::Less) => false,
            Some(Ordering::Equal) => !(self.lo_closed && self.hi_closed),
            _ => true,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi && self.lo_closed && self.hi_closed
    }

    /// Set inclusion; the empty interval is a subset of everything.
    pub fn is_subset_of(&self, other: &Interval<S>) -> bool {
        if self.is_empty() {
            return true;
        }
        let lower_ok = match other.lo.partial_cmp(&self.lo) {
            Some(Ordering::Less) => true,
            Some(Ordering::Equal) => other.lo_closed || !self.lo_closed,
            _ => false,
        };
        let upper_ok = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => true,
            Some(Ordering::Equal) => other.hi_closed || !self.hi_closed,
            _ => false,
        };
        lower_ok && upper_ok
    }

    pub fn intersects(&self, other: &Interval<S>) -> bool {
        let lo_cmp = self.lo.partial_cmp(&other.lo);
        let (lo, lo_closed) = match lo_cmp {
            Some(Ordering::Greater) => (&self.lo, self.lo_closed),
            Some(Ordering::Less) => (&other.lo, other.lo_closed),
            _ => (&self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => (&self.hi, self.hi_closed),
            Some(Ordering::Greater) => (&other.hi, other.hi_closed),
            _ => (&self.hi, self.hi_closed && other.hi_closed),
        };
        !Interval::new(lo.clone(), hi.clone(), lo_closed, hi_closed).is_empty()
    }

    /// A point strictly inside the interval, or the point itself when degenerate.
    pub fn representative(&self) -> S {
        if self.lo == self.hi {
            self.lo.clone()
        } else {
            (self.lo.clone() + self.hi.clone()) * S::half()
        }
    }

    pub fn length(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Interval<T> {
        Interval::new(f(&self.lo), f(&self.hi), self.lo_closed, self.hi_closed)
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_degenerate() {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};

    fn iv(lo: Rational, hi: Rational, a: bool, b: bool) -> Interval<Rational> {
        Interval::new(lo, hi, a, b)
    }

    #[test]
    fn ownership_decides_boundaries() {
        let left = iv(int(0), rat(1, 9), true, true);
        let right = iv(rat(1, 9), int(1), false, true);
        assert!(left.contains(&rat(1, 9)));
        assert!(!right.contains(&rat(1, 9)));
        assert!(right.contains(&int(1)));
        assert!(!left.intersects(&right));
    }

    #[test]
    fn subsets() {
        let cell = iv(rat(1, 9), rat(1, 3), false, true);
        assert!(iv(rat(1, 27), rat(1, 9), false, true).is_subset_of(&iv(int(0), rat(1, 9), false, true)));
        assert!(!iv(rat(1, 9), rat(1, 3), true, true).is_subset_of(&cell));
        assert!(Interval::point(rat(1, 3)).is_subset_of(&cell));
        assert!(iv(int(1), int(1), false, false).is_subset_of(&cell));
    }

    #[test]
    fn display_marks_ownership() {
        assert_eq!(iv(int(0), rat(1, 9), false, true).to_string(), "(0, 1/9]");
        assert_eq!(Interval::point(int(0)).to_string(), "{0}");
    }
}
