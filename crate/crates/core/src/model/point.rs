use std::fmt;

use super::Interval;
use crate::scalar::Scalar;

/// A state of the process.
///
/// When `irrational` is set, `value` is only a numeric stand-in for an
/// irrational number: interval membership reads the value, while
/// rationality-predicate probabilities read the tag alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<S> {
    pub value: S,
    pub irrational: bool,
}

impl<S: Scalar> Point<S> {
    pub fn rational(value: S) -> Self {
        Point { value, irrational: false }
    }

    pub fn irrational(approximation: S) -> Self {
        Point { value: approximation, irrational: true }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Point<T> {
        Point { value: f(&self.value), irrational: self.irrational }
    }
}

impl<S: Scalar> fmt::Display for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.irrational {
            write!(f, "irrational~{:.6}", self.value.to_f64())
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// `x -> slope * x + intercept`
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<S> {
    pub slope: S,
    pub intercept: S,
}

impl<S: Scalar> AffineMap<S> {
    pub fn new(slope: S, intercept: S) -> Self {
        AffineMap { slope, intercept }
    }

    pub fn eval(&self, x: &S) -> S {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }

    /// Image of a point. A nonzero rational slope keeps irrationals irrational;
    /// a constant map lands on its (rational) intercept.
    pub fn apply(&self, x: &Point<S>) -> Point<S> {
        Point {
            value: self.eval(&x.value),
            irrational: x.irrational && !self.slope.is_zero(),
        }
    }

    /// The unique preimage of `y`, if the map is invertible.
    pub fn preimage(&self, y: &S) -> Option<S> {
        if self.slope.is_zero() {
            None
        } else {
            Some((y.clone() - self.intercept.clone()) / self.slope.clone())
        }
    }

    /// Exact image of an interval; ownership flags follow the orientation.
    pub fn image(&self, iv: &Interval<S>) -> Interval<S> {
        if self.slope.is_zero() {
            return Interval::point(self.intercept.clone());
        }
        let a = self.eval(&iv.lo);
        let b = self.eval(&iv.hi);
        if self.slope.is_positive() {
            Interval::new(a, b, iv.lo_closed, iv.hi_closed)
        } else {
            Interval::new(b, a, iv.hi_closed, iv.lo_closed)
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> AffineMap<T> {
        AffineMap { slope: f(&self.slope), intercept: f(&self.intercept) }
    }
}
