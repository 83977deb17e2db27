use std::fmt;

use super::{Interval, Point};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Piece<S> {
    pub interval: Interval<S>,
    pub value: S,
}

/// A place-dependent probability `p_e`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbabilityFunction<S> {
    /// Constant on each piece; the pieces partition the domain.
    Piecewise(Vec<Piece<S>>),
    /// One value on rational points, another on irrational points.
    Rationality { on_rationals: S, on_irrationals: S },
}

impl<S: Scalar> ProbabilityFunction<S> {
    pub fn constant(domain: &Interval<S>, value: S) -> Self {
        ProbabilityFunction::Piecewise(vec![Piece { interval: domain.clone(), value }])
    }

    /// Value at `x`, or `None` if no piece covers it.
    pub fn eval(&self, x: &Point<S>) -> Option<S> {
        match self {
            ProbabilityFunction::Piecewise(pieces) => pieces
                .iter()
                .find(|p| p.interval.contains(&x.value))
                .map(|p| p.value.clone()),
            ProbabilityFunction::Rationality { on_rationals, on_irrationals } => {
                Some(if x.irrational { on_irrationals.clone() } else { on_rationals.clone() })
            }
        }
    }

    pub fn is_piecewise(&self) -> bool {
        matches!(self, ProbabilityFunction::Piecewise(_))
    }

    /// Finite endpoints where the function may change value.
    pub fn breakpoints(&self) -> Vec<S> {
        match self {
            ProbabilityFunction::Piecewise(pieces) => pieces
                .iter()
                .flat_map(|p| [p.interval.lo.clone(), p.interval.hi.clone()])
                .collect(),
            ProbabilityFunction::Rationality { .. } => Vec::new(),
        }
    }

    /// The single value taken on `cell`, if the function is constant there.
    /// Adjacent pieces with equal values count as one.
    ///
    /// `points` restricts the cell to its rational or irrational members.
    pub fn value_on(&self, cell: &Interval<S>, points: PointClass) -> Option<S> {
        match self {
            ProbabilityFunction::Piecewise(pieces) => {
                let mut meeting = pieces.iter().filter(|p| p.interval.intersects(cell));
                let first = meeting.next()?;
                meeting.all(|p| p.value == first.value).then(|| first.value.clone())
            }
            ProbabilityFunction::Rationality { on_rationals, on_irrationals } => match points {
                PointClass::Rationals => Some(on_rationals.clone()),
                PointClass::Irrationals => Some(on_irrationals.clone()),
                PointClass::All if cell.is_degenerate() => Some(on_rationals.clone()),
                PointClass::All => (on_rationals == on_irrationals).then(|| on_rationals.clone()),
            },
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ProbabilityFunction<T> {
        match self {
            ProbabilityFunction::Piecewise(pieces) => ProbabilityFunction::Piecewise(
                pieces
                    .iter()
                    .map(|p| Piece { interval: p.interval.map_scalar(&f), value: f(&p.value) })
                    .collect(),
            ),
            ProbabilityFunction::Rationality { on_rationals, on_irrationals } => {
                ProbabilityFunction::Rationality {
                    on_rationals: f(on_rationals),
                    on_irrationals: f(on_irrationals),
                }
            }
        }
    }
}

/// Which members of an interval a cell holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    All,
    Rationals,
    Irrationals,
}

impl PointClass {
    pub fn admits(&self, x_irrational: bool) -> bool {
        match self {
            PointClass::All => true,
            PointClass::Rationals => !x_irrational,
            PointClass::Irrationals => x_irrational,
        }
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointClass::All => "all",
            PointClass::Rationals => "rationals",
            PointClass::Irrationals => "irrationals",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};

    fn step(b: Rational) -> ProbabilityFunction<Rational> {
        ProbabilityFunction::Piecewise(vec![
            Piece { interval: Interval::closed(int(0), rat(1, 9)), value: int(0) },
            Piece { interval: Interval::left_open(rat(1, 9), int(1)), value: b },
        ])
    }

    #[test]
    fn boundary_belongs_to_owning_piece() {
        let p0 = step(rat(1, 2));
        assert_eq!(p0.eval(&Point::rational(rat(1, 9))), Some(int(0)));
        assert_eq!(p0.eval(&Point::rational(rat(1, 9) + rat(1, 1000))), Some(rat(1, 2)));
        assert_eq!(p0.eval(&Point::rational(int(2))), None);
    }

    #[test]
    fn constancy_on_cells() {
        let p0 = step(rat(1, 2));
        assert_eq!(p0.value_on(&Interval::left_open(int(0), rat(1, 9)), PointClass::All), Some(int(0)));
        assert_eq!(p0.value_on(&Interval::closed(int(0), rat(1, 3)), PointClass::All), None);
        let q = ProbabilityFunction::Rationality { on_rationals: rat(1, 4), on_irrationals: rat(1, 3) };
        let dom = Interval::closed(int(0), int(1));
        assert_eq!(q.value_on(&dom, PointClass::Irrationals), Some(rat(1, 3)));
        assert_eq!(q.value_on(&dom, PointClass::All), None);

        let flat = ProbabilityFunction::Piecewise(vec![
            Piece { interval: Interval::closed(int(0), rat(1, 2)), value: rat(1, 3) },
            Piece { interval: Interval::left_open(rat(1, 2), int(1)), value: rat(1, 3) },
        ]);
        assert_eq!(flat.value_on(&Interval::open(rat(1, 4), rat(3, 4)), PointClass::All), Some(rat(1, 3)));
    }
}
