use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::Error;
use crate::model::Interval;
use crate::scalar::{fmt_exact, parse_rational, Rational, Scalar};

/// Test functions with exact rational evaluation.
///
/// Grammar: a rational constant (`1/2`), `x`, `x^k`, `poly(c0,c1,...)` for
/// `c0 + c1 x + ...`, or an indicator `ind(a,b]` with any of `(`, `[`, `)`, `]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// Coefficients from the constant term up.
    Poly(Vec<Rational>),
    Indicator(Interval<Rational>),
}

impl Observable {
    pub fn constant(c: Rational) -> Self {
        Observable::Poly(vec![c])
    }

    pub fn identity() -> Self {
        Observable::power(1)
    }

    pub fn power(k: usize) -> Self {
        let mut c = vec![Rational::zero(); k + 1];
        c[k] = Rational::from_integer(1.into());
        Observable::Poly(c)
    }

    /// The value when the function is constant.
    pub fn as_constant(&self) -> Option<&Rational> {
        match self {
            Observable::Poly(c) if c.iter().skip(1).all(Zero::is_zero) => c.first(),
            _ => None,
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        match self {
            Observable::Poly(c) => c.iter().rev().fold(Rational::zero(), |acc, k| acc * x + k),
            Observable::Indicator(iv) => Rational::from_integer(iv.contains(x).into()),
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        match self {
            Observable::Poly(c) => c.iter().rev().fold(0.0, |acc, k| acc * x + k.to_f64()),
            Observable::Indicator(iv) => {
                if iv.map_scalar(Scalar::to_f64).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Poly(c) => {
                let cs: Vec<String> = c.iter().map(fmt_exact).collect();
                write!(f, "poly({})", cs.join(","))
            }
            Observable::Indicator(iv) => write!(
                f,
                "ind{}{},{}{}",
                if iv.lo_closed { '[' } else { '(' },
                fmt_exact(&iv.lo),
                fmt_exact(&iv.hi),
                if iv.hi_closed { ']' } else { ')' }
            ),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("`{s}` is not an observable (try 1, x, x^2, poly(0,1), ind(1/3,1])"));
        if s == "x" {
            return Ok(Observable::identity());
        }
        if let Some(k) = s.strip_prefix("x^") {
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            return Ok(Observable::power(k));
        }
        if let Some(body) = s.strip_prefix("poly(").and_then(|b| b.strip_suffix(')')) {
            let coeffs: Option<Vec<Rational>> = body.split(',').map(parse_rational).collect();
            return coeffs.filter(|c| !c.is_empty()).map(Observable::Poly).ok_or_else(bad);
        }
        if let Some(body) = s.strip_prefix("ind") {
            let body = body.trim();
            let lo_closed = match body.chars().next() {
                Some('[') => true,
                Some('(') => false,
                _ => return Err(bad()),
            };
            let hi_closed = match body.chars().last() {
                Some(']') => true,
                Some(')') => false,
                _ => return Err(bad()),
            };
            let inner = &body[1..body.len() - 1];
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            let (a, b) = (parse_rational(a).ok_or_else(bad)?, parse_rational(b).ok_or_else(bad)?);
            return Ok(Observable::Indicator(Interval::new(a, b, lo_closed, hi_closed)));
        }
        parse_rational(s).map(Observable::constant).ok_or_else(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn parses_the_grammar() {
        assert_eq!("x".parse::<Observable>().unwrap().eval(&rat(1, 3)), rat(1, 3));
        assert_eq!("x^2".parse::<Observable>().unwrap().eval(&rat(1, 3)), rat(1, 9));
        assert_eq!("poly(1,0,2)".parse::<Observable>().unwrap().eval(&int(2)), int(9));
        assert_eq!("1/2".parse::<Observable>().unwrap().as_constant(), Some(&rat(1, 2)));
        let ind: Observable = "ind(1/3,1]".parse().unwrap();
        assert_eq!(ind.eval(&rat(1, 3)), int(0));
        assert_eq!(ind.eval(&int(1)), int(1));
        assert_eq!(ind.eval_f64(0.5), 1.0);
        assert!("sin(x)".parse::<Observable>().is_err());
        assert!("ind<0,1>".parse::<Observable>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["poly(0/1,1/1)", "ind(1/3,1/1]", "ind[0/1,1/9]"] {
            let o: Observable = s.parse().unwrap();
            assert_eq!(o.to_string(), s);
        }
    }
}
