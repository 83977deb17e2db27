//! The four reference systems, built in code, and a seeded generator of random ones.
//!
//! The same systems ship as text files under `systems/`; a test keeps the two in sync.

use std::f64::consts::FRAC_1_SQRT_2;

use num_traits::One;
use rand::Rng;

use crate::model::{AffineMap, Edge, EdgeId, Interval, Piece, Point, ProbabilityFunction, SystemSpec};
use crate::sampling::substream;
use crate::scalar::{int, rat, rational_from_f64, Rational};

pub const EXAMPLE2_FILE: &str = include_str!("../systems/example2.sys");
pub const EXAMPLE2_MODIFIED_FILE: &str = include_str!("../systems/example2_modified.sys");
pub const EXAMPLE2_CONSTANT_FILE: &str = include_str!("../systems/example2_constant.sys");
pub const EXAMPLE3_FILE: &str = include_str!("../systems/example3.sys");
pub const EXAMPLE4_FILE: &str = include_str!("../systems/example4.sys");

fn two_branch(left: Rational, right: Rational, slope: Rational, p0: ProbabilityFunction<Rational>) -> SystemSpec<Rational> {
    let p1 = match &p0 {
        ProbabilityFunction::Piecewise(pieces) => ProbabilityFunction::Piecewise(
            pieces
                .iter()
                .map(|p| Piece { interval: p.interval.clone(), value: Rational::one() - p.value.clone() })
                .collect(),
        ),
        ProbabilityFunction::Rationality { on_rationals, on_irrationals } => ProbabilityFunction::Rationality {
            on_rationals: Rational::one() - on_rationals.clone(),
            on_irrationals: Rational::one() - on_irrationals.clone(),
        },
    };
    SystemSpec::new(
        int(0),
        int(1),
        vec![
            Edge { id: EdgeId(0), map: AffineMap::new(slope.clone(), left), prob: p0 },
            Edge { id: EdgeId(1), map: AffineMap::new(slope, right), prob: p1 },
        ],
    )
    .expect("two distinct edges on [0, 1]")
}

/// `p_0` steps from `low` to `high` at `threshold`, which belongs to the left piece.
fn step(threshold: Rational, low: Rational, high: Rational) -> ProbabilityFunction<Rational> {
    ProbabilityFunction::Piecewise(vec![
        Piece { interval: Interval::closed(int(0), threshold.clone()), value: low },
        Piece { interval: Interval::left_open(threshold, int(1)), value: high },
    ])
}

/// `w0 = x/3`, `w1 = x/3 + 1/3`, `p0 = 0` on `[0, 1/9]` and `b` on `(1/9, 1]`.
pub fn example2(b: Rational) -> SystemSpec<Rational> {
    two_branch(int(0), rat(1, 3), rat(1, 3), step(rat(1, 9), int(0), b))
}

/// As [`example2`] with the step moved to `1/27`.
pub fn example2_modified(b: Rational) -> SystemSpec<Rational> {
    two_branch(int(0), rat(1, 3), rat(1, 3), step(rat(1, 27), int(0), b))
}

/// As [`example2`] with `p0 = b` everywhere.
pub fn example2_constant(b: Rational) -> SystemSpec<Rational> {
    two_branch(int(0), rat(1, 3), rat(1, 3), ProbabilityFunction::constant(&Interval::closed(int(0), int(1)), b))
}

/// Same maps as [`example2`], `p0 = 1/4` on `[0, 1/2]` and `1/3` on `(1/2, 1]`.
pub fn example3() -> SystemSpec<Rational> {
    two_branch(int(0), rat(1, 3), rat(1, 3), step(rat(1, 2), rat(1, 4), rat(1, 3)))
}

/// `w0 = x/2`, `w1 = x/2 + 1/2`, `p0 = 1/4` on rationals and `1/3` on irrationals.
pub fn example4() -> SystemSpec<Rational> {
    two_branch(
        int(0),
        rat(1, 2),
        rat(1, 2),
        ProbabilityFunction::Rationality { on_rationals: rat(1, 4), on_irrationals: rat(1, 3) },
    )
}

/// `sqrt(2)/2`, tagged irrational.
pub fn half_sqrt2() -> Point<Rational> {
    Point::irrational(rational_from_f64(FRAC_1_SQRT_2).expect("finite"))
}

/// A seeded random system on `[0, 1]`: two or three affine maps of slope
/// `+-1/k` with images inside the domain, and probabilities constant between
/// up to three cut points on the grid `j/12`. Some probabilities are zero.
pub fn random_piecewise(seed: u64) -> SystemSpec<Rational> {
    let mut rng = substream(seed, 0);
    let n_edges = rng.random_range(2..=3usize);
    let mut cuts: Vec<i64> = (0..rng.random_range(0..=3)).map(|_| rng.random_range(1..12)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut bounds = vec![int(0)];
    bounds.extend(cuts.iter().map(|&c| rat(c, 12)));
    bounds.push(int(1));
    let intervals: Vec<Interval<Rational>> = bounds
        .windows(2)
        .enumerate()
        .map(|(k, w)| Interval::new(w[0].clone(), w[1].clone(), k == 0, true))
        .collect();

    // one weight vector per piece, never all zero
    let weights: Vec<Vec<i64>> = intervals
        .iter()
        .map(|_| loop {
            let w: Vec<i64> = (0..n_edges).map(|_| rng.random_range(0..4)).collect();
            if w.iter().any(|&v| v > 0) {
                break w;
            }
        })
        .collect();

    let edges = (0..n_edges)
        .map(|e| {
            let k = rng.random_range(2..=5i64);
            let len = rat(1, k);
            // intercept on the grid 1/60 keeping the image inside [0, 1]
            let room = 60 - 60 / k;
            let offset = rat(rng.random_range(0..=room), 60);
            let map = if rng.random_bool(0.5) {
                AffineMap::new(len, offset)
            } else {
                AffineMap::new(-len.clone(), offset + len)
            };
            let pieces = intervals
                .iter()
                .zip(&weights)
                .map(|(iv, w)| Piece { interval: iv.clone(), value: rat(w[e], w.iter().sum()) })
                .collect();
            Edge { id: EdgeId(e as u32), map, prob: ProbabilityFunction::Piecewise(pieces) }
        })
        .collect();
    SystemSpec::new(int(0), int(1), edges).expect("distinct ids on [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_system, validate_system};

    #[test]
    fn bundled_files_match_constructors() {
        let half = rat(1, 2);
        assert_eq!(parse_system(EXAMPLE2_FILE).unwrap(), example2(half.clone()));
        assert_eq!(parse_system(EXAMPLE2_MODIFIED_FILE).unwrap(), example2_modified(half.clone()));
        assert_eq!(parse_system(EXAMPLE2_CONSTANT_FILE).unwrap(), example2_constant(half));
        assert_eq!(parse_system(EXAMPLE3_FILE).unwrap(), example3());
        assert_eq!(parse_system(EXAMPLE4_FILE).unwrap(), example4());
    }

    #[test]
    fn specimens_validate() {
        for b in [rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3)] {
            assert!(validate_system(&example2(b.clone())).is_ok());
            assert!(validate_system(&example2_modified(b.clone())).is_ok());
            assert!(validate_system(&example2_constant(b)).is_ok());
        }
        assert!(validate_system(&example3()).is_ok());
        assert!(validate_system(&example4()).is_ok());
    }

    #[test]
    fn random_systems_validate_and_repeat() {
        for seed in 0..50 {
            let spec = random_piecewise(seed);
            let report = validate_system(&spec);
            assert!(report.is_ok(), "seed {seed}: {:?}", report.issues);
            assert_eq!(spec, random_piecewise(seed));
        }
    }
}
