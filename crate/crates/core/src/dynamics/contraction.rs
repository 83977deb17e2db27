use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Point, PointClass};
use crate::partition::IntervalPartition;
use crate::sampling::substream;
use crate::scalar::Rational;
use crate::{ExactPoint, ExactSystem};

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionEstimate {
    /// Largest observed `sum_e p_e(x) |w_e x - w_e y| / |x - y|`.
    pub rate: Rational,
    pub pairs: usize,
    pub contractive: bool,
}

/// Samples `num_pairs` pairs `x != y` from common cells of `part` and returns
/// the largest average contraction ratio, computed exactly.
pub fn contraction_estimate(
    spec: &ExactSystem,
    part: &IntervalPartition,
    num_pairs: usize,
    seed: u64,
) -> Result<ContractionEstimate> {
    if num_pairs == 0 {
        return Err(Error::InvalidArgument("need at least one pair".into()));
    }
    let cells: Vec<_> = part.cells.iter().filter(|c| !c.interval.is_degenerate()).collect();
    if cells.is_empty() {
        return Err(Error::DegenerateCellOnly);
    }
    let mut rng = substream(seed, 0);
    let mut best = Rational::zero();
    for _ in 0..num_pairs {
        let cell = cells[rng.random_range(0..cells.len())];
        let irrational = cell.points == PointClass::Irrationals;
        let width = cell.interval.length();
        let x = interior_point(&mut rng, &cell.interval.lo, &width, irrational);
        let mut y = interior_point(&mut rng, &cell.interval.lo, &width, irrational);
        while y == x {
            y = interior_point(&mut rng, &cell.interval.lo, &width, irrational);
        }
        let gap = (x.value.clone() - y.value.clone()).abs();
        let mut total = Rational::zero();
        for edge in &spec.edges {
            let p = spec.prob(edge.id, &x)?;
            if p.is_zero() {
                continue;
            }
            let moved = (edge.map.eval(&x.value) - edge.map.eval(&y.value)).abs();
            total += p * moved;
        }
        let ratio = total / gap;
        if ratio > best {
            best = ratio;
        }
    }
    Ok(ContractionEstimate { contractive: best < Rational::from_integer(1.into()), rate: best, pairs: num_pairs })
}

/// A point strictly inside `(lo, lo + width)` on a grid of `2^32` steps.
fn interior_point(rng: &mut ChaCha8Rng, lo: &Rational, width: &Rational, irrational: bool) -> ExactPoint {
    const GRID: u64 = 1 << 32;
    let k = rng.random_range(1..GRID);
    Point { value: lo + width * Rational::new(k.into(), GRID.into()), irrational }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{refine_markov_partition, tag_partition, DEFAULT_BREAKPOINT_CAP};
    use crate::scalar::rat;
    use crate::specimens;

    #[test]
    fn affine_examples_contract_at_their_slope() {
        let e2 = specimens::example2(rat(1, 2));
        let part = refine_markov_partition(&e2, DEFAULT_BREAKPOINT_CAP).unwrap();
        assert_eq!(contraction_estimate(&e2, &part, 200, 1).unwrap().rate, rat(1, 3));

        let e4 = specimens::example4();
        let est = contraction_estimate(&e4, &tag_partition(&e4), 200, 1).unwrap();
        assert_eq!(est.rate, rat(1, 2));
        assert!(est.contractive);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let e2 = specimens::example2(rat(1, 2));
        let mut part = refine_markov_partition(&e2, DEFAULT_BREAKPOINT_CAP).unwrap();
        assert!(matches!(contraction_estimate(&e2, &part, 0, 1), Err(Error::InvalidArgument(_))));
        part.cells.retain(|c| c.interval.is_degenerate());
        assert!(matches!(contraction_estimate(&e2, &part, 10, 1), Err(Error::DegenerateCellOnly)));
    }
}
