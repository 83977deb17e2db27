//! Seeded label draws.
//!
//! Every random quantity comes from a ChaCha8 generator seeded with
//! `seed_from_u64(seed)` and switched to a stream chosen by the caller (one per
//! sample path or cloud atom), so results do not depend on thread scheduling.
//! A label is drawn by comparing one uniform `u64` against the cumulative
//! probabilities scaled to `2^64`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{Scalar, UNIT_SCALE};

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Cumulative thresholds `ceil(2^64 * (p_0 + ... + p_k))`.
///
/// For inexact scalars a total within `1e-9` of one is treated as one, so
/// rounding never leaves a gap at the top of the scale.
pub fn cumulative_thresholds<S: Scalar>(probs: &[S]) -> Vec<u128> {
    let mut acc = S::zero();
    let mut out = Vec::with_capacity(probs.len());
    for p in probs {
        acc = acc + p.clone();
        out.push(acc.unit_threshold());
    }
    if !S::EXACT && (acc.to_f64() - 1.0).abs() < 1e-9 {
        if let Some(last) = probs.iter().rposition(|p| p.to_f64() > 0.0) {
            for t in &mut out[last..] {
                *t = UNIT_SCALE;
            }
        }
    }
    out
}

/// Index of the first threshold above a fresh uniform draw, or `None` when the
/// probabilities do not cover the draw (total mass below one).
pub fn draw(rng: &mut ChaCha8Rng, thresholds: &[u128]) -> Option<usize> {
    let u = u128::from(rng.next_u64());
    thresholds.iter().position(|&t| u < t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn exact_thresholds_end_at_one() {
        let t = cumulative_thresholds(&[rat(1, 3), rat(2, 3)]);
        assert_eq!(t[1], UNIT_SCALE);
        assert_eq!(t[0], UNIT_SCALE / 3 + 1);
    }

    #[test]
    fn float_rounding_is_absorbed() {
        let t = cumulative_thresholds(&[0.1f64, 0.2, 0.7 - 1e-12, 0.0]);
        assert_eq!(t[2], UNIT_SCALE);
        assert_eq!(t[3], UNIT_SCALE);
    }

    #[test]
    fn zero_probability_is_never_drawn() {
        let t = cumulative_thresholds(&[rat(0, 1), rat(1, 1)]);
        let mut rng = substream(7, 0);
        assert!((0..1000).all(|_| draw(&mut rng, &t) == Some(1)));
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| substream(1, 5).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(substream(1, 5).next_u64(), substream(1, 6).next_u64());
    }

    #[test]
    fn deficient_mass_can_miss() {
        let t = cumulative_thresholds(&[rat(1, 2)]);
        let mut rng = substream(3, 0);
        assert!((0..200).any(|_| draw(&mut rng, &t).is_none()));
    }
}
