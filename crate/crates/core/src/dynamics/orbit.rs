use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::Point;
use crate::sampling::cumulative_thresholds;
use crate::scalar::Scalar;
use crate::{ExactPoint, ExactSystem, FloatPoint, FloatSystem};

/// Denominator size beyond which orbit points drop to `f64`.
pub const DEFAULT_DENOMINATOR_BITS: u64 = 4096;

/// An orbit point: exact while its denominator stays small, `f64` afterwards.
#[derive(Clone, Debug, PartialEq)]
pub enum HybridPoint {
    Exact(ExactPoint),
    Approx(FloatPoint),
}

impl HybridPoint {
    pub fn to_f64(&self) -> f64 {
        match self {
            HybridPoint::Exact(p) => p.value.to_f64(),
            HybridPoint::Approx(p) => p.value,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, HybridPoint::Exact(_))
    }

    pub fn irrational(&self) -> bool {
        match self {
            HybridPoint::Exact(p) => p.irrational,
            HybridPoint::Approx(p) => p.irrational,
        }
    }

    pub fn to_float(&self) -> FloatPoint {
        Point { value: self.to_f64(), irrational: self.irrational() }
    }
}

/// One-step law at a point.
#[derive(Clone, Debug)]
pub struct StepLaw {
    pub thresholds: Vec<u128>,
    /// `ln p_e`, `-inf` where `p_e = 0`.
    pub log_probs: Vec<f64>,
}

/// Steps a system on hybrid points. Exact points use the exact system; points
/// past the denominator cap use the `f64` copy of it.
pub struct Orbit<'a> {
    exact: &'a ExactSystem,
    float: FloatSystem,
    cap_bits: u64,
}

impl<'a> Orbit<'a> {
    pub fn new(exact: &'a ExactSystem, cap_bits: u64) -> Self {
        Orbit { exact, float: exact.to_float(), cap_bits }
    }

    pub fn spec(&self) -> &ExactSystem {
        self.exact
    }

    pub fn start(&self, x: &ExactPoint) -> Result<HybridPoint> {
        self.exact.ensure_in_domain(x)?;
        Ok(self.settle(x.clone()))
    }

    fn settle(&self, p: ExactPoint) -> HybridPoint {
        if p.value.repr_bits() > self.cap_bits {
            HybridPoint::Approx(p.map_scalar(Scalar::to_f64))
        } else {
            HybridPoint::Exact(p)
        }
    }

    pub fn thresholds(&self, x: &HybridPoint) -> Result<Vec<u128>> {
        match x {
            HybridPoint::Exact(p) => Ok(cumulative_thresholds(&self.exact.probs(p)?)),
            HybridPoint::Approx(p) => Ok(cumulative_thresholds(&self.float.probs(p)?)),
        }
    }

    pub fn law(&self, x: &HybridPoint) -> Result<StepLaw> {
        let (thresholds, probs) = match x {
            HybridPoint::Exact(p) => {
                let probs = self.exact.probs(p)?;
                (cumulative_thresholds(&probs), probs.iter().map(Scalar::to_f64).collect::<Vec<_>>())
            }
            HybridPoint::Approx(p) => {
                let probs = self.float.probs(p)?;
                (cumulative_thresholds(&probs), probs)
            }
        };
        let log_probs = probs.iter().map(|&p| if p.is_zero() { f64::NEG_INFINITY } else { p.ln() }).collect();
        Ok(StepLaw { thresholds, log_probs })
    }

    /// Applies the map of edge number `index` (position in the edge list).
    pub fn step(&self, x: &HybridPoint, index: usize) -> HybridPoint {
        match x {
            HybridPoint::Exact(p) => self.settle(self.exact.edges[index].map.apply(p)),
            HybridPoint::Approx(p) => HybridPoint::Approx(self.float.edges[index].map.apply(p)),
        }
    }

    pub fn zero_mass(&self, x: &HybridPoint) -> Error {
        Error::ZeroMassState(match x {
            HybridPoint::Exact(p) => p.to_string(),
            HybridPoint::Approx(p) => p.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use crate::specimens::example2;

    #[test]
    fn switches_to_float_past_the_cap() {
        let spec = example2(rat(1, 2));
        let orbit = Orbit::new(&spec, 16);
        let mut x = orbit.start(&Point::rational(int(1))).unwrap();
        for _ in 0..20 {
            x = orbit.step(&x, 0);
        }
        assert!(!x.is_exact());
        assert!((x.to_f64() - 3f64.powi(-20)).abs() < 1e-18);
    }

    #[test]
    fn law_marks_impossible_edges() {
        let spec = example2(rat(1, 2));
        let orbit = Orbit::new(&spec, DEFAULT_DENOMINATOR_BITS);
        let law = orbit.law(&orbit.start(&Point::rational(int(0))).unwrap()).unwrap();
        assert_eq!(law.log_probs[0], f64::NEG_INFINITY);
        assert_eq!(law.log_probs[1], 0.0);
    }
}
