use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Sum;
use crate::error::{Error, Result};
use crate::sampling::{cumulative_thresholds, draw, substream};
use crate::scalar::{Rational, Scalar};
use crate::{FloatPoint, FloatSystem};

/// Seed offset separating the reference cloud from the cloud under study.
const REFERENCE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
/// Stream of the bootstrap resampler, far from the per-atom streams.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

fn total_cmp<S: Scalar>(a: &S, b: &S) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Wasserstein-1 distance between two empirical measures with uniform weights.
///
/// Equal sizes pair the order statistics; otherwise the distance is the
/// integral of `|F_a - F_b|` over the merged support.
pub fn w1_distance<S: Scalar>(a: &[S], b: &[S]) -> Result<S> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(total_cmp);
    b.sort_by(total_cmp);
    let size = |n: usize| S::from_rational(&Rational::from_integer(n.into()));
    if a.len() == b.len() {
        let total = a.iter().zip(&b).fold(S::zero(), |acc, (x, y)| acc + (x.clone() - y.clone()).abs());
        return Ok(total / size(a.len()));
    }
    let (na, nb) = (size(a.len()), size(b.len()));
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (S::zero(), S::zero());
    let mut prev: Option<S> = None;
    let mut total = S::zero();
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => {
                if x <= y {
                    x.clone()
                } else {
                    y.clone()
                }
            }
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            total = total + (fa.clone() - fb.clone()).abs() * (t.clone() - p);
        }
        while i < a.len() && a[i] == t {
            fa = fa + S::one() / na.clone();
            i += 1;
        }
        while j < b.len() && b[j] == t {
            fb = fb + S::one() / nb.clone();
            j += 1;
        }
        prev = Some(t);
    }
    Ok(total)
}

fn step_atom(spec: &FloatSystem, x: &FloatPoint, rng: &mut ChaCha8Rng) -> Result<FloatPoint> {
    let t = cumulative_thresholds(&spec.probs(x)?);
    let k = draw(rng, &t).ok_or_else(|| Error::ZeroMassState(x.to_string()))?;
    Ok(spec.edges[k].map.apply(x))
}

/// Moves every atom `steps` times; atom `k` draws from stream `k` of `seed`.
pub fn push_cloud(spec: &FloatSystem, cloud: &[FloatPoint], steps: usize, seed: u64) -> Result<Vec<FloatPoint>> {
    cloud
        .par_iter()
        .enumerate()
        .map(|(k, x)| {
            let mut rng = substream(seed, k as u64);
            let mut x = *x;
            for _ in 0..steps {
                x = step_atom(spec, &x, &mut rng)?;
            }
            Ok(x)
        })
        .collect()
}

/// `atoms` copies of `start` after `burn_in` steps each: an empirical
/// approximation of the stationary measure reached from `start`.
pub fn stationary_cloud(
    spec: &FloatSystem,
    start: &FloatPoint,
    atoms: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<FloatPoint>> {
    push_cloud(spec, &vec![*start; atoms], burn_in, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateParams {
    pub atoms: usize,
    pub n_max: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl RateParams {
    pub fn new(seed: u64) -> Self {
        RateParams { atoms: 4000, n_max: 20, burn_in: 100, seed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub seed: u64,
    pub atoms: usize,
    /// `d_n = W1(U*^n start, reference)` for `n = 0..=n_max`.
    pub distances: Vec<f64>,
    /// Three times the bootstrap RMS of `W1` between the reference and its resamples.
    pub noise_floor: f64,
    /// `d_{n+1} / d_n` while both lie above the floor.
    pub ratios: Vec<f64>,
    /// `(d_k / d_0)^(1/k)` for the last `k` above the floor.
    pub geometric_mean: Option<f64>,
    /// A theoretical upper bound on the ratio, when the caller knows one.
    pub bound: Option<f64>,
}

impl RateReport {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|g| format!("{g:e}")).unwrap_or_else(|| "none".into());
        let mut out = String::from("n,d_n,ratio,precision\n");
        for (n, d) in self.distances.iter().enumerate() {
            let ratio = n.checked_sub(1).and_then(|k| self.ratios.get(k)).map(|r| format!("{r:e}")).unwrap_or_default();
            let _ = writeln!(out, "{n},{d:e},{ratio},f64");
        }
        let _ = write!(
            out,
            "\nseed,atoms,noise_floor,geometric_mean,bound,precision\n{},{},{:e},{},{},f64\n",
            self.seed,
            self.atoms,
            self.noise_floor,
            opt(self.geometric_mean),
            opt(self.bound)
        );
        out
    }
}

const BOOTSTRAP_ROUNDS: usize = 50;

fn noise_floor(reference: &[f64], seed: u64) -> Result<f64> {
    let mut rng = substream(seed, BOOTSTRAP_STREAM);
    let mut sq = Sum::default();
    for _ in 0..BOOTSTRAP_ROUNDS {
        let resample: Vec<f64> = (0..reference.len()).map(|_| reference[rng.random_range(0..reference.len())]).collect();
        let d = w1_distance(&resample, reference)?;
        sq.add(d * d);
    }
    Ok(3.0 * (sq.value() / BOOTSTRAP_ROUNDS as f64).sqrt())
}

/// Tracks `W1(U*^n start, reference)` for `n = 0..=n_max`, with the same
/// per-atom streams as [`push_cloud`].
pub fn convergence_rate(
    spec: &FloatSystem,
    start: &[FloatPoint],
    reference: &[FloatPoint],
    n_max: usize,
    seed: u64,
) -> Result<RateReport> {
    if start.is_empty() || reference.is_empty() {
        return Err(Error::EmptySamples);
    }
    let reference: Vec<f64> = reference.iter().map(|p| p.value).collect();
    let floor = noise_floor(&reference, seed)?;
    let mut rngs: Vec<ChaCha8Rng> = (0..start.len()).map(|k| substream(seed, k as u64)).collect();
    let mut cloud = start.to_vec();
    let values = |c: &[FloatPoint]| c.iter().map(|p| p.value).collect::<Vec<_>>();
    let mut distances = vec![w1_distance(&values(&cloud), &reference)?];
    for _ in 0..n_max {
        cloud
            .par_iter_mut()
            .zip(rngs.par_iter_mut())
            .try_for_each(|(x, rng)| -> Result<()> {
                *x = step_atom(spec, x, rng)?;
                Ok(())
            })?;
        distances.push(w1_distance(&values(&cloud), &reference)?);
    }
    let above = distances.iter().take_while(|&&d| d > floor).count();
    let ratios: Vec<f64> = distances[..above].windows(2).map(|w| w[1] / w[0]).collect();
    let geometric_mean = (above >= 2).then(|| (distances[above - 1] / distances[0]).powf(1.0 / (above - 1) as f64));
    Ok(RateReport { seed, atoms: start.len(), distances, noise_floor: floor, ratios, geometric_mean, bound: None })
}

/// The standard experiment: all atoms start at `x0`; the reference cloud is
/// the same start burned in under an unrelated seed.
pub fn rate_experiment(spec: &FloatSystem, x0: &FloatPoint, params: &RateParams) -> Result<RateReport> {
    spec.ensure_in_domain(x0)?;
    let reference = stationary_cloud(spec, x0, params.atoms, params.burn_in, params.seed ^ REFERENCE_SALT)?;
    convergence_rate(spec, &vec![*x0; params.atoms], &reference, params.n_max, params.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point;
    use crate::scalar::{int, rat};
    use crate::specimens;

    #[test]
    fn w1_matches_hand_values() {
        assert_eq!(w1_distance(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(w1_distance(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0);
        // uniform on {0, 1} against a point at 1/2
        assert_eq!(w1_distance(&[0.0, 1.0], &[0.5]).unwrap(), 0.5);
        assert_eq!(w1_distance(&[rat(0, 1), int(1), int(2)], &[int(1)]).unwrap(), rat(2, 3));
        assert!(matches!(w1_distance::<f64>(&[], &[1.0]), Err(Error::EmptySamples)));
    }

    #[test]
    fn unequal_sizes_agree_with_replication() {
        let a = [0.1, 0.7, 0.4];
        let b = [0.2, 0.9];
        let a2: Vec<f64> = a.iter().flat_map(|&x| [x, x]).collect();
        let b3: Vec<f64> = b.iter().flat_map(|&x| [x, x, x]).collect();
        let direct = w1_distance(&a, &b).unwrap();
        let paired = w1_distance(&a2, &b3).unwrap();
        assert!((direct - paired).abs() < 1e-12);
    }

    #[test]
    fn clouds_are_reproducible() {
        let spec = specimens::example2(rat(1, 2)).to_float();
        let x0 = Point::rational(1.0);
        let a = stationary_cloud(&spec, &x0, 100, 10, 5).unwrap();
        let b = stationary_cloud(&spec, &x0, 100, 10, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reference_against_itself_sits_at_the_floor() {
        let spec = specimens::example2(rat(1, 2)).to_float();
        let x0 = Point::rational(1.0);
        let reference = stationary_cloud(&spec, &x0, 2000, 60, 9).unwrap();
        let start = stationary_cloud(&spec, &x0, 2000, 60, 10).unwrap();
        let report = convergence_rate(&spec, &start, &reference, 5, 3).unwrap();
        assert!(report.geometric_mean.is_none());
        assert!(report.distances.iter().all(|&d| d < 2.0 * report.noise_floor));
    }
}
