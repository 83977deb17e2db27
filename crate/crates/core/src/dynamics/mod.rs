//! Seeded simulation of orbits and point clouds, ergodic averages,
//! contraction estimates and empirical convergence rates.

mod contraction;
mod observable;
mod orbit;
mod rate;

pub use contraction::{contraction_estimate, ContractionEstimate};
pub use observable::Observable;
pub use orbit::{HybridPoint, Orbit, StepLaw, DEFAULT_DENOMINATOR_BITS};
pub use rate::{convergence_rate, push_cloud, rate_experiment, stationary_cloud, w1_distance, RateParams, RateReport};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{EdgeId, Interval, PointClass};
use crate::partition::FundamentalPartition;
use crate::sampling::{draw, substream};
use crate::scalar::{fmt_exact, Scalar};
use crate::{ExactPoint, ExactSystem, FloatPoint};

/// A simulated orbit `x_0, ..., x_n` with the labels that produced it. Points
/// are exact until their denominators pass the cap, `f64` from then on.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub seed: u64,
    pub labels: Vec<EdgeId>,
    /// `x_0, x_1, ...` while exact.
    pub exact_points: Vec<ExactPoint>,
    /// The remaining points.
    pub approx_points: Vec<FloatPoint>,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.labels.len()
    }

    pub fn start(&self) -> &ExactPoint {
        &self.exact_points[0]
    }

    pub fn point(&self, k: usize) -> HybridPoint {
        match self.exact_points.get(k) {
            Some(p) => HybridPoint::Exact(p.clone()),
            None => HybridPoint::Approx(self.approx_points[k - self.exact_points.len()]),
        }
    }

    /// `x_0, ..., x_{n-1}` as `f64`.
    pub fn visited_f64(&self) -> impl Iterator<Item = f64> + '_ {
        self.exact_points
            .iter()
            .map(|p| p.value.to_f64())
            .chain(self.approx_points.iter().map(|p| p.value))
            .take(self.steps())
    }

    /// `step,label,point,precision`; step 0 is the start and has no label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,label,point,precision\n");
        let n_exact = self.exact_points.len();
        for k in 0..=self.steps() {
            let label = if k == 0 { String::new() } else { self.labels[k - 1].to_string() };
            if k < n_exact {
                let _ = writeln!(out, "{k},{label},{},exact", fmt_exact(&self.exact_points[k].value));
            } else {
                let _ = writeln!(out, "{k},{label},{:e},f64", self.approx_points[k - n_exact].value);
            }
        }
        out
    }
}

/// `steps` transitions from `x0`, drawing labels from stream 0 of `seed`.
pub fn simulate(spec: &ExactSystem, x0: &ExactPoint, steps: usize, seed: u64) -> Result<Trace> {
    simulate_with_cap(spec, x0, steps, seed, DEFAULT_DENOMINATOR_BITS)
}

pub fn simulate_with_cap(spec: &ExactSystem, x0: &ExactPoint, steps: usize, seed: u64, cap_bits: u64) -> Result<Trace> {
    let orbit = Orbit::new(spec, cap_bits);
    let mut x = orbit.start(x0)?;
    let mut rng = substream(seed, 0);
    let mut trace = Trace {
        seed,
        labels: Vec::with_capacity(steps),
        exact_points: Vec::new(),
        approx_points: Vec::new(),
    };
    let push = |trace: &mut Trace, x: &HybridPoint| match x {
        HybridPoint::Exact(p) => trace.exact_points.push(p.clone()),
        HybridPoint::Approx(p) => trace.approx_points.push(*p),
    };
    push(&mut trace, &x);
    for _ in 0..steps {
        let t = orbit.thresholds(&x)?;
        let k = draw(&mut rng, &t).ok_or_else(|| orbit.zero_mass(&x))?;
        trace.labels.push(spec.edges[k].id);
        x = orbit.step(&x, k);
        push(&mut trace, &x);
    }
    Ok(trace)
}

/// Compensated (Neumaier) summation.
#[derive(Default)]
pub(crate) struct Sum {
    total: f64,
    carry: f64,
}

impl Sum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.total + v;
        if self.total.abs() >= v.abs() {
            self.carry += (self.total - t) + v;
        } else {
            self.carry += (v - t) + self.total;
        }
        self.total = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.total + self.carry
    }
}

/// `(1/n) sum_{k<n} f(x_k)` over a trace of `n` steps. Exact points are
/// evaluated exactly before rounding; a constant `f` returns its value.
pub fn ergodic_average(trace: &Trace, f: &Observable) -> Result<f64> {
    let n = trace.steps();
    if n == 0 {
        return Err(Error::EmptyTrace);
    }
    if let Some(c) = f.as_constant() {
        return Ok(c.to_f64());
    }
    let mut sum = Sum::default();
    for p in trace.exact_points.iter().take(n) {
        sum.add(f.eval(&p.value).to_f64());
    }
    for p in trace.approx_points.iter().take(n.saturating_sub(trace.exact_points.len())) {
        sum.add(f.eval_f64(p.value));
    }
    Ok(sum.value() / n as f64)
}

/// Fraction of `x_0, ..., x_{n-1}` in each class of the fundamental system.
pub fn class_frequencies(trace: &Trace, fp: &FundamentalPartition) -> Result<Vec<f64>> {
    let n = trace.steps();
    if n == 0 {
        return Err(Error::EmptyTrace);
    }
    let mut counts = vec![0usize; fp.num_classes()];
    for p in trace.exact_points.iter().take(n) {
        counts[fp.classify_point(p)?] += 1;
    }
    let float_cells: Vec<(Interval<f64>, PointClass)> = fp
        .partition
        .cells
        .iter()
        .map(|c| (c.interval.map_scalar(Scalar::to_f64), c.points))
        .collect();
    for p in trace.approx_points.iter().take(n.saturating_sub(trace.exact_points.len())) {
        let cell = float_cells
            .iter()
            .position(|(iv, pc)| iv.contains(&p.value) && pc.admits(p.irrational))
            .ok_or_else(|| Error::OutOfDomain { point: p.to_string(), domain: "the partition".into() })?;
        counts[fp.class_of[cell]] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / n as f64).collect())
}
