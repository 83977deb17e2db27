//! Finite evidence about `xi(x, y)`: an exact tail table for short words and a
//! seeded Monte Carlo estimate of the drift of `log X_n`.

use std::borrow::Cow;
use std::fmt;
use std::fmt::Write;

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{cylinder_measure, joint_levels, Word};
use crate::dynamics::{HybridPoint, Orbit, StepLaw, DEFAULT_DENOMINATOR_BITS};
use crate::error::{Error, Result};
use crate::partition::{symbolic_chain, DEFAULT_BREAKPOINT_CAP};
use crate::sampling::{cumulative_thresholds, draw, substream};
use crate::scalar::{fmt_exact, int, rat, Rational, Scalar};
use crate::{ExactPoint, ExactSystem};

#[derive(Clone, Debug)]
pub struct XiParams {
    /// Deepest exhaustively enumerated word length (clamped to the budget).
    pub n_exact: usize,
    pub m_grid: Vec<Rational>,
    /// Steps per Monte Carlo path.
    pub n_mc: usize,
    /// Paths per direction.
    pub num_samples: usize,
    pub seed: u64,
    pub drift_z: f64,
    /// A tail mass within this of one at the largest `M` counts as certified singular.
    pub tail_tol: Rational,
    pub budget: u64,
    pub breakpoint_cap: usize,
    pub denominator_bits: u64,
    /// Set when equivalence is already certified at class level.
    pub certified_equivalent: bool,
}

impl XiParams {
    pub fn new(seed: u64) -> Self {
        XiParams {
            n_exact: 10,
            m_grid: (1..=10).map(|k| int(1 << k)).collect(),
            n_mc: 2000,
            num_samples: 4000,
            seed,
            drift_z: 4.0,
            tail_tol: rat(1, 1_000_000),
            budget: super::DEFAULT_BUDGET,
            breakpoint_cap: DEFAULT_BREAKPOINT_CAP,
            denominator_bits: DEFAULT_DENOMINATOR_BITS,
            certified_equivalent: false,
        }
    }
}

/// `P_x(X_n > M) + P_y(Y_n > M)`, a value in `[0, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailEntry {
    pub n: usize,
    pub m: Rational,
    pub mass: Rational,
}

/// Monte Carlo summary of `log X_n / n` along paths drawn from one measure.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftEstimate {
    /// Mean per-step increment over the finite paths.
    pub mean: f64,
    pub stderr: f64,
    /// `mean / stderr`; `0` when both vanish.
    pub z: f64,
    /// Paths that hit a label impossible under the other measure.
    pub infinite_paths: usize,
    /// Fraction of paths with ratio above each `M` after `n_mc` steps.
    pub tail_frequencies: Vec<(Rational, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    SingularCertified,
    SingularStatistical,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "equivalent",
            Verdict::SingularCertified => "singular_certified",
            Verdict::SingularStatistical => "singular_statistical",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Paths run on the finite labeled chain; exact in law.
    SymbolicChain,
    /// Paths run on points; used when no finite partition is available.
    PointOrbit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct XiReport {
    pub exact_depth: usize,
    pub exact_tail: Vec<TailEntry>,
    /// Shortest word charged by exactly one of the two measures, with both masses.
    pub witness: Option<(Word, Rational, Rational)>,
    pub under_x: DriftEstimate,
    pub under_y: DriftEstimate,
    pub mc_steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub verdict: Verdict,
    pub reason: String,
}

impl XiReport {
    /// Drift of `log X_n` under `P_x`.
    pub fn mc_drift(&self) -> f64 {
        self.under_x.mean
    }

    /// `n,M,exact_tail` rows, a blank line, then the summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,M,exact_tail\n");
        for t in &self.exact_tail {
            let _ = writeln!(out, "{},{},{}", t.n, fmt_exact(&t.m), fmt_exact(&t.mass));
        }
        let _ = writeln!(
            out,
            "\nverdict,drift,stderr,samples,seed,precision\n{},{:e},{:e},{},{},f64",
            self.verdict, self.under_x.mean, self.under_x.stderr, self.samples, self.seed
        );
        out
    }
}

/// Builds the exact tail table, runs the seeded drift test in both directions,
/// and grades the evidence.
pub fn xi_estimate(spec: &ExactSystem, x: &ExactPoint, y: &ExactPoint, params: &XiParams) -> Result<XiReport> {
    if params.n_mc == 0 || params.num_samples == 0 || params.m_grid.is_empty() || params.drift_z.is_nan() || params.drift_z <= 0.0 {
        return Err(Error::InvalidArgument("xi parameters must be positive".into()));
    }
    spec.ensure_in_domain(x)?;
    spec.ensure_in_domain(y)?;

    let depth = affordable_depth(spec.edges.len(), params.n_exact, params.budget);
    let levels = joint_levels(spec, x, y, depth, params.budget)?;
    let mut exact_tail = Vec::new();
    for (n, level) in levels.iter().enumerate().skip(1) {
        for m in &params.m_grid {
            let mut mass = Rational::zero();
            for c in level {
                if c.ratio().exceeds(m) {
                    mass += &c.px;
                }
                if c.inverse_ratio().exceeds(m) {
                    mass += &c.py;
                }
            }
            exact_tail.push(TailEntry { n, m: m.clone(), mass });
        }
    }
    let witness = levels
        .iter()
        .flatten()
        .find(|c| c.px.is_zero() != c.py.is_zero())
        .map(|c| (c.word.clone(), c.px.clone(), c.py.clone()));

    let (sampler, under_x, under_y, path_witness) = match symbolic_chain(spec, params.breakpoint_cap) {
        Ok((part, chain)) => match (part.locate(x), part.locate(y)) {
            (Some(sx), Some(sy)) => {
                let walker = ChainWalker::new(&chain);
                let (ux, wx) = drift(&walker, sx, sy, params, 0)?;
                let (uy, wy) = drift(&walker, sy, sx, params, 1)?;
                (SamplerKind::SymbolicChain, ux, uy, wx.map(|w| (true, w)).or(wy.map(|w| (false, w))))
            }
            _ => orbit_drift(spec, x, y, params)?,
        },
        Err(_) => orbit_drift(spec, x, y, params)?,
    };

    // Monte Carlo infinite paths count only once their cylinder is re-checked exactly.
    let mut verified_path = None;
    if let Some((forward, labels)) = path_witness {
        let word = Word(labels.iter().map(|&k| spec.edges[k].id).collect());
        let (a, b) = if forward { (x, y) } else { (y, x) };
        let ma = cylinder_measure(spec, a, &word)?;
        let mb = cylinder_measure(spec, b, &word)?;
        if !ma.is_zero() && mb.is_zero() {
            verified_path = Some(if forward { (word, ma, mb) } else { (word, mb, ma) });
        }
    }

    let z = under_x.z.max(under_y.z);
    let top = exact_tail.last().map(|t| t.mass.clone()).unwrap_or_else(Rational::zero);
    let (verdict, reason) = if let Some((w, px, py)) = &witness {
        (Verdict::SingularCertified, format!("word {w} has mass {px} under x and {py} under y"))
    } else if top >= Rational::one() - params.tail_tol.clone() {
        (Verdict::SingularCertified, format!("tail mass {top} at the deepest level and largest M"))
    } else if let Some((w, px, py)) = &verified_path {
        (Verdict::SingularCertified, format!("sampled word of length {} has mass {} under x and {} under y", w.len(), short(px), short(py)))
    } else if params.certified_equivalent {
        (Verdict::Equivalent, "class-level certificate supplied".to_string())
    } else if z > params.drift_z {
        (Verdict::SingularStatistical, format!("log-ratio drift z-score {z:.3} exceeds {}", params.drift_z))
    } else if exact_tail.iter().all(|t| t.mass.is_zero()) && z.abs() < params.drift_z {
        (Verdict::Equivalent, format!("all exact tails vanish and drift z-score is {z:.3}"))
    } else {
        (Verdict::Inconclusive, format!("nonzero exact tails without a singularity witness; z-score {z:.3}"))
    };

    Ok(XiReport {
        exact_depth: depth,
        exact_tail,
        witness: witness.or(verified_path),
        under_x,
        under_y,
        mc_steps: params.n_mc,
        samples: params.num_samples,
        seed: params.seed,
        sampler,
        verdict,
        reason,
    })
}

fn short(r: &Rational) -> String {
    if r.is_zero() {
        "0".into()
    } else {
        format!("~{:e}", r.to_f64())
    }
}

fn affordable_depth(edges: usize, wanted: usize, budget: u64) -> usize {
    let mut depth = 0;
    while depth < wanted && (edges as u128).checked_pow(depth as u32 + 1).is_some_and(|r| r <= budget as u128) {
        depth += 1;
    }
    depth
}

type DriftOutcome = (SamplerKind, DriftEstimate, DriftEstimate, Option<(bool, Vec<usize>)>);

fn orbit_drift(spec: &ExactSystem, x: &ExactPoint, y: &ExactPoint, params: &XiParams) -> Result<DriftOutcome> {
    let orbit = Orbit::new(spec, params.denominator_bits);
    let walker = OrbitWalker { orbit };
    let (sx, sy) = (walker.orbit.start(x)?, walker.orbit.start(y)?);
    let (ux, wx) = drift(&walker, sx.clone(), sy.clone(), params, 0)?;
    let (uy, wy) = drift(&walker, sy, sx, params, 1)?;
    Ok((SamplerKind::PointOrbit, ux, uy, wx.map(|w| (true, w)).or(wy.map(|w| (false, w)))))
}

trait Walker: Sync {
    type State: Clone + Send + Sync;
    fn law(&self, s: &Self::State) -> Result<Cow<'_, StepLaw>>;
    fn advance(&self, s: &Self::State, label: usize) -> Self::State;
}

struct ChainWalker {
    laws: Vec<StepLaw>,
    targets: Vec<Vec<Option<usize>>>,
}

impl ChainWalker {
    fn new(chain: &crate::partition::LabeledChain) -> Self {
        let mut laws = Vec::with_capacity(chain.num_states());
        let mut targets = Vec::with_capacity(chain.num_states());
        for row in &chain.rows {
            let probs: Vec<Rational> = row.iter().map(|t| t.as_ref().map_or_else(Rational::zero, |t| t.prob.clone())).collect();
            let log_probs = probs
                .iter()
                .map(|p| if p.is_zero() { f64::NEG_INFINITY } else { p.to_f64().ln() })
                .collect();
            laws.push(StepLaw { thresholds: cumulative_thresholds(&probs), log_probs });
            targets.push(row.iter().map(|t| t.as_ref().map(|t| t.target)).collect());
        }
        ChainWalker { laws, targets }
    }
}

impl Walker for ChainWalker {
    type State = usize;

    fn law(&self, s: &usize) -> Result<Cow<'_, StepLaw>> {
        Ok(Cow::Borrowed(&self.laws[*s]))
    }

    fn advance(&self, s: &usize, label: usize) -> usize {
        self.targets[*s][label].expect("labels are only followed where they have positive probability")
    }
}

struct OrbitWalker<'a> {
    orbit: Orbit<'a>,
}

impl Walker for OrbitWalker<'_> {
    type State = HybridPoint;

    fn law(&self, s: &HybridPoint) -> Result<Cow<'_, StepLaw>> {
        Ok(Cow::Owned(self.orbit.law(s)?))
    }

    fn advance(&self, s: &HybridPoint, label: usize) -> HybridPoint {
        self.orbit.step(s, label)
    }
}

struct PathOutcome {
    log_ratio: f64,
    /// Label indices up to and including the first one impossible for the other side.
    infinite: Option<Vec<usize>>,
}

fn run_path<W: Walker>(w: &W, a: W::State, b: W::State, steps: usize, seed: u64, stream: u64) -> Result<PathOutcome> {
    let mut rng = substream(seed, stream);
    let (mut a, mut b) = (a, b);
    let mut log_ratio = 0.0;
    let mut labels = Vec::with_capacity(steps);
    for _ in 0..steps {
        let la = w.law(&a)?;
        let k = draw(&mut rng, &la.thresholds).ok_or_else(|| Error::ZeroMassState("sampled path".into()))?;
        labels.push(k);
        let lb = w.law(&b)?;
        if lb.log_probs[k] == f64::NEG_INFINITY {
            return Ok(PathOutcome { log_ratio: f64::INFINITY, infinite: Some(labels) });
        }
        log_ratio += la.log_probs[k] - lb.log_probs[k];
        a = w.advance(&a, k);
        b = w.advance(&b, k);
    }
    Ok(PathOutcome { log_ratio, infinite: None })
}

/// Paths under the first state's measure; path `k` uses stream `2k + direction`.
fn drift<W: Walker>(
    w: &W,
    a: W::State,
    b: W::State,
    params: &XiParams,
    direction: u64,
) -> Result<(DriftEstimate, Option<Vec<usize>>)> {
    let outcomes: Vec<PathOutcome> = (0..params.num_samples as u64)
        .into_par_iter()
        .map(|k| run_path(w, a.clone(), b.clone(), params.n_mc, params.seed, 2 * k + direction))
        .collect::<Result<_>>()?;

    let n = params.n_mc as f64;
    let finite: Vec<f64> = outcomes.iter().filter(|o| o.infinite.is_none()).map(|o| o.log_ratio / n).collect();
    let infinite_paths = outcomes.len() - finite.len();
    let (mean, stderr) = mean_stderr(&finite);
    let z = if stderr > 0.0 {
        mean / stderr
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    };
    let total = outcomes.len() as f64;
    let tail_frequencies = params
        .m_grid
        .iter()
        .map(|m| {
            let cut = m.to_f64().ln();
            let hits = outcomes.iter().filter(|o| o.infinite.is_some() || o.log_ratio > cut).count();
            (m.clone(), hits as f64 / total)
        })
        .collect();
    let first_infinite = outcomes.into_iter().find_map(|o| o.infinite);
    Ok((DriftEstimate { mean, stderr, z, infinite_paths, tail_frequencies }, first_infinite))
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
