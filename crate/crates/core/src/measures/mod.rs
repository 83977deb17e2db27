//! Exact computation on code space: cylinder masses `P_x([e_1..e_n])`, the
//! likelihood ratios `X_n = P_x / P_y` on depth-`n` cylinders, and their tails.

mod xi;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{EdgeId, Point, SystemSpec};
use crate::scalar::Scalar;

pub use xi::{xi_estimate, DriftEstimate, SamplerKind, TailEntry, Verdict, XiParams, XiReport};

/// Default cap on the number of depth-`n` words an exhaustive routine may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// A finite label sequence, naming the cylinder of paths that start with it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<EdgeId>);

impl Word {
    pub fn from_ids(ids: &[u32]) -> Self {
        Word(ids.iter().map(|&i| EdgeId(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extended(&self, e: EdgeId) -> Word {
        let mut v = self.0.clone();
        v.push(e);
        Word(v)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", ids.join(","))
    }
}

/// A ratio that may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtendedRatio<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> ExtendedRatio<S> {
    /// `num / den` with `0` whenever `num = 0` and `infinity` when only `den = 0`.
    pub fn of(num: &S, den: &S) -> Self {
        if num.is_zero() {
            ExtendedRatio::Finite(S::zero())
        } else if den.is_zero() {
            ExtendedRatio::Infinite
        } else {
            ExtendedRatio::Finite(num.clone() / den.clone())
        }
    }

    pub fn exceeds(&self, m: &S) -> bool {
        match self {
            ExtendedRatio::Finite(r) => r > m,
            ExtendedRatio::Infinite => true,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedRatio::Infinite)
    }
}

impl<S: Scalar> fmt::Display for ExtendedRatio<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRatio::Finite(r) => write!(f, "{r}"),
            ExtendedRatio::Infinite => f.write_str("inf"),
        }
    }
}

fn check_budget<S>(spec: &SystemSpec<S>, depth: usize, budget: u64) -> Result<()> {
    let required = (spec.edges.len() as u128).checked_pow(depth as u32);
    match required {
        Some(r) if r <= budget as u128 => Ok(()),
        Some(r) => Err(Error::BudgetExceeded { required: r.to_string(), budget }),
        None => Err(Error::BudgetExceeded {
            required: format!("{}^{}", spec.edges.len(), depth),
            budget,
        }),
    }
}

/// `P_x([e_1..e_n]) = p_{e_1}(x) p_{e_2}(w_{e_1} x) ...`
///
/// Stops at the first zero factor without applying the remaining maps.
pub fn cylinder_measure<S: Scalar>(spec: &SystemSpec<S>, x: &Point<S>, word: &Word) -> Result<S> {
    let idx: Vec<usize> = word.0.iter().map(|&e| spec.edge_index(e)).collect::<Result<_>>()?;
    spec.ensure_in_domain(x)?;
    let mut mass = S::one();
    let mut point = x.clone();
    for (k, &i) in idx.iter().enumerate() {
        let edge = &spec.edges[i];
        let p = spec.prob(edge.id, &point)?;
        if p.is_zero() {
            return Ok(S::zero());
        }
        mass = mass * p;
        if k + 1 < idx.len() {
            point = edge.map.apply(&point);
        }
    }
    Ok(mass)
}

/// Every depth-`depth` word with its exact mass under `P_x`, in lexicographic
/// edge order. Zero-mass words are kept only when `keep_zero` is set.
pub fn enumerate_cylinders<S: Scalar>(
    spec: &SystemSpec<S>,
    x: &Point<S>,
    depth: usize,
    budget: u64,
    keep_zero: bool,
) -> Result<Vec<(Word, S)>> {
    check_budget(spec, depth, budget)?;
    spec.ensure_in_domain(x)?;
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(depth);
    descend(spec, x, S::one(), depth, keep_zero, &mut word, &mut out)?;
    Ok(out)
}

fn descend<S: Scalar>(
    spec: &SystemSpec<S>,
    x: &Point<S>,
    mass: S,
    remaining: usize,
    keep_zero: bool,
    word: &mut Vec<EdgeId>,
    out: &mut Vec<(Word, S)>,
) -> Result<()> {
    if remaining == 0 {
        if keep_zero || !mass.is_zero() {
            out.push((Word(word.clone()), mass));
        }
        return Ok(());
    }
    let probs = if mass.is_zero() { None } else { Some(spec.probs(x)?) };
    for (i, e) in spec.edges.iter().enumerate() {
        let p = probs.as_ref().map_or_else(S::zero, |ps| ps[i].clone());
        if p.is_zero() && !keep_zero {
            continue;
        }
        word.push(e.id);
        if p.is_zero() {
            descend(spec, x, S::zero(), remaining - 1, keep_zero, word, out)?;
        } else {
            descend(spec, &e.map.apply(x), mass.clone() * p, remaining - 1, keep_zero, word, out)?;
        }
        word.pop();
    }
    Ok(())
}

/// A cylinder with its mass under two starting points.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCylinder<S> {
    pub word: Word,
    pub px: S,
    pub py: S,
}

impl<S: Scalar> JointCylinder<S> {
    /// `X_n` on this cylinder.
    pub fn ratio(&self) -> ExtendedRatio<S> {
        ExtendedRatio::of(&self.px, &self.py)
    }

    /// `Y_n` on this cylinder.
    pub fn inverse_ratio(&self) -> ExtendedRatio<S> {
        ExtendedRatio::of(&self.py, &self.px)
    }
}

/// Joint masses level by level: entry `k` holds every depth-`k` word that is
/// charged by `P_x` or `P_y`. Level 0 is the empty word.
pub fn joint_levels<S: Scalar>(
    spec: &SystemSpec<S>,
    x: &Point<S>,
    y: &Point<S>,
    depth: usize,
    budget: u64,
) -> Result<Vec<Vec<JointCylinder<S>>>> {
    check_budget(spec, depth, budget)?;
    spec.ensure_in_domain(x)?;
    spec.ensure_in_domain(y)?;
    let mut levels = vec![vec![JointCylinder { word: Word::default(), px: S::one(), py: S::one() }]];
    let mut frontier = vec![(x.clone(), y.clone())];
    for _ in 0..depth {
        let prev = levels.last().expect("level 0 exists");
        let mut next = Vec::new();
        let mut next_frontier = Vec::new();
        for (node, (xp, yp)) in prev.iter().zip(&frontier) {
            let px_step = if node.px.is_zero() { None } else { Some(spec.probs(xp)?) };
            let py_step = if node.py.is_zero() { None } else { Some(spec.probs(yp)?) };
            for (i, e) in spec.edges.iter().enumerate() {
                let px = px_step.as_ref().map_or_else(S::zero, |p| node.px.clone() * p[i].clone());
                let py = py_step.as_ref().map_or_else(S::zero, |p| node.py.clone() * p[i].clone());
                if px.is_zero() && py.is_zero() {
                    continue;
                }
                next.push(JointCylinder { word: node.word.extended(e.id), px, py });
                next_frontier.push((e.map.apply(xp), e.map.apply(yp)));
            }
        }
        levels.push(next);
        frontier = next_frontier;
    }
    Ok(levels)
}

/// `X_n` on the cylinder `word`.
pub fn likelihood_ratio<S: Scalar>(
    spec: &SystemSpec<S>,
    x: &Point<S>,
    y: &Point<S>,
    word: &Word,
) -> Result<ExtendedRatio<S>> {
    spec.ensure_in_domain(y)?;
    let px = cylinder_measure(spec, x, word)?;
    let py = cylinder_measure(spec, y, word)?;
    Ok(ExtendedRatio::of(&px, &py))
}

/// Largest gap, over depth-`m` cylinders `C` with `P_y(C) > 0`, between
/// `int_C X_n dP_y` and `int_C X_m dP_y`.
///
/// `X_n dP_y` charges only cylinders with `P_y > 0`, so the gap is zero exactly
/// when `P_x` restricted to depth `n` is absolutely continuous with respect to
/// `P_y` inside `C`; otherwise it equals the `P_x`-mass of the `P_y`-null
/// depth-`n` cylinders in `C`.
pub fn martingale_discrepancy<S: Scalar>(
    spec: &SystemSpec<S>,
    x: &Point<S>,
    y: &Point<S>,
    m: usize,
    n: usize,
    budget: u64,
) -> Result<S> {
    if m > n {
        return Err(Error::InvalidArgument(format!("martingale depths need m <= n, got m={m}, n={n}")));
    }
    let levels = joint_levels(spec, x, y, n, budget)?;
    let mut integral_n: HashMap<Word, S> = HashMap::new();
    for c in &levels[n] {
        if !c.py.is_zero() {
            let slot = integral_n.entry(c.word.prefix(m)).or_insert_with(S::zero);
            *slot = slot.clone() + c.px.clone();
        }
    }
    let mut worst = S::zero();
    for c in levels[m].iter().filter(|c| !c.py.is_zero()) {
        // X_m * P_y(C) = P_x(C) because P_y(C) > 0
        let lhs = integral_n.get(&c.word).cloned().unwrap_or_else(S::zero);
        let gap = (lhs - c.px.clone()).abs();
        if gap > worst {
            worst = gap;
        }
    }
    Ok(worst)
}

/// `P_x(X_n > M)`; cylinders on the infinite branch always count.
pub fn tail_mass_exact<S: Scalar>(
    spec: &SystemSpec<S>,
    x: &Point<S>,
    y: &Point<S>,
    n: usize,
    threshold: &S,
    budget: u64,
) -> Result<S> {
    let levels = joint_levels(spec, x, y, n, budget)?;
    Ok(levels[n]
        .iter()
        .filter(|c| c.ratio().exceeds(threshold))
        .fold(S::zero(), |acc, c| acc + c.px.clone()))
}
