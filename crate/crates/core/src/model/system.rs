use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use super::{AffineMap, Interval, Point, ProbabilityFunction};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Label of an edge of the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct EdgeId(pub u32);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<S> {
    pub id: EdgeId,
    pub map: AffineMap<S>,
    pub prob: ProbabilityFunction<S>,
}

/// A random dynamical system on a closed interval: finitely many affine maps,
/// each chosen with a place-dependent probability.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec<S> {
    pub domain: Interval<S>,
    pub edges: Vec<Edge<S>>,
}

impl<S: Scalar> SystemSpec<S> {
    /// Structural checks only: ordered closed domain, at least one edge, unique ids.
    /// Probability sums and map ranges are checked by [`super::validate_system`].
    pub fn new(lo: S, hi: S, edges: Vec<Edge<S>>) -> Result<Self> {
        if lo.partial_cmp(&hi) != Some(Ordering::Less) {
            return Err(Error::InvalidSystem(format!("domain [{lo}, {hi}] is empty or degenerate")));
        }
        if edges.is_empty() {
            return Err(Error::InvalidSystem("system has no edges".into()));
        }
        let mut seen = HashSet::new();
        for e in &edges {
            if !seen.insert(e.id) {
                return Err(Error::InvalidSystem(format!("duplicate edge id {}", e.id)));
            }
        }
        Ok(SystemSpec { domain: Interval::closed(lo, hi), edges })
    }

    pub fn edge_index(&self, id: EdgeId) -> Result<usize> {
        self.edges.iter().position(|e| e.id == id).ok_or(Error::UnknownEdge(id))
    }

    pub fn edge(&self, id: EdgeId) -> Result<&Edge<S>> {
        self.edges.iter().find(|e| e.id == id).ok_or(Error::UnknownEdge(id))
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.iter().map(|e| e.id).collect()
    }

    pub fn ensure_in_domain(&self, x: &Point<S>) -> Result<()> {
        if self.domain.contains(&x.value) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { point: x.to_string(), domain: self.domain.to_string() })
        }
    }

    pub fn apply_map(&self, id: EdgeId, x: &Point<S>) -> Result<Point<S>> {
        let edge = self.edge(id)?;
        self.ensure_in_domain(x)?;
        Ok(edge.map.apply(x))
    }

    pub fn prob(&self, id: EdgeId, x: &Point<S>) -> Result<S> {
        let edge = self.edge(id)?;
        self.ensure_in_domain(x)?;
        eval_prob(edge, x)
    }

    /// All edge probabilities at `x`, in edge order.
    pub fn probs(&self, x: &Point<S>) -> Result<Vec<S>> {
        self.ensure_in_domain(x)?;
        self.edges.iter().map(|e| eval_prob(e, x)).collect()
    }

    /// `(U f)(x) = sum_e p_e(x) f(w_e(x))`. Edges with zero probability at `x`
    /// contribute nothing and their maps are not evaluated.
    pub fn markov_operator(&self, f: impl Fn(&Point<S>) -> S, x: &Point<S>) -> Result<S> {
        self.ensure_in_domain(x)?;
        let mut acc = S::zero();
        for e in &self.edges {
            let p = eval_prob(e, x)?;
            if !p.is_zero() {
                acc = acc + p * f(&e.map.apply(x));
            }
        }
        Ok(acc)
    }

    /// One step of the adjoint `U*` on a finitely supported measure.
    pub fn push_forward(&self, nu: &DiscreteMeasure<S>) -> Result<DiscreteMeasure<S>> {
        let mut atoms = Vec::new();
        for (x, weight) in &nu.atoms {
            self.ensure_in_domain(x)?;
            for e in &self.edges {
                let p = eval_prob(e, x)?;
                if !p.is_zero() && !weight.is_zero() {
                    atoms.push((e.map.apply(x), weight.clone() * p));
                }
            }
        }
        Ok(DiscreteMeasure::coalesced(atoms))
    }

    pub fn is_piecewise(&self) -> bool {
        self.edges.iter().all(|e| e.prob.is_piecewise())
    }

    pub fn is_rationality_only(&self) -> bool {
        self.edges.iter().all(|e| !e.prob.is_piecewise())
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SystemSpec<T> {
        SystemSpec {
            domain: self.domain.map_scalar(&f),
            edges: self
                .edges
                .iter()
                .map(|e| Edge { id: e.id, map: e.map.map_scalar(&f), prob: e.prob.map_scalar(&f) })
                .collect(),
        }
    }
}

impl SystemSpec<Rational> {
    /// The same system with every coefficient rounded to `f64`.
    pub fn to_float(&self) -> SystemSpec<f64> {
        self.map_scalar(Scalar::to_f64)
    }
}

fn eval_prob<S: Scalar>(edge: &Edge<S>, x: &Point<S>) -> Result<S> {
    edge.prob
        .eval(x)
        .ok_or_else(|| Error::Uncovered { edge: edge.id, point: x.to_string() })
}

/// A finitely supported measure.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<S> {
    pub atoms: Vec<(Point<S>, S)>,
}

impl<S: Scalar> DiscreteMeasure<S> {
    pub fn dirac(x: Point<S>) -> Self {
        DiscreteMeasure { atoms: vec![(x, S::one())] }
    }

    /// Checks nonnegative weights; the total must be one exactly for exact scalars.
    pub fn new(atoms: Vec<(Point<S>, S)>) -> Result<Self> {
        if atoms.iter().any(|(_, w)| w.is_negative()) {
            return Err(Error::InvalidArgument("negative atom weight".into()));
        }
        let m = DiscreteMeasure::coalesced(atoms);
        if S::EXACT && !m.total_mass().is_one() {
            return Err(Error::InvalidArgument(format!("total mass {} is not one", m.total_mass())));
        }
        Ok(m)
    }

    /// Merges identical points, drops zero weights, sorts by position.
    pub fn coalesced(mut atoms: Vec<(Point<S>, S)>) -> Self {
        atoms.retain(|(_, w)| !w.is_zero());
        atoms.sort_by(|(a, _), (b, _)| {
            a.value
                .partial_cmp(&b.value)
                .unwrap_or(Ordering::Equal)
                .then(a.irrational.cmp(&b.irrational))
        });
        let mut out: Vec<(Point<S>, S)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match out.last_mut() {
                Some((y, acc)) if *y == x => *acc = acc.clone() + w,
                _ => out.push((x, w)),
            }
        }
        DiscreteMeasure { atoms: out }
    }

    pub fn total_mass(&self) -> S {
        self.atoms.iter().fold(S::zero(), |acc, (_, w)| acc + w.clone())
    }

    pub fn integrate(&self, f: impl Fn(&Point<S>) -> S) -> S {
        self.atoms.iter().fold(S::zero(), |acc, (x, w)| acc + w.clone() * f(x))
    }
}
