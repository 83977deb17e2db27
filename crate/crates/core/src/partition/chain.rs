use num_traits::{One, Zero};

use super::{base_partition, IntervalPartition};
use crate::error::{Error, Result};
use crate::measures::Word;
use crate::model::{EdgeId, PointClass};
use crate::scalar::Rational;
use crate::{ExactPoint, ExactSystem};

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub target: usize,
    pub prob: Rational,
}

/// A finite Markov chain with labeled transitions and constant probabilities.
///
/// `rows[s][k]` is the move from state `s` under label `labels[k]`, present
/// exactly when its probability is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledChain {
    pub labels: Vec<EdgeId>,
    pub rows: Vec<Vec<Option<Transition>>>,
    /// One starting point per state.
    pub reps: Vec<ExactPoint>,
}

impl LabeledChain {
    /// Checks shapes, targets, positivity and that each row sums to one.
    pub fn new(labels: Vec<EdgeId>, rows: Vec<Vec<Option<Transition>>>, reps: Vec<ExactPoint>) -> Result<Self> {
        if reps.len() != rows.len() {
            return Err(Error::InvalidArgument("one representative point per state".into()));
        }
        for (s, row) in rows.iter().enumerate() {
            if row.len() != labels.len() {
                return Err(Error::InvalidArgument(format!("state {s} has {} entries for {} labels", row.len(), labels.len())));
            }
            let mut total = Rational::zero();
            for t in row.iter().flatten() {
                if t.target >= rows.len() {
                    return Err(Error::InvalidState(t.target));
                }
                if !(t.prob > Rational::zero()) {
                    return Err(Error::InvalidArgument(format!("state {s} lists a non-positive transition")));
                }
                total += &t.prob;
            }
            if !total.is_one() {
                return Err(Error::ZeroMassState(format!("chain state {s} (total {total})")));
            }
        }
        Ok(LabeledChain { labels, rows, reps })
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn check_state(&self, s: usize) -> Result<()> {
        if s < self.rows.len() {
            Ok(())
        } else {
            Err(Error::InvalidState(s))
        }
    }

    pub fn prob(&self, s: usize, k: usize) -> Rational {
        self.rows[s][k].as_ref().map_or_else(Rational::zero, |t| t.prob.clone())
    }

    pub fn target(&self, s: usize, k: usize) -> Option<usize> {
        self.rows[s][k].as_ref().map(|t| t.target)
    }

    pub fn supports(&self, s: usize, k: usize) -> bool {
        self.rows[s][k].is_some()
    }

    pub fn label_index(&self, e: EdgeId) -> Result<usize> {
        self.labels.iter().position(|&l| l == e).ok_or(Error::UnknownEdge(e))
    }

    /// Mass of a cylinder under the chain started in `s`.
    pub fn word_mass(&self, s: usize, word: &Word) -> Result<Rational> {
        self.check_state(s)?;
        let mut state = s;
        let mut mass = Rational::one();
        for &e in &word.0 {
            match &self.rows[state][self.label_index(e)?] {
                Some(t) => {
                    mass *= &t.prob;
                    state = t.target;
                }
                None => return Ok(Rational::zero()),
            }
        }
        Ok(mass)
    }

    /// State-to-state matrix, summing parallel labels.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.num_states();
        let mut m = vec![vec![Rational::zero(); n]; n];
        for (s, row) in self.rows.iter().enumerate() {
            for t in row.iter().flatten() {
                m[s][t.target] += &t.prob;
            }
        }
        m
    }

    /// The sub-chain on a closed set of states, renumbered in the given order.
    pub fn restrict(&self, states: &[usize]) -> Result<LabeledChain> {
        let mut index = vec![None; self.num_states()];
        for (new, &old) in states.iter().enumerate() {
            self.check_state(old)?;
            index[old] = Some(new);
        }
        let mut rows = Vec::with_capacity(states.len());
        for &old in states {
            let mut row = Vec::with_capacity(self.labels.len());
            for t in &self.rows[old] {
                row.push(match t {
                    Some(t) => Some(Transition {
                        target: index[t.target].ok_or_else(|| {
                            Error::InvalidArgument(format!("state {old} leaves the selected states"))
                        })?,
                        prob: t.prob.clone(),
                    }),
                    None => None,
                });
            }
            rows.push(row);
        }
        LabeledChain::new(self.labels.clone(), rows, states.iter().map(|&s| self.reps[s].clone()).collect())
    }
}

/// Reads off the constant probabilities and single-cell images of a partition.
pub fn extract_symbolic_chain(spec: &ExactSystem, part: &IntervalPartition) -> Result<LabeledChain> {
    let mut rows = Vec::with_capacity(part.cells.len());
    for cell in &part.cells {
        let mut row = Vec::with_capacity(spec.edges.len());
        for e in &spec.edges {
            let p = e.prob.value_on(&cell.interval, cell.points).ok_or_else(|| Error::NonConstantOnCell {
                cell: cell.to_string(),
                edge: e.id,
            })?;
            if p.is_zero() {
                row.push(None);
                continue;
            }
            let image = e.map.image(&cell.interval);
            let constant = e.map.slope.is_zero();
            let fits = |c: &super::Cell| {
                image.is_subset_of(&c.interval)
                    && match c.points {
                        PointClass::All => true,
                        PointClass::Rationals => constant || cell.points == PointClass::Rationals,
                        PointClass::Irrationals => !constant && cell.points == PointClass::Irrationals,
                    }
            };
            let mut hits = part.cells.iter().enumerate().filter(|(_, c)| fits(c));
            match (hits.next(), hits.next()) {
                (Some((t, _)), None) => row.push(Some(Transition { target: t, prob: p })),
                _ => return Err(Error::ImageSplitsCells { cell: cell.to_string(), edge: e.id }),
            }
        }
        rows.push(row);
    }
    LabeledChain::new(spec.edge_ids(), rows, part.cells.iter().map(|c| c.representative()).collect())
}

/// [`base_partition`] followed by [`extract_symbolic_chain`].
pub fn symbolic_chain(spec: &ExactSystem, cap: usize) -> Result<(IntervalPartition, LabeledChain)> {
    let part = base_partition(spec, cap)?;
    let chain = extract_symbolic_chain(spec, &part)?;
    Ok((part, chain))
}
