use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use num_traits::Zero;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::LabeledChain;
use crate::error::Result;
use crate::measures::{xi_estimate, Word, XiParams, XiReport};
use crate::scalar::Rational;
use crate::ExactSystem;

/// Evidence about whether two chain states start mutually absolutely
/// continuous measures.
#[derive(Clone, Debug, PartialEq)]
pub enum MergeCertificate {
    /// A cylinder charged by exactly one of the two measures.
    SupportSeparation { word: Word, mass_i: Rational, mass_j: Rational },
    /// The two measures agree on every cylinder; `basis` lists the words whose
    /// difference vectors span all others.
    MeasureEquality { basis: Vec<Word> },
    /// Every closed class of the paired chain lies on the diagonal, so the two
    /// paths coalesce almost surely; `to_diagonal` is a shortest coalescing word.
    CouplingMerge { to_diagonal: Word, pairs: usize, closed_classes: usize },
    Statistical(Box<XiReport>),
}

impl MergeCertificate {
    pub fn kind(&self) -> &'static str {
        match self {
            MergeCertificate::SupportSeparation { .. } => "support_separation",
            MergeCertificate::MeasureEquality { .. } => "measure_equality",
            MergeCertificate::CouplingMerge { .. } => "coupling_merge",
            MergeCertificate::Statistical(_) => "statistical",
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, MergeCertificate::Statistical(_))
    }

    /// Re-derives an exact certificate from the chain. Statistical evidence is
    /// not re-checkable and returns `false`.
    pub fn verify(&self, chain: &LabeledChain, i: usize, j: usize) -> Result<bool> {
        Ok(match self {
            MergeCertificate::SupportSeparation { word, mass_i, mass_j } => {
                chain.word_mass(i, word)? == *mass_i
                    && chain.word_mass(j, word)? == *mass_j
                    && mass_i.is_zero() != mass_j.is_zero()
            }
            MergeCertificate::MeasureEquality { .. } => measure_equality(chain, i, j)?.is_equal(),
            MergeCertificate::CouplingMerge { to_diagonal, .. } => {
                let (a, b) = (walk(chain, i, to_diagonal)?, walk(chain, j, to_diagonal)?);
                a.is_some() && a == b && coupling(chain, i, j)?.is_some()
            }
            MergeCertificate::Statistical(_) => false,
        })
    }
}

fn walk(chain: &LabeledChain, s: usize, word: &Word) -> Result<Option<usize>> {
    let mut state = s;
    for &e in &word.0 {
        match chain.target(state, chain.label_index(e)?) {
            Some(t) => state = t,
            None => return Ok(None),
        }
    }
    Ok(Some(state))
}

/// Breadth-first search over pairs of states driven by common labels for a
/// label supported on exactly one side. The returned word is a shortest one.
pub fn support_separation(chain: &LabeledChain, i: usize, j: usize) -> Result<Option<MergeCertificate>> {
    chain.check_state(i)?;
    chain.check_state(j)?;
    let mut seen: HashMap<(usize, usize), Word> = HashMap::new();
    let mut queue = VecDeque::from([(i, j)]);
    seen.insert((i, j), Word::default());
    while let Some((s, t)) = queue.pop_front() {
        let word = seen[&(s, t)].clone();
        for (k, &label) in chain.labels.iter().enumerate() {
            match (chain.target(s, k), chain.target(t, k)) {
                (Some(a), Some(b)) => {
                    if let Entry::Vacant(slot) = seen.entry((a, b)) {
                        slot.insert(word.extended(label));
                        queue.push_back((a, b));
                    }
                }
                (None, None) => {}
                _ => {
                    let word = word.extended(label);
                    return Ok(Some(MergeCertificate::SupportSeparation {
                        mass_i: chain.word_mass(i, &word)?,
                        mass_j: chain.word_mass(j, &word)?,
                        word,
                    }));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub enum EqualityOutcome {
    Equal(MergeCertificate),
    /// A shortest word with different masses.
    Distinguished { word: Word, mass_i: Rational, mass_j: Rational },
}

impl EqualityOutcome {
    pub fn is_equal(&self) -> bool {
        matches!(self, EqualityOutcome::Equal(_))
    }
}

/// Rows in reduced echelon form, used to test membership in a span exactly.
struct Echelon {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Echelon {
    /// Adds `v` unless it is already in the span; returns whether it was added.
    fn insert(&mut self, mut v: Vec<Rational>) -> bool {
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone() / row[*pivot].clone();
                for (a, b) in v.iter_mut().zip(row) {
                    *a -= &f * b;
                }
            }
        }
        match v.iter().position(|a| !a.is_zero()) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

/// Decides `P_i = P_j` on all cylinders.
///
/// With `M_a` the weighted transition matrix of label `a`, the measures agree
/// iff `(e_i - e_j) M_w 1 = 0` for every word `w`. The row vectors
/// `(e_i - e_j) M_w` span a space of dimension at most the number of states,
/// found breadth first; it suffices to test a basis, and the first basis word
/// that fails is a shortest distinguishing word.
pub fn measure_equality(chain: &LabeledChain, i: usize, j: usize) -> Result<EqualityOutcome> {
    chain.check_state(i)?;
    chain.check_state(j)?;
    let n = chain.num_states();
    let mut start = vec![Rational::zero(); n];
    start[i] += Rational::from_integer(1.into());
    start[j] -= Rational::from_integer(1.into());

    let mut span = Echelon { rows: Vec::new() };
    let mut basis: Vec<(Word, Vec<Rational>)> = Vec::new();
    let mut queue = VecDeque::new();
    if span.insert(start.clone()) {
        basis.push((Word::default(), start.clone()));
        queue.push_back((Word::default(), start));
    }
    while let Some((word, v)) = queue.pop_front() {
        for (k, &label) in chain.labels.iter().enumerate() {
            let mut next = vec![Rational::zero(); n];
            for (s, coeff) in v.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                if let Some(t) = &chain.rows[s][k] {
                    next[t.target] += coeff * &t.prob;
                }
            }
            if span.insert(next.clone()) {
                let w = word.extended(label);
                basis.push((w.clone(), next.clone()));
                queue.push_back((w, next));
            }
        }
    }
    for (word, v) in &basis {
        let total = v.iter().fold(Rational::zero(), |a, b| a + b);
        if !total.is_zero() {
            return Ok(EqualityOutcome::Distinguished {
                mass_i: chain.word_mass(i, word)?,
                mass_j: chain.word_mass(j, word)?,
                word: word.clone(),
            });
        }
    }
    Ok(EqualityOutcome::Equal(MergeCertificate::MeasureEquality {
        basis: basis.into_iter().map(|(w, _)| w).collect(),
    }))
}

/// The diagonal-absorption test on the chain alone; `None` when it fails.
fn coupling(chain: &LabeledChain, i: usize, j: usize) -> Result<Option<MergeCertificate>> {
    chain.check_state(i)?;
    chain.check_state(j)?;
    let mut graph: DiGraph<(usize, usize), ()> = DiGraph::new();
    let mut index = HashMap::new();
    let mut words: Vec<Word> = Vec::new();
    let root = graph.add_node((i, j));
    index.insert((i, j), root);
    words.push(Word::default());
    let mut queue = VecDeque::from([root]);
    let mut to_diagonal = (i == j).then(Word::default);
    while let Some(node) = queue.pop_front() {
        let (s, t) = graph[node];
        for (k, &label) in chain.labels.iter().enumerate() {
            let (a, b) = match (chain.target(s, k), chain.target(t, k)) {
                (Some(a), Some(b)) => (a, b),
                (None, None) => continue,
                // unequal supports: separation, not coupling
                _ => return Ok(None),
            };
            let next = match index.get(&(a, b)) {
                Some(&n) => n,
                None => {
                    let n = graph.add_node((a, b));
                    index.insert((a, b), n);
                    let w = words[node.index()].extended(label);
                    if a == b && to_diagonal.is_none() {
                        to_diagonal = Some(w.clone());
                    }
                    words.push(w);
                    queue.push_back(n);
                    n
                }
            };
            graph.update_edge(node, next, ());
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut closed = 0;
    for scc in &sccs {
        let leaves = scc
            .iter()
            .any(|&n| graph.neighbors(n).any(|m| !scc.contains(&m)));
        if leaves {
            continue;
        }
        closed += 1;
        if !scc.iter().any(|&n| graph[n].0 == graph[n].1) {
            return Ok(None);
        }
    }
    Ok(to_diagonal.map(|to_diagonal| MergeCertificate::CouplingMerge {
        to_diagonal,
        pairs: graph.node_count(),
        closed_classes: closed,
    }))
}

/// Exact coupling certificate when the paired chain is absorbed on the
/// diagonal; otherwise the statistical report for the two representatives.
pub fn coupling_merge_test(
    spec: &ExactSystem,
    chain: &LabeledChain,
    i: usize,
    j: usize,
    params: &XiParams,
) -> Result<MergeCertificate> {
    if let Some(cert) = coupling(chain, i, j)? {
        return Ok(cert);
    }
    let report = xi_estimate(spec, &chain.reps[i], &chain.reps[j], params)?;
    Ok(MergeCertificate::Statistical(Box::new(report)))
}
