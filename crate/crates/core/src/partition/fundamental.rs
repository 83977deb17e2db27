use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::{
    coupling_merge_test, measure_equality, support_separation, symbolic_chain, Cell, EqualityOutcome, IntervalPartition,
    LabeledChain, MergeCertificate, DEFAULT_BREAKPOINT_CAP,
};
use crate::error::{Error, Result};
use crate::measures::{enumerate_cylinders, Verdict, Word, XiParams};
use crate::model::EdgeId;
use crate::scalar::{fmt_exact, Rational};
use crate::{ExactPoint, ExactSystem};

#[derive(Clone, Debug)]
pub struct PartitionParams {
    pub breakpoint_cap: usize,
    /// Used only for pairs that no exact test decides.
    pub xi: XiParams,
}

impl PartitionParams {
    pub fn new(seed: u64) -> Self {
        PartitionParams { breakpoint_cap: DEFAULT_BREAKPOINT_CAP, xi: XiParams::new(seed) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOutcome {
    Separated,
    Merged,
    /// Statistical evidence was inconclusive; the pair is kept apart.
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub outcome: PairOutcome,
    pub certificate: MergeCertificate,
}

impl PairRecord {
    /// "exact certificate" or "statistical, seed=...".
    pub fn grade(&self) -> String {
        match &self.certificate {
            MergeCertificate::Statistical(r) => format!("statistical, seed={}", r.seed),
            _ => "exact certificate".into(),
        }
    }
}

/// An edge `(i, e)` of the fundamental system: label `e` used from class `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FmsEdge {
    pub source: usize,
    /// `psi((i, e)) = e`.
    pub label: EdgeId,
    pub target: usize,
    /// `p'_{(i,e)}` on each cell of class `i`; it is constant per cell, not per class.
    pub probs: Vec<(usize, Rational)>,
}

/// The classes of mutually absolutely continuous starting points, as unions of
/// partition cells, with the induced Markov system.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalPartition {
    pub partition: IntervalPartition,
    pub chain: LabeledChain,
    /// Cell indices per class; classes ordered by their first cell.
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    pub edges: Vec<FmsEdge>,
    pub pairs: Vec<PairRecord>,
    pub diagnostics: Vec<String>,
}

impl FundamentalPartition {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classify_point(&self, x: &ExactPoint) -> Result<usize> {
        self.partition
            .locate(x)
            .map(|c| self.class_of[c])
            .ok_or_else(|| Error::OutOfDomain { point: x.to_string(), domain: self.domain_string() })
    }

    fn domain_string(&self) -> String {
        let first = &self.partition.cells[0].interval;
        let last = &self.partition.cells[self.partition.cells.len() - 1].interval;
        format!("[{}, {}]", first.lo, last.hi)
    }

    pub fn class_cells(&self, class: usize) -> Vec<&Cell> {
        self.classes[class].iter().map(|&c| &self.partition.cells[c]).collect()
    }

    /// Whether every merge inside the class rests on an exact certificate.
    pub fn class_is_exact(&self, class: usize) -> bool {
        self.pairs
            .iter()
            .filter(|p| p.outcome == PairOutcome::Merged && self.class_of[p.i] == class)
            .all(|p| p.certificate.is_exact())
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&PairRecord> {
        let (i, j) = (i.min(j), i.max(j));
        self.pairs.iter().find(|p| p.i == i && p.j == j)
    }

    /// `p'_{e'}(x)`, zero outside the source class.
    pub fn lifted_prob(&self, edge: &FmsEdge, x: &ExactPoint) -> Rational {
        match self.partition.locate(x) {
            Some(cell) if self.class_of[cell] == edge.source => edge
                .probs
                .iter()
                .find(|(c, _)| *c == cell)
                .map_or_else(Rational::zero, |(_, p)| p.clone()),
            _ => Rational::zero(),
        }
    }

    /// Class-level digraph of the fundamental system (parallel arcs kept).
    pub fn digraph(&self) -> crate::graph::Digraph {
        crate::graph::Digraph::new(self.num_classes(), self.edges.iter().map(|e| (e.source, e.target)).collect())
            .expect("edges join existing classes")
    }

    /// Plain-text report: breakpoints, cells, classes, pair certificates, E' and psi.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let cuts: Vec<String> = self.partition.cut_points().iter().map(fmt_exact).collect();
        let _ = writeln!(out, "breakpoints: {}", cuts.join(", "));
        for (b, origin) in &self.partition.breakpoints {
            let _ = writeln!(out, "  {} ({origin})", fmt_exact(b));
        }
        let _ = writeln!(out, "\ncells:");
        for (k, c) in self.partition.cells.iter().enumerate() {
            let _ = writeln!(out, "  cell {k}: {c} -> class {}", self.class_of[k]);
        }
        let _ = writeln!(out, "\nclasses: {}", self.num_classes());
        for (k, cells) in self.classes.iter().enumerate() {
            let names: Vec<String> = cells.iter().map(|&c| self.partition.cells[c].to_string()).collect();
            let grade = if cells.len() == 1 {
                "single cell"
            } else if self.class_is_exact(k) {
                "merged by exact certificate"
            } else {
                "merged by statistical evidence"
            };
            let _ = writeln!(out, "  class {k}: {} ({grade})", names.join(" u "));
        }
        let _ = writeln!(out, "\npairs:");
        for p in &self.pairs {
            let _ = write!(out, "  cells {} and {}: {:?} by {}", p.i, p.j, p.outcome, p.certificate.kind());
            match &p.certificate {
                MergeCertificate::SupportSeparation { word, mass_i, mass_j } => {
                    let _ = write!(out, ", word {word}, masses {} vs {}", fmt_exact(mass_i), fmt_exact(mass_j));
                }
                MergeCertificate::MeasureEquality { basis } => {
                    let _ = write!(out, ", span basis of {} words", basis.len());
                }
                MergeCertificate::CouplingMerge { to_diagonal, pairs, closed_classes } => {
                    let _ = write!(
                        out,
                        ", coalescing word {to_diagonal}, {pairs} paired states, {closed_classes} closed classes all diagonal"
                    );
                }
                MergeCertificate::Statistical(r) => {
                    let _ = write!(
                        out,
                        ", verdict {}, drift {:e} +- {:e} ({})",
                        r.verdict, r.under_x.mean, r.under_x.stderr, r.reason
                    );
                }
            }
            let _ = writeln!(out, " [{}]", p.grade());
        }
        let _ = writeln!(out, "\nfundamental edges (source class, label = psi, target class, p' per cell):");
        for e in &self.edges {
            let probs: Vec<String> = e.probs.iter().map(|(c, p)| format!("cell {c}: {}", fmt_exact(p))).collect();
            let _ = writeln!(out, "  ({}, {}) -> {}  {}", e.source, e.label, e.target, probs.join("; "));
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "diagnostic: {d}");
        }
        out
    }
}

fn decide(spec: &ExactSystem, chain: &LabeledChain, i: usize, j: usize, params: &XiParams) -> Result<PairRecord> {
    if let Some(cert) = support_separation(chain, i, j)? {
        return Ok(PairRecord { i, j, outcome: PairOutcome::Separated, certificate: cert });
    }
    if let EqualityOutcome::Equal(cert) = measure_equality(chain, i, j)? {
        return Ok(PairRecord { i, j, outcome: PairOutcome::Merged, certificate: cert });
    }
    let cert = coupling_merge_test(spec, chain, i, j, params)?;
    let outcome = match &cert {
        MergeCertificate::Statistical(r) => match r.verdict {
            Verdict::Equivalent => PairOutcome::Merged,
            Verdict::SingularCertified | Verdict::SingularStatistical => PairOutcome::Separated,
            Verdict::Inconclusive => PairOutcome::Undecided,
        },
        _ => PairOutcome::Merged,
    };
    Ok(PairRecord { i, j, outcome, certificate: cert })
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// Partition, chain, pairwise certificates (exact tests first), transitive
/// merging, and the induced system `(V', E', i', t', psi)`.
pub fn fundamental_partition(spec: &ExactSystem, params: &PartitionParams) -> Result<FundamentalPartition> {
    let (partition, chain) = symbolic_chain(spec, params.breakpoint_cap)?;
    let n = chain.num_states();
    let todo: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pairs: Vec<PairRecord> =
        todo.par_iter().map(|&(i, j)| decide(spec, &chain, i, j, &params.xi)).collect::<Result<_>>()?;

    let mut parent: Vec<usize> = (0..n).collect();
    for p in pairs.iter().filter(|p| p.outcome == PairOutcome::Merged) {
        let (a, b) = (find(&mut parent, p.i), find(&mut parent, p.j));
        parent[a.max(b)] = a.min(b);
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in 0..n {
        let r = find(&mut parent, s);
        by_root.entry(r).or_default().push(s);
    }
    let classes: Vec<Vec<usize>> = by_root.into_values().collect();
    let mut class_of = vec![0; n];
    for (k, members) in classes.iter().enumerate() {
        for &s in members {
            class_of[s] = k;
        }
    }

    let mut diagnostics = Vec::new();
    for p in &pairs {
        if class_of[p.i] != class_of[p.j] {
            continue;
        }
        match (p.outcome, p.certificate.is_exact()) {
            (PairOutcome::Separated, true) => {
                return Err(Error::InconsistentMerge(format!(
                    "cells {} and {} are separated by word {} yet joined transitively",
                    p.i,
                    p.j,
                    match &p.certificate {
                        MergeCertificate::SupportSeparation { word, .. } => word.to_string(),
                        _ => String::new(),
                    }
                )))
            }
            (PairOutcome::Separated, false) | (PairOutcome::Undecided, _) => diagnostics.push(format!(
                "cells {} and {} joined transitively although their own test says {:?}",
                p.i, p.j, p.outcome
            )),
            _ => {}
        }
    }
    for p in pairs.iter().filter(|p| p.outcome == PairOutcome::Undecided) {
        diagnostics.push(format!("cells {} and {}: inconclusive evidence ({})", p.i, p.j, p.grade()));
    }

    let mut edges = Vec::new();
    for (k, members) in classes.iter().enumerate() {
        for (l, &label) in chain.labels.iter().enumerate() {
            let supported: Vec<usize> = members.iter().copied().filter(|&s| chain.supports(s, l)).collect();
            if supported.is_empty() {
                continue;
            }
            if supported.len() != members.len() {
                return Err(Error::InconsistentMerge(format!(
                    "label {label} is positive on only part of class {k}"
                )));
            }
            let mut targets: Vec<usize> = supported.iter().filter_map(|&s| chain.target(s, l)).map(|t| class_of[t]).collect();
            targets.sort_unstable();
            targets.dedup();
            if targets.len() != 1 {
                return Err(Error::InconsistentMerge(format!("label {label} sends class {k} into several classes")));
            }
            edges.push(FmsEdge {
                source: k,
                label,
                target: targets[0],
                probs: supported.iter().map(|&s| (s, chain.prob(s, l))).collect(),
            });
        }
    }

    Ok(FundamentalPartition { partition, chain, classes, class_of, edges, pairs, diagnostics })
}

/// `max_w |P_x(w) - sum_{psi(w') = w} P'_x(w')|` over depth-`n` words, where
/// the right side runs over path-consistent words of the fundamental system
/// with `p'` read from the partition cells (zero outside the source class).
pub fn lift_check(spec: &ExactSystem, fp: &FundamentalPartition, x: &ExactPoint, n: usize, budget: u64) -> Result<Rational> {
    let required = (fp.edges.len() as u128).checked_pow(n as u32);
    if required.is_none_or(|r| r > budget as u128) {
        return Err(Error::BudgetExceeded {
            required: required.map_or_else(|| format!("{}^{n}", fp.edges.len()), |r| r.to_string()),
            budget,
        });
    }
    let direct: BTreeMap<Word, Rational> = enumerate_cylinders(spec, x, n, budget, false)?.into_iter().collect();
    let mut lifted: BTreeMap<Word, Rational> = BTreeMap::new();
    let mut stack = vec![(x.clone(), None::<usize>, Word::default(), Rational::one())];
    while let Some((point, at, word, mass)) = stack.pop() {
        if word.len() == n {
            *lifted.entry(word).or_insert_with(Rational::zero) += mass;
            continue;
        }
        if fp.partition.locate(&point).is_none() {
            return Err(Error::OutOfDomain { point: point.to_string(), domain: fp.domain_string() });
        }
        for e in fp.edges.iter().filter(|e| at.is_none_or(|c| c == e.source)) {
            let p = fp.lifted_prob(e, &point);
            if p.is_zero() {
                continue;
            }
            let next = spec.edge(e.label)?.map.apply(&point);
            stack.push((next, Some(e.target), word.extended(e.label), &mass * p));
        }
    }
    let mut worst = Rational::zero();
    for w in direct.keys().chain(lifted.keys()) {
        let a = direct.get(w).cloned().unwrap_or_else(Rational::zero);
        let b = lifted.get(w).cloned().unwrap_or_else(Rational::zero);
        let d = (a - b).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// `|sum_{e' in E'} p'_{e'}(x) f(w_{psi e'}(x)) - (U f)(x)|`.
pub fn operator_discrepancy(
    spec: &ExactSystem,
    fp: &FundamentalPartition,
    f: impl Fn(&ExactPoint) -> Rational,
    x: &ExactPoint,
) -> Result<Rational> {
    let mut lifted = Rational::zero();
    for e in &fp.edges {
        let p = fp.lifted_prob(e, x);
        if !p.is_zero() {
            lifted += p * f(&spec.edge(e.label)?.map.apply(x));
        }
    }
    Ok((lifted - spec.markov_operator(f, x)?).abs())
}
