//! Digraph predicates and exact stationary analysis of finite labeled chains.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_integer::Integer;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::partition::{Cell, LabeledChain};
use crate::scalar::{Rational, Scalar};
use crate::ExactSystem;

/// A finite directed multigraph `(V, E, i, t)` with `V = 0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    pub vertices: usize,
    /// `(i(e), t(e))` per arc.
    pub arcs: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn new(vertices: usize, arcs: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(a, b)) = arcs.iter().find(|&&(a, b)| a >= vertices || b >= vertices) {
            return Err(Error::InvalidArgument(format!("arc ({a}, {b}) leaves the {vertices} vertices")));
        }
        Ok(Digraph { vertices, arcs })
    }

    /// One arc per positive labeled transition.
    pub fn from_chain(chain: &LabeledChain) -> Self {
        let arcs = chain
            .rows
            .iter()
            .enumerate()
            .flat_map(|(s, row)| row.iter().flatten().map(move |t| (s, t.target)))
            .collect();
        Digraph { vertices: chain.num_states(), arcs }
    }

    /// Support graph of a square matrix.
    pub fn from_matrix<S: Scalar>(m: &[Vec<S>]) -> Self {
        let mut arcs = Vec::new();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    arcs.push((i, j));
                }
            }
        }
        Digraph { vertices: m.len(), arcs }
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices];
        for &(a, b) in &self.arcs {
            out[a].push(b);
        }
        out
    }

    /// Strongly connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut g: DiGraph<(), ()> = DiGraph::new();
        let nodes: Vec<_> = (0..self.vertices).map(|_| g.add_node(())).collect();
        for &(a, b) in &self.arcs {
            g.add_edge(nodes[a], nodes[b], ());
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        comps.sort();
        comps
    }

    /// Components with no arc leaving them.
    pub fn terminal_components(&self) -> Vec<Vec<usize>> {
        let comps = self.components();
        let mut comp_of = vec![0; self.vertices];
        for (k, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = k;
            }
        }
        let mut leaves = vec![false; comps.len()];
        for &(a, b) in &self.arcs {
            if comp_of[a] != comp_of[b] {
                leaves[comp_of[a]] = true;
            }
        }
        comps.into_iter().zip(leaves).filter(|(_, l)| !l).map(|(c, _)| c).collect()
    }

    /// Strongly connected (a single vertex counts).
    pub fn is_irreducible(&self) -> bool {
        self.vertices > 0 && self.components().len() == 1
    }

    /// Every vertex is reached from every other by a finite path, checked by
    /// direct search rather than through the component decomposition.
    pub fn is_recurrent(&self) -> bool {
        let succ = self.successors();
        (0..self.vertices).all(|s| {
            let mut seen = vec![false; self.vertices];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &succ[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            seen.iter().all(|&b| b)
        })
    }

    /// Gcd of cycle lengths within the component containing `v`; `None` when
    /// no cycle passes through `v`.
    pub fn period(&self, v: usize) -> Option<u64> {
        let comp = self.components().into_iter().find(|c| c.contains(&v))?;
        let inside = |x: usize| comp.binary_search(&x).is_ok();
        let succ = self.successors();
        let mut level = vec![None::<u64>; self.vertices];
        level[v] = Some(0);
        let mut queue = VecDeque::from([v]);
        while let Some(a) = queue.pop_front() {
            for &b in succ[a].iter().filter(|&&b| inside(b)) {
                if level[b].is_none() {
                    level[b] = Some(level[a].unwrap_or(0) + 1);
                    queue.push_back(b);
                }
            }
        }
        let mut g = 0u64;
        let mut any = false;
        for &(a, b) in &self.arcs {
            if inside(a) && inside(b) {
                any = true;
                let (la, lb) = (level[a].unwrap_or(0), level[b].unwrap_or(0));
                g = g.gcd(&(la + 1).abs_diff(lb));
            }
        }
        any.then_some(g)
    }

    /// Every vertex that lies on a cycle has period one. Vertices on no cycle
    /// carry no period and are ignored.
    pub fn is_aperiodic(&self) -> bool {
        self.components().iter().all(|c| self.period(c[0]).is_none_or(|p| p == 1))
    }

    pub fn induced(&self, vertices: &[usize]) -> Digraph {
        let mut index = vec![None; self.vertices];
        for (k, &v) in vertices.iter().enumerate() {
            index[v] = Some(k);
        }
        let arcs = self
            .arcs
            .iter()
            .filter_map(|&(a, b)| Some((index[a]?, index[b]?)))
            .collect();
        Digraph { vertices: vertices.len(), arcs }
    }
}

/// Solves `a x = b` by Gaussian elimination. Exact scalars pivot on the first
/// nonzero entry, floats on the largest.
pub fn solve_linear<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("linear system is not square".into()));
    }
    for col in 0..n {
        let pivot = if S::EXACT {
            (col..n).find(|&r| !a[r][col].is_zero())
        } else {
            (col..n)
                .filter(|&r| a[r][col].abs().to_f64() > 1e-300)
                .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
        }
        .ok_or_else(|| Error::SingularSystem(format!("no pivot in column {col}")))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / a[col][col].clone();
            let pivot_row = a[col].clone();
            for (dst, src) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                *dst = dst.clone() - f.clone() * src.clone();
            }
            b[r] = b[r].clone() - f * b[col].clone();
        }
    }
    Ok((0..n).map(|i| b[i].clone() / a[i][i].clone()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryMethod {
    ExactSolve,
    PowerIteration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryResult<S> {
    /// Weights of the first terminal component, zero elsewhere.
    pub pi: Vec<S>,
    pub method: StationaryMethod,
    /// `max_j |(pi A)_j - pi_j|`.
    pub residual: S,
    pub components: Vec<Vec<usize>>,
    /// One stationary vector per terminal component.
    pub per_component: Vec<Vec<S>>,
}

impl<S: Scalar> StationaryResult<S> {
    pub fn is_unique(&self) -> bool {
        self.per_component.len() == 1
    }

    pub fn unique_pi(&self) -> Result<&[S]> {
        if self.is_unique() {
            Ok(&self.pi)
        } else {
            Err(Error::MultipleTerminalComponents(self.per_component.len()))
        }
    }
}

fn residual<S: Scalar>(m: &[Vec<S>], pi: &[S]) -> S {
    let n = m.len();
    let mut worst = S::zero();
    for j in 0..n {
        let mut acc = S::zero();
        for i in 0..n {
            acc = acc + pi[i].clone() * m[i][j].clone();
        }
        let d = (acc - pi[j].clone()).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Solves `pi A = pi`, `sum pi = 1` on each terminal component of a row-stochastic
/// matrix; transient states get weight zero.
pub fn stationary_exact<S: Scalar>(m: &[Vec<S>]) -> Result<StationaryResult<S>> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("transition matrix must be square and nonempty".into()));
    }
    let components = Digraph::from_matrix(m).terminal_components();
    let mut per_component = Vec::with_capacity(components.len());
    for comp in &components {
        let k = comp.len();
        // equation j: sum_i pi_i A_ij - pi_j = 0, the last replaced by normalisation
        let mut a = vec![vec![S::zero(); k]; k];
        let mut b = vec![S::zero(); k];
        for (row, &j) in comp.iter().enumerate().take(k - 1) {
            for (col, &i) in comp.iter().enumerate() {
                a[row][col] = m[i][j].clone() - if i == j { S::one() } else { S::zero() };
            }
        }
        a[k - 1] = vec![S::one(); k];
        b[k - 1] = S::one();
        let local = solve_linear(a, b)?;
        let mut full = vec![S::zero(); n];
        for (&v, w) in comp.iter().zip(local) {
            full[v] = w;
        }
        per_component.push(full);
    }
    let pi = per_component[0].clone();
    Ok(StationaryResult {
        residual: residual(m, &pi),
        pi,
        method: StationaryMethod::ExactSolve,
        components,
        per_component,
    })
}

/// Stationary weights of a labeled chain, exactly.
pub fn stationary_distribution(chain: &LabeledChain) -> Result<StationaryResult<Rational>> {
    stationary_exact(&chain.matrix())
}

/// Power iteration on the lazy chain `(A + I)/2`, which has the same
/// stationary vectors and no periodic oscillation.
pub fn stationary_power(m: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<StationaryResult<f64>> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("transition matrix must be square and nonempty".into()));
    }
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += pi[i] * m[i][j];
            }
        }
        let mut change: f64 = 0.0;
        for j in 0..n {
            next[j] = 0.5 * (next[j] + pi[j]);
            change = change.max((next[j] - pi[j]).abs());
        }
        pi = next;
        if change < tol {
            break;
        }
    }
    let components = Digraph::from_matrix(m).terminal_components();
    Ok(StationaryResult {
        residual: residual(m, &pi),
        per_component: vec![pi.clone()],
        pi,
        method: StationaryMethod::PowerIteration,
        components,
    })
}

/// Eigenvalue moduli of a transition matrix, largest first. Diagnostic only.
pub fn eigenvalue_moduli(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mat = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let mut out: Vec<f64> = mat.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentResult {
    /// `int_{cell} x dmu / mu(cell)` per state; `None` where `pi` vanishes.
    pub per_state: Vec<Option<Rational>>,
    /// `int x dmu`.
    pub mean: Rational,
}

/// First moments of the stationary measure of an affine chain.
///
/// With `y_j = int_{cell j} x dmu`, invariance gives
/// `y_j = sum_{(s,e): t = j} p_e (s_e y_s + c_e pi_s)`, a linear system on the
/// support of `pi`. The global identity `m = sum_e int p_e (s_e x + c_e) dmu` is
/// checked before returning, as is each conditional mean lying in its cell's hull.
///
/// `cells[s]` is the cell of chain state `s`.
pub fn exact_first_moment(spec: &ExactSystem, chain: &LabeledChain, cells: &[Cell], pi: &[Rational]) -> Result<MomentResult> {
    let n = chain.num_states();
    if pi.len() != n || cells.len() != n {
        return Err(Error::InvalidArgument("one weight and one cell per state".into()));
    }
    let support: Vec<usize> = (0..n).filter(|&s| !pi[s].is_zero()).collect();
    let mut index = vec![None; n];
    for (k, &s) in support.iter().enumerate() {
        index[s] = Some(k);
    }
    let maps: Vec<_> = chain.labels.iter().map(|&l| spec.edge(l).map(|e| e.map.clone())).collect::<Result<_>>()?;

    let k = support.len();
    let mut a = vec![vec![Rational::zero(); k]; k];
    let mut b = vec![Rational::zero(); k];
    for (r, row) in a.iter_mut().enumerate() {
        row[r] = Rational::one();
    }
    for &s in &support {
        for (l, t) in chain.rows[s].iter().enumerate() {
            let Some(t) = t else { continue };
            let Some(j) = index[t.target] else {
                return Err(Error::SingularSystem(format!("state {s} feeds state {} of zero weight", t.target)));
            };
            let col = index[s].expect("s is in the support");
            a[j][col] -= &t.prob * &maps[l].slope;
            b[j] += &t.prob * &maps[l].intercept * &pi[s];
        }
    }
    let y = solve_linear(a, b)?;

    let mean = y.iter().fold(Rational::zero(), |acc, v| acc + v);
    let mut image_mean = Rational::zero();
    for &s in &support {
        let ys = &y[index[s].expect("support")];
        for (l, t) in chain.rows[s].iter().enumerate() {
            if let Some(t) = t {
                image_mean += &t.prob * (&maps[l].slope * ys + &maps[l].intercept * &pi[s]);
            }
        }
    }
    if image_mean != mean {
        return Err(Error::SingularSystem(format!("invariance identity fails: {mean} vs {image_mean}")));
    }

    let mut per_state = vec![None; n];
    for &s in &support {
        let m = y[index[s].expect("support")].clone() / pi[s].clone();
        let hull = &cells[s].interval;
        if m < hull.lo || m > hull.hi {
            return Err(Error::SingularSystem(format!("mean {m} of state {s} lies outside {hull}")));
        }
        per_state[s] = Some(m);
    }
    Ok(MomentResult { per_state, mean })
}

#[cfg(test)]
mod tests;
