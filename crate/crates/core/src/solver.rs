//! Stationary distributions, transient laws and mean first passage times.
//!
//! Two linear-algebra routes are provided. Sparse LU (faer) on a bordered
//! system is fast and accurate for well-conditioned chains. State reduction
//! (Grassmann-Taksar-Heyman elimination) only ever adds non-negative numbers,
//! so it keeps full relative accuracy on stiff chains whose passage times span
//! many orders of magnitude, where LU loses every digit.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;
use crate::statespace::{communication_classes, Generator, StateSpace};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearMethod {
    /// State reduction with minimum-degree ordering.
    #[default]
    Gth,
    /// Sparse LU with one step of iterative refinement.
    Lu,
}

/// Probability vector over a generator's states (sink included when present).
#[derive(Debug, Clone)]
pub struct Distribution {
    pub space: Arc<StateSpace>,
    pub p: Vec<f64>,
}

impl Distribution {
    pub fn point(space: Arc<StateSpace>, at: usize) -> Self {
        let mut p = vec![0.0; space.dim()];
        p[at] = 1.0;
        Distribution { space, p }
    }

    pub fn mass(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Probability of state `x` (zero when `x` is not in the space).
    pub fn prob(&self, x: &[u32]) -> f64 {
        self.space.index_of(x).map_or(0.0, |i| self.p[i])
    }

    pub fn sink_mass(&self) -> f64 {
        self.space.sink().map_or(0.0, |s| self.p[s])
    }
}

/// `Σ|pᵢ − qᵢ|` where states missing from one space count as zero there. The
/// smaller space must be a prefix of the larger one. Sink masses are compared
/// with each other.
pub fn l1_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    let (small, large) = if p.space.len() <= q.space.len() { (p, q) } else { (q, p) };
    if !small.space.is_prefix_of(&large.space) {
        return Err(Error::IncomparableSpaces);
    }
    let n = large.space.len();
    let at = |d: &Distribution, i: usize| if i < d.space.len() { d.p[i] } else { 0.0 };
    let body: f64 = (0..n).map(|i| (at(small, i) - at(large, i)).abs()).sum();
    Ok(body + (small.sink_mass() - large.sink_mass()).abs())
}

#[derive(Debug, Clone)]
pub struct Stationary {
    pub dist: Distribution,
    /// `max_j |(πᵀ A)_j|`
    pub residual: f64,
}

impl Stationary {
    pub fn p(&self) -> &[f64] {
        &self.dist.p
    }
}

/// Relative tolerance on `‖πᵀA‖∞ / ‖A‖∞`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct FptResult {
    /// Mean first passage time from each state; `None` outside the set that
    /// was solved for (targets are `Some(0.0)`).
    pub times: Vec<Option<f64>>,
    pub from: usize,
    /// `max_i |(A m)_i + 1| / (1 + |A_ii| m_i)` over the solved states.
    pub residual: f64,
}

impl FptResult {
    pub fn mean(&self) -> f64 {
        self.times[self.from].expect("passage time from the start state is always solved")
    }
}

fn lu_solve(n: usize, entries: &[(usize, usize, f64)], rhs: &[f64]) -> Result<Vec<f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip).map_err(|e| Error::Solve(format!("{e:?}")))?;
    let lu = mat.sp_lu().map_err(|e| Error::Solve(format!("{e:?}")))?;
    let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    // one refinement step
    let mut r = rhs.to_vec();
    for &(i, j, v) in entries {
        r[i] -= v * x[(j, 0)];
    }
    let dx = lu.solve(&Mat::from_fn(n, 1, |i, _| r[i]));
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)] + dx[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solve("sparse LU produced non-finite values".into()));
    }
    Ok(out)
}

/// Sparse elimination graph over a subset of states. Rates `r[i][j]` are
/// off-diagonal; `exit[i]` is the rate into the removed (target) set and
/// `reward[i]` accumulates the right-hand side.
struct Reduction {
    out: Vec<FxHashMap<usize, f64>>,
    inn: Vec<FxHashMap<usize, f64>>,
    exit: Vec<f64>,
    reward: Vec<f64>,
    alive: Vec<bool>,
}

enum Snapshot {
    Out(Vec<(usize, f64)>),
    In(Vec<(usize, f64)>),
}

struct Eliminated {
    node: usize,
    edges: Snapshot,
    reward: f64,
    total: f64,
}

impl Reduction {
    fn new(n: usize) -> Self {
        Reduction {
            out: vec![FxHashMap::default(); n],
            inn: vec![FxHashMap::default(); n],
            exit: vec![0.0; n],
            reward: vec![0.0; n],
            alive: vec![true; n],
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        *self.out[i].entry(j).or_insert(0.0) += v;
        *self.inn[j].entry(i).or_insert(0.0) += v;
    }

    fn cost(&self, k: usize) -> usize {
        self.inn[k].len() * self.out[k].len()
    }

    /// Removes node `k`, rerouting its flow through its neighbours.
    fn eliminate(&mut self, k: usize, keep_in: bool) -> Eliminated {
        self.alive[k] = false;
        let outs: Vec<(usize, f64)> = self.out[k].drain().collect();
        let ins: Vec<(usize, f64)> = self.inn[k].drain().collect();
        let total = self.exit[k] + outs.iter().map(|&(_, v)| v).sum::<f64>();
        for &(j, _) in &outs {
            self.inn[j].remove(&k);
        }
        for &(i, r_ik) in &ins {
            self.out[i].remove(&k);
            if total == 0.0 {
                continue;
            }
            let s = r_ik / total;
            self.exit[i] += s * self.exit[k];
            self.reward[i] += s * self.reward[k];
            for &(j, r_kj) in &outs {
                if j != i {
                    self.add(i, j, s * r_kj);
                }
            }
        }
        let edges = if keep_in { Snapshot::In(ins) } else { Snapshot::Out(outs) };
        Eliminated { node: k, edges, reward: self.reward[k], total }
    }

    /// Eliminates every node except `keep` in minimum-degree (Markowitz) order.
    fn run(&mut self, keep: usize, keep_in: bool) -> Vec<Eliminated> {
        let n = self.alive.len();
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).filter(|&k| k != keep && self.alive[k]).map(|k| Reverse((self.cost(k), k))).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((c, k))) = heap.pop() {
            if !self.alive[k] {
                continue;
            }
            let now = self.cost(k);
            if now != c {
                heap.push(Reverse((now, k)));
                continue;
            }
            let neighbours: Vec<usize> = self.inn[k].keys().chain(self.out[k].keys()).copied().collect();
            order.push(self.eliminate(k, keep_in));
            for v in neighbours {
                if v != keep && self.alive[v] {
                    heap.push(Reverse((self.cost(v), v)));
                }
            }
        }
        order
    }
}

fn single_closed_class(gen: &Generator) -> Result<Vec<usize>> {
    let closed: Vec<_> = communication_classes(gen).into_iter().filter(|c| c.closed).collect();
    if closed.len() != 1 {
        return Err(Error::AmbiguousClosedClass(closed.len()));
    }
    Ok(closed.into_iter().next().unwrap().states)
}

/// Closed classes reachable from `from`.
pub fn closed_classes_from(gen: &Generator, from: usize) -> Vec<Vec<usize>> {
    let seen = graph::reachable(&gen.adjacency(), &[from]);
    communication_classes(gen).into_iter().filter(|c| c.closed && seen[c.states[0]]).map(|c| c.states).collect()
}

/// Stationary distribution of the chain started at `from`, which must lead
/// into exactly one closed class.
pub fn stationary_from(gen: &Generator, from: usize, method: LinearMethod) -> Result<Stationary> {
    let classes = closed_classes_from(gen, from);
    if classes.len() != 1 {
        return Err(Error::AmbiguousClosedClass(classes.len()));
    }
    stationary_on_class(gen, &classes[0], method)
}

fn stationary_residual(gen: &Generator, p: &[f64]) -> f64 {
    gen.left_mul(p).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Unique stationary distribution. Requires exactly one closed class; states
/// outside it get probability zero.
pub fn stationary(gen: &Generator, method: LinearMethod) -> Result<Stationary> {
    let class = single_closed_class(gen)?;
    stationary_on_class(gen, &class, method)
}

/// Stationary distribution supported on the given closed class.
pub fn stationary_on_class(gen: &Generator, class: &[usize], method: LinearMethod) -> Result<Stationary> {
    if class.is_empty() {
        return Err(Error::InvalidArgument("empty class".into()));
    }
    let n = gen.dim();
    let inside = {
        let mut v = vec![false; n];
        class.iter().for_each(|&s| v[s] = true);
        v
    };
    if class.iter().any(|&s| gen.row(s).any(|(j, _)| !inside[j])) {
        return Err(Error::InvalidArgument("class is not closed".into()));
    }
    let mut local = vec![usize::MAX; n];
    for (k, &s) in class.iter().enumerate() {
        local[s] = k;
    }
    let m = class.len();
    let pc = match method {
        LinearMethod::Lu => {
            // Aᵀ p = 0 with the last equation replaced by Σ p = 1.
            let mut entries = Vec::new();
            for (k, &s) in class.iter().enumerate() {
                if k + 1 < m {
                    entries.push((k, k, gen.diagonal()[s]));
                }
                for (j, v) in gen.row(s) {
                    let lj = local[j];
                    if lj + 1 < m {
                        entries.push((lj, k, v));
                    }
                }
                entries.push((m - 1, k, 1.0));
            }
            let mut rhs = vec![0.0; m];
            rhs[m - 1] = 1.0;
            lu_solve(m, &entries, &rhs)?
        }
        LinearMethod::Gth => {
            let mut red = Reduction::new(m);
            for (k, &s) in class.iter().enumerate() {
                for (j, v) in gen.row(s) {
                    red.add(k, local[j], v);
                }
            }
            let keep = m - 1;
            let order = red.run(keep, true);
            let mut p = vec![0.0; m];
            p[keep] = 1.0;
            for e in order.iter().rev() {
                if let Snapshot::In(ins) = &e.edges {
                    p[e.node] = ins.iter().map(|&(i, r)| p[i] * r).sum::<f64>() / e.total;
                }
            }
            p
        }
    };
    let total: f64 = pc.iter().sum();
    let mut p = vec![0.0; n];
    for (k, &s) in class.iter().enumerate() {
        p[s] = (pc[k] / total).max(0.0);
    }
    let residual = stationary_residual(gen, &p);
    let tol = RESIDUAL_TOL * gen.norm_inf().max(1.0);
    if residual > tol {
        return Err(Error::ResidualTooLarge { residual, tolerance: tol });
    }
    Ok(Stationary { dist: Distribution { space: gen.space().clone(), p }, residual })
}

/// Mean time to first reach `targets` from `from`. Every state reachable from
/// `from` without passing through a target must itself be able to reach one.
pub fn mfpt(gen: &Generator, from: usize, targets: &[usize], method: LinearMethod) -> Result<FptResult> {
    let n = gen.dim();
    if targets.is_empty() {
        return Err(Error::EmptyTarget);
    }
    if from >= n || targets.iter().any(|&t| t >= n) {
        return Err(Error::InvalidArgument("state index out of range".into()));
    }
    let mut is_target = vec![false; n];
    for &t in targets {
        is_target[t] = true;
    }
    let mut times = vec![None; n];
    for &t in targets {
        times[t] = Some(0.0);
    }
    if is_target[from] {
        return Ok(FptResult { times, from, residual: 0.0 });
    }
    // Reachable from `from` while avoiding the targets.
    let adj: Vec<Vec<usize>> =
        (0..n).map(|i| if is_target[i] { Vec::new() } else { gen.row(i).map(|(j, _)| j).collect() }).collect();
    let seen = graph::reachable(&adj, &[from]);
    let back = graph::reachable(&graph::reverse(&adj), targets);
    if let Some(bad) = (0..n).find(|&i| seen[i] && !back[i]) {
        let label = gen.space().state(bad).map_or_else(|| "sink".to_string(), |s| format!("{s:?}"));
        return Err(Error::NonAccessibleTarget(format!("state {label} is reachable but cannot reach the target set")));
    }
    let set: Vec<usize> = (0..n).filter(|&i| seen[i] && !is_target[i]).collect();
    let mut local = vec![usize::MAX; n];
    for (k, &s) in set.iter().enumerate() {
        local[s] = k;
    }
    let m = set.len();
    let values = match method {
        LinearMethod::Lu => {
            let mut entries = Vec::new();
            for (k, &s) in set.iter().enumerate() {
                entries.push((k, k, -gen.diagonal()[s]));
                for (j, v) in gen.row(s) {
                    if local[j] != usize::MAX {
                        entries.push((k, local[j], -v));
                    }
                }
            }
            lu_solve(m, &entries, &vec![1.0; m])?
        }
        LinearMethod::Gth => {
            let mut red = Reduction::new(m);
            for (k, &s) in set.iter().enumerate() {
                red.reward[k] = 1.0;
                for (j, v) in gen.row(s) {
                    if is_target[j] {
                        red.exit[k] += v;
                    } else {
                        red.add(k, local[j], v);
                    }
                }
            }
            let keep = local[from];
            let order = red.run(keep, false);
            let mut t = vec![0.0; m];
            let d_keep = red.exit[keep] + red.out[keep].values().sum::<f64>();
            t[keep] = red.reward[keep] / d_keep;
            for e in order.iter().rev() {
                if let Snapshot::Out(outs) = &e.edges {
                    t[e.node] = (e.reward + outs.iter().map(|&(j, r)| r * t[j]).sum::<f64>()) / e.total;
                }
            }
            t
        }
    };
    let mut residual: f64 = 0.0;
    for (k, &s) in set.iter().enumerate() {
        let q = -gen.diagonal()[s];
        let mut acc = 1.0 - q * values[k];
        for (j, v) in gen.row(s) {
            if local[j] != usize::MAX {
                acc += v * values[local[j]];
            }
        }
        residual = residual.max(acc.abs() / (1.0 + q * values[k].abs()));
        times[s] = Some(values[k]);
    }
    Ok(FptResult { times, from, residual })
}

/// Poisson weights for mean `lambda` truncated so the discarded mass is below
/// `tail`. Computed outward from the mode to avoid underflow.
pub fn poisson_weights(lambda: f64, tail: f64) -> (usize, Vec<f64>) {
    if lambda == 0.0 {
        return (0, vec![1.0]);
    }
    let mode = lambda.floor() as usize;
    let cut = tail * 1e-3;
    let mut right = vec![1.0];
    let mut k = mode;
    loop {
        let next = right.last().unwrap() * lambda / (k + 1) as f64;
        k += 1;
        right.push(next);
        if next < cut && (k as f64) > lambda {
            break;
        }
    }
    let mut left = Vec::new();
    let mut w = 1.0;
    let mut k = mode;
    while k > 0 {
        w *= k as f64 / lambda;
        k -= 1;
        left.push(w);
        if w < cut {
            break;
        }
    }
    let start = mode - left.len();
    left.reverse();
    left.extend(right);
    let total: f64 = left.iter().sum();
    for v in &mut left {
        *v /= total;
    }
    // trim the tails down to the requested mass
    let (mut lo, mut hi) = (0, left.len());
    let mut dropped = 0.0;
    loop {
        let (a, b) = (left[lo], left[hi - 1]);
        let smaller = a.min(b);
        if hi - lo <= 1 || dropped + smaller >= tail {
            break;
        }
        dropped += smaller;
        if a <= b {
            lo += 1;
        } else {
            hi -= 1;
        }
    }
    (start + lo, left[lo..hi].to_vec())
}

/// Largest exit rate; the smallest admissible uniformization rate.
pub fn uniformization_rate(gen: &Generator) -> f64 {
    gen.diagonal().iter().fold(0.0, |m, d| m.max(-d))
}

/// Distribution at each of `times` (non-decreasing) from the initial law `p0`,
/// by uniformization. `rate` overrides the uniformization rate (it must be at
/// least the largest exit rate); sharing it between two chains makes their
/// Poisson weights identical.
pub fn transient(gen: &Generator, p0: &[f64], times: &[f64], rate: Option<f64>) -> Result<Vec<Vec<f64>>> {
    const TAIL: f64 = 1e-12;
    if p0.len() != gen.dim() {
        return Err(Error::InvalidArgument(format!("initial law has length {}, expected {}", p0.len(), gen.dim())));
    }
    if let Some(&t) = times.iter().find(|&&t| !(t >= 0.0)) {
        return Err(Error::NegativeTime(t));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be non-decreasing".into()));
    }
    let qmax = uniformization_rate(gen);
    let lambda = match rate {
        Some(r) if r < qmax => {
            return Err(Error::InvalidArgument(format!("uniformization rate {r} is below the largest exit rate {qmax}")))
        }
        Some(r) => r,
        None => qmax,
    };
    let step = |v: &[f64]| -> Vec<f64> {
        let mut out = gen.left_mul(v);
        for (o, x) in out.iter_mut().zip(v) {
            *o = *o / lambda + x;
        }
        out
    };
    let mut out = Vec::with_capacity(times.len());
    let mut current = p0.to_vec();
    let mut last = 0.0;
    for &t in times {
        let dt = t - last;
        last = t;
        if dt == 0.0 || lambda == 0.0 {
            out.push(current.clone());
            continue;
        }
        let (start, weights) = poisson_weights(lambda * dt, TAIL);
        let mut v = current.clone();
        for _ in 0..start {
            v = step(&v);
        }
        let mut acc = vec![0.0; v.len()];
        for (k, w) in weights.iter().enumerate() {
            if k > 0 {
                v = step(&v);
            }
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += w * x;
            }
        }
        current = acc;
        out.push(current.clone());
    }
    Ok(out)
}

/// `P(τ > t)` for each `t` in `ts`, by uniformization of the chain with the
/// target states made absorbing.
pub fn survival(gen: &Generator, from: usize, targets: &[usize], ts: &[f64]) -> Result<Vec<f64>> {
    if targets.is_empty() {
        return Err(Error::EmptyTarget);
    }
    if from >= gen.dim() || targets.iter().any(|&t| t >= gen.dim()) {
        return Err(Error::InvalidArgument("state index out of range".into()));
    }
    let absorbing = gen.make_absorbing(targets);
    let mut p0 = vec![0.0; gen.dim()];
    p0[from] = 1.0;
    let laws = transient(&absorbing, &p0, ts, None)?;
    let mut out: Vec<f64> =
        laws.iter().map(|p| (1.0 - targets.iter().map(|&k| p[k]).sum::<f64>()).clamp(0.0, 1.0)).collect();
    // rounding can break monotonicity by an ulp
    for i in 1..out.len() {
        out[i] = out[i].min(out[i - 1]);
    }
    Ok(out)
}
