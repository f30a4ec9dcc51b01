//! Truncated state spaces, sparse generators and reachability analysis.

use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;
use crate::network::ReactionNetwork;
use crate::slack::SlackNetwork;

pub type State = Vec<u32>;

/// Finite set of admissible states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// `x_i <= bounds[i]` for every species.
    Rectangle(Vec<u32>),
    /// `W x <= N` plus equality laws `r·x = total` pinning species that no
    /// row of `W` bounds.
    HalfSpaces { w: Vec<Vec<i64>>, n: Vec<i64>, laws: Vec<(Vec<i64>, i64)> },
}

impl Region {
    pub fn contains(&self, x: &[u32]) -> bool {
        match self {
            Region::Rectangle(b) => x.iter().zip(b).all(|(a, b)| a <= b),
            Region::HalfSpaces { w, n, laws } => {
                w.iter().zip(n).all(|(row, &bound)| dot(row, x) <= bound)
                    && laws.iter().all(|(r, total)| dot(r, x) == *total)
            }
        }
    }

    fn grade(&self, x: &[u32]) -> i64 {
        match self {
            Region::Rectangle(_) => x.iter().map(|&v| i64::from(v)).sum(),
            Region::HalfSpaces { w, .. } => w.iter().map(|row| dot(row, x)).sum(),
        }
    }

    fn upper_bounds(&self, names: &[String]) -> Result<Vec<u32>> {
        match self {
            Region::Rectangle(b) => Ok(b.clone()),
            Region::HalfSpaces { w, n, laws } => (0..names.len())
                .map(|i| {
                    let from_rows = w
                        .iter()
                        .zip(n)
                        .filter(|(row, _)| row.iter().all(|&v| v >= 0) && row[i] > 0)
                        .map(|(row, &bound)| bound.max(0) / row[i]);
                    let from_laws = laws
                        .iter()
                        .filter(|(r, _)| r.iter().all(|&v| v >= 0) && r[i] > 0)
                        .map(|(r, total)| (*total).max(0) / r[i]);
                    from_rows
                        .chain(from_laws)
                        .min()
                        .map(|b| b as u32)
                        .ok_or_else(|| Error::UnboundedSpecies(names[i].clone()))
                })
                .collect(),
        }
    }

    /// Members in graded lexicographic order: grade ascending, then lexicographic.
    pub fn enumerate(&self, names: &[String]) -> Result<Vec<State>> {
        let ub = self.upper_bounds(names)?;
        let d = ub.len();
        let mut out = Vec::new();
        let mut x = vec![0u32; d];
        // Rows and laws with non-negative coefficients allow pruning on partial sums.
        let prunable: Vec<(Vec<i64>, i64, bool)> = match self {
            Region::Rectangle(_) => Vec::new(),
            Region::HalfSpaces { w, n, laws } => w
                .iter()
                .zip(n)
                .map(|(r, &b)| (r.clone(), b, false))
                .chain(laws.iter().map(|(r, t)| (r.clone(), *t, true)))
                .filter(|(r, _, _)| r.iter().all(|&v| v >= 0))
                .collect(),
        };
        fn rec(
            i: usize,
            x: &mut Vec<u32>,
            ub: &[u32],
            prunable: &[(Vec<i64>, i64, bool)],
            partial: &mut Vec<i64>,
            region: &Region,
            out: &mut Vec<State>,
        ) {
            if i == x.len() {
                if region.contains(x) {
                    out.push(x.clone());
                }
                return;
            }
            for v in 0..=ub[i] {
                let mut ok = true;
                for (k, (r, bound, _)) in prunable.iter().enumerate() {
                    if partial[k] + r[i] * i64::from(v) > *bound {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    break;
                }
                for (k, (r, _, _)) in prunable.iter().enumerate() {
                    partial[k] += r[i] * i64::from(v);
                }
                x[i] = v;
                rec(i + 1, x, ub, prunable, partial, region, out);
                for (k, (r, _, _)) in prunable.iter().enumerate() {
                    partial[k] -= r[i] * i64::from(v);
                }
            }
            x[i] = 0;
        }
        let mut partial = vec![0i64; prunable.len()];
        rec(0, &mut x, &ub, &prunable, &mut partial, self, &mut out);
        out.sort_by(|a, b| self.grade(a).cmp(&self.grade(b)).then_with(|| a.cmp(b)));
        Ok(out)
    }
}

pub(crate) fn dot(row: &[i64], x: &[u32]) -> i64 {
    row.iter().zip(x).map(|(&a, &b)| a * i64::from(b)).sum()
}

/// Ordered list of states with its inverse index. An optional sink (used by
/// FSP) occupies the index right after the last state.
#[derive(Debug, Clone)]
pub struct StateSpace {
    species: Vec<String>,
    states: Vec<State>,
    index: FxHashMap<State, usize>,
    region: Region,
    sink: bool,
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states && self.sink == other.sink && self.species == other.species
    }
}

impl StateSpace {
    pub fn from_region(species: Vec<String>, region: Region) -> Result<Self> {
        let states = region.enumerate(&species)?;
        Ok(Self::from_states(species, states, region, false))
    }

    pub(crate) fn from_states(species: Vec<String>, states: Vec<State>, region: Region, sink: bool) -> Self {
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        StateSpace { species, states, index, region, sink }
    }

    pub(crate) fn with_sink(mut self) -> Self {
        self.sink = true;
        self
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, i: usize) -> Option<&State> {
        self.states.get(i)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Number of proper states (excluding any sink).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Generator dimension, sink included.
    pub fn dim(&self) -> usize {
        self.states.len() + usize::from(self.sink)
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink.then_some(self.states.len())
    }

    pub fn index_of(&self, x: &[u32]) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn require(&self, x: &[u32]) -> Result<usize> {
        self.index_of(x).ok_or_else(|| Error::StateNotFound(x.to_vec()))
    }

    /// Indices of states satisfying `pred`.
    pub fn select(&self, pred: impl Fn(&[u32]) -> bool) -> Vec<usize> {
        self.states.iter().enumerate().filter(|(_, s)| pred(s)).map(|(i, _)| i).collect()
    }

    /// True when `self`'s states are the leading states of `other`.
    pub fn is_prefix_of(&self, other: &StateSpace) -> bool {
        self.species == other.species && self.states.len() <= other.states.len() && other.states[..self.states.len()] == self.states[..]
    }
}

/// Equality laws needed to bound species that no non-negative row of `W` covers.
pub fn intrinsic_laws(net: &ReactionNetwork, w: &[Vec<i64>], x0: Option<&[u32]>) -> Result<Vec<(Vec<i64>, i64)>> {
    let covered = |i: usize| w.iter().any(|row| row.iter().all(|&v| v >= 0) && row[i] > 0);
    let uncovered: Vec<usize> = (0..net.n_species()).filter(|&i| !covered(i)).collect();
    if uncovered.is_empty() {
        return Ok(Vec::new());
    }
    let laws: Vec<Vec<i64>> =
        net.nonnegative_conservation_laws().into_iter().filter(|l| uncovered.iter().any(|&i| l[i] > 0)).collect();
    if let Some(&i) = uncovered.iter().find(|&&i| !laws.iter().any(|l| l[i] > 0)) {
        return Err(Error::UnboundedSpecies(net.species()[i].name.clone()));
    }
    let x0 = x0.ok_or_else(|| {
        Error::InvalidArgument("an initial state is required to fix the totals of intrinsic conservation laws".into())
    })?;
    Ok(laws.into_iter().map(|l| {
        let total = dot(&l, x0);
        (l, total)
    }).collect())
}

/// All states with `W x <= N` (plus intrinsic conservation laws), graded-lex ordered.
pub fn enumerate_states(snet: &SlackNetwork) -> Result<StateSpace> {
    let spec = snet.spec();
    let laws = intrinsic_laws(snet.base(), &spec.w, snet.initial())?;
    let region = Region::HalfSpaces { w: spec.w.clone(), n: spec.n.clone(), laws };
    StateSpace::from_region(snet.base().species_names(), region)
}

/// Sparse transition-rate matrix. Off-diagonal entries are stored per row
/// (sorted by column, merged); the diagonal is minus the row sum.
#[derive(Debug, Clone)]
pub struct Generator {
    space: Arc<StateSpace>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Generator {
    /// Builds from per-row `(target, rate)` lists. Self-transitions and zero
    /// rates are dropped, parallel entries summed.
    pub fn from_rows(space: Arc<StateSpace>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), space.dim(), "one row per state");
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag = Vec::with_capacity(rows.len());
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.retain(|&(j, v)| j != i && v > 0.0);
            row.sort_by_key(|&(j, _)| j);
            let start = cols.len();
            for (j, v) in row {
                if cols.len() > start && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
            }
            diag.push(-vals[start..].iter().sum::<f64>());
            row_ptr.push(cols.len());
        }
        Generator { space, row_ptr, cols, vals, diag }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn nnz_off_diagonal(&self) -> usize {
        self.vals.len()
    }

    /// Off-diagonal `(column, rate)` entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.diag[i]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.diag[i] + self.row(i).map(|(_, v)| v).sum::<f64>()
    }

    /// `max_i Σ_j |A_ij|`.
    pub fn norm_inf(&self) -> f64 {
        self.diag.iter().map(|d| 2.0 * d.abs()).fold(0.0, f64::max)
    }

    /// `pᵀ A`.
    pub fn left_mul(&self, p: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = p.iter().zip(&self.diag).map(|(a, d)| a * d).collect();
        for (i, &pi) in p.iter().enumerate() {
            if pi != 0.0 {
                for (j, v) in self.row(i) {
                    out[j] += pi * v;
                }
            }
        }
        out
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.dim()).map(|i| self.row(i).map(|(j, _)| j).collect()).collect()
    }

    /// Copy with the rows of `states` zeroed, making them absorbing.
    pub fn make_absorbing(&self, states: &[usize]) -> Generator {
        let mut absorbing = vec![false; self.dim()];
        for &s in states {
            absorbing[s] = true;
        }
        let rows = (0..self.dim())
            .map(|i| if absorbing[i] { Vec::new() } else { self.row(i).collect() })
            .collect();
        Generator::from_rows(self.space.clone(), rows)
    }

    /// Entries as `(row, col, value)` including the diagonal, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.vals.len() + self.dim());
        for i in 0..self.dim() {
            let mut placed = false;
            for (j, v) in self.row(i) {
                if !placed && j > i {
                    if self.diag[i] != 0.0 {
                        out.push((i, i, self.diag[i]));
                    }
                    placed = true;
                }
                out.push((i, j, v));
            }
            if !placed && self.diag[i] != 0.0 {
                out.push((i, i, self.diag[i]));
            }
        }
        out
    }
}

/// What to do with a positive-rate transition whose target lies outside the region.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Escape {
    Forbid,
    To(usize),
    Drop,
}

pub(crate) fn assemble<F>(space: Arc<StateSpace>, changes: &[Vec<i64>], rate: F, escape: Escape) -> Result<Generator>
where
    F: Fn(usize, &[u32]) -> f64 + Sync,
{
    let rows: Result<Vec<Vec<(usize, f64)>>> = space
        .states()
        .par_iter()
        .map(|x| {
            let mut row = Vec::new();
            for (r, dx) in changes.iter().enumerate() {
                let k = rate(r, x);
                if k <= 0.0 {
                    continue;
                }
                let target: Vec<i64> = x.iter().zip(dx).map(|(&a, &b)| i64::from(a) + b).collect();
                let idx = if target.iter().all(|&v| v >= 0) {
                    let t: Vec<u32> = target.iter().map(|&v| v as u32).collect();
                    space.index_of(&t)
                } else {
                    None
                };
                match (idx, escape) {
                    (Some(j), _) => row.push((j, k)),
                    (None, Escape::To(j)) => row.push((j, k)),
                    (None, Escape::Drop) => {}
                    (None, Escape::Forbid) => return Err(Error::TransitionLeavesSpace { from: x.clone(), to: target }),
                }
            }
            Ok(row)
        })
        .collect();
    let mut rows = rows?;
    if space.sink().is_some() {
        rows.push(Vec::new());
    }
    Ok(Generator::from_rows(space, rows))
}

/// Generator of the slack chain. Every positive rate must stay inside the space.
pub fn build_generator(space: Arc<StateSpace>, snet: &SlackNetwork) -> Result<Generator> {
    let changes = snet.base().reaction_vectors();
    assemble(space, &changes, |r, x| snet.slack_intensity(r, x), Escape::Forbid)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommunicationClass {
    pub states: Vec<usize>,
    pub closed: bool,
}

impl CommunicationClass {
    pub fn is_absorbing(&self) -> bool {
        self.closed && self.states.len() == 1
    }
}

/// Strongly connected components of the positive-rate digraph, ordered by
/// smallest member. A class is closed when no positive rate leaves it.
pub fn communication_classes(gen: &Generator) -> Vec<CommunicationClass> {
    let adj = gen.adjacency();
    let comps = graph::strongly_connected_components(&adj);
    let mut owner = vec![0usize; adj.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &s in comp {
            owner[s] = c;
        }
    }
    comps
        .into_iter()
        .enumerate()
        .map(|(c, states)| {
            let closed = states.iter().all(|&s| adj[s].iter().all(|&t| owner[t] == c));
            CommunicationClass { states, closed }
        })
        .collect()
}

/// Whether some state of `targets` is reachable from `from`.
pub fn accessibility(gen: &Generator, from: usize, targets: &[usize]) -> Result<bool> {
    if targets.is_empty() {
        return Err(Error::EmptyTarget);
    }
    if from >= gen.dim() || targets.iter().any(|&t| t >= gen.dim()) {
        return Err(Error::InvalidArgument("state index out of range".into()));
    }
    let seen = graph::reachable(&gen.adjacency(), &[from]);
    Ok(targets.iter().any(|&t| seen[t]))
}

/// States reachable from `from` in the positive-rate digraph.
pub fn reachable_from(gen: &Generator, from: usize) -> Vec<usize> {
    let seen = graph::reachable(&gen.adjacency(), &[from]);
    seen.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i).collect()
}
