//! Slack-reactant construction.
//!
//! Given conservation bounds `W x <= N`, every complex `ν` receives slack
//! coefficients `D[:, ν] = u - W C[:, ν]`, which makes `(W I)(C; D) S = 0`.
//! Slack counts are never tracked: `y = N - W x`, and a reaction may fire
//! only when each `y_i` covers the reactant's slack coefficient.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::network::{Complex, Kinetics, Reaction, ReactionNetwork, Species};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlackMode {
    #[default]
    Regular,
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationSpec {
    #[serde(rename = "W")]
    pub w: Vec<Vec<i64>>,
    #[serde(rename = "N")]
    pub n: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<i64>>,
    #[serde(default)]
    pub mode: SlackMode,
}

impl ConservationSpec {
    /// Single bound `w·x <= n`.
    pub fn single(w: Vec<i64>, n: i64) -> Self {
        ConservationSpec { w: vec![w], n: vec![n], u: None, mode: SlackMode::Regular }
    }

    pub fn with_u(mut self, u: Vec<i64>) -> Self {
        self.u = Some(u);
        self
    }

    pub fn with_mode(mut self, mode: SlackMode) -> Self {
        self.mode = mode;
        self
    }

    /// Same rows with a different bound vector.
    pub fn with_bounds(&self, n: Vec<i64>) -> Self {
        ConservationSpec { n, ..self.clone() }
    }

    pub fn rows(&self) -> usize {
        self.w.len()
    }

    pub fn apply(&self, x: &[u32]) -> Vec<i64> {
        self.w.iter().map(|row| row.iter().zip(x).map(|(&a, &b)| a * i64::from(b)).sum()).collect()
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.w.is_empty() {
            return Err(Error::InvalidConservation("W has no rows".into()));
        }
        if self.w.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidConservation(format!("every row of W needs {d} entries")));
        }
        if self.n.len() != self.w.len() {
            return Err(Error::InvalidConservation("N must have one entry per row of W".into()));
        }
        if self.n.iter().any(|&v| v <= 0) {
            return Err(Error::InvalidConservation("bounds N must be positive".into()));
        }
        if let Some(u) = &self.u {
            if u.len() != self.w.len() {
                return Err(Error::InvalidConservation("u must have one entry per row of W".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackNetwork {
    base: ReactionNetwork,
    spec: ConservationSpec,
    /// `U - W C`, one row per slack species, one column per base complex.
    d: Vec<Vec<i64>>,
    mode: SlackMode,
    reactant_slack: Vec<Vec<u32>>,
    product_slack: Vec<Vec<u32>>,
    initial: Option<Vec<u32>>,
}

fn check_initial(spec: &ConservationSpec, x0: &[u32], d: usize) -> Result<()> {
    if x0.len() != d {
        return Err(Error::InvalidArgument(format!("initial state has {} entries, expected {d}", x0.len())));
    }
    for (row, (value, &bound)) in spec.apply(x0).into_iter().zip(&spec.n).enumerate() {
        if value > bound {
            return Err(Error::InitialOutOfBounds { row, value, bound });
        }
    }
    Ok(())
}

/// Regular slack network: same connectivity, complexes extended by `D = U - W C`.
/// When `spec.u` is absent each `u_i` is the largest entry of row `i` of `W C`.
pub fn build_regular_slack(net: &ReactionNetwork, spec: &ConservationSpec, x0: Option<&[u32]>) -> Result<SlackNetwork> {
    let d = net.n_species();
    spec.validate(d)?;
    if let Some(x0) = x0 {
        check_initial(spec, x0, d)?;
    }
    let c = net.matrices().complex;
    let wc = linalg::matmul(&spec.w, &c);
    let row_max: Vec<i64> = wc.iter().map(|row| row.iter().copied().max().unwrap_or(0)).collect();
    let u = match &spec.u {
        Some(u) => {
            for (row, (&ui, &req)) in u.iter().zip(&row_max).enumerate() {
                if ui < req {
                    return Err(Error::OffsetTooSmall { row, u: ui, required: req });
                }
                if ui > req {
                    log::warn!("slack offset u[{row}] = {ui} exceeds the least intrusive choice {req}");
                }
            }
            u.clone()
        }
        None => row_max,
    };
    let dmat: Vec<Vec<i64>> = wc.iter().zip(&u).map(|(row, &ui)| row.iter().map(|&v| ui - v).collect()).collect();
    let column = |j: usize| -> Vec<u32> { dmat.iter().map(|row| u32::try_from(row[j]).expect("D is non-negative")).collect() };
    let reactant_slack = net.reactions().iter().map(|rx| column(rx.reactant)).collect();
    let product_slack = net.reactions().iter().map(|rx| column(rx.product)).collect();
    Ok(SlackNetwork {
        base: net.clone(),
        spec: ConservationSpec { u: Some(u), mode: SlackMode::Regular, ..spec.clone() },
        d: dmat,
        mode: SlackMode::Regular,
        reactant_slack,
        product_slack,
        initial: x0.map(<[u32]>::to_vec),
    })
}

/// Optimized slack network: the regular network with least `u`, after
/// cancelling slack reactants common to both sides of each reaction.
pub fn build_optimized_slack(net: &ReactionNetwork, spec: &ConservationSpec, x0: Option<&[u32]>) -> Result<SlackNetwork> {
    let regular = build_regular_slack(net, &ConservationSpec { u: None, ..spec.clone() }, x0)?;
    let mut reactant_slack = regular.reactant_slack.clone();
    let mut product_slack = regular.product_slack.clone();
    for (a, b) in reactant_slack.iter_mut().zip(product_slack.iter_mut()) {
        for (ai, bi) in a.iter_mut().zip(b.iter_mut()) {
            let common = (*ai).min(*bi);
            *ai -= common;
            *bi -= common;
        }
    }
    Ok(SlackNetwork {
        spec: ConservationSpec { mode: SlackMode::Optimized, ..regular.spec },
        mode: SlackMode::Optimized,
        reactant_slack,
        product_slack,
        ..regular
    })
}

/// Dispatches on `spec.mode`.
pub fn build_slack(net: &ReactionNetwork, spec: &ConservationSpec, x0: Option<&[u32]>) -> Result<SlackNetwork> {
    match spec.mode {
        SlackMode::Regular => build_regular_slack(net, spec, x0),
        SlackMode::Optimized => build_optimized_slack(net, spec, x0),
    }
}

impl SlackNetwork {
    pub fn base(&self) -> &ReactionNetwork {
        &self.base
    }

    pub fn spec(&self) -> &ConservationSpec {
        &self.spec
    }

    pub fn mode(&self) -> SlackMode {
        self.mode
    }

    pub fn slack_matrix(&self) -> &[Vec<i64>] {
        &self.d
    }

    pub fn initial(&self) -> Option<&[u32]> {
        self.initial.as_deref()
    }

    pub fn n_reactions(&self) -> usize {
        self.base.n_reactions()
    }

    /// Slack coefficients of reaction `r`'s reactant (after any cancellation).
    pub fn reactant_slack(&self, r: usize) -> &[u32] {
        &self.reactant_slack[r]
    }

    pub fn product_slack(&self, r: usize) -> &[u32] {
        &self.product_slack[r]
    }

    /// Largest reactant slack coefficient per slack species.
    pub fn max_reactant_slack(&self) -> Vec<u32> {
        (0..self.spec.rows())
            .map(|i| self.reactant_slack.iter().map(|c| c[i]).max().unwrap_or(0))
            .collect()
    }

    /// Implicit slack counts `N - W x`.
    pub fn slack_counts(&self, x: &[u32]) -> Vec<i64> {
        self.spec.apply(x).iter().zip(&self.spec.n).map(|(wx, n)| n - wx).collect()
    }

    pub fn contains(&self, x: &[u32]) -> bool {
        self.slack_counts(x).iter().all(|&y| y >= 0)
    }

    /// Base intensity gated by `1{y_i >= reactant slack coefficient}`.
    pub fn slack_intensity(&self, r: usize, x: &[u32]) -> f64 {
        let gate = &self.reactant_slack[r];
        let open = self.slack_counts(x).iter().zip(gate).all(|(&y, &c)| y >= i64::from(c));
        if open {
            self.base.intensity(r, x)
        } else {
            0.0
        }
    }

    /// Checks `(W I)(C; D) S = 0` column by column using the stored slack
    /// coefficients. Holds for both modes.
    pub fn conservation_holds(&self) -> bool {
        (0..self.n_reactions()).all(|r| {
            let dx = self.base.reaction_vector(r);
            self.spec.w.iter().enumerate().all(|(i, row)| {
                let wdx: i64 = row.iter().zip(&dx).map(|(a, b)| a * b).sum();
                let dy = i64::from(self.product_slack[r][i]) - i64::from(self.reactant_slack[r][i]);
                wdx + dy == 0
            })
        })
    }

    fn slack_names(&self) -> Vec<String> {
        let taken: Vec<String> = self.base.species_names();
        let m = self.spec.rows();
        let stem = if m == 1 { vec!["Y".to_string()] } else { (1..=m).map(|i| format!("Y{i}")).collect() };
        stem.into_iter()
            .map(|mut name| {
                while taken.contains(&name) {
                    name.push('_');
                }
                name
            })
            .collect()
    }

    /// The slack network with explicit slack species, for structural analysis and display.
    pub fn extended_network(&self) -> ReactionNetwork {
        let d = self.base.n_species();
        let mut species: Vec<Species> = self.base.species().to_vec();
        for (k, name) in self.slack_names().into_iter().enumerate() {
            species.push(Species { name, index: d + k, slack: true });
        }
        let extend = |c: &Complex, y: &[u32]| -> Complex {
            let mut v = c.0.clone();
            v.extend_from_slice(y);
            Complex(v)
        };
        let mut complexes: Vec<Complex> = Vec::new();
        let mut lookup: HashMap<Complex, usize> = HashMap::new();
        if self.mode == SlackMode::Regular {
            for (j, c) in self.base.complexes().iter().enumerate() {
                let y: Vec<u32> = self.d.iter().map(|row| row[j] as u32).collect();
                let e = extend(c, &y);
                lookup.insert(e.clone(), j);
                complexes.push(e);
            }
        }
        let mut reactions = Vec::new();
        for (r, rx) in self.base.reactions().iter().enumerate() {
            let mut intern = |c: Complex| -> usize {
                *lookup.entry(c.clone()).or_insert_with(|| {
                    complexes.push(c);
                    complexes.len() - 1
                })
            };
            let a = intern(extend(self.base.reactant(r), &self.reactant_slack[r]));
            let b = intern(extend(self.base.product(r), &self.product_slack[r]));
            reactions.push(Reaction {
                reactant: a,
                product: b,
                rate: rx.rate,
                kinetics: Kinetics::SlackGated(self.reactant_slack[r].clone()),
            });
        }
        ReactionNetwork::new(species, complexes, reactions).expect("slack extension of a valid network is valid")
    }
}

/// Number of reactions pushing `w·x` upward; these are the reactions gated
/// off on the boundary `w·x = N`.
pub fn score_conservation_vector(net: &ReactionNetwork, w: &[i64]) -> usize {
    (0..net.n_reactions())
        .filter(|&r| net.reaction_vector(r).iter().zip(w).map(|(a, b)| a * b).sum::<i64>() > 0)
        .count()
}

/// Candidate with the lowest score; ties go to the smaller ℓ¹ norm, then
/// the lexicographically smaller vector.
pub fn suggest_conservation_vector(net: &ReactionNetwork, candidates: &[Vec<i64>]) -> Result<Vec<i64>> {
    candidates
        .iter()
        .min_by_key(|w| (score_conservation_vector(net, w), w.iter().map(|v| v.abs()).sum::<i64>(), (*w).clone()))
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("empty candidate list".into()))
}

/// Candidates `w ∈ {0,1,2}^d` whose support covers every species without an
/// intrinsic bound. Limited to `d <= 8`.
pub fn default_candidates(net: &ReactionNetwork) -> Result<Vec<Vec<i64>>> {
    let d = net.n_species();
    if d > 8 {
        return Err(Error::InvalidArgument(format!("default candidate search supports at most 8 species, got {d}")));
    }
    let unbounded = net.unbounded_species();
    let total = 3usize.pow(d as u32);
    let mut out = Vec::new();
    for code in 1..total {
        let mut w = vec![0i64; d];
        let mut c = code;
        for wi in w.iter_mut() {
            *wi = (c % 3) as i64;
            c /= 3;
        }
        if unbounded.iter().all(|&i| w[i] > 0) {
            out.push(w);
        }
    }
    Ok(out)
}
