//! Reaction networks, structural matrices, mass-action intensities and
//! graph-theoretic properties of the complex graph.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    pub index: usize,
    /// Implicit slack reactant. Its count is never part of a tracked state
    /// and its reactant coefficients act as indicator gates.
    #[serde(default)]
    pub slack: bool,
}

/// Stoichiometric vector of a complex; the zero vector is the empty complex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Complex(pub Vec<u32>);

impl Complex {
    pub fn zero(dim: usize) -> Self {
        Complex(vec![0; dim])
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kinetics {
    MassAction,
    /// Mass action on the ordinary species times `1{y_i >= c_i}` for each
    /// slack species, where `c` holds the reactant's slack coefficients.
    SlackGated(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub reactant: usize,
    pub product: usize,
    pub rate: f64,
    pub kinetics: Kinetics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    complexes: Vec<Complex>,
    reactions: Vec<Reaction>,
}

/// Connectivity, complex and stoichiometry matrices, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralMatrices {
    #[serde(rename = "S")]
    pub connectivity: Vec<Vec<i64>>,
    #[serde(rename = "C")]
    pub complex: Vec<Vec<i64>>,
    #[serde(rename = "Gamma")]
    pub stoichiometry: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeakReversibility {
    pub is_weakly_reversible: bool,
    /// Complex indices per linkage class, ordered by smallest member.
    pub linkage_classes: Vec<Vec<usize>>,
}

/// `m (m-1) ... (m-n+1)`, zero when `m < n`.
pub fn falling_factorial(m: u32, n: u32) -> f64 {
    if m < n {
        return 0.0;
    }
    (0..n).map(|k| f64::from(m - k)).product()
}

impl ReactionNetwork {
    /// Validates and assembles a network. Species indices are reassigned to
    /// their list positions.
    pub fn new(mut species: Vec<Species>, complexes: Vec<Complex>, reactions: Vec<Reaction>) -> Result<Self> {
        if reactions.is_empty() {
            return Err(Error::InvalidNetwork("no reactions".into()));
        }
        let mut names = HashMap::new();
        for (i, s) in species.iter_mut().enumerate() {
            s.index = i;
            if names.insert(s.name.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate species `{}`", s.name)));
            }
        }
        let dim = species.len();
        let mut seen = HashMap::new();
        for (i, c) in complexes.iter().enumerate() {
            if c.0.len() != dim {
                return Err(Error::InvalidNetwork(format!("complex {i} has {} entries, expected {dim}", c.0.len())));
            }
            if seen.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("complex {i} is a duplicate")));
            }
        }
        let mut used = vec![false; complexes.len()];
        let mut pairs = HashMap::new();
        for (r, rx) in reactions.iter().enumerate() {
            if rx.reactant >= complexes.len() || rx.product >= complexes.len() {
                return Err(Error::InvalidNetwork(format!("reaction {r} references a missing complex")));
            }
            if rx.reactant == rx.product {
                return Err(Error::InvalidNetwork(format!("reaction {r}: reactant equals product")));
            }
            if !(rx.rate > 0.0 && rx.rate.is_finite()) {
                return Err(Error::InvalidNetwork(format!("reaction {r}: rate constant must be positive")));
            }
            if pairs.insert((rx.reactant, rx.product), r).is_some() {
                return Err(Error::InvalidNetwork(format!("reaction {r} duplicates an earlier reaction")));
            }
            used[rx.reactant] = true;
            used[rx.product] = true;
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::InvalidNetwork(format!("complex {i} is not used by any reaction")));
        }
        Ok(ReactionNetwork { species, complexes, reactions })
    }

    /// Mass-action network from named species and `(reactant, product, rate)` triples.
    /// Complexes are deduplicated in order of first appearance.
    pub fn from_reactions(names: &[&str], reactions: &[(Vec<u32>, Vec<u32>, f64)]) -> Result<Self> {
        let species = names
            .iter()
            .enumerate()
            .map(|(index, n)| Species { name: (*n).to_string(), index, slack: false })
            .collect();
        let mut complexes: Vec<Complex> = Vec::new();
        let mut lookup: HashMap<Complex, usize> = HashMap::new();
        let mut intern = |c: &Vec<u32>| -> usize {
            let c = Complex(c.clone());
            *lookup.entry(c.clone()).or_insert_with(|| {
                complexes.push(c);
                complexes.len() - 1
            })
        };
        let rxs: Vec<Reaction> = reactions
            .iter()
            .map(|(a, b, k)| Reaction { reactant: intern(a), product: intern(b), rate: *k, kinetics: Kinetics::MassAction })
            .collect();
        ReactionNetwork::new(species, complexes, rxs)
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn complexes(&self) -> &[Complex] {
        &self.complexes
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_complexes(&self) -> usize {
        self.complexes.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name.clone()).collect()
    }

    pub fn reactant(&self, r: usize) -> &Complex {
        &self.complexes[self.reactions[r].reactant]
    }

    pub fn product(&self, r: usize) -> &Complex {
        &self.complexes[self.reactions[r].product]
    }

    /// Net change `ν' - ν` of reaction `r`.
    pub fn reaction_vector(&self, r: usize) -> Vec<i64> {
        let a = self.reactant(r);
        let b = self.product(r);
        a.0.iter().zip(&b.0).map(|(&x, &y)| i64::from(y) - i64::from(x)).collect()
    }

    pub fn reaction_vectors(&self) -> Vec<Vec<i64>> {
        (0..self.n_reactions()).map(|r| self.reaction_vector(r)).collect()
    }

    pub fn matrices(&self) -> StructuralMatrices {
        let nc = self.n_complexes();
        let nr = self.n_reactions();
        let mut s = vec![vec![0i64; nr]; nc];
        for (r, rx) in self.reactions.iter().enumerate() {
            s[rx.reactant][r] = -1;
            s[rx.product][r] = 1;
        }
        let c: Vec<Vec<i64>> = (0..self.n_species())
            .map(|i| self.complexes.iter().map(|cx| i64::from(cx.0[i])).collect())
            .collect();
        let gamma = linalg::matmul(&c, &s);
        StructuralMatrices { connectivity: s, complex: c, stoichiometry: gamma }
    }

    /// Stochastic intensity of reaction `r` at state `x` (one entry per species).
    pub fn intensity(&self, r: usize, x: &[u32]) -> f64 {
        let rx = &self.reactions[r];
        let alpha = &self.complexes[rx.reactant].0;
        let mut value = rx.rate;
        for (i, (&a, &xi)) in alpha.iter().zip(x).enumerate() {
            if a == 0 {
                continue;
            }
            let gated = self.species[i].slack && matches!(rx.kinetics, Kinetics::SlackGated(_));
            if gated {
                if xi < a {
                    return 0.0;
                }
            } else {
                value *= falling_factorial(xi, a);
                if value == 0.0 {
                    return 0.0;
                }
            }
        }
        value
    }

    /// Deterministic mass-action rate `κ ∏ c_i^{ν_i}`.
    pub fn deterministic_rate(&self, r: usize, c: &[f64]) -> f64 {
        let rx = &self.reactions[r];
        let alpha = &self.complexes[rx.reactant].0;
        alpha.iter().zip(c).fold(rx.rate, |acc, (&a, &ci)| acc * ci.powi(a as i32))
    }

    fn complex_graph(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_complexes()];
        for rx in &self.reactions {
            adj[rx.reactant].push(rx.product);
        }
        adj
    }

    pub fn linkage_classes(&self) -> Vec<Vec<usize>> {
        let adj = self.complex_graph();
        let mut undirected = adj.clone();
        for (v, out) in adj.iter().enumerate() {
            for &w in out {
                undirected[w].push(v);
            }
        }
        graph::strongly_connected_components(&undirected)
    }

    pub fn weak_reversibility(&self) -> WeakReversibility {
        let linkage_classes = self.linkage_classes();
        let strong = graph::strongly_connected_components(&self.complex_graph());
        // Strong components refine linkage classes, so equal counts means equal partitions.
        WeakReversibility { is_weakly_reversible: strong.len() == linkage_classes.len(), linkage_classes }
    }

    pub fn stoichiometric_rank(&self) -> usize {
        linalg::rank(&self.matrices().stoichiometry)
    }

    /// `n - ℓ - s` with exact rank.
    pub fn deficiency(&self) -> usize {
        let n = self.n_complexes();
        let l = self.linkage_classes().len();
        let s = self.stoichiometric_rank();
        n - l - s
    }

    /// Integer basis of the conservation laws `r` with `rᵀ Γ = 0`.
    pub fn conservation_laws(&self) -> Vec<Vec<i64>> {
        let gamma = self.matrices().stoichiometry;
        linalg::left_nullspace(&gamma, self.n_species())
    }

    /// Non-negative conservation laws found in the basis (sign-normalised).
    pub fn nonnegative_conservation_laws(&self) -> Vec<Vec<i64>> {
        self.conservation_laws()
            .into_iter()
            .filter_map(|v| {
                if v.iter().all(|&x| x >= 0) {
                    Some(v)
                } else if v.iter().all(|&x| x <= 0) {
                    Some(v.iter().map(|x| -x).collect())
                } else {
                    None
                }
            })
            .collect()
    }

    /// Species with no positive coefficient in any non-negative conservation law.
    pub fn unbounded_species(&self) -> Vec<usize> {
        let laws = self.nonnegative_conservation_laws();
        (0..self.n_species()).filter(|&i| !laws.iter().any(|l| l[i] > 0)).collect()
    }

    pub fn format_complex(&self, c: &Complex) -> String {
        let terms: Vec<String> = c
            .0
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| {
                let name = &self.species[i].name;
                if k == 1 {
                    name.clone()
                } else {
                    format!("{k}{name}")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }

    pub fn format_reaction(&self, r: usize) -> String {
        let rx = &self.reactions[r];
        format!(
            "{} -> {} @ {}",
            self.format_complex(&self.complexes[rx.reactant]),
            self.format_complex(&self.complexes[rx.product]),
            rx.rate
        )
    }

    /// Emits the network in the DSL, one irreversible reaction per line.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        let slack: Vec<&str> = self.species.iter().filter(|s| s.slack).map(|s| s.name.as_str()).collect();
        if !slack.is_empty() {
            let _ = writeln!(out, "# slack species (indicator-gated): {}", slack.join(", "));
        }
        for r in 0..self.n_reactions() {
            let _ = writeln!(out, "{}", self.format_reaction(r));
        }
        out
    }
}
