//! Structural certificates: complex-balanced equilibria, product-form
//! stationary laws and exponential Lyapunov drift bounds.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{falling_factorial, ReactionNetwork};
use crate::solver::Distribution;
use crate::statespace::{intrinsic_laws, Region, StateSpace};

/// Largest per-complex imbalance accepted as complex balanced.
pub const BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ComplexBalanceCertificate {
    pub c_star: Vec<f64>,
    pub residual: f64,
}

/// `max_k |inflow_k − outflow_k|` over complexes at concentration `c`.
pub fn complex_balance_residual(net: &ReactionNetwork, c: &[f64]) -> f64 {
    let mut net_flow = vec![0.0; net.n_complexes()];
    for (r, rx) in net.reactions().iter().enumerate() {
        let v = net.deterministic_rate(r, c);
        net_flow[rx.product] += v;
        net_flow[rx.reactant] -= v;
    }
    net_flow.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Positive steady state in the compatibility class of the all-ones vector,
/// by damped Newton in logarithmic coordinates.
fn positive_steady_state(net: &ReactionNetwork) -> Result<Vec<f64>> {
    let d = net.n_species();
    let gamma = net.reaction_vectors();
    let laws = net.conservation_laws();
    let totals: Vec<f64> = laws.iter().map(|l| l.iter().map(|&v| v as f64).sum()).collect();
    let orders: Vec<&[u32]> = (0..net.n_reactions()).map(|r| net.reactant(r).coeffs()).collect();
    let m = d + laws.len();

    let eval = |z: &DVector<f64>| -> DVector<f64> {
        let c: Vec<f64> = z.iter().map(|v| v.exp()).collect();
        let mut f = DVector::zeros(m);
        for (r, g) in gamma.iter().enumerate() {
            let v = net.deterministic_rate(r, &c);
            for i in 0..d {
                f[i] += g[i] as f64 * v;
            }
        }
        for (k, l) in laws.iter().enumerate() {
            f[d + k] = l.iter().zip(&c).map(|(&a, &b)| a as f64 * b).sum::<f64>() - totals[k];
        }
        f
    };
    let jac = |z: &DVector<f64>| -> DMatrix<f64> {
        let c: Vec<f64> = z.iter().map(|v| v.exp()).collect();
        let mut j = DMatrix::zeros(m, d);
        for (r, g) in gamma.iter().enumerate() {
            let v = net.deterministic_rate(r, &c);
            for (s, &nu) in orders[r].iter().enumerate() {
                if nu == 0 {
                    continue;
                }
                for i in 0..d {
                    j[(i, s)] += g[i] as f64 * v * f64::from(nu);
                }
            }
        }
        for (k, l) in laws.iter().enumerate() {
            for s in 0..d {
                j[(d + k, s)] = l[s] as f64 * c[s];
            }
        }
        j
    };

    let mut z = DVector::zeros(d);
    let mut f = eval(&z);
    let scale = net.reactions().iter().map(|r| r.rate).fold(1.0, f64::max);
    for _ in 0..200 {
        let norm = f.amax();
        if norm < 1e-14 * scale {
            return Ok(z.iter().map(|v| v.exp()).collect());
        }
        let svd = jac(&z).svd(true, true);
        let step = svd.solve(&(-&f), 1e-14).map_err(|e| Error::Solve(e.to_string()))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &z + &step * t;
            let ft = eval(&trial);
            if ft.iter().all(|v| v.is_finite()) && ft.amax() < norm {
                z = trial;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let norm = f.amax();
    if norm < 1e-10 * scale {
        Ok(z.iter().map(|v| v.exp()).collect())
    } else {
        Err(Error::NewtonDiverged(norm))
    }
}

/// A complex-balanced equilibrium, if one exists. Networks that are not
/// weakly reversible cannot be complex balanced and give `None` directly; a
/// steady state that fails the per-complex check also gives `None`.
pub fn find_complex_balance(net: &ReactionNetwork) -> Result<Option<ComplexBalanceCertificate>> {
    if !net.weak_reversibility().is_weakly_reversible {
        return Ok(None);
    }
    if net.deficiency() == 0 {
        log::debug!("deficiency zero and weakly reversible: a complex-balanced equilibrium exists");
    }
    let c_star = positive_steady_state(net)?;
    let residual = complex_balance_residual(net, &c_star);
    Ok((residual < BALANCE_TOL).then_some(ComplexBalanceCertificate { c_star, residual }))
}

/// Normalised `∏ c_i^{x_i} / x_i!` over the states of `space`.
pub fn product_form_stationary(space: Arc<StateSpace>, c_star: &[f64]) -> Distribution {
    let logw: Vec<f64> = space
        .states()
        .iter()
        .map(|x| x.iter().zip(c_star).map(|(&k, &c)| f64::from(k) * c.ln() - ln_factorial(k)).sum())
        .collect();
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p.resize(space.dim(), 0.0);
    Distribution { space, p }
}

fn ln_factorial(k: u32) -> f64 {
    (1..=k).map(|i| f64::from(i).ln()).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovCertificate {
    pub w: Vec<i64>,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "M")]
    pub m: u32,
    /// Leading drift coefficient per direction with `w_i > 0` (worst case
    /// over the configurations of the remaining bounded species).
    pub leading: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LyapunovOutcome {
    Certified(LyapunovCertificate),
    Inconclusive { reason: String, species: Option<String>, coefficient: Option<f64> },
}

impl LyapunovOutcome {
    pub fn certificate(&self) -> Option<&LyapunovCertificate> {
        match self {
            LyapunovOutcome::Certified(c) => Some(c),
            LyapunovOutcome::Inconclusive { .. } => None,
        }
    }

    fn inconclusive(reason: impl Into<String>, species: Option<String>, coefficient: Option<f64>) -> Self {
        LyapunovOutcome::Inconclusive { reason: reason.into(), species, coefficient }
    }
}

/// `Q = q0 + Σ q1_i x_i + Σ_{i<=j} q2_ij x_i x_j` over the free species.
#[derive(Debug, Clone)]
struct Quadratic {
    q0: f64,
    q1: Vec<f64>,
    q2: Vec<Vec<f64>>,
}

impl Quadratic {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.q0;
        for i in 0..x.len() {
            v += self.q1[i] * x[i];
            for j in i..x.len() {
                v += self.q2[i][j] * x[i] * x[j];
            }
        }
        v
    }

    /// Highest non-vanishing coefficient along direction `i`.
    fn leading(&self, i: usize) -> f64 {
        if self.q2[i][i].abs() > MARGIN {
            self.q2[i][i]
        } else if self.q1[i].abs() > MARGIN {
            self.q1[i]
        } else {
            self.q0
        }
    }

    /// `sup_{t >= from} q1_i t + q2_ii t²`, assuming a negative leading term.
    fn sup_along(&self, i: usize, from: f64) -> f64 {
        let (a, b) = (self.q2[i][i], self.q1[i]);
        let phi = |t: f64| b * t + a * t * t;
        if a < -MARGIN {
            let vertex = -b / (2.0 * a);
            if vertex > from {
                phi(vertex)
            } else {
                phi(from)
            }
        } else {
            phi(from)
        }
    }
}

const MARGIN: f64 = 1e-12;
const M_CAP: u32 = 1000;

/// Drift polynomial `Q` for a fixed configuration `g` of the bounded species.
fn drift_polynomial(net: &ReactionNetwork, w: &[i64], free: &[usize], bounded: &[usize], g: &[u32]) -> Quadratic {
    let f = free.len();
    let mut q = Quadratic { q0: 0.0, q1: vec![0.0; f], q2: vec![vec![0.0; f]; f] };
    let mut pos = vec![usize::MAX; net.n_species()];
    for (k, &s) in free.iter().enumerate() {
        pos[s] = k;
    }
    for (r, rx) in net.reactions().iter().enumerate() {
        let jump: i64 = net.reaction_vector(r).iter().zip(w).map(|(a, b)| a * b).sum();
        let factor = (jump as f64).exp_m1() * rx.rate;
        if factor == 0.0 {
            continue;
        }
        let nu = net.reactant(r).coeffs();
        let mut constant = factor;
        for (k, &s) in bounded.iter().enumerate() {
            constant *= falling_factorial(g[k], nu[s]);
        }
        if constant == 0.0 {
            continue;
        }
        let vars: Vec<(usize, u32)> = free.iter().filter(|&&s| nu[s] > 0).map(|&s| (pos[s], nu[s])).collect();
        match vars.as_slice() {
            [] => q.q0 += constant,
            [(i, 1)] => q.q1[*i] += constant,
            [(i, 2)] => {
                // x(x-1)
                q.q2[*i][*i] += constant;
                q.q1[*i] -= constant;
            }
            [(i, 1), (j, 1)] => {
                let (a, b) = if i <= j { (*i, *j) } else { (*j, *i) };
                q.q2[a][b] += constant;
            }
            _ => unreachable!("order checked by the caller"),
        }
    }
    q
}

/// Searches for `V(x) = e^{w·x}` with `L V <= −C V + D`. Species with `w_i = 0`
/// must be bounded by intrinsic conservation laws (totals from `x0`).
pub fn lyapunov_certificate(net: &ReactionNetwork, w: &[i64], x0: Option<&[u32]>) -> Result<LyapunovOutcome> {
    if w.len() != net.n_species() {
        return Err(Error::InvalidArgument(format!("w has {} entries for {} species", w.len(), net.n_species())));
    }
    if w.iter().any(|&v| v < 0) {
        return Ok(LyapunovOutcome::inconclusive("w must be non-negative", None, None));
    }
    let names = net.species_names();
    if let Some(r) = (0..net.n_reactions()).find(|&r| net.reactant(r).order() > 2) {
        return Ok(LyapunovOutcome::inconclusive(
            format!("reaction `{}` has an intensity of degree above 2", net.format_reaction(r)),
            None,
            None,
        ));
    }
    let free: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0).collect();
    let bounded: Vec<usize> = (0..w.len()).filter(|&i| w[i] == 0).collect();
    if free.is_empty() {
        return Ok(LyapunovOutcome::inconclusive("w is zero", None, None));
    }

    // configurations of the bounded species
    let configs: Vec<Vec<u32>> = if bounded.is_empty() {
        vec![Vec::new()]
    } else {
        let laws = match intrinsic_laws(net, &[w.to_vec()], x0) {
            Ok(l) => l,
            Err(Error::UnboundedSpecies(s)) => {
                return Ok(LyapunovOutcome::inconclusive("species with w = 0 is not bounded", Some(s), None))
            }
            Err(e) => return Err(e),
        };
        let sub_laws: Vec<(Vec<i64>, i64)> = laws
            .into_iter()
            .filter(|(l, _)| free.iter().all(|&i| l[i] == 0))
            .map(|(l, t)| (bounded.iter().map(|&i| l[i]).collect(), t))
            .collect();
        let sub_names: Vec<String> = bounded.iter().map(|&i| names[i].clone()).collect();
        let region = Region::HalfSpaces { w: Vec::new(), n: Vec::new(), laws: sub_laws };
        match region.enumerate(&sub_names) {
            Ok(c) => c,
            Err(Error::UnboundedSpecies(s)) => {
                return Ok(LyapunovOutcome::inconclusive("species with w = 0 is not bounded", Some(s), None))
            }
            Err(e) => return Err(e),
        }
    };

    let polys: Vec<Quadratic> = configs.iter().map(|g| drift_polynomial(net, w, &free, &bounded, g)).collect();
    let f = free.len();
    let mut leading = Vec::with_capacity(f);
    for i in 0..f {
        let worst = polys.iter().map(|q| q.leading(i)).fold(f64::NEG_INFINITY, f64::max);
        leading.push((names[free[i]].clone(), worst));
    }
    if let Some((name, coef)) = leading.iter().find(|(_, c)| *c >= -MARGIN) {
        return Ok(LyapunovOutcome::inconclusive(
            "leading drift coefficient is not negative",
            Some(name.clone()),
            Some(*coef),
        ));
    }
    for q in &polys {
        for i in 0..f {
            for j in i + 1..f {
                if q.q2[i][j] > MARGIN {
                    return Ok(LyapunovOutcome::inconclusive(
                        format!("positive mixed coefficient between {} and {}", names[free[i]], names[free[j]]),
                        Some(names[free[i]].clone()),
                        Some(q.q2[i][j]),
                    ));
                }
            }
        }
    }

    // Outside the box some free x_k >= M + 1. Dropping the non-positive mixed
    // terms, Q <= q0 + Σ_{i≠k} sup_t φ_i(t) + sup_{t>=M+1} φ_k(t).
    let shell_bound = |m: u32| -> f64 {
        polys
            .iter()
            .map(|q| {
                (0..f)
                    .map(|k| {
                        q.q0 + (0..f).filter(|&i| i != k).map(|i| q.sup_along(i, 0.0)).sum::<f64>()
                            + q.sup_along(k, f64::from(m) + 1.0)
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let constants = polys.iter().map(|q| q.q0.max(0.0)).fold(0.0, f64::max);
    let weakest = leading.iter().map(|(_, c)| -c).fold(f64::INFINITY, f64::min);
    let mut m = ((1.1 * constants / weakest).ceil() as u32).max(1);
    let c = loop {
        let b = shell_bound(m);
        if b < -MARGIN {
            break -b;
        }
        if m >= M_CAP {
            return Ok(LyapunovOutcome::inconclusive(format!("no drift bound found for boxes up to {M_CAP}"), None, None));
        }
        m = (m * 2).min(M_CAP);
    };

    // D = max over the box of (Q + C) V, so that L V <= −C V + D everywhere.
    let wf: Vec<f64> = free.iter().map(|&i| w[i] as f64).collect();
    let side = m as usize + 1;
    let total = side.pow(f as u32);
    let d = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = vec![0.0; f];
            for v in x.iter_mut() {
                *v = (idx % side) as f64;
                idx /= side;
            }
            let logv: f64 = x.iter().zip(&wf).map(|(a, b)| a * b).sum();
            polys.iter().map(|q| (q.eval(&x) + c) * logv.exp()).fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let d = d.max(MARGIN);
    Ok(LyapunovOutcome::Certified(LyapunovCertificate { w: w.to_vec(), c, d, m, leading }))
}
