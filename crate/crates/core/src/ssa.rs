//! Gillespie direct-method simulation for Monte Carlo cross-checks.
//!
//! Every sample draws from its own ChaCha8 stream: the generator is seeded
//! with the user seed and the stream number is the sample index, so results
//! do not depend on thread scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::slack::SlackNetwork;
use crate::statespace::State;

/// A continuous-time jump process driven by reaction channels.
pub trait JumpModel: Sync {
    fn n_channels(&self) -> usize;
    fn propensity(&self, r: usize, x: &[u32]) -> f64;
    fn changes(&self) -> Vec<Vec<i64>>;
}

impl JumpModel for ReactionNetwork {
    fn n_channels(&self) -> usize {
        self.n_reactions()
    }

    fn propensity(&self, r: usize, x: &[u32]) -> f64 {
        self.intensity(r, x)
    }

    fn changes(&self) -> Vec<Vec<i64>> {
        self.reaction_vectors()
    }
}

impl JumpModel for SlackNetwork {
    fn n_channels(&self) -> usize {
        self.n_reactions()
    }

    fn propensity(&self, r: usize, x: &[u32]) -> f64 {
        self.slack_intensity(r, x)
    }

    fn changes(&self) -> Vec<Vec<i64>> {
        self.base().reaction_vectors()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub seed: u64,
    /// The last state has total rate zero.
    pub absorbed: bool,
}

/// RNG for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Stepper<'a, M: JumpModel + ?Sized> {
    model: &'a M,
    changes: Vec<Vec<i64>>,
    props: Vec<f64>,
}

enum Step {
    Jump(f64),
    Absorbed,
}

impl<'a, M: JumpModel + ?Sized> Stepper<'a, M> {
    fn new(model: &'a M) -> Self {
        Stepper { model, changes: model.changes(), props: vec![0.0; model.n_channels()] }
    }

    /// Draws the holding time and applies one reaction to `x`.
    fn step(&mut self, x: &mut [u32], rng: &mut ChaCha8Rng) -> Step {
        let mut total = 0.0;
        for (r, p) in self.props.iter_mut().enumerate() {
            *p = self.model.propensity(r, x);
            total += *p;
        }
        if total <= 0.0 {
            return Step::Absorbed;
        }
        let e: f64 = rng.sample(Exp1);
        let dt = e / total;
        let mut u = rng.random::<f64>() * total;
        let mut chosen = self.props.len() - 1;
        for (r, &p) in self.props.iter().enumerate() {
            if u < p {
                chosen = r;
                break;
            }
            u -= p;
        }
        // rounding can leave `u` past the last positive channel
        while self.props[chosen] <= 0.0 {
            chosen -= 1;
        }
        for (v, d) in x.iter_mut().zip(&self.changes[chosen]) {
            *v = (i64::from(*v) + d) as u32;
        }
        Step::Jump(dt)
    }
}

/// One trajectory on `[0, t_end]`.
pub fn simulate<M: JumpModel + ?Sized>(model: &M, x0: &[u32], t_end: f64, seed: u64) -> Trajectory {
    let mut rng = sample_rng(seed, 0);
    let mut stepper = Stepper::new(model);
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    loop {
        match stepper.step(&mut x, &mut rng) {
            Step::Absorbed => return Trajectory { times, states, seed, absorbed: true },
            Step::Jump(dt) => {
                t += dt;
                if t > t_end {
                    return Trajectory { times, states, seed, absorbed: false };
                }
                times.push(t);
                states.push(x.clone());
            }
        }
    }
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MfptEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_hit: usize,
    pub n_censored: usize,
}

/// Sample mean of the first time a trajectory from `x0` satisfies `target`.
/// Runs exceeding `cap` (or absorbed outside the target) are censored and
/// excluded from the mean.
pub fn estimate_mfpt<M, F>(model: &M, x0: &[u32], target: F, n: usize, seed: u64, cap: Option<f64>) -> Result<MfptEstimate>
where
    M: JumpModel + ?Sized,
    F: Fn(&[u32]) -> bool + Sync,
{
    if n < 2 {
        return Err(Error::InvalidArgument("at least two samples are needed".into()));
    }
    let cap = cap.unwrap_or(f64::INFINITY);
    let hits: Vec<Option<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let mut stepper = Stepper::new(model);
            let mut x = x0.to_vec();
            let mut t = 0.0;
            loop {
                if target(&x) {
                    return Some(t);
                }
                match stepper.step(&mut x, &mut rng) {
                    Step::Absorbed => return None,
                    Step::Jump(dt) => {
                        t += dt;
                        if t > cap {
                            return None;
                        }
                    }
                }
            }
        })
        .collect();
    let times: Vec<f64> = hits.iter().flatten().copied().collect();
    let n_hit = times.len();
    if n_hit == 0 {
        return Err(Error::AllCensored(n));
    }
    let mut s = Kahan::default();
    times.iter().for_each(|&v| s.add(v));
    let mean = s.sum / n_hit as f64;
    let mut ss = Kahan::default();
    times.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
    let var = if n_hit > 1 { ss.sum / (n_hit - 1) as f64 } else { 0.0 };
    Ok(MfptEstimate { mean, stderr: (var / n_hit as f64).sqrt(), n_hit, n_censored: n - n_hit })
}

/// Fraction of `n` trajectories found at each state at time `t`.
pub fn empirical_density<M: JumpModel + ?Sized>(model: &M, x0: &[u32], t: f64, n: usize, seed: u64) -> BTreeMap<State, f64> {
    let finals: Vec<State> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let mut stepper = Stepper::new(model);
            let mut x = x0.to_vec();
            let mut prev = x.clone();
            let mut clock = 0.0;
            loop {
                match stepper.step(&mut x, &mut rng) {
                    Step::Absorbed => return x,
                    Step::Jump(dt) => {
                        clock += dt;
                        if clock > t {
                            return prev;
                        }
                        prev.copy_from_slice(&x);
                    }
                }
            }
        })
        .collect();
    let mut counts: BTreeMap<State, usize> = BTreeMap::new();
    for s in finals {
        *counts.entry(s).or_default() += 1;
    }
    counts.into_iter().map(|(s, c)| (s, c as f64 / n as f64)).collect()
}

/// Time-weighted occupation frequencies of one long run of `n_jumps` jumps.
pub fn occupation_frequencies<M: JumpModel + ?Sized>(model: &M, x0: &[u32], n_jumps: usize, seed: u64) -> BTreeMap<State, f64> {
    let mut rng = sample_rng(seed, 0);
    let mut stepper = Stepper::new(model);
    let mut x = x0.to_vec();
    let mut occ: BTreeMap<State, Kahan> = BTreeMap::new();
    let mut total = Kahan::default();
    for _ in 0..n_jumps {
        let here = x.clone();
        match stepper.step(&mut x, &mut rng) {
            Step::Absorbed => {
                occ.clear();
                occ.entry(here).or_default().add(1.0);
                total = Kahan { sum: 1.0, c: 0.0 };
                break;
            }
            Step::Jump(dt) => {
                occ.entry(here).or_default().add(dt);
                total.add(dt);
            }
        }
    }
    occ.into_iter().map(|(s, k)| (s, k.sum / total.sum)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_network;

    #[test]
    fn fixed_seed_is_reproducible() {
        let net = parse_network("0 <-> X @ 1, 2").unwrap();
        let a = simulate(&net, &[0], 20.0, 7);
        let b = simulate(&net, &[0], 20.0, 7);
        assert_eq!(a.times, b.times);
        assert_eq!(a.states, b.states);
        assert!(a.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_rate_is_absorbed() {
        let net = parse_network("X -> 0 @ 1").unwrap();
        let tr = simulate(&net, &[0], 10.0, 1);
        assert!(tr.absorbed);
        assert_eq!(tr.states, vec![vec![0]]);
    }

    #[test]
    fn target_at_start_has_zero_mean() {
        let net = parse_network("0 <-> X @ 1, 2").unwrap();
        let est = estimate_mfpt(&net, &[0], |x| x[0] == 0, 10, 3, None).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn exponential_exit_mean() {
        let net = parse_network("X -> 0 @ 2").unwrap();
        let est = estimate_mfpt(&net, &[1], |x| x[0] == 0, 100_000, 11, None).unwrap();
        assert!((est.mean - 0.5).abs() < 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn all_censored_is_an_error() {
        let net = parse_network("0 -> X @ 1").unwrap();
        let r = estimate_mfpt(&net, &[0], |x| x[0] > 1000, 4, 3, Some(1.0));
        assert!(matches!(r, Err(Error::AllCensored(4))));
    }
}
