//! Simulated annealing over uniform-contraction pairs.
//!
//! The objective is `V_k(B[p]) - V_k(B[q])` for the intersections of unit
//! balls, so a positive value would be a counterexample.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::campaign::verify_intersection_pair;
use super::records::Method;
use crate::config::{sample_uniform_contraction_pair, uniform_contraction_interval, Configuration};
use crate::error::{KpError, Result};
use crate::rng::{derive_seed, rng_from_seed, KpRng};
use crate::vector::{dist, sub};

/// Geometric cooling from `t_start` to `t_end`; `step` is the standard
/// deviation of a point perturbation in units of `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t_start: f64,
    pub t_end: f64,
    pub step: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { t_start: 1e-2, t_end: 1e-5, step: 0.05 }
    }
}

impl Schedule {
    pub fn temperature(&self, iter: u64, iterations: u64) -> f64 {
        if iterations <= 1 {
            return self.t_start;
        }
        let f = iter as f64 / (iterations - 1) as f64;
        self.t_start * (self.t_end / self.t_start).powf(f)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairStats {
    /// Proposals where `q` had to be rescaled.
    pub q_rescales: u64,
    /// Individual closest-pair pushes applied to `p`.
    pub p_pushes: u64,
    /// Proposals discarded because repair did not restore the constraint.
    pub rejected: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: u64,
    pub temperature: f64,
    pub objective: f64,
    pub best: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub lambda: f64,
    pub iterations: u64,
    pub schedule: Schedule,
    pub seed: u64,
    /// Method for the objective; planar exact in the plane, Monte Carlo
    /// elsewhere.
    pub method: Method,
    pub budget: u64,
}

impl SearchParams {
    pub fn planar(k: usize, n: usize, lambda: f64, iterations: u64, seed: u64) -> Self {
        Self {
            d: 2,
            k,
            n,
            lambda,
            iterations,
            schedule: Schedule::default(),
            seed,
            method: Method::PlanarExact,
            budget: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchState {
    pub p: Configuration,
    pub q: Configuration,
    pub objective: f64,
    pub temperature: f64,
    pub best_p: Configuration,
    pub best_q: Configuration,
    pub best_objective: f64,
    pub repair: RepairStats,
    pub accepted: u64,
    pub trace: Vec<TracePoint>,
}

/// Exact check of `max |q_i - q_j| <= lambda <= min |p_i - p_j|`.
pub fn satisfies_uc(p: &Configuration, q: &Configuration, lambda: f64) -> bool {
    matches!(uniform_contraction_interval(p, q), Ok(Some(iv)) if iv.contains(lambda))
}

/// Rescales `q` about its centroid so its diameter is at most `lambda`.
/// Returns whether a rescale happened.
pub fn contract_q(q: &mut Configuration, lambda: f64) -> Result<bool> {
    let diam = crate::config::pairwise_distances(q).max_pairwise;
    if diam <= lambda {
        return Ok(false);
    }
    let c = q.centroid();
    let mut s = lambda / diam;
    // rounding can leave a pair a hair above lambda; shrink until it cannot
    for _ in 0..60 {
        let pts: Vec<Vec<f64>> =
            q.points().iter().map(|x| x.iter().zip(&c).map(|(xi, ci)| ci + s * (xi - ci)).collect()).collect();
        let cand = Configuration::new(q.dim(), pts)?;
        if crate::config::pairwise_distances(&cand).max_pairwise <= lambda {
            *q = cand;
            return Ok(true);
        }
        s *= 1.0 - 1e-12;
    }
    Err(KpError::InvalidInput("could not contract q below lambda".into()))
}

/// Pushes apart the closest pair of `p` until every distance is at least
/// `lambda`. Returns the number of pushes, or `None` past the budget.
pub fn expand_p(p: &mut Configuration, lambda: f64, rng: &mut KpRng) -> Result<Option<u64>> {
    let n = p.len();
    let d = p.dim();
    let mut pts = p.points().to_vec();
    let budget = 200 * n as u64 * n as u64;
    let target = lambda * (1.0 + 1e-12);
    let mut pushes = 0;
    loop {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            for j in (i + 1)..n {
                let g = dist(&pts[i], &pts[j]);
                if g < best.0 {
                    best = (g, i, j);
                }
            }
        }
        let (g, i, j) = best;
        if g >= lambda {
            *p = Configuration::new(d, pts)?;
            return Ok(Some(pushes));
        }
        if pushes >= budget {
            return Ok(None);
        }
        let dir = if g > 0.0 {
            sub(&pts[j], &pts[i]).into_iter().map(|x| x / g).collect::<Vec<_>>()
        } else {
            crate::config::sample_direction(rng, d)
        };
        let half = 0.5 * (target - g);
        for a in 0..d {
            pts[i][a] -= half * dir[a];
            pts[j][a] += half * dir[a];
        }
        pushes += 1;
    }
}

fn objective(params: &SearchParams, p: &Configuration, q: &Configuration, seed: u64) -> Result<f64> {
    let r = verify_intersection_pair(p, q, params.k, params.method, params.budget, seed)?;
    Ok(-r.margin)
}

fn perturb(x: &Configuration, sigma: f64, rng: &mut KpRng) -> Result<Configuration> {
    let pts = x
        .points()
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| {
                    let z: f64 = StandardNormal.sample(rng);
                    c + sigma * z
                })
                .collect()
        })
        .collect();
    Configuration::new(x.dim(), pts)
}

/// Single-chain annealing. Each iteration perturbs both families, repairs
/// `q` first and then `p`, rejects the proposal unless the uniform
/// contraction condition holds exactly, and applies the Metropolis rule for
/// maximizing the objective.
pub fn anneal_search(params: &SearchParams) -> Result<SearchState> {
    let lambda = params.lambda;
    if !(lambda > 0.0 && lambda <= 2.0) {
        return Err(KpError::InvalidInput(format!("lambda must lie in (0, 2], got {lambda}")));
    }
    let (p0, q0) = sample_uniform_contraction_pair(params.d, params.n, lambda, None, derive_seed(params.seed, 0))?;
    let mut rng = rng_from_seed(derive_seed(params.seed, 1));
    let eval_seed = derive_seed(params.seed, 2);
    let mut cur = (p0, q0);
    let mut cur_obj = objective(params, &cur.0, &cur.1, derive_seed(eval_seed, 0))?;
    let mut state = SearchState {
        p: cur.0.clone(),
        q: cur.1.clone(),
        objective: cur_obj,
        temperature: params.schedule.t_start,
        best_p: cur.0.clone(),
        best_q: cur.1.clone(),
        best_objective: cur_obj,
        repair: RepairStats::default(),
        accepted: 0,
        trace: Vec::with_capacity(params.iterations as usize),
    };
    let sigma = params.schedule.step * lambda;
    for iter in 0..params.iterations {
        let t = params.schedule.temperature(iter, params.iterations);
        let mut p = perturb(&cur.0, sigma, &mut rng)?;
        let mut q = perturb(&cur.1, sigma, &mut rng)?;
        if contract_q(&mut q, lambda)? {
            state.repair.q_rescales += 1;
        }
        let repaired = match expand_p(&mut p, lambda, &mut rng)? {
            Some(pushes) => {
                state.repair.p_pushes += pushes;
                satisfies_uc(&p, &q, lambda)
            }
            None => false,
        };
        // the uniform draw is taken on every iteration so rejected repairs
        // do not shift the random stream
        let u: f64 = rng.random();
        let mut accepted = false;
        if repaired {
            let obj = objective(params, &p, &q, derive_seed(eval_seed, iter + 1))?;
            if obj >= cur_obj || u < ((obj - cur_obj) / t).exp() {
                accepted = true;
                cur = (p, q);
                cur_obj = obj;
                state.accepted += 1;
                if obj > state.best_objective {
                    state.best_objective = obj;
                    state.best_p = cur.0.clone();
                    state.best_q = cur.1.clone();
                }
            }
        } else {
            state.repair.rejected += 1;
        }
        state.trace.push(TracePoint { iter, temperature: t, objective: cur_obj, best: state.best_objective, accepted });
    }
    state.p = cur.0;
    state.q = cur.1;
    state.objective = cur_obj;
    state.temperature = params.schedule.temperature(params.iterations.saturating_sub(1), params.iterations);
    Ok(state)
}
