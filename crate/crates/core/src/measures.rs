//! Dimension-generic measures: unit-ball constants, hit-or-miss Monte Carlo
//! volume, interval unions, spherical caps and cones, simplex covering
//! density and mean-width estimates of the first intrinsic volume.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma;

use crate::circumball::regular_simplex;
use crate::config::sample_direction;
use crate::error::{KpError, Result};
use crate::par;
use crate::rng::{derive_seed, rng_from_seed};
use crate::vector::{dist2, scale};

/// Samples per shard. Fixed so results do not depend on the thread count.
pub const SHARD: u64 = 1 << 14;

/// Volume of the unit ball in `E^d`; `kappa(0) = 1`.
pub fn kappa(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::PI.powf(h) / gamma(h + 1.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `V_k` of the unit ball in `E^d`: `C(d,k) kappa_d / kappa_{d-k}`.
pub fn ball_intrinsic(d: usize, k: usize) -> Result<f64> {
    if k == 0 || k > d {
        return Err(KpError::InvalidInput(format!("intrinsic volume order {k} outside 1..={d}")));
    }
    Ok(binomial(d, k) * kappa(d) / kappa(d - k))
}

/// Hit-or-miss (or mean-of-samples) Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn exact(value: f64, seed: u64) -> Self {
        Self { value, stderr: 0.0, samples: 0, seed }
    }

    /// `|value - target| <= z * stderr`.
    pub fn within(&self, target: f64, z: f64) -> bool {
        (self.value - target).abs() <= z * self.stderr
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn cube(center: &[f64], half: f64) -> Self {
        Self {
            lo: center.iter().map(|c| c - half).collect(),
            hi: center.iter().map(|c| c + half).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| h <= l)
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn intersect(&self, other: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }
}

fn bernoulli_estimate(hits: u64, n: u64, reference: f64, seed: u64) -> McEstimate {
    let p = hits as f64 / n as f64;
    McEstimate {
        value: p * reference,
        stderr: (p * (1.0 - p) / n as f64).sqrt() * reference,
        samples: n,
        seed,
    }
}

/// Hit-or-miss volume of `{x in bbox : member(x)}` from `n` uniform samples.
/// The caller guarantees the body lies inside `bbox`.
pub fn mc_volume<F>(member: F, bbox: &Aabb, n: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> bool + Sync + Send,
{
    if n == 0 {
        return Err(KpError::InvalidInput("Monte Carlo needs at least one sample".into()));
    }
    if bbox.is_empty() {
        return Ok(McEstimate { value: 0.0, stderr: 0.0, samples: n, seed });
    }
    let shards = par::shards(n, SHARD);
    let counts = par::map_indexed(shards.len(), |s| {
        let (_, len) = shards[s];
        let mut rng = rng_from_seed(derive_seed(seed, s as u64));
        let mut x = vec![0.0; bbox.dim()];
        let mut hits = 0u64;
        for _ in 0..len {
            for (k, xk) in x.iter_mut().enumerate() {
                *xk = rng.random_range(bbox.lo[k]..bbox.hi[k]);
            }
            if member(&x) {
                hits += 1;
            }
        }
        hits
    });
    Ok(bernoulli_estimate(counts.iter().sum(), n, bbox.volume(), seed))
}

/// Lebesgue measure of a union of closed intervals (sort and sweep).
pub fn interval_union_length(intervals: &[(f64, f64)]) -> Result<f64> {
    if let Some(&(lo, hi)) = intervals.iter().find(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(KpError::InvalidInput(format!("malformed interval [{lo}, {hi}]")));
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (lo, hi) in sorted {
        cur = match cur {
            Some((cl, ch)) if lo <= ch => Some((cl, ch.max(hi))),
            Some((cl, ch)) => {
                total += ch - cl;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((cl, ch)) = cur {
        total += ch - cl;
    }
    Ok(total)
}

/// Length of the common part of closed intervals.
pub fn interval_intersection_length(intervals: &[(f64, f64)]) -> f64 {
    let lo = intervals.iter().map(|i| i.0).fold(f64::NEG_INFINITY, f64::max);
    let hi = intervals.iter().map(|i| i.1).fold(f64::INFINITY, f64::min);
    if intervals.is_empty() {
        0.0
    } else {
        (hi - lo).max(0.0)
    }
}

/// Volume of `{x in B^d : x_1 >= h}` for `h in [-1, 1]`.
pub fn cap_volume(d: usize, h: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&h) || d == 0 {
        return Err(KpError::InvalidInput(format!("cap height {h} outside [-1, 1]")));
    }
    if h < 0.0 {
        return Ok(kappa(d) - cap_volume(d, -h)?);
    }
    let x = (1.0 - h * h).max(0.0);
    Ok(0.5 * kappa(d) * beta_reg((d as f64 + 1.0) / 2.0, 0.5, x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapCone {
    /// Cap of the unit ball beyond the hyperplane at height `h`.
    pub cap: f64,
    /// Cone from the centre to the `(d-1)`-ball cut out at height `h`.
    pub cone: f64,
    /// `(1-h^2)^{(d-1)/2} / (sqrt(2 pi (d-1)) h) * kappa_d`, the classical cap
    /// estimate used for the two-ball union bound; `None` for `d = 1`.
    pub cap_bound: Option<f64>,
}

impl CapCone {
    /// Solid sector: cap plus cone.
    pub fn sector(&self) -> f64 {
        self.cap + self.cone
    }
}

pub fn cap_and_cone_volumes(d: usize, h: f64) -> Result<CapCone> {
    if !(0.0..=1.0).contains(&h) || d == 0 {
        return Err(KpError::InvalidInput(format!("height {h} outside [0, 1]")));
    }
    let df = d as f64;
    let base = (1.0 - h * h).max(0.0).powf((df - 1.0) / 2.0);
    let cone = h / df * base * kappa(d - 1);
    let cap_bound = (d >= 2).then(|| base / ((2.0 * std::f64::consts::PI * (df - 1.0)).sqrt() * h) * kappa(d));
    Ok(CapCone { cap: cap_volume(d, h)?, cone, cap_bound })
}

/// Monte Carlo estimate of the fraction of a regular simplex of edge 2
/// covered by the unit balls centred at its vertices.
pub fn sigma_simplex_density(d: usize, n: u64, seed: u64) -> Result<McEstimate> {
    if d == 0 || n == 0 {
        return Err(KpError::InvalidInput("need d >= 1 and n >= 1".into()));
    }
    let simplex = regular_simplex(d, 2.0);
    let verts = simplex.points();
    let shards = par::shards(n, SHARD);
    let counts = par::map_indexed(shards.len(), |s| {
        let (_, len) = shards[s];
        let mut rng = rng_from_seed(derive_seed(seed, s as u64));
        let mut w = vec![0.0; d + 1];
        let mut x = vec![0.0; d];
        let mut hits = 0u64;
        for _ in 0..len {
            let mut total = 0.0;
            for wi in w.iter_mut() {
                *wi = rng.sample::<f64, _>(Exp1);
                total += *wi;
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            for (wi, v) in w.iter().zip(verts) {
                for (xk, vk) in x.iter_mut().zip(v) {
                    *xk += wi / total * vk;
                }
            }
            if verts.iter().any(|v| dist2(&x, v) <= 1.0) {
                hits += 1;
            }
        }
        hits
    });
    Ok(bernoulli_estimate(counts.iter().sum(), n, 1.0, seed))
}

/// Mean-width estimate of `V_1` for a convex body given by its support
/// function: `V_1 = c_d E[h(u) + h(-u)]` with `c_d = d kappa_d / (2 kappa_{d-1})`,
/// so that `V_1(B^d) = ball_intrinsic(d, 1)`.
pub fn mc_intrinsic_v1<F>(support: F, d: usize, n: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if d == 0 || n < 2 {
        return Err(KpError::InvalidInput("need d >= 1 and n >= 2".into()));
    }
    let c = d as f64 * kappa(d) / (2.0 * kappa(d - 1));
    let shards = par::shards(n, SHARD / 8);
    let sums = par::map_indexed(shards.len(), |s| {
        let (_, len) = shards[s];
        let mut rng = rng_from_seed(derive_seed(seed, s as u64));
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            let u = sample_direction(&mut rng, d);
            let w = support(&u) + support(&scale(&u, -1.0));
            s1 += w;
            s2 += w * w;
        }
        (s1, s2)
    });
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(McEstimate { value: c * mean, stderr: c * (var / nf).sqrt(), samples: n, seed })
}
