//! Point configurations, distance structure and contraction predicates.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{KpError, Result};
use crate::rng::{rng_from_seed, KpRng};
use crate::vector::{dist, norm};

/// Default slack for contraction predicates.
pub const DEFAULT_TOL: f64 = 1e-12;

/// An ordered list of `N >= 1` points in `E^d`.
///
/// Serialises as `{"dim": d, "points": [[x1, .., xd], ..]}`. Deserialisation
/// validates the same invariants as [`Configuration::new`], so non-finite
/// coordinates and ragged rows are rejected at the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration")]
pub struct Configuration {
    dim: usize,
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawConfiguration {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<RawConfiguration> for Configuration {
    type Error = KpError;

    fn try_from(raw: RawConfiguration) -> Result<Self> {
        Configuration::new(raw.dim, raw.points)
    }
}

impl Configuration {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(KpError::InvalidInput("dimension must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(KpError::InvalidInput("configuration needs at least one point".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(KpError::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(KpError::InvalidInput("non-finite coordinate".into()));
            }
        }
        Ok(Self { dim, points })
    }

    /// Builds a configuration from rows, taking the dimension from the first row.
    pub fn from_rows(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        Self::new(dim, points)
    }

    /// A configuration on the real line.
    pub fn line(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|k| self.points.iter().map(|p| p[k]).sum::<f64>() / n)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(KpError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.len() != other.len() {
            return Err(KpError::CountMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }
}

/// Pairwise distance matrix with its off-diagonal extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSummary {
    pub min_pairwise: f64,
    pub max_pairwise: f64,
    pub matrix: Vec<Vec<f64>>,
}

pub fn pairwise_distances(config: &Configuration) -> DistanceSummary {
    let n = config.len();
    let mut matrix = vec![vec![0.0; n]; n];
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist(config.point(i), config.point(j));
            matrix[i][j] = d;
            matrix[j][i] = d;
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    if n < 2 {
        lo = 0.0;
    }
    DistanceSummary { min_pairwise: lo, max_pairwise: hi, matrix }
}

/// `|q_i - q_j| <= |p_i - p_j| + tol` for every pair.
pub fn is_contraction(p: &Configuration, q: &Configuration, tol: f64) -> Result<bool> {
    p.check_compatible(q)?;
    let n = p.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(q.point(i), q.point(j)) > dist(p.point(i), p.point(j)) + tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Closed interval of admissible separating values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatingInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SeparatingInterval {
    pub fn contains(&self, lambda: f64) -> bool {
        self.lo <= lambda && lambda <= self.hi
    }
}

/// The set of separating values `lambda` with
/// `|q_i - q_j| <= lambda <= |p_i - p_j|` for all `i != j`, i.e.
/// `[max |q_i - q_j|, min |p_i - p_j|]`, or `None` when that is empty.
pub fn uniform_contraction_interval(
    p: &Configuration,
    q: &Configuration,
) -> Result<Option<SeparatingInterval>> {
    p.check_compatible(q)?;
    if p.len() < 2 {
        return Err(KpError::InvalidInput("uniform contraction needs N >= 2".into()));
    }
    let lo = pairwise_distances(q).max_pairwise;
    let hi = pairwise_distances(p).min_pairwise;
    Ok((lo <= hi).then_some(SeparatingInterval { lo, hi }))
}

/// Coordinatewise contraction: every coordinate gap shrinks for every pair.
pub fn is_strong_contraction(p: &Configuration, q: &Configuration, tol: f64) -> Result<bool> {
    p.check_compatible(q)?;
    let n = p.len();
    for k in 0..p.dim() {
        for i in 0..n {
            for j in (i + 1)..n {
                let gq = (q.point(i)[k] - q.point(j)[k]).abs();
                let gp = (p.point(i)[k] - p.point(j)[k]).abs();
                if gq > gp + tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

/// One-sided reflection about the hyperplane `{x[axis] = level}`: points in
/// the chosen open half-space are mirrored, everything else stays put.
/// `axis` is zero-based.
pub fn one_sided_reflection(
    config: &Configuration,
    axis: usize,
    level: f64,
    side: Side,
) -> Result<Configuration> {
    if axis >= config.dim() {
        return Err(KpError::AxisOutOfRange { axis, dim: config.dim() });
    }
    let points = config
        .points()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            let x = p[axis];
            let reflect = match side {
                Side::Positive => x > level,
                Side::Negative => x < level,
            };
            if reflect {
                p[axis] = 2.0 * level - x;
            }
            p
        })
        .collect();
    Configuration::new(config.dim(), points)
}

/// Uniform sample from the ball of radius `radius` around the origin.
pub fn sample_in_ball(rng: &mut KpRng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&g);
        if n == 0.0 || !n.is_finite() {
            continue;
        }
        let u: f64 = rng.random();
        let r = radius * u.powf(1.0 / dim as f64);
        return g.into_iter().map(|x| x * r / n).collect();
    }
}

/// Uniform direction on the unit sphere.
pub fn sample_direction(rng: &mut KpRng, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&g);
        if n > 1e-300 && n.is_finite() {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Name recorded alongside experiment output.
pub const SAMPLER_NAME: &str = "ball-q/dart-p";

/// Default radius of the region `p` is thrown into.
pub fn default_region_scale(dim: usize, n: usize, lambda: f64) -> f64 {
    lambda * ((n as f64).powf(1.0 / dim as f64) + 2.0)
}

/// Samples a uniform-contraction pair with separating value `lambda`.
///
/// `q` is i.i.d. uniform in a ball of radius `lambda / 2`; `p` is placed by
/// dart throwing with minimum separation `lambda` inside a ball of radius
/// `region_scale` (default [`default_region_scale`]).
pub fn sample_uniform_contraction_pair(
    dim: usize,
    n: usize,
    lambda: f64,
    region_scale: Option<f64>,
    seed: u64,
) -> Result<(Configuration, Configuration)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(KpError::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    if n < 2 || dim == 0 {
        return Err(KpError::InvalidInput("need N >= 2 and d >= 1".into()));
    }
    let region = region_scale.unwrap_or_else(|| default_region_scale(dim, n, lambda));
    let mut rng = rng_from_seed(seed);

    // q first: a ball of radius lambda/2 has diameter lambda; shrink by a hair
    // so rounding cannot push a pair past lambda.
    let q_radius = 0.5 * lambda * (1.0 - 1e-12);
    let q_points: Vec<Vec<f64>> = (0..n).map(|_| sample_in_ball(&mut rng, dim, q_radius)).collect();
    let q = Configuration::new(dim, q_points)?;

    let p = dart_throw(&mut rng, dim, n, lambda, region)?;
    debug_assert!(uniform_contraction_interval(&p, &q)
        .ok()
        .flatten()
        .is_some_and(|iv| iv.contains(lambda)));
    Ok((p, q))
}

/// Dart throwing: `n` points with pairwise distance `>= separation` inside a
/// ball of radius `region`, with a total budget of `n * 10^4` attempts.
pub fn dart_throw(
    rng: &mut KpRng,
    dim: usize,
    n: usize,
    separation: f64,
    region: f64,
) -> Result<Configuration> {
    let budget = n * 10_000;
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut attempts = 0;
    while pts.len() < n {
        if attempts >= budget {
            return Err(KpError::PlacementFailed { wanted: n, separation, attempts });
        }
        attempts += 1;
        let cand = sample_in_ball(rng, dim, region);
        if pts.iter().all(|p| dist(p, &cand) >= separation) {
            pts.push(cand);
        }
    }
    Configuration::new(dim, pts)
}

/// Applies a random composite of `count` one-sided reflections. Levels are
/// drawn inside the coordinate range of the current configuration.
pub fn random_reflection_composite(
    config: &Configuration,
    count: usize,
    rng: &mut KpRng,
) -> Configuration {
    let mut cur = config.clone();
    for _ in 0..count {
        let axis = rng.random_range(0..cur.dim());
        let (lo, hi) = cur
            .points()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[axis]), hi.max(p[axis])));
        let level = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let side = if rng.random_bool(0.5) { Side::Positive } else { Side::Negative };
        cur = one_sided_reflection(&cur, axis, level, side).expect("axis drawn in range");
    }
    cur
}

/// Applies an independent random 1-Lipschitz piecewise-linear map to each
/// coordinate. Every such image is a strong contraction, and the family
/// reaches contractions outside the reflection semigroup.
pub fn random_lipschitz_contraction(config: &Configuration, rng: &mut KpRng) -> Configuration {
    let d = config.dim();
    let n = config.len();
    let mut out = config.points().to_vec();
    for k in 0..d {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| config.point(a)[k].total_cmp(&config.point(b)[k]));
        let shift: f64 = rng.random_range(-1.0..1.0);
        let first = order[0];
        let mut prev_src = config.point(first)[k];
        let mut prev_dst = prev_src + shift;
        out[first][k] = prev_dst;
        for &i in &order[1..] {
            let src = config.point(i)[k];
            let slope: f64 = rng.random_range(-1.0..=1.0);
            let dst = prev_dst + slope * (src - prev_src);
            out[i][k] = dst;
            prev_src = src;
            prev_dst = dst;
        }
    }
    Configuration::new(d, out).expect("finite image of a finite configuration")
}
