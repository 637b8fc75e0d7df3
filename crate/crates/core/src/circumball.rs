//! Minimal enclosing ball.
//!
//! The main routine is the randomized move-to-front support-set algorithm.
//! [`circumball_exhaustive`] enumerates support subsets directly and is kept
//! as an independent cross-check for small inputs.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::config::Configuration;
use crate::rng::rng_from_seed;
use crate::vector::{dist, dist2};

#[derive(Debug, Clone, PartialEq)]
pub struct CircumballResult {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl CircumballResult {
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        dist(&self.center, x) <= self.radius + tol
    }
}

/// Smallest ball having every support point on its boundary, with centre in
/// the affine hull of the support. `None` for an empty support.
fn ball_through(points: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let first = *points.first()?;
    if points.len() == 1 {
        return Some((first.to_vec(), 0.0));
    }
    let d = first.len();
    let m = points.len() - 1;
    let a = DMatrix::from_fn(d, m, |r, c| points[c + 1][r] - first[r]);
    let gram = a.transpose() * &a * 2.0;
    let rhs = DVector::from_fn(m, |j, _| a.column(j).norm_squared());
    let coef = match gram.clone().lu().solve(&rhs) {
        Some(c) if c.iter().all(|x| x.is_finite()) => c,
        _ => gram.svd(true, true).solve(&rhs, 1e-14).ok()?,
    };
    let offset = &a * coef;
    let center: Vec<f64> = first.iter().zip(offset.iter()).map(|(x, o)| x + o).collect();
    let r = points.iter().map(|p| dist(&center, p)).fold(0.0, f64::max);
    Some((center, r))
}

struct MoveToFront<'a> {
    pts: &'a [Vec<f64>],
    order: Vec<usize>,
    dim: usize,
    scale: f64,
}

impl MoveToFront<'_> {
    fn inside(&self, ball: &Option<(Vec<f64>, f64)>, idx: usize) -> bool {
        match ball {
            None => false,
            Some((c, r)) => dist(c, &self.pts[idx]) <= r + 1e-12 * self.scale,
        }
    }

    fn run(&mut self, end: usize, support: &mut Vec<usize>) -> Option<(Vec<f64>, f64)> {
        let refs: Vec<&[f64]> = support.iter().map(|&i| self.pts[i].as_slice()).collect();
        let mut ball = ball_through(&refs);
        if support.len() == self.dim + 1 {
            return ball;
        }
        for i in 0..end {
            let idx = self.order[i];
            if !self.inside(&ball, idx) {
                support.push(idx);
                ball = self.run(i, support);
                support.pop();
                self.order.remove(i);
                self.order.insert(0, idx);
            }
        }
        ball
    }
}

/// Minimal enclosing ball of the configuration's points.
pub fn circumball(config: &Configuration) -> CircumballResult {
    circumball_of(config.points())
}

pub fn circumball_of(points: &[Vec<f64>]) -> CircumballResult {
    assert!(!points.is_empty(), "circumball of an empty set");
    let dim = points[0].len();
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut rng_from_seed(0x5eed));
    let mut mtf = MoveToFront { pts: points, order, dim, scale };
    let (center, _) = mtf
        .run(points.len(), &mut Vec::with_capacity(dim + 1))
        .expect("non-empty input yields a ball");
    // Report the radius that actually encloses every input point.
    let radius = points.iter().map(|p| dist2(&center, p)).fold(0.0, f64::max).sqrt();
    CircumballResult { center, radius }
}

/// Plain Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn circumsphere_dense(points: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let first = points[0];
    let m = points.len() - 1;
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(x, y)| x - y).collect())
        .collect();
    let gram: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| 2.0 * crate::vector::dot(&diffs[i], &diffs[j])).collect())
        .collect();
    let rhs: Vec<f64> = diffs.iter().map(|v| crate::vector::dot(v, v)).collect();
    let coef = if m == 0 { vec![] } else { solve_dense(gram, rhs)? };
    let mut center = first.to_vec();
    for (c, v) in coef.iter().zip(&diffs) {
        for (x, y) in center.iter_mut().zip(v) {
            *x += c * y;
        }
    }
    let r = dist(&center, first);
    Some((center, r))
}

/// Exhaustive search over all support subsets of size `<= d + 1`.
/// Exponential in `N`; intended for `N <= 10`, `d <= 3`.
pub fn circumball_exhaustive(config: &Configuration) -> CircumballResult {
    let pts = config.points();
    let n = pts.len();
    let max_k = (config.dim() + 1).min(n);
    let tol = 1e-9 * pts.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut subset = Vec::with_capacity(max_k);
    fn rec(
        start: usize,
        max_k: usize,
        pts: &[Vec<f64>],
        subset: &mut Vec<usize>,
        tol: f64,
        best: &mut Option<(Vec<f64>, f64)>,
    ) {
        if !subset.is_empty() {
            let refs: Vec<&[f64]> = subset.iter().map(|&i| pts[i].as_slice()).collect();
            if let Some((c, r)) = circumsphere_dense(&refs) {
                let better = best.as_ref().is_none_or(|(_, br)| r < *br);
                if better && pts.iter().all(|p| dist(&c, p) <= r + tol) {
                    *best = Some((c, r));
                }
            }
        }
        if subset.len() == max_k {
            return;
        }
        for i in start..pts.len() {
            subset.push(i);
            rec(i + 1, max_k, pts, subset, tol, best);
            subset.pop();
        }
    }
    rec(0, max_k, pts, &mut subset, tol, &mut best);
    let (center, _) = best.expect("some support subset always encloses");
    let radius = pts.iter().map(|p| dist(&center, p)).fold(0.0, f64::max);
    CircumballResult { center, radius }
}

/// Jung's bound on the circumradius of a set with the given diameter.
pub fn jung_radius(dim: usize, diameter: f64) -> f64 {
    let d = dim as f64;
    (2.0 * d / (d + 1.0)).sqrt() * diameter / 2.0
}

/// Vertices of a regular simplex with the given edge length, centred at the
/// origin, in `E^dim` (`dim + 1` vertices).
pub fn regular_simplex(dim: usize, edge: f64) -> Configuration {
    // Vertices edge/sqrt(2) * e_i in E^{dim+1}, expressed in the Helmert basis
    // of the hyperplane sum(x) = 0.
    let s = edge / std::f64::consts::SQRT_2;
    let pts = (0..=dim)
        .map(|i| {
            (1..=dim)
                .map(|k| {
                    let kf = k as f64;
                    let norm = (kf * (kf + 1.0)).sqrt();
                    let coef = if i < k {
                        1.0
                    } else if i == k {
                        -kf
                    } else {
                        0.0
                    };
                    s * coef / norm
                })
                .collect()
        })
        .collect();
    Configuration::new(dim, pts).expect("simplex coordinates are finite")
}
