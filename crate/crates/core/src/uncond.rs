//! Unconditional convex bodies with closed-form membership, their
//! axis-parallel slices, and slice-integrated volumes of unions and
//! intersections of translates.

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{KpError, Result};
use crate::measures::{interval_intersection_length, interval_union_length};
use crate::par::map_indexed;

/// A convex body symmetric under every coordinate sign flip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum UnconditionalBody {
    /// `|x_i| <= a_i` for all `i`.
    AxisBox { half_extents: Vec<f64> },
    /// `sum |x_i / a_i|^p <= 1`.
    ScaledLpBall { half_extents: Vec<f64>, p: f64 },
    /// `sum |x_i / a_i| <= 1`.
    CrossPolytope { half_extents: Vec<f64> },
    /// Common part of several members (all of one dimension).
    Intersection { members: Vec<UnconditionalBody> },
}

/// A line parallel to coordinate `axis` through `point` (the `axis`
/// coordinate of `point` is ignored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisLine {
    pub axis: usize,
    pub point: Vec<f64>,
}

impl UnconditionalBody {
    pub fn axis_box(half_extents: Vec<f64>) -> Result<Self> {
        let b = Self::AxisBox { half_extents };
        b.validate()?;
        Ok(b)
    }

    pub fn scaled_lp(half_extents: Vec<f64>, p: f64) -> Result<Self> {
        let b = Self::ScaledLpBall { half_extents, p };
        b.validate()?;
        Ok(b)
    }

    pub fn cross_polytope(half_extents: Vec<f64>) -> Result<Self> {
        let b = Self::CrossPolytope { half_extents };
        b.validate()?;
        Ok(b)
    }

    pub fn intersection(members: Vec<UnconditionalBody>) -> Result<Self> {
        let b = Self::Intersection { members };
        b.validate()?;
        Ok(b)
    }

    /// Checks extents, exponents and dimensions.
    pub fn validate(&self) -> Result<()> {
        let extents_ok = |a: &[f64]| !a.is_empty() && a.iter().all(|x| x.is_finite() && *x > 0.0);
        match self {
            Self::AxisBox { half_extents } | Self::CrossPolytope { half_extents } => {
                if !extents_ok(half_extents) {
                    return Err(KpError::InvalidInput("half-extents must be positive and finite".into()));
                }
            }
            Self::ScaledLpBall { half_extents, p } => {
                if !extents_ok(half_extents) {
                    return Err(KpError::InvalidInput("half-extents must be positive and finite".into()));
                }
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(KpError::InvalidInput(format!("exponent must be finite and >= 1, got {p}")));
                }
            }
            Self::Intersection { members } => {
                let first = members
                    .first()
                    .ok_or_else(|| KpError::InvalidInput("empty intersection family".into()))?;
                for m in members {
                    m.validate()?;
                    if m.dim() != first.dim() {
                        return Err(KpError::DimensionMismatch { expected: first.dim(), got: m.dim() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::AxisBox { half_extents }
            | Self::CrossPolytope { half_extents }
            | Self::ScaledLpBall { half_extents, .. } => half_extents.len(),
            Self::Intersection { members } => members.first().map_or(0, Self::dim),
        }
    }

    /// Half-widths of the tightest axis-parallel bounding box.
    pub fn bounding_half_extents(&self) -> Vec<f64> {
        match self {
            Self::AxisBox { half_extents }
            | Self::CrossPolytope { half_extents }
            | Self::ScaledLpBall { half_extents, .. } => half_extents.clone(),
            Self::Intersection { members } => {
                let mut out = members[0].bounding_half_extents();
                for m in &members[1..] {
                    for (o, v) in out.iter_mut().zip(m.bounding_half_extents()) {
                        *o = o.min(v);
                    }
                }
                out
            }
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(KpError::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }

    /// Closed membership of `x` (relative to the body's centre).
    pub fn member(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self.member_unchecked(x))
    }

    fn member_unchecked(&self, x: &[f64]) -> bool {
        match self {
            Self::AxisBox { half_extents } => x.iter().zip(half_extents).all(|(v, a)| v.abs() <= *a),
            Self::CrossPolytope { half_extents } => {
                x.iter().zip(half_extents).map(|(v, a)| (v / a).abs()).sum::<f64>() <= 1.0
            }
            Self::ScaledLpBall { half_extents, p } => {
                x.iter().zip(half_extents).map(|(v, a)| (v / a).abs().powf(*p)).sum::<f64>() <= 1.0
            }
            Self::Intersection { members } => members.iter().all(|m| m.member_unchecked(x)),
        }
    }

    /// Half-length of the slice along `axis` through the relative point `y`
    /// (its `axis` coordinate ignored); `None` when the line misses.
    fn slice_halflength(&self, axis: usize, y: &[f64]) -> Option<f64> {
        let rest = |a: &[f64], p: f64| {
            y.iter()
                .zip(a)
                .enumerate()
                .filter(|(j, _)| *j != axis)
                .map(|(_, (v, a))| (v / a).abs().powf(p))
                .sum::<f64>()
        };
        match self {
            Self::AxisBox { half_extents } => y
                .iter()
                .zip(half_extents)
                .enumerate()
                .all(|(j, (v, a))| j == axis || v.abs() <= *a)
                .then(|| half_extents[axis]),
            Self::CrossPolytope { half_extents } => {
                let s = rest(half_extents, 1.0);
                (s <= 1.0).then(|| half_extents[axis] * (1.0 - s))
            }
            Self::ScaledLpBall { half_extents, p } => {
                let s = rest(half_extents, *p);
                (s <= 1.0).then(|| half_extents[axis] * (1.0 - s).powf(1.0 / p))
            }
            Self::Intersection { members } => members
                .iter()
                .map(|m| m.slice_halflength(axis, y))
                .try_fold(f64::INFINITY, |acc, w| w.map(|w| acc.min(w))),
        }
    }

    /// Slice half-length located by bisection on membership, for testing the
    /// closed forms.
    pub fn slice_halflength_by_bisection(&self, axis: usize, y: &[f64], tol: f64) -> Result<Option<f64>> {
        self.check_dim(y.len())?;
        let mut z = y.to_vec();
        z[axis] = 0.0;
        if !self.member_unchecked(&z) {
            return Ok(None);
        }
        let (mut lo, mut hi) = (0.0, self.bounding_half_extents()[axis] * (1.0 + 1e-9) + tol);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            z[axis] = mid;
            if self.member_unchecked(&z) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(lo))
    }
}

/// Slice of `translation + body` along `line`: `(center, halflength)`, with
/// the centre always the translation's `axis` coordinate.
pub fn axis_slice(body: &UnconditionalBody, translation: &[f64], line: &AxisLine) -> Result<Option<(f64, f64)>> {
    body.check_dim(translation.len())?;
    body.check_dim(line.point.len())?;
    if line.axis >= body.dim() {
        return Err(KpError::AxisOutOfRange { axis: line.axis, dim: body.dim() });
    }
    let rel: Vec<f64> = line.point.iter().zip(translation).map(|(a, b)| a - b).collect();
    Ok(body
        .slice_halflength(line.axis, &rel)
        .map(|w| (translation[line.axis], w)))
}

/// Bodies together with their translation vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlaced")]
pub struct PlacedBodies {
    bodies: Vec<UnconditionalBody>,
    translations: Configuration,
}

#[derive(Deserialize)]
struct RawPlaced {
    bodies: Vec<UnconditionalBody>,
    translations: Configuration,
}

impl TryFrom<RawPlaced> for PlacedBodies {
    type Error = KpError;

    fn try_from(raw: RawPlaced) -> Result<Self> {
        Self::new(raw.bodies, raw.translations)
    }
}

impl PlacedBodies {
    pub fn new(bodies: Vec<UnconditionalBody>, translations: Configuration) -> Result<Self> {
        if bodies.len() != translations.len() {
            return Err(KpError::CountMismatch { left: bodies.len(), right: translations.len() });
        }
        for b in &bodies {
            b.validate()?;
            b.check_dim(translations.dim())?;
        }
        Ok(Self { bodies, translations })
    }

    /// Same bodies placed at `translations`.
    pub fn moved_to(&self, translations: Configuration) -> Result<Self> {
        Self::new(self.bodies.clone(), translations)
    }

    pub fn bodies(&self) -> &[UnconditionalBody] {
        &self.bodies
    }

    pub fn translations(&self) -> &Configuration {
        &self.translations
    }

    pub fn dim(&self) -> usize {
        self.translations.dim()
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    fn intervals(&self, line: &AxisLine) -> Result<Vec<Option<(f64, f64)>>> {
        self.bodies
            .iter()
            .zip(self.translations.points())
            .map(|(b, t)| Ok(axis_slice(b, t, line)?.map(|(c, w)| (c - w, c + w))))
            .collect()
    }

    pub fn member_of_union(&self, x: &[f64]) -> bool {
        self.bodies.iter().zip(self.translations.points()).any(|(b, t)| {
            let rel: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
            b.member_unchecked(&rel)
        })
    }

    pub fn member_of_intersection(&self, x: &[f64]) -> bool {
        self.bodies.iter().zip(self.translations.points()).all(|(b, t)| {
            let rel: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
            b.member_unchecked(&rel)
        })
    }

    /// Bounding box `(lo, hi)` of the union.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let (mut lo, mut hi) = (vec![f64::INFINITY; d], vec![f64::NEG_INFINITY; d]);
        for (b, t) in self.bodies.iter().zip(self.translations.points()) {
            for (k, a) in b.bounding_half_extents().into_iter().enumerate() {
                lo[k] = lo[k].min(t[k] - a);
                hi[k] = hi[k].max(t[k] + a);
            }
        }
        (lo, hi)
    }

    /// Bounding box of the intersection, or `None` when the bodies'
    /// bounding boxes already miss each other.
    pub fn intersection_bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let d = self.dim();
        let (mut lo, mut hi) = (vec![f64::NEG_INFINITY; d], vec![f64::INFINITY; d]);
        for (b, t) in self.bodies.iter().zip(self.translations.points()) {
            for (k, a) in b.bounding_half_extents().into_iter().enumerate() {
                lo[k] = lo[k].max(t[k] - a);
                hi[k] = hi[k].min(t[k] + a);
            }
        }
        lo.iter().zip(&hi).all(|(l, h)| l < h).then_some((lo, hi))
    }
}

/// Length of the union of the slices along `line`.
pub fn union_slice_length(placed: &PlacedBodies, line: &AxisLine) -> Result<f64> {
    let ivs: Vec<(f64, f64)> = placed.intervals(line)?.into_iter().flatten().collect();
    interval_union_length(&ivs)
}

/// Length of the common part of the slices along `line`.
pub fn intersection_slice_length(placed: &PlacedBodies, line: &AxisLine) -> Result<f64> {
    let ivs: Option<Vec<(f64, f64)>> = placed.intervals(line)?.into_iter().collect();
    match ivs {
        Some(ivs) if !ivs.is_empty() => Ok(interval_intersection_length(&ivs)),
        _ => Ok(0.0),
    }
}

/// Quadrature value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicedVolume {
    pub value: f64,
    pub error: f64,
    pub resolution: usize,
}

/// Midpoint-rule samples on a `res^(d-1)` grid over the transverse box, in
/// row-major order of the transverse axes, and the cell volume.
fn slice_samples<F>(lo: &[f64], hi: &[f64], axis: usize, res: usize, slice: &F) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&AxisLine) -> Result<f64> + Sync,
{
    let d = lo.len();
    let transverse: Vec<usize> = (0..d).filter(|&k| k != axis).collect();
    let m = transverse.len() as u32;
    let cells = res.checked_pow(m).ok_or_else(|| KpError::InvalidInput("grid too large".into()))?;
    let cell_area: f64 = transverse.iter().map(|&k| (hi[k] - lo[k]) / res as f64).product();
    let vals: Vec<Result<f64>> = map_indexed(cells, |idx| {
        let mut point = vec![0.0; d];
        let mut rest = idx;
        for &k in &transverse {
            let i = rest % res;
            rest /= res;
            point[k] = lo[k] + (i as f64 + 0.5) * (hi[k] - lo[k]) / res as f64;
        }
        slice(&AxisLine { axis, point })
    });
    Ok((vals.into_iter().collect::<Result<Vec<_>>>()?, cell_area))
}

/// Sum over cells of half the largest jump to a grid neighbour, times the
/// cell volume. Bounds the midpoint error of a cell whose slice length
/// changes by at most the neighbour jumps across it, which catches the
/// boundary cells where refinement alone can agree by accident.
fn oscillation_bound(vals: &[f64], res: usize, m: usize, cell_area: f64) -> f64 {
    let mut total = 0.0;
    for (idx, &v) in vals.iter().enumerate() {
        let mut worst = 0.0f64;
        let mut stride = 1;
        let mut rest = idx;
        for _ in 0..m {
            let i = rest % res;
            rest /= res;
            if i > 0 {
                worst = worst.max((v - vals[idx - stride]).abs());
            }
            if i + 1 < res {
                worst = worst.max((v - vals[idx + stride]).abs());
            }
            stride *= res;
        }
        total += 0.5 * worst;
    }
    total * cell_area
}

fn sliced<F>(placed: &PlacedBodies, domain: Option<(Vec<f64>, Vec<f64>)>, resolution: usize, slice: F) -> Result<SlicedVolume>
where
    F: Fn(&AxisLine) -> Result<f64> + Sync,
{
    if resolution < 2 {
        return Err(KpError::InvalidInput(format!("resolution must be at least 2, got {resolution}")));
    }
    let Some((lo, hi)) = domain.filter(|_| !placed.is_empty()) else {
        return Ok(SlicedVolume { value: 0.0, error: 0.0, resolution });
    };
    if placed.dim() == 1 {
        let v = slice(&AxisLine { axis: 0, point: vec![0.0] })?;
        return Ok(SlicedVolume { value: v, error: 0.0, resolution });
    }
    let (coarse_vals, coarse_area) = slice_samples(&lo, &hi, 0, resolution, &slice)?;
    let (fine_vals, fine_area) = slice_samples(&lo, &hi, 0, 2 * resolution, &slice)?;
    let coarse = coarse_vals.iter().sum::<f64>() * coarse_area;
    let fine = fine_vals.iter().sum::<f64>() * fine_area;
    let osc = oscillation_bound(&fine_vals, 2 * resolution, placed.dim() - 1, fine_area);
    Ok(SlicedVolume { value: fine, error: (fine - coarse).abs().max(osc), resolution: 2 * resolution })
}

/// Volume of the union by integrating exact slice lengths along axis 0 over a
/// transverse grid. The error is the larger of the change between
/// resolutions `n` and `2n` and the fine grid's oscillation bound.
pub fn union_volume_by_slicing(placed: &PlacedBodies, resolution: usize) -> Result<SlicedVolume> {
    sliced(placed, Some(placed.bounding_box()), resolution, |line| union_slice_length(placed, line))
}

/// Volume of the intersection, computed like [`union_volume_by_slicing`]
/// over the intersection of the bodies' bounding boxes.
pub fn intersection_volume_by_slicing(placed: &PlacedBodies, resolution: usize) -> Result<SlicedVolume> {
    sliced(placed, placed.intersection_bounding_box(), resolution, |line| intersection_slice_length(placed, line))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{one_sided_reflection, random_reflection_composite, Side};
    use crate::measures::{mc_volume, Aabb};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;
    use statrs::function::gamma::gamma;

    fn lp_volume(a: &[f64], p: f64) -> f64 {
        let d = a.len() as f64;
        2f64.powf(d) * a.iter().product::<f64>() * gamma(1.0 + 1.0 / p).powf(d) / gamma(1.0 + d / p)
    }

    fn cfg(dim: usize, pts: &[&[f64]]) -> Configuration {
        Configuration::new(dim, pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn random_body(rng: &mut crate::rng::KpRng, d: usize) -> UnconditionalBody {
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(0.3..1.5)).collect();
        match rng.random_range(0..4) {
            0 => UnconditionalBody::axis_box(a).unwrap(),
            1 => UnconditionalBody::cross_polytope(a).unwrap(),
            2 => UnconditionalBody::scaled_lp(a, rng.random_range(1.0..4.0)).unwrap(),
            _ => {
                let b: Vec<f64> = (0..d).map(|_| rng.random_range(0.3..1.5)).collect();
                UnconditionalBody::intersection(vec![
                    UnconditionalBody::axis_box(a).unwrap(),
                    UnconditionalBody::scaled_lp(b, 2.0).unwrap(),
                ])
                .unwrap()
            }
        }
    }

    #[test]
    fn member_examples() {
        let b = UnconditionalBody::axis_box(vec![1.0, 2.0]).unwrap();
        assert!(b.member(&[1.0, -2.0]).unwrap());
        assert!(!b.member(&[1.0, 2.1]).unwrap());
        let l1 = UnconditionalBody::cross_polytope(vec![1.0, 1.0]).unwrap();
        assert!(!l1.member(&[0.5, 0.6]).unwrap());
        assert!(l1.member(&[0.5, 0.5]).unwrap());
        assert!(b.member(&[0.0]).is_err());
        assert!(UnconditionalBody::axis_box(vec![1.0, 0.0]).is_err());
        assert!(UnconditionalBody::scaled_lp(vec![1.0], 0.5).is_err());
    }

    #[test]
    fn slice_examples() {
        let b = UnconditionalBody::axis_box(vec![0.7, 2.0, 1.0]).unwrap();
        let line = AxisLine { axis: 0, point: vec![5.0, 1.9, -0.4] };
        assert_eq!(axis_slice(&b, &[1.0, 0.0, 0.0], &line).unwrap(), Some((1.0, 0.7)));
        let disk = UnconditionalBody::scaled_lp(vec![1.0, 1.0], 2.0).unwrap();
        for r in [0.0, 0.3, 0.99] {
            let (c, w) = axis_slice(&disk, &[0.5, 0.0], &AxisLine { axis: 0, point: vec![0.0, r] })
                .unwrap()
                .unwrap();
            assert_eq!(c, 0.5);
            assert!((w - (1.0f64 - r * r).sqrt()).abs() < 1e-15);
        }
        assert_eq!(axis_slice(&disk, &[0.0, 0.0], &AxisLine { axis: 0, point: vec![0.0, 1.5] }).unwrap(), None);
        assert!(axis_slice(&disk, &[0.0, 0.0], &AxisLine { axis: 2, point: vec![0.0, 0.0] }).is_err());
    }

    #[test]
    fn closed_form_slices_match_bisection() {
        let mut rng = rng_from_seed(5);
        for _ in 0..500 {
            let d = rng.random_range(1..5);
            let body = random_body(&mut rng, d);
            let axis = rng.random_range(0..d);
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.2..1.2)).collect();
            let closed = body.slice_halflength(axis, &y);
            let bis = body.slice_halflength_by_bisection(axis, &y, 1e-13).unwrap();
            match (closed, bis) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12, "{body:?}: {a} vs {b}"),
                (None, None) => {}
                other => panic!("{body:?} {y:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn union_slice_examples() {
        let unit = UnconditionalBody::axis_box(vec![1.0]).unwrap();
        let line = AxisLine { axis: 0, point: vec![0.0] };
        let apart = PlacedBodies::new(vec![unit.clone(), unit.clone()], cfg(1, &[&[0.0], &[5.0]])).unwrap();
        assert_eq!(union_slice_length(&apart, &line).unwrap(), 4.0);
        assert_eq!(intersection_slice_length(&apart, &line).unwrap(), 0.0);
        let same = PlacedBodies::new(vec![unit.clone(), unit.clone()], cfg(1, &[&[0.5], &[0.5]])).unwrap();
        assert_eq!(union_slice_length(&same, &line).unwrap(), 2.0);
        assert_eq!(intersection_slice_length(&same, &line).unwrap(), 2.0);
        assert!(PlacedBodies::new(vec![unit], cfg(1, &[&[0.0], &[1.0]])).is_err());
    }

    #[test]
    fn one_dimensional_lemma_under_reflections() {
        let mut rng = rng_from_seed(6);
        for _ in 0..2000 {
            let n = rng.random_range(1..8);
            let bodies: Vec<UnconditionalBody> =
                (0..n).map(|_| UnconditionalBody::axis_box(vec![rng.random_range(0.1..2.0)]).unwrap()).collect();
            let p = Configuration::line(&(0..n).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<_>>()).unwrap();
            let side = if rng.random_bool(0.5) { Side::Positive } else { Side::Negative };
            let q = one_sided_reflection(&p, 0, rng.random_range(-5.0..5.0), side).unwrap();
            let pp = PlacedBodies::new(bodies.clone(), p).unwrap();
            let qq = pp.moved_to(q).unwrap();
            let line = AxisLine { axis: 0, point: vec![0.0] };
            assert!(union_slice_length(&pp, &line).unwrap() >= union_slice_length(&qq, &line).unwrap() - 1e-10);
            assert!(intersection_slice_length(&pp, &line).unwrap() <= intersection_slice_length(&qq, &line).unwrap() + 1e-10);
        }
    }

    #[test]
    fn slicing_error_covers_box_intersections() {
        // intersections of boxes are boxes: exact volume is a product of overlaps
        let mut rng = rng_from_seed(77);
        for t in 0..200 {
            let d = 2 + t % 2;
            let n = rng.random_range(2..=4);
            let halves: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(0.3..1.5)).collect()).collect();
            let ts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let exact: f64 = (0..d)
                .map(|k| {
                    let lo = (0..n).map(|i| ts[i][k] - halves[i][k]).fold(f64::NEG_INFINITY, f64::max);
                    let hi = (0..n).map(|i| ts[i][k] + halves[i][k]).fold(f64::INFINITY, f64::min);
                    (hi - lo).max(0.0)
                })
                .product();
            let bodies = halves.into_iter().map(|h| UnconditionalBody::axis_box(h).unwrap()).collect();
            let placed = PlacedBodies::new(bodies, Configuration::new(d, ts).unwrap()).unwrap();
            let v = intersection_volume_by_slicing(&placed, 24).unwrap();
            assert!((v.value - exact).abs() <= v.error + 1e-12, "trial {t}: {v:?} vs {exact}");
        }
    }

    #[test]
    fn slicing_volume_examples() {
        let b = UnconditionalBody::axis_box(vec![0.5, 1.0, 0.25]).unwrap();
        let one = PlacedBodies::new(vec![b.clone()], cfg(3, &[&[0.0, 0.0, 0.0]])).unwrap();
        let v = union_volume_by_slicing(&one, 8).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12 && v.error < 1e-12);
        // two boxes overlapping in a 0.5 x 2 x 0.5 block
        let two = PlacedBodies::new(vec![b.clone(), b.clone()], cfg(3, &[&[0.0, 0.0, 0.0], &[0.5, 0.0, 0.0]])).unwrap();
        let u = union_volume_by_slicing(&two, 8).unwrap();
        assert!((u.value - 1.5).abs() <= u.error + 1e-12);
        let i = intersection_volume_by_slicing(&two, 8).unwrap();
        assert!((i.value - 0.5).abs() <= i.error + 1e-12);
        let far = PlacedBodies::new(vec![b.clone(), b.clone()], cfg(3, &[&[0.0, 0.0, 0.0], &[0.0, 9.0, 0.0]])).unwrap();
        assert_eq!(intersection_volume_by_slicing(&far, 8).unwrap().value, 0.0);
        let same = PlacedBodies::new(vec![b.clone(), b], cfg(3, &[&[0.2, 0.0, 0.0], &[0.2, 0.0, 0.0]])).unwrap();
        assert!((intersection_volume_by_slicing(&same, 8).unwrap().value - 1.0).abs() < 1e-12);
        assert!(union_volume_by_slicing(&same, 1).is_err());
    }

    #[test]
    fn slicing_matches_closed_form_volumes() {
        for (a, p) in [(vec![1.0, 1.0], 2.0), (vec![0.5, 1.5], 1.0), (vec![1.0, 0.7, 0.9], 2.0), (vec![1.0, 1.0, 1.0], 3.0)] {
            let d = a.len();
            let body = UnconditionalBody::scaled_lp(a.clone(), p).unwrap();
            let one = PlacedBodies::new(vec![body], Configuration::new(d, vec![vec![0.0; d]]).unwrap()).unwrap();
            let v = union_volume_by_slicing(&one, 64).unwrap();
            let want = lp_volume(&a, p);
            assert!((v.value - want).abs() <= 3.0 * v.error + 1e-9, "{a:?} {p}: {v:?} vs {want}");
        }
    }

    #[test]
    fn slicing_matches_monte_carlo() {
        let mut rng = rng_from_seed(9);
        for inst in 0..20 {
            let d = 2 + inst % 2;
            let n = rng.random_range(1..5);
            let bodies: Vec<UnconditionalBody> = (0..n).map(|_| random_body(&mut rng, d)).collect();
            let t = Configuration::new(d, (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()).unwrap();
            let placed = PlacedBodies::new(bodies, t).unwrap();
            let (lo, hi) = placed.bounding_box();
            let bbox = Aabb::new(lo, hi);
            let sliced_u = union_volume_by_slicing(&placed, 48).unwrap();
            let mc_u = mc_volume(|x| placed.member_of_union(x), &bbox, 400_000, inst as u64).unwrap();
            assert!((sliced_u.value - mc_u.value).abs() <= 4.0 * mc_u.stderr + sliced_u.error + 1e-9);
            let sliced_i = intersection_volume_by_slicing(&placed, 48).unwrap();
            let ibox = placed.intersection_bounding_box().map_or(bbox, |(lo, hi)| Aabb::new(lo, hi));
            let mc_i = mc_volume(|x| placed.member_of_intersection(x), &ibox, 400_000, 100 + inst as u64).unwrap();
            assert!((sliced_i.value - mc_i.value).abs() <= 4.0 * mc_i.stderr + sliced_i.error + 1e-9, "{inst}: {sliced_i:?} {mc_i:?}");
        }
    }

    #[test]
    fn theorem_direction_on_reflection_composites() {
        let mut rng = rng_from_seed(10);
        for _ in 0..20 {
            let n = rng.random_range(2..5);
            let bodies: Vec<UnconditionalBody> = (0..n).map(|_| random_body(&mut rng, 2)).collect();
            let p = Configuration::new(2, (0..n).map(|_| vec![rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)]).collect()).unwrap();
            let q = random_reflection_composite(&p, 3, &mut rng);
            let pp = PlacedBodies::new(bodies, p).unwrap();
            let qq = pp.moved_to(q).unwrap();
            let (up, uq) = (union_volume_by_slicing(&pp, 64).unwrap(), union_volume_by_slicing(&qq, 64).unwrap());
            assert!(up.value - uq.value >= -(up.error + uq.error) - 1e-9);
            let (ip, iq) = (intersection_volume_by_slicing(&pp, 64).unwrap(), intersection_volume_by_slicing(&qq, 64).unwrap());
            assert!(iq.value - ip.value >= -(ip.error + iq.error) - 1e-9);
        }
    }

    #[test]
    fn body_json() {
        let b = UnconditionalBody::axis_box(vec![1.0, 2.0]).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"family":"axis_box","half_extents":[1.0,2.0]}"#);
        assert_eq!(serde_json::from_str::<UnconditionalBody>(&s).unwrap(), b);
        let placed = PlacedBodies::new(vec![b], cfg(2, &[&[0.0, 1.0]])).unwrap();
        let js = serde_json::to_string(&placed).unwrap();
        assert_eq!(serde_json::from_str::<PlacedBodies>(&js).unwrap(), placed);
        let bad = r#"{"bodies":[],"translations":{"dim":2,"points":[[0.0,1.0]]}}"#;
        assert!(serde_json::from_str::<PlacedBodies>(bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn sign_flip_invariance_and_convexity(seed in 0u64..100_000, d in 1usize..5) {
            let mut rng = rng_from_seed(seed);
            let body = random_body(&mut rng, d);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.6..1.6)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.6..1.6)).collect();
            let mask: u32 = rng.random_range(0..(1 << d));
            let flipped: Vec<f64> = x.iter().enumerate().map(|(i, v)| if mask >> i & 1 == 1 { -v } else { *v }).collect();
            prop_assert_eq!(body.member(&x).unwrap(), body.member(&flipped).unwrap());
            if body.member(&x).unwrap() && body.member(&y).unwrap() {
                let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                prop_assert!(body.member(&mid).unwrap());
            }
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert_eq!(body.member(&x).unwrap(), body.member(&neg).unwrap());
        }

        #[test]
        fn slice_center_is_translation(seed in 0u64..100_000, d in 1usize..4) {
            let mut rng = rng_from_seed(seed);
            let body = random_body(&mut rng, d);
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let axis = rng.random_range(0..d);
            let point: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            if let Some((c, w)) = axis_slice(&body, &t, &AxisLine { axis, point }).unwrap() {
                prop_assert_eq!(c, t[axis]);
                prop_assert!(w >= 0.0);
            }
        }
    }
}
