//! Exact planar measures of disk intersections, disk unions, spindle hulls
//! and unions of convex polygons.
//!
//! Disk bodies are stored as lists of counter-clockwise circular arcs.
//! Area follows from Green's theorem applied arc by arc, which is correct for
//! both intersections and unions because every boundary arc keeps its own
//! disk, and hence the body, on its left.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::circumball::circumball_of;
use crate::config::Configuration;
use crate::error::{KpError, Result};
use crate::measures::{interval_union_length, mc_volume, Aabb, McEstimate};

/// Centres closer than this (relative to the input scale) are merged.
pub const COINCIDENCE_TOL: f64 = 1e-12;
/// `1 - cos(half-angle)` below this is treated as tangency.
pub const TANGENCY_TOL: f64 = 1e-14;

pub type P2 = [f64; 2];

fn angle_of(v: P2) -> f64 {
    let a = v[1].atan2(v[0]);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

fn d2(a: P2, b: P2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Disjoint, sorted sub-intervals of `[0, 2 pi]`.
#[derive(Debug, Clone, PartialEq)]
struct AngleSet(Vec<(f64, f64)>);

impl AngleSet {
    fn full() -> Self {
        Self(vec![(0.0, TAU)])
    }

    fn empty() -> Self {
        Self(Vec::new())
    }

    /// The closed arc `[mid - half, mid + half]`, split at angle zero.
    fn centered(mid: f64, half: f64) -> Self {
        if half >= PI {
            return Self::full();
        }
        let mut a = (mid - half).rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        let b = a + 2.0 * half;
        if b <= TAU {
            Self(vec![(a, b)])
        } else {
            Self(vec![(0.0, b - TAU), (a, TAU)])
        }
    }

    fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for &(a0, a1) in &self.0 {
            for &(b0, b1) in &other.0 {
                let lo = a0.max(b0);
                let hi = a1.min(b1);
                if hi > lo {
                    out.push((lo, hi));
                }
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        Self(out)
    }

    fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cur = 0.0;
        for &(a, b) in &self.0 {
            if a > cur {
                out.push((cur, a));
            }
            cur = cur.max(b);
        }
        if cur < TAU {
            out.push((cur, TAU));
        }
        Self(out)
    }

    fn union(&self, other: &Self) -> Self {
        let mut all: Vec<(f64, f64)> = self.0.iter().chain(&other.0).copied().collect();
        all.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (a, b) in all {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self(out)
    }

    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Counter-clockwise circular arc from `start` to `end` (radians, `start < end`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: P2,
    pub radius: f64,
    pub start: f64,
    pub end: f64,
}

impl Arc {
    pub fn point_at(&self, theta: f64) -> P2 {
        [
            self.center[0] + self.radius * theta.cos(),
            self.center[1] + self.radius * theta.sin(),
        ]
    }

    pub fn start_point(&self) -> P2 {
        self.point_at(self.start)
    }

    pub fn end_point(&self) -> P2 {
        self.point_at(self.end)
    }

    pub fn sweep(&self) -> f64 {
        self.end - self.start
    }

    pub fn length(&self) -> f64 {
        self.radius * self.sweep()
    }

    pub fn is_full(&self) -> bool {
        self.sweep() >= TAU
    }

    fn spans(&self, theta: f64) -> bool {
        let t = theta.rem_euclid(TAU);
        (self.start <= t && t <= self.end) || (self.start <= t + TAU && t + TAU <= self.end)
    }

    /// `(1/2) * integral of (x dy - y dx)` along the arc.
    pub fn green(&self) -> f64 {
        let [cx, cy] = self.center;
        let r = self.radius;
        let (s0, c0) = self.start.sin_cos();
        let (s1, c1) = self.end.sin_cos();
        0.5 * (r * r * self.sweep() + r * cx * (s1 - s0) - r * cy * (c1 - c0))
    }

    /// Maximum of `<u, z>` over the arc.
    pub fn max_dot(&self, u: P2) -> f64 {
        if self.spans(angle_of(u)) {
            return u[0] * self.center[0] + u[1] * self.center[1] + self.radius * (u[0] * u[0] + u[1] * u[1]).sqrt();
        }
        let dot = |p: P2| u[0] * p[0] + u[1] * p[1];
        dot(self.start_point()).max(dot(self.end_point()))
    }

    /// Maximum of `|y - z|` over the arc.
    pub fn farthest_from(&self, y: P2) -> f64 {
        let v = [self.center[0] - y[0], self.center[1] - y[1]];
        let off = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if off > 0.0 && self.spans(angle_of(v)) {
            return off + self.radius;
        }
        if off == 0.0 {
            return self.radius;
        }
        d2(self.start_point(), y).max(d2(self.end_point(), y))
    }
}

/// Boundary representation of a disk intersection or union: arcs, their
/// endpoints, and, for intersections that collapsed to a point, that point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarDiskBody {
    pub arcs: Vec<Arc>,
    pub vertices: Vec<P2>,
    pub point: Option<P2>,
}

/// Area and perimeter of a planar body. In the plane `V_1` is half the
/// perimeter and `V_2` is the area.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarMeasure {
    pub area: f64,
    pub perimeter: f64,
}

impl PlanarMeasure {
    pub fn v1(&self) -> f64 {
        self.perimeter / 2.0
    }

    pub fn v2(&self) -> f64 {
        self.area
    }

    pub fn intrinsic(&self, k: usize) -> Result<f64> {
        match k {
            1 => Ok(self.v1()),
            2 => Ok(self.v2()),
            _ => Err(KpError::InvalidInput(format!("planar intrinsic volume order {k}"))),
        }
    }
}

impl PlanarDiskBody {
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty() && self.point.is_none()
    }

    pub fn measure(&self) -> PlanarMeasure {
        PlanarMeasure {
            area: self.arcs.iter().map(Arc::green).sum::<f64>().max(0.0),
            perimeter: self.arcs.iter().map(Arc::length).sum(),
        }
    }

    /// Support function; `None` for the empty body.
    pub fn support(&self, u: P2) -> Option<f64> {
        if let Some(p) = self.point {
            return Some(u[0] * p[0] + u[1] * p[1]);
        }
        self.arcs.iter().map(|a| a.max_dot(u)).reduce(f64::max)
    }

    /// `max |y - z|` over the body; `None` for the empty body.
    pub fn farthest_from(&self, y: P2) -> Option<f64> {
        if let Some(p) = self.point {
            return Some(d2(p, y));
        }
        self.arcs.iter().map(|a| a.farthest_from(y)).reduce(f64::max)
    }

    /// Groups arcs into closed boundary loops by chaining endpoints.
    pub fn loops(&self, tol: f64) -> Vec<Vec<usize>> {
        let mut used = vec![false; self.arcs.len()];
        let mut loops = Vec::new();
        for s in 0..self.arcs.len() {
            if used[s] {
                continue;
            }
            used[s] = true;
            let mut chain = vec![s];
            if !self.arcs[s].is_full() {
                let head = self.arcs[s].start_point();
                let mut tail = self.arcs[s].end_point();
                while d2(tail, head) > tol {
                    let next = (0..self.arcs.len())
                        .filter(|&j| !used[j])
                        .min_by(|&a, &b| {
                            d2(self.arcs[a].start_point(), tail).total_cmp(&d2(self.arcs[b].start_point(), tail))
                        });
                    match next {
                        Some(j) if d2(self.arcs[j].start_point(), tail) <= tol => {
                            used[j] = true;
                            chain.push(j);
                            tail = self.arcs[j].end_point();
                        }
                        _ => break,
                    }
                }
            }
            loops.push(chain);
        }
        loops
    }

    /// True when every loop closes within `tol`.
    pub fn loops_close(&self, tol: f64) -> bool {
        self.loops(tol).iter().all(|chain| {
            let first = &self.arcs[chain[0]];
            let last = &self.arcs[*chain.last().unwrap()];
            first.is_full() || d2(last.end_point(), first.start_point()) <= tol
        })
    }
}

fn input_scale(points: &[P2]) -> f64 {
    points.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()))
}

fn dedupe(points: &[P2]) -> Vec<P2> {
    let tol = COINCIDENCE_TOL * input_scale(points);
    let mut out: Vec<P2> = Vec::with_capacity(points.len());
    for &p in points {
        if !out.iter().any(|q| d2(*q, p) <= tol) {
            out.push(p);
        }
    }
    out
}

fn collect_vertices(arcs: &[Arc], tol: f64) -> Vec<P2> {
    let mut out: Vec<P2> = Vec::new();
    for a in arcs.iter().filter(|a| !a.is_full()) {
        for p in [a.start_point(), a.end_point()] {
            if !out.iter().any(|q| d2(*q, p) <= tol) {
                out.push(p);
            }
        }
    }
    out
}

/// Boundary of `B[X, rho]` for planar centres `X`.
pub fn disk_intersection_body(centers: &[P2], rho: f64) -> PlanarDiskBody {
    let c = dedupe(centers);
    if c.is_empty() {
        return PlanarDiskBody::default();
    }
    let mut arcs = Vec::new();
    'circles: for (i, &ci) in c.iter().enumerate() {
        let mut set = AngleSet::full();
        for (j, &cj) in c.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = d2(ci, cj);
            let gamma = d / (2.0 * rho);
            if 1.0 - gamma < TANGENCY_TOL {
                // disjoint or touching: this circle contributes no arc
                continue 'circles;
            }
            let mid = angle_of([cj[0] - ci[0], cj[1] - ci[1]]);
            set = set.intersect(&AngleSet::centered(mid, gamma.acos()));
            if set.is_empty() {
                continue 'circles;
            }
        }
        arcs.extend(set.0.iter().map(|&(start, end)| Arc { center: ci, radius: rho, start, end }));
    }
    let scale = input_scale(&c) + rho;
    let vertices = collect_vertices(&arcs, 1e-12 * scale);
    let point = if arcs.is_empty() {
        let pts: Vec<Vec<f64>> = c.iter().map(|p| p.to_vec()).collect();
        let ball = circumball_of(&pts);
        (ball.radius <= rho * (1.0 + 1e-9)).then(|| [ball.center[0], ball.center[1]])
    } else {
        None
    };
    PlanarDiskBody { arcs, vertices, point }
}

/// A disk with its own radius, for unions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: P2,
    pub radius: f64,
}

/// Boundary of a union of disks (radii may differ).
pub fn disk_union_body(disks: &[Disk]) -> PlanarDiskBody {
    let scale = input_scale(&disks.iter().map(|d| d.center).collect::<Vec<_>>())
        + disks.iter().map(|d| d.radius).fold(0.0, f64::max);
    let tol = COINCIDENCE_TOL * scale;
    let mut uniq: Vec<Disk> = Vec::new();
    for &d in disks.iter().filter(|d| d.radius > 0.0) {
        if !uniq.iter().any(|u| d2(u.center, d.center) <= tol && (u.radius - d.radius).abs() <= tol) {
            uniq.push(d);
        }
    }
    let mut arcs = Vec::new();
    'circles: for (i, di) in uniq.iter().enumerate() {
        let ri = di.radius;
        let mut covered = AngleSet::empty();
        for (j, dj) in uniq.iter().enumerate() {
            if i == j {
                continue;
            }
            let rj = dj.radius;
            let d = d2(di.center, dj.center);
            if d + ri <= rj + tol {
                continue 'circles;
            }
            if d >= ri + rj || d + rj <= ri {
                continue;
            }
            let gamma = ((ri * ri + d * d - rj * rj) / (2.0 * ri * d)).clamp(-1.0, 1.0);
            if 1.0 - gamma < TANGENCY_TOL {
                continue;
            }
            if gamma + 1.0 < TANGENCY_TOL {
                continue 'circles;
            }
            let mid = angle_of([dj.center[0] - di.center[0], dj.center[1] - di.center[1]]);
            covered = covered.union(&AngleSet::centered(mid, gamma.acos()));
        }
        let free = covered.complement();
        arcs.extend(
            free.0
                .iter()
                .filter(|(a, b)| b > a)
                .map(|&(start, end)| Arc { center: di.center, radius: ri, start, end }),
        );
    }
    let vertices = collect_vertices(&arcs, 1e-12 * scale);
    PlanarDiskBody { arcs, vertices, point: None }
}

fn planar_points(x: &Configuration) -> Result<Vec<P2>> {
    if x.dim() != 2 {
        return Err(KpError::DimensionMismatch { expected: 2, got: x.dim() });
    }
    Ok(x.points().iter().map(|p| [p[0], p[1]]).collect())
}

/// Exact area and perimeter of `B[X, rho]`.
pub fn disk_intersection_measure(x: &Configuration, rho: f64) -> Result<PlanarMeasure> {
    Ok(disk_intersection_body(&planar_points(x)?, rho).measure())
}

/// Exact area and perimeter of the union of the `rho`-disks centred at `X`.
pub fn disk_union_measure(x: &Configuration, rho: f64) -> Result<PlanarMeasure> {
    let disks: Vec<Disk> = planar_points(x)?
        .into_iter()
        .map(|center| Disk { center, radius: rho })
        .collect();
    Ok(disk_union_body(&disks).measure())
}

/// The planar spindle hull `conv_rho(X) = B[B[X, rho], rho]`.
///
/// With at least two distinct generators and `B[X, rho]` a proper disk
/// polygon, the hull is the intersection of the `rho`-disks centred at the
/// vertices of `B[X, rho]`. One generator gives a point; a one-point
/// `B[X, rho]` gives the full disk around that point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarSpindleHull {
    /// Boundary of `B[X, rho]`.
    pub dual: PlanarDiskBody,
    /// Boundary of the hull itself.
    pub hull: PlanarDiskBody,
    /// Centres whose `rho`-disks cut out the hull (empty when the hull is a point).
    pub hull_centers: Vec<P2>,
    pub rho: f64,
}

pub fn planar_spindle_hull(x: &Configuration, rho: f64) -> Result<PlanarSpindleHull> {
    let pts = dedupe(&planar_points(x)?);
    let dual = disk_intersection_body(&pts, rho);
    if dual.is_empty() {
        return Err(KpError::InvalidInput("circumradius exceeds rho: spindle hull undefined".into()));
    }
    let (hull, hull_centers) = if pts.len() == 1 {
        (PlanarDiskBody { arcs: vec![], vertices: vec![pts[0]], point: Some(pts[0]) }, vec![])
    } else if let Some(v) = dual.point {
        (disk_intersection_body(&[v], rho), vec![v])
    } else {
        (disk_intersection_body(&dual.vertices, rho), dual.vertices.clone())
    };
    Ok(PlanarSpindleHull { dual, hull, hull_centers, rho })
}

static DUALITY_SELF_TEST: OnceLock<std::result::Result<(), String>> = OnceLock::new();

/// Cross-checks the vertex-duality hull construction against a Monte Carlo
/// estimate of `conv_rho(X)` built only from the definition (membership of
/// `z` iff `B[X, rho]` lies in `B[z, rho]`). Runs once per process.
pub fn spindle_duality_self_test() -> Result<()> {
    DUALITY_SELF_TEST
        .get_or_init(run_duality_self_test)
        .clone()
        .map_err(KpError::SelfTestFailed)
}

fn run_duality_self_test() -> std::result::Result<(), String> {
    use crate::ball_bodies::BallIntersection;
    use crate::config::sample_in_ball;
    use crate::rng::{derive_seed, rng_from_seed};
    use rand::Rng;

    for inst in 0..50u64 {
        let mut rng = rng_from_seed(derive_seed(0xd0a1, inst));
        let rho: f64 = rng.random_range(0.5..2.0);
        let n = rng.random_range(1..=6);
        let spread = rho * rng.random_range(0.2..1.0);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| sample_in_ball(&mut rng, 2, spread)).collect();
        let x = Configuration::new(2, pts).map_err(|e| e.to_string())?;
        let ball = crate::circumball::circumball(&x);
        if ball.radius > rho {
            continue;
        }
        let exact = planar_spindle_hull(&x, rho).map_err(|e| e.to_string())?.hull.measure().area;
        let body = BallIntersection::new(x.clone(), rho).map_err(|e| e.to_string())?;
        let member = |z: &[f64]| {
            body.farthest_point_distance_by_faces(z)
                .map(|f| f <= rho * (1.0 + 1e-12))
                .unwrap_or(false)
        };
        let bbox = Aabb::cube(&ball.center, rho);
        let est = mc_volume(member, &bbox, 20_000, derive_seed(0xd0a2, inst)).map_err(|e| e.to_string())?;
        if (est.value - exact).abs() > 4.0 * est.stderr + 1e-9 {
            return Err(format!(
                "instance {inst}: duality area {exact} vs Monte Carlo {} +- {}",
                est.value, est.stderr
            ));
        }
    }
    Ok(())
}

/// Exact area and perimeter of `conv_rho(X)`, gated by the duality self-test.
pub fn spindle_hull_measure(x: &Configuration, rho: f64) -> Result<PlanarMeasure> {
    spindle_duality_self_test()?;
    Ok(planar_spindle_hull(x, rho)?.hull.measure())
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<P2>,
}

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<P2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 || vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(KpError::InvalidInput("polygon needs at least three finite vertices".into()));
        }
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) <= 0.0 {
                return Err(KpError::InvalidInput("polygon must be strictly convex and counter-clockwise".into()));
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-parallel rectangle `center +- half`.
    pub fn rect(center: P2, half: P2) -> Self {
        let [x, y] = center;
        let [a, b] = half;
        Self { vertices: vec![[x - a, y - b], [x + a, y - b], [x + a, y + b], [x - a, y + b]] }
    }

    pub fn vertices(&self) -> &[P2] {
        &self.vertices
    }

    pub fn translated(&self, t: P2) -> Self {
        Self { vertices: self.vertices.iter().map(|v| [v[0] + t[0], v[1] + t[1]]).collect() }
    }

    fn edges(&self) -> impl Iterator<Item = (P2, P2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Closed membership with a small absolute slack.
    pub fn contains(&self, p: P2, tol: f64) -> bool {
        self.edges().all(|(a, b)| cross(a, b, p) >= -tol * d2(a, b))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| d2(a, b)).sum()
    }

    pub fn bbox(&self) -> Aabb {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Aabb::new(lo.to_vec(), hi.to_vec())
    }

    /// Parameter range `[t0, t1]` of `a + t (b - a)`, `t in [0, 1]`, inside
    /// the closed polygon.
    fn clip_segment(&self, a: P2, b: P2) -> Option<(f64, f64)> {
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for (e0, e1) in self.edges() {
            // inside: cross(e0, e1, p) >= 0, affine in t
            let fa = cross(e0, e1, a);
            let fb = cross(e0, e1, b);
            let slope = fb - fa;
            if slope == 0.0 {
                if fa < 0.0 {
                    return None;
                }
                continue;
            }
            let t = -fa / slope;
            if slope > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Boundary pieces of a union of convex polygons, each oriented with the
/// union on its left.
pub fn polygon_union_boundary(polys: &[ConvexPolygon]) -> Vec<(P2, P2)> {
    let scale = polys
        .iter()
        .flat_map(|p| p.vertices.iter().flatten())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let eps = 1e-9 * scale;
    let in_union = |p: P2| polys.iter().any(|q| q.contains(p, 0.0));
    let mut pieces = Vec::new();
    for (pi, poly) in polys.iter().enumerate() {
        for (a, b) in poly.edges() {
            let len = d2(a, b);
            let normal = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
            let mut cuts = vec![0.0, 1.0];
            for (qi, q) in polys.iter().enumerate() {
                if qi != pi {
                    if let Some((t0, t1)) = q.clip_segment(a, b) {
                        cuts.extend([t0, t1]);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
            for w in cuts.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                if t1 - t0 <= 1e-15 {
                    continue;
                }
                let tm = 0.5 * (t0 + t1);
                let m = [a[0] + tm * (b[0] - a[0]), a[1] + tm * (b[1] - a[1])];
                let out = [m[0] + eps * normal[0], m[1] + eps * normal[1]];
                let inn = [m[0] - eps * normal[0], m[1] - eps * normal[1]];
                if in_union(out) {
                    continue;
                }
                // a coincident, identically oriented edge of an earlier polygon
                // already owns this piece
                let owned = polys[..pi]
                    .iter()
                    .any(|q| q.contains(m, 1e-12) && q.contains(inn, 0.0));
                if owned {
                    continue;
                }
                let pa = [a[0] + t0 * (b[0] - a[0]), a[1] + t0 * (b[1] - a[1])];
                let pb = [a[0] + t1 * (b[0] - a[0]), a[1] + t1 * (b[1] - a[1])];
                pieces.push((pa, pb));
            }
        }
    }
    pieces
}

/// Exact area (Green's theorem over the boundary pieces) and perimeter
/// (per-edge interval unions of the boundary pieces) of a union of convex
/// polygons.
pub fn polygon_union_measure(polys: &[ConvexPolygon]) -> Result<PlanarMeasure> {
    if polys.is_empty() {
        return Ok(PlanarMeasure::default());
    }
    let pieces = polygon_union_boundary(polys);
    let area = 0.5 * pieces.iter().map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum::<f64>();
    // Perimeter: group pieces by their carrying edge through the arc-length
    // parameter along the piece direction.
    let mut perimeter = 0.0;
    let mut by_line: Vec<((P2, P2), Vec<(f64, f64)>)> = Vec::new();
    for &(a, b) in &pieces {
        let len = d2(a, b);
        let dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let key_pos = by_line.iter().position(|((o, dv), _)| {
            (dv[0] - dir[0]).abs() < 1e-12 && (dv[1] - dir[1]).abs() < 1e-12 && cross(*o, [o[0] + dv[0], o[1] + dv[1]], a).abs() < 1e-12
        });
        let idx = key_pos.unwrap_or_else(|| {
            by_line.push(((a, dir), Vec::new()));
            by_line.len() - 1
        });
        let (o, dv) = by_line[idx].0;
        let s = |p: P2| (p[0] - o[0]) * dv[0] + (p[1] - o[1]) * dv[1];
        by_line[idx].1.push((s(a), s(b)));
    }
    for (_, ivs) in &by_line {
        perimeter += interval_union_length(ivs)?;
    }
    Ok(PlanarMeasure { area, perimeter })
}

/// Hit-or-miss union area, sampling in batches until the standard error
/// drops to `rel_stderr` times the bounding-box area.
pub fn polygon_union_area_mc(polys: &[ConvexPolygon], rel_stderr: f64, seed: u64) -> Result<McEstimate> {
    let bbox = polys
        .iter()
        .map(ConvexPolygon::bbox)
        .reduce(|a, b| a.union(&b))
        .ok_or_else(|| KpError::InvalidInput("no polygons".into()))?;
    let member = |x: &[f64]| polys.iter().any(|q| q.contains([x[0], x[1]], 0.0));
    let target = rel_stderr * bbox.volume();
    let mut n = 1u64 << 16;
    loop {
        let est = mc_volume(member, &bbox, n, seed)?;
        if est.stderr <= target || n >= 1 << 28 {
            return Ok(est);
        }
        n *= 4;
    }
}

/// Intersection of convex polygons (Sutherland–Hodgman), `None` when it has
/// no interior.
pub fn convex_polygon_intersection(polys: &[ConvexPolygon]) -> Option<ConvexPolygon> {
    let mut cur: Vec<P2> = polys.first()?.vertices.clone();
    for clip in &polys[1..] {
        for (e0, e1) in clip.edges() {
            if cur.is_empty() {
                return None;
            }
            let mut next = Vec::with_capacity(cur.len() + 1);
            for i in 0..cur.len() {
                let p = cur[i];
                let q = cur[(i + 1) % cur.len()];
                let fp = cross(e0, e1, p);
                let fq = cross(e0, e1, q);
                if fp >= 0.0 {
                    next.push(p);
                }
                if (fp >= 0.0) != (fq >= 0.0) {
                    let t = fp / (fp - fq);
                    next.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                }
            }
            cur = next;
        }
    }
    let scale = input_scale(&cur);
    cur.dedup_by(|a, b| d2(*a, *b) < 1e-12 * scale);
    while cur.len() > 1 && d2(cur[0], *cur.last().unwrap()) < 1e-12 * scale {
        cur.pop();
    }
    // drop collinear vertices so the result validates as strictly convex
    let mut changed = true;
    while changed && cur.len() >= 3 {
        changed = false;
        for i in 0..cur.len() {
            let n = cur.len();
            if cross(cur[(i + n - 1) % n], cur[i], cur[(i + 1) % n]).abs() < 1e-14 * scale * scale {
                cur.remove(i);
                changed = true;
                break;
            }
        }
    }
    ConvexPolygon::new(cur).ok()
}

/// Area of the common part of convex polygons.
pub fn convex_intersection_area(polys: &[ConvexPolygon]) -> f64 {
    convex_polygon_intersection(polys).map_or(0.0, |p| p.area())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::sample_in_ball;
    use crate::rng::{derive_seed, rng_from_seed};
    use proptest::prelude::*;
    use rand::Rng;

    fn cfg(pts: &[P2]) -> Configuration {
        Configuration::new(2, pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn random_pts(n: usize, spread: f64, seed: u64) -> Vec<P2> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| {
                let v = sample_in_ball(&mut rng, 2, spread);
                [v[0], v[1]]
            })
            .collect()
    }

    fn lens_area(d: f64, r: f64) -> f64 {
        2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn angle_sets() {
        let a = AngleSet::centered(0.1, 0.3);
        assert_eq!(a.0.len(), 2);
        assert!(close(a.0[0].1, 0.4, 1e-15) && close(a.0[1].0, TAU - 0.2, 1e-15));
        let c = a.complement();
        assert!(close(c.0.iter().map(|(x, y)| y - x).sum::<f64>(), TAU - 0.6, 1e-14));
        assert!(a.intersect(&c).0.iter().all(|(x, y)| y - x < 1e-15));
        assert_eq!(AngleSet::centered(1.0, 4.0), AngleSet::full());
        let u = AngleSet(vec![(0.0, 1.0)]).union(&AngleSet(vec![(0.5, 2.0), (3.0, 4.0)]));
        assert_eq!(u.0, vec![(0.0, 2.0), (3.0, 4.0)]);
    }

    #[test]
    fn intersection_examples() {
        let one = disk_intersection_measure(&cfg(&[[0.3, 0.4]]), 1.0).unwrap();
        assert!(close(one.area, PI, 1e-14) && close(one.perimeter, TAU, 1e-14));
        assert!(close(one.v1(), PI, 1e-14) && close(one.v2(), PI, 1e-14));

        let touch = disk_intersection_body(&[[-1.0, 0.0], [1.0, 0.0]], 1.0);
        assert_eq!(touch.measure(), PlanarMeasure::default());
        assert_eq!(touch.point, Some([0.0, 0.0]));

        let lens = disk_intersection_measure(&cfg(&[[-0.5, 0.0], [0.5, 0.0]]), 1.0).unwrap();
        assert!(close(lens.area, 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0, 1e-13));
        assert!(close(lens.area, 1.228369698608757, 1e-12));
        assert!(close(lens.perimeter, 4.0 * PI / 3.0, 1e-13));

        let apart = disk_intersection_body(&[[-2.0, 0.0], [2.0, 0.0]], 1.0);
        assert!(apart.is_empty());
        assert!(disk_intersection_measure(&Configuration::line(&[0.0]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn lens_matches_monte_carlo() {
        let x = cfg(&[[-0.5, 0.0], [0.5, 0.0]]);
        let member = |z: &[f64]| x.points().iter().all(|p| (z[0] - p[0]).hypot(z[1] - p[1]) <= 1.0);
        let est = mc_volume(member, &Aabb::new(vec![-1.0, -1.0], vec![1.0, 1.0]), 10_000_000, 5).unwrap();
        let exact = disk_intersection_measure(&x, 1.0).unwrap().area;
        assert!(est.within(exact, 4.0), "{est:?} vs {exact}");
    }

    #[test]
    fn union_examples() {
        let apart = disk_union_measure(&cfg(&[[-3.0, 0.0], [3.0, 0.0]]), 1.0).unwrap();
        assert!(close(apart.area, TAU, 1e-13) && close(apart.perimeter, 4.0 * PI, 1e-13));
        let same = disk_union_measure(&cfg(&[[0.2, 0.0], [0.2, 0.0]]), 1.0).unwrap();
        assert!(close(same.area, PI, 1e-13) && close(same.perimeter, TAU, 1e-13));
        let overlap = disk_union_measure(&cfg(&[[-0.5, 0.0], [0.5, 0.0]]), 1.0).unwrap();
        assert!(close(overlap.area, TAU - lens_area(1.0, 1.0), 1e-13));
        // perimeter: two outer arcs of angle 2 pi - 2 pi/3 each
        assert!(close(overlap.perimeter, 2.0 * (TAU - 2.0 * PI / 3.0), 1e-13));
    }

    #[test]
    fn union_with_hole() {
        // six unit disks around a ring leave a hole in the middle
        let pts: Vec<P2> = (0..6)
            .map(|i| {
                let t = i as f64 * PI / 3.0;
                [1.9 * t.cos(), 1.9 * t.sin()]
            })
            .collect();
        let body = disk_union_body(&pts.iter().map(|&c| Disk { center: c, radius: 1.0 }).collect::<Vec<_>>());
        let loops = body.loops(1e-9);
        assert_eq!(loops.len(), 2);
        assert!(body.loops_close(1e-12));
        let m = body.measure();
        let x = cfg(&pts);
        let member = |z: &[f64]| x.points().iter().any(|p| (z[0] - p[0]).hypot(z[1] - p[1]) <= 1.0);
        let est = mc_volume(member, &Aabb::cube(&[0.0, 0.0], 2.9), 2_000_000, 8).unwrap();
        assert!(est.within(m.area, 4.0), "{est:?} vs {}", m.area);
    }

    #[test]
    fn mixed_radius_union() {
        let body = disk_union_body(&[
            Disk { center: [0.0, 0.0], radius: 2.0 },
            Disk { center: [0.5, 0.0], radius: 0.5 },
            Disk { center: [2.0, 0.0], radius: 1.0 },
        ]);
        let m = body.measure();
        let want = 4.0 * PI + PI - {
            // lens of radii 2 and 1 at distance 2
            let (r1, r2, d): (f64, f64, f64) = (2.0, 1.0, 2.0);
            r1 * r1 * ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).acos()
                + r2 * r2 * ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).acos()
                - 0.5 * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).sqrt()
        };
        assert!(close(m.area, want, 1e-12), "{} vs {want}", m.area);
    }

    #[test]
    fn spindle_hull_examples() {
        let point = spindle_hull_measure(&cfg(&[[0.4, 0.1]]), 1.0).unwrap();
        assert_eq!(point, PlanarMeasure::default());
        // the only unit disk through both ends of a diameter-2 segment is
        // centred at its midpoint
        let seg = spindle_hull_measure(&cfg(&[[-1.0, 0.0], [1.0, 0.0]]), 1.0).unwrap();
        assert!(close(seg.area, PI, 1e-12) && close(seg.perimeter, TAU, 1e-12));
        // two closer points: intersection of the two unit disks through both
        let near = spindle_hull_measure(&cfg(&[[-0.6, 0.0], [0.6, 0.0]]), 1.0).unwrap();
        let d = 2.0 * (1.0f64 - 0.36).sqrt();
        assert!(close(near.area, lens_area(d, 1.0), 1e-12));
        let s3 = 3f64.sqrt();
        let reuleaux = spindle_hull_measure(&cfg(&[[0.0, 0.0], [1.0, 0.0], [0.5, s3 / 2.0]]), 1.0).unwrap();
        assert!(close(reuleaux.perimeter, PI, 1e-12));
        assert!(close(reuleaux.area, (PI - s3) / 2.0, 1e-12));
        assert!(spindle_hull_measure(&cfg(&[[-2.0, 0.0], [2.0, 0.0]]), 1.0).is_err());
    }

    #[test]
    fn duality_self_test_passes() {
        spindle_duality_self_test().unwrap();
    }

    #[test]
    fn two_disk_inclusion_exclusion() {
        let mut rng = rng_from_seed(17);
        for _ in 0..500 {
            let rho: f64 = rng.random_range(0.2..2.0);
            let a = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let b = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let x = cfg(&[a, b]);
            let i = disk_intersection_measure(&x, rho).unwrap();
            let u = disk_union_measure(&x, rho).unwrap();
            assert!(close(i.area + u.area, TAU * rho * rho, 1e-10));
            assert!(close(i.perimeter + u.perimeter, 2.0 * TAU * rho, 1e-10));
        }
    }

    /// Exact measures against the hit-or-miss oracle on 200 instances each.
    #[test]
    fn exact_measures_match_monte_carlo() {
        let mut fails = Vec::new();
        for inst in 0..200u64 {
            let mut rng = rng_from_seed(derive_seed(71, inst));
            let n = rng.random_range(1..=7);
            let rho: f64 = rng.random_range(0.5..1.5);
            let pts = random_pts(n, rng.random_range(0.2..1.5), derive_seed(72, inst));
            let x = cfg(&pts);
            let bbox = Aabb::cube(&x.centroid(), 3.0 + rho);
            let inter = |z: &[f64]| pts.iter().all(|p| (z[0] - p[0]).hypot(z[1] - p[1]) <= rho);
            let union = |z: &[f64]| pts.iter().any(|p| (z[0] - p[0]).hypot(z[1] - p[1]) <= rho);
            let ei = mc_volume(inter, &bbox, 100_000, derive_seed(73, inst)).unwrap();
            let eu = mc_volume(union, &bbox, 100_000, derive_seed(74, inst)).unwrap();
            let xi = disk_intersection_measure(&x, rho).unwrap().area;
            let xu = disk_union_measure(&x, rho).unwrap().area;
            if !ei.within(xi, 4.0) {
                fails.push(format!("inter {inst}: {xi} vs {ei:?}"));
            }
            if !eu.within(xu, 4.0) {
                fails.push(format!("union {inst}: {xu} vs {eu:?}"));
            }
        }
        assert!(fails.is_empty(), "{fails:#?}");
    }

    #[test]
    fn loops_close_on_random_bodies() {
        for seed in 0..100 {
            let pts = random_pts(6, 0.8, 200 + seed);
            let i = disk_intersection_body(&pts, 1.0);
            assert!(i.loops_close(1e-12));
            assert!(i.loops(1e-12).len() <= 1);
            let u = disk_union_body(&pts.iter().map(|&c| Disk { center: c, radius: 1.0 }).collect::<Vec<_>>());
            assert!(u.loops_close(1e-12));
        }
    }

    #[test]
    fn polygon_examples() {
        let sq = ConvexPolygon::rect([0.5, 0.5], [0.5, 0.5]);
        let m = polygon_union_measure(&[sq.clone()]).unwrap();
        assert!(close(m.area, 1.0, 1e-14) && close(m.perimeter, 4.0, 1e-14));
        let two = polygon_union_measure(&[sq.clone(), sq.translated([1.0, 0.0])]).unwrap();
        assert!(close(two.area, 2.0, 1e-13) && close(two.perimeter, 6.0, 1e-13));
        let dup = polygon_union_measure(&[sq.clone(), sq.clone()]).unwrap();
        assert!(close(dup.area, 1.0, 1e-13) && close(dup.perimeter, 4.0, 1e-13));
        let shifted = polygon_union_measure(&[sq.clone(), sq.translated([0.5, 0.5])]).unwrap();
        assert!(close(shifted.area, 1.75, 1e-13) && close(shifted.perimeter, 6.0, 1e-13));
        let est = polygon_union_area_mc(&[sq.clone(), sq.translated([0.5, 0.5])], 1e-3, 3).unwrap();
        assert!(est.within(1.75, 4.0));
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn polygon_intersection() {
        let sq = ConvexPolygon::rect([0.0, 0.0], [1.0, 1.0]);
        assert!(close(convex_intersection_area(&[sq.clone(), sq.translated([0.5, 0.5])]), 2.25, 1e-13));
        assert_eq!(convex_intersection_area(&[sq.clone(), sq.translated([3.0, 0.0])]), 0.0);
        assert_eq!(convex_intersection_area(&[sq.clone(), sq.translated([2.0, 0.0])]), 0.0);
    }

    fn random_convex(rng: &mut crate::rng::KpRng) -> ConvexPolygon {
        let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let k = rng.random_range(3..8);
        let mut ts: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
        ts.sort_by(f64::total_cmp);
        let r: f64 = rng.random_range(0.3..1.0);
        let v: Vec<P2> = ts.iter().map(|t| [c[0] + r * t.cos(), c[1] + r * t.sin()]).collect();
        ConvexPolygon::new(v).unwrap_or_else(|_| ConvexPolygon::rect(c, [r, r]))
    }

    #[test]
    fn polygon_union_area_matches_monte_carlo() {
        let mut rng = rng_from_seed(91);
        for inst in 0..40 {
            let polys: Vec<ConvexPolygon> = (0..rng.random_range(1..6)).map(|_| random_convex(&mut rng)).collect();
            let exact = polygon_union_measure(&polys).unwrap();
            let est = polygon_union_area_mc(&polys, 1e-3, inst).unwrap();
            assert!(est.within(exact.area, 4.0), "inst {inst}: {} vs {est:?}", exact.area);
            let hull_perimeter: f64 = polys.iter().map(ConvexPolygon::perimeter).sum();
            assert!(exact.perimeter <= hull_perimeter + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn adding_a_center_is_monotone(seed in 0u64..100_000, n in 1usize..6) {
            let pts = random_pts(n + 1, 0.9, seed);
            let a = disk_intersection_body(&pts[..n], 1.0).measure();
            let b = disk_intersection_body(&pts, 1.0).measure();
            prop_assert!(b.area <= a.area + 1e-12);
            prop_assert!(b.perimeter <= a.perimeter + 1e-12);
            let du = |p: &[P2]| disk_union_body(&p.iter().map(|&c| Disk { center: c, radius: 1.0 }).collect::<Vec<_>>()).measure();
            prop_assert!(du(&pts).area >= du(&pts[..n]).area - 1e-12);
        }

        #[test]
        fn isoperimetric(seed in 0u64..100_000, n in 1usize..7) {
            let m = disk_intersection_body(&random_pts(n, 0.8, seed), 1.0).measure();
            prop_assume!(m.area > 0.0);
            prop_assert!(m.perimeter >= 2.0 * (PI * m.area).sqrt() - 1e-12);
        }

        #[test]
        fn isodiametric(seed in 0u64..100_000, n in 1usize..7, rho in 0.1f64..1.5) {
            let pts = random_pts(n, 1.0, seed);
            let mut diam: f64 = 0.0;
            for a in &pts {
                for b in &pts {
                    diam = diam.max(d2(*a, *b));
                }
            }
            let m = disk_union_body(&pts.iter().map(|&c| Disk { center: c, radius: rho }).collect::<Vec<_>>()).measure();
            let big = diam + 2.0 * rho;
            prop_assert!(m.area <= PI * big * big / 4.0 + 1e-10);
        }
    }
}
