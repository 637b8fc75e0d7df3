//! Frozen planar fixtures showing that the strong-contraction results need
//! unconditional bodies and do not extend from area to perimeter.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{is_contraction, is_strong_contraction, Configuration};
use crate::error::{KpError, Result};
use crate::planar::{convex_intersection_area, polygon_union_measure, ConvexPolygon, PlanarMeasure, P2};
use crate::uncond::{union_volume_by_slicing, PlacedBodies, UnconditionalBody};

/// Frozen fixture text shipped with the crate.
pub const FIGURES_JSON: &str = include_str!("../../fixtures/figures.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleFixture {
    pub base: Vec<P2>,
    pub first: Vec<P2>,
    pub second: Vec<P2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconditionalFixture {
    pub bodies: Vec<UnconditionalBody>,
    pub first: Vec<P2>,
    pub second: Vec<P2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureFixtures {
    pub triangles: TriangleFixture,
    pub unconditional: UnconditionalFixture,
}

impl FigureFixtures {
    pub fn frozen() -> Result<Self> {
        Ok(serde_json::from_str(FIGURES_JSON)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KpError::InvalidInput(format!("fixture file {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleReport {
    pub second_is_strong_contraction_of_first: bool,
    pub first_is_strong_contraction_of_second: bool,
    pub first_intersection_area: f64,
    pub second_intersection_area: f64,
    pub first_union: PlanarMeasure,
    pub second_union: PlanarMeasure,
}

impl TriangleReport {
    /// Mutual strong contraction, a point-like second intersection, and a
    /// first union larger in both area and perimeter.
    pub fn passed(&self) -> bool {
        self.second_is_strong_contraction_of_first
            && self.first_is_strong_contraction_of_second
            && self.second_intersection_area < 1e-9
            && self.first_intersection_area > self.second_intersection_area
            && self.first_union.area > self.second_union.area
            && self.first_union.perimeter > self.second_union.perimeter
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconditionalReport {
    pub second_is_contraction_of_first: bool,
    pub second_is_strong_contraction_of_first: bool,
    pub first_union: PlanarMeasure,
    pub second_union: PlanarMeasure,
    /// Union areas by slicing, a route independent of the polygon code.
    pub first_area_by_slicing: f64,
    pub second_area_by_slicing: f64,
    pub perimeter_gain: f64,
}

impl UnconditionalReport {
    /// Contraction holds and the perimeter grows by more than `0.01`.
    pub fn passed(&self) -> bool {
        self.second_is_contraction_of_first && self.perimeter_gain > 0.01
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureReports {
    pub triangles: TriangleReport,
    pub unconditional: UnconditionalReport,
}

impl FigureReports {
    pub fn passed(&self) -> bool {
        self.triangles.passed() && self.unconditional.passed()
    }
}

fn config(points: &[P2]) -> Result<Configuration> {
    Configuration::new(2, points.iter().map(|p| p.to_vec()).collect())
}

/// Polygon of a planar box or cross-polytope placed at `t`.
pub fn body_polygon(body: &UnconditionalBody, t: P2) -> Result<ConvexPolygon> {
    match body {
        UnconditionalBody::AxisBox { half_extents: h } if h.len() == 2 => Ok(ConvexPolygon::rect(t, [h[0], h[1]])),
        UnconditionalBody::CrossPolytope { half_extents: h } if h.len() == 2 => {
            let [x, y] = t;
            ConvexPolygon::new(vec![[x + h[0], y], [x, y + h[1]], [x - h[0], y], [x, y - h[1]]])
        }
        _ => Err(KpError::InvalidInput("only planar boxes and cross-polytopes have polygon form".into())),
    }
}

fn union_of(bodies: &[UnconditionalBody], ts: &[P2]) -> Result<PlanarMeasure> {
    let polys = bodies.iter().zip(ts).map(|(b, t)| body_polygon(b, *t)).collect::<Result<Vec<_>>>()?;
    polygon_union_measure(&polys)
}

pub fn triangle_report(fx: &TriangleFixture) -> Result<TriangleReport> {
    let base = ConvexPolygon::new(fx.base.clone())?;
    let place = |ts: &[P2]| ts.iter().map(|t| base.translated(*t)).collect::<Vec<_>>();
    let (a, b) = (place(&fx.first), place(&fx.second));
    let (p, q) = (config(&fx.first)?, config(&fx.second)?);
    Ok(TriangleReport {
        second_is_strong_contraction_of_first: is_strong_contraction(&p, &q, 0.0)?,
        first_is_strong_contraction_of_second: is_strong_contraction(&q, &p, 0.0)?,
        first_intersection_area: convex_intersection_area(&a),
        second_intersection_area: convex_intersection_area(&b),
        first_union: polygon_union_measure(&a)?,
        second_union: polygon_union_measure(&b)?,
    })
}

pub fn unconditional_report(fx: &UnconditionalFixture, resolution: usize) -> Result<UnconditionalReport> {
    let (p, q) = (config(&fx.first)?, config(&fx.second)?);
    let first_union = union_of(&fx.bodies, &fx.first)?;
    let second_union = union_of(&fx.bodies, &fx.second)?;
    let placed = PlacedBodies::new(fx.bodies.clone(), p.clone())?;
    Ok(UnconditionalReport {
        second_is_contraction_of_first: is_contraction(&p, &q, 0.0)?,
        second_is_strong_contraction_of_first: is_strong_contraction(&p, &q, 0.0)?,
        perimeter_gain: second_union.perimeter - first_union.perimeter,
        first_union,
        second_union,
        first_area_by_slicing: union_volume_by_slicing(&placed, resolution)?.value,
        second_area_by_slicing: union_volume_by_slicing(&placed.moved_to(q)?, resolution)?.value,
    })
}

/// Reports for the frozen fixtures.
pub fn figure_fixtures() -> Result<FigureReports> {
    figure_reports(&FigureFixtures::frozen()?)
}

pub fn figure_reports(fx: &FigureFixtures) -> Result<FigureReports> {
    Ok(FigureReports { triangles: triangle_report(&fx.triangles)?, unconditional: unconditional_report(&fx.unconditional, 400)? })
}
