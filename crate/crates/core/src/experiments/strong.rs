//! Strong-contraction campaigns over translates of unconditional bodies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::campaign::CampaignSummary;
use super::records::{verdict_for, Method, VerificationRecord};
use crate::config::{is_strong_contraction, random_lipschitz_contraction, random_reflection_composite, Configuration};
use crate::error::{KpError, Result};
use crate::measures::{interval_intersection_length, interval_union_length};
use crate::par::map_indexed;
use crate::rng::{derive_seed, rng_from_seed, KpRng};
use crate::uncond::{intersection_volume_by_slicing, union_volume_by_slicing, PlacedBodies, UnconditionalBody};

/// Body families a campaign draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyFamily {
    Box,
    L1Ball,
    L2Ball,
    CrossPolytope,
    /// Intersection of a box and a Euclidean ellipsoid.
    BoxCapEllipsoid,
}

/// How the strong contraction `q` of `p` is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrongMode {
    /// Composites of one-sided reflections.
    Reflections,
    /// Independent 1-Lipschitz maps per coordinate.
    Lipschitz,
    /// Alternates the two by trial parity.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongSpec {
    pub d: usize,
    pub n: usize,
    pub families: Vec<BodyFamily>,
    pub mode: StrongMode,
    pub trials: u64,
    pub seed: u64,
    /// Coarse slicing resolution per transverse axis; ignored for `d = 1`.
    pub resolution: usize,
    /// Translations are drawn uniformly from `[-spread, spread]^d`.
    pub spread: f64,
}

fn random_body(family: BodyFamily, d: usize, rng: &mut KpRng) -> Result<UnconditionalBody> {
    let a: Vec<f64> = (0..d).map(|_| rng.random_range(0.3..1.5)).collect();
    match family {
        BodyFamily::Box => UnconditionalBody::axis_box(a),
        BodyFamily::L1Ball => UnconditionalBody::scaled_lp(a, 1.0),
        BodyFamily::L2Ball => UnconditionalBody::scaled_lp(a, 2.0),
        BodyFamily::CrossPolytope => UnconditionalBody::cross_polytope(a),
        BodyFamily::BoxCapEllipsoid => {
            let b: Vec<f64> = a.iter().map(|x| x * rng.random_range(1.0..1.4)).collect();
            UnconditionalBody::intersection(vec![UnconditionalBody::axis_box(a)?, UnconditionalBody::scaled_lp(b, 2.0)?])
        }
    }
}

/// Random placed family and a strong contraction of its translations.
pub fn strong_trial_instance(spec: &StrongSpec, trial: u64) -> Result<(PlacedBodies, Configuration)> {
    if spec.families.is_empty() || spec.n == 0 || spec.d == 0 {
        return Err(KpError::InvalidInput("need d >= 1, N >= 1 and a body family".into()));
    }
    let mut rng = rng_from_seed(derive_seed(spec.seed, trial));
    let bodies = (0..spec.n)
        .map(|_| {
            let fam = spec.families[rng.random_range(0..spec.families.len())];
            random_body(fam, spec.d, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let p = Configuration::new(
        spec.d,
        (0..spec.n).map(|_| (0..spec.d).map(|_| rng.random_range(-spec.spread..=spec.spread)).collect()).collect(),
    )?;
    let lipschitz = match spec.mode {
        StrongMode::Reflections => false,
        StrongMode::Lipschitz => true,
        StrongMode::Both => trial % 2 == 1,
    };
    let q = if lipschitz {
        random_lipschitz_contraction(&p, &mut rng)
    } else {
        let count = rng.random_range(1..=2 * spec.d + 2);
        random_reflection_composite(&p, count, &mut rng)
    };
    debug_assert!(is_strong_contraction(&p, &q, 1e-12).unwrap_or(false));
    Ok((PlacedBodies::new(bodies, p)?, q))
}

fn intervals(placed: &PlacedBodies) -> Vec<(f64, f64)> {
    placed
        .bodies()
        .iter()
        .zip(placed.translations().points())
        .map(|(b, t)| {
            let h = b.bounding_half_extents()[0];
            (t[0] - h, t[0] + h)
        })
        .collect()
}

struct Pair {
    union: (f64, f64, f64, f64),
    inter: (f64, f64, f64, f64),
}

fn measure_pair(spec: &StrongSpec, before: &PlacedBodies, after: &PlacedBodies) -> Result<Pair> {
    if spec.d == 1 {
        let (a, b) = (intervals(before), intervals(after));
        return Ok(Pair {
            union: (interval_union_length(&a)?, 0.0, interval_union_length(&b)?, 0.0),
            inter: (interval_intersection_length(&a), 0.0, interval_intersection_length(&b), 0.0),
        });
    }
    let ub = union_volume_by_slicing(before, spec.resolution)?;
    let ua = union_volume_by_slicing(after, spec.resolution)?;
    let ib = intersection_volume_by_slicing(before, spec.resolution)?;
    let ia = intersection_volume_by_slicing(after, spec.resolution)?;
    Ok(Pair { union: (ub.value, ub.error, ua.value, ua.error), inter: (ib.value, ib.error, ia.value, ia.error) })
}

/// For each trial, draws bodies, translations `p` and a strong contraction
/// `q`, then checks that the union volume does not grow and the
/// intersection volume does not shrink. Both records use `lhs` for the
/// configuration at `p`. In one dimension the lengths come from exact
/// interval unions and intersections; otherwise from slicing with its error
/// estimate.
pub fn strong_contraction_campaign(spec: &StrongSpec) -> Result<CampaignSummary> {
    let out: Vec<Result<[VerificationRecord; 2]>> = map_indexed(spec.trials as usize, |t| {
        let trial = t as u64;
        let (before, q) = strong_trial_instance(spec, trial)?;
        if !is_strong_contraction(before.translations(), &q, 1e-12)? {
            return Err(KpError::InvalidInput("generator produced a non-strong contraction".into()));
        }
        let after = before.moved_to(q)?;
        let m = measure_pair(spec, &before, &after)?;
        let rec = |theorem: &str, (lhs, le, rhs, re): (f64, f64, f64, f64), margin: f64| VerificationRecord {
            theorem: theorem.into(),
            exploratory: false,
            d: spec.d,
            k: spec.d,
            n: spec.n,
            lambda: 0.0,
            trial,
            lhs,
            lhs_err: le,
            rhs,
            rhs_err: re,
            margin,
            method: Method::Slicing,
            verdict: verdict_for(Method::Slicing, margin, le, re),
            seed: derive_seed(spec.seed, trial),
        };
        let u = rec("T6-union", m.union, m.union.0 - m.union.2);
        let i = rec("T6-intersection", m.inter, m.inter.2 - m.inter.0);
        Ok([u, i])
    });
    let mut records = Vec::with_capacity(2 * spec.trials as usize);
    for r in out {
        records.extend(r?);
    }
    Ok(CampaignSummary::from_records(records, 0, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::records::Verdict;

    fn spec(d: usize, n: usize, families: Vec<BodyFamily>, trials: u64) -> StrongSpec {
        StrongSpec { d, n, families, mode: StrongMode::Both, trials, seed: 17, resolution: 64, spread: 1.0 }
    }

    #[test]
    fn one_dimensional_is_exact_and_holds() {
        let s = strong_contraction_campaign(&spec(1, 4, vec![BodyFamily::Box], 2000)).unwrap();
        assert_eq!(s.violated, 0);
        assert!(s.records.iter().all(|r| r.lhs_err == 0.0 && r.rhs_err == 0.0));
        assert_eq!(s.holds, 4000);
    }

    #[test]
    fn one_dimensional_matches_sort_free_oracle() {
        // pointwise coverage on a fine grid of the real line
        let sp = spec(1, 3, vec![BodyFamily::Box], 20);
        let s = strong_contraction_campaign(&sp).unwrap();
        for t in 0..20u64 {
            let (placed, _) = strong_trial_instance(&sp, t).unwrap();
            let iv = intervals(&placed);
            let n = 400_000;
            let (lo, hi) = (-4.0, 4.0);
            let h = (hi - lo) / n as f64;
            let covered = (0..n)
                .filter(|i| {
                    let x = lo + (*i as f64 + 0.5) * h;
                    iv.iter().any(|(a, b)| *a <= x && x <= *b)
                })
                .count() as f64
                * h;
            let rec = &s.records[2 * t as usize];
            assert!((rec.lhs - covered).abs() < 4.0 * h, "{} vs {covered}", rec.lhs);
        }
    }

    #[test]
    fn planar_mixed_families_hold_within_error() {
        let fams = vec![BodyFamily::Box, BodyFamily::L1Ball, BodyFamily::BoxCapEllipsoid];
        let s = strong_contraction_campaign(&spec(2, 4, fams, 60)).unwrap();
        assert_eq!(s.violated, 0, "{:?}", s.records.iter().find(|r| r.verdict == Verdict::Violated));
    }

    #[test]
    fn generated_pairs_are_strong_contractions() {
        for mode in [StrongMode::Reflections, StrongMode::Lipschitz] {
            let mut sp = spec(3, 5, vec![BodyFamily::CrossPolytope], 1);
            sp.mode = mode;
            for t in 0..30 {
                let (placed, q) = strong_trial_instance(&sp, t).unwrap();
                assert!(is_strong_contraction(placed.translations(), &q, 1e-12).unwrap());
            }
        }
    }

    #[test]
    fn deterministic() {
        let sp = spec(2, 3, vec![BodyFamily::L2Ball], 8);
        assert_eq!(strong_contraction_campaign(&sp).unwrap(), strong_contraction_campaign(&sp).unwrap());
    }
}
