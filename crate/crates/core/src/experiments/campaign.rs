//! Pair verification and randomized campaigns over uniform contractions.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::records::{verdict_for, Method, VerificationRecord, Verdict};
use crate::ball_bodies::BallIntersection;
use crate::bounds::{at_least, intersection_thresholds, sigma_closed_form, union_thresholds};
use crate::config::{is_contraction, sample_uniform_contraction_pair, uniform_contraction_interval, Configuration};
use crate::error::{KpError, Result};
use crate::measures::{mc_intrinsic_v1, mc_volume, Aabb, McEstimate};
use crate::par::map_indexed;
use crate::planar::{disk_intersection_measure, disk_union_measure};
use crate::rng::{derive_path, derive_seed};
use crate::uncond::{intersection_volume_by_slicing, union_volume_by_slicing, PlacedBodies, UnconditionalBody};

/// Theorems a campaign can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    /// Intersections, `N >= (1 + sqrt 2)^d`.
    T4,
    /// Unions, `N >= (1 + 2 d^3)^d`.
    T5,
    /// Unconditional bodies under strong contractions.
    T6,
    /// Intersections, refined thresholds (a) and (b).
    T7,
    /// Unions, refined thresholds (a), (b) and (c).
    T8,
}

impl TheoremId {
    pub fn is_union(self) -> bool {
        matches!(self, Self::T5 | Self::T8)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::T4 => "T4",
            Self::T5 => "T5",
            Self::T6 => "T6",
            Self::T7 => "T7",
            Self::T8 => "T8",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = KpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T4" => Ok(Self::T4),
            "T5" => Ok(Self::T5),
            "T6" => Ok(Self::T6),
            "T7" => Ok(Self::T7),
            "T8" => Ok(Self::T8),
            _ => Err(KpError::InvalidInput(format!("unknown theorem {s:?}"))),
        }
    }
}

/// Whether `(d, k, N, lambda)` satisfies the hypotheses of `theorem`.
pub fn within_hypotheses(theorem: TheoremId, d: usize, k: usize, n: usize, lambda: f64) -> Result<bool> {
    if d == 0 || k == 0 || k > d || !(lambda > 0.0) {
        return Ok(false);
    }
    let nf = n as f64;
    Ok(match theorem {
        TheoremId::T4 => lambda <= 2.0 && at_least(nf, intersection_thresholds(d, lambda)?.main),
        TheoremId::T7 => {
            let t = intersection_thresholds(d, lambda)?;
            lambda <= 2.0 && (at_least(nf, t.part_a) || (t.part_b_applicable && at_least(nf, t.part_b)))
        }
        TheoremId::T5 => {
            k == d && (lambda >= 2.0 || at_least(nf, (1.0 + 2.0 * (d as f64).powi(3)).powi(d as i32)))
        }
        TheoremId::T8 => {
            if k != d {
                return Ok(false);
            }
            if lambda >= 2.0 {
                return Ok(true);
            }
            // without a closed-form sigma, part (b) is never claimed
            let sigma = sigma_closed_form(d);
            let t = union_thresholds(d, lambda, sigma.unwrap_or(crate::bounds::SigmaInput { value: f64::INFINITY, stderr: 0.0 }))?;
            (t.part_a_applicable && at_least(nf, t.part_a))
                || (t.part_b_applicable && sigma.is_some() && at_least(nf, t.part_b))
                || (t.part_c_applicable && at_least(nf, t.part_c_n))
        }
        TheoremId::T6 => true,
    })
}

struct Side {
    value: f64,
    err: f64,
}

fn exact(value: f64) -> Side {
    Side { value, err: 0.0 }
}

fn from_mc(e: McEstimate) -> Side {
    Side { value: e.value, err: e.stderr }
}

fn unit_balls(x: &Configuration) -> Result<PlacedBodies> {
    let ball = UnconditionalBody::scaled_lp(vec![1.0; x.dim()], 2.0)?;
    PlacedBodies::new(vec![ball; x.len()], x.clone())
}

/// `V_k` of `B[X, 1]` by the requested method.
fn intersection_side(x: &Configuration, k: usize, method: Method, budget: u64, seed: u64) -> Result<Side> {
    let d = x.dim();
    let unavailable = || KpError::MethodUnavailable { method: method.as_str().into(), d, k };
    match method {
        Method::PlanarExact => {
            if d != 2 {
                return Err(unavailable());
            }
            Ok(exact(disk_intersection_measure(x, 1.0)?.intrinsic(k)?))
        }
        Method::Mc => {
            let body = BallIntersection::unit(x.clone())?;
            if !body.is_nonempty() {
                return Ok(exact(0.0));
            }
            if k == d {
                let bbox = x
                    .points()
                    .iter()
                    .map(|c| Aabb::cube(c, 1.0))
                    .reduce(|a, b| a.intersect(&b))
                    .expect("nonempty configuration");
                Ok(from_mc(mc_volume(|z| body.contains(z, 0.0).unwrap_or(false), &bbox, budget, seed)?))
            } else if k == 1 {
                Ok(from_mc(mc_intrinsic_v1(|u| body.support(u).unwrap_or(f64::NAN), d, budget, seed)?))
            } else {
                Err(unavailable())
            }
        }
        Method::Slicing => {
            if k != d {
                return Err(unavailable());
            }
            let v = intersection_volume_by_slicing(&unit_balls(x)?, slicing_resolution(d, budget))?;
            Ok(Side { value: v.value, err: v.error })
        }
    }
}

/// Volume of the union of unit balls around `X`.
fn union_side(x: &Configuration, method: Method, budget: u64, seed: u64) -> Result<Side> {
    let d = x.dim();
    match method {
        Method::PlanarExact => {
            if d != 2 {
                return Err(KpError::MethodUnavailable { method: method.as_str().into(), d, k: d });
            }
            Ok(exact(disk_union_measure(x, 1.0)?.area))
        }
        Method::Mc => {
            let bbox = x
                .points()
                .iter()
                .map(|c| Aabb::cube(c, 1.0))
                .reduce(|a, b| a.union(&b))
                .expect("nonempty configuration");
            let member = |z: &[f64]| x.points().iter().any(|c| crate::vector::dist2(c, z) <= 1.0);
            Ok(from_mc(mc_volume(member, &bbox, budget, seed)?))
        }
        Method::Slicing => {
            let v = union_volume_by_slicing(&unit_balls(x)?, slicing_resolution(d, budget))?;
            Ok(Side { value: v.value, err: v.error })
        }
    }
}

/// Grid resolution per transverse axis so that the finer grid has about
/// `budget` lines.
fn slicing_resolution(d: usize, budget: u64) -> usize {
    if d <= 1 {
        return 2;
    }
    let per_axis = (budget as f64 / 5.0).powf(1.0 / (d - 1) as f64);
    (per_axis as usize).clamp(2, 4096)
}

/// Largest separating value of a uniform-contraction pair, or NaN.
fn separating_lambda(p: &Configuration, q: &Configuration) -> f64 {
    uniform_contraction_interval(p, q)
        .ok()
        .flatten()
        .map_or(f64::NAN, |iv| iv.hi)
}

fn record(
    theorem: &str,
    p: &Configuration,
    q: &Configuration,
    k: usize,
    method: Method,
    seed: u64,
    lhs: Side,
    rhs: Side,
    margin: f64,
) -> VerificationRecord {
    VerificationRecord {
        theorem: theorem.into(),
        exploratory: false,
        d: p.dim(),
        k,
        n: p.len(),
        lambda: separating_lambda(p, q),
        trial: 0,
        lhs: lhs.value,
        lhs_err: lhs.err,
        rhs: rhs.value,
        rhs_err: rhs.err,
        margin,
        method,
        verdict: verdict_for(method, margin, lhs.err, rhs.err),
        seed,
    }
}

fn require_contraction(p: &Configuration, q: &Configuration) -> Result<()> {
    if !is_contraction(p, q, 1e-12)? {
        return Err(KpError::InvalidInput("q is not a contraction of p".into()));
    }
    Ok(())
}

/// Compares `V_k(B[p])` (lhs) with `V_k(B[q])` (rhs); the inequality under
/// test is `lhs <= rhs`. A planar Monte Carlo violation is re-checked with
/// the exact method, whose record replaces it.
pub fn verify_intersection_pair(
    p: &Configuration,
    q: &Configuration,
    k: usize,
    method: Method,
    budget: u64,
    seed: u64,
) -> Result<VerificationRecord> {
    require_contraction(p, q)?;
    let lhs = intersection_side(p, k, method, budget, derive_seed(seed, 0))?;
    let rhs = intersection_side(q, k, method, budget, derive_seed(seed, 1))?;
    let margin = rhs.value - lhs.value;
    let rec = record("intersection-pair", p, q, k, method, seed, lhs, rhs, margin);
    if rec.verdict == Verdict::Violated && method == Method::Mc && p.dim() == 2 {
        return verify_intersection_pair(p, q, k, Method::PlanarExact, budget, seed);
    }
    Ok(rec)
}

/// Compares `V_d` of the union of unit balls around `p` (lhs) with that
/// around `q` (rhs); the inequality under test is `lhs >= rhs`.
pub fn verify_union_pair(
    p: &Configuration,
    q: &Configuration,
    method: Method,
    budget: u64,
    seed: u64,
) -> Result<VerificationRecord> {
    require_contraction(p, q)?;
    let lhs = union_side(p, method, budget, derive_seed(seed, 0))?;
    let rhs = union_side(q, method, budget, derive_seed(seed, 1))?;
    let margin = lhs.value - rhs.value;
    let rec = record("union-pair", p, q, p.dim(), method, seed, lhs, rhs, margin);
    if rec.verdict == Verdict::Violated && method == Method::Mc && p.dim() == 2 {
        return verify_union_pair(p, q, Method::PlanarExact, budget, seed);
    }
    Ok(rec)
}

/// Parameters of a randomized campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub theorem: TheoremId,
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub method: Method,
    /// Samples per Monte Carlo side, or slice lines for slicing.
    pub budget: u64,
    /// Allows parameters outside the theorem's hypotheses.
    pub exploratory: bool,
}

impl CampaignSpec {
    /// Exact planar campaign.
    pub fn planar(theorem: TheoremId, k: usize, n: usize, lambdas: Vec<f64>, trials: u64, seed: u64) -> Self {
        Self { theorem, d: 2, k, n, lambdas, trials, seed, method: Method::PlanarExact, budget: 0, exploratory: false }
    }
}

/// Counts and records of a campaign, in (cell, trial) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub records: Vec<VerificationRecord>,
    pub holds: usize,
    pub violated: usize,
    pub inconclusive: usize,
    /// Trials where no admissible pair could be sampled.
    pub skipped: usize,
    /// True when every cell satisfied the theorem's hypotheses.
    pub within_hypotheses: bool,
}

impl CampaignSummary {
    pub fn from_records(records: Vec<VerificationRecord>, skipped: usize, within_hypotheses: bool) -> Self {
        let count = |v: Verdict| records.iter().filter(|r| r.verdict == v).count();
        Self {
            holds: count(Verdict::Holds),
            violated: count(Verdict::Violated),
            inconclusive: count(Verdict::Inconclusive),
            records,
            skipped,
            within_hypotheses,
        }
    }

    /// Violations recorded for parameters inside the hypotheses.
    pub fn hypothesis_violations(&self) -> usize {
        if self.within_hypotheses {
            self.violated
        } else {
            0
        }
    }
}

/// Runs `trials` random uniform-contraction pairs per `lambda` cell. Trial
/// `t` of cell `c` uses the seed `derive_path(seed, [c, t])`; results come
/// back in (cell, trial) order whatever the thread count.
pub fn campaign(spec: &CampaignSpec) -> Result<CampaignSummary> {
    if spec.theorem == TheoremId::T6 {
        return Err(KpError::InvalidInput("use strong_contraction_campaign for T6".into()));
    }
    if spec.n < 2 || spec.lambdas.is_empty() {
        return Err(KpError::InvalidInput("need N >= 2 and at least one lambda".into()));
    }
    let mut inside = true;
    for &lambda in &spec.lambdas {
        if !within_hypotheses(spec.theorem, spec.d, spec.k, spec.n, lambda)? {
            inside = false;
            if !spec.exploratory {
                return Err(KpError::InvalidInput(format!(
                    "{} hypotheses fail at d={}, k={}, N={}, lambda={lambda}; rerun as exploratory",
                    spec.theorem, spec.d, spec.k, spec.n
                )));
            }
        }
    }
    let cells = spec.lambdas.len();
    let total = cells * spec.trials as usize;
    let out: Vec<Result<Option<VerificationRecord>>> = map_indexed(total, |idx| {
        let cell = idx / spec.trials as usize;
        let trial = (idx % spec.trials as usize) as u64;
        let lambda = spec.lambdas[cell];
        let seed = derive_path(spec.seed, &[cell as u64, trial]);
        let (p, q) = match sample_uniform_contraction_pair(spec.d, spec.n, lambda, None, seed) {
            Ok(pair) => pair,
            Err(KpError::PlacementFailed { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut rec = if spec.theorem.is_union() {
            verify_union_pair(&p, &q, spec.method, spec.budget, seed)?
        } else {
            verify_intersection_pair(&p, &q, spec.k, spec.method, spec.budget, seed)?
        };
        rec.theorem = spec.theorem.as_str().into();
        rec.exploratory = spec.exploratory || !inside;
        rec.lambda = lambda;
        rec.trial = trial;
        Ok(Some(rec))
    });
    let mut records = Vec::with_capacity(total);
    let mut skipped = 0;
    for r in out {
        match r? {
            Some(rec) => records.push(rec),
            None => skipped += 1,
        }
    }
    Ok(CampaignSummary::from_records(records, skipped, inside))
}

/// Regenerates the pair behind a campaign record.
pub fn campaign_pair(spec: &CampaignSpec, cell: usize, trial: u64) -> Result<(Configuration, Configuration)> {
    let lambda = *spec
        .lambdas
        .get(cell)
        .ok_or_else(|| KpError::InvalidInput(format!("cell {cell} out of range")))?;
    sample_uniform_contraction_pair(spec.d, spec.n, lambda, None, derive_path(spec.seed, &[cell as u64, trial]))
}

/// A violating pair as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationFixture {
    pub record: VerificationRecord,
    pub p: Configuration,
    pub q: Configuration,
}

/// Writes every violated record of `summary` with its pair as JSON into
/// `dir`, returning the paths.
pub fn dump_violations(spec: &CampaignSpec, summary: &CampaignSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for rec in summary.records.iter().filter(|r| r.verdict == Verdict::Violated) {
        let cell = spec
            .lambdas
            .iter()
            .position(|l| *l == rec.lambda)
            .ok_or_else(|| KpError::InvalidInput("record lambda not in spec".into()))?;
        let (p, q) = campaign_pair(spec, cell, rec.trial)?;
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("violation-{}-c{cell}-t{}.json", spec.theorem, rec.trial));
        let fixture = ViolationFixture { record: rec.clone(), p, q };
        std::fs::write(&path, serde_json::to_string_pretty(&fixture)?)?;
        paths.push(path);
    }
    Ok(paths)
}
