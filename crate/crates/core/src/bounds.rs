//! Closed-form bounds and thresholds for uniform contractions of ball
//! configurations, with numerical replays of the proof inequalities.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::measures::{ball_intrinsic, kappa};
use crate::error::{KpError, Result};

/// Slack used for every threshold comparison.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// A named bound value together with whether its hypotheses hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub d: usize,
    pub k: Option<usize>,
    pub n: Option<u64>,
    pub lambda: Option<f64>,
    pub value: f64,
    pub applicable: bool,
    pub notes: String,
}

/// `x >= t` up to the symmetric relative slack.
pub fn at_least(x: f64, t: f64) -> bool {
    x >= t - THRESHOLD_SLACK * t.abs().max(1.0)
}

/// `N^(1/d)`, exact when `N` is a perfect `d`-th power.
pub fn nth_root(n: u64, d: usize) -> f64 {
    if d == 1 {
        return n as f64;
    }
    let guess = ((n as f64).ln() / d as f64).exp();
    let r = guess.round();
    if r >= 0.0 && r < 2f64.powi(53) {
        let ri = r as u64;
        let mut acc: Option<u64> = Some(1);
        for _ in 0..d {
            acc = acc.and_then(|a| a.checked_mul(ri));
        }
        if acc == Some(n) {
            return r;
        }
    }
    guess
}

/// `sqrt(2d / (d + 1))`, Jung's ratio between circumradius and half-diameter.
pub fn jung_ratio(d: usize) -> f64 {
    (2.0 * d as f64 / (d as f64 + 1.0)).sqrt()
}

fn lambda_in_jung_range(lambda: f64) -> bool {
    lambda > 0.0 && lambda <= SQRT_2 * (1.0 + THRESHOLD_SLACK)
}

fn check_dk(d: usize, k: usize) -> Result<()> {
    if d == 0 || k == 0 || k > d {
        return Err(KpError::InvalidInput(format!("need 1 <= k <= d, got d={d}, k={k}")));
    }
    Ok(())
}

/// Jung's lower bound on `f_k(d, N, lambda)`. Past `lambda = 2 / jung_ratio(d)`
/// the base is clamped at zero and the bound is trivial.
pub fn f_lower(d: usize, k: usize, lambda: f64) -> Result<BoundReport> {
    check_dk(d, k)?;
    let base = 1.0 - jung_ratio(d) * lambda / 2.0;
    let applicable = lambda_in_jung_range(lambda);
    Ok(BoundReport {
        name: "f_lower".into(),
        d,
        k: Some(k),
        n: None,
        lambda: Some(lambda),
        value: base.max(0.0).powi(k as i32) * ball_intrinsic(d, k)?,
        applicable,
        notes: if applicable { String::new() } else { "lambda outside (0, sqrt 2]".into() },
    })
}

/// Upper bound on `g_k(d, N, lambda)`. The base is clamped at zero before
/// the power is taken, so even `k` cannot turn a negative base positive.
pub fn g_upper(d: usize, k: usize, n: u64, lambda: f64) -> Result<BoundReport> {
    check_dk(d, k)?;
    if n == 0 {
        return Err(KpError::InvalidInput("N must be positive".into()));
    }
    let base = 1.0 - (nth_root(n, d) - 1.0) * lambda / 2.0;
    let applicable = lambda_in_jung_range(lambda);
    Ok(BoundReport {
        name: "g_upper".into(),
        d,
        k: Some(k),
        n: Some(n),
        lambda: Some(lambda),
        value: base.max(0.0).powi(k as i32) * ball_intrinsic(d, k)?,
        applicable,
        notes: if applicable { String::new() } else { "lambda outside (0, sqrt 2]".into() },
    })
}

/// True when `N (lambda/2)^d >= (1 + lambda/2)^d`, i.e. `N >= (1 + 2/lambda)^d`:
/// a `lambda`-separated set of `N` points then has circumradius at least one.
pub fn packing_forces_empty(d: usize, n: u64, lambda: f64) -> bool {
    lambda > 0.0 && at_least(n as f64, (1.0 + 2.0 / lambda).powi(d as i32))
}

/// Sufficient numbers of balls for the intersection inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionThresholds {
    /// `(1 + sqrt 2)^d`, independent of `lambda`.
    pub main: f64,
    /// `(1 + 2/lambda)^d`.
    pub part_a: f64,
    /// `(1 + sqrt(2d/(d+1)))^d`, usable only when `lambda <= sqrt 2`.
    pub part_b: f64,
    pub part_b_applicable: bool,
}

impl IntersectionThresholds {
    /// Smallest applicable threshold.
    pub fn best(&self) -> f64 {
        if self.part_b_applicable {
            self.part_a.min(self.part_b)
        } else {
            self.part_a
        }
    }
}

pub fn intersection_thresholds(d: usize, lambda: f64) -> Result<IntersectionThresholds> {
    if d == 0 || !(lambda > 0.0) {
        return Err(KpError::InvalidInput(format!("need d >= 1 and lambda > 0, got d={d}, lambda={lambda}")));
    }
    let di = d as i32;
    Ok(IntersectionThresholds {
        main: (1.0 + SQRT_2).powi(di),
        part_a: (1.0 + 2.0 / lambda).powi(di),
        part_b: (1.0 + jung_ratio(d)).powi(di),
        part_b_applicable: lambda_in_jung_range(lambda),
    })
}

/// The simplex covering density, exact or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaInput {
    pub value: f64,
    pub stderr: f64,
}

/// `sigma_1 = 1`, `sigma_2 = pi / (2 sqrt 3)`; higher dimensions need an estimate.
pub fn sigma_closed_form(d: usize) -> Option<SigmaInput> {
    match d {
        1 => Some(SigmaInput { value: 1.0, stderr: 0.0 }),
        2 => Some(SigmaInput { value: PI / (2.0 * 3f64.sqrt()), stderr: 0.0 }),
        _ => None,
    }
}

/// Sufficient numbers of balls for the union inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionThresholds {
    /// `(1 + 2 d^3)^d`.
    pub main: f64,
    /// `(1 + lambda/2)^d (d + 2) / 2`, for `lambda in [sqrt 2, 2)`.
    pub part_a: f64,
    pub part_a_applicable: bool,
    /// `(1 + 2/lambda)^d sigma_d` with the interval from `sigma`'s stderr,
    /// for `lambda in (0, sqrt 2)`.
    pub part_b: f64,
    pub part_b_interval: (f64, f64),
    pub part_b_applicable: bool,
    /// Part (c) needs `lambda < 1/d^3` and `N >= (2 d^2 + 1)^d`.
    pub part_c_lambda_cap: f64,
    pub part_c_n: f64,
    pub part_c_applicable: bool,
    /// `lambda >= 2`: the inequality holds for every `N`.
    pub trivial: bool,
}

pub fn union_thresholds(d: usize, lambda: f64, sigma: SigmaInput) -> Result<UnionThresholds> {
    if d == 0 || !(lambda > 0.0) {
        return Err(KpError::InvalidInput(format!("need d >= 1 and lambda > 0, got d={d}, lambda={lambda}")));
    }
    let df = d as f64;
    let di = d as i32;
    let trivial = lambda >= 2.0;
    let packing = (1.0 + 2.0 / lambda).powi(di);
    let cap = 1.0 / (df * df * df);
    Ok(UnionThresholds {
        main: (1.0 + 2.0 * df.powi(3)).powi(di),
        part_a: (1.0 + lambda / 2.0).powi(di) * (df + 2.0) / 2.0,
        part_a_applicable: !trivial && lambda >= SQRT_2,
        part_b: packing * sigma.value,
        part_b_interval: (packing * (sigma.value - sigma.stderr), packing * (sigma.value + sigma.stderr)),
        part_b_applicable: !trivial && lambda < SQRT_2,
        part_c_lambda_cap: cap,
        part_c_n: (2.0 * df * df + 1.0).powi(di),
        part_c_applicable: !trivial && lambda < cap,
        trivial,
    })
}

/// Isodiametric bound `(1 + lambda/2)^d kappa_d` on the volume of a union
/// of unit balls whose centres are `lambda`-close.
pub fn isodiametric_union_upper(d: usize, lambda: f64) -> f64 {
    (1.0 + lambda / 2.0).powi(d as i32) * kappa(d)
}

/// Comparison of the two sides of the intersection argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReplay {
    pub d: usize,
    pub k: usize,
    pub n: u64,
    pub lambda: f64,
    pub f_lower: f64,
    pub g_upper: f64,
    /// `f_lower - g_upper`.
    pub margin: f64,
    /// The comparison is claimed only when `N^(1/d) - 1 >= sqrt(2d/(d+1))`
    /// and `lambda <= sqrt 2`.
    pub asserted: bool,
}

impl IntersectionReplay {
    pub fn holds(&self, tol: f64) -> bool {
        !self.asserted || self.margin >= -tol
    }
}

pub fn replay_intersection_proof(d: usize, k: usize, n: u64, lambda: f64) -> Result<IntersectionReplay> {
    let f = f_lower(d, k, lambda)?;
    let g = g_upper(d, k, n, lambda)?;
    let asserted = f.applicable && at_least(nth_root(n, d) - 1.0, jung_ratio(d));
    Ok(IntersectionReplay {
        d,
        k,
        n,
        lambda,
        f_lower: f.value,
        g_upper: g.value,
        margin: f.value - g.value,
        asserted,
    })
}

/// Grid replay of the two cases of the small-`lambda` union argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionCaseCReplay {
    pub d: usize,
    pub grid: usize,
    /// Minimum of `1 + 2 d lambda exp(-d^5 lambda^2) - (1 + lambda/2)^d`
    /// over `lambda in (0, 1/d^3]`, and where it occurs.
    pub case1_min_margin: f64,
    pub case1_argmin: f64,
    /// `2 (1 - (1 - 1/d)^((d-1)/2) / sqrt(pi))`, in units of `kappa_d`.
    pub case2_coefficient: f64,
    /// `case2_coefficient - 1.1`.
    pub case2_margin: f64,
    /// Minimum over `h in [1/sqrt d, 1)` of the cap-bound expression
    /// `2 (1 - (1 - h^2)^((d-1)/2) / (sqrt(2 pi (d-1)) h))` minus the
    /// coefficient above: the monotonicity step of Case 2.
    pub case2_h_min_margin: f64,
    /// Report only: minimum over the grid of
    /// `(1 - d^4 lambda^2)^((d-1)/2) kappa_{d-1} / kappa_d - exp(-d^5 lambda^2)`,
    /// the intermediate step that turns the cone volume into the exponential.
    pub case1_chain_min_margin: f64,
}

impl UnionCaseCReplay {
    /// The two inequalities the argument rests on.
    pub fn holds(&self) -> bool {
        self.case1_min_margin >= 0.0 && self.case2_margin >= 0.0 && self.case2_h_min_margin >= -1e-12
    }
}

pub fn replay_union_case_c(d: usize, grid: usize) -> Result<UnionCaseCReplay> {
    if d < 2 || grid == 0 {
        return Err(KpError::InvalidInput(format!("need d >= 2 and a nonempty grid, got d={d}, grid={grid}")));
    }
    let df = d as f64;
    let cap = df.powi(-3);
    let ratio = kappa(d - 1) / kappa(d);
    let mut case1_min = f64::INFINITY;
    let mut argmin = 0.0;
    let mut chain_min = f64::INFINITY;
    for i in 1..=grid {
        let lambda = cap * i as f64 / grid as f64;
        let lhs = 1.0 + 2.0 * df * lambda * (-df.powi(5) * lambda * lambda).exp();
        let rhs = (1.0 + lambda / 2.0).powi(d as i32);
        if lhs - rhs < case1_min {
            case1_min = lhs - rhs;
            argmin = lambda;
        }
        let h = df * df * lambda;
        let chain = (1.0 - h * h).max(0.0).powf((df - 1.0) / 2.0) * ratio - (-df.powi(5) * lambda * lambda).exp();
        chain_min = chain_min.min(chain);
    }
    let coefficient = 2.0 * (1.0 - (1.0 - 1.0 / df).powf((df - 1.0) / 2.0) / PI.sqrt());
    let h0 = 1.0 / df.sqrt();
    let mut h_min = f64::INFINITY;
    for i in 0..grid {
        let h = h0 + (1.0 - h0) * i as f64 / grid as f64;
        let expr = 2.0 * (1.0 - (1.0 - h * h).powf((df - 1.0) / 2.0) / ((2.0 * PI * (df - 1.0)).sqrt() * h));
        h_min = h_min.min(expr - coefficient);
    }
    Ok(UnionCaseCReplay {
        d,
        grid,
        case1_min_margin: case1_min,
        case1_argmin: argmin,
        case2_coefficient: coefficient,
        case2_margin: coefficient - 1.1,
        case2_h_min_margin: h_min,
        case1_chain_min_margin: chain_min,
    })
}

/// Every bound for one parameter tuple, as emitted by the command line.
pub fn bounds_table(d: usize, k: usize, n: u64, lambda: f64, sigma: Option<SigmaInput>) -> Result<Vec<BoundReport>> {
    let row = |name: &str, k: Option<usize>, n: Option<u64>, value: f64, applicable: bool, notes: &str| BoundReport {
        name: name.into(),
        d,
        k,
        n,
        lambda: Some(lambda),
        value,
        applicable,
        notes: notes.into(),
    };
    let it = intersection_thresholds(d, lambda)?;
    let mut out = vec![
        BoundReport { lambda: None, ..row("kappa", None, None, kappa(d), true, "") },
        BoundReport { lambda: None, ..row("ball_intrinsic", Some(k), None, ball_intrinsic(d, k)?, true, "") },
        f_lower(d, k, lambda)?,
        g_upper(d, k, n, lambda)?,
        row(
            "packing_forces_empty",
            None,
            Some(n),
            f64::from(u8::from(packing_forces_empty(d, n, lambda))),
            true,
            "1 when g_k = 0",
        ),
        row("intersection_threshold_main", None, None, it.main, at_least(n as f64, it.main), "applicable: N meets it"),
        row("intersection_threshold_a", None, None, it.part_a, at_least(n as f64, it.part_a), "applicable: N meets it"),
        row(
            "intersection_threshold_b",
            None,
            None,
            it.part_b,
            it.part_b_applicable && at_least(n as f64, it.part_b),
            "applicable: lambda <= sqrt 2 and N meets it",
        ),
        row("isodiametric_union_upper", None, None, isodiametric_union_upper(d, lambda), lambda < 2.0, ""),
    ];
    let sigma = sigma.or_else(|| sigma_closed_form(d));
    if let Some(s) = sigma {
        let ut = union_thresholds(d, lambda, s)?;
        out.push(row("union_threshold_main", None, None, ut.main, ut.trivial || at_least(n as f64, ut.main), ""));
        out.push(row(
            "union_threshold_a",
            None,
            None,
            ut.part_a,
            ut.part_a_applicable && at_least(n as f64, ut.part_a),
            "lambda in [sqrt 2, 2)",
        ));
        out.push(row(
            "union_threshold_b",
            None,
            None,
            ut.part_b,
            ut.part_b_applicable && at_least(n as f64, ut.part_b_interval.1),
            &format!("lambda < sqrt 2; sigma {:.6e} +- {:.1e}", s.value, s.stderr),
        ));
        out.push(row(
            "union_threshold_c",
            None,
            None,
            ut.part_c_n,
            ut.part_c_applicable && at_least(n as f64, ut.part_c_n),
            "lambda < 1/d^3",
        ));
    }
    let rep = replay_intersection_proof(d, k, n, lambda)?;
    out.push(row("replay_intersection_margin", Some(k), Some(n), rep.margin, rep.asserted, "f_lower - g_upper"));
    Ok(out)
}
