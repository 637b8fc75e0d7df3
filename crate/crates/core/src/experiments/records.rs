//! Verification records, verdict rules and the versioned results CSV.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KpError, Result};

/// First line of every results file.
pub const RESULTS_SCHEMA: &str = "# schema: kp-results v1";

/// Column order of the results CSV.
pub const RESULTS_COLUMNS: [&str; 14] = [
    "theorem", "d", "k", "N", "lambda", "trial", "lhs", "lhs_err", "rhs", "rhs_err", "margin", "method", "verdict",
    "seed",
];

/// Suffix appended to the theorem column for runs outside the hypotheses.
pub const EXPLORATORY_SUFFIX: &str = "-exploratory";

/// Monte Carlo verdicts need the margin to clear this many combined
/// standard errors.
pub const MC_Z: f64 = 5.0;

/// Exact margins below `-EXACT_TOL` are violations.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PlanarExact,
    Mc,
    Slicing,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PlanarExact => "planar_exact",
            Self::Mc => "mc",
            Self::Slicing => "slicing",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = KpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planar_exact" | "exact" => Ok(Self::PlanarExact),
            "mc" => Ok(Self::Mc),
            "slicing" => Ok(Self::Slicing),
            _ => Err(KpError::InvalidInput(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Holds => "holds",
            Self::Violated => "violated",
            Self::Inconclusive => "inconclusive",
        }
    }
}

impl FromStr for Verdict {
    type Err = KpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holds" => Ok(Self::Holds),
            "violated" => Ok(Self::Violated),
            "inconclusive" => Ok(Self::Inconclusive),
            _ => Err(KpError::InvalidInput(format!("unknown verdict {s:?}"))),
        }
    }
}

/// Verdict from a margin (positive means the inequality holds) and the
/// uncertainties of both sides.
///
/// Exact methods compare the margin with [`EXACT_TOL`]. Monte Carlo
/// compares it with `MC_Z` combined standard errors and calls everything in
/// between inconclusive. Slicing treats the errors as deterministic bounds.
pub fn verdict_for(method: Method, margin: f64, lhs_err: f64, rhs_err: f64) -> Verdict {
    let band = match method {
        Method::PlanarExact => return if margin < -EXACT_TOL { Verdict::Violated } else { Verdict::Holds },
        Method::Mc => MC_Z * lhs_err.hypot(rhs_err),
        Method::Slicing => lhs_err + rhs_err + 1e-12,
    };
    if band == 0.0 {
        return if margin < -EXACT_TOL { Verdict::Violated } else { Verdict::Holds };
    }
    if margin < -band {
        Verdict::Violated
    } else if margin > band || (method == Method::Slicing && margin >= -band) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    }
}

/// One compared pair of configurations.
///
/// `margin` is signed so that positive values mean the inequality under
/// test holds: `rhs - lhs` for intersection inequalities (`lhs <= rhs`) and
/// `lhs - rhs` for union inequalities (`lhs >= rhs`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub theorem: String,
    pub exploratory: bool,
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub lambda: f64,
    pub trial: u64,
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs: f64,
    pub rhs_err: f64,
    pub margin: f64,
    pub method: Method,
    pub verdict: Verdict,
    pub seed: u64,
}

/// Theorem labels whose records compare union volumes.
pub const UNION_LABELS: [&str; 3] = ["T5", "T8", "union-pair"];

impl VerificationRecord {
    /// Union comparison at `lambda >= 2`, where the balls around `p` are
    /// pairwise disjoint and the inequality holds trivially.
    pub fn trivial_regime(&self) -> bool {
        UNION_LABELS.contains(&self.theorem.as_str()) && self.lambda >= 2.0
    }

    fn theorem_column(&self) -> String {
        if self.exploratory {
            format!("{}{EXPLORATORY_SUFFIX}", self.theorem)
        } else {
            self.theorem.clone()
        }
    }
}

/// Fixed scientific format with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the schema line, the header and one row per record.
pub fn write_results_csv<W: Write>(mut out: W, records: &[VerificationRecord]) -> Result<()> {
    writeln!(out, "{RESULTS_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_COLUMNS)?;
    for r in records {
        w.write_record([
            r.theorem_column(),
            r.d.to_string(),
            r.k.to_string(),
            r.n.to_string(),
            fmt_f64(r.lambda),
            r.trial.to_string(),
            fmt_f64(r.lhs),
            fmt_f64(r.lhs_err),
            fmt_f64(r.rhs),
            fmt_f64(r.rhs_err),
            fmt_f64(r.margin),
            r.method.as_str().to_string(),
            r.verdict.as_str().to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: FromStr>(row: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = row.get(i).ok_or_else(|| KpError::InvalidInput(format!("missing column {}", RESULTS_COLUMNS[i])))?;
    raw.parse()
        .map_err(|_| KpError::InvalidInput(format!("bad value {raw:?} in column {}", RESULTS_COLUMNS[i])))
}

/// Reads a results file, rejecting any schema line other than the current one.
pub fn read_results_csv<R: BufRead>(mut input: R) -> Result<Vec<VerificationRecord>> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let first = first.trim_end();
    if first != RESULTS_SCHEMA {
        return Err(KpError::SchemaVersion(first.to_string()));
    }
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(RESULTS_COLUMNS.iter().copied()) {
        return Err(KpError::SchemaVersion(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let theorem_col: String = field(&row, 0)?;
        let (theorem, exploratory) = match theorem_col.strip_suffix(EXPLORATORY_SUFFIX) {
            Some(t) => (t.to_string(), true),
            None => (theorem_col, false),
        };
        out.push(VerificationRecord {
            theorem,
            exploratory,
            d: field(&row, 1)?,
            k: field(&row, 2)?,
            n: field(&row, 3)?,
            lambda: field(&row, 4)?,
            trial: field(&row, 5)?,
            lhs: field(&row, 6)?,
            lhs_err: field(&row, 7)?,
            rhs: field(&row, 8)?,
            rhs_err: field(&row, 9)?,
            margin: field(&row, 10)?,
            method: field(&row, 11)?,
            verdict: field(&row, 12)?,
            seed: field(&row, 13)?,
        });
    }
    Ok(out)
}
