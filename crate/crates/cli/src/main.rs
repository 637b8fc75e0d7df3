//! `kpcheck`: bounds tables, verification campaigns, counterexample search,
//! simplex densities and the figure fixtures from the command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use kp_core::bounds::{bounds_table, sigma_closed_form, BoundReport, SigmaInput};
use kp_core::experiments::records::fmt_f64;
use kp_core::experiments::{
    anneal_search, campaign, dump_violations, figure_fixtures, strong_contraction_campaign, write_results_csv,
    BodyFamily, CampaignSpec, CampaignSummary, Method, Schedule, SearchParams, StrongMode, StrongSpec, TheoremId,
};
use kp_core::measures::sigma_simplex_density;

#[derive(Parser, Debug, Serialize)]
#[command(name = "kpcheck", version, about = "Uniform and strong contraction checks for unions and intersections of balls")]
struct Cli {
    /// Caps the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Tabulates the bounds and thresholds.
    Bounds(BoundsArgs),
    /// Runs a verification campaign.
    Verify(VerifyArgs),
    /// Simulated annealing for a counterexample over uniform contractions.
    Search(SearchArgs),
    /// Monte Carlo estimate of the simplex density sigma_d.
    Sigma(SigmaArgs),
    /// Recomputes the figure fixtures.
    DemoFigures,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long, conflicts_with = "lambda_grid")]
    lambda: Option<f64>,
    /// Comma list or `start:stop:step`.
    #[arg(long)]
    lambda_grid: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    theorem: String,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, conflicts_with = "lambda_grid")]
    lambda: Option<f64>,
    #[arg(long)]
    lambda_grid: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// `exact`, `mc` or `slicing`; exact in the plane by default.
    #[arg(long)]
    method: Option<String>,
    /// Monte Carlo samples per side, or slice lines.
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long)]
    exploratory: bool,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 10_000)]
    iters: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    budget: u64,
    #[arg(long)]
    exploratory: bool,
}

#[derive(Args, Debug, Serialize)]
struct SigmaArgs {
    #[arg(long)]
    d: usize,
    /// Sample count; accepts forms such as `1e6`.
    #[arg(long, default_value = "1000000")]
    n: f64,
    #[arg(long)]
    seed: u64,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    parameters: &'a Cli,
    seed: Option<u64>,
    version: &'static str,
    started_unix: u64,
    finished_unix: u64,
    outputs: Vec<String>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = if parts.len() == 3 {
        let [a, b, h] = [parts[0], parts[1], parts[2]].map(|s| s.trim().parse::<f64>());
        let (a, b, h) = (a?, b?, h?);
        if !(h > 0.0) || b < a {
            bail!("grid {spec:?} needs start <= stop and a positive step");
        }
        let steps = ((b - a) / h + 1e-9).floor() as usize;
        (0..=steps).map(|i| a + i as f64 * h).collect()
    } else {
        spec.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() || grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        bail!("grid {spec:?} must hold positive finite values");
    }
    Ok(grid)
}

fn lambdas(lambda: Option<f64>, grid: Option<&str>) -> Result<Vec<f64>> {
    match (lambda, grid) {
        (Some(l), _) => parse_grid(&l.to_string()),
        (None, Some(g)) => parse_grid(g),
        (None, None) => parse_grid("0.25:2.0:0.25"),
    }
}

fn parse_method(s: Option<&str>, d: usize, k: usize) -> Result<Method> {
    match s {
        Some(m) => Ok(m.parse()?),
        None if d == 2 && k <= 2 => Ok(Method::PlanarExact),
        None => Ok(Method::Mc),
    }
}

/// Writes to `<out>/<name>` or to stdout; returns the path when written.
fn emit(out: Option<&Path>, name: &str, bytes: &[u8]) -> Result<Option<String>> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            Ok(Some(path.display().to_string()))
        }
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(None)
        }
    }
}

fn bounds_csv(rows: &[BoundReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "d", "k", "N", "lambda", "value", "applicable", "notes"])?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.d.to_string(),
            opt(r.k.map(|k| k.to_string())),
            opt(r.n.map(|n| n.to_string())),
            opt(r.lambda.map(fmt_f64)),
            fmt_f64(r.value),
            r.applicable.to_string(),
            r.notes.clone(),
        ])?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

fn cmd_bounds(a: &BoundsArgs) -> Result<(Vec<u8>, bool)> {
    let k = a.k.unwrap_or(a.d);
    let n = a.n.unwrap_or(1);
    let mut rows = Vec::new();
    for lambda in lambdas(a.lambda, a.lambda_grid.as_deref())? {
        rows.extend(bounds_table(a.d, k, n, lambda, None)?);
    }
    Ok((bounds_csv(&rows)?, true))
}

fn results_csv(summary: &CampaignSummary) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_results_csv(&mut buf, &summary.records)?;
    Ok(buf)
}

fn strong_families(d: usize) -> Vec<BodyFamily> {
    if d == 1 {
        vec![BodyFamily::Box]
    } else {
        vec![BodyFamily::Box, BodyFamily::L1Ball, BodyFamily::L2Ball]
    }
}

fn cmd_verify(a: &VerifyArgs, out: Option<&Path>) -> Result<(Vec<u8>, bool, Vec<String>)> {
    let theorem: TheoremId = a.theorem.parse()?;
    let k = a.k.unwrap_or(a.d);
    let summary;
    let mut extra = Vec::new();
    if theorem == TheoremId::T6 {
        let resolution = if a.d == 2 { 256 } else { 48 };
        summary = strong_contraction_campaign(&StrongSpec {
            d: a.d,
            n: a.n.unwrap_or(4),
            families: strong_families(a.d),
            mode: StrongMode::Both,
            trials: a.trials,
            seed: a.seed,
            resolution,
            spread: 1.0,
        })?;
    } else {
        let spec = CampaignSpec {
            theorem,
            d: a.d,
            k,
            n: a.n.context("--N is required for this theorem")?,
            lambdas: lambdas(a.lambda, a.lambda_grid.as_deref())?,
            trials: a.trials,
            seed: a.seed,
            method: parse_method(a.method.as_deref(), a.d, k)?,
            budget: a.budget,
            exploratory: a.exploratory,
        };
        summary = campaign(&spec)?;
        if let Some(dir) = out {
            extra.extend(dump_violations(&spec, &summary, &dir.join("violations"))?.iter().map(|p| p.display().to_string()));
        }
    }
    eprintln!(
        "{theorem}: holds {} violated {} inconclusive {} skipped {}{}",
        summary.holds,
        summary.violated,
        summary.inconclusive,
        summary.skipped,
        if summary.within_hypotheses { "" } else { " (exploratory)" }
    );
    Ok((results_csv(&summary)?, summary.hypothesis_violations() == 0, extra))
}

fn cmd_search(a: &SearchArgs, out: Option<&Path>) -> Result<(Vec<u8>, Vec<String>)> {
    let k = a.k.unwrap_or(a.d);
    let params = SearchParams {
        d: a.d,
        k,
        n: a.n,
        lambda: a.lambda,
        iterations: a.iters,
        schedule: Schedule::default(),
        seed: a.seed,
        method: parse_method(None, a.d, k)?,
        budget: a.budget,
    };
    let state = anneal_search(&params)?;
    eprintln!(
        "best objective {} after {} iterations ({} accepted){}",
        fmt_f64(state.best_objective),
        a.iters,
        state.accepted,
        if a.exploratory { " [exploratory]" } else { "" }
    );
    let mut extra = Vec::new();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        for (name, cfg) in [("best_p.json", &state.best_p), ("best_q.json", &state.best_q)] {
            let path = dir.join(name);
            fs::write(&path, cfg.to_json()?)?;
            extra.push(path.display().to_string());
        }
    }
    Ok((serde_json::to_vec_pretty(&state)?, extra))
}

#[derive(Serialize)]
struct SigmaReport {
    d: usize,
    samples: u64,
    seed: u64,
    estimate: String,
    stderr: String,
    closed_form: Option<String>,
}

fn cmd_sigma(a: &SigmaArgs) -> Result<Vec<u8>> {
    if !(a.n >= 1.0 && a.n.fract() == 0.0 && a.n <= u64::MAX as f64) {
        bail!("--n must be a positive integer, got {}", a.n);
    }
    let n = a.n as u64;
    let est = sigma_simplex_density(a.d, n, a.seed)?;
    let report = SigmaReport {
        d: a.d,
        samples: n,
        seed: a.seed,
        estimate: fmt_f64(est.value),
        stderr: fmt_f64(est.stderr),
        closed_form: sigma_closed_form(a.d).map(|SigmaInput { value, .. }| fmt_f64(value)),
    };
    let mut v = serde_json::to_vec_pretty(&report)?;
    v.push(b'\n');
    Ok(v)
}

fn run(cli: &Cli) -> Result<bool> {
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let started = unix_now();
    let out = cli.out.as_deref();
    let mut outputs = Vec::new();
    let (name, seed, ok) = match &cli.command {
        Command::Bounds(a) => {
            let (bytes, ok) = cmd_bounds(a)?;
            outputs.extend(emit(out, "bounds.csv", &bytes)?);
            ("bounds", None, ok)
        }
        Command::Verify(a) => {
            let (bytes, ok, extra) = cmd_verify(a, out)?;
            outputs.extend(emit(out, "results.csv", &bytes)?);
            outputs.extend(extra);
            ("verify", Some(a.seed), ok)
        }
        Command::Search(a) => {
            let (bytes, extra) = cmd_search(a, out)?;
            outputs.extend(emit(out, "search.json", &bytes)?);
            outputs.extend(extra);
            ("search", Some(a.seed), true)
        }
        Command::Sigma(a) => {
            outputs.extend(emit(out, "sigma.json", &cmd_sigma(a)?)?);
            ("sigma", Some(a.seed), true)
        }
        Command::DemoFigures => {
            let reports = figure_fixtures()?;
            let mut bytes = serde_json::to_vec_pretty(&reports)?;
            bytes.push(b'\n');
            outputs.extend(emit(out, "figures.json", &bytes)?);
            ("demo-figures", None, reports.passed())
        }
    };
    if let Some(dir) = out {
        let manifest = RunManifest {
            command: name,
            parameters: cli,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            started_unix: started,
            finished_unix: unix_now(),
            outputs,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
