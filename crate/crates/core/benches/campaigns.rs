//! Campaign throughput on a single-thread rayon pool versus the full pool.
//! Build with `--no-default-features` to time the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kp_core::experiments::{campaign, strong_contraction_campaign, BodyFamily, CampaignSpec, StrongMode, StrongSpec, TheoremId};
use kp_core::measures::sigma_simplex_density;

#[cfg(feature = "parallel")]
type Pool = Option<rayon::ThreadPool>;
#[cfg(not(feature = "parallel"))]
type Pool = ();

#[cfg(feature = "parallel")]
fn pools() -> Vec<(String, Pool)> {
    let full = rayon::current_num_threads();
    let mut out = vec![("1-thread".to_string(), Some(rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()))];
    if full > 1 {
        out.push((format!("{full}-threads"), None));
    }
    out
}

#[cfg(not(feature = "parallel"))]
fn pools() -> Vec<(String, Pool)> {
    vec![("sequential".to_string(), ())]
}

#[cfg(feature = "parallel")]
fn run_in<R: Send>(pool: &Pool, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_in<R>(_: &Pool, f: impl FnOnce() -> R) -> R {
    f()
}

fn benches(c: &mut Criterion) {
    let planar = CampaignSpec::planar(TheoremId::T4, 2, 6, vec![0.5, 1.0, 1.5, 2.0], 100, 1);
    let strong = StrongSpec {
        d: 2,
        n: 4,
        families: vec![BodyFamily::Box, BodyFamily::L1Ball, BodyFamily::L2Ball],
        mode: StrongMode::Both,
        trials: 20,
        seed: 1,
        resolution: 128,
        spread: 1.0,
    };
    let mut g = c.benchmark_group("campaigns");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("planar_t4", &name), &pool, |b, pool| {
            b.iter(|| run_in(pool, || campaign(&planar).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("strong_slicing_2d", &name), &pool, |b, pool| {
            b.iter(|| run_in(pool, || strong_contraction_campaign(&strong).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("sigma_mc_3d", &name), &pool, |b, pool| {
            b.iter(|| run_in(pool, || sigma_simplex_density(3, 200_000, 1).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(campaign_benches, benches);
criterion_main!(campaign_benches);
