//! Hot paths, measured end to end: the least-squares solver at the
//! model-ladder design sizes, the great-circle distance used for every
//! household-station pair, panel screening over a full survey, and the
//! synthetic generator that feeds the recovery experiment.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use co2did::config::RunConfig;
use co2did::evaluate::{did_fit, ModelId};
use co2did::geo::haversine_miles;
use co2did::panel::build_balanced_panel;
use co2did::simulate::{generate_dataset, SimConfig, SyntheticDataset};
use co2did::stats::ols_fit;

fn dataset() -> SyntheticDataset {
    generate_dataset(&SimConfig::default()).expect("default generator settings are valid")
}

/// A deterministic, well-conditioned design: intercept plus trig columns
/// of staggered frequency, with a smooth response.
fn synthetic_design(n: usize, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64;
        let mut row = Vec::with_capacity(k);
        row.push(1.0);
        for j in 1..k {
            let f = j as f64;
            row.push((t * 0.37 * f).sin() + 0.1 * (t * 0.11 / f).cos());
        }
        y.push(
            row.iter()
                .enumerate()
                .map(|(j, x)| x * (j as f64 + 0.5))
                .sum::<f64>()
                + (t * 1.7).sin(),
        );
        rows.push(row);
    }
    (rows, y)
}

fn bench_ols(c: &mut Criterion) {
    let mut group = c.benchmark_group("ols_fit");
    // 4 columns is the bare interaction model, 11 the full covariate set.
    for &k in &[4usize, 11] {
        let (x, y) = synthetic_design(320, k);
        group.bench_with_input(BenchmarkId::new("n320", k), &k, |b, _| {
            b.iter(|| ols_fit(black_box(&x), black_box(&y)).unwrap())
        });
    }
    group.finish();
}

fn bench_haversine(c: &mut Criterion) {
    c.bench_function("haversine_miles", |b| {
        b.iter(|| {
            haversine_miles(
                black_box(34.0522),
                black_box(-118.2437),
                black_box(34.0610),
                black_box(-118.2300),
            )
        })
    });
}

fn bench_panel_build(c: &mut Criterion) {
    let data = dataset();
    let cfg = RunConfig::default();
    c.bench_function("build_balanced_panel/320_households", |b| {
        b.iter(|| {
            build_balanced_panel(black_box(&data.survey), &data.factors, &data.stations, &cfg)
                .unwrap()
        })
    });
}

fn bench_did_fit(c: &mut Criterion) {
    let data = dataset();
    let cfg = RunConfig::default();
    let panel = build_balanced_panel(&data.survey, &data.factors, &data.stations, &cfg).unwrap();
    let covariates = ModelId::Model4.covariates();
    c.bench_function("did_fit/full_covariates", |b| {
        b.iter(|| did_fit(black_box(&panel), &covariates).unwrap())
    });
}

fn bench_generate(c: &mut Criterion) {
    let sim = SimConfig::default();
    c.bench_function("generate_dataset/320_households", |b| {
        b.iter(|| generate_dataset(black_box(&sim)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_ols,
    bench_haversine,
    bench_panel_build,
    bench_did_fit,
    bench_generate
);
criterion_main!(benches);
