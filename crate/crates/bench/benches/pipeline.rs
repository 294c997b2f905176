use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pqlwcr::family::ModelFamily;
use pqlwcr::penalty::{PenaltyKind, PenaltySpec};
use pqlwcr::solver::{fit_penalized, tune_lambda, SolverOptions};
use pqlwcr::wcr::{aggregate, draw_resample, run_wcr, AggregationPenalty};
use pqlwcr_bench::{gated_binary, gated_continuous};
use rand::SeedableRng;

fn bench_single_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_penalized");
    for &p in &[50usize, 200] {
        let gen = gated_continuous(200, p, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let z = draw_resample(&gen.dataset.cluster_sizes(), &mut rng).unwrap();
        let view = gen.dataset.resampled_view(&z).unwrap();
        let spec = PenaltySpec::scad(0.2, 3.7).unwrap();
        let opts = SolverOptions::default();
        group.bench_with_input(BenchmarkId::new("gaussian_scad", p), &p, |b, _| {
            b.iter(|| {
                fit_penalized(&view, ModelFamily::GaussianIdentity, &spec, &opts, None).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_tuned_path(c: &mut Criterion) {
    let mut group = c.benchmark_group("tune_lambda");
    group.sample_size(20);
    let gen = gated_continuous(200, 50, 3);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let z = draw_resample(&gen.dataset.cluster_sizes(), &mut rng).unwrap();
    let view = gen.dataset.resampled_view(&z).unwrap();
    let opts = SolverOptions::default();
    group.bench_function("gaussian_50pt_path", |b| {
        b.iter(|| {
            tune_lambda(
                &view,
                ModelFamily::GaussianIdentity,
                PenaltyKind::Scad { a: 3.7 },
                &opts,
            )
            .unwrap()
        })
    });

    let gen = gated_binary(200, 50, 5);
    let z = draw_resample(&gen.dataset.cluster_sizes(), &mut rng).unwrap();
    let view = gen.dataset.resampled_view(&z).unwrap();
    group.bench_function("binomial_50pt_path", |b| {
        b.iter(|| {
            tune_lambda(
                &view,
                ModelFamily::BinomialLogit,
                PenaltyKind::Scad { a: 3.7 },
                &opts,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_resampling_engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_wcr");
    group.sample_size(10);
    let gen = gated_continuous(200, 50, 6);
    let opts = SolverOptions::default();
    group.bench_function("k25_gaussian", |b| {
        b.iter(|| {
            run_wcr(
                &gen.dataset,
                ModelFamily::GaussianIdentity,
                PenaltyKind::Scad { a: 3.7 },
                25,
                &opts,
                9,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_aggregation(c: &mut Criterion) {
    let gen = gated_continuous(200, 50, 7);
    let opts = SolverOptions::default();
    let ensemble = run_wcr(
        &gen.dataset,
        ModelFamily::GaussianIdentity,
        PenaltyKind::Scad { a: 3.7 },
        25,
        &opts,
        10,
    )
    .unwrap();
    c.bench_function("aggregate_closed_form", |b| {
        b.iter(|| aggregate(&ensemble, &AggregationPenalty::Uniform(0.05)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_single_fit,
    bench_tuned_path,
    bench_resampling_engine,
    bench_aggregation
);
criterion_main!(benches);
