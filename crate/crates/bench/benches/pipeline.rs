use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use tsbench_bench::coupled_series;
use tsbench_core::forecast::{
    fit_linear_forecaster_subset, moving_average_decompose, ChannelMode, ForecasterSpec,
};
use tsbench_core::granger::{build_lag_design, granger_pair, ols_fit_ssr, GrangerConfig};
use tsbench_core::ode::{integrate, IntegratorConfig, OdeSystem, SystemKind};
use tsbench_core::window::make_windows;

fn bench_integrate(c: &mut Criterion) {
    let system = OdeSystem::standard(SystemKind::Lorenz);
    let cfg = IntegratorConfig {
        steps: 10_000,
        transient_steps: 100,
        ..Default::default()
    };
    c.bench_function("rk4_lorenz_10k_steps", |b| {
        b.iter(|| integrate(black_box(&system), black_box(&cfg)).unwrap())
    });
}

fn bench_granger(c: &mut Criterion) {
    let series = coupled_series(1, 2, 1000);
    let y = series.channel(0).to_vec();
    let x = series.channel(1).to_vec();
    let cfg = GrangerConfig::new(30);
    c.bench_function("granger_pair_lag30_n1000", |b| {
        b.iter(|| granger_pair(black_box(&y), black_box(&x), black_box(&cfg)).unwrap())
    });

    let (design, target) = build_lag_design(&y, &[&y, &x], 30).unwrap();
    c.bench_function("ols_fit_ssr_970x61", |b| {
        b.iter(|| ols_fit_ssr(black_box(&design), black_box(&target)).unwrap())
    });
}

fn bench_forecasters(c: &mut Criterion) {
    let series = coupled_series(2, 6, 6000);
    let windows = make_windows(&series, 96, 24, 1).unwrap();
    let indices = windows.subsample_indices(1024);

    let mut ci = ForecasterSpec::plain(ChannelMode::Ci, 96, 24);
    ci.ridge_lambda = 0.1;
    c.bench_function("ridge_fit_ci_96", |b| {
        b.iter(|| fit_linear_forecaster_subset(black_box(&ci), &windows, &indices).unwrap())
    });

    let mut cd = ForecasterSpec::plain(ChannelMode::Cd, 96, 24);
    cd.ridge_lambda = 0.1;
    c.bench_function("ridge_fit_cd_96x6", |b| {
        b.iter(|| fit_linear_forecaster_subset(black_box(&cd), &windows, &indices).unwrap())
    });

    let model = fit_linear_forecaster_subset(&cd, &windows, &indices).unwrap();
    let (x, _) = windows.sample(0);
    c.bench_function("predict_cd_96x6", |b| {
        b.iter(|| model.predict(black_box(&x)).unwrap())
    });

    c.bench_function("moving_average_decompose_k25", |b| {
        b.iter(|| moving_average_decompose(black_box(&x), 25).unwrap())
    });
}

criterion_group!(benches, bench_integrate, bench_granger, bench_forecasters);
criterion_main!(benches);
