use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ehlab_core::classical::{estimate_chaotic_measure, lyapunov_exponent, MapParams, PhasePoint};
use ehlab_core::geometry::{verify_theorem2, RegionProjector};
use ehlab_core::quantum::{
    build_floquet, correlation_series, evolve, haar_pure_state, observables, DensityState, QuantumParams,
};
use ehlab_core::transition::{cubic_shape, fit_transition, FitSample};

fn classical(c: &mut Criterion) {
    let params = MapParams::new(5.0, 1.0).unwrap();
    c.bench_function("lyapunov_10k_steps", |b| {
        b.iter(|| lyapunov_exponent(black_box(PhasePoint::new(1.0, 2.0)), params, 10_000).unwrap())
    });
    c.bench_function("chaotic_measure_32x32_1000", |b| {
        b.iter(|| estimate_chaotic_measure(black_box(params), 32, 1000, 0.05).unwrap())
    });
}

fn quantum(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_floquet");
    group.sample_size(10);
    for dim in [65usize, 257] {
        let p = QuantumParams::new(dim, 5.0, 1.0, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &p, |b, p| b.iter(|| build_floquet(p).unwrap()));
    }
    group.finish();

    let dim = 129;
    let system = build_floquet(&QuantumParams::new(dim, 5.0, 1.0, 1.0).unwrap()).unwrap();
    let psi = haar_pure_state(dim, &mut ehlab_core::rng::stream(1, 0));
    let rho = DensityState::pure(&psi).unwrap();
    let obs = observables::cos_theta(dim);
    c.bench_function("evolve_129_1e4_kicks", |b| b.iter(|| evolve(&rho, &system, black_box(10_000)).unwrap()));
    let mut group = c.benchmark_group("correlation_series");
    group.sample_size(10);
    group.bench_function("129_horizon_1000", |b| {
        b.iter(|| correlation_series(&rho, &system, &obs, 1000, "haar").unwrap())
    });
    group.finish();
}

fn transition_and_geometry(c: &mut Criterion) {
    let samples: Vec<FitSample> = (0..=40)
        .map(|i| {
            let l = 0.05 * i as f64;
            FitSample {
                lambda: l,
                mu: 0.9 * cubic_shape((l / 0.9716).min(1.2)),
                ci_halfwidth: 0.01,
            }
        })
        .collect();
    c.bench_function("fit_transition_41_points", |b| b.iter(|| fit_transition(black_box(&samples)).unwrap()));
    let projector = RegionProjector::new(2049, (0..1000).collect()).unwrap();
    c.bench_function("theorem2_2049", |b| b.iter(|| verify_theorem2(black_box(&projector))));
}

criterion_group!(benches, classical, quantum, transition_and_geometry);
criterion_main!(benches);
