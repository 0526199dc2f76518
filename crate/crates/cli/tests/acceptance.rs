//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Numeric arguments select a subset, e.g. `cargo test --test acceptance -- 4 6`.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use ehlab_cli::{run, ExperimentConfig};
use ehlab_core::c64;
use ehlab_core::classical::{estimate_chaotic_measure, MapParams};
use ehlab_core::geometry::{verify_theorem2, RegionProjector};
use ehlab_core::io::parse_fit_result;
use ehlab_core::quantum::{
    build_floquet, correlation_series, evolve, expectation_fluctuations, haar_pure_state, kick_matrix,
    localization_length, momentum_distribution, observables, DensityState, FloquetSystem, ObservableMatrix,
    QuantumParams,
};
use ehlab_core::rng::{stream, StreamRng};
use ehlab_core::transition::{cubic_shape, cubic_transition, fit_transition, FitSample, TransitionCurve};
use ehlab_oracle as oracle;
use faer::Mat;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn system(dim: usize, lambda: f64) -> FloquetSystem {
    build_floquet(&QuantumParams::new(dim, lambda, 1.0, 1.0).unwrap()).unwrap()
}

fn max_abs(m: &Mat<c64>) -> f64 {
    let mut w = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            w = w.max(m[(i, j)].norm());
        }
    }
    w
}

/// Hermitian matrix with Gaussian entries scaled so its spectrum is O(1).
fn random_observable(dim: usize, rng: &mut StreamRng) -> ObservableMatrix {
    let scale = 0.5 / (dim as f64).sqrt();
    let g = Mat::from_fn(dim, dim, |_, _| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let h = Mat::from_fn(dim, dim, |i, j| (g[(i, j)] + g[(j, i)].conj()) * scale);
    ObservableMatrix::new(h, "gue").unwrap()
}

fn c1_cubic_headline() -> Verdict {
    let curve = TransitionCurve::new(0.9716, 1.0).unwrap();
    let v = cubic_transition(0.2, &curve).unwrap();
    verdict((v - 0.05919).abs() < 1e-4, format!("mu(A_0.2) = {v:.6}"))
}

fn c2_distance_identity() -> Verdict {
    let mut worst_residual = 0.0f64;
    let mut worst_product = 0.0f64;
    for n in [4usize, 65, 257, 1025, 2049] {
        let mut rng = stream(2, n as u64);
        for _ in 0..20 {
            let rank = rng.random_range(1..=n);
            let check = verify_theorem2(&RegionProjector::new(n, sample(&mut rng, n, rank).into_vec()).unwrap());
            let mu = check.mu_rank as f64;
            worst_residual = worst_residual.max(check.residual.abs());
            worst_product = worst_product.max((check.d2 * mu - (1.0 - mu / n as f64)).abs());
        }
    }
    // rank-one projectors: d²·μ = 1 − 1/N climbs toward 1
    let trend: Vec<f64> = [4usize, 65, 257, 1025, 2049]
        .iter()
        .map(|&n| verify_theorem2(&RegionProjector::new(n, vec![0]).unwrap()).d2)
        .collect();
    let rising = trend.windows(2).all(|w| w[1] > w[0]);
    let gap = 1.0 - trend[trend.len() - 1];
    verdict(
        worst_residual <= 1e-12 && worst_product <= 1e-12 && rising && gap < 1e-3,
        format!("max |residual| {worst_residual:.1e}, max |d2 mu - (1 - mu/N)| {worst_product:.1e}, 1 - d2(N=2049, mu=1) = {gap:.2e}"),
    )
}

fn c3_floquet_cross_check() -> Verdict {
    let n = 65usize;
    let half = (n as i64 - 1) / 2;
    let mut worst = 0.0f64;
    for x in [1.0, 3.0, 5.0] {
        let k = kick_matrix(&QuantumParams::new(n, x, 1.0, 1.0).unwrap());
        for a in 0..n {
            for b in 0..n {
                let image = (a as i64 - b as i64 + half).rem_euclid(n as i64) - half;
                let got = Complex64::new(k[(a, b)].re, k[(a, b)].im);
                worst = worst.max((got - oracle::kick_element(image, x)).norm());
            }
        }
    }
    let mut worst_unitarity = 0.0f64;
    for dim in [65usize, 257, 513, 1025] {
        let f = system(dim, 5.0).unitary().to_owned();
        let defect = max_abs(&(&f * f.adjoint() - Mat::<c64>::identity(dim, dim)));
        worst_unitarity = worst_unitarity.max(defect);
    }
    verdict(
        worst < 1e-8 && worst_unitarity < 1e-10,
        format!("max kick deviation {worst:.1e}, max ||FF^+ - I|| {worst_unitarity:.1e} up to N=1025"),
    )
}

/// `Σ |ρ_kk' O_k'k| · 2/|1 − e^{−iΔ_kk'}|` over pairs in distinct clusters:
/// an a-priori bound on `(n+1)|cesaro[n]|`.
fn geometric_constant(s: &FloquetSystem, rho: &DensityState, o: &ObservableMatrix) -> f64 {
    let r = s.eigenbasis().adjoint() * rho.matrix() * s.eigenbasis();
    let ob = s.eigenbasis().adjoint() * o.matrix() * s.eigenbasis();
    let (ids, phases) = (s.cluster_ids(), s.quasi_energies());
    let mut c = 0.0;
    for k in 0..s.dim() {
        for l in 0..s.dim() {
            if ids[k] != ids[l] {
                c += (r[(k, l)] * ob[(l, k)]).norm() * oracle::geometric_sum_bound(phases[k] - phases[l]);
            }
        }
    }
    c
}

fn c4_ergodicity() -> Verdict {
    let n = 257;
    let mut pass = true;
    let mut worst_tail = 0.0f64;
    let mut worst_c = 0.0f64;
    for lambda in [0.5, 5.0, 10.0] {
        let s = system(n, lambda);
        for pair in 0..20u64 {
            let mut rng = stream(4, pair + (lambda * 100.0) as u64 * 1000);
            let rho = DensityState::pure(&haar_pure_state(n, &mut rng)).unwrap();
            let obs = random_observable(n, &mut rng);
            let series = correlation_series(&rho, &s, &obs, 10_001, "haar").unwrap();
            let c = series.decay_constant();
            let tail = series.cesaro[10_000].abs();
            // the fitted C must respect the bound from the quasi-energy gaps
            let bound = geometric_constant(&s, &rho, &obs);
            pass &= c.is_finite() && c <= bound * (1.0 + 1e-9) && tail < 1e-2;
            worst_tail = worst_tail.max(tail);
            worst_c = worst_c.max(c);
        }
    }
    verdict(
        pass,
        format!("60 pairs at N=257, max fitted C {worst_c:.3} (within gap bound), max |cesaro[1e4]| {worst_tail:.2e}"),
    )
}

fn c5_mixing_contrast() -> Verdict {
    let n = 513;
    let w = observables::default_window_halfwidth(n);
    let obs = observables::momentum_window(n, -w, w).unwrap();
    let weak = system(n, 0.2);
    let strong = system(n, 10.0);
    let mut ratios = Vec::new();
    let mut worst_variance = 0.0f64;
    for i in 0..10u64 {
        let rho = DensityState::pure(&haar_pure_state(n, &mut stream(5, i))).unwrap();
        let a = expectation_fluctuations(&rho, &weak, &obs, 1000, 10_000).unwrap();
        let b = expectation_fluctuations(&rho, &strong, &obs, 1000, 10_000).unwrap();
        ratios.push(a.std_dev / b.std_dev);
        for f in [a, b] {
            let rel = (f.variance - f.predicted_variance).abs() / f.predicted_variance;
            worst_variance = worst_variance.max(rel);
        }
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        min_ratio >= 3.0 && worst_variance <= 0.2,
        format!(
            "std(0.2)/std(10) min {min_ratio:.3} over 10 states (need >= 3), worst variance mismatch {:.1}% (need <= 20%)",
            100.0 * worst_variance
        ),
    )
}

fn c6_localization() -> Verdict {
    let n = 1025;
    let s = system(n, 10.0);
    let rho0 = DensityState::basis(n, n / 2).unwrap();
    let rho = evolve(&rho0, &s, 10_000).unwrap();
    let fit = localization_length(&momentum_distribution(&rho)).unwrap();
    verdict(
        fit.r_squared > 0.9 && fit.is_localized() && fit.l_s < n as f64 / 4.0,
        format!("R^2 {:.4}, l_s {:.2} (N/4 = {:.2})", fit.r_squared, fit.l_s, n as f64 / 4.0),
    )
}

fn c7_classical_endpoints() -> Verdict {
    let mu = |lambda: f64, side: usize, steps: usize| {
        estimate_chaotic_measure(MapParams::new(lambda, 1.0).unwrap(), side, steps, 0.05)
            .unwrap()
            .mu_a
    };
    let zero = mu(0.0, 128, 5000);
    let full = mu(10.0, 128, 5000);
    let start = Instant::now();
    let reduced = mu(10.0, 64, 2000);
    let reduced_time = start.elapsed();
    verdict(
        zero == 0.0 && full > 0.95 && reduced > 0.9 && reduced_time < Duration::from_secs(120),
        format!(
            "mu(A_0) = {zero}, mu(A_10) = {full:.4} at 128^2/5000, reduced 64^2/2000 = {reduced:.4} in {:.2}s",
            reduced_time.as_secs_f64()
        ),
    )
}

fn cubic_samples(lambda_c: f64, mu_c: f64) -> Vec<FitSample> {
    (0..=40)
        .map(|i| {
            let l = 0.05 * i as f64;
            FitSample {
                lambda: l,
                mu: mu_c * cubic_shape((l / lambda_c).min(1.2)),
                ci_halfwidth: 0.0,
            }
        })
        .collect()
}

fn c8_fit_round_trip() -> Verdict {
    let clean = cubic_samples(0.9716, 0.9);
    let fit = fit_transition(&clean).unwrap();
    let exact = (fit.lambda_c - 0.9716).abs() < 1e-3 && (fit.mu_c - 0.9).abs() < 1e-3;
    let noise = Normal::new(0.0, 0.01).unwrap();
    let hits = (0..100u64)
        .filter(|&seed| {
            let mut rng = stream(8, seed);
            let noisy: Vec<FitSample> = clean
                .iter()
                .map(|s| FitSample {
                    lambda: s.lambda,
                    mu: s.mu + noise.sample(&mut rng),
                    ci_halfwidth: 1.96 * 0.01,
                })
                .collect();
            (fit_transition(&noisy).unwrap().lambda_c - 0.9716).abs() < 0.05
        })
        .count();
    verdict(
        exact && hits >= 95,
        format!(
            "noiseless lambda_c {:.6}, mu_c {:.6}; noisy recovery {hits}/100",
            fit.lambda_c, fit.mu_c
        ),
    )
}

const SCAN_CONFIG: &str = r#"{
  "kind": "classical-scan",
  "parameters": { "lambdas": [0, 0.2, 0.5, 0.9716, 2, 5, 10], "grid_side": 64, "n_steps": 2000 },
  "seed": 9,
  "output_dir": "scan"
}"#;

const FIT_CONFIG: &str = r#"{
  "kind": "transition-fit",
  "parameters": { "input_csv": "scan/region_estimates.csv" },
  "seed": 9,
  "output_dir": "fit"
}"#;

const SERIES_CONFIG: &str = r#"{
  "kind": "correlation-series",
  "parameters": { "dim": 65, "lambda": 5, "horizon": 1000 },
  "seed": 9,
  "output_dir": "series"
}"#;

const GEOMETRY_CONFIG: &str = r#"{
  "kind": "geometry-check",
  "parameters": { "dims": [4, 65, 257, 1024] },
  "seed": 9,
  "output_dir": "geometry"
}"#;

fn run_config(dir: &Path, text: &str) {
    let config = ExperimentConfig::from_json(text, dir).unwrap();
    run(&config).unwrap();
}

fn c9_sweep_fit() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    run_config(dir.path(), SCAN_CONFIG);
    run_config(dir.path(), FIT_CONFIG);
    let fit = parse_fit_result(&fs::read_to_string(dir.path().join("fit/fit_result.json")).unwrap()).unwrap();
    verdict(
        fit.rss.is_finite() && fit.rss >= 0.0,
        format!(
            "64^2 sweep: lambda_c {:.4}, mu_c {:.4}, rss {:.3e} over {} points",
            fit.lambda_c, fit.mu_c, fit.rss, fit.n_points
        ),
    )
}

fn csv_payloads(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["scan", "fit", "series", "geometry"] {
        let mut names: Vec<_> = fs::read_dir(root.join(sub))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        names.sort();
        for p in names {
            out.push((format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), fs::read(&p).unwrap()));
        }
    }
    out
}

fn c10_determinism() -> Verdict {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            for cfg in [SCAN_CONFIG, FIT_CONFIG, SERIES_CONFIG, GEOMETRY_CONFIG] {
                run_config(dir.path(), cfg);
            }
            csv_payloads(dir.path())
        })
        .collect();
    let identical = runs[0] == runs[1] && runs[0].len() >= 4;
    verdict(identical, format!("{} CSV files compared byte for byte", runs[0].len()))
}

fn main() {
    let criteria: [(u32, &str, Check); 10] = [
        (1, "cubic headline value", c1_cubic_headline),
        (2, "distance/measure identity", c2_distance_identity),
        (3, "Floquet cross-check", c3_floquet_cross_check),
        (4, "ergodicity at every kick strength", c4_ergodicity),
        (5, "mixing-regime contrast", c5_mixing_contrast),
        (6, "dynamical localization", c6_localization),
        (7, "classical transition endpoints", c7_classical_endpoints),
        (8, "fit round trip", c8_fit_round_trip),
        (9, "cubic overlay on classical sweep", c9_sweep_fit),
        (10, "determinism", c10_determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    faer::set_global_parallelism(faer::Par::Seq);
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {name}: {status} ({}; {:.1}s)",
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: criteria {failed:?} failed");
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}
