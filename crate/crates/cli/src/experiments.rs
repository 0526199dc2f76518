//! The six experiments. Each one computes all of its artifacts in memory;
//! nothing touches the disk until the whole computation has succeeded.

use ehlab_core::classical::{estimate_chaotic_measure, MapParams, RegionEstimate};
use ehlab_core::geometry::{verify_theorem2, RegionProjector};
use ehlab_core::io;
use ehlab_core::quantum::{
    self, build_floquet, correlation_series, evolve, haar_pure_state, localization_length,
    momentum_distribution, observables, DensityState, FloquetSystem, ObservableMatrix, QuantumParams,
    VolumeOptions,
};
use ehlab_core::transition::{check_critical_conditions, fit_transition_with, saturated_cubic, FitOptions};
use rand::seq::index::sample;
use rand::Rng;
use serde_json::{json, Value};

use crate::config::{self, Experiment, InitialState, ObservableSpec};
use crate::CliError;

/// File produced by an experiment, held in memory until the run succeeds.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub file_name: String,
    /// What the file holds; the plot step dispatches on it.
    pub role: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Headline numbers, copied into the manifest.
    pub summary: Value,
}

fn artifact(file_name: &str, role: &str, bytes: Vec<u8>) -> Artifact {
    Artifact {
        file_name: file_name.into(),
        role: role.into(),
        bytes,
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> ehlab_core::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn json_bytes(value: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s.into_bytes()
}

pub fn execute(experiment: &Experiment, seed: u64) -> Result<Outcome, CliError> {
    match experiment {
        Experiment::ClassicalScan(p) => classical_scan(p),
        Experiment::TransitionFit(p) => transition_fit(p),
        Experiment::QuantumEvolve(p) => quantum_evolve(p, seed),
        Experiment::CorrelationSeries(p) => correlation(p, seed),
        Experiment::VolumeFraction(p) => volume_fraction(p, seed),
        Experiment::GeometryCheck(p) => geometry_check(p, seed),
    }
}

fn classical_scan(p: &config::ClassicalScan) -> Result<Outcome, CliError> {
    let estimates: Vec<RegionEstimate> = p
        .lambdas
        .iter()
        .map(|&l| estimate_chaotic_measure(MapParams::new(l, p.tau)?, p.grid_side, p.n_steps, p.threshold))
        .collect::<ehlab_core::Result<_>>()?;
    let bytes = csv_bytes(|b| io::write_region_estimates(b, &estimates))?;
    Ok(Outcome {
        artifacts: vec![artifact("region_estimates.csv", "region-estimates", bytes)],
        summary: json!({
            "grid_side": p.grid_side,
            "n_steps": p.n_steps,
            "mu_A": estimates.iter().map(|e| json!({"lambda": e.lambda, "mu_A": e.mu_a})).collect::<Vec<_>>(),
        }),
    })
}

fn transition_fit(p: &config::TransitionFit) -> Result<Outcome, CliError> {
    let opts = FitOptions {
        epsilon_fraction: p.epsilon_fraction,
        ..FitOptions::default()
    };
    let fit = fit_transition_with(&p.samples, opts)?;
    let curve = fit.curve();
    let mut overlay = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Config(format!("writing overlay: {e}"));
    overlay
        .write_record(["lambda", "mu_A", "ci_halfwidth", "mu_fit"])
        .map_err(csv_err)?;
    for s in &p.samples {
        overlay
            .write_record([
                io::fmt_f64(s.lambda),
                io::fmt_f64(s.mu),
                io::fmt_f64(s.ci_halfwidth),
                io::fmt_f64(saturated_cubic(s.lambda, &curve, p.epsilon_fraction)),
            ])
            .map_err(csv_err)?;
    }
    let overlay = overlay.into_inner().map_err(|e| CliError::Config(format!("writing overlay: {e}")))?;

    let points: Vec<(f64, f64)> = p.samples.iter().map(|s| (s.lambda, s.mu)).collect();
    let critical = check_critical_conditions(&points, fit.lambda_c)?;
    let fit_json = io::fit_result_json(&fit)?;
    Ok(Outcome {
        artifacts: vec![
            artifact("fit_result.json", "fit-result", format!("{fit_json}\n").into_bytes()),
            artifact("fit_overlay.csv", "fit-overlay", overlay),
            artifact(
                "critical_conditions.json",
                "critical-conditions",
                json_bytes(&serde_json::to_value(critical).expect("plain struct")),
            ),
        ],
        summary: json!({
            "fit": fit,
            "epsilon_fraction": p.epsilon_fraction,
            "critical_conditions_pass": critical.all_pass(),
        }),
    })
}

fn initial_state(initial: InitialState, params: &QuantumParams, seed: u64) -> Result<(DensityState, String), CliError> {
    Ok(match initial {
        InitialState::Momentum { k } => {
            let idx = params.index_of(k).expect("validated against the ladder");
            (DensityState::basis(params.dim, idx)?, format!("momentum(k={k})"))
        }
        InitialState::Haar => {
            let psi = haar_pure_state(params.dim, &mut ehlab_core::rng::stream(seed, 0));
            (DensityState::pure(&psi)?, format!("haar(seed={seed})"))
        }
    })
}

fn system(params: &QuantumParams) -> Result<FloquetSystem, CliError> {
    Ok(build_floquet(params)?)
}

fn quantum_evolve(p: &config::QuantumEvolve, seed: u64) -> Result<Outcome, CliError> {
    let params = p.params()?;
    let sys = system(&params)?;
    let (rho0, label) = initial_state(p.initial, &params, seed)?;
    let rho = evolve(&rho0, &sys, p.kicks)?;
    let dist = momentum_distribution(&rho);
    let fit = localization_length(&dist)?;
    let fit_value = json!({
        "l_s": if fit.is_localized() { json!(fit.l_s) } else { Value::Null },
        "localized": fit.is_localized(),
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
    });
    Ok(Outcome {
        artifacts: vec![
            artifact(
                "momentum_distribution.csv",
                "momentum-distribution",
                csv_bytes(|b| io::write_momentum_distribution(b, &dist))?,
            ),
            artifact("spectrum.csv", "spectrum", csv_bytes(|b| io::write_spectrum(b, sys.quasi_energies()))?),
            artifact("localization.json", "localization-fit", json_bytes(&fit_value)),
        ],
        summary: json!({
            "initial_state": label,
            "kicks": p.kicks,
            "localization": fit_value,
            "degenerate_pairs": sys.degeneracy_flags().len(),
        }),
    })
}

fn correlation(p: &config::CorrelationSeries, seed: u64) -> Result<Outcome, CliError> {
    let params = p.params()?;
    let obs: ObservableMatrix = match (p.observable, p.window()) {
        (ObservableSpec::Window { .. }, Some((lo, hi))) => observables::momentum_window(p.dim, lo, hi)?,
        (ObservableSpec::CosTheta, _) => observables::cos_theta(p.dim),
        (ObservableSpec::LSquared, _) => observables::l_squared(p.dim, p.hbar),
        (ObservableSpec::Window { .. }, None) => unreachable!("window bounds always resolve"),
    };
    let sys = system(&params)?;
    let (rho0, label) = initial_state(p.initial, &params, seed)?;
    let series = correlation_series(&rho0, &sys, &obs, p.horizon, label)?;
    let last = *series.cesaro.last().expect("horizon >= 2");
    Ok(Outcome {
        artifacts: vec![artifact(
            "correlation_series.csv",
            "correlation-series",
            csv_bytes(|b| io::write_correlation_series(b, &series))?,
        )],
        summary: json!({
            "observable": series.observable_label,
            "initial_state": series.state_label,
            "horizon": p.horizon,
            "decay_constant": series.decay_constant(),
            "final_cesaro": last,
        }),
    })
}

fn volume_fraction(p: &config::VolumeFraction, seed: u64) -> Result<Outcome, CliError> {
    let params = p.params()?;
    let sys = system(&params)?;
    let o_set = observables::default_set(p.dim);
    let opts = VolumeOptions {
        tail_fraction: p.tail_fraction,
        ..VolumeOptions::new(p.n_states, p.horizon, seed)
    };
    let deviations = quantum::mixing_deviations(&sys, &o_set, &opts)?;
    let fraction = quantum::fraction_below(&deviations, p.tol);

    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Config(format!("writing deviations: {e}"));
    w.write_record(["state", "deviation"]).map_err(csv_err)?;
    for (i, d) in deviations.iter().enumerate() {
        w.write_record([i.to_string(), io::fmt_f64(*d)]).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(format!("writing deviations: {e}")))?;
    let result = json!({
        "fraction": fraction,
        "tol": p.tol,
        "n_states": p.n_states,
        "horizon": p.horizon,
        "tail_start": opts.tail_start(),
        "observables": o_set.iter().map(|o| o.label.clone()).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        artifacts: vec![
            artifact("volume_deviations.csv", "volume-deviations", bytes),
            artifact("volume_fraction.json", "volume-fraction", json_bytes(&result)),
        ],
        summary: result,
    })
}

fn geometry_check(p: &config::GeometryCheck, seed: u64) -> Result<Outcome, CliError> {
    let mut checks = Vec::with_capacity(p.dims.len() * p.ranks_per_dim);
    for &dim in &p.dims {
        let mut rng = ehlab_core::rng::stream(seed, dim as u64);
        for _ in 0..p.ranks_per_dim {
            let rank = rng.random_range(1..=dim);
            let indices = sample(&mut rng, dim, rank).into_vec();
            checks.push(verify_theorem2(&RegionProjector::new(dim, indices)?));
        }
    }
    let worst = checks.iter().map(|c| c.residual.abs()).fold(0.0, f64::max);
    let worst_closed = checks
        .iter()
        .map(|c| (c.d2 - c.closed_form).abs())
        .fold(0.0, f64::max);
    if worst > p.tol || worst_closed > p.tol {
        return Err(CliError::Numeric(format!(
            "geometry: identity residual {worst:e} / closed-form deviation {worst_closed:e} exceed {:e}",
            p.tol
        )));
    }
    Ok(Outcome {
        artifacts: vec![artifact(
            "theorem2.csv",
            "theorem2",
            csv_bytes(|b| io::write_theorem2_sweep(b, &checks))?,
        )],
        summary: json!({
            "n_checks": checks.len(),
            "max_abs_residual": worst,
            "max_closed_form_deviation": worst_closed,
        }),
    })
}
