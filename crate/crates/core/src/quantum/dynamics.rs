use std::f64::consts::TAU;

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::floquet::FloquetSystem;
use super::state::{expectation, DensityState, ObservableMatrix, IMAGINARY_RESIDUE_TOL};
use crate::error::{Error, Result};

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `e^{−i n φ_k}` with the phase reduced before exponentiation.
fn phase_factors(phases: &[f64], n: u64) -> Vec<c64> {
    phases
        .iter()
        .map(|&phi| c64::cis(-((n as f64 * phi) % TAU)))
        .collect()
}

fn hermitize(m: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// `Fⁿ ρ (Fⁿ)†`, evaluated as `ρ_kk' e^{−in(φ_k−φ_k')}` in the eigenbasis.
pub fn evolve(rho: &DensityState, system: &FloquetSystem, n: u64) -> Result<DensityState> {
    check_dim(system.dim(), rho.dim())?;
    if n == 0 {
        return Ok(rho.clone());
    }
    let a = phase_factors(system.quasi_energies(), n);
    let r = system.to_eigenbasis(rho.matrix());
    let rotated = Mat::from_fn(r.nrows(), r.ncols(), |k, l| r[(k, l)] * a[k] * a[l].conj());
    let out = system.from_eigenbasis(rotated.as_ref());
    Ok(DensityState::from_matrix_unchecked(hermitize(&out)))
}

/// Block-diagonal part of `ρ0` in the eigenbasis, keeping entries `(k, k')`
/// for which `keep(k, k')` holds.
fn project_eigenbasis(
    rho0: &DensityState,
    system: &FloquetSystem,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<DensityState> {
    check_dim(system.dim(), rho0.dim())?;
    let r = system.to_eigenbasis(rho0.matrix());
    let zero = c64::new(0.0, 0.0);
    let kept = Mat::from_fn(r.nrows(), r.ncols(), |k, l| if keep(k, l) { r[(k, l)] } else { zero });
    let out = system.from_eigenbasis(kept.as_ref());
    Ok(DensityState::from_matrix_unchecked(hermitize(&out)))
}

/// `ρ* = Σ_k ρ_kk |k⟩⟨k|`.
///
/// Refuses when any quasi-energy gap is below the system's gap tolerance,
/// listing the offending eigen-index pairs.
pub fn cesaro_limit_state(rho0: &DensityState, system: &FloquetSystem) -> Result<DensityState> {
    if !system.degeneracy_flags().is_empty() {
        return Err(Error::Degenerate {
            gap_tol: system.gap_tol(),
            pairs: system.degeneracy_flags().to_vec(),
        });
    }
    project_eigenbasis(rho0, system, |k, l| k == l)
}

/// Time average of `ρ(t)` when quasi-energies may cluster: entries between
/// eigenvectors of one degeneracy cluster do not dephase and are kept.
/// Coincides with [`cesaro_limit_state`] on a nondegenerate spectrum.
pub fn cesaro_limit_state_clustered(rho0: &DensityState, system: &FloquetSystem) -> Result<DensityState> {
    let ids = system.cluster_ids();
    project_eigenbasis(rho0, system, |k, l| ids[k] == ids[l])
}

/// `C_Q = (ρ(t)|O) − (ρ*|O)`.
pub fn quantum_correlation(rho_t: &DensityState, obs: &ObservableMatrix, rho_star: &DensityState) -> Result<f64> {
    check_dim(rho_t.dim(), rho_star.dim())?;
    Ok(expectation(rho_t, obs)? - expectation(rho_star, obs)?)
}

/// `(ρ(t)|O)` as a trigonometric polynomial in `t`:
/// `Σ_kk' M_kk' e^{−it(φ_k−φ_k')}` with `M_kk' = ρ_kk' O_k'k` in the eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralExpectation {
    phases: Vec<f64>,
    weights: Mat<c64>,
    limit: f64,
    fluctuation_power: f64,
}

impl SpectralExpectation {
    pub fn new(rho0: &DensityState, system: &FloquetSystem, obs: &ObservableMatrix) -> Result<Self> {
        check_dim(system.dim(), rho0.dim())?;
        check_dim(system.dim(), obs.dim())?;
        let r = system.to_eigenbasis(rho0.matrix());
        let o = system.to_eigenbasis(obs.matrix());
        let n = system.dim();
        let weights = Mat::from_fn(n, n, |k, l| r[(k, l)] * o[(l, k)]);
        let ids = system.cluster_ids();
        let mut limit = c64::new(0.0, 0.0);
        let mut fluctuation_power = 0.0;
        for l in 0..n {
            for k in 0..n {
                if ids[k] == ids[l] {
                    limit += weights[(k, l)];
                } else {
                    fluctuation_power += weights[(k, l)].norm_sqr();
                }
            }
        }
        if limit.im.abs() >= IMAGINARY_RESIDUE_TOL {
            return Err(Error::HermiticityViolation { residue: limit.im.abs() });
        }
        Ok(Self {
            phases: system.quasi_energies().to_vec(),
            weights,
            limit: limit.re,
            fluctuation_power,
        })
    }

    /// `(ρ(t)|O)`.
    pub fn value_at(&self, t: u64) -> Result<f64> {
        let a = phase_factors(&self.phases, t);
        let n = a.len();
        let mut acc = c64::new(0.0, 0.0);
        for l in 0..n {
            let col = self.weights.col(l);
            let mut s = c64::new(0.0, 0.0);
            for k in 0..n {
                s += a[k] * col[k];
            }
            acc += s * a[l].conj();
        }
        if acc.im.abs() >= IMAGINARY_RESIDUE_TOL {
            return Err(Error::HermiticityViolation { residue: acc.im.abs() });
        }
        Ok(acc.re)
    }

    /// `(ρ*|O)` for the cluster-aware Cèsaro limit.
    pub fn limit(&self) -> f64 {
        self.limit
    }

    /// `Σ |ρ_kk'|²|O_k'k|²` over pairs in distinct degeneracy clusters: the
    /// long-time variance of `(ρ(t)|O)` when all gaps are distinct.
    pub fn fluctuation_power(&self) -> f64 {
        self.fluctuation_power
    }

    /// Values at every `t` of `times`, evaluated in parallel.
    pub fn values(&self, times: &[u64]) -> Result<Vec<f64>> {
        times.par_iter().map(|&t| self.value_at(t)).collect()
    }
}

/// `C_Q(ρ(t), O)` for `t = 0, …, horizon−1` with running Cèsaro averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub times: Vec<u64>,
    pub c_q: Vec<f64>,
    /// `cesaro[n]` is the mean of `c_q[0..=n]`.
    pub cesaro: Vec<f64>,
    pub observable_label: String,
    pub state_label: String,
}

impl CorrelationSeries {
    /// Smallest `C` with `|cesaro[n]| ≤ C/(n+1)` for every `n`.
    pub fn decay_constant(&self) -> f64 {
        self.cesaro
            .iter()
            .enumerate()
            .map(|(n, c)| (n + 1) as f64 * c.abs())
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Running means; `out[n]` averages `values[0..=n]`.
fn running_mean(values: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    let mut comp = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(n, &v)| {
            // Kahan summation keeps the mean exact to rounding over long horizons.
            let y = v - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            sum / (n + 1) as f64
        })
        .collect()
}

/// Correlation series against the Cèsaro limit of `rho0`.
///
/// `ρ*` is the cluster-aware limit, so the series stays defined when the
/// spectrum contains symmetry-protected doublets.
pub fn correlation_series(
    rho0: &DensityState,
    system: &FloquetSystem,
    obs: &ObservableMatrix,
    horizon: u64,
    state_label: impl Into<String>,
) -> Result<CorrelationSeries> {
    if horizon < 2 {
        return Err(Error::param("horizon", format!("must be >= 2, got {horizon}")));
    }
    let spectral = SpectralExpectation::new(rho0, system, obs)?;
    let times: Vec<u64> = (0..horizon).collect();
    let limit = spectral.limit();
    let c_q: Vec<f64> = spectral.values(&times)?.into_iter().map(|v| v - limit).collect();
    let cesaro = running_mean(&c_q);
    Ok(CorrelationSeries {
        times,
        c_q,
        cesaro,
        observable_label: obs.label.clone(),
        state_label: state_label.into(),
    })
}

/// Time statistics of `(ρ(t)|O)` over a window, next to the spectral prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationStats {
    pub t_start: u64,
    pub t_end: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    /// `(ρ*|O)`.
    pub limit: f64,
    /// `Σ_{k≠k'} |ρ_kk'|²|O_kk'|²`.
    pub predicted_variance: f64,
}

/// Mean and (population) variance of `(ρ(t)|O)` for `t ∈ [t_start, t_end]`.
pub fn expectation_fluctuations(
    rho0: &DensityState,
    system: &FloquetSystem,
    obs: &ObservableMatrix,
    t_start: u64,
    t_end: u64,
) -> Result<FluctuationStats> {
    if t_end <= t_start {
        return Err(Error::param("t_end", format!("must exceed t_start = {t_start}, got {t_end}")));
    }
    let spectral = SpectralExpectation::new(rho0, system, obs)?;
    let times: Vec<u64> = (t_start..=t_end).collect();
    let values = spectral.values(&times)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(FluctuationStats {
        t_start,
        t_end,
        mean,
        variance,
        std_dev: variance.sqrt(),
        limit: spectral.limit(),
        predicted_variance: spectral.fluctuation_power(),
    })
}
