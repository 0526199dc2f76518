//! Monte-Carlo proxy for the volume of states with a weak limit.
//!
//! In finite dimension `(ρ(t)|O)` is quasi-periodic and never converges, so a
//! state counts as "having a weak limit" when its correlations stay below a
//! tolerance over the last part of a finite horizon.

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::floquet::FloquetSystem;
use super::state::{haar_pure_state, ObservableMatrix};
use crate::error::{Error, Result};
use crate::rng;

pub const MIN_VOLUME_STATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeOptions {
    pub n_states: usize,
    /// Steps `0..horizon` are simulated; only the tail window is inspected.
    pub horizon: u64,
    pub seed: u64,
    /// Fraction of the horizon forming the tail window.
    pub tail_fraction: f64,
}

impl VolumeOptions {
    pub fn new(n_states: usize, horizon: u64, seed: u64) -> Self {
        Self {
            n_states,
            horizon,
            seed,
            tail_fraction: 0.1,
        }
    }

    /// First step of the tail window; the window always holds at least one step.
    pub fn tail_start(&self) -> u64 {
        let len = ((self.horizon as f64 * self.tail_fraction).ceil() as u64).clamp(1, self.horizon);
        self.horizon - len
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::param("horizon", "must be >= 1"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::param("tail_fraction", format!("must lie in (0, 1], got {}", self.tail_fraction)));
        }
        Ok(())
    }
}

/// Observable in whichever layout makes `⟨ψ|O|ψ⟩` cheapest.
enum Layout {
    Sparse(Vec<(usize, usize, c64)>),
    Dense(Mat<c64>),
}

struct Prepared {
    layout: Layout,
    /// `V† O V`, used for the Cèsaro value.
    eigen: Mat<c64>,
}

impl Prepared {
    fn new(obs: &ObservableMatrix, system: &FloquetSystem) -> Self {
        let m = obs.matrix();
        let n = m.nrows();
        let mut entries = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let z = m[(i, j)];
                if z != c64::new(0.0, 0.0) {
                    entries.push((i, j, z));
                }
            }
        }
        let layout = if entries.len() <= n * n / 4 {
            Layout::Sparse(entries)
        } else {
            Layout::Dense(m.to_owned())
        };
        Self {
            layout,
            eigen: system.to_eigenbasis(m),
        }
    }

    fn expectation(&self, psi: &[c64]) -> f64 {
        match &self.layout {
            Layout::Sparse(entries) => entries
                .iter()
                .map(|&(i, j, z)| psi[i].conj() * z * psi[j])
                .sum::<c64>()
                .re,
            Layout::Dense(m) => {
                let n = psi.len();
                let mut acc = c64::new(0.0, 0.0);
                for j in 0..n {
                    let col = m.col(j);
                    let s: c64 = (0..n).map(|i| psi[i].conj() * col[i]).sum();
                    acc += s * psi[j];
                }
                acc.re
            }
        }
    }

    /// Cluster-aware time average for amplitudes `c_k = ⟨k|ψ⟩`.
    fn limit(&self, amps: &[c64], clusters: &[Vec<usize>]) -> f64 {
        clusters
            .iter()
            .map(|members| {
                members
                    .iter()
                    .flat_map(|&k| members.iter().map(move |&l| (k, l)))
                    .map(|(k, l)| amps[k].conj() * self.eigen[(k, l)] * amps[l])
                    .sum::<c64>()
                    .re
            })
            .sum()
    }
}

fn cluster_members(system: &FloquetSystem) -> Vec<Vec<usize>> {
    let ids = system.cluster_ids();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (k, &id) in ids.iter().enumerate() {
        groups[id].push(k);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Per-state maximum of `|C_Q(ρ(t), O)|` over the observables and the tail
/// window, for `n_states` Haar-random pure states. State `i` is drawn from the
/// stream `(seed, i)`.
pub fn mixing_deviations(
    system: &FloquetSystem,
    o_set: &[ObservableMatrix],
    options: &VolumeOptions,
) -> Result<Vec<f64>> {
    options.validate()?;
    if o_set.is_empty() {
        return Err(Error::Config("observable set must not be empty".into()));
    }
    let n = system.dim();
    for o in o_set {
        if o.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: o.dim(),
            });
        }
    }
    let prepared: Vec<Prepared> = o_set.iter().map(|o| Prepared::new(o, system)).collect();
    let clusters = cluster_members(system);
    let v = system.eigenbasis();
    let phases = system.quasi_energies();
    let tail = options.tail_start()..options.horizon;

    Ok((0..options.n_states)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(options.seed, i as u64);
            let psi0 = haar_pure_state(n, &mut rng);
            let amps = system.eigen_amplitudes(&psi0);
            let limits: Vec<f64> = prepared.iter().map(|p| p.limit(&amps, &clusters)).collect();
            let mut psi = vec![c64::new(0.0, 0.0); n];
            let mut worst = 0.0f64;
            for t in tail.clone() {
                psi.iter_mut().for_each(|z| *z = c64::new(0.0, 0.0));
                for k in 0..n {
                    let y = amps[k] * c64::cis(-((t as f64 * phases[k]) % std::f64::consts::TAU));
                    let col = v.col(k);
                    for (z, &vk) in psi.iter_mut().zip(col.iter()) {
                        *z += vk * y;
                    }
                }
                for (p, &lim) in prepared.iter().zip(&limits) {
                    worst = worst.max((p.expectation(&psi) - lim).abs());
                }
            }
            worst
        })
        .collect())
}

/// Fraction of sampled pure states whose tail correlations all stay strictly
/// below `tol`.
pub fn mixing_volume_fraction(
    system: &FloquetSystem,
    o_set: &[ObservableMatrix],
    n_states: usize,
    horizon: u64,
    tol: f64,
    seed: u64,
) -> Result<f64> {
    if n_states < MIN_VOLUME_STATES {
        return Err(Error::param(
            "n_states",
            format!("must be >= {MIN_VOLUME_STATES}, got {n_states}"),
        ));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::param("tol", format!("must be finite and >= 0, got {tol}")));
    }
    let deviations = mixing_deviations(system, o_set, &VolumeOptions::new(n_states, horizon, seed))?;
    Ok(fraction_below(&deviations, tol))
}

/// Share of `deviations` strictly below `tol`.
pub fn fraction_below(deviations: &[f64], tol: f64) -> f64 {
    if deviations.is_empty() {
        return 0.0;
    }
    deviations.iter().filter(|&&d| d < tol).count() as f64 / deviations.len() as f64
}
