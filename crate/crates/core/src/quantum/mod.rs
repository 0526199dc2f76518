//! Quantum kicked rotator on a truncated momentum ladder.
//!
//! States and observables are dense `N × N` matrices in the momentum basis
//! `|k⟩`, `k ∈ {−(N−1)/2, …, (N−1)/2}`; basis index `i` holds `k = i − (N−1)/2`.
//! The one-period propagator is
//!
//! ```text
//! F = exp(−i λ cos θ / ħ) · exp(−i τ L² / 2ħ),      L = ħk
//! ```
//!
//! with the kick factor built on the angle grid `θ_j = 2πj/N` and carried to
//! the momentum basis by the unitary discrete Fourier transform.

mod dynamics;
mod floquet;
mod localization;
pub mod observables;
mod params;
mod state;
mod volume;

pub use dynamics::{
    cesaro_limit_state, cesaro_limit_state_clustered, correlation_series, evolve,
    expectation_fluctuations, quantum_correlation, CorrelationSeries, FluctuationStats,
    SpectralExpectation,
};
pub use floquet::{build_floquet, build_floquet_with_gap_tol, kick_matrix, FloquetSystem, DEFAULT_GAP_TOL};
pub use localization::{localization_length, momentum_distribution, LocalizationFit};
pub use params::QuantumParams;
pub use state::{expectation, haar_pure_state, DensityState, ObservableMatrix};
pub use volume::{fraction_below, mixing_deviations, mixing_volume_fraction, VolumeOptions, MIN_VOLUME_STATES};
