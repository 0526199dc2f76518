//! Numerical laboratory for mixed (regular + chaotic) dynamics on the kicked
//! rotator.
//!
//! The crate is split along the four computational cores:
//!
//! * [`classical`]: the Chirikov standard map, finite-time Lyapunov exponents,
//!   chaotic-region measure estimates and set correlations.
//! * [`transition`]: the cubic chaotic-transition law, its small-kick quadratic
//!   limit, critical-condition checks and least-squares extraction of the
//!   critical kick strength.
//! * [`quantum`]: the Floquet operator of the quantum kicked rotator, density
//!   state evolution, Cèsaro limits, quantum correlations, the weak-limit
//!   volume proxy and dynamical-localization diagnostics.
//! * [`geometry`]: Hilbert–Schmidt distances and the distance/measure identity
//!   for projector states.
//!
//! [`io`] holds the CSV/JSON layouts shared by the experiment runner.

pub mod classical;
pub mod error;
pub mod geometry;
pub mod io;
pub mod quantum;
pub mod rng;
pub mod transition;

pub use classical::{Cell, MapParams, OrbitClass, OrbitLabel, PhasePoint, RegionEstimate};
pub use error::{Error, Result};
pub use geometry::{RegionProjector, Theorem2Check};
pub use quantum::{
    CorrelationSeries, DensityState, FloquetSystem, ObservableMatrix, QuantumParams,
};
pub use transition::{CriticalReport, FitResult, TransitionCurve};

/// Complex scalar used throughout the quantum code.
pub use faer::c64;
