use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closest approach of `τħ/4π` to a low-order rational before the
/// configuration is rejected as a quantum resonance.
pub const RESONANCE_TOL: f64 = 1e-6;
pub const RESONANCE_MAX_DENOMINATOR: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumParams {
    /// Hilbert-space dimension, odd.
    pub dim: usize,
    pub lambda: f64,
    pub hbar: f64,
    pub tau: f64,
}

impl QuantumParams {
    pub fn new(dim: usize, lambda: f64, hbar: f64, tau: f64) -> Result<Self> {
        let p = Self {
            dim,
            lambda,
            hbar,
            tau,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 || self.dim.is_multiple_of(2) {
            return Err(Error::param("dim", format!("must be odd and >= 3, got {}", self.dim)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param("lambda", format!("must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::param("hbar", format!("must be finite and > 0, got {}", self.hbar)));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param("tau", format!("must be finite and > 0, got {}", self.tau)));
        }
        if let Some((p, q)) = self.resonance() {
            return Err(Error::param(
                "hbar",
                format!(
                    "τħ/4π = {} lies within {RESONANCE_TOL:e} of the resonance {p}/{q}",
                    self.tau * self.hbar / (4.0 * PI)
                ),
            ));
        }
        Ok(())
    }

    /// The offending rational `p/q` if `τħ/4π` sits on a low-order resonance.
    pub fn resonance(&self) -> Option<(i64, u32)> {
        let x = self.tau * self.hbar / (4.0 * PI);
        (1..=RESONANCE_MAX_DENOMINATOR).find_map(|q| {
            let p = (x * q as f64).round();
            ((x - p / q as f64).abs() < RESONANCE_TOL).then_some((p as i64, q))
        })
    }

    /// Largest ladder index `(N−1)/2`.
    pub fn k_max(&self) -> i64 {
        ((self.dim - 1) / 2) as i64
    }

    /// Momentum quantum number of basis index `i`.
    pub fn k_of(&self, i: usize) -> i64 {
        i as i64 - self.k_max()
    }

    /// Basis index of momentum quantum number `k`, if on the ladder.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let i = k + self.k_max();
        (0..self.dim as i64).contains(&i).then_some(i as usize)
    }

    pub fn ladder(&self) -> impl Iterator<Item = i64> {
        let m = self.k_max();
        -m..=m
    }
}

/// Momentum quantum numbers of an odd-dimensional ladder.
pub(crate) fn ladder_of(dim: usize) -> impl Iterator<Item = i64> {
    let m = ((dim - 1) / 2) as i64;
    -m..=m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_even_dimension_and_bad_scalars() {
        assert!(QuantumParams::new(64, 1.0, 1.0, 1.0).is_err());
        assert!(QuantumParams::new(1, 1.0, 1.0, 1.0).is_err());
        assert!(QuantumParams::new(65, -1.0, 1.0, 1.0).is_err());
        assert!(QuantumParams::new(65, 1.0, 0.0, 1.0).is_err());
        assert!(QuantumParams::new(65, 1.0, 1.0, -2.0).is_err());
        assert!(QuantumParams::new(65, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn resonance_guard() {
        // τħ = 4π·(1/2) is the principal resonance.
        let err = QuantumParams::new(65, 1.0, 2.0 * PI, 1.0).unwrap_err();
        assert!(err.to_string().contains("resonance"), "{err}");
        assert!(QuantumParams::new(65, 1.0, 4.0 * PI / 3.0 + 1e-7, 1.0).is_err());
        assert!(QuantumParams::new(65, 1.0, 4.0 * PI * (1.0 / 3.0 + 1e-4), 1.0).is_ok());
        assert!(QuantumParams::new(65, 1.0, 4.0 * PI * 3.0 / 7.0, 1.0).is_err());
        assert!(QuantumParams::new(65, 1.0, 4.0 * PI * 5.0 / 11.0, 1.0).is_ok());
    }

    #[test]
    fn ladder_indexing() {
        let p = QuantumParams::new(5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.ladder().collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(p.k_of(0), -2);
        assert_eq!(p.index_of(0), Some(2));
        assert_eq!(p.index_of(3), None);
    }
}
