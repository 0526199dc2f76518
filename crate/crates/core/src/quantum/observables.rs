//! Default relevant observables, all in the momentum basis.

use faer::{c64, Mat};

use super::params::ladder_of;
use super::state::ObservableMatrix;
use crate::error::{Error, Result};

fn diagonal(values: &[f64], label: String) -> ObservableMatrix {
    let n = values.len();
    let m = Mat::from_fn(n, n, |i, j| if i == j { c64::new(values[i], 0.0) } else { c64::new(0.0, 0.0) });
    ObservableMatrix::new(m, label).expect("real diagonal matrices are Hermitian")
}

/// Projector on ladder states with `k_lo ≤ k ≤ k_hi`.
pub fn momentum_window(dim: usize, k_lo: i64, k_hi: i64) -> Result<ObservableMatrix> {
    if k_lo > k_hi {
        return Err(Error::param("k_lo", format!("window [{k_lo}, {k_hi}] is empty")));
    }
    let values: Vec<f64> = ladder_of(dim)
        .map(|k| if (k_lo..=k_hi).contains(&k) { 1.0 } else { 0.0 })
        .collect();
    Ok(diagonal(&values, format!("window[{k_lo},{k_hi}]")))
}

/// `cos θ` on the `N`-point angle grid, carried to the momentum basis:
/// `1/2` where `k_m − k_n ≡ ±1 (mod N)`.
pub fn cos_theta(dim: usize) -> ObservableMatrix {
    let m = Mat::from_fn(dim, dim, |a, b| {
        let d = (a as i64 - b as i64).rem_euclid(dim as i64);
        if d == 1 || d == dim as i64 - 1 {
            c64::new(0.5, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    ObservableMatrix::new(m, "cos_theta").expect("symmetric real matrix")
}

/// `L² = (ħk)²`.
pub fn l_squared(dim: usize, hbar: f64) -> ObservableMatrix {
    let values: Vec<f64> = ladder_of(dim).map(|k| (hbar * k as f64).powi(2)).collect();
    diagonal(&values, "L2".into())
}

/// `L² / max(L²)`, the angular-momentum square on a unit scale so that
/// absolute tolerances mean the same thing for every observable in a set.
pub fn l_squared_normalized(dim: usize) -> ObservableMatrix {
    let k_max = ((dim - 1) / 2).max(1) as f64;
    let values: Vec<f64> = ladder_of(dim).map(|k| (k as f64 / k_max).powi(2)).collect();
    diagonal(&values, "L2_normalized".into())
}

/// Half-width of the default symmetric momentum window, `⌊N/8⌋`.
pub fn default_window_halfwidth(dim: usize) -> i64 {
    (dim / 8) as i64
}

/// Symmetric momentum-window projector, `cos θ` and normalized `L²`.
pub fn default_set(dim: usize) -> Vec<ObservableMatrix> {
    let w = default_window_halfwidth(dim);
    vec![
        momentum_window(dim, -w, w).expect("non-empty window"),
        cos_theta(dim),
        l_squared_normalized(dim),
    ]
}
