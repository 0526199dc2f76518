use serde::{Deserialize, Serialize};

use super::params::ladder_of;
use super::state::DensityState;
use crate::error::{Error, Result};

/// Bulk window used by [`localization_length`]: `|k| ≤ BULK_FRACTION · k_max`.
pub const BULK_FRACTION: f64 = 0.9;
/// Allowed deviation of `Σ p(k)` from 1.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Slopes above `−SLOPE_FLOOR` count as flat.
pub const SLOPE_FLOOR: f64 = 1e-12;

/// `(k, ⟨k|ρ|k⟩)` over the momentum ladder.
pub fn momentum_distribution(rho: &DensityState) -> Vec<(i64, f64)> {
    let m = rho.matrix();
    ladder_of(rho.dim())
        .enumerate()
        .map(|(i, k)| (k, m[(i, i)].re))
        .collect()
}

/// Least-squares line `ln p = intercept + slope·|k|` over the bulk window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationFit {
    /// `−2/slope`; `+∞` when the slope is not negative (no localization).
    pub l_s: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl LocalizationFit {
    pub fn is_localized(&self) -> bool {
        self.l_s.is_finite()
    }
}

/// Fits `p(k) ∝ e^{−2|k|/l_s}`. Points with `p ≤ 0` carry no logarithm and
/// are skipped.
pub fn localization_length(distribution: &[(i64, f64)]) -> Result<LocalizationFit> {
    let total: f64 = distribution.iter().map(|&(_, p)| p).sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidState(format!("distribution sums to {total}, not 1")));
    }
    let k_max = distribution.iter().map(|&(k, _)| k.abs()).max().unwrap_or(0);
    let cutoff = BULK_FRACTION * k_max as f64;
    let points: Vec<(f64, f64)> = distribution
        .iter()
        .filter(|&&(k, p)| (k.abs() as f64) <= cutoff && p > 0.0)
        .map(|&(k, p)| (k.abs() as f64, p.ln()))
        .collect();
    let n = points.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::SingularFit("all bulk points share one |k|".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let l_s = if slope < -SLOPE_FLOOR { -2.0 / slope } else { f64::INFINITY };
    Ok(LocalizationFit {
        l_s,
        slope,
        intercept,
        r_squared,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn basis_state_is_a_point_mass() {
        let d = momentum_distribution(&DensityState::basis(7, 3).unwrap());
        assert_eq!(d.len(), 7);
        assert_eq!(d[3], (0, 1.0));
        assert!(d.iter().filter(|&&(k, _)| k != 0).all(|&(_, p)| p == 0.0));
    }

    #[test]
    fn synthetic_exponential_recovers_length() {
        let raw: Vec<(i64, f64)> = (-50..=50).map(|k: i64| (k, (-2.0 * k.abs() as f64 / 5.0).exp())).collect();
        let z: f64 = raw.iter().map(|p| p.1).sum();
        let d: Vec<(i64, f64)> = raw.into_iter().map(|(k, p)| (k, p / z)).collect();
        let fit = localization_length(&d).unwrap();
        assert_relative_eq!(fit.l_s, 5.0, epsilon = 1e-6);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn uniform_is_not_localized() {
        let d = momentum_distribution(&DensityState::maximally_mixed(11));
        let fit = localization_length(&d).unwrap();
        assert!(fit.l_s.is_infinite());
        assert!(!fit.is_localized());
    }

    #[test]
    fn rejects_unnormalized_input() {
        assert!(localization_length(&[(0, 0.5), (1, 0.2)]).is_err());
    }
}
