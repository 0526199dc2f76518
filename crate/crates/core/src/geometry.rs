//! Hilbert–Schmidt geometry of projector states.
//!
//! For a region projector `Î` of rank `μ` on an `N`-dimensional space, the
//! state `ρ_A = Î/μ` sits at squared distance `d² = 1/μ − 1/N` from the
//! maximally mixed state `I/N`, so that `(d² + 1/N)·μ = 1` holds exactly.

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::classical::Cell;
use crate::error::{Error, Result};
use crate::quantum::QuantumParams;

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `(Tr((A−B)(A−B)†))^{1/2}`.
pub fn hs_distance(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows() * a.ncols(),
            got: b.nrows() * b.ncols(),
        });
    }
    let mut acc = Vec::with_capacity(a.nrows() * a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc.push((a[(i, j)] - b[(i, j)]).norm_sqr());
        }
    }
    Ok(compensated_sum(acc).sqrt())
}

/// [`hs_distance`] between two diagonal matrices given by their diagonals.
pub fn hs_distance_diagonal(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(compensated_sum(a.iter().zip(b).map(|(x, y)| (x - y).powi(2))).sqrt())
}

/// Diagonal 0/1 projector on a set of momentum basis indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionProjector {
    pub dim: usize,
    /// Sorted, distinct basis indices.
    pub indices: Vec<usize>,
    /// `Tr Î = |indices|`.
    pub mu_rank: usize,
}

impl RegionProjector {
    pub fn new(dim: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::param("indices", format!("index {bad} outside dimension {dim}")));
        }
        let mu_rank = indices.len();
        Ok(Self { dim, indices, mu_rank })
    }

    /// `μ_rank / N`, the share of the ladder covered.
    pub fn mu_normalized(&self) -> f64 {
        self.mu_rank as f64 / self.dim as f64
    }

    /// Diagonal of `Î`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &i in &self.indices {
            d[i] = 1.0;
        }
        d
    }

    /// `Î` as a dense matrix.
    pub fn matrix(&self) -> Mat<c64> {
        let d = self.diagonal();
        Mat::from_fn(self.dim, self.dim, |i, j| {
            if i == j {
                c64::new(d[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }
}

/// Projector on ladder states whose momentum `ħk` lies in one of the cells'
/// momentum intervals `[p_min, p_max)`. Angle bounds play no role: the
/// quantization keeps only the momentum marginal of each cell.
pub fn region_projector_from_cells(cells: &[Cell], params: &QuantumParams) -> Result<RegionProjector> {
    params.validate()?;
    for c in cells {
        c.validate()?;
    }
    let indices: Vec<usize> = params
        .ladder()
        .enumerate()
        .filter(|&(_, k)| {
            let p = params.hbar * k as f64;
            cells.iter().any(|c| p >= c.p_min && p < c.p_max)
        })
        .map(|(i, _)| i)
        .collect();
    RegionProjector::new(params.dim, indices)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Check {
    pub dim: usize,
    pub mu_rank: usize,
    /// `d²(ρ_A, I/N)` from the matrix entries.
    pub d2: f64,
    /// `(d² + 1/N)·μ − 1`.
    pub residual: f64,
    /// `1/μ − 1/N`.
    pub closed_form: f64,
}

/// Evaluates the distance/measure identity for `ρ_A = Î/μ`.
pub fn verify_theorem2(projector: &RegionProjector) -> Theorem2Check {
    let n = projector.dim as f64;
    let mu = projector.mu_rank as f64;
    let rho_a: Vec<f64> = projector.diagonal().into_iter().map(|x| x / mu).collect();
    let mixed = vec![1.0 / n; projector.dim];
    let d = hs_distance_diagonal(&rho_a, &mixed).expect("equal lengths");
    let d2 = d * d;
    Theorem2Check {
        dim: projector.dim,
        mu_rank: projector.mu_rank,
        d2,
        residual: (d2 + 1.0 / n) * mu - 1.0,
        closed_form: 1.0 / mu - 1.0 / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn diag(values: &[f64]) -> Mat<c64> {
        let n = values.len();
        Mat::from_fn(n, n, |i, j| if i == j { c64::new(values[i], 0.0) } else { c64::new(0.0, 0.0) })
    }

    #[test]
    fn distance_basics() {
        let a = diag(&[1.0, 0.0]);
        let b = diag(&[0.0, 1.0]);
        assert_eq!(hs_distance(a.as_ref(), a.as_ref()).unwrap(), 0.0);
        assert!((hs_distance(a.as_ref(), b.as_ref()).unwrap() - SQRT_2).abs() < 1e-15);
        let c = diag(&[0.0; 3]);
        assert!(hs_distance(a.as_ref(), c.as_ref()).is_err());
    }

    #[test]
    fn small_identity_example() {
        let p = RegionProjector::new(4, vec![0, 2]).unwrap();
        let check = verify_theorem2(&p);
        assert!((check.d2 - 0.25).abs() < 1e-15);
        assert!(check.residual.abs() < 1e-15);
        let full = RegionProjector::new(4, (0..4).collect()).unwrap();
        let check = verify_theorem2(&full);
        assert_eq!(check.d2, 0.0);
        assert!(check.residual.abs() < 1e-15);
    }

    #[test]
    fn dense_and_diagonal_paths_agree() {
        let p = RegionProjector::new(9, vec![1, 4, 5]).unwrap();
        let rho_a = Mat::from_fn(9, 9, |i, j| p.matrix()[(i, j)] / 3.0);
        let mixed = diag(&[1.0 / 9.0; 9]);
        let dense = hs_distance(rho_a.as_ref(), mixed.as_ref()).unwrap();
        assert!((dense * dense - verify_theorem2(&p).d2).abs() < 1e-15);
    }

    #[test]
    fn projector_validation() {
        assert!(matches!(RegionProjector::new(4, vec![]), Err(Error::EmptyRegion)));
        assert!(RegionProjector::new(4, vec![4]).is_err());
        let p = RegionProjector::new(4, vec![3, 1, 3]).unwrap();
        assert_eq!(p.indices, vec![1, 3]);
        assert_eq!(p.mu_rank, 2);
        assert_eq!(p.mu_normalized(), 0.5);
    }

    #[test]
    fn cells_select_momentum_windows() {
        let params = QuantumParams::new(65, 1.0, 1.0, 1.0).unwrap();
        let all = region_projector_from_cells(&[Cell::new(0.0, 1.0, -1e3, 1e3)], &params).unwrap();
        assert_eq!(all.mu_rank, 65);
        let one = region_projector_from_cells(&[Cell::new(0.0, 1.0, 3.0, 3.5)], &params).unwrap();
        assert_eq!(one.indices, vec![35]);
        // closed on the left, open on the right
        let upper = region_projector_from_cells(&[Cell::new(0.0, 1.0, 0.0, 100.0)], &params).unwrap();
        assert_eq!(upper.mu_rank, 33);
        let lower = region_projector_from_cells(&[Cell::new(0.0, 1.0, -100.0, 0.0)], &params).unwrap();
        assert_eq!(lower.mu_rank, 32);
        assert!(matches!(
            region_projector_from_cells(&[Cell::new(0.0, 1.0, 0.2, 0.8)], &params),
            Err(Error::EmptyRegion)
        ));
    }
}
