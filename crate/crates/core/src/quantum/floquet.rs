use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use faer::{c64, Mat, MatRef};

use super::params::QuantumParams;
use crate::error::{Error, Result};

/// Quasi-energies closer than this (on the circle) are flagged degenerate.
pub const DEFAULT_GAP_TOL: f64 = 1e-9;
/// `‖F F† − I‖_max` bound enforced after construction.
pub const UNITARITY_TOL: f64 = 1e-10;
/// `‖F|k⟩ − e^{−iφ_k}|k⟩‖_max` bound enforced after the eigensolve.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
/// Off-block norm below which the parity reduction is used.
const PARITY_TOL: f64 = 1e-12;

/// One-period propagator with its quasi-energy spectrum.
///
/// Eigenvalues are written `e^{−iφ_k}` with `φ_k ∈ [0, 2π)`, sorted
/// increasingly; column `k` of the eigenbasis is `|k⟩`.
#[derive(Debug, Clone)]
pub struct FloquetSystem {
    params: Option<QuantumParams>,
    unitary: Mat<c64>,
    quasi_energies: Vec<f64>,
    eigenbasis: Mat<c64>,
    degeneracy_flags: Vec<(usize, usize)>,
    clusters: Vec<usize>,
    gap_tol: f64,
}

fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Kick factor `exp(−i(λ/ħ) cos θ)` in the momentum basis, built on the
/// `N`-point angle grid. The matrix is circulant in `k_m − k_n (mod N)`.
pub fn kick_matrix(params: &QuantumParams) -> Mat<c64> {
    let n = params.dim;
    let strength = params.lambda / params.hbar;
    let kick: Vec<c64> = (0..n)
        .map(|j| c64::cis(-strength * (TAU * j as f64 / n as f64).cos()))
        .collect();
    // e^{−2πi r/N}; products r·j are reduced mod N so every twiddle is exact
    // to one rounding.
    let twiddle: Vec<c64> = (0..n).map(|r| c64::cis(-TAU * r as f64 / n as f64)).collect();
    let coef: Vec<c64> = (0..n)
        .map(|r| {
            let s: c64 = (0..n).map(|j| kick[j] * twiddle[(r * j) % n]).sum();
            s / n as f64
        })
        .collect();
    Mat::from_fn(n, n, |a, b| {
        let d = (a as i64 - b as i64).rem_euclid(n as i64) as usize;
        coef[d]
    })
}

/// Free-rotation phases `exp(−iτħk²/2)` on the ladder.
fn free_phases(params: &QuantumParams) -> Vec<c64> {
    params
        .ladder()
        .map(|k| {
            let phase = (0.5 * params.tau * params.hbar * (k * k) as f64) % TAU;
            c64::cis(-phase)
        })
        .collect()
}

pub fn build_floquet(params: &QuantumParams) -> Result<FloquetSystem> {
    build_floquet_with_gap_tol(params, DEFAULT_GAP_TOL)
}

pub fn build_floquet_with_gap_tol(params: &QuantumParams, gap_tol: f64) -> Result<FloquetSystem> {
    params.validate()?;
    let kick = kick_matrix(params);
    let free = free_phases(params);
    let n = params.dim;
    let unitary = Mat::from_fn(n, n, |a, b| kick[(a, b)] * free[b]);
    let mut system = FloquetSystem::from_unitary(unitary, gap_tol)?;
    system.params = Some(*params);
    Ok(system)
}

/// Parity `k → −k` basis of an odd ladder: even vectors first, then odd.
fn parity_basis(n: usize) -> (Mat<c64>, Mat<c64>) {
    let m = (n - 1) / 2;
    let s = c64::new(FRAC_1_SQRT_2, 0.0);
    let mut even = Mat::<c64>::zeros(n, m + 1);
    let mut odd = Mat::<c64>::zeros(n, m);
    even[(m, 0)] = c64::new(1.0, 0.0);
    for j in 1..=m {
        even[(m + j, j)] = s;
        even[(m - j, j)] = s;
        odd[(m + j, j - 1)] = s;
        odd[(m - j, j - 1)] = -s;
    }
    (even, odd)
}

/// Eigenpairs of a unitary block with orthonormalized eigenvectors.
fn unitary_eigen(block: MatRef<'_, c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    if block.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = block
        .to_owned()
        .eigen()
        .map_err(|e| Error::Numeric(format!("eigensolver failed on {0}×{0} block: {e:?}", block.nrows())))?;
    let values: Vec<c64> = (0..block.nrows()).map(|i| evd.S().column_vector()[i]).collect();
    // Eigenvectors of a normal matrix are orthogonal up to rounding divided by
    // the local gap; QR restores exact orthonormality.
    let q = evd.U().qr().compute_Q();
    Ok((values, q))
}

impl FloquetSystem {
    /// Spectral decomposition of an arbitrary unitary. When the matrix
    /// commutes with the ladder reflection `k → −k`, each parity sector is
    /// diagonalized separately.
    pub fn from_unitary(unitary: Mat<c64>, gap_tol: f64) -> Result<Self> {
        let n = unitary.nrows();
        if n != unitary.ncols() || n == 0 {
            return Err(Error::param("unitary", "matrix must be square and non-empty"));
        }
        if !(gap_tol.is_finite() && gap_tol > 0.0) {
            return Err(Error::param("gap_tol", format!("must be > 0, got {gap_tol}")));
        }

        let defect = max_abs((&unitary * unitary.adjoint() - Mat::<c64>::identity(n, n)).as_ref());
        if defect >= UNITARITY_TOL {
            return Err(Error::Numeric(format!("propagator is not unitary: ‖FF†−I‖_max = {defect:e}")));
        }

        let (values, vectors) = if n % 2 == 1 {
            let (pe, po) = parity_basis(n);
            let off = max_abs((pe.adjoint() * &unitary * &po).as_ref());
            if off < PARITY_TOL {
                let fe = pe.adjoint() * &unitary * &pe;
                let fo = po.adjoint() * &unitary * &po;
                let (ve, ue) = unitary_eigen(fe.as_ref())?;
                let (vo, uo) = unitary_eigen(fo.as_ref())?;
                let ue = &pe * &ue;
                let uo = &po * &uo;
                let mut vectors = Mat::<c64>::zeros(n, n);
                for j in 0..ue.ncols() {
                    vectors.col_mut(j).copy_from(ue.col(j));
                }
                for j in 0..uo.ncols() {
                    vectors.col_mut(ue.ncols() + j).copy_from(uo.col(j));
                }
                ([ve, vo].concat(), vectors)
            } else {
                unitary_eigen(unitary.as_ref())?
            }
        } else {
            unitary_eigen(unitary.as_ref())?
        };

        let mut order: Vec<(f64, usize)> = values
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let phi = (-z.arg()).rem_euclid(TAU);
                (if phi >= TAU { 0.0 } else { phi }, i)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let quasi_energies: Vec<f64> = order.iter().map(|o| o.0).collect();
        let eigenbasis = Mat::from_fn(n, n, |i, j| vectors[(i, order[j].1)]);

        let (degeneracy_flags, clusters) = degeneracies(&quasi_energies, gap_tol);
        let system = Self {
            params: None,
            unitary,
            quasi_energies,
            eigenbasis,
            degeneracy_flags,
            clusters,
            gap_tol,
        };
        let residual = system.eigen_residual();
        if residual.is_nan() || residual > EIGEN_RESIDUAL_TOL {
            return Err(Error::Numeric(format!(
                "eigendecomposition residual ‖F|k⟩ − e^(−iφ)|k⟩‖_max = {residual:e} exceeds {EIGEN_RESIDUAL_TOL:e}"
            )));
        }
        Ok(system)
    }

    pub fn params(&self) -> Option<&QuantumParams> {
        self.params.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn unitary(&self) -> MatRef<'_, c64> {
        self.unitary.as_ref()
    }

    pub fn quasi_energies(&self) -> &[f64] {
        &self.quasi_energies
    }

    pub fn eigenbasis(&self) -> MatRef<'_, c64> {
        self.eigenbasis.as_ref()
    }

    /// Adjacent (in sorted order, including the wrap at 2π) eigen-index pairs
    /// whose quasi-energies differ by less than the gap tolerance.
    pub fn degeneracy_flags(&self) -> &[(usize, usize)] {
        &self.degeneracy_flags
    }

    /// Cluster id per eigen-index; indices linked by degeneracy flags share an id.
    pub fn cluster_ids(&self) -> &[usize] {
        &self.clusters
    }

    pub fn gap_tol(&self) -> f64 {
        self.gap_tol
    }

    /// Smallest gap between neighbouring quasi-energies on the circle.
    pub fn min_gap(&self) -> f64 {
        let q = &self.quasi_energies;
        let n = q.len();
        if n < 2 {
            return f64::INFINITY;
        }
        let inner = q.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        inner.min(q[0] + TAU - q[n - 1])
    }

    /// `max_k ‖F|k⟩ − e^{−iφ_k}|k⟩‖_max`.
    pub fn eigen_residual(&self) -> f64 {
        let fv = &self.unitary * &self.eigenbasis;
        let mut worst = 0.0f64;
        for (k, &phi) in self.quasi_energies.iter().enumerate() {
            let ev = c64::cis(-phi);
            for i in 0..self.dim() {
                worst = worst.max((fv[(i, k)] - ev * self.eigenbasis[(i, k)]).norm());
            }
        }
        worst
    }

    /// `V diag(e^{−iφ}) V†`.
    pub fn reconstruct(&self) -> Mat<c64> {
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, k| self.eigenbasis[(i, k)] * c64::cis(-self.quasi_energies[k]));
        scaled * self.eigenbasis.adjoint()
    }

    /// `‖F F† − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs((&self.unitary * self.unitary.adjoint() - Mat::<c64>::identity(n, n)).as_ref())
    }

    /// Matrix in the computational basis re-expressed in the eigenbasis, `V† A V`.
    pub fn to_eigenbasis(&self, a: MatRef<'_, c64>) -> Mat<c64> {
        self.eigenbasis.adjoint() * a * &self.eigenbasis
    }

    /// Inverse of [`Self::to_eigenbasis`], `V A V†`.
    pub fn from_eigenbasis(&self, a: MatRef<'_, c64>) -> Mat<c64> {
        &self.eigenbasis * a * self.eigenbasis.adjoint()
    }

    /// Amplitudes `⟨k|ψ⟩` of a state vector.
    pub fn eigen_amplitudes(&self, psi: &[c64]) -> Vec<c64> {
        let n = self.dim();
        (0..n)
            .map(|k| (0..n).map(|i| self.eigenbasis[(i, k)].conj() * psi[i]).sum())
            .collect()
    }
}

fn degeneracies(phases: &[f64], gap_tol: f64) -> (Vec<(usize, usize)>, Vec<usize>) {
    let n = phases.len();
    let mut flags = Vec::new();
    let mut clusters: Vec<usize> = (0..n).collect();
    for i in 1..n {
        if phases[i] - phases[i - 1] < gap_tol {
            flags.push((i - 1, i));
            clusters[i] = clusters[i - 1];
        }
    }
    if n > 1 && phases[0] + TAU - phases[n - 1] < gap_tol {
        flags.push((n - 1, 0));
        // merge the trailing run into the leading one
        let tail = clusters[n - 1];
        let head = clusters[0];
        for c in clusters.iter_mut().rev() {
            if *c != tail {
                break;
            }
            *c = head;
        }
    }
    (flags, clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn zero() -> c64 {
        c64::new(0.0, 0.0)
    }

    #[test]
    fn free_rotation_is_diagonal() {
        let p = QuantumParams::new(9, 0.0, 0.7, 1.3).unwrap();
        let f = build_floquet(&p).unwrap();
        let u = f.unitary();
        for (a, k) in p.ladder().enumerate() {
            for b in 0..p.dim {
                let expected = if a == b {
                    c64::cis(-1.3 * 0.7 * (k * k) as f64 / 2.0)
                } else {
                    zero()
                };
                assert!((u[(a, b)] - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn kick_matrix_is_unitary_and_hermitian_symmetric() {
        let p = QuantumParams::new(15, 2.5, 1.0, 1.0).unwrap();
        let k = kick_matrix(&p);
        let defect = max_abs((&k * k.adjoint() - Mat::<c64>::identity(15, 15)).as_ref());
        assert!(defect < 1e-13);
        // cos θ is even, so the kick commutes with k → −k
        for a in 0..15 {
            for b in 0..15 {
                assert!((k[(a, b)] - k[(14 - a, 14 - b)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn spectrum_is_sorted_and_consistent() {
        let p = QuantumParams::new(33, 3.0, 1.0, 1.0).unwrap();
        let f = build_floquet(&p).unwrap();
        assert!(f.quasi_energies().windows(2).all(|w| w[0] <= w[1]));
        assert!(f.quasi_energies().iter().all(|&q| (0.0..TAU).contains(&q)));
        assert!(f.eigen_residual() < 1e-10);
        assert!(f.unitarity_defect() < 1e-12);
        let r = f.reconstruct();
        let err = max_abs((r - f.unitary().to_owned()).as_ref());
        assert!(err < 1e-10, "{err}");
        let vv = f.eigenbasis().adjoint() * f.eigenbasis();
        let err = max_abs((vv - Mat::<c64>::identity(33, 33)).as_ref());
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn integrable_limit_flags_parity_doublets() {
        // At λ = 0 the phases of ±k coincide.
        let p = QuantumParams::new(7, 0.0, 1.0, 1.0).unwrap();
        let f = build_floquet(&p).unwrap();
        assert!(f.degeneracy_flags().len() >= 3);
        let ids = f.cluster_ids();
        for &(a, b) in f.degeneracy_flags() {
            assert_eq!(ids[a], ids[b]);
        }
    }

    #[test]
    fn degeneracy_clusters_wrap_around() {
        let (flags, ids) = degeneracies(&[1e-12, 1.0, 2.0, TAU - 1e-12], 1e-9);
        assert_eq!(flags, vec![(3, 0)]);
        assert_eq!(ids[3], ids[0]);
        assert_ne!(ids[1], ids[0]);
        let (flags, ids) = degeneracies(&[0.5, 0.5 + 1e-10, 0.5 + 2e-10, 3.0], 1e-9);
        assert_eq!(flags.len(), 2);
        assert_eq!(ids[0], ids[2]);
    }

    #[test]
    fn rejects_non_unitary_input() {
        let m = Mat::<c64>::from_fn(3, 3, |i, j| if i == j { c64::new(1.1, 0.0) } else { zero() });
        assert!(matches!(FloquetSystem::from_unitary(m, 1e-9), Err(Error::Numeric(_))));
    }

    #[test]
    fn rejects_resonant_params() {
        let p = QuantumParams {
            dim: 9,
            lambda: 1.0,
            hbar: TAU,
            tau: 1.0,
        };
        assert!(build_floquet(&p).is_err());
    }

    #[test]
    fn generic_unitary_without_parity() {
        // Diagonal unitary in an even dimension exercises the generic path.
        let phases = [0.3, 1.7, 4.0, 5.5];
        let m = Mat::<c64>::from_fn(4, 4, |i, j| if i == j { c64::cis(-phases[i]) } else { zero() });
        let f = FloquetSystem::from_unitary(m, 1e-9).unwrap();
        for (a, b) in f.quasi_energies().iter().zip(phases) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }
}
