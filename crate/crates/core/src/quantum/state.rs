use faer::{c64, Mat, MatRef, Side};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

pub(crate) fn hermitian_defect(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn trace(m: MatRef<'_, c64>) -> c64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Hermitian, positive, unit-trace matrix.
#[derive(Debug, Clone)]
pub struct DensityState {
    matrix: Mat<c64>,
}

impl DensityState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: Mat<c64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "matrix must be square and non-empty, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermitian_defect(matrix.as_ref());
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = trace(matrix.as_ref());
        if (tr - c64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = matrix
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numeric(format!("positivity check failed: {e:?}")))?;
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("smallest eigenvalue {min:e} is negative")));
        }
        Ok(Self { matrix })
    }

    /// Trusted constructor for matrices positive and normalized by construction.
    pub(crate) fn from_matrix_unchecked(matrix: Mat<c64>) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for `ψ` normalized to unit length.
    pub fn pure(psi: &[c64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("state vector must be non-zero and finite".into()));
        }
        let n = psi.len();
        let u: Vec<c64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            matrix: Mat::from_fn(n, n, |i, j| u[i] * u[j].conj()),
        })
    }

    /// `I/N`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let w = 1.0 / dim as f64;
        Self {
            matrix: Mat::from_fn(dim, dim, |i, j| if i == j { c64::new(w, 0.0) } else { c64::new(0.0, 0.0) }),
        }
    }

    /// Projector on basis vector `index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::param("index", format!("{index} outside dimension {dim}")));
        }
        let mut psi = vec![c64::new(0.0, 0.0); dim];
        psi[index] = c64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.matrix
    }
}

/// Hermitian observable with a label naming it within the relevant set.
#[derive(Debug, Clone)]
pub struct ObservableMatrix {
    matrix: Mat<c64>,
    pub label: String,
}

impl ObservableMatrix {
    pub fn new(matrix: Mat<c64>, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::param("observable", "matrix must be square"));
        }
        let defect = hermitian_defect(matrix.as_ref());
        if defect > HERMITIAN_TOL {
            return Err(Error::param("observable", format!("not Hermitian (defect {defect:e})")));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: Mat::identity(dim, dim),
            label: "identity".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }
}

/// `Tr(ρ O)`; any imaginary residue is checked against
/// [`IMAGINARY_RESIDUE_TOL`] and then dropped.
pub fn expectation(rho: &DensityState, obs: &ObservableMatrix) -> Result<f64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: obs.dim(),
        });
    }
    let (r, o) = (rho.matrix(), obs.matrix());
    let n = rho.dim();
    let mut acc = c64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            acc += r[(i, j)] * o[(j, i)];
        }
    }
    if acc.im.abs() >= IMAGINARY_RESIDUE_TOL {
        return Err(Error::HermiticityViolation { residue: acc.im.abs() });
    }
    Ok(acc.re)
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn haar_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<c64> {
    let mut v: Vec<c64> = (0..dim)
        .map(|_| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}
