//! Density operators, amplitudes and gauge isometries.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, hermitian_eigen_unchecked, op_norm, CMatrix, CVector, HermitianEigen,
};

/// Hermitian, positive-semidefinite, unit-trace operator.
///
/// The eigen-decomposition and square root are computed on first use and
/// cached.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    eigen: OnceLock<HermitianEigen>,
    sqrt: OnceLock<CMatrix>,
}

impl PartialEq for DensityOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityOperator {
    /// Validates `matrix` within `tol` and stores its Hermitian part.
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        linalg::check_square(&matrix)?;
        if matrix.nrows() == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        let dev = linalg::hermiticity_deviation(&matrix);
        if dev > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {dev:.3e})"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace is {:.12}, expected 1",
                tr.re
            )));
        }
        let rho = Self::from_hermitian_unchecked(linalg::hermitian_part(&matrix));
        let min = rho.eigen().min();
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_hermitian_unchecked(matrix: CMatrix) -> Self {
        Self {
            matrix,
            eigen: OnceLock::new(),
            sqrt: OnceLock::new(),
        }
    }

    /// `|psi><psi|` for a unit vector.
    pub fn pure(psi: &CVector, tol: f64) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!(
                "state vector has norm {norm:.12}"
            )));
        }
        Self::new(linalg::projector(psi), tol)
    }

    /// `sum_j lambda_j |v_j><v_j|` with `v_j` the columns of `vectors`.
    pub fn from_spectrum(eigenvalues: &[f64], vectors: &CMatrix, tol: f64) -> Result<Self> {
        if vectors.ncols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                found: vectors.ncols(),
            });
        }
        let gram = vectors.adjoint() * vectors;
        let dev = op_norm(&(gram - linalg::identity(vectors.ncols())));
        if dev > tol.max(1e-10) {
            return Err(Error::InvalidState(format!(
                "eigenvectors are not orthonormal (deviation {dev:.3e})"
            )));
        }
        let mut m = CMatrix::zeros(vectors.nrows(), vectors.nrows());
        for (j, lambda) in eigenvalues.iter().enumerate() {
            let v = vectors.column(j).into_owned();
            m += linalg::projector(&v) * c(*lambda, 0.0);
        }
        Self::new(m, tol)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_hermitian_unchecked(linalg::identity(dim) * c(1.0 / dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eigen(&self) -> &HermitianEigen {
        self.eigen
            .get_or_init(|| hermitian_eigen_unchecked(&self.matrix))
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen().values
    }

    /// `rho^{1/2}`, vanishing outside the numerical support.
    ///
    /// Eigenvalues at or below `DEFAULT_TOL * lambda_max` are treated as
    /// zero: a round-off eigenvalue of `1e-17` would otherwise contribute
    /// `3e-9` to the root and leak into the kernel during transport.
    pub fn sqrt(&self) -> &CMatrix {
        self.sqrt.get_or_init(|| {
            let eig = self.eigen();
            let cutoff = linalg::DEFAULT_TOL * eig.max().max(0.0);
            eig.map(|v| if v > cutoff { v.sqrt() } else { 0.0 })
        })
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigen().rank(tol)
    }

    pub fn support_projector(&self, tol: f64) -> CMatrix {
        let eig = self.eigen();
        let r = eig.rank(tol);
        let mut p = CMatrix::zeros(self.dim(), self.dim());
        for j in 0..r {
            p += linalg::projector(&eig.vector(j));
        }
        p
    }

    /// `U rho U†`. The unitary is trusted.
    pub fn evolve(&self, u: &CMatrix) -> Result<Self> {
        linalg::check_same_dim(&self.matrix, u)?;
        let m = u * &self.matrix * u.adjoint();
        Ok(Self::from_hermitian_unchecked(linalg::hermitian_part(&m)))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        op_norm(&(&self.matrix - &other.matrix))
    }
}

/// Purification `W` with `rho = W W†`, stored as a `dim x dim` operator on
/// `H ⊗ H*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitude {
    matrix: CMatrix,
}

impl Amplitude {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        linalg::check_square(&matrix)?;
        DensityOperator::new(&matrix * matrix.adjoint(), tol)?;
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The purified state `W W†`.
    pub fn state(&self) -> DensityOperator {
        DensityOperator::from_hermitian_unchecked(linalg::hermitian_part(
            &(&self.matrix * self.matrix.adjoint()),
        ))
    }
}

/// Time-independent partial isometry `S` acting on the ancilla side.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeIsometry {
    matrix: CMatrix,
}

impl GaugeIsometry {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        linalg::check_square(&matrix)?;
        let deviation = linalg::partial_isometry_deviation(&matrix);
        if deviation > tol {
            return Err(Error::NotPartialIsometry { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `W(0) = rho^{1/2}`, the purification with trivial phase factor on the
/// support.
pub fn standard_purification(rho: &DensityOperator) -> Amplitude {
    Amplitude::from_matrix_unchecked(rho.sqrt().clone())
}

/// `W ↦ W S`. Fails when `S` does not cover the right support of `W`, in
/// which case `W S` no longer purifies `W W†`.
pub fn apply_gauge(w: &Amplitude, s: &GaugeIsometry, tol: f64) -> Result<Amplitude> {
    linalg::check_same_dim(w.matrix(), s.matrix())?;
    let ws = w.matrix() * s.matrix();
    let before = w.matrix() * w.matrix().adjoint();
    let after = &ws * ws.adjoint();
    let deviation = op_norm(&(after - before));
    if deviation > tol {
        return Err(Error::SupportMismatch { deviation });
    }
    Ok(Amplitude::from_matrix_unchecked(ws))
}

/// How far `W†W2` is from being Hermitian positive-semidefinite.
///
/// Returns the larger of `‖M − M†‖` and the magnitude of the most negative
/// eigenvalue of the Hermitian part of `M = W†W2`.
pub fn parallelity_residual(w: &Amplitude, w2: &Amplitude) -> f64 {
    overlap_residual(&(w.matrix().adjoint() * w2.matrix()))
}

pub(crate) fn overlap_residual(m: &CMatrix) -> f64 {
    let non_hermitian = linalg::hermiticity_deviation(m);
    let negativity = (-hermitian_eigen_unchecked(m).min()).max(0.0);
    non_hermitian.max(negativity)
}
