//! Dense complex-matrix primitives.
//!
//! Everything here works on small square `DMatrix<Complex64>` values. Rank
//! decisions use a relative singular-value cutoff: a direction belongs to the
//! support when its singular value exceeds `tol * sigma_max`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::DensityOperator;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default relative cutoff for rank and support decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Left and right polar isometries are accepted as equal up to this distance.
pub const POLAR_AGREEMENT_TOL: f64 = 1e-6;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut m = zeros(n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = c(*v, 0.0);
    }
    m
}

/// `|u><v|`
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn projector(v: &CVector) -> CMatrix {
    outer(v, v)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // The top eigenvalue of M†M carries full relative precision for σ_max.
    let gram = m.adjoint() * m;
    hermitian_eigen_unchecked(&gram).max().max(0.0).sqrt()
}

pub fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

pub fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    op_norm(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    op_norm(&(u.adjoint() * u - identity(u.nrows())))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order
/// and eigenvectors as the matching columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V f(diag) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = c(f(self.values[j]), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn map_complex(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above `tol * max(|lambda_max|, tiny)`.
    pub fn rank(&self, tol: f64) -> usize {
        let scale = self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            return 0;
        }
        self.values.iter().filter(|v| **v > tol * scale).count()
    }

    pub fn vector(&self, j: usize) -> CVector {
        self.vectors.column(j).into_owned()
    }
}

/// Eigen-decomposition after checking Hermiticity within `tol`.
pub fn hermitian_eigen(m: &CMatrix, tol: f64) -> Result<HermitianEigen> {
    check_square(m)?;
    let dev = hermiticity_deviation(m);
    if dev > tol {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(hermitian_eigen_unchecked(m))
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn hermitian_eigen_unchecked(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: vec![],
            vectors: zeros(0),
        };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors = zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// Principal square root of a Hermitian positive-semidefinite matrix.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything more negative is
/// reported as [`Error::NotPsd`].
pub fn hermitian_sqrt(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eigen(m, tol)?;
    sqrt_from_eigen(&eig, tol)
}

pub(crate) fn sqrt_from_eigen(eig: &HermitianEigen, tol: f64) -> Result<CMatrix> {
    if eig.min() < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(eig.map(|v| v.max(0.0).sqrt()))
}

/// `M^p` for Hermitian PSD `M`, taken on the numerical support only.
///
/// Eigenvalues at or below `tol * lambda_max` map to zero for every `p`:
/// for `p <= 0` this makes `p = -1/2` the pseudo-inverse square root, and for
/// small `p > 0` it keeps round-off eigenvalues (`1e-17^{1/3} ≈ 2e-6`) from
/// being inflated.
pub fn hermitian_power(m: &CMatrix, p: f64, tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eigen(m, tol)?;
    if eig.min() < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    let cutoff = tol * eig.max().max(0.0);
    Ok(eig.map(|v| if v > cutoff { v.powf(p) } else { 0.0 }))
}

/// Eigen-decomposition of the Hermitian dilation `[[0, M], [M†, 0]]`.
///
/// Its eigenvalues are `±σ_i` (plus zeros for non-square `M`) with
/// eigenvectors `(u_i; ±v_i)/√2`. Singular data is taken from here rather
/// than from a direct complex SVD, which was observed to return wrong
/// singular values for nearly rank-one 4×4 inputs; the Hermitian solver
/// resolves small singular values to absolute precision `~1e-16 ‖M‖`.
fn dilation_eigen(m: &CMatrix) -> HermitianEigen {
    let (r, c) = m.shape();
    let mut d = CMatrix::zeros(r + c, r + c);
    d.view_mut((0, r), (r, c)).copy_from(m);
    d.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    hermitian_eigen_unchecked(&d)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return vec![];
    }
    let k = m.nrows().min(m.ncols());
    dilation_eigen(m).values[..k].iter().map(|v| v.max(0.0)).collect()
}

pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    let s = singular_values(m);
    let max = s.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    s.iter().filter(|v| **v > tol * max).count()
}

/// Thin SVD restricted to the numerical support.
pub(crate) struct SupportSvd {
    /// Left singular vectors spanning the left support (columns).
    pub left: CMatrix,
    /// Right singular vectors spanning the right support (columns).
    pub right: CMatrix,
    pub values: Vec<f64>,
}

pub(crate) fn support_svd(m: &CMatrix, tol: f64) -> SupportSvd {
    let (r, c) = m.shape();
    if m.is_empty() {
        return SupportSvd {
            left: CMatrix::zeros(r, 0),
            right: CMatrix::zeros(c, 0),
            values: vec![],
        };
    }
    let eig = dilation_eigen(m);
    let k = r.min(c);
    let max = eig.values[0].max(0.0);
    let keep: Vec<usize> = if max == 0.0 {
        vec![]
    } else {
        (0..k).filter(|&j| eig.values[j] > tol * max).collect()
    };
    let mut left = CMatrix::zeros(r, keep.len());
    let mut right = CMatrix::zeros(c, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        let col = eig.vectors.column(src);
        let u = col.rows(0, r).into_owned();
        let v = col.rows(r, c).into_owned();
        left.set_column(dst, &(&u / c_norm(&u)));
        right.set_column(dst, &(&v / c_norm(&v)));
    }
    SupportSvd {
        left,
        right,
        values: keep.iter().map(|&j| eig.values[j]).collect(),
    }
}

fn c_norm(v: &CVector) -> Complex64 {
    c(v.norm(), 0.0)
}

/// Orthogonal projector onto the range (left support) of `m`.
pub fn support_projector(m: &CMatrix, tol: f64) -> CMatrix {
    let s = support_svd(m, tol);
    &s.left * s.left.adjoint()
}

/// Projector onto the right support of `m`, the range of `m†`.
pub fn right_support_projector(m: &CMatrix, tol: f64) -> CMatrix {
    let s = support_svd(m, tol);
    &s.right * s.right.adjoint()
}

/// Partial isometry `U_r V_r†` of the SVD plus the sum of the kept singular
/// values. Used for the per-step transporter, where only the isometry is needed.
pub(crate) fn svd_isometry(m: &CMatrix, tol: f64) -> (CMatrix, f64) {
    let s = support_svd(m, tol);
    (&s.left * s.right.adjoint(), s.values.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarSide {
    /// `X = U (X†X)^{1/2}`
    Left,
    /// `X = (XX†)^{1/2} U`
    Right,
}

#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub isometry: CMatrix,
    pub positive_part: CMatrix,
    pub side: PolarSide,
}

impl PolarFactors {
    pub fn reconstruct(&self) -> CMatrix {
        match self.side {
            PolarSide::Left => &self.isometry * &self.positive_part,
            PolarSide::Right => &self.positive_part * &self.isometry,
        }
    }
}

/// Polar decomposition with the isometry fixed to vanish on `Ker X`.
///
/// The two sides are computed independently: the left isometry is
/// `X · pinv((X†X)^{1/2})` and the right one `pinv((XX†)^{1/2}) · X`, each
/// from its own Hermitian eigen-decomposition. The SVD of `X` only supplies
/// the numerical rank, so comparing the two sides is a genuine check.
pub fn polar(x: &CMatrix, side: PolarSide, tol: f64) -> Result<PolarFactors> {
    let n = check_square(x)?;
    let rank = numerical_rank(x, tol);
    if rank == 0 {
        return Ok(PolarFactors {
            isometry: zeros(n),
            positive_part: zeros(n),
            side,
        });
    }
    let gram = match side {
        PolarSide::Left => x.adjoint() * x,
        PolarSide::Right => x * x.adjoint(),
    };
    let eig = hermitian_eigen_unchecked(&gram);
    let mut positive = zeros(n);
    let mut pinv = zeros(n);
    for j in 0..rank {
        let v = eig.vector(j);
        let p = outer(&v, &v);
        let s = eig.values[j].max(0.0).sqrt();
        positive += &p * c(s, 0.0);
        pinv += p * c(1.0 / s, 0.0);
    }
    let isometry = match side {
        PolarSide::Left => x * pinv,
        PolarSide::Right => pinv * x,
    };
    Ok(PolarFactors {
        isometry,
        positive_part: positive,
        side,
    })
}

pub fn partial_isometry_deviation(s: &CMatrix) -> f64 {
    op_norm(&(s * s.adjoint() * s - s))
}

pub fn is_partial_isometry(s: &CMatrix, tol: f64) -> bool {
    partial_isometry_deviation(s) <= tol
}

/// `exp(-i t H)` through the eigen-decomposition of `H`.
pub fn unitary_exp(h: &CMatrix, t: f64, tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eigen(h, tol)?;
    Ok(eig.map_complex(|lambda| Complex64::from_polar(1.0, -t * lambda)))
}

/// Uhlmann transition probability `(Tr[(ρ^{1/2} σ ρ^{1/2})^{1/2}])²`.
pub fn transition_probability(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dim(rho.matrix(), sigma.matrix())?;
    // Tr|ρ^{1/2} σ^{1/2}| equals the nested-root expression and avoids taking
    // square roots of round-off eigenvalues.
    let fidelity_root: f64 = singular_values(&(rho.sqrt() * sigma.sqrt())).iter().sum();
    Ok((fidelity_root * fidelity_root).clamp(0.0, 1.0))
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// `arg z` in `(-pi, pi]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
        op_norm(&(a - b))
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = identity(4);
        assert!(dist(&hermitian_sqrt(&id, DEFAULT_TOL).unwrap(), &id) < 1e-14);
        let d = diag_real(&[4.0, 1.0, 0.0, 0.0]);
        let r = hermitian_sqrt(&d, DEFAULT_TOL).unwrap();
        assert!(dist(&r, &diag_real(&[2.0, 1.0, 0.0, 0.0])) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_bad_input() {
        let mut m = identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            hermitian_sqrt(&m, DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
        let neg = diag_real(&[1.0, -0.1]);
        assert!(matches!(
            hermitian_sqrt(&neg, DEFAULT_TOL),
            Err(Error::NotPsd { .. })
        ));
        // round-off negativity is clamped
        let tiny = diag_real(&[1.0, -1e-12]);
        let r = hermitian_sqrt(&tiny, DEFAULT_TOL).unwrap();
        assert!(dist(&r, &diag_real(&[1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn support_projector_cases() {
        assert!(op_norm(&support_projector(&zeros(3), DEFAULT_TOL)) == 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi_plus = CVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]);
        let psi_minus = CVector::from_vec(vec![ZERO, c(s, 0.0), c(-s, 0.0), ZERO]);
        let m = outer(&phi_plus, &psi_minus);
        let p = support_projector(&m, DEFAULT_TOL);
        assert!(dist(&p, &projector(&phi_plus)) < 1e-14);
        let pr = right_support_projector(&m, DEFAULT_TOL);
        assert!(dist(&pr, &projector(&psi_minus)) < 1e-14);
    }

    #[test]
    fn polar_of_unitary_and_psd() {
        let v = unitary_exp(&pauli_y(), 0.3, DEFAULT_TOL).unwrap();
        for side in [PolarSide::Left, PolarSide::Right] {
            let f = polar(&v, side, DEFAULT_TOL).unwrap();
            assert!(dist(&f.isometry, &v) < 1e-12);
            assert!(dist(&f.positive_part, &identity(2)) < 1e-12);
        }
        let d = diag_real(&[2.0, 0.0]);
        for side in [PolarSide::Left, PolarSide::Right] {
            let f = polar(&d, side, DEFAULT_TOL).unwrap();
            assert!(dist(&f.isometry, &diag_real(&[1.0, 0.0])) < 1e-14);
            assert!(dist(&f.positive_part, &d) < 1e-14);
            assert!(dist(&f.reconstruct(), &d) < 1e-14);
        }
    }

    #[test]
    fn polar_of_zero_is_zero() {
        let f = polar(&zeros(3), PolarSide::Left, DEFAULT_TOL).unwrap();
        assert_eq!(op_norm(&f.isometry), 0.0);
    }

    #[test]
    fn partial_isometry_examples() {
        assert!(is_partial_isometry(&identity(3), 1e-12));
        assert!(is_partial_isometry(&diag_real(&[1.0, 0.0]), 1e-12));
        assert!(!is_partial_isometry(&diag_real(&[2.0, 0.0]), 1e-12));
    }

    #[test]
    fn exponential_examples() {
        let h = pauli_x();
        assert!(dist(&unitary_exp(&h, 0.0, DEFAULT_TOL).unwrap(), &identity(2)) < 1e-15);
        // scalar exponentials on the eigenbasis of sigma_z
        let u = unitary_exp(&pauli_z(), std::f64::consts::FRAC_PI_2, DEFAULT_TOL).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.0, -1.0), ZERO, ZERO, c(0.0, 1.0)]);
        assert!(dist(&u, &expected) < 1e-14);
        let u = unitary_exp(&pauli_z(), std::f64::consts::PI, DEFAULT_TOL).unwrap();
        assert!(dist(&u, &(-identity(2))) < 1e-14);
        assert!(matches!(
            unitary_exp(&CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]), 1.0, DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sigma_y_exponential_is_the_first_qubit_flip() {
        let h = kron(&pauli_y(), &identity(2));
        let u = unitary_exp(&h, std::f64::consts::FRAC_PI_2, DEFAULT_TOL).unwrap();
        // (|0>,|1>) -> (|1>, -|0>) on the first factor
        let flip = CMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]);
        assert!(dist(&u, &kron(&flip, &identity(2))) < 1e-14);
    }

    #[test]
    fn principal_arg_of_negative_real_is_pi() {
        assert_abs_diff_eq!(principal_arg(c(-2.0, 0.0)), std::f64::consts::PI);
        assert_abs_diff_eq!(principal_arg(c(-2.0, -0.0)), std::f64::consts::PI);
        assert_abs_diff_eq!(phase_distance(3.0, -3.0), std::f64::consts::TAU - 6.0, epsilon = 1e-15);
    }
}
