//! Seeded random instances for property checks: unitaries, Hermitian
//! generators, density operators and partial isometries.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{self, c, op_norm, CMatrix};
use crate::state::DensityOperator;

pub type SeededRng = ChaCha8Rng;

/// Generator seeded from `seed` and a stream label, so that independent
/// checks do not share random draws.
pub fn rng_for(seed: u64, label: &str) -> SeededRng {
    // FNV-1a, stable across platforms and toolchains.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(label.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary from the QR decomposition of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, dim, dim).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hermitian matrix with operator norm 1.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    let h = linalg::hermitian_part(&g);
    let n = op_norm(&h);
    h * c(1.0 / n, 0.0)
}

/// Hermitian matrix of operator norm 1 whose diagonal vanishes in the basis
/// given by the columns of `basis`. Such a generator transports every basis
/// vector in parallel for all times.
pub fn off_diagonal_hermitian<R: Rng + ?Sized>(rng: &mut R, basis: &CMatrix) -> CMatrix {
    let dim = basis.nrows();
    let mut h = linalg::hermitian_part(&gaussian_matrix(rng, dim, dim));
    for i in 0..dim {
        h[(i, i)] = c(0.0, 0.0);
    }
    let n = op_norm(&h);
    let scale = if n > 0.0 { 1.0 / n } else { 0.0 };
    basis * h * basis.adjoint() * c(scale, 0.0)
}

/// Density operator of the given rank with random eigenvectors and
/// eigenvalues drawn uniformly from the simplex.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let rank = rank.clamp(1, dim);
    let v = unitary(rng, dim);
    let weights: Vec<f64> = (0..rank)
        .map(|_| {
            let w: f64 = Exp1.sample(rng);
            w + 0.05
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut spectrum: Vec<f64> = weights.iter().map(|w| w / total).collect();
    spectrum.resize(dim, 0.0);
    DensityOperator::from_spectrum(&spectrum, &v, 1e-9).expect("valid random spectrum")
}

/// Partial isometry `V_k W_k†` of rank `rank` built from two random unitaries.
pub fn partial_isometry<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> CMatrix {
    let v = unitary(rng, dim);
    let w = unitary(rng, dim);
    let k = rank.min(dim);
    v.columns(0, k) * w.columns(0, k).adjoint()
}

/// Gauge isometry that is unitary on the support of `rho` (so it purifies
/// the same state) and an arbitrary partial isometry on its kernel.
pub fn support_preserving_gauge<R: Rng + ?Sized>(rng: &mut R, rho: &DensityOperator, tol: f64) -> CMatrix {
    let eig = rho.eigen();
    let dim = rho.dim();
    let r = eig.rank(tol);
    let support = eig.vectors.columns(0, r).into_owned();
    let kernel = eig.vectors.columns(r, dim - r).into_owned();
    let inner = unitary(rng, r);
    let mut s = &support * inner * support.adjoint();
    if dim > r {
        let k = rng.random_range(0..=dim - r);
        s += &kernel * partial_isometry(rng, dim - r, k) * kernel.adjoint();
    }
    s
}
