//! The two-qubit spin-flip example checked piece by piece against direct
//! matrix oracles written out in the Bell basis.

use std::f64::consts::{FRAC_PI_2, PI};

use holonomy_lab::compare::{interferometric_offdiag_phase, PermutedFamily};
use holonomy_lab::evolution::{density_path, TimeGrid};
use holonomy_lab::linalg::{
    self, c, hermitian_sqrt, op_norm, outer, polar, projector, support_projector, transition_probability, CMatrix,
    PolarSide, DEFAULT_TOL,
};
use holonomy_lab::offdiag::{alternative_ordering, holonomy_isometry, off_diagonal_invariant};
use holonomy_lab::scenarios::{
    bell_mixture, closed_form_b_r1, phi_minus, phi_plus, psi_minus, psi_plus, rotating_spec, spin_flip_unitary,
    static_spec, BellScenario, Variant,
};
use holonomy_lab::state::DensityOperator;
use holonomy_lab::transport::{discrete_holonomy, solve_ancilla_gauge, transport_equation_residual, AncillaGauge};

const EPS: f64 = 0.5;

fn rho1() -> DensityOperator {
    bell_mixture(EPS).unwrap()
}

/// `ρ1(τ) = (|Φ+><Φ+| + ε|Φ−><Φ−|)/(1+ε)` after the flip.
fn rho1_tau() -> CMatrix {
    (projector(&phi_plus()) + projector(&phi_minus()) * c(EPS, 0.0)) * c(1.0 / (1.0 + EPS), 0.0)
}

fn on_support(m: &CMatrix, p: &CMatrix) -> CMatrix {
    p * m * p
}

#[test]
fn square_root_of_the_mixture() {
    let expected = (projector(&psi_minus()) + projector(&psi_plus()) * c(EPS.sqrt(), 0.0)) * c(1.0 / 1.5_f64.sqrt(), 0.0);
    let s = hermitian_sqrt(rho1().matrix(), DEFAULT_TOL).unwrap();
    assert!(op_norm(&(&s - &expected)) < 1e-12);
    assert!(op_norm(&(&s * &s - rho1().matrix())) < 1e-12);
    assert!(op_norm(&(rho1().sqrt() - &expected)) < 1e-12);
}

#[test]
fn static_path_ends_on_the_flipped_mixture_and_is_orthogonal_to_its_start() {
    let grid = TimeGrid::uniform(FRAC_PI_2, 50).unwrap();
    let path = density_path(&rho1(), &static_spec(), &grid).unwrap();
    assert!(op_norm(&(path.last().unwrap().matrix() - rho1_tau())) < 1e-12);
    let end = DensityOperator::new(rho1_tau(), DEFAULT_TOL).unwrap();
    assert!(transition_probability(&rho1(), &end).unwrap() < 1e-12);
    // The flip maps ρ1(τ) back onto ρ1(0).
    assert!(op_norm(&(end.evolve(&spin_flip_unitary()).unwrap().matrix() - rho1().matrix())) < 1e-12);
}

#[test]
fn x1_supports_are_the_phi_subspace_on_the_left() {
    let x1 = spin_flip_unitary() * rho1().matrix();
    let p = support_projector(&x1, DEFAULT_TOL);
    let expected = projector(&phi_plus()) + projector(&phi_minus());
    assert!(op_norm(&(p - expected)) < 1e-12);
}

#[test]
fn x12_isometry_is_minus_the_phi_projector() {
    let u = spin_flip_unitary();
    let rho2 = rho1_tau();
    let x12 = &u * rho1().matrix() * &u * &rho2;
    let expected = (projector(&phi_plus()) + projector(&phi_minus())) * c(-1.0, 0.0);
    let left = polar(&x12, PolarSide::Left, DEFAULT_TOL).unwrap();
    let right = polar(&x12, PolarSide::Right, DEFAULT_TOL).unwrap();
    assert!(op_norm(&(&left.isometry - &expected)) < 1e-10);
    assert!(op_norm(&(&right.isometry - &expected)) < 1e-10);

    let grid = TimeGrid::uniform(FRAC_PI_2, 400).unwrap();
    let spec = static_spec();
    let r1 = discrete_holonomy(&density_path(&rho1(), &spec, &grid).unwrap(), DEFAULT_TOL).unwrap();
    let rho2_state = DensityOperator::new(rho2, DEFAULT_TOL).unwrap();
    let r2 = discrete_holonomy(&density_path(&rho2_state, &spec, &grid).unwrap(), DEFAULT_TOL).unwrap();
    let x = off_diagonal_invariant(&[&r1, &r2]).unwrap();
    assert!(op_norm(&(holonomy_isometry(&x, DEFAULT_TOL).unwrap() - expected)) < 1e-8);

    let y = alternative_ordering(&[&r1, &r2]).unwrap();
    assert!((linalg::trace(&y) - linalg::trace(&x.operator)).norm() < 1e-10);
}

#[test]
fn transport_equation_on_the_static_and_rotating_drives() {
    let rho = rho1();
    let residual = |spec: &_, tau: f64, n: usize, rotating_gauge: bool| {
        let grid = TimeGrid::uniform(tau, n).unwrap();
        let gauge = if rotating_gauge {
            let s = BellScenario::new(EPS, Variant::Rotating);
            AncillaGauge::from_fn(&grid, |t| closed_form_b_r1(&s, t).unwrap())
        } else {
            AncillaGauge::constant(&grid, &linalg::identity(4))
        };
        transport_equation_residual(spec, &gauge, &rho).unwrap()
    };
    // Static drive: the trivial gauge already transports in parallel.
    let s = static_spec();
    assert!(residual(&s, FRAC_PI_2, 2000, false) < 1e-8);

    // Rotating drive: the trivial gauge fails, the closed form converges.
    let r = rotating_spec(1.0).unwrap();
    assert!(residual(&r, PI, 2000, false) > 0.01);
    let coarse = residual(&r, PI, 1000, true);
    let fine = residual(&r, PI, 2000, true);
    assert!(fine < coarse && coarse / fine > 3.5, "{coarse} {fine}");
}

#[test]
fn solved_gauges_recover_the_known_ones() {
    let rho = rho1();
    let p = rho.support_projector(DEFAULT_TOL);

    let grid = TimeGrid::uniform(FRAC_PI_2, 2000).unwrap();
    let g = solve_ancilla_gauge(&static_spec(), &rho, &grid, DEFAULT_TOL).unwrap();
    let worst = g
        .samples
        .iter()
        .map(|b| op_norm(&(on_support(b, &p) - &p)))
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");

    let grid = TimeGrid::uniform(PI, 10_000).unwrap();
    let g = solve_ancilla_gauge(&rotating_spec(1.0).unwrap(), &rho, &grid, DEFAULT_TOL).unwrap();
    let s = BellScenario::new(EPS, Variant::Rotating);
    let worst = grid
        .times()
        .iter()
        .zip(&g.samples)
        .map(|(&t, b)| op_norm(&(on_support(b, &p) - on_support(&closed_form_b_r1(&s, t).unwrap(), &p))))
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn interferometric_phase_of_the_swapped_bell_family() {
    // {ρ1(0), ρ1(0) with its two eigenvectors swapped} under the flip.
    let basis = CMatrix::from_columns(&[psi_minus(), psi_plus(), phi_plus(), phi_minus()]);
    let weights = vec![1.0 / (1.0 + EPS), EPS / (1.0 + EPS), 0.0, 0.0];
    let family = PermutedFamily::new(weights.clone(), basis, vec![vec![0, 1, 2, 3], vec![1, 0, 2, 3]], DEFAULT_TOL).unwrap();
    let u = spin_flip_unitary();
    let g = interferometric_offdiag_phase(&u, &family, 2, DEFAULT_TOL).unwrap();

    // Brute-force trace of U ρa^{1/2} U ρb^{1/2}.
    let root = |a: &[f64]| {
        projector(&psi_minus()) * c(a[0].sqrt(), 0.0) + projector(&psi_plus()) * c(a[1].sqrt(), 0.0)
    };
    let ra = root(&weights);
    let rb = root(&[weights[1], weights[0]]);
    let brute = linalg::trace(&(&u * ra * &u * rb));
    assert!((g.trace - brute).norm() < 1e-12);
    // U_sf maps the Ψ subspace onto the Φ subspace, so the trace vanishes.
    assert!(brute.norm() < 1e-12);
    assert!(g.phase().is_none());
}

#[test]
fn first_qubit_flip_maps_bell_states() {
    let u = spin_flip_unitary();
    assert!((&u * psi_minus() - phi_plus()).norm() < 1e-15);
    assert!(op_norm(&(&u * &u + linalg::identity(4))) < 1e-15);
    let x1 = &u * rho1().matrix();
    let expected = (outer(&phi_plus(), &psi_minus()) - outer(&phi_minus(), &psi_plus()) * c(EPS, 0.0)) * c(1.0 / 1.5, 0.0);
    assert!(op_norm(&(x1 - expected)) < 1e-14);
}
