//! Randomized invariants, shrinkable by proptest. Random matrices come from
//! the crate's seeded generators; proptest drives the seed and the sizes.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use holonomy_lab::evolution::{density_path, EvolutionSpec, TimeGrid};
use holonomy_lab::linalg::{
    self, hermitian_sqrt, op_norm, partial_isometry_deviation, polar, transition_probability, PolarSide,
    DEFAULT_TOL,
};
use holonomy_lab::offdiag::{alternative_ordering, diagnose, off_diagonal_invariant};
use holonomy_lab::random::{self, rng_for};
use holonomy_lab::report::{num, round_sig, scalar_text};
use holonomy_lab::state::GaugeIsometry;
use holonomy_lab::transport::{discrete_holonomy, TransportResult};

fn transported(seed: u64, dim: usize, ranks: &[usize], n: usize) -> Vec<(holonomy_lab::state::DensityOperator, TransportResult)> {
    let mut rng = rng_for(seed, "properties-family");
    let h = random::hermitian(&mut rng, dim);
    let spec = EvolutionSpec::static_hamiltonian(h, 1.0, DEFAULT_TOL).unwrap();
    let grid = TimeGrid::uniform(1.0, n).unwrap();
    ranks
        .iter()
        .map(|&r| {
            let rho = random::density(&mut rng, dim, r);
            let res = discrete_holonomy(&density_path(&rho, &spec, &grid).unwrap(), DEFAULT_TOL).unwrap();
            (rho, res)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn left_and_right_polar_isometries_coincide(seed in any::<u64>(), dim in 1usize..6, rank_frac in 0.0f64..1.0) {
        let mut rng = rng_for(seed, "polar");
        let r = 1 + ((dim - 1) as f64 * rank_frac).round() as usize;
        let x = random::gaussian_matrix(&mut rng, dim, r) * random::gaussian_matrix(&mut rng, r, dim);
        let left = polar(&x, PolarSide::Left, DEFAULT_TOL).unwrap();
        let right = polar(&x, PolarSide::Right, DEFAULT_TOL).unwrap();
        prop_assert!(op_norm(&(&left.isometry - &right.isometry)) < 1e-8);
        prop_assert!(partial_isometry_deviation(&left.isometry) < 1e-9);
        let scale = op_norm(&x).max(1.0);
        prop_assert!(op_norm(&(left.reconstruct() - &x)) / scale < 1e-9);
        prop_assert!(op_norm(&(right.reconstruct() - &x)) / scale < 1e-9);
    }

    #[test]
    fn square_roots_square_back(seed in any::<u64>(), dim in 1usize..6, rank in 1usize..6) {
        let mut rng = rng_for(seed, "sqrt");
        let rho = random::density(&mut rng, dim, rank.min(dim));
        let s = hermitian_sqrt(rho.matrix(), DEFAULT_TOL).unwrap();
        prop_assert!(op_norm(&(&s * &s - rho.matrix())) < 1e-12);
        prop_assert!(op_norm(&(rho.sqrt() * rho.sqrt() - rho.matrix())) < 1e-8);
    }

    #[test]
    fn transition_probability_is_symmetric_and_bounded(seed in any::<u64>(), dim in 1usize..5) {
        let mut rng = rng_for(seed, "fidelity");
        let a = random::density(&mut rng, dim, dim);
        let b = random::density(&mut rng, dim, 1 + (seed as usize) % dim);
        let ab = transition_probability(&a, &b).unwrap();
        let ba = transition_probability(&b, &a).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
        assert_abs_diff_eq!(ab, ba, epsilon = 1e-10);
        assert_abs_diff_eq!(transition_probability(&a, &a).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn invariants_are_gauge_invariant(seed in any::<u64>(), dim in 2usize..5, r1 in 1usize..5, r2 in 1usize..5) {
        let family = transported(seed, dim, &[r1.min(dim), r2.min(dim)], 60);
        let refs: Vec<_> = family.iter().map(|(_, r)| r).collect();
        let x = off_diagonal_invariant(&refs).unwrap();
        let mut rng = rng_for(seed, "properties-gauge");
        let gauged: Vec<_> = family
            .iter()
            .map(|(rho, r)| {
                let s = GaugeIsometry::new(random::support_preserving_gauge(&mut rng, rho, DEFAULT_TOL), 1e-9).unwrap();
                r.gauged(&s, 1e-9).unwrap()
            })
            .collect();
        let refs: Vec<_> = gauged.iter().collect();
        prop_assert!(op_norm(&(off_diagonal_invariant(&refs).unwrap().operator - &x.operator)) < 1e-10);
    }

    #[test]
    fn cyclic_ordering_preserves_the_trace(seed in any::<u64>(), dim in 2usize..5, l in 1usize..4) {
        let ranks: Vec<usize> = (0..l).map(|k| 1 + (seed as usize + k) % dim).collect();
        let family = transported(seed, dim, &ranks, 60);
        let refs: Vec<_> = family.iter().map(|(_, r)| r).collect();
        let x = off_diagonal_invariant(&refs).unwrap();
        let y = alternative_ordering(&refs).unwrap();
        prop_assert!((linalg::trace(&y) - linalg::trace(&x.operator)).norm() < 1e-10);
    }

    #[test]
    fn orthogonal_supports_force_a_vanishing_trace(seed in any::<u64>(), dim in 2usize..6) {
        // X = |a><b| with a ⟂ b: left and right supports are orthogonal.
        let mut rng = rng_for(seed, "nodal");
        let u = random::unitary(&mut rng, dim);
        let x = linalg::outer(&u.column(0).into_owned(), &u.column(1).into_owned());
        let x = holonomy_lab::offdiag::OffDiagInvariant::from_constituents(vec![x], vec![1]).unwrap();
        let d = diagnose(&x, DEFAULT_TOL);
        prop_assert!(d.support_overlap < 1e-9);
        prop_assert!(d.trace_magnitude < 1e-8);
        prop_assert!(d.phase.is_none());
    }

    #[test]
    fn printed_numbers_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let r = round_sig(x);
        prop_assert_eq!(round_sig(r), r);
        let text = scalar_text(&num(x));
        let parsed: f64 = text.parse().unwrap();
        prop_assert_eq!(parsed, r);
        if x != 0.0 {
            prop_assert!(((r - x) / x).abs() <= 5e-12);
        }
    }
}
