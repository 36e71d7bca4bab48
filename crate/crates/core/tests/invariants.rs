//! Structural invariants exercised through the public API on randomized inputs.

use num_complex::Complex;
use proptest::prelude::*;
use spectral_eta::eta_zeta::{finite_xi, relative_eta_function, relative_eta_invariant, EtaConfig};
use spectral_eta::flow_shift::{spectral_flow, FlowConfig};
use spectral_eta::gluing::{build_theta_bvp, distance_to_integer};
use spectral_eta::lattice::{
    build_aps_halfline, build_dirac_1d, make_pair, DerivativeScheme, DiracOperator, Grid, Potential, Side, Topology,
};
use spectral_eta::random::{random_operator_pair, random_path, random_unitary, seeded};
use spectral_eta::spectrum::{eigensolve, eigensolve_matrix, relative_trace, SpectralPair};
use spectral_eta::Matrix;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Mass-`m` line with a scalar well of depth `depth` left of the middle,
/// constant near the centre so any cut there is product-like.
fn line(nodes: usize, mass: f64, depth: f64) -> (DiracOperator<f64>, Potential<f64>) {
    let g = Grid::centered_on_length(1, nodes, 16.0, Topology::TruncatedLine).unwrap();
    let v = g.sample(|x: &[f64]| mass + 0.5 * (x[0].abs() - 2.0).max(0.0));
    let a0 = build_dirac_1d(&g, &Potential::sigma3(&v).unwrap(), DerivativeScheme::CentralDifference).unwrap();
    let w = g.sample(|x: &[f64]| if (x[0] + 4.5).abs() < 1.5 { depth } else { 0.0 });
    (a0, Potential::scalar(&w, 2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sigma3_models_are_hermitian_with_symmetric_spectrum(
        values in prop::collection::vec(-2.0f64..2.0, 8..40),
        periodic in any::<bool>(),
    ) {
        let n = values.len();
        let topology = if periodic { Topology::Periodic } else { Topology::TruncatedLine };
        let g = Grid::centered(1, n, 0.3, topology).unwrap();
        let a = build_dirac_1d(&g, &Potential::sigma3(&values).unwrap(), DerivativeScheme::CentralDifference).unwrap();
        let m = a.matrix();
        prop_assert!(m.hermiticity_defect() <= 1e-12 * m.max_abs());
        // σ₂ anticommutes with both σ₁ and σ₃, so the spectrum is even.
        let ev = eigensolve(&a, false).unwrap().eigenvalues().to_vec();
        let neg = sorted(ev.iter().map(|x| -x).collect());
        for (x, y) in sorted(ev).iter().zip(&neg) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn pair_difference_lives_on_its_support(seed in 0u64..10_000) {
        let pair = random_operator_pair::<f64>(&mut seeded(seed), 40, 8, 1.0).unwrap();
        let d = pair.a1.matrix().sub(pair.a0.matrix());
        let block = 8;
        for i in 0..40 {
            for j in 0..40 {
                let inside = pair.diff_support().contains(&(i / block)) && pair.diff_support().contains(&(j / block));
                if !inside {
                    prop_assert_eq!(d[(i, j)], Complex::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn eta_value_is_scale_invariant(seed in 0u64..10_000, c in 0.2f64..5.0) {
        let pair = random_operator_pair::<f64>(&mut seeded(seed), 32, 8, 1.0).unwrap();
        let cfg = EtaConfig::default();
        let base = relative_eta_invariant(&SpectralPair::from_pair(&pair).unwrap(), 1, &cfg).unwrap();
        let scaled = SpectralPair::from_operators(&pair.a0.scaled(c), &pair.a1.scaled(c)).unwrap();
        let e = relative_eta_invariant(&scaled, 1, &cfg).unwrap();
        prop_assert!((e.finite_part - base.finite_part).abs() < 1e-8);
    }

    #[test]
    fn eta_function_is_unitarily_invariant(seed in 0u64..10_000, re in 0.5f64..3.0, im in -1.0f64..1.0) {
        let mut rng = seeded(seed);
        let pair = random_operator_pair::<f64>(&mut rng, 24, 8, 1.0).unwrap();
        let u = random_unitary::<f64>(&mut rng, 24).unwrap();
        let cfg = EtaConfig::default();
        let s = Complex::new(re, im);
        let e = relative_eta_function(&SpectralPair::from_pair(&pair).unwrap(), 1, s, &cfg).unwrap();
        let conj = SpectralPair::from_operators(&pair.a0.conjugated(&u), &pair.a1.conjugated(&u)).unwrap();
        let f = relative_eta_function(&conj, 1, s, &cfg).unwrap();
        prop_assert!((e - f).norm() <= 1e-9 * e.norm().max(1.0));
    }

    #[test]
    fn weighted_relative_trace_is_antisymmetric(seed in 0u64..10_000, t in 0.01f64..3.0) {
        let pair = random_operator_pair::<f64>(&mut seeded(seed), 32, 8, 1.0).unwrap();
        let sp = SpectralPair::from_pair(&pair).unwrap();
        let fwd = relative_trace(&sp.s0, &sp.s1, t, true).unwrap();
        let back = relative_trace(&sp.s1, &sp.s0, t, true).unwrap();
        prop_assert!((fwd + back).abs() < 1e-12 * fwd.abs().max(1.0));
    }

    #[test]
    fn reduced_eta_equals_spectral_flow(seed in 0u64..10_000) {
        let path = random_path::<f64>(&mut seeded(seed), 32, 8, 2.0).unwrap();
        let s0 = eigensolve_matrix(path.start(), false).unwrap();
        let s1 = eigensolve_matrix(path.end(), false).unwrap();
        let sp = SpectralPair::new(s0, s1);
        let e = relative_eta_invariant(&sp, 1, &EtaConfig::default()).unwrap();
        let xi = 0.5 * (e.finite_part + e.kernel_dims.1 as f64 - e.kernel_dims.0 as f64);
        let sf = spectral_flow(&path, &FlowConfig::default()).unwrap().sf;
        prop_assert!((xi - sf as f64).abs() < 1e-8, "xi {} sf {}", xi, sf);
        prop_assert!((xi - sp.negative_count_xi()).abs() < 1e-8);
    }

    #[test]
    fn theta_family_is_self_adjoint(theta in -1.5f64..1.5, mass in 0.5f64..2.0) {
        let (a0, _) = line(40, mass, 0.0);
        let bvp = build_theta_bvp(&a0, 20, theta).unwrap();
        prop_assert!(bvp.self_adjointness_defect() < 1e-12);
        prop_assert!(bvp.unitarity_defect() < 1e-12);
        prop_assert!(bvp.projection_defect() < 1e-12);
    }

    #[test]
    fn compact_pieces_have_half_integer_xi(depth in -6.0f64..0.0, left in any::<bool>()) {
        let (a0, patch) = line(40, 1.0, depth);
        let pair = make_pair(&a0, &patch).unwrap();
        let side = if left { Side::Left } else { Side::Right };
        let piece = build_aps_halfline(&pair.a1, 20, side, false).unwrap();
        let xi = finite_xi(&eigensolve(&piece, false).unwrap());
        prop_assert!(distance_to_integer(2.0 * xi) == 0.0);
    }
}

#[test]
fn explicit_matrices_round_trip_through_pairs() {
    let a0 = DiracOperator::<f64>::from_matrix(Matrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]), 1, 1).unwrap();
    let patch = Potential::scalar(&[-3.0, 0.0], 1).unwrap();
    let pair = make_pair(&a0, &patch).unwrap();
    assert_eq!(pair.diff_support(), &[0]);
    let e = relative_eta_invariant(&SpectralPair::from_pair(&pair).unwrap(), 1, &EtaConfig::default()).unwrap();
    assert!((e.finite_part + 2.0f64).abs() < 1e-10);
}
