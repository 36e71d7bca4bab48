//! The pipelines instantiated in single precision agree with double precision
//! to single-precision accuracy.

use spectral_eta::eta_zeta::{relative_eta_invariant, EtaConfig};
use spectral_eta::flow_shift::{spectral_flow, FlowConfig};
use spectral_eta::gluing::{build_theta_bvp, gluing_check};
use spectral_eta::lattice::{build_dirac_1d, make_pair, DerivativeScheme, Grid, Potential, Topology};
use spectral_eta::random::{random_operator_pair, random_path, seeded};
use spectral_eta::spectrum::SpectralPair;
use spectral_eta::{OperatorPair32, Real};

#[test]
fn eta_invariant_in_f32_matches_signature_difference() {
    for seed in 0..5 {
        let pair = random_operator_pair::<f32>(&mut seeded(seed), 32, 8, 1.0).unwrap();
        let sp = SpectralPair::from_pair(&pair).unwrap();
        let e = relative_eta_invariant(&sp, 1, &EtaConfig::default()).unwrap();
        let expected = sp.signature_difference() as f32;
        assert!((e.finite_part - expected).abs() < 1e-3, "seed {seed}: {} vs {expected}", e.finite_part);
    }
}

#[test]
fn spectral_flow_agrees_across_precisions() {
    for seed in 0..5 {
        let p64 = random_path::<f64>(&mut seeded(seed), 24, 8, 2.0).unwrap();
        let p32 = random_path::<f32>(&mut seeded(seed), 24, 8, 2.0).unwrap();
        let sf64 = spectral_flow(&p64, &FlowConfig::default()).unwrap().sf;
        let sf32 = spectral_flow(&p32, &FlowConfig::default()).unwrap().sf;
        assert_eq!(sf64, sf32, "seed {seed}");
    }
}

fn line_pair<T: Real>(nodes: usize) -> spectral_eta::lattice::OperatorPair<T> {
    let g = Grid::centered_on_length(1, nodes, T::lit(16.0), Topology::TruncatedLine).unwrap();
    let v = g.sample(|x: &[T]| T::one() + T::lit(0.5) * (x[0].abs() - T::lit(2.0)).max(T::zero()));
    let a0 = build_dirac_1d(&g, &Potential::sigma3(&v).unwrap(), DerivativeScheme::CentralDifference).unwrap();
    let w = g.sample(|x: &[T]| {
        if (x[0] + T::lit(4.5)).abs() < T::lit(1.5) {
            T::lit(-4.0)
        } else {
            T::zero()
        }
    });
    make_pair(&a0, &Potential::scalar(&w, 2).unwrap()).unwrap()
}

#[test]
fn gluing_holds_in_f32() {
    let pair: OperatorPair32 = line_pair(48);
    let r = gluing_check(&pair, 24, &EtaConfig::default()).unwrap();
    assert!(r.residual < 1e-3, "residual {}", r.residual);
    let bvp = build_theta_bvp(&pair.a1, 24, 0.3f32).unwrap();
    assert!(bvp.unitarity_defect() < 1e-5);
}
