use std::f64::consts::PI;

use mobius_core::dynamics::*;
use mobius_core::geometry::{lprime, xi_label, SignConvention};
use mobius_core::states::*;
use mobius_core::theta::{theta3, theta3_modular, SeriesPolicy, ThetaArgument};
use num_complex::Complex64;
use proptest::prelude::*;

fn offset() -> impl Strategy<Value = Offset> {
    prop_oneof![Just(Offset::Integer), Just(Offset::Half)]
}

fn sign() -> impl Strategy<Value = SignConvention> {
    prop_oneof![Just(SignConvention::Printed), Just(SignConvention::Embedded)]
}

fn label() -> impl Strategy<Value = StateLabel> {
    (-2.0..2.0f64, -7.0..7.0f64, 0.0..0.95f64, offset(), sign())
        .prop_map(|(l, phi, r, s, sc)| StateLabel::new(l, phi, r, s, sc).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn theta_direct_and_modular_agree(lp in -3.0..3.0f64, x in -0.5..0.5f64) {
        let arg = ThetaArgument::new(Complex64::new(x, lp / PI), Complex64::new(0.0, 1.0 / PI)).unwrap();
        let d = theta3(arg, &SeriesPolicy::default()).unwrap();
        let m = theta3_modular(arg).unwrap();
        prop_assert!((d - m).norm() <= 1e-12 * d.norm().max(1e-300));
    }

    #[test]
    fn overlap_is_hermitian(l1 in -2.0..2.0f64, p1 in -7.0..7.0f64, l2 in -2.0..2.0f64, p2 in -7.0..7.0f64, r in 0.0..0.95f64, s in offset()) {
        let a = StateLabel::mobius(l1, p1, r, s).unwrap();
        let b = StateLabel::mobius(l2, p2, r, s).unwrap();
        let ab = overlap(&a, &b).unwrap();
        let ba = overlap(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12 * ab.norm().max(1e-300));
        // Cauchy–Schwarz
        prop_assert!(ab.norm_sqr() <= norm2(&a).unwrap() * norm2(&b).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn expect_j_paths_agree(lab in label()) {
        let p = expect_j_paths(&lab).unwrap();
        prop_assert!(p.max_spread() <= 1e-10, "{:?}", p);
    }

    #[test]
    fn expect_u_paths_agree(lab in label()) {
        let a = expect_u(&lab).unwrap();
        let b = expect_u_modular(&lab).unwrap();
        let c = expect_u_direct(&lab).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 && (a - c).norm() <= 1e-12);
    }

    #[test]
    fn label_modulus_is_minus_lprime(l in -3.0..3.0f64, phi in -10.0..10.0f64, r in 0.0..0.99f64, sc in sign()) {
        let xi = xi_label(l, phi, r, sc).unwrap();
        let lp = lprime(l, phi, r, sc).unwrap();
        prop_assert!((xi.norm().ln() + lp).abs() <= 1e-13 * lp.abs().max(1.0));
    }

    #[test]
    fn half_sector_needs_four_pi(l in -2.0..2.0f64, phi in -7.0..7.0f64) {
        let circle = StateLabel::circle(l, phi, Offset::Half).unwrap();
        let v = build_cs_default(&circle).unwrap();
        let w2 = build_cs(&circle.with_phi(circle.phi + 2.0 * PI), v.j_max()).unwrap();
        let w4 = build_cs(&circle.with_phi(circle.phi + 4.0 * PI), v.j_max()).unwrap();
        let n = v.norm2().sqrt();
        prop_assert!(v.distance(&w4).unwrap() <= 1e-11 * n);
        prop_assert!((v.inner(&w2).unwrap() + v.norm2()).norm() <= 1e-11 * v.norm2());
    }

    #[test]
    fn momenta_round_trip(phi in -7.0..7.0f64, pd in -3.0..3.0f64, zd in -3.0..3.0f64, r in 0.0..0.95f64) {
        let s = MobiusState::new(phi, pd, 0.0, zd);
        let (j, l0) = mobius_momenta(&s, r).unwrap();
        let back = mobius_phidot_from_j(j, l0, phi, r).unwrap();
        prop_assert!((back - pd).abs() <= 1e-12 * pd.abs().max(1.0));
        let e = mobius_energy(&s, r).unwrap();
        let h = mobius_hamiltonian(j, l0, phi, r).unwrap();
        prop_assert!((e - h).abs() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn spectrum_is_time_reversal_symmetric(j in -5.0..5.0f64, l0 in -2.0..2.0f64, phi in -7.0..7.0f64, r in 0.0..0.95f64) {
        let a = energy_spectrum(j, l0, phi, r).unwrap().energy;
        let b = energy_spectrum(-j, -l0, phi, r).unwrap().energy;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lprime_is_lipschitz_in_phi(l in -2.0..2.0f64, phi in -7.0..7.0f64, r in 0.0..0.9f64, dphi in -1e-3..1e-3f64) {
        // |∂l′/∂φ| <= r/2 + (r/2)/(1 - r)
        let a = lprime(l, phi, r, SignConvention::Printed).unwrap();
        let b = lprime(l, phi + dphi, r, SignConvention::Printed).unwrap();
        let bound = 0.5 * r + 0.5 * r / (1.0 - r);
        prop_assert!((a - b).abs() <= bound * dphi.abs() * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn distribution_is_a_probability(lab in label()) {
        let s = lab.offset.value();
        let lp = lab.lprime();
        let centre = lp.round() as i64;
        let total: f64 = (centre - 15..=centre + 15).map(|n| distribution(&lab, n as f64 + s).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }
}
