use std::f64::consts::PI;

use mobius_core::geometry::{constraint_theta, SignConvention};
use mobius_core::projection::*;
use mobius_core::states::{build_cs, build_cs_default, overlap, Offset, StateLabel};
use num_complex::Complex64;

#[test]
fn label_factorisation_matches_geometric_form() {
    for &(l, theta, phi, r) in &[(0.0, 0.3, 1.0, 0.5), (0.7, -1.2, 2.5, 0.2), (-0.4, 2.0, 4.0, 0.8)] {
        let t = torus_labels(l, theta, phi, r).unwrap();
        let (log_mod, i_phase, k_phase) = torus_label_geometric(l, theta, phi, r).unwrap();
        assert!((t.log_modulus() - log_mod).abs() < 1e-13);
        assert!((t.xi_ms.arg() - Complex64::from_polar(1.0, i_phase).arg()).abs() < 1e-13);
        assert!((t.xi_aux.k_arg() - Complex64::from_polar(1.0, k_phase).arg()).abs() < 1e-13);
    }
}

#[test]
fn strip_label_is_embedded_sign_label() {
    let label = StateLabel::new(0.3, 1.4, 0.6, Offset::Integer, SignConvention::Embedded).unwrap();
    let t = torus_labels(0.3, constraint_theta(1.4), 1.4, 0.6).unwrap();
    assert!((t.xi_ms - label.xi()).norm() < 1e-14);
}

#[test]
fn torus_state_is_separable() {
    for &(l, phi, r) in &[(0.0, 1.0, 0.5), (0.8, 3.0, 0.3), (-1.0, PI, 0.9)] {
        let theta = constraint_theta(phi);
        let j_max = default_torus_j_max(l, theta, phi, r).unwrap();
        let t = build_torus_cs(l, theta, phi, r, Offset::Half, j_max).unwrap();
        let sv = t.singular_values();
        assert!(sv[1] <= 1e-12 * sv[0], "{sv:?}");
    }
}

#[test]
fn torus_coefficients_factorise() {
    let (l, theta, phi, r) = (0.2, 0.9, 1.7, 0.4);
    let j_max = default_torus_j_max(l, theta, phi, r).unwrap();
    let t = build_torus_cs(l, theta, phi, r, Offset::Integer, j_max).unwrap();
    let labels = torus_labels(l, theta, phi, r).unwrap();
    for j in [-2.0, 0.0, 1.0, 3.0] {
        for m in [-2i64, 0, 1, 4] {
            let (a, k) = t.coefficient(j, m).unwrap();
            let expected_i = labels.xi_ms.powf(-j) * (-0.5 * j * j).exp() * labels.xi_aux.norm().powi(-m as i32)
                * (-0.5 * (m * m) as f64).exp();
            assert!((a - expected_i).norm() < 1e-12 * expected_i.norm());
            assert!((k.0 - labels.xi_aux.powi(-m as i32).0 / labels.xi_aux.norm().powi(-m as i32)).norm() < 1e-13);
        }
    }
    let strip = StateLabel::new(l, phi, r, Offset::Integer, SignConvention::Embedded).unwrap();
    let direct = build_cs(&strip, j_max).unwrap();
    assert!(t.strip_marginal().unwrap().distance(&direct).unwrap() < 1e-14);
}

#[test]
fn fiducial_torus_is_unit_label() {
    let f = fiducial_torus(10.0, Offset::Integer).unwrap();
    for (j, m) in [(0.0, 0i64), (1.0, 2), (-3.0, -1)] {
        let (a, k) = f.coefficient(j, m).unwrap();
        assert!((a.re - (-0.5 * (j * j + (m * m) as f64)).exp()).abs() < 1e-15 && a.im == 0.0);
        assert_eq!(k.0, Complex64::new(1.0, 0.0));
    }
}

#[test]
fn projected_overlap_reduces_to_circle_overlap() {
    for &(la, pa, lb, pb, s) in &[
        (0.0, 0.0, 0.0, 0.0, Offset::Integer),
        (0.5, 1.0, -0.3, 2.5, Offset::Integer),
        (1.2, -0.7, 0.9, 0.4, Offset::Half),
    ] {
        let a = StateLabel::circle(la, pa, s).unwrap();
        let b = StateLabel::circle(lb, pb, s).unwrap();
        let p = project_overlap(&a, &b).unwrap();
        let c = overlap(&a, &b).unwrap();
        assert!((p - c).norm() <= 1e-10 * c.norm().max(1.0));
    }
}

#[test]
fn projected_overlap_matches_per_term_series() {
    let a = StateLabel::mobius(0.3, 1.0, 0.5, Offset::Integer).unwrap();
    let b = StateLabel::mobius(-0.2, 2.2, 0.5, Offset::Integer).unwrap();
    let p = project_overlap(&a, &b).unwrap();
    let per_term = projected_overlap_series(&a, &b, PhaseReading::PerTerm).unwrap();
    let outside = projected_overlap_series(&a, &b, PhaseReading::OutsideSum).unwrap();
    assert!((p - per_term).norm() < 1e-12 * p.norm());
    assert!((p - outside).norm() > 1e-3);
}

#[test]
fn projector_quadrature_matches_indicator() {
    let delta = 0.1;
    for ratio in [0.0, 0.5, 2.0, 5.0] {
        let phi = 0.8;
        let spec = ProjectionSpec::new(delta, constraint_theta(phi) + ratio * delta, phi).unwrap();
        let v = universal_projector(&spec).unwrap();
        assert!(!v.boundary);
        assert!((v.quadrature - v.indicator).abs() <= 1e-3, "ratio {ratio}: {v:?}");
        assert!(v.tail_bound <= PROJECTOR_TAIL_TOL * 1.0001);
        // idempotent within quadrature accuracy
        assert!((v.quadrature * v.quadrature - v.quadrature).abs() <= 3e-3);
    }
    let spec = ProjectionSpec::new(delta, constraint_theta(0.0) - delta, 0.0).unwrap();
    let v = universal_projector(&spec).unwrap();
    assert!(v.boundary);
    assert_eq!(v.indicator, 0.5);
    assert!((v.quadrature - 0.5).abs() <= 5e-3, "{v:?}");
}

#[test]
fn circle_projection_is_idempotent_and_consistent() {
    let label = StateLabel::mobius(0.4, 2.0, 0.5, Offset::Half).unwrap();
    let v = build_cs_default(&label).unwrap();
    let once = project_mobius_to_circle(&v).unwrap();
    let twice = project_mobius_to_circle(&once).unwrap();
    assert!(twice.distance(&once).unwrap() <= 1e-15 * once.norm2().sqrt().max(1.0), "{}", twice.distance(&once).unwrap());
    let circle = build_cs_default(&StateLabel::circle(label.lprime(), 2.0, Offset::Integer).unwrap()).unwrap();
    assert!(once.distance(&circle).unwrap() < 1e-10);

    // through the torus: strip marginal first
    let (l, phi, r) = (0.1, 1.3, 0.4);
    let theta = constraint_theta(phi);
    let t = build_torus_cs(l, theta, phi, r, Offset::Integer, default_torus_j_max(l, theta, phi, r).unwrap()).unwrap();
    let chained = project_mobius_to_circle(&t.strip_marginal().unwrap()).unwrap();
    let strip = StateLabel::new(l, phi, r, Offset::Integer, SignConvention::Embedded).unwrap();
    let direct = build_cs_default(&StateLabel::circle(strip.lprime(), phi, Offset::Integer).unwrap()).unwrap();
    assert!(chained.distance(&direct).unwrap() < 1e-10);
}
