use std::f64::consts::PI;

use mobius_core::theta::{
    modular_dual, theta2, theta2_series, theta3, theta3_logderiv, theta3_modular, SeriesPolicy, ThetaArgument,
};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Plain lattice sum over n in [-n_max, n_max] shifted by `shift`.
fn naive(nu: Complex64, tau: Complex64, shift: f64, n_max: i64) -> Complex64 {
    (-n_max..=n_max)
        .map(|n| {
            let n = n as f64 + shift;
            (Complex64::i() * PI * tau * n * n + 2.0 * Complex64::i() * PI * nu * n).exp()
        })
        .sum()
}

#[test]
fn theta3_matches_naive_sum() {
    let p = SeriesPolicy::default();
    let tau_cs = c(0.0, 1.0 / PI);
    let v = theta3(ThetaArgument::real(0.0, tau_cs).unwrap(), &p).unwrap();
    assert!((v - naive(c(0.0, 0.0), tau_cs, 0.0, 10)).norm() < 1e-14);
    assert!((v.re - 1.772_638).abs() < 1e-6);

    let v = theta3(ThetaArgument::real(0.5, c(0.0, PI)).unwrap(), &p).unwrap();
    assert!((v.re - 0.999_896_6).abs() < 1e-7);
    let first = 1.0 - 2.0 * (-PI * PI).exp();
    assert!((v.re - first).abs() < 1e-16);

    for &(nu, tau) in &[
        (c(0.3, 0.1), c(0.2, 0.8)),
        (c(-0.7, 0.4), c(-0.5, 1.3)),
        (c(0.0, 0.9), c(0.0, 1.0 / PI)),
        (c(1.3, -0.6), c(0.1, PI)),
    ] {
        let v = theta3(ThetaArgument::new(nu, tau).unwrap(), &p).unwrap();
        let o = naive(nu, tau, 0.0, 60);
        assert!((v - o).norm() <= 1e-13 * o.norm().max(1.0), "{nu} {tau}: {v} vs {o}");
    }
}

#[test]
fn theta2_matches_half_integer_sum() {
    let p = SeriesPolicy::default();
    let tau_cs = c(0.0, 1.0 / PI);
    let v = theta2(ThetaArgument::real(0.0, tau_cs).unwrap(), &p).unwrap();
    assert!((v.re - 1.772_270_5).abs() < 1e-7);
    for &(nu, tau) in &[(c(0.0, 0.0), tau_cs), (c(0.2, 0.3), c(0.3, 0.7)), (c(0.0, -0.8), tau_cs)] {
        let arg = ThetaArgument::new(nu, tau).unwrap();
        let o = naive(nu, tau, 0.5, 60);
        let shifted = theta2(arg, &p).unwrap();
        let summed = theta2_series(arg, &p).unwrap();
        assert!((shifted - o).norm() <= 1e-13 * o.norm().max(1.0));
        assert!((summed - o).norm() <= 1e-13 * o.norm().max(1.0));
    }
}

#[test]
fn modular_transformation_matches_direct() {
    for k in 0..=20 {
        let lp = -2.0 + 0.2 * k as f64;
        let lhs = theta3(ThetaArgument::new(c(0.0, lp / PI), c(0.0, 1.0 / PI)).unwrap(), &SeriesPolicy::default())
            .unwrap();
        let rhs = (lp * lp).exp()
            * PI.sqrt()
            * naive(c(lp, 0.0), c(0.0, PI), 0.0, 10);
        assert!((lhs - rhs).norm() <= 1e-13 * rhs.norm());
        let m = theta3_modular(ThetaArgument::new(c(0.0, lp / PI), c(0.0, 1.0 / PI)).unwrap()).unwrap();
        assert!((m - rhs).norm() <= 1e-13 * rhs.norm());
    }
}

#[test]
fn modular_dual_of_cs_parameter() {
    let (pref, dual) = modular_dual(ThetaArgument::new(c(0.0, 0.3 / PI), c(0.0, 1.0 / PI)).unwrap()).unwrap();
    assert!((dual.tau - c(0.0, PI)).norm() < 1e-15);
    assert!((dual.nu - c(-0.3, 0.0)).norm() < 1e-15);
    assert!((pref - c(0.09f64.exp() * PI.sqrt(), 0.0)).norm() < 1e-14);
}

#[test]
fn logderiv_matches_central_difference() {
    let tau = c(0.0, PI);
    let p = SeriesPolicy::default();
    let ln_theta = |nu: f64| naive(c(nu, 0.0), tau, 0.0, 10).re.ln();
    for k in 0..40 {
        let nu = -1.0 + 0.05 * k as f64 + 0.013;
        let h = 1e-4;
        // fourth-order stencil
        let fd = (-ln_theta(nu + 2.0 * h) + 8.0 * ln_theta(nu + h) - 8.0 * ln_theta(nu - h) + ln_theta(nu - 2.0 * h))
            / (12.0 * h);
        let d = theta3_logderiv(nu, tau, &p).unwrap();
        assert!(d.im.abs() < 1e-15);
        assert!((d.re - fd).abs() < 1e-9, "nu = {nu}: {} vs {fd}", d.re);
    }
}

#[test]
fn precision_failure_is_reported() {
    let p = SeriesPolicy::new(1e-14, 3).unwrap();
    let err = theta3(ThetaArgument::real(0.0, c(0.0, 0.01)).unwrap(), &p).unwrap_err();
    assert!(matches!(err, mobius_core::Error::Precision { .. }));
}
