//! Identity checks run by `verify`.

use std::f64::consts::PI;

use mobius_core::dynamics::*;
use mobius_core::geometry::{constraint_theta, SignConvention, TorusGeometry};
use mobius_core::projection::*;
use mobius_core::states::{self, Offset, StateLabel};
use mobius_core::theta::{self, SeriesPolicy, ThetaArgument};
use mobius_core::Result;
use num_complex::Complex64;

use crate::config::Suite;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check: &'static str,
    pub anchor: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub grid: String,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

pub const COLUMNS: [&str; 6] = ["check", "anchor", "max_error", "tolerance", "pass", "grid"];

pub fn run(suite: Suite, tol: Option<f64>) -> Result<Table> {
    let mut reports = Vec::new();
    if matches!(suite, Suite::Theta | Suite::All) {
        reports.extend(theta_suite()?);
    }
    if matches!(suite, Suite::States | Suite::All) {
        reports.extend(states_suite()?);
    }
    if matches!(suite, Suite::Dynamics | Suite::All) {
        reports.extend(dynamics_suite()?);
    }
    if matches!(suite, Suite::Projection | Suite::All) {
        reports.extend(projection_suite()?);
    }
    let mut table = Table::new(&COLUMNS);
    for mut r in reports {
        if let Some(t) = tol {
            r.tolerance = t;
        }
        if !r.pass() {
            table.failed_rows += 1;
        }
        table.rows.push(vec![
            Cell::from(r.check),
            Cell::from(r.anchor),
            r.max_error.into(),
            r.tolerance.into(),
            r.pass().into(),
            r.grid.into(),
        ]);
    }
    Ok(table)
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| a + (b - a) * k as f64 / (n - 1) as f64)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn plain_sum(nu: Complex64, tau: Complex64, shift: f64) -> Complex64 {
    (-60..=60)
        .map(|n| {
            let n = n as f64 + shift;
            (Complex64::i() * PI * (tau * n * n + 2.0 * nu * n)).exp()
        })
        .sum()
}

fn theta_suite() -> Result<Vec<VerificationReport>> {
    let p = SeriesPolicy::default();
    let tau_cs = c(0.0, 1.0 / PI);
    let tau_dual = c(0.0, PI);

    let mut lattice: f64 = 0.0;
    let mut shift: f64 = 0.0;
    for x in linspace(-1.0, 1.0, 9) {
        for y in linspace(-0.8, 0.8, 9) {
            for tau in [tau_cs, c(0.3, 0.7), tau_dual] {
                let nu = c(x, y);
                let arg = ThetaArgument::new(nu, tau)?;
                let o3 = plain_sum(nu, tau, 0.0);
                lattice = lattice.max((theta::theta3(arg, &p)? - o3).norm() / o3.norm().max(1.0));
                let o2 = plain_sum(nu, tau, 0.5);
                shift = shift.max((theta::theta2(arg, &p)? - o2).norm() / o2.norm().max(1.0));
            }
        }
    }

    let mut modular: f64 = 0.0;
    for lp in linspace(-2.0, 2.0, 50) {
        let lhs = theta::theta3(ThetaArgument::new(c(0.0, lp / PI), tau_cs)?, &p)?;
        let rhs = (lp * lp).exp() * PI.sqrt() * theta::theta3(ThetaArgument::real(lp, tau_dual)?, &p)?;
        modular = modular.max((lhs - rhs).norm() / rhs.norm());
    }

    let mut fd: f64 = 0.0;
    let mut nome: f64 = 0.0;
    for x in linspace(-1.0, 1.0, 41) {
        let x = x + 0.007;
        let d = theta::theta3_logderiv(x, tau_dual, &p)?.re;
        let ln = |v: f64| -> Result<f64> { Ok(theta::theta3(ThetaArgument::real(v, tau_dual)?, &p)?.re.ln()) };
        let h = 1e-4;
        let est = (-ln(x + 2.0 * h)? + 8.0 * ln(x + h)? - 8.0 * ln(x - h)? + ln(x - 2.0 * h)?) / (12.0 * h);
        fd = fd.max((d - est).abs());
        nome = nome.max((d - 2.0 * states::expect_j_correction(x, Offset::Integer)).abs());
    }

    Ok(vec![
        VerificationReport {
            check: "theta3 lattice sum vs plain summation",
            anchor: "Θ₃(ν|τ) = Σ exp(iπτn² + 2iπνn)",
            max_error: lattice,
            tolerance: 1e-12,
            grid: "Re ν ∈ [-1,1] x Im ν ∈ [-0.8,0.8] (9x9), τ ∈ {i/π, 0.3+0.7i, iπ}".into(),
        },
        VerificationReport {
            check: "theta2 shift relation vs half-integer sum",
            anchor: "Θ₂(ν|τ) = e^{iπ(τ/4+ν)} Θ₃(ν+τ/2|τ)",
            max_error: shift,
            tolerance: 1e-12,
            grid: "same as lattice check".into(),
        },
        VerificationReport {
            check: "modular transformation",
            anchor: "Θ₃(il′/π|i/π) = e^{l′²} √π Θ₃(l′|iπ)",
            max_error: modular,
            tolerance: 1e-12,
            grid: "l′ ∈ [-2,2], 50 points".into(),
        },
        VerificationReport {
            check: "log-derivative vs finite difference",
            anchor: "∂_ν ln Θ₃(ν|iπ)",
            max_error: fd,
            tolerance: 1e-9,
            grid: "ν ∈ [-0.993,1.007], 41 points".into(),
        },
        VerificationReport {
            check: "log-derivative vs nome series",
            anchor: "-4π sin(2πν) Σ q^{2n-1}/|1 + q^{2n-1} e^{2iπν}|²",
            max_error: nome,
            tolerance: 1e-12,
            grid: "ν ∈ [-0.993,1.007], 41 points".into(),
        },
    ])
}

fn states_suite() -> Result<Vec<VerificationReport>> {
    let mut overlap: f64 = 0.0;
    let mut norms: f64 = 0.0;
    let mut count = 0;
    for la in linspace(-2.0, 2.0, 5) {
        for pa in linspace(-3.0, 3.0, 5) {
            for (lb, pb) in [(0.7, 1.9), (-1.6, -0.4)] {
                let s = if count % 2 == 0 { Offset::Integer } else { Offset::Half };
                count += 1;
                let a = StateLabel::circle(la, pa, s)?;
                let b = StateLabel::circle(lb, pb, s)?;
                let d = states::overlap_direct(&a, &b)?;
                overlap = overlap.max((states::overlap(&a, &b)? - d).norm() / d.norm());
                let n = states::norm2_direct(&a)?;
                norms = norms
                    .max((states::norm2(&a)? - n).abs() / n)
                    .max((states::norm2_modular(&a)? - n).abs() / n);
            }
        }
    }

    let mut spread: f64 = 0.0;
    let mut u_gap: f64 = 0.0;
    for s in [Offset::Integer, Offset::Half] {
        for l in linspace(-2.0, 2.0, 20) {
            for phi in linspace(0.0, 4.0 * PI, 21).take(20) {
                let lab = StateLabel::mobius(l, phi, 0.5, s)?;
                spread = spread.max(states::expect_j_paths(&lab)?.max_spread());
                let u = states::expect_u(&lab)?;
                u_gap = u_gap
                    .max((u - states::expect_u_modular(&lab)?).norm())
                    .max((u - states::expect_u_direct(&lab)?).norm());
            }
        }
    }

    let mut quant: f64 = 0.0;
    for s in [Offset::Integer, Offset::Half] {
        for k in -4..=4 {
            let l = 0.5 * k as f64 - 0.5;
            quant = quant.max((states::expect_j(&StateLabel::mobius(l, PI, 0.5, s)?)? - (l + 0.5)).abs());
        }
    }

    let mut gauss: f64 = 0.0;
    for s in [Offset::Integer, Offset::Half] {
        for lp in linspace(0.0, 1.0, 41) {
            let lab = StateLabel::circle(lp, 0.0, s)?;
            for n in -12..=12 {
                let j = n as f64 + s.value();
                gauss = gauss.max((states::distribution(&lab, j)? - states::gaussian_distribution(lp, j)).abs());
            }
        }
    }

    Ok(vec![
        VerificationReport {
            check: "overlap closed form vs basis sum",
            anchor: "⟨a|b⟩ = Θ((φa-φb)/2π - i(l′a+l′b)/2π | i/π)",
            max_error: overlap,
            tolerance: 1e-12,
            grid: "50 label pairs, |l′| <= 2, both sectors".into(),
        },
        VerificationReport {
            check: "norm: theta, modular and basis sum",
            anchor: "⟨ξ|ξ⟩ = e^{l′²} √π Θ₃(l′+s|iπ)",
            max_error: norms,
            tolerance: 1e-12,
            grid: "same labels".into(),
        },
        VerificationReport {
            check: "<J> direct, log-derivative and nome series",
            anchor: "⟨Ĵ⟩ = l′ + ½ ∂_ν ln Θ₃(l′+s|iπ)",
            max_error: spread,
            tolerance: 1e-10,
            grid: "l ∈ [-2,2] x φ ∈ [0,4π), 20x20, r = ½, both sectors".into(),
        },
        VerificationReport {
            check: "<U> theta ratio, modular image and basis sum",
            anchor: "⟨U⟩ = e^{-1/4} e^{iφ} Θ₂/Θ₃",
            max_error: u_gap,
            tolerance: 1e-12,
            grid: "same grid".into(),
        },
        VerificationReport {
            check: "<J> at φ = π equals l + r",
            anchor: "⟨Ĵ⟩ = l + r sin(φ/2) when l′ ∈ ½Z",
            max_error: quant,
            tolerance: 1e-12,
            grid: "l + r ∈ {-2,...,2} step ½, r = ½, both sectors".into(),
        },
        VerificationReport {
            check: "distribution vs Gaussian law",
            anchor: "|⟨j|ξ⟩|²/⟨ξ|ξ⟩ ≈ e^{-(j-l′)²}/√π",
            max_error: gauss,
            tolerance: 1.1e-4,
            grid: "l′ ∈ [0,1], 41 points, |j| <= 12".into(),
        },
    ])
}

fn dynamics_suite() -> Result<Vec<VerificationReport>> {
    let mut legendre: f64 = 0.0;
    for r in [0.0, 0.3, 0.6, 0.9] {
        for phi in linspace(0.0, 4.0 * PI, 13) {
            for pd in [-1.5, 0.4, 2.0] {
                let s = MobiusState::new(phi, pd, 0.0, 0.3 - 0.5 * pd);
                let (j, l0) = mobius_momenta(&s, r)?;
                let e = mobius_energy(&s, r)?;
                legendre = legendre.max((mobius_hamiltonian(j, l0, phi, r)? - e).abs() / e);
            }
        }
    }

    let mut reduction: f64 = 0.0;
    for s in [0.0, 0.5] {
        for n in -3..=3 {
            let j = n as f64 + s;
            for r in [0.1, 0.5, 0.9] {
                reduction = reduction.max((energy_spectrum(j, 0.4, PI, r)?.energy - quantized_energy(j, 0.4, r)?).abs());
            }
        }
    }

    let s0 = MobiusState::new(0.9, 1.2, 0.0, -0.4);
    let traj = integrate_mobius(&s0, 0.5, 50.0, 1e-3)?;
    let c = traj.conserved()?;
    let e_drift = c.iter().map(|x| (x.energy - c[0].energy).abs()).fold(0.0, f64::max) / c[0].energy;
    let l_drift = c.iter().map(|x| (x.l0 - c[0].l0).abs()).fold(0.0, f64::max) / c[0].l0.abs();

    let cyl0 = MobiusState::new(0.3, 1.1, -0.4, 0.6);
    let cyl = integrate_mobius(&cyl0, 0.0, 50.0, 1e-3)?;
    let cyl_err = cyl
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = cyl.time(i);
            (s.phi - (cyl0.phi + cyl0.phi_dot * t)).abs().max((s.z0 - (cyl0.z0 + cyl0.z0_dot * t)).abs())
        })
        .fold(0.0, f64::max);

    let g = TorusGeometry::unit(0.5, 0.0)?;
    let mut torus: f64 = 0.0;
    for phi in linspace(0.0, 4.0 * PI, 50) {
        for pd in linspace(-2.0, 2.0, 50) {
            let s = MobiusState::new(phi, pd, 0.0, 0.3);
            let t = TorusState::constrained(&s);
            torus = torus.max((torus_lagrangian(&t, &g) - mobius_lagrangian_embedding(&s, 0.5, SignConvention::Embedded)?).abs());
        }
    }

    Ok(vec![
        VerificationReport {
            check: "Hamiltonian vs Legendre transform",
            anchor: "H = ½{𝕁² D + L₀²}, D = (1 + r cos(φ/2))² + (r²/4) sin²(φ/2)",
            max_error: legendre,
            tolerance: 1e-12,
            grid: "r ∈ {0,0.3,0.6,0.9} x 13 angles x 3 velocities".into(),
        },
        VerificationReport {
            check: "spectrum at φ = π",
            anchor: "E = 2j²/(4 + r²) + L₀²/2",
            max_error: reduction,
            tolerance: 1e-12,
            grid: "j ∈ {-3..3} + s, r ∈ {0.1,0.5,0.9}, L₀ = 0.4".into(),
        },
        VerificationReport {
            check: "energy conservation",
            anchor: "E constant along the motion",
            max_error: e_drift,
            tolerance: 1e-8,
            grid: "r = ½, t ∈ [0,50], dt = 1e-3".into(),
        },
        VerificationReport {
            check: "axial momentum conservation",
            anchor: "L₀ = Ż₀ - (r/2) cos(φ/2) φ̇ constant",
            max_error: l_drift,
            tolerance: 1e-8,
            grid: "r = ½, t ∈ [0,50], dt = 1e-3".into(),
        },
        VerificationReport {
            check: "cylinder motion",
            anchor: "r = 0: uniform rotation and translation",
            max_error: cyl_err,
            tolerance: 1e-10,
            grid: "t ∈ [0,50], dt = 1e-3".into(),
        },
        VerificationReport {
            check: "torus Lagrangian on the constraint",
            anchor: "θ = (φ+π)/2 reduces the torus Lagrangian to the strip",
            max_error: torus,
            tolerance: 1e-10,
            grid: "φ ∈ [0,4π] x φ̇ ∈ [-2,2], 50x50, r = ½".into(),
        },
    ])
}

fn projection_suite() -> Result<Vec<VerificationReport>> {
    let mut rank: f64 = 0.0;
    for &(l, phi, r) in &[(0.0, 1.0, 0.5), (0.7, 2.4, 0.3), (-0.6, PI, 0.8), (1.1, 5.0, 0.1)] {
        let theta = constraint_theta(phi);
        let t = build_torus_cs(l, theta, phi, r, Offset::Integer, default_torus_j_max(l, theta, phi, r)?)?;
        let sv = t.singular_values();
        rank = rank.max(sv[1] / sv[0]);
    }

    let mut circle: f64 = 0.0;
    let mut series: f64 = 0.0;
    for (la, pa, lb, pb) in [(0.0, 0.0, 0.0, 0.0), (0.5, 1.0, -0.3, 2.5), (1.2, -0.7, 0.9, 0.4)] {
        let a = StateLabel::circle(la, pa, Offset::Integer)?;
        let b = StateLabel::circle(lb, pb, Offset::Integer)?;
        let cval = states::overlap(&a, &b)?;
        circle = circle.max((project_overlap(&a, &b)? - cval).norm() / cval.norm().max(1.0));
        let ma = StateLabel::mobius(la, pa, 0.5, Offset::Integer)?;
        let mb = StateLabel::mobius(lb, pb, 0.5, Offset::Integer)?;
        let pv = project_overlap(&ma, &mb)?;
        series = series.max((pv - projected_overlap_series(&ma, &mb, PhaseReading::PerTerm)?).norm() / pv.norm());
    }

    let mut quad: f64 = 0.0;
    for ratio in [0.0, 0.5, 2.0, 5.0] {
        let v = universal_projector(&ProjectionSpec::new(0.1, constraint_theta(0.8) + 0.1 * ratio, 0.8)?)?;
        quad = quad.max((v.quadrature - v.indicator).abs());
    }
    let edge = universal_projector(&ProjectionSpec::new(0.1, constraint_theta(0.8) + 0.1, 0.8)?)?;

    let v = states::build_cs_default(&StateLabel::mobius(0.4, 2.0, 0.5, Offset::Half)?)?;
    let once = project_mobius_to_circle(&v)?;
    let idem = project_mobius_to_circle(&once)?.distance(&once)?;

    Ok(vec![
        VerificationReport {
            check: "torus coefficient grid rank",
            anchor: "|ξ_torus⟩ = |ξ_MS⟩ ⊗ |ξ_aux⟩",
            max_error: rank,
            tolerance: 1e-12,
            grid: "4 labels on the constraint".into(),
        },
        VerificationReport {
            check: "projected overlap at r = 0 vs circle overlap",
            anchor: "strip-sector projection of torus states",
            max_error: circle,
            tolerance: 1e-10,
            grid: "3 label pairs, integer sector".into(),
        },
        VerificationReport {
            check: "projected overlap vs per-term series",
            anchor: "Σ_j e^{(l′+h′)j} e^{i(φ-ψ)j} e^{-j²}",
            max_error: series,
            tolerance: 1e-12,
            grid: "3 label pairs, r = ½".into(),
        },
        VerificationReport {
            check: "projector quadrature vs indicator",
            anchor: "∫ dλ e^{-iλx²} sin(δ²λ)/(πλ) = 1 if |x| < δ else 0",
            max_error: quad,
            tolerance: 1e-3,
            grid: "|x|/δ ∈ {0,0.5,2,5}, δ = 0.1".into(),
        },
        VerificationReport {
            check: "projector on the window edge",
            anchor: "value ½ at |x| = δ",
            max_error: (edge.quadrature - 0.5).abs(),
            tolerance: 5e-3,
            grid: "|x| = δ = 0.1".into(),
        },
        VerificationReport {
            check: "circle projection idempotence",
            anchor: "P_circle P_circle = P_circle",
            max_error: idem,
            tolerance: 1e-15,
            grid: "l = 0.4, φ = 2, r = ½, half sector".into(),
        },
    ])
}
