//! Per-point evaluation for each command.

use std::f64::consts::PI;

use mobius_core::dynamics::{
    energy_spectrum_with, integrate_mobius, quantized_energy, HamiltonianForm, MobiusState,
};
use mobius_core::geometry::{constraint_theta, SignConvention};
use mobius_core::projection::{
    build_torus_cs, default_torus_j_max, project_mobius_to_circle, project_overlap, projected_overlap_series,
    universal_projector, PhaseReading, ProjectionSpec,
};
use mobius_core::states::{self, Offset, StateLabel};
use mobius_core::theta::{self, SeriesPolicy, ThetaArgument};
use mobius_core::Error;
use num_complex::Complex64;

use crate::config::{Command, CsQuantity, Params, ProjectKind, RunConfig, Sector, Sign};
use crate::table::Cell;

/// Why a point could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum PointError {
    /// A parameter violates a precondition.
    Usage(String),
    /// The numerics could not meet their target.
    Numeric(String),
}

impl PointError {
    pub fn message(&self) -> &str {
        match self {
            PointError::Usage(m) | PointError::Numeric(m) => m,
        }
    }
}

impl From<Error> for PointError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => PointError::Usage(e.to_string()),
            other => PointError::Numeric(other.to_string()),
        }
    }
}

pub type Rows = Vec<Vec<Cell>>;
type Eval = fn(&Params, &RunConfig) -> Result<Rows, PointError>;

/// Column names and evaluator for a command. Every sweepable table ends
/// with a `status` column.
pub fn plan(cfg: &RunConfig) -> (Vec<&'static str>, Eval) {
    match cfg.command {
        Command::Theta => (
            vec![
                "nu", "nu_im", "tau_re", "tau_im", "theta3_re", "theta3_im", "theta2_re", "theta2_im",
                "theta3_modular_re", "theta3_modular_im", "status",
            ],
            theta_point,
        ),
        Command::Cs => match cfg.quantity.expect("validated") {
            CsQuantity::Norm => (vec!["l", "phi", "r", "s", "lprime", "norm2", "norm2_direct", "norm2_modular", "status"], cs_norm),
            CsQuantity::Overlap => (
                vec![
                    "l", "phi", "l2", "phi2", "r", "s", "overlap_re", "overlap_im", "overlap_direct_re",
                    "overlap_direct_im", "status",
                ],
                cs_overlap,
            ),
            CsQuantity::ExpectJ => (
                vec!["l", "phi", "r", "s", "lprime", "expect_j", "expect_j_direct", "expect_j_logderiv", "status"],
                cs_expect_j,
            ),
            CsQuantity::ExpectU => (
                vec!["l", "phi", "r", "s", "lprime", "u_re", "u_im", "u_abs", "u_modular_re", "u_modular_im", "status"],
                cs_expect_u,
            ),
            CsQuantity::Distribution => (
                vec!["l", "phi", "r", "s", "lprime", "j", "probability", "gaussian", "sup_gap", "status"],
                cs_distribution,
            ),
            CsQuantity::Quantize => (vec!["r", "l", "s", "root_phi", "expect_j", "all_angles", "status"], cs_quantize),
        },
        Command::Spectrum => (
            vec!["j", "L0", "phi", "r", "energy", "energy_printed", "energy_reduced", "status"],
            spectrum_point,
        ),
        Command::Dynamics => (vec!["t", "phi", "phi_dot", "z0", "z0_dot", "E", "J", "L0"], dynamics_point),
        Command::Project => match cfg.projection.expect("validated") {
            ProjectKind::Projector => (
                vec![
                    "delta", "theta", "phi", "deviation", "quadrature", "indicator", "cutoff", "tail_bound", "boundary",
                    "status",
                ],
                project_projector,
            ),
            ProjectKind::Overlap => (
                vec![
                    "l", "phi", "l2", "phi2", "r", "s", "projected_re", "projected_im", "per_term_re", "per_term_im",
                    "outside_sum_re", "outside_sum_im", "reading_gap", "status",
                ],
                project_overlap_point,
            ),
            ProjectKind::Chain => (
                vec![
                    "l", "phi", "r", "s", "theta", "lprime", "sv_ratio", "marginal_gap", "chain_gap", "idempotence_gap",
                    "status",
                ],
                project_chain,
            ),
        },
        Command::Verify => unreachable!("verify is not a per-point command"),
    }
}

fn offset(p: &Params) -> Offset {
    match p.s.unwrap_or(Sector::Int) {
        Sector::Int => Offset::Integer,
        Sector::Half => Offset::Half,
    }
}

fn sector_text(p: &Params) -> Cell {
    match p.s.unwrap_or(Sector::Int) {
        Sector::Int => "int".into(),
        Sector::Half => "half".into(),
    }
}

fn sign(p: &Params) -> SignConvention {
    match p.sign.unwrap_or(Sign::Printed) {
        Sign::Printed => SignConvention::Printed,
        Sign::Embedded => SignConvention::Embedded,
    }
}

fn label(p: &Params) -> Result<StateLabel, PointError> {
    Ok(StateLabel::new(
        p.l.unwrap_or(0.0),
        p.phi.unwrap_or(0.0),
        p.r.unwrap_or(0.0),
        offset(p),
        sign(p),
    )?)
}

fn second_label(p: &Params) -> Result<StateLabel, PointError> {
    Ok(StateLabel::new(
        p.l2.or(p.l).unwrap_or(0.0),
        p.phi2.or(p.phi).unwrap_or(0.0),
        p.r.unwrap_or(0.0),
        offset(p),
        sign(p),
    )?)
}

fn ok(mut row: Vec<Cell>) -> Rows {
    row.push("ok".into());
    vec![row]
}

fn theta_point(p: &Params, cfg: &RunConfig) -> Result<Rows, PointError> {
    let nu = Complex64::new(p.nu.unwrap_or(0.0), p.nu_im.unwrap_or(0.0));
    let tau = Complex64::new(p.tau_re.unwrap_or(0.0), p.tau_im.unwrap_or(1.0 / PI));
    let arg = ThetaArgument::new(nu, tau)?;
    let policy = match cfg.tol {
        Some(t) => SeriesPolicy::new(t, SeriesPolicy::default().max_terms)?,
        None => SeriesPolicy::default(),
    };
    let t3 = theta::theta3(arg, &policy)?;
    let t2 = theta::theta2(arg, &policy)?;
    let tm = theta::theta3_modular_with(arg, &policy)?;
    Ok(ok(vec![
        nu.re.into(),
        nu.im.into(),
        tau.re.into(),
        tau.im.into(),
        t3.re.into(),
        t3.im.into(),
        t2.re.into(),
        t2.im.into(),
        tm.re.into(),
        tm.im.into(),
    ]))
}

fn cs_norm(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let a = label(p)?;
    Ok(ok(vec![
        a.l.into(),
        a.phi.into(),
        a.r.into(),
        sector_text(p),
        a.lprime().into(),
        states::norm2(&a)?.into(),
        states::norm2_direct(&a)?.into(),
        states::norm2_modular(&a)?.into(),
    ]))
}

fn cs_overlap(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let a = label(p)?;
    let b = second_label(p)?;
    let closed = states::overlap(&a, &b)?;
    let direct = states::overlap_direct(&a, &b)?;
    Ok(ok(vec![
        a.l.into(),
        a.phi.into(),
        b.l.into(),
        b.phi.into(),
        a.r.into(),
        sector_text(p),
        closed.re.into(),
        closed.im.into(),
        direct.re.into(),
        direct.im.into(),
    ]))
}

fn cs_expect_j(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let a = label(p)?;
    let paths = states::expect_j_paths(&a)?;
    Ok(ok(vec![
        a.l.into(),
        a.phi.into(),
        a.r.into(),
        sector_text(p),
        a.lprime().into(),
        paths.series.into(),
        paths.direct.into(),
        paths.logderiv.into(),
    ]))
}

fn cs_expect_u(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let a = label(p)?;
    let u = states::expect_u(&a)?;
    let m = states::expect_u_modular(&a)?;
    Ok(ok(vec![
        a.l.into(),
        a.phi.into(),
        a.r.into(),
        sector_text(p),
        a.lprime().into(),
        u.re.into(),
        u.im.into(),
        u.norm().into(),
        m.re.into(),
        m.im.into(),
    ]))
}

fn cs_distribution(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let a = label(p)?;
    let lp = a.lprime();
    let j = p.j.unwrap_or_else(|| a.offset.nearest(lp));
    let prob = states::distribution(&a, j)?;
    let centre = lp.round() as i64;
    let mut sup: f64 = 0.0;
    for n in centre - 12..=centre + 12 {
        let jj = n as f64 + a.offset.value();
        sup = sup.max((states::distribution(&a, jj)? - states::gaussian_distribution(lp, jj)).abs());
    }
    Ok(ok(vec![
        a.l.into(),
        a.phi.into(),
        a.r.into(),
        sector_text(p),
        lp.into(),
        j.into(),
        prob.into(),
        states::gaussian_distribution(lp, j).into(),
        sup.into(),
    ]))
}

fn cs_quantize(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let r = p.r.unwrap_or(0.0);
    let l = p.l.unwrap_or(0.0);
    let scan = states::quantization_scan(r, l, offset(p), sign(p))?;
    if scan.all_angles {
        let j = states::expect_j(&label(p)?)?;
        return Ok(ok(vec![r.into(), l.into(), sector_text(p), f64::NAN.into(), j.into(), true.into()]));
    }
    Ok(scan
        .roots
        .iter()
        .zip(&scan.expectations)
        .map(|(&phi, &j)| {
            vec![r.into(), l.into(), sector_text(p), phi.into(), j.into(), false.into(), "ok".into()]
        })
        .collect())
}

fn spectrum_point(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let r = p.r.unwrap_or(0.0);
    let l0 = p.l0.unwrap_or(0.0);
    let phi = p.phi.unwrap_or(PI);
    let j_max = p.j_max.unwrap_or(3.0);
    if !(j_max >= 0.0) {
        return Err(PointError::Usage(format!("j_max must be non-negative, got {j_max}")));
    }
    let s = offset(p).value();
    let lo = (-j_max - s).ceil() as i64;
    let hi = (j_max - s).floor() as i64;
    let mut rows = Vec::new();
    for n in lo..=hi {
        let j = n as f64 + s;
        let e = energy_spectrum_with(j, l0, phi, r, HamiltonianForm::Legendre)?;
        let printed = energy_spectrum_with(j, l0, phi, r, HamiltonianForm::Printed)?;
        rows.push(vec![
            j.into(),
            l0.into(),
            phi.into(),
            r.into(),
            e.energy.into(),
            printed.energy.into(),
            quantized_energy(j, l0, r)?.into(),
            "ok".into(),
        ]);
    }
    Ok(rows)
}

fn dynamics_point(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let r = p.r.unwrap_or(0.0);
    let s0 = MobiusState::new(
        p.phi.unwrap_or(0.0),
        p.phi_dot.unwrap_or(1.0),
        p.z0.unwrap_or(0.0),
        p.z0_dot.unwrap_or(0.0),
    );
    let traj = integrate_mobius(&s0, r, p.t_end.unwrap_or(10.0), p.dt.unwrap_or(1e-3))?;
    let conserved = traj.conserved()?;
    Ok(traj
        .states
        .iter()
        .zip(conserved)
        .enumerate()
        .map(|(i, (s, c))| {
            vec![
                traj.time(i).into(),
                s.phi.into(),
                s.phi_dot.into(),
                s.z0.into(),
                s.z0_dot.into(),
                c.energy.into(),
                c.j.into(),
                c.l0.into(),
            ]
        })
        .collect())
}

fn project_projector(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let phi = p.phi.unwrap_or(0.0);
    let spec = ProjectionSpec::new(p.delta.unwrap_or(0.1), p.theta.unwrap_or_else(|| constraint_theta(phi)), phi)?;
    let v = universal_projector(&spec)?;
    Ok(ok(vec![
        spec.delta.into(),
        spec.theta.into(),
        spec.phi.into(),
        spec.deviation().into(),
        v.quadrature.into(),
        v.indicator.into(),
        v.cutoff.into(),
        v.tail_bound.into(),
        v.boundary.into(),
    ]))
}

fn project_overlap_point(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let a = label(p)?;
    let b = second_label(p)?;
    let projected = project_overlap(&a, &b)?;
    let per_term = projected_overlap_series(&a, &b, PhaseReading::PerTerm)?;
    let outside = projected_overlap_series(&a, &b, PhaseReading::OutsideSum)?;
    Ok(ok(vec![
        a.l.into(),
        a.phi.into(),
        b.l.into(),
        b.phi.into(),
        a.r.into(),
        sector_text(p),
        projected.re.into(),
        projected.im.into(),
        per_term.re.into(),
        per_term.im.into(),
        outside.re.into(),
        outside.im.into(),
        (per_term - outside).norm().into(),
    ]))
}

fn project_chain(p: &Params, _: &RunConfig) -> Result<Rows, PointError> {
    let (l, phi, r) = (p.l.unwrap_or(0.0), p.phi.unwrap_or(0.0), p.r.unwrap_or(0.0));
    let theta = p.theta.unwrap_or_else(|| constraint_theta(phi));
    let s = offset(p);
    let torus = build_torus_cs(l, theta, phi, r, s, default_torus_j_max(l, theta, phi, r)?)?;
    let sv = torus.singular_values();
    let marginal = torus.strip_marginal()?;
    let strip = StateLabel::new(l, phi, r, s, SignConvention::Embedded)?;
    let direct = states::build_cs(&strip, marginal.j_max())?;
    let circle = project_mobius_to_circle(&marginal)?;
    let circle_direct = states::build_cs_default(&StateLabel::circle(strip.lprime(), phi, Offset::Integer)?)?;
    let again = project_mobius_to_circle(&circle)?;
    Ok(ok(vec![
        l.into(),
        phi.into(),
        r.into(),
        sector_text(p),
        theta.into(),
        strip.lprime().into(),
        (sv.get(1).copied().unwrap_or(0.0) / sv[0]).into(),
        marginal.distance(&direct)?.into(),
        circle.distance(&circle_direct)?.into(),
        again.distance(&circle)?.into(),
    ]))
}
