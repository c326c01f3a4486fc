//! Classical mechanics of a unit-mass particle on the Möbius strip and on the
//! embedding torus, plus the diagonal quantum spectrum.
//!
//! The strip dynamics uses the sign convention the torus produces under the
//! constraint θ = (φ+π)/2, i.e. `Z = Z₀ - r sin(φ/2)`. In that convention the
//! Lagrangian is
//!
//! ```text
//! L = ½ { A(φ) φ̇² + 2 B(φ) φ̇ Ż₀ + Ż₀² },   A = (1 + r c)² + r²/4,   B = -(r/2) c
//! ```
//!
//! with `c = cos(φ/2)`, `s = sin(φ/2)`. `Z₀` is cyclic, so `L₀ = B φ̇ + Ż₀` is
//! conserved, and the reduced metric is `D = A - B² = (1 + r c)² + (r²/4) s²`.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::geometry::{SignConvention, TorusGeometry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusState {
    pub phi: f64,
    pub phi_dot: f64,
    pub z0: f64,
    pub z0_dot: f64,
}

impl MobiusState {
    pub fn new(phi: f64, phi_dot: f64, z0: f64, z0_dot: f64) -> Self {
        Self {
            phi,
            phi_dot,
            z0,
            z0_dot,
        }
    }

    fn to_array(self) -> [f64; 4] {
        [self.phi, self.phi_dot, self.z0, self.z0_dot]
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self::new(y[0], y[1], y[2], y[3])
    }

    /// Same position, velocities negated.
    pub fn reversed(self) -> Self {
        Self::new(self.phi, -self.phi_dot, self.z0, -self.z0_dot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusState {
    pub theta: f64,
    pub phi: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
    pub z0: f64,
    pub z0_dot: f64,
}

impl TorusState {
    /// Lift a strip state onto the torus through θ = (φ+π)/2, θ̇ = φ̇/2.
    pub fn constrained(s: &MobiusState) -> Self {
        Self {
            theta: crate::geometry::constraint_theta(s.phi),
            phi: s.phi,
            theta_dot: 0.5 * s.phi_dot,
            phi_dot: s.phi_dot,
            z0: s.z0,
            z0_dot: s.z0_dot,
        }
    }
}

/// Constants of motion of the strip: conjugate momentum `J = p_φ`, axial
/// momentum `L₀` and energy `E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet {
    pub j: f64,
    pub l0: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusConservedSet {
    pub j0: f64,
    pub l0: f64,
    pub p_theta: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub j: f64,
    pub l0: f64,
    pub energy: f64,
}

/// Which closed form to use for the strip Hamiltonian away from φ = (2k+1)π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HamiltonianForm {
    /// `½{𝕁² D + L₀²}`, the Legendre transform of the strip Lagrangian.
    #[default]
    Legendre,
    /// `½{𝕁² [(1 + r c)² - (r²/4) cos φ] + L₀²}`; agrees with `Legendre` only where `c = 0`.
    Printed,
}

fn check_width(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(domain(format!("strip half-width must satisfy 0 <= r < 1, got {r}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct StripMetric {
    a: f64,
    b: f64,
    d: f64,
    da: f64,
    db: f64,
}

impl StripMetric {
    fn at(phi: f64, r: f64) -> Self {
        let (s, c) = crate::geometry::half_angle_sin_cos(phi);
        let rho = 1.0 + r * c;
        let a = rho * rho + 0.25 * r * r;
        let b = -0.5 * r * c;
        Self {
            a,
            b,
            d: rho * rho + 0.25 * r * r * s * s,
            da: -r * s * rho,
            db: 0.25 * r * s,
        }
    }
}

/// Strip Lagrangian `½{φ̇²[(1+r c)² + r²/4] - r c Ż₀ φ̇ + Ż₀²}`.
pub fn mobius_lagrangian(s: &MobiusState, r: f64) -> Result<f64> {
    check_width(r)?;
    let m = StripMetric::at(s.phi, r);
    Ok(0.5 * (m.a * s.phi_dot * s.phi_dot + 2.0 * m.b * s.phi_dot * s.z0_dot + s.z0_dot * s.z0_dot))
}

/// `½|Ṗ|²` with `Ṗ` obtained by differentiating the strip embedding along the
/// motion. The derivative is taken with a complex step, so it carries no
/// truncation error.
pub fn mobius_lagrangian_embedding(s: &MobiusState, r: f64, sc: SignConvention) -> Result<f64> {
    check_width(r)?;
    let z_sign = sc.z_sign();
    let v = velocity_by_complex_step(|t| {
        let phi = s.phi + t * s.phi_dot;
        let z0 = s.z0 + t * s.z0_dot;
        let half = 0.5 * phi;
        let rho = 1.0 + r * half.cos();
        [rho * phi.cos(), rho * phi.sin(), z0 + z_sign * r * half.sin()]
    });
    Ok(0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
}

/// Torus Lagrangian `½{φ̇²(R + r sinθ)² + r²θ̇² - 2 r sinθ Ż₀ θ̇ + Ż₀²}`.
pub fn torus_lagrangian(s: &TorusState, g: &TorusGeometry) -> f64 {
    let sin_t = s.theta.sin();
    let rho = g.big_r + g.r * sin_t;
    0.5 * (s.phi_dot * s.phi_dot * rho * rho + (g.r * s.theta_dot).powi(2)
        - 2.0 * g.r * sin_t * s.z0_dot * s.theta_dot
        + s.z0_dot * s.z0_dot)
}

/// The torus Lagrangian with the extra `(r²/4) φ̇²` term inside the φ̇²
/// bracket. That term is the image of `r²θ̇²` under θ̇ = φ̇/2 and is counted
/// twice here, so this form exceeds [`torus_lagrangian`] by `r² φ̇²/8`.
pub fn torus_lagrangian_printed(s: &TorusState, g: &TorusGeometry) -> f64 {
    let sin_t = s.theta.sin();
    let rho = g.big_r + g.r * sin_t;
    0.5 * (s.phi_dot * s.phi_dot * (rho * rho + 0.25 * g.r * g.r) + (g.r * s.theta_dot).powi(2)
        - 2.0 * g.r * sin_t * s.z0_dot * s.theta_dot
        + s.z0_dot * s.z0_dot)
}

/// `½|Ṗ|²` from the torus embedding, complex-step differentiated.
pub fn torus_lagrangian_embedding(s: &TorusState, g: &TorusGeometry) -> f64 {
    let v = velocity_by_complex_step(|t| {
        let theta = s.theta + t * s.theta_dot;
        let phi = s.phi + t * s.phi_dot;
        let z0 = s.z0 + t * s.z0_dot;
        let rho = g.big_r + g.r * theta.sin();
        [rho * phi.cos(), rho * phi.sin(), z0 + g.r * theta.cos()]
    });
    0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

fn velocity_by_complex_step(path: impl Fn(Complex64) -> [Complex64; 3]) -> [f64; 3] {
    const H: f64 = 1e-30;
    let p = path(Complex64::new(0.0, H));
    [p[0].im / H, p[1].im / H, p[2].im / H]
}

/// `(p_φ, L₀)` with `p_φ = φ̇ D - (r/2) c L₀` and `L₀ = -(r/2) c φ̇ + Ż₀`.
pub fn mobius_momenta(s: &MobiusState, r: f64) -> Result<(f64, f64)> {
    check_width(r)?;
    let m = StripMetric::at(s.phi, r);
    let l0 = m.b * s.phi_dot + s.z0_dot;
    let p_phi = m.d * s.phi_dot + m.b * l0;
    Ok((p_phi, l0))
}

/// 𝕁 = φ̇ = (J + (r/2) L₀ cos(φ/2)) / D.
pub fn mobius_phidot_from_j(j: f64, l0: f64, phi: f64, r: f64) -> Result<f64> {
    check_width(r)?;
    let m = StripMetric::at(phi, r);
    Ok((j - m.b * l0) / m.d)
}

pub fn mobius_hamiltonian(j: f64, l0: f64, phi: f64, r: f64) -> Result<f64> {
    mobius_hamiltonian_with(j, l0, phi, r, HamiltonianForm::Legendre)
}

pub fn mobius_hamiltonian_with(j: f64, l0: f64, phi: f64, r: f64, form: HamiltonianForm) -> Result<f64> {
    check_width(r)?;
    let m = StripMetric::at(phi, r);
    let phi_dot = (j - m.b * l0) / m.d;
    let bracket = match form {
        HamiltonianForm::Legendre => m.d,
        HamiltonianForm::Printed => {
            let (s, c) = crate::geometry::half_angle_sin_cos(phi);
            let rho = 1.0 + r * c;
            rho * rho - 0.25 * r * r * (c * c - s * s)
        }
    };
    Ok(0.5 * (phi_dot * phi_dot * bracket + l0 * l0))
}

/// Energy of a strip state, `½(D φ̇² + L₀²)`.
pub fn mobius_energy(s: &MobiusState, r: f64) -> Result<f64> {
    mobius_lagrangian(s, r)
}

pub fn mobius_conserved(s: &MobiusState, r: f64) -> Result<ConservedSet> {
    let (j, l0) = mobius_momenta(s, r)?;
    Ok(ConservedSet {
        j,
        l0,
        energy: mobius_energy(s, r)?,
    })
}

/// Momenta of the torus motion (unit central radius).
pub fn torus_conserved(s: &TorusState, r: f64) -> Result<TorusConservedSet> {
    let g = TorusGeometry::unit(r, 0.0)?;
    let sin_t = s.theta.sin();
    let rho = 1.0 + r * sin_t;
    Ok(TorusConservedSet {
        j0: s.phi_dot * rho * rho,
        l0: -r * sin_t * s.theta_dot + s.z0_dot,
        p_theta: r * r * s.theta_dot - r * sin_t * s.z0_dot,
        energy: torus_lagrangian(s, &g),
    })
}

/// `H = ½{J₀²/(1 + r sinθ)² + (p_θ + r sinθ L₀)²/(r cosθ)² + L₀²}`.
pub fn torus_hamiltonian(j0: f64, l0: f64, p_theta: f64, theta: f64, r: f64) -> Result<f64> {
    check_width(r)?;
    let (sin_t, cos_t) = theta.sin_cos();
    let rc = r * cos_t;
    if rc.abs() < 1e-9 {
        return Err(Error::Singular(format!(
            "(r cos θ)² vanishes at θ = {theta}, r = {r}"
        )));
    }
    let rho = 1.0 + r * sin_t;
    Ok(0.5 * (j0 * j0 / (rho * rho) + (p_theta + r * sin_t * l0).powi(2) / (rc * rc) + l0 * l0))
}

/// Energy of the level `|j⟩` at angle φ.
pub fn energy_spectrum(j: f64, l0: f64, phi: f64, r: f64) -> Result<SpectrumEntry> {
    energy_spectrum_with(j, l0, phi, r, HamiltonianForm::Legendre)
}

pub fn energy_spectrum_with(j: f64, l0: f64, phi: f64, r: f64, form: HamiltonianForm) -> Result<SpectrumEntry> {
    Ok(SpectrumEntry {
        j,
        l0,
        energy: mobius_hamiltonian_with(j, l0, phi, r, form)?,
    })
}

/// The spectrum at the quantised angles φ = (2k+1)π: `2j²/(4 + r²) + L₀²/2`.
pub fn quantized_energy(j: f64, l0: f64, r: f64) -> Result<f64> {
    check_width(r)?;
    Ok(2.0 * j * j / (4.0 + r * r) + 0.5 * l0 * l0)
}

/// Level spacing dE/dj of the quantised spectrum.
pub fn quantized_frequency(j: f64, r: f64) -> Result<f64> {
    check_width(r)?;
    Ok(4.0 * j / (4.0 + r * r))
}

/// Integrated strip trajectory sampled every `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub r: f64,
    pub dt: f64,
    /// Internal step after any halving.
    pub step: f64,
    pub halvings: u32,
    pub states: Vec<MobiusState>,
    /// Largest relative energy deviation from the initial state.
    pub max_energy_drift: f64,
}

impl Trajectory {
    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.dt
    }

    pub fn last(&self) -> &MobiusState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn conserved(&self) -> Result<Vec<ConservedSet>> {
        self.states.iter().map(|s| mobius_conserved(s, self.r)).collect()
    }
}

/// Relative energy drift above which a step size is rejected.
pub const ENERGY_DRIFT_LIMIT: f64 = 1e-6;
const MAX_HALVINGS: u32 = 8;

/// Classical RK4 on the Euler–Lagrange system, with the step halved until the
/// relative energy drift over the whole run stays below
/// [`ENERGY_DRIFT_LIMIT`]. `t_end` is rounded to a whole number of `dt`.
pub fn integrate_mobius(s0: &MobiusState, r: f64, t_end: f64, dt: f64) -> Result<Trajectory> {
    check_width(r)?;
    if !(dt > 0.0) || !(t_end > 0.0) || !dt.is_finite() || !t_end.is_finite() {
        return Err(domain(format!("need dt > 0 and t_end > 0, got dt = {dt}, t_end = {t_end}")));
    }
    if !s0.to_array().iter().all(|x| x.is_finite()) {
        return Err(domain("initial state must be finite"));
    }
    let samples = ((t_end / dt).round() as usize).max(1);
    let e0 = mobius_energy(s0, r)?;
    let scale = e0.abs().max(f64::MIN_POSITIVE);

    let mut last_drift = f64::NAN;
    for halvings in 0..=MAX_HALVINGS {
        let substeps = 1usize << halvings;
        let h = dt / substeps as f64;
        let mut y = s0.to_array();
        let mut comp = [0.0; 4];
        let mut states = Vec::with_capacity(samples + 1);
        states.push(*s0);
        let mut max_drift: f64 = 0.0;
        for _ in 0..samples {
            for _ in 0..substeps {
                let dy = rk4_increment(&y, h, r);
                kahan_add(&mut y, &mut comp, &dy);
            }
            let s = MobiusState::from_array(y);
            max_drift = max_drift.max((mobius_energy(&s, r)? - e0).abs() / scale);
            states.push(s);
        }
        if max_drift <= ENERGY_DRIFT_LIMIT {
            return Ok(Trajectory {
                r,
                dt,
                step: h,
                halvings,
                states,
                max_energy_drift: max_drift,
            });
        }
        last_drift = max_drift;
    }
    Err(Error::StepRejected {
        drift: last_drift,
        halvings: MAX_HALVINGS,
    })
}

fn strip_rhs(y: &[f64; 4], r: f64) -> [f64; 4] {
    let m = StripMetric::at(y[0], r);
    let w = y[1];
    let phi_ddot = w * w * (m.b * m.db - 0.5 * m.da) / m.d;
    let z_ddot = -m.db * w * w - m.b * phi_ddot;
    [w, phi_ddot, y[3], z_ddot]
}

fn rk4_increment(y: &[f64; 4], h: f64, r: f64) -> [f64; 4] {
    let axpy = |a: &[f64; 4], k: &[f64; 4], c: f64| -> [f64; 4] {
        [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2], a[3] + c * k[3]]
    };
    let k1 = strip_rhs(y, r);
    let k2 = strip_rhs(&axpy(y, &k1, 0.5 * h), r);
    let k3 = strip_rhs(&axpy(y, &k2, 0.5 * h), r);
    let k4 = strip_rhs(&axpy(y, &k3, h), r);
    let mut dy = [0.0; 4];
    for i in 0..4 {
        dy[i] = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    dy
}

fn kahan_add(y: &mut [f64; 4], comp: &mut [f64; 4], dy: &[f64; 4]) {
    for i in 0..4 {
        let adj = dy[i] - comp[i];
        let next = y[i] + adj;
        comp[i] = (next - y[i]) - adj;
        y[i] = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cylinder_reductions() {
        let s = MobiusState::new(0.7, 1.3, 0.2, -0.4);
        let l = mobius_lagrangian(&s, 0.0).unwrap();
        assert!((l - 0.5 * (1.3f64.powi(2) + 0.16)).abs() < 1e-15);
        assert_eq!(mobius_momenta(&s, 0.0).unwrap(), (1.3, -0.4));
        assert_eq!(mobius_phidot_from_j(2.5, 0.3, 1.0, 0.0).unwrap(), 2.5);
        assert!((mobius_hamiltonian(2.0, 0.5, 1.0, 0.0).unwrap() - 0.5 * (4.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn lagrangian_at_pi() {
        let s = MobiusState::new(PI, 1.0, 0.0, 0.0);
        assert!((mobius_lagrangian(&s, 0.5).unwrap() - 0.53125).abs() < 1e-15);
    }

    #[test]
    fn momenta_and_inverse() {
        let s = MobiusState::new(PI, 2.0, 0.0, 1.0);
        let (p, l0) = mobius_momenta(&s, 0.5).unwrap();
        assert!((p - 2.125).abs() < 1e-14);
        assert!((l0 - 1.0).abs() < 1e-15);
        assert!((mobius_phidot_from_j(2.125, 1.0, PI, 0.5).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn torus_examples() {
        let g = TorusGeometry::unit(0.5, 0.0).unwrap();
        let s = TorusState {
            theta: PI / 2.0,
            phi: 0.0,
            theta_dot: 0.0,
            phi_dot: 1.0,
            z0: 0.0,
            z0_dot: 0.0,
        };
        assert!((torus_lagrangian_printed(&s, &g) - 1.15625).abs() < 1e-15);
        assert!((torus_lagrangian(&s, &g) - 1.125).abs() < 1e-15);

        let g0 = TorusGeometry::new(1.7, 0.0, 0.0).unwrap();
        let s = TorusState {
            theta: 0.4,
            phi: 1.0,
            theta_dot: 3.0,
            phi_dot: 0.8,
            z0: 0.0,
            z0_dot: 0.6,
        };
        let expected = 0.5 * (0.64 * 1.7 * 1.7 + 0.36);
        assert!((torus_lagrangian(&s, &g0) - expected).abs() < 1e-15);
        assert!((torus_lagrangian_printed(&s, &g0) - expected).abs() < 1e-15);
    }

    #[test]
    fn torus_hamiltonian_singular_and_equatorial() {
        assert!(matches!(
            torus_hamiltonian(1.0, 0.0, 0.0, PI / 2.0, 0.5),
            Err(Error::Singular(_))
        ));
        assert!((torus_hamiltonian(1.5, 0.0, 0.0, 0.0, 0.5).unwrap() - 1.125).abs() < 1e-15);
    }

    #[test]
    fn spectrum_examples() {
        let e = energy_spectrum(0.5, 0.0, PI, 0.5).unwrap().energy;
        assert!((e - 0.5 / 4.25).abs() < 1e-15);
        assert!((e - 0.117_647_058_823_529_4).abs() < 1e-15);
        assert_eq!(energy_spectrum(0.0, 0.0, 1.1, 0.3).unwrap().energy, 0.0);
    }

    #[test]
    fn integrator_rejects_bad_steps() {
        let s = MobiusState::new(0.0, 1.0, 0.0, 0.0);
        assert!(integrate_mobius(&s, 0.5, 1.0, 0.0).is_err());
        assert!(integrate_mobius(&s, 0.5, -1.0, 0.1).is_err());
        assert!(integrate_mobius(&s, 1.5, 1.0, 0.1).is_err());
    }

    #[test]
    fn coarse_step_is_halved() {
        let s = MobiusState::new(0.3, 3.0, 0.0, 1.0);
        let traj = integrate_mobius(&s, 0.5, 5.0, 0.5).unwrap();
        assert!(traj.halvings > 0);
        assert!(traj.max_energy_drift <= ENERGY_DRIFT_LIMIT);
        assert_eq!(traj.states.len(), 11);
    }
}
