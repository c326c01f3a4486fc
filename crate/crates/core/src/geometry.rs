//! Torus and Möbius-strip embeddings, the angle constraint θ = (φ+π)/2 and
//! the coherent-state label map (l, φ) → ξ.

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Radii and axial offset of the embedding torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGeometry {
    /// Central radius.
    pub big_r: f64,
    /// Tube radius, equal to the half-width of the strip.
    pub r: f64,
    /// Axial offset of the central circle.
    pub l: f64,
}

impl TorusGeometry {
    pub fn new(big_r: f64, r: f64, l: f64) -> Result<Self> {
        if !(big_r > 0.0) || !(r >= 0.0) || !(r < big_r) || !l.is_finite() {
            return Err(domain(format!(
                "torus geometry needs 0 <= r < R, got R = {big_r}, r = {r}"
            )));
        }
        Ok(Self { big_r, r, l })
    }

    /// Unit central radius, the setting used by every coherent-state formula.
    pub fn unit(r: f64, l: f64) -> Result<Self> {
        Self::new(1.0, r, l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

/// Sign of the `r sin(φ/2)` term in the strip height `Z = l ± r sin(φ/2)`.
///
/// `Printed` is the strip parametrisation `Z = l + r sin(φ/2)` used for the
/// coherent-state label. `Embedded` is what the torus embedding produces once
/// the constraint is substituted, `Z = l + r cos((φ+π)/2) = l - r sin(φ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SignConvention {
    #[default]
    Printed,
    Embedded,
}

impl SignConvention {
    pub fn z_sign(self) -> f64 {
        match self {
            SignConvention::Printed => 1.0,
            SignConvention::Embedded => -1.0,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(SignConvention::Printed),
            -1 => Ok(SignConvention::Embedded),
            other => Err(domain(format!("z_sign must be +1 or -1, got {other}"))),
        }
    }
}

/// `X = (R + r sinθ) cosφ, Y = (R + r sinθ) sinφ, Z = l + r cosθ`.
pub fn torus_point(theta: f64, phi: f64, g: &TorusGeometry) -> Point3 {
    let rho = g.big_r + g.r * theta.sin();
    Point3::new(rho * phi.cos(), rho * phi.sin(), g.l + g.r * theta.cos())
}

/// The Möbius constraint θ = (φ + π)/2.
pub fn constraint_theta(phi: f64) -> f64 {
    0.5 * (phi + std::f64::consts::PI)
}

/// `(sin πu, cos πu)` with the argument reduced by quarter turns first, so
/// that integer and half-integer `u` give exact zeros and unit values.
pub fn sin_cos_pi(u: f64) -> (f64, f64) {
    let n = (2.0 * u).round();
    let (s, c) = (std::f64::consts::PI * (u - 0.5 * n)).sin_cos();
    match (n as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// `(sin(φ/2), cos(φ/2))` through [`sin_cos_pi`]; exact at multiples of π.
pub fn half_angle_sin_cos(phi: f64) -> (f64, f64) {
    sin_cos_pi(phi / (2.0 * std::f64::consts::PI))
}

/// Point on the strip boundary at angle φ (central radius taken as 1).
pub fn mobius_point(phi: f64, g: &TorusGeometry, sc: SignConvention) -> Point3 {
    let (s, c) = half_angle_sin_cos(phi);
    let rho = 1.0 + g.r * c;
    Point3::new(rho * phi.cos(), rho * phi.sin(), g.l + sc.z_sign() * g.r * s)
}

fn check_width(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(domain(format!("strip half-width must satisfy 0 <= r < 1, got {r}")));
    }
    Ok(())
}

/// Coherent-state label ξ = exp(-(l ± r sin(φ/2)) + iφ) (1 + r cos(φ/2)).
pub fn xi_label(l: f64, phi: f64, r: f64, sc: SignConvention) -> Result<Complex64> {
    check_width(r)?;
    let (s, c) = half_angle_sin_cos(phi);
    let modulus = (-(l + sc.z_sign() * r * s)).exp() * (1.0 + r * c);
    Ok(Complex64::from_polar(modulus, phi))
}

/// Shifted action label l′ = (l ± r sin(φ/2)) - ln(1 + r cos(φ/2)) = -ln|ξ|.
pub fn lprime(l: f64, phi: f64, r: f64, sc: SignConvention) -> Result<f64> {
    check_width(r)?;
    let (s, c) = half_angle_sin_cos(phi);
    Ok(l + sc.z_sign() * r * s - (r * c).ln_1p())
}
