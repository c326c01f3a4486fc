//! Coherent states on the Möbius strip in the angular-momentum basis.
//!
//! A state with label `(l, φ)` has coefficients
//!
//! ```text
//! ⟨j|l,φ⟩ = exp(l′ j - iφ j - j²/2),   j ∈ ℤ + s
//! ```
//!
//! where `l′` is the shifted action label from [`crate::geometry::lprime`] and
//! `s ∈ {0, ½}` selects the integer (boson) or half-integer (fermion) basis.
//! For half-integer `j` the phase `e^{-iφj}` is evaluated on the unreduced
//! angle, so the state changes sign under φ → φ + 2π and closes after 4π.
//!
//! Every quantity is available both as a truncated basis sum and as a closed
//! theta-function form on the lattice parameter `τ = i/π`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics;
use crate::error::{domain, Error, Result};
use crate::geometry::{self, SignConvention};
use crate::theta::{self, SeriesPolicy, ThetaArgument};

/// Relative tail tolerance every constructed coherent-state vector must meet.
pub const CS_TAIL_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn tau_cs() -> Complex64 {
    Complex64::new(0.0, 1.0 / PI)
}

fn tau_dual() -> Complex64 {
    Complex64::new(0.0, PI)
}

/// Basis offset `s`: `j` runs over `ℤ + s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Offset {
    #[default]
    Integer,
    Half,
}

impl Offset {
    pub fn value(self) -> f64 {
        match self {
            Offset::Integer => 0.0,
            Offset::Half => 0.5,
        }
    }

    /// Element of `ℤ + s` closest to `x`.
    pub fn nearest(self, x: f64) -> f64 {
        let s = self.value();
        s + (x - s).round()
    }

    pub fn contains(self, j: f64) -> bool {
        (j - self.nearest(j)).abs() <= 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateLabel {
    pub l: f64,
    pub phi: f64,
    pub r: f64,
    pub offset: Offset,
    pub sign: SignConvention,
}

impl StateLabel {
    /// `r = 0` is admitted as the circle limit.
    pub fn new(l: f64, phi: f64, r: f64, offset: Offset, sign: SignConvention) -> Result<Self> {
        if !l.is_finite() || !phi.is_finite() {
            return Err(domain(format!("label must be finite, got l = {l}, phi = {phi}")));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(domain(format!("strip half-width must satisfy 0 <= r < 1, got {r}")));
        }
        Ok(Self {
            l,
            phi,
            r,
            offset,
            sign,
        })
    }

    pub fn mobius(l: f64, phi: f64, r: f64, offset: Offset) -> Result<Self> {
        Self::new(l, phi, r, offset, SignConvention::Printed)
    }

    /// Circle label: `r = 0`, so `l′ = l`.
    pub fn circle(l: f64, phi: f64, offset: Offset) -> Result<Self> {
        Self::new(l, phi, 0.0, offset, SignConvention::Printed)
    }

    pub fn lprime(&self) -> f64 {
        geometry::lprime(self.l, self.phi, self.r, self.sign).expect("validated at construction")
    }

    pub fn xi(&self) -> Complex64 {
        geometry::xi_label(self.l, self.phi, self.r, self.sign).expect("validated at construction")
    }

    /// `ceil(|l′|) + 9`, enough for a relative tail below [`CS_TAIL_TOL`].
    pub fn default_j_max(&self) -> f64 {
        self.lprime().abs().ceil() + 9.0
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        Self { phi, ..*self }
    }
}

/// Truncated coefficient sequence over `|j⟩`, `j = n + s`, `|j| <= j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    offset: Offset,
    n_min: i64,
    coeffs: Vec<Complex64>,
    j_max: f64,
    tail_bound: f64,
}

impl FockVector {
    pub(crate) fn from_parts(offset: Offset, n_min: i64, coeffs: Vec<Complex64>, j_max: f64, tail_bound: f64) -> Self {
        Self {
            offset,
            n_min,
            coeffs,
            j_max,
            tail_bound,
        }
    }

    pub fn offset(&self) -> Offset {
        self.offset
    }

    pub fn j_max(&self) -> f64 {
        self.j_max
    }

    /// Bound on the norm of the discarded coefficients.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn j_min(&self) -> f64 {
        self.n_min as f64 + self.offset.value()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        let base = self.j_min();
        self.coeffs.iter().enumerate().map(move |(k, c)| (base + k as f64, *c))
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, j: f64) -> Option<Complex64> {
        if !self.offset.contains(j) {
            return None;
        }
        let n = (j - self.offset.value()).round() as i64;
        usize::try_from(n - self.n_min).ok().and_then(|k| self.coeffs.get(k).copied())
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self|other⟩` over the common support.
    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        if self.offset != other.offset {
            return Err(domain("inner product between different basis offsets"));
        }
        let lo = self.n_min.max(other.n_min);
        let hi = (self.n_min + self.coeffs.len() as i64).min(other.n_min + other.coeffs.len() as i64);
        Ok((lo..hi)
            .map(|n| self.coeffs[(n - self.n_min) as usize].conj() * other.coeffs[(n - other.n_min) as usize])
            .sum())
    }

    /// Euclidean distance, treating missing coefficients as zero.
    pub fn distance(&self, other: &FockVector) -> Result<f64> {
        if self.offset != other.offset {
            return Err(domain("distance between different basis offsets"));
        }
        let lo = self.n_min.min(other.n_min);
        let hi = (self.n_min + self.coeffs.len() as i64).max(other.n_min + other.coeffs.len() as i64);
        let at = |v: &FockVector, n: i64| {
            usize::try_from(n - v.n_min)
                .ok()
                .and_then(|k| v.coeffs.get(k).copied())
                .unwrap_or_default()
        };
        Ok((lo..hi).map(|n| (at(self, n) - at(other, n)).norm_sqr()).sum::<f64>().sqrt())
    }

    /// The shift `U|j⟩ = |j+1⟩`.
    pub fn shift_up(&self) -> FockVector {
        FockVector {
            n_min: self.n_min + 1,
            j_max: self.j_max + 1.0,
            ..self.clone()
        }
    }

    /// Multiply each coefficient by `f(j)`.
    pub fn map_diagonal(&self, f: impl Fn(f64) -> Complex64) -> FockVector {
        let base = self.j_min();
        FockVector {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * f(base + k as f64))
                .collect(),
            ..self.clone()
        }
    }
}

fn gaussian_tail(lp: f64, distance: f64) -> f64 {
    // Σ_{k>=0} e^{l′²} e^{-(d+k)²}
    if distance <= 0.0 {
        return f64::INFINITY;
    }
    (lp * lp - distance * distance).exp() / (1.0 - (-(2.0 * distance + 1.0)).exp())
}

/// Coherent state `Σ_j exp(l′ j - iφ j - j²/2) |j⟩` truncated at `|j| <= j_max`.
pub fn build_cs(label: &StateLabel, j_max: f64) -> Result<FockVector> {
    if !(j_max > 0.0) || !j_max.is_finite() {
        return Err(domain(format!("j_max must be positive, got {j_max}")));
    }
    let s = label.offset.value();
    let lp = label.lprime();
    let n_min = (-j_max - s).ceil() as i64;
    let n_max = (j_max - s).floor() as i64;
    if n_max < n_min {
        return Err(domain(format!("j_max = {j_max} admits no basis state")));
    }
    let coeffs: Vec<Complex64> = (n_min..=n_max)
        .map(|n| {
            let j = n as f64 + s;
            Complex64::new(lp * j - 0.5 * j * j, -label.phi * j).exp()
        })
        .collect();

    let j_lo = n_min as f64 + s;
    let j_hi = n_max as f64 + s;
    let tail2 = gaussian_tail(lp, j_hi + 1.0 - lp) + gaussian_tail(lp, lp - (j_lo - 1.0));
    let tail_bound = tail2.sqrt();
    let v = FockVector::from_parts(label.offset, n_min, coeffs, j_max, tail_bound);
    let norm = v.norm2().sqrt();
    if !(tail_bound < CS_TAIL_TOL * norm) {
        // |c_j|² ~ e^{l′²} e^{-(j-l′)²} relative to a norm² of about e^{l′²} √π
        let needed = lp.abs() + (-(CS_TAIL_TOL * CS_TAIL_TOL).ln() + 1.0).sqrt();
        return Err(Error::Precision {
            achieved: tail_bound / norm,
            target: CS_TAIL_TOL,
            hint: Some(format!("increase j_max to at least {:.0}", needed.ceil())),
        });
    }
    Ok(v)
}

/// `build_cs` at the default truncation.
pub fn build_cs_default(label: &StateLabel) -> Result<FockVector> {
    build_cs(label, label.default_j_max())
}

/// The fiducial vector `Σ_j e^{-j²/2} |j⟩` (unit label).
pub fn fiducial(j_max: f64, offset: Offset) -> Result<FockVector> {
    build_cs(&StateLabel::circle(0.0, 0.0, offset)?, j_max)
}

fn check_same_sector(a: &StateLabel, b: &StateLabel) -> Result<()> {
    if a.offset != b.offset {
        return Err(domain("overlap requires labels in the same basis sector"));
    }
    Ok(())
}

/// Θ₃ (integer sector) or Θ₂ (half-integer sector) at `(ν, i/π)`.
fn sector_theta(offset: Offset, nu: Complex64) -> Result<Complex64> {
    let arg = ThetaArgument::new(nu, tau_cs())?;
    let policy = SeriesPolicy::default();
    match offset {
        Offset::Integer => theta::theta3(arg, &policy),
        Offset::Half => theta::theta2(arg, &policy),
    }
}

/// `⟨a|b⟩` in closed form: `Θ((φ_a - φ_b)/2π - i(l′_a + l′_b)/2π | i/π)`.
pub fn overlap(a: &StateLabel, b: &StateLabel) -> Result<Complex64> {
    check_same_sector(a, b)?;
    let nu = Complex64::new(
        (a.phi - b.phi) / (2.0 * PI),
        -(a.lprime() + b.lprime()) / (2.0 * PI),
    );
    sector_theta(a.offset, nu)
}

/// `⟨a|b⟩` as a truncated basis sum.
pub fn overlap_direct(a: &StateLabel, b: &StateLabel) -> Result<Complex64> {
    check_same_sector(a, b)?;
    let j_max = a.default_j_max().max(b.default_j_max());
    build_cs(a, j_max)?.inner(&build_cs(b, j_max)?)
}

/// `⟨l,φ|l,φ⟩ = Θ₃(i l′/π | i/π)` (Θ₂ in the half-integer sector).
pub fn norm2(label: &StateLabel) -> Result<f64> {
    Ok(overlap(label, label)?.re)
}

pub fn norm2_direct(label: &StateLabel) -> Result<f64> {
    Ok(build_cs_default(label)?.norm2())
}

/// Norm through the modular image: `e^{l′²} √π Θ₃(l′ + s | iπ)`.
pub fn norm2_modular(label: &StateLabel) -> Result<f64> {
    let lp = label.lprime();
    let arg = ThetaArgument::real(lp + label.offset.value(), tau_dual())?;
    let inner = theta::theta3(arg, &SeriesPolicy::default())?;
    Ok((lp * lp).exp() * PI.sqrt() * inner.re)
}

/// The three evaluations of `⟨Ĵ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectJ {
    /// `Σ j |c_j|² / Σ |c_j|²`.
    pub direct: f64,
    /// `l′ + ½ ∂_ν ln Θ₃(l′ + s | iπ)`.
    pub logderiv: f64,
    /// `l′` plus the explicit nome series for the correction.
    pub series: f64,
}

impl ExpectJ {
    pub fn max_spread(&self) -> f64 {
        let v = [self.direct, self.logderiv, self.series];
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// `⟨Ĵ⟩ - l′` from the nome series,
///
/// ```text
/// -2π sin(2π(l′+s)) Σ_{n≥1} q^{2n-1} / |1 + q^{2n-1} e^{2iπ(l′+s)}|²,   q = e^{-π²}
/// ```
///
/// Exactly zero whenever `l′ ∈ ½ℤ`.
pub fn expect_j_correction(lprime: f64, offset: Offset) -> f64 {
    let x = lprime + offset.value();
    let angle = 2.0 * PI * x;
    let q = (-PI * PI).exp();
    let q2 = q * q;
    let mut qpow = q;
    let mut sum = 0.0;
    let cos_a = angle.cos();
    while qpow > 1e-300 {
        let term = qpow / (1.0 + 2.0 * qpow * cos_a + qpow * qpow);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        qpow *= q2;
    }
    -2.0 * PI * sin_2pi(x) * sum
}

/// `sin(2πx)` with exact zeros on `½ℤ`.
fn sin_2pi(x: f64) -> f64 {
    let reduced = x - x.round();
    if reduced == 0.0 || reduced.abs() == 0.5 {
        return 0.0;
    }
    (2.0 * PI * reduced).sin()
}

/// `⟨Ĵ⟩` from the nome series.
pub fn expect_j(label: &StateLabel) -> Result<f64> {
    let lp = label.lprime();
    Ok(lp + expect_j_correction(lp, label.offset))
}

pub fn expect_j_direct(label: &StateLabel) -> Result<f64> {
    let v = build_cs_default(label)?;
    let lp = label.lprime();
    // weights relative to the Gaussian centre keep the sums O(1)
    let (num, den) = v.iter().fold((0.0, 0.0), |(num, den), (j, _)| {
        let w = (-(j - lp) * (j - lp)).exp();
        (num + (j - lp) * w, den + w)
    });
    Ok(lp + num / den)
}

pub fn expect_j_logderiv(label: &StateLabel) -> Result<f64> {
    let lp = label.lprime();
    let d = theta::theta3_logderiv(lp + label.offset.value(), tau_dual(), &SeriesPolicy::default())?;
    Ok(lp + 0.5 * d.re)
}

pub fn expect_j_paths(label: &StateLabel) -> Result<ExpectJ> {
    Ok(ExpectJ {
        direct: expect_j_direct(label)?,
        logderiv: expect_j_logderiv(label)?,
        series: expect_j(label)?,
    })
}

/// `⟨U⟩ = e^{-1/4} e^{iφ} Θ₂/Θ₃` at `(i l′/π | i/π)`; the thetas swap roles in
/// the half-integer sector.
pub fn expect_u(label: &StateLabel) -> Result<Complex64> {
    let nu = Complex64::new(0.0, label.lprime() / PI);
    let arg = ThetaArgument::new(nu, tau_cs())?;
    let policy = SeriesPolicy::default();
    let t2 = theta::theta2(arg, &policy)?;
    let t3 = theta::theta3(arg, &policy)?;
    let ratio = match label.offset {
        Offset::Integer => t2 / t3,
        Offset::Half => t3 / t2,
    };
    Ok((-0.25f64).exp() * (I * label.phi).exp() * ratio)
}

/// `⟨U⟩` through the modular image `e^{-1/4} e^{iφ} Θ₃(l′+s+½ | iπ)/Θ₃(l′+s | iπ)`.
pub fn expect_u_modular(label: &StateLabel) -> Result<Complex64> {
    let x = label.lprime() + label.offset.value();
    let policy = SeriesPolicy::default();
    let num = theta::theta3(ThetaArgument::real(x + 0.5, tau_dual())?, &policy)?;
    let den = theta::theta3(ThetaArgument::real(x, tau_dual())?, &policy)?;
    Ok((-0.25f64).exp() * (I * label.phi).exp() * num / den)
}

/// `⟨ξ|Uξ⟩/⟨ξ|ξ⟩` from the shifted coefficient vector.
pub fn expect_u_direct(label: &StateLabel) -> Result<Complex64> {
    let v = build_cs_default(label)?;
    Ok(v.inner(&v.shift_up())? / v.norm2())
}

/// Occupation `|⟨j|ξ⟩|²/⟨ξ|ξ⟩ = e^{2l′j - j²} / ⟨ξ|ξ⟩`.
pub fn distribution(label: &StateLabel, j: f64) -> Result<f64> {
    check_level(label.offset, j)?;
    let lp = label.lprime();
    Ok((2.0 * lp * j - j * j).exp() / norm2(label)?)
}

/// The Gaussian law `e^{-(j - l′)²}/√π`.
pub fn gaussian_distribution(lprime: f64, j: f64) -> f64 {
    (-(j - lprime) * (j - lprime)).exp() / PI.sqrt()
}

fn check_level(offset: Offset, j: f64) -> Result<()> {
    if !offset.contains(j) {
        return Err(domain(format!("level j = {j} is not in Z + {}", offset.value())));
    }
    Ok(())
}

/// `φ_j(ξ*) = (ξ*)^{-j} e^{-j²/2}`, the conjugate of the basis coefficient.
pub fn bargmann_coeff(label: &StateLabel, j: f64) -> Result<Complex64> {
    check_level(label.offset, j)?;
    let lp = label.lprime();
    Ok(Complex64::new(lp * j - 0.5 * j * j, label.phi * j).exp())
}

/// Diagonal evolution `c_j ← e^{-iE_j t} c_j` with the quantised spectrum
/// `E_j = 2j²/(4 + r²) + L₀²/2`.
pub fn evolve(v: &FockVector, t: f64, r: f64, l0: f64) -> Result<FockVector> {
    // validates r
    dynamics::quantized_energy(0.0, l0, r)?;
    Ok(v.map_diagonal(|j| {
        let e = dynamics::quantized_energy(j, l0, r).expect("validated above");
        (-I * e * t).exp()
    }))
}

/// Fidelity between the evolved state and the label advanced along its
/// angle, `φ → φ + ωt` with `ω = dE/dj` at `j = l′`. Equal to one only at
/// `t = 0` or at spectral revivals.
pub fn evolution_fidelity(label: &StateLabel, t: f64, l0: f64) -> Result<f64> {
    let v = build_cs_default(label)?;
    let evolved = evolve(&v, t, label.r, l0)?;
    let omega = dynamics::quantized_frequency(label.lprime(), label.r)?;
    let moved = build_cs(&label.with_phi(label.phi + omega * t), v.j_max())?;
    Ok(moved.inner(&evolved)?.norm() / (moved.norm2() * evolved.norm2()).sqrt())
}

/// Result of [`quantization_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationScan {
    /// Angles in `[0, 4π)` where the action identity holds with `⟨Ĵ⟩ ∈ ℤ + s`.
    pub roots: Vec<f64>,
    /// `⟨Ĵ⟩` at each root.
    pub expectations: Vec<f64>,
    /// Set in the circle limit `r = 0` when every angle qualifies.
    pub all_angles: bool,
}

const SCAN_POINTS: usize = 720;
const QUANT_TOL: f64 = 1e-9;

/// Angles where the action identity `⟨Ĵ⟩ = l ± r sin(φ/2)` holds and `⟨Ĵ⟩`
/// lands on the sector lattice `ℤ + s`.
///
/// The first condition is located by sign changes on a uniform grid refined
/// by bisection; the second filters the candidates. Together they force the
/// nome correction and `ln(1 + r cos(φ/2))` to vanish separately, which for
/// `r > 0` leaves the odd multiples of π.
pub fn quantization_scan(r: f64, l: f64, offset: Offset, sign: SignConvention) -> Result<QuantizationScan> {
    let label = |phi: f64| StateLabel::new(l, phi, r, offset, sign);
    if r == 0.0 {
        let j = expect_j(&label(0.0)?)?;
        let ok = (j - offset.nearest(j)).abs() <= QUANT_TOL;
        return Ok(QuantizationScan {
            roots: Vec::new(),
            expectations: Vec::new(),
            all_angles: ok,
        });
    }
    label(0.0)?;
    let action = |phi: f64| -> f64 {
        let lab = label(phi).expect("validated");
        expect_j(&lab).expect("closed form") - (l + sign.z_sign() * r * geometry::half_angle_sin_cos(phi).0)
    };

    let span = 4.0 * PI;
    let h = span / SCAN_POINTS as f64;
    let mut candidates = Vec::new();
    let mut prev_phi = 0.0;
    let mut prev = action(0.0);
    if prev == 0.0 {
        candidates.push(0.0);
    }
    for k in 1..=SCAN_POINTS {
        let phi = k as f64 * h;
        let cur = action(phi);
        if cur == 0.0 && k < SCAN_POINTS {
            candidates.push(phi);
        } else if prev != 0.0 && prev.signum() != cur.signum() {
            candidates.push(bisect(&action, prev_phi, phi, prev));
        }
        prev_phi = phi;
        prev = cur;
    }

    let mut roots = Vec::new();
    let mut expectations = Vec::new();
    for phi in candidates {
        let phi = if phi >= span { phi - span } else { phi };
        let lab = label(phi)?;
        let j = expect_j(&lab)?;
        let correction = expect_j_correction(lab.lprime(), offset);
        if (j - offset.nearest(j)).abs() <= QUANT_TOL && correction.abs() <= QUANT_TOL {
            roots.push(phi);
            expectations.push(j);
        }
    }
    Ok(QuantizationScan {
        roots,
        expectations,
        all_angles: false,
    })
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
