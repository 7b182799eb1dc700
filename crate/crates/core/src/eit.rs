//! Three-level EIT susceptibility and the propagation coefficients it implies.
//!
//! Everything here is a pure function of value-type inputs. Angular
//! quantities are in rad/s, densities in m^-3, lengths in m.
//!
//! Sign conventions follow the slowly varying envelope equation
//!
//! ```text
//! dE/dz + alpha E + (1/v_g) dE/dt + i b2 d2E/dt2 + b3 d3E/dt3 + i eta |E|^2 E = 0
//! ```
//!
//! with the frequency offset ω - ω₀ mapped to -i d/dt, so that
//! α = -(iπ/λ)χ, 1/v_g = 1/c - (π/λ)χ', b₂ = (π/2λ)χ'' and b₃ = (π/6λ)χ'''.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::{Error, Result, Warning};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Atomic constants of the probe transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionParams {
    lambda: f64,
    gamma: f64,
    gamma2: f64,
    gamma3: f64,
    mu31_sq: f64,
}

impl TransitionParams {
    /// Builds the parameter set and derives |μ₃₁|² = 3ε₀ħλ³γ / 8π².
    ///
    /// `gamma2` may be zero (ideal ground-state coherence); the other rates
    /// and the wavelength must be strictly positive.
    pub fn new(lambda: f64, gamma: f64, gamma2: f64, gamma3: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        check_positive("gamma", gamma)?;
        check_positive("gamma3", gamma3)?;
        if !(gamma2.is_finite() && gamma2 >= 0.0) {
            return Err(Error::invalid("gamma2", format!("must be >= 0, got {gamma2}")));
        }
        Ok(Self {
            lambda,
            gamma,
            gamma2,
            gamma3,
            mu31_sq: dipole_moment_sq(lambda, gamma),
        })
    }

    /// Sodium D2 line with the slow-light operating rates:
    /// γ/2π = 10.01 MHz, Γ₃ = γ/2, Γ₂/2π = 1 kHz.
    pub fn sodium() -> Self {
        let gamma = 2.0 * PI * 10.01e6;
        Self::new(589.76e-9, gamma, 2.0 * PI * 1.0e3, gamma / 2.0).expect("valid constants")
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }
    pub fn gamma3(&self) -> f64 {
        self.gamma3
    }
    pub fn mu31_sq(&self) -> f64 {
        self.mu31_sq
    }

    /// Resonance angular frequency ω₀ = ω₃₁ = 2πc/λ.
    pub fn omega0(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.lambda
    }

    /// Vacuum wavenumber at resonance.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    /// ρ|μ₃₁|²/(ε₀ħ), the rate that multiplies the dimensionless line shape.
    pub fn coupling_rate(&self, rho: f64) -> f64 {
        rho * self.mu31_sq / (EPSILON_0 * HBAR)
    }

    pub fn with_gamma2(&self, gamma2: f64) -> Result<Self> {
        Self::new(self.lambda, self.gamma, gamma2, self.gamma3)
    }
}

/// |μ₃₁|² from the radiative decay rate.
pub fn dipole_moment_sq(lambda: f64, gamma: f64) -> f64 {
    3.0 * EPSILON_0 * HBAR * lambda.powi(3) * gamma / (8.0 * PI * PI)
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {v}")))
    }
}

/// Resonant control field and probe detuning Δ = ω₀ - ω_p [rad/s].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlField {
    pub omega_c: f64,
    pub detuning: f64,
}

impl ControlField {
    pub fn new(omega_c: f64, detuning: f64) -> Result<Self> {
        if !(omega_c.is_finite() && omega_c >= 0.0) {
            return Err(Error::invalid("omega_c", format!("must be >= 0, got {omega_c}")));
        }
        if !detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(Self { omega_c, detuning })
    }

    pub fn resonant(omega_c: f64) -> Result<Self> {
        Self::new(omega_c, 0.0)
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        Self { detuning, ..self }
    }
}

const DENOMINATOR_FLOOR: f64 = 1e-30;

struct LineShape {
    numerator: Complex64,
    denominator: Complex64,
    d_denominator: Complex64,
}

fn line_shape(cf: &ControlField, tp: &TransitionParams) -> Result<LineShape> {
    let g2 = tp.gamma2 / 2.0;
    let g3 = tp.gamma3 / 2.0;
    let delta = cf.detuning;
    let a = Complex64::new(g2, delta);
    let b = Complex64::new(g3, delta);
    let denominator = a * b + cf.omega_c * cf.omega_c / 4.0;
    if denominator.norm() < DENOMINATOR_FLOOR {
        return Err(Error::DegenerateDenominator {
            magnitude: denominator.norm(),
        });
    }
    Ok(LineShape {
        numerator: I * a,
        denominator,
        d_denominator: I * (a + b),
    })
}

/// Linear susceptibility χ(Δ) of the dressed three-level medium.
pub fn susceptibility(rho: f64, cf: &ControlField, tp: &TransitionParams) -> Result<Complex64> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::invalid("rho", format!("must be >= 0, got {rho}")));
    }
    let shape = line_shape(cf, tp)?;
    Ok(tp.coupling_rate(rho) * shape.numerator / shape.denominator)
}

/// χ and its first three derivatives with respect to the detuning Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityDerivatives {
    pub chi: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

/// Closed-form ∂ⁿχ/∂ωⁿ for n ≤ 3.
///
/// χ = K·N/D with N = i(iΔ + Γ₂/2) linear in Δ and D quadratic, so the
/// derivatives follow from differentiating N = χD repeatedly.
pub fn susceptibility_derivatives(
    rho: f64,
    cf: &ControlField,
    tp: &TransitionParams,
) -> Result<SusceptibilityDerivatives> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::invalid("rho", format!("must be >= 0, got {rho}")));
    }
    let LineShape {
        numerator: n0,
        denominator: d0,
        d_denominator: d1,
    } = line_shape(cf, tp)?;
    let k = tp.coupling_rate(rho);
    // N' = -1, N'' = 0; D'' = -2, D''' = 0.
    let n1 = Complex64::new(-1.0, 0.0);
    let d2 = Complex64::new(-2.0, 0.0);
    let f0 = n0 / d0;
    let f1 = (n1 - f0 * d1) / d0;
    let f2 = (-(2.0 * f1 * d1) - f0 * d2) / d0;
    let f3 = (-(3.0 * f2 * d1) - 3.0 * f1 * d2) / d0;
    Ok(SusceptibilityDerivatives {
        chi: k * f0,
        d1: k * f1,
        d2: k * f2,
        d3: k * f3,
    })
}

/// Local propagation coefficients of the probe envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediumCoefficients {
    /// Amplitude attenuation [1/m].
    pub alpha: Complex64,
    /// Inverse group velocity [s/m].
    pub inv_vg: Complex64,
    /// Second-order dispersion [s²/m].
    pub b2: Complex64,
    /// Third-order dispersion [s³/m].
    pub b3: Complex64,
    /// Kerr coefficient multiplying |E|² [m/V²].
    pub eta: f64,
    #[serde(skip)]
    pub warnings: Vec<Warning>,
}

impl MediumCoefficients {
    /// Coefficients of empty space.
    pub fn vacuum() -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            inv_vg: Complex64::new(1.0 / SPEED_OF_LIGHT, 0.0),
            b2: Complex64::new(0.0, 0.0),
            b3: Complex64::new(0.0, 0.0),
            eta: 0.0,
            warnings: Vec::new(),
        }
    }

    pub fn beta1(&self) -> Complex64 {
        self.inv_vg
    }

    pub fn beta2(&self) -> Complex64 {
        2.0 * self.b2
    }

    pub fn alpha_prime(&self) -> Complex64 {
        2.0 * self.alpha
    }

    /// Nonlinear coefficient γ_NL = η/(ε₀c) [m/W] for the intensity-normalised envelope.
    pub fn gamma_nl(&self) -> f64 {
        self.eta / (EPSILON_0 * SPEED_OF_LIGHT)
    }

    /// Group velocity 1/Re(β₁) [m/s].
    pub fn group_velocity(&self) -> f64 {
        1.0 / self.inv_vg.re
    }

    pub fn is_valid(&self) -> bool {
        !self.warnings.contains(&Warning::ValidityViolation)
    }

    /// Replaces β₂ by the real value +|β₂|, for which self-phase modulation
    /// with γ_NL > 0 balances dispersion in the envelope equation used here.
    pub fn with_focusing_real_dispersion(&self) -> Self {
        Self {
            b2: Complex64::new(self.b2.norm(), 0.0),
            ..self.clone()
        }
    }
}

/// Kerr coefficient η in the Ω_c ≫ Γ₂,₃ limit.
pub fn kerr_coefficient(rho: f64, omega_c: f64, tp: &TransitionParams) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    4.0 * PI * rho * tp.mu31_sq * tp.mu31_sq * tp.gamma2 * (tp.gamma2 + tp.gamma3)
        / (3.0 * EPSILON_0 * HBAR.powi(3) * tp.lambda * tp.gamma3 * omega_c.powi(4))
}

/// Coefficients from the analytic derivatives of the full susceptibility.
///
/// No closed form for χ⁽³⁾ is carried, so `eta` always comes from
/// [`kerr_coefficient`].
pub fn coefficients_exact(
    rho: f64,
    cf: &ControlField,
    tp: &TransitionParams,
) -> Result<MediumCoefficients> {
    let d = susceptibility_derivatives(rho, cf, tp)?;
    let s = PI / tp.lambda;
    Ok(MediumCoefficients {
        alpha: -I * s * d.chi,
        inv_vg: 1.0 / SPEED_OF_LIGHT - s * d.d1,
        b2: 0.5 * s * d.d2,
        b3: s / 6.0 * d.d3,
        eta: kerr_coefficient(rho, cf.omega_c, tp),
        warnings: Vec::new(),
    })
}

/// Margins of the Γ₂,₃ ≪ Ω_c ≪ Ω_max window of the reduced formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validity {
    /// Ω_c / max(Γ₂, Γ₃).
    pub lower_margin: f64,
    /// Ω_max / Ω_c.
    pub upper_margin: f64,
    pub ok: bool,
}

/// Safety factors that make "≪" concrete.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityFactors {
    pub k_low: f64,
    pub k_high: f64,
}

impl Default for ValidityFactors {
    fn default() -> Self {
        Self {
            k_low: 10.0,
            k_high: 10.0,
        }
    }
}

/// Control Rabi frequency at which the reduced group index c/v_g drops to one,
/// Ω_max = sqrt(4πc|μ₃₁|²ρ/(ε₀ħλ)) = sqrt(3cλ²γρ/2π).
pub fn upper_rabi_bound(rho: f64, tp: &TransitionParams) -> f64 {
    (4.0 * PI * SPEED_OF_LIGHT * tp.coupling_rate(rho) / tp.lambda).sqrt()
}

pub fn validity_check(rho: f64, omega_c: f64, tp: &TransitionParams) -> Validity {
    validity_check_with(rho, omega_c, tp, ValidityFactors::default())
}

pub fn validity_check_with(
    rho: f64,
    omega_c: f64,
    tp: &TransitionParams,
    factors: ValidityFactors,
) -> Validity {
    let lower_margin = omega_c / tp.gamma2.max(tp.gamma3);
    let upper_margin = upper_rabi_bound(rho, tp) / omega_c;
    Validity {
        lower_margin,
        upper_margin,
        ok: lower_margin > factors.k_low && upper_margin > factors.k_high,
    }
}

/// Leading-order coefficients for Ω_c ≫ Γ₂,₃.
///
/// Returns the coefficients even outside the validity window, flagged with
/// [`Warning::ValidityViolation`]. `b2` carries the phase factor i, `b3`
/// is the leading real term -16π|μ₃₁|²ρ/(ε₀ħλΩ_c⁴).
pub fn coefficients_reduced(
    rho: f64,
    omega_c: f64,
    tp: &TransitionParams,
) -> Result<MediumCoefficients> {
    reduced_with(rho, omega_c, tp, ValidityFactors::default())
}

pub fn reduced_with(
    rho: f64,
    omega_c: f64,
    tp: &TransitionParams,
    factors: ValidityFactors,
) -> Result<MediumCoefficients> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::invalid("rho", format!("must be >= 0, got {rho}")));
    }
    check_positive("omega_c", omega_c)?;
    let k = tp.coupling_rate(rho);
    let om2 = omega_c * omega_c;
    let om4 = om2 * om2;
    let alpha = 2.0 * PI * k * tp.gamma2 / (tp.lambda * om2);
    // 1/v_g = 2ω₃₁|μ₃₁|²ρ/(cε₀ħΩ_c²)
    let inv_vg = 2.0 * tp.omega0() * k / (SPEED_OF_LIGHT * om2);
    let b2 = 8.0 * PI * tp.gamma3 * k / (tp.lambda * om4);
    let b3 = -16.0 * PI * k / (tp.lambda * om4);
    let mut warnings = Vec::new();
    if !validity_check_with(rho, omega_c, tp, factors).ok {
        warnings.push(Warning::ValidityViolation);
    }
    Ok(MediumCoefficients {
        alpha: Complex64::new(alpha, 0.0),
        inv_vg: Complex64::new(inv_vg, 0.0),
        b2: Complex64::new(0.0, b2),
        b3: Complex64::new(b3, 0.0),
        eta: kerr_coefficient(rho, omega_c, tp),
        warnings,
    })
}

/// Result of the transparency-window search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransparencyWindow {
    /// Full width in rad/s.
    Bounded(f64),
    /// Transmission never falls to 1/e of its resonant value.
    Unbounded,
}

impl TransparencyWindow {
    pub fn width(&self) -> Option<f64> {
        match self {
            TransparencyWindow::Bounded(w) => Some(*w),
            TransparencyWindow::Unbounded => None,
        }
    }
}

fn intensity_transmission(
    rho: f64,
    cf: &ControlField,
    tp: &TransitionParams,
    path_length: f64,
) -> Result<f64> {
    let chi = susceptibility(rho, cf, tp)?;
    Ok((-2.0 * PI / tp.lambda * chi.im * path_length).exp())
}

/// Full width of the detuning interval over which the intensity transmission
/// through `path_length` stays above 1/e of its on-resonance value.
///
/// The crossing is searched outward from resonance on each side and refined
/// by bisection; the two half-widths are averaged.
pub fn transparency_window(
    rho: f64,
    omega_c: f64,
    tp: &TransitionParams,
    path_length: f64,
) -> Result<TransparencyWindow> {
    check_positive("omega_c", omega_c)?;
    check_positive("path_length", path_length)?;
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::invalid("rho", format!("must be >= 0, got {rho}")));
    }
    let cf = ControlField::resonant(omega_c)?;
    let t0 = intensity_transmission(rho, &cf, tp, path_length)?;
    if t0 < (-1.0f64).exp() {
        return Err(Error::NoWindow { transmission: t0 });
    }
    let target = t0 * (-1.0f64).exp();
    let below = |delta: f64| -> Result<bool> {
        Ok(intensity_transmission(rho, &cf.with_detuning(delta), tp, path_length)? < target)
    };
    let mut half_widths = [0.0; 2];
    for (slot, sign) in half_widths.iter_mut().zip([1.0, -1.0]) {
        // scan outward geometrically up to well beyond the Autler-Townes peaks
        let mut lo = 0.0;
        let mut hi = 1e-6 * omega_c.max(tp.gamma3);
        let limit = 100.0 * (omega_c + tp.gamma3);
        loop {
            if below(sign * hi)? {
                break;
            }
            lo = hi;
            hi *= 1.25;
            if hi > limit {
                return Ok(TransparencyWindow::Unbounded);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if below(sign * mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        *slot = 0.5 * (lo + hi);
    }
    Ok(TransparencyWindow::Bounded(half_widths[0] + half_widths[1]))
}

/// Peak intensity for which the soliton number N equals one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompensationPower {
    /// P₀ = |β₂|/(T₀²γ_NL) [W/m²].
    pub peak_intensity: f64,
    /// Density-free closed form of the same quantity [W/m²].
    pub closed_form: f64,
    pub warnings: Vec<Warning>,
}

/// Dispersion-compensating peak intensity from the reduced coefficients.
pub fn compensation_peak_power(
    tp: &TransitionParams,
    t0: f64,
    rho: f64,
    omega_c: f64,
) -> Result<CompensationPower> {
    check_positive("t0", t0)?;
    check_positive("rho", rho)?;
    check_positive("gamma2", tp.gamma2)?;
    let coeffs = coefficients_reduced(rho, omega_c, tp)?;
    let peak_intensity = coeffs.beta2().norm() / (t0 * t0 * coeffs.gamma_nl());
    Ok(CompensationPower {
        peak_intensity,
        closed_form: compensation_product(tp) / (t0 * t0),
        warnings: coeffs.warnings,
    })
}

/// P₀T₀² = (32π²ħc/λ³)·Γ₃²/(γΓ₂(Γ₂+Γ₃)), independent of ρ and Ω_c.
pub fn compensation_product(tp: &TransitionParams) -> f64 {
    compensation_product_leading(tp) * tp.gamma3 / (tp.gamma2 + tp.gamma3)
}

/// The Γ₂ ≪ Γ₃ form (32π²ħc/λ³)(Γ₃/γΓ₂).
pub fn compensation_product_leading(tp: &TransitionParams) -> f64 {
    32.0 * PI * PI * HBAR * SPEED_OF_LIGHT / tp.lambda.powi(3) * tp.gamma3 / (tp.gamma * tp.gamma2)
}
