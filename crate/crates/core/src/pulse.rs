//! Envelope propagation in the frame moving with the local group velocity.
//!
//! The envelope A = √(ε₀c)·E (so |A|² is an intensity) obeys
//!
//! ```text
//! ∂A/∂z = -α A - (i/2) β₂ ∂²A/∂T² - i γ_NL |A|² A
//! ```
//!
//! with complex α and β₂. The dispersion operator is diagonal in the
//! spectral domain, exp[(i/2) β₂ ν² dz]; an imaginary β₂ therefore acts as a
//! Gaussian spectral filter.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::eit::MediumCoefficients;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    /// √P₀ exp(-T²/2T₀²)
    Gaussian,
    /// √P₀ sech(T/T₀)
    Sech,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub t0: f64,
    /// Peak intensity [W/m²].
    pub peak_intensity: f64,
    /// Carrier detuning from the probe resonance [rad/s].
    pub detuning: f64,
}

impl PulseSpec {
    pub fn new(shape: PulseShape, t0: f64, peak_intensity: f64) -> Result<Self> {
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::invalid("t0", format!("must be > 0, got {t0}")));
        }
        if !(peak_intensity.is_finite() && peak_intensity >= 0.0) {
            return Err(Error::invalid("peak_intensity", "must be >= 0"));
        }
        Ok(Self {
            shape,
            t0,
            peak_intensity,
            detuning: 0.0,
        })
    }

    pub fn gaussian(t0: f64, peak_intensity: f64) -> Result<Self> {
        Self::new(PulseShape::Gaussian, t0, peak_intensity)
    }

    pub fn sech(t0: f64, peak_intensity: f64) -> Result<Self> {
        Self::new(PulseShape::Sech, t0, peak_intensity)
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        Self { detuning, ..self }
    }

    /// Envelope amplitude at comoving time `t`.
    pub fn amplitude(&self, t: f64) -> f64 {
        let x = t / self.t0;
        let shape = match self.shape {
            PulseShape::Gaussian => (-0.5 * x * x).exp(),
            PulseShape::Sech => 1.0 / x.cosh(),
        };
        self.peak_intensity.sqrt() * shape
    }
}

/// Uniform periodic time grid of `points` samples on [-half_span, half_span).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub points: usize,
    pub half_span: f64,
}

impl TimeGrid {
    /// 4096 points over [-16T₀, 16T₀).
    pub fn for_width(t0: f64) -> Self {
        Self {
            points: 4096,
            half_span: 16.0 * t0,
        }
    }

    /// Grid wide enough for a pulse that grows to `max_width`, sampled at
    /// `samples_per_t0` points per initial width and rounded up to a power of two.
    pub fn for_broadening(t0: f64, max_width: f64, samples_per_t0: f64) -> Self {
        let half_span = 16.0 * t0.max(max_width);
        let needed = (2.0 * half_span / (t0 / samples_per_t0)).ceil() as usize;
        Self {
            points: needed.max(4096).next_power_of_two(),
            half_span,
        }
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_span / self.points as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.step();
        (0..self.points).map(|j| -self.half_span + j as f64 * dt).collect()
    }

    /// Angular frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points;
        let dnu = 2.0 * PI / (n as f64 * self.step());
        (0..n)
            .map(|k| {
                let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
                k * dnu
            })
            .collect()
    }
}

/// Sampled envelope at axial position `z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseField {
    pub grid: TimeGrid,
    pub envelope: Vec<Complex64>,
    pub z: f64,
}

/// Guard-band level required of a freshly built envelope.
const CONSTRUCTION_EDGE_RATIO: f64 = 1e-6;

impl PulseField {
    pub fn from_spec(spec: &PulseSpec, grid: TimeGrid) -> Result<Self> {
        if spec.peak_intensity == 0.0 {
            return Err(Error::EmptyPulse);
        }
        if grid.points < 16 || !(grid.half_span > 0.0) {
            return Err(Error::invalid("grid", "need >= 16 points and a positive span"));
        }
        let envelope = grid
            .times()
            .iter()
            .map(|&t| Complex64::new(spec.amplitude(t), 0.0))
            .collect();
        let field = Self {
            grid,
            envelope,
            z: 0.0,
        };
        let ratio = field.edge_ratio(EDGE_FRACTION);
        if ratio > CONSTRUCTION_EDGE_RATIO {
            return Err(Error::invalid(
                "grid",
                format!("envelope edge at {ratio:e} of peak; widen the time window"),
            ));
        }
        Ok(field)
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// ∫|A|² dT [J/m²].
    pub fn energy(&self) -> f64 {
        self.envelope.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.step()
    }

    pub fn peak_intensity(&self) -> f64 {
        self.envelope.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max)
    }

    /// Largest edge amplitude relative to the peak amplitude, over the outer
    /// `fraction` of samples on each side.
    pub fn edge_ratio(&self, fraction: f64) -> f64 {
        let n = self.envelope.len();
        let band = ((fraction * n as f64).ceil() as usize).clamp(1, n / 2);
        let peak = self.peak_intensity().sqrt();
        if peak == 0.0 {
            return 0.0;
        }
        self.envelope[..band]
            .iter()
            .chain(&self.envelope[n - band..])
            .map(|a| a.norm())
            .fold(0.0, f64::max)
            / peak
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthMetrics {
    /// √(⟨T²⟩ - ⟨T⟩²) under |A|².
    pub rms: f64,
    /// Full width at half maximum of |A|².
    pub fwhm: f64,
    /// max |A|² [W/m²].
    pub peak: f64,
}

pub fn width_metrics(pulse: &PulseField) -> Result<WidthMetrics> {
    let times = pulse.times();
    let intensity: Vec<f64> = pulse.envelope.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = intensity.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptyPulse);
    }
    let mean = times.iter().zip(&intensity).map(|(t, i)| t * i).sum::<f64>() / total;
    let var = times
        .iter()
        .zip(&intensity)
        .map(|(t, i)| (t - mean) * (t - mean) * i)
        .sum::<f64>()
        / total;
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    let half = 0.5 * peak;
    let n = intensity.len();
    let first = intensity.iter().position(|&i| i >= half).unwrap_or(0);
    let last = intensity.iter().rposition(|&i| i >= half).unwrap_or(n - 1);
    let crossing = |lo: usize, hi: usize| {
        let (a, b) = (intensity[lo], intensity[hi]);
        let s = if b != a { (half - a) / (b - a) } else { 0.5 };
        times[lo] + s * (times[hi] - times[lo])
    };
    let left = if first > 0 { crossing(first - 1, first) } else { times[0] };
    let right = if last + 1 < n { crossing(last + 1, last) } else { times[n - 1] };
    Ok(WidthMetrics {
        rms: var.sqrt(),
        fwhm: right - left,
        peak,
    })
}

/// A length scale that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleLength {
    Finite(f64),
    Infinite,
}

impl ScaleLength {
    fn from_inverse(inv: f64) -> Self {
        if inv > 0.0 {
            Self::Finite(1.0 / inv)
        } else {
            Self::Infinite
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(v) => *v,
            Self::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleLengths {
    /// T₀²/|β₂|.
    pub dispersion: ScaleLength,
    /// 1/(γ_NL P₀).
    pub nonlinear: ScaleLength,
    /// Soliton order N = √(L_D/L_NL).
    pub soliton_order: f64,
}

pub fn scale_lengths(coeffs: &MediumCoefficients, spec: &PulseSpec) -> ScaleLengths {
    let beta2 = coeffs.beta2().norm();
    let nl = coeffs.gamma_nl() * spec.peak_intensity;
    let soliton_order = if beta2 > 0.0 {
        (nl * spec.t0 * spec.t0 / beta2).max(0.0).sqrt()
    } else if nl > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    ScaleLengths {
        dispersion: ScaleLength::from_inverse(beta2 / (spec.t0 * spec.t0)),
        nonlinear: ScaleLength::from_inverse(nl),
        soliton_order,
    }
}

/// Medium coefficients as a pure function of z.
pub trait MediumSampler: Sync {
    fn coefficients_at(&self, z: f64) -> Result<MediumCoefficients>;
}

impl<F> MediumSampler for F
where
    F: Fn(f64) -> Result<MediumCoefficients> + Sync,
{
    fn coefficients_at(&self, z: f64) -> Result<MediumCoefficients> {
        self(z)
    }
}

/// The same coefficients everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformMedium(pub MediumCoefficients);

impl MediumSampler for UniformMedium {
    fn coefficients_at(&self, _z: f64) -> Result<MediumCoefficients> {
        Ok(self.0.clone())
    }
}

/// Outer fraction of samples checked for grid overflow.
const EDGE_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationOptions {
    /// Axial step; `None` picks min(L_D, L_NL, span)/`steps_per_scale`.
    pub dz: Option<f64>,
    pub steps_per_scale: f64,
    /// Record width metrics every this many steps (the final step is always recorded).
    pub record_every: usize,
    /// Largest nonlinear or dispersive phase allowed per step [rad].
    pub max_step_phase: f64,
    /// Edge-to-peak amplitude ratio that counts as hitting the window.
    pub overflow_ratio: f64,
    pub nonlinear: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            dz: None,
            steps_per_scale: 200.0,
            record_every: 10,
            max_step_phase: 0.1,
            overflow_ratio: 1e-3,
            nonlinear: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub z: f64,
    pub rms: f64,
    pub fwhm: f64,
    pub peak: f64,
    pub energy: f64,
    /// Accumulated loss-operator attenuation ∫2Re(α)dz in intensity nepers.
    pub loss: f64,
    /// Accumulated group delay ∫Re(1/v_g)dz [s].
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationReport {
    pub records: Vec<StepRecord>,
    pub final_field: PulseField,
    pub dz: f64,
    pub steps: usize,
}

impl PropagationReport {
    pub fn group_delay(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.delay)
    }

    pub fn loss(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.loss)
    }

    /// Largest rms width over all records.
    pub fn max_rms(&self) -> f64 {
        self.records.iter().map(|r| r.rms).fold(0.0, f64::max)
    }

    pub fn final_metrics(&self) -> Option<&StepRecord> {
        self.records.last()
    }
}

/// Points at which the medium is sampled when choosing a default step.
const STEP_PROBES: usize = 65;

fn default_step(
    pulse: &PulseField,
    medium: &dyn MediumSampler,
    z0: f64,
    span: f64,
    opts: &PropagationOptions,
) -> Result<f64> {
    let m = width_metrics(pulse)?;
    let t_char = m.rms * 2f64.sqrt();
    let mut scale = span;
    for i in 0..STEP_PROBES {
        let c = medium.coefficients_at(z0 + span * i as f64 / (STEP_PROBES - 1) as f64)?;
        // only the real part of β₂ produces phase; the imaginary part is an exact filter
        let re_beta2 = c.beta2().re.abs();
        if re_beta2 > 0.0 {
            scale = scale.min(t_char * t_char / re_beta2);
        }
        if opts.nonlinear && c.gamma_nl() > 0.0 {
            scale = scale.min(1.0 / (c.gamma_nl() * m.peak));
        }
    }
    Ok(scale / opts.steps_per_scale)
}

struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    nu_sq: Vec<f64>,
}

impl Spectral {
    fn new(grid: &TimeGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points);
        let inverse = planner.plan_fft_inverse(grid.points);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            nu_sq: grid.frequencies().iter().map(|w| w * w).collect(),
        }
    }

    fn to_spectrum(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    fn to_time(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        let norm = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|a| *a *= norm);
    }

    /// Multiplies the spectrum by exp[(i/2) β₂ ν² h].
    fn disperse(&self, spectrum: &mut [Complex64], beta2: Complex64, h: f64) {
        let k = Complex64::new(0.0, 0.5 * h) * beta2;
        for (s, &nu2) in spectrum.iter_mut().zip(&self.nu_sq) {
            *s *= (k * nu2).exp();
        }
    }

    /// Mean square angular frequency of a spectrum.
    fn mean_nu_sq(&self, spectrum: &[Complex64]) -> f64 {
        let (num, den) = spectrum
            .iter()
            .zip(&self.nu_sq)
            .fold((0.0, 0.0), |(n, d), (s, &nu2)| (n + nu2 * s.norm_sqr(), d + s.norm_sqr()));
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

fn record(field: &PulseField, loss: f64, delay: f64) -> Result<StepRecord> {
    let m = width_metrics(field)?;
    Ok(StepRecord {
        z: field.z,
        rms: m.rms,
        fwhm: m.fwhm,
        peak: m.peak,
        energy: field.energy(),
        loss,
        delay,
    })
}

/// Symmetric split-step propagation over `span` starting at `pulse.z`.
///
/// Each step samples the medium at its midpoint and applies half a
/// dispersion step, the loss and Kerr phase, then the second half step.
/// Consecutive half steps are fused in the spectral domain, so a step costs
/// two FFTs.
pub fn propagate(
    pulse: &PulseField,
    medium: &dyn MediumSampler,
    span: f64,
    opts: &PropagationOptions,
) -> Result<PropagationReport> {
    if !(span.is_finite() && span >= 0.0) {
        return Err(Error::invalid("span", "must be finite and >= 0"));
    }
    if !(pulse.energy() > 0.0) {
        return Err(Error::EmptyPulse);
    }
    let z0 = pulse.z;
    let mut field = pulse.clone();
    let mut records = vec![record(&field, 0.0, 0.0)?];
    if span == 0.0 {
        return Ok(PropagationReport {
            records,
            final_field: field,
            dz: 0.0,
            steps: 0,
        });
    }
    let dz_target = match opts.dz {
        Some(dz) if dz > 0.0 && dz.is_finite() => dz,
        Some(dz) => return Err(Error::invalid("dz", format!("must be > 0, got {dz}"))),
        None => default_step(pulse, medium, z0, span, opts)?,
    };
    let steps = ((span / dz_target).ceil() as usize).max(1);
    let dz = span / steps as f64;
    let record_every = opts.record_every.max(1);

    let mut fft = Spectral::new(&pulse.grid);
    let mut spectrum = field.envelope.clone();
    fft.to_spectrum(&mut spectrum);

    let mut coeffs = medium.coefficients_at(z0 + 0.5 * dz)?;
    fft.disperse(&mut spectrum, coeffs.beta2(), 0.5 * dz);
    let mut loss = 0.0;
    let mut delay = 0.0;
    let mut mean_nu_sq = fft.mean_nu_sq(&spectrum);

    for k in 0..steps {
        let dispersive_phase = 0.5 * coeffs.beta2().re.abs() * mean_nu_sq * dz;
        if dispersive_phase > opts.max_step_phase {
            return Err(Error::StepTooCoarse { dz, phase: dispersive_phase });
        }
        field.envelope.copy_from_slice(&spectrum);
        fft.to_time(&mut field.envelope);

        let gamma = if opts.nonlinear { coeffs.gamma_nl() } else { 0.0 };
        let attenuation = (-coeffs.alpha * dz).exp();
        let mut max_phase: f64 = 0.0;
        for a in field.envelope.iter_mut() {
            let phase = gamma * a.norm_sqr() * dz;
            max_phase = max_phase.max(phase);
            *a *= attenuation * Complex64::from_polar(1.0, -phase);
        }
        if max_phase > opts.max_step_phase {
            return Err(Error::StepTooCoarse { dz, phase: max_phase });
        }
        loss += 2.0 * coeffs.alpha.re * dz;
        delay += coeffs.inv_vg.re * dz;

        spectrum.copy_from_slice(&field.envelope);
        fft.to_spectrum(&mut spectrum);
        fft.disperse(&mut spectrum, coeffs.beta2(), 0.5 * dz);

        let last = k + 1 == steps;
        if last || (k + 1) % record_every == 0 {
            field.envelope.copy_from_slice(&spectrum);
            fft.to_time(&mut field.envelope);
            field.z = z0 + (k + 1) as f64 * dz;
            let ratio = field.edge_ratio(EDGE_FRACTION);
            if ratio > opts.overflow_ratio {
                return Err(Error::GridOverflow { z: field.z, ratio });
            }
            records.push(record(&field, loss, delay)?);
            mean_nu_sq = fft.mean_nu_sq(&spectrum);
        }
        if !last {
            coeffs = medium.coefficients_at(z0 + (k as f64 + 1.5) * dz)?;
            fft.disperse(&mut spectrum, coeffs.beta2(), 0.5 * dz);
        }
    }
    field.z = z0 + span;
    Ok(PropagationReport {
        records,
        final_field: field,
        dz,
        steps,
    })
}

/// Closed-form evolution of a Gaussian under the linear envelope operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianEvolution {
    /// 1/e half-width of |A| (T₀ at z = 0).
    pub width: f64,
    pub rms: f64,
    /// Peak intensity [W/m²].
    pub peak: f64,
    /// Group delay ∫Re(1/v_g)dz [s].
    pub delay: f64,
}

/// Gaussian after accumulated dispersion ∫b₂dz, amplitude loss ∫α dz and delay.
///
/// The spectrum exp(-T₀²ν²/2) picks up exp(i ν² ∫b₂dz), giving the complex
/// width parameter Q = T₀² - 2i∫b₂dz; the intensity is
/// P₀T₀²/|Q|·exp(-T² Re Q/|Q|²).
pub fn gaussian_after(
    spec: &PulseSpec,
    b2_integral: Complex64,
    alpha_integral: Complex64,
    delay: f64,
) -> GaussianEvolution {
    let t0sq = spec.t0 * spec.t0;
    let q = Complex64::new(t0sq, 0.0) - Complex64::new(0.0, 2.0) * b2_integral;
    let width = (q.norm_sqr() / q.re).sqrt();
    GaussianEvolution {
        width,
        rms: width / 2f64.sqrt(),
        peak: spec.peak_intensity * t0sq / q.norm() * (-2.0 * alpha_integral.re).exp(),
        delay,
    }
}

/// Uniform-medium Gaussian evolution over distance `z`.
pub fn analytic_gaussian(spec: &PulseSpec, coeffs: &MediumCoefficients, z: f64) -> GaussianEvolution {
    gaussian_after(spec, coeffs.b2 * z, coeffs.alpha * z, coeffs.inv_vg.re * z)
}

/// Gaussian evolution through a z-dependent medium, integrating the
/// coefficients with composite Simpson over `intervals` (rounded up to even).
pub fn analytic_gaussian_path(
    spec: &PulseSpec,
    medium: &dyn MediumSampler,
    z0: f64,
    span: f64,
    intervals: usize,
) -> Result<GaussianEvolution> {
    let n = intervals.max(2).next_multiple_of(2);
    let h = span / n as f64;
    let mut b2 = Complex64::new(0.0, 0.0);
    let mut alpha = Complex64::new(0.0, 0.0);
    let mut delay = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let c = medium.coefficients_at(z0 + i as f64 * h)?;
        b2 += c.b2 * w;
        alpha += c.alpha * w;
        delay += c.inv_vg.re * w;
    }
    let s = h / 3.0;
    Ok(gaussian_after(spec, b2 * s, alpha * s, delay * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::SPEED_OF_LIGHT;

    fn medium(b2: Complex64, eta: f64) -> MediumCoefficients {
        MediumCoefficients {
            b2,
            eta,
            ..MediumCoefficients::vacuum()
        }
    }

    fn gaussian(t0: f64) -> (PulseSpec, PulseField) {
        let spec = PulseSpec::gaussian(t0, 1.0).unwrap();
        let field = PulseField::from_spec(&spec, TimeGrid::for_width(t0)).unwrap();
        (spec, field)
    }

    #[test]
    fn gaussian_and_sech_metrics() {
        let t0 = 1e-6;
        let (_, g) = gaussian(t0);
        let m = width_metrics(&g).unwrap();
        assert!((m.rms / (t0 / 2f64.sqrt()) - 1.0).abs() < 1e-9);
        assert!((m.fwhm / (2.0 * (2f64.ln()).sqrt() * t0) - 1.0).abs() < 1e-4);
        let s = PulseField::from_spec(&PulseSpec::sech(t0, 1.0).unwrap(), TimeGrid::for_width(t0)).unwrap();
        let fwhm = width_metrics(&s).unwrap().fwhm;
        assert!((fwhm / (2.0 * 2f64.sqrt().acosh() * t0) - 1.0).abs() < 1e-4);
        assert!((fwhm / t0 - 1.7627).abs() < 1e-4);
    }

    #[test]
    fn degenerate_pulses_rejected() {
        assert!(PulseSpec::gaussian(0.0, 1.0).is_err());
        let spec = PulseSpec::gaussian(1e-6, 0.0).unwrap();
        assert_eq!(PulseField::from_spec(&spec, TimeGrid::for_width(1e-6)), Err(Error::EmptyPulse));
        let narrow = TimeGrid { points: 256, half_span: 2e-6 };
        assert!(PulseField::from_spec(&PulseSpec::gaussian(1e-6, 1.0).unwrap(), narrow).is_err());
    }

    #[test]
    fn free_propagation_is_identity() {
        let (_, g) = gaussian(1e-6);
        let opts = PropagationOptions { dz: Some(1e-3), ..Default::default() };
        let report = propagate(&g, &UniformMedium(medium(Complex64::new(0.0, 0.0), 0.0)), 0.1, &opts).unwrap();
        let err = report
            .final_field
            .envelope
            .iter()
            .zip(&g.envelope)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!((report.group_delay() - 0.1 / SPEED_OF_LIGHT).abs() < 1e-22);
    }

    #[test]
    fn scale_lengths_sentinels() {
        let spec = PulseSpec::gaussian(1e-6, 0.0).unwrap();
        let s = scale_lengths(&medium(Complex64::new(1e-11, 0.0), 1e-20), &spec);
        assert_eq!(s.nonlinear, ScaleLength::Infinite);
        assert_eq!(s.soliton_order, 0.0);
        assert!((s.dispersion.value() - 1e-12 / 2e-11).abs() < 1e-15);
        let vac = scale_lengths(&MediumCoefficients::vacuum(), &spec);
        assert_eq!(vac.dispersion, ScaleLength::Infinite);
    }

    #[test]
    fn real_dispersion_matches_closed_form_at_two_dispersion_lengths() {
        let t0 = 1e-6;
        let spec = PulseSpec::gaussian(t0, 1.0).unwrap();
        let c = medium(Complex64::new(0.5e-11, 0.0), 0.0);
        let ld = t0 * t0 / c.beta2().norm();
        let grid = TimeGrid::for_broadening(t0, 3.0 * t0, 8.0);
        let g_wide = PulseField::from_spec(&spec, grid).unwrap();
        let report = propagate(&g_wide, &UniformMedium(c.clone()), 2.0 * ld, &Default::default()).unwrap();
        let expect = t0 / 2f64.sqrt() * 5f64.sqrt();
        let got = report.final_metrics().unwrap().rms;
        assert!((got / expect - 1.0).abs() < 5e-3, "{got} vs {expect}");
        let oracle = analytic_gaussian(&spec, &c, 2.0 * ld);
        assert!((oracle.rms / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn imaginary_dispersion_filters_as_closed_form() {
        let t0 = 1e-6;
        let spec = PulseSpec::gaussian(t0, 1.0).unwrap();
        let b2 = 1e-11;
        let z = 0.3;
        let width = (t0 * t0 + 2.0 * b2 * z).sqrt();
        let grid = TimeGrid::for_broadening(t0, width, 8.0);
        let g = PulseField::from_spec(&spec, grid).unwrap();
        let c = medium(Complex64::new(0.0, b2), 0.0);
        let report = propagate(&g, &UniformMedium(c.clone()), z, &Default::default()).unwrap();
        let oracle = analytic_gaussian(&spec, &c, z);
        assert!((oracle.width / width - 1.0).abs() < 1e-12);
        let got = report.final_metrics().unwrap();
        assert!((got.rms / oracle.rms - 1.0).abs() < 3e-3);
        assert!((got.peak / oracle.peak - 1.0).abs() < 3e-3);
    }

    #[test]
    fn lossless_split_step_conserves_energy() {
        let t0 = 1e-6;
        let spec = PulseSpec::sech(t0, 1.0).unwrap();
        let g = PulseField::from_spec(&spec, TimeGrid::for_width(t0)).unwrap();
        let c = medium(Complex64::new(0.5e-11, 0.0), 2e-20 * crate::constants::EPSILON_0 * SPEED_OF_LIGHT);
        let report = propagate(&g, &UniformMedium(c), 0.2, &Default::default()).unwrap();
        let e0 = report.records[0].energy;
        for r in &report.records {
            assert!((r.energy / e0 - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn fundamental_soliton_keeps_its_width() {
        let t0 = 1e-6;
        let beta2 = 1e-11;
        let gamma = 1e-3;
        let p0 = beta2 / (gamma * t0 * t0);
        let spec = PulseSpec::sech(t0, p0).unwrap();
        let c = medium(Complex64::new(0.5 * beta2, 0.0), gamma * crate::constants::EPSILON_0 * SPEED_OF_LIGHT);
        assert!((scale_lengths(&c, &spec).soliton_order - 1.0).abs() < 1e-12);
        let g = PulseField::from_spec(&spec, TimeGrid::for_width(t0)).unwrap();
        let ld = t0 * t0 / beta2;
        let report = propagate(&g, &UniformMedium(c), 5.0 * ld, &Default::default()).unwrap();
        let w0 = report.records[0].rms;
        let drift = report.records.iter().map(|r| (r.rms / w0 - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-2, "{drift}");
    }

    #[test]
    fn loss_operator_attenuates_and_delay_accumulates() {
        let (spec, g) = gaussian(1e-6);
        let c = MediumCoefficients {
            alpha: Complex64::new(10.0, 0.0),
            inv_vg: Complex64::new(1.0 / 20.0, 0.0),
            ..MediumCoefficients::vacuum()
        };
        let opts = PropagationOptions { dz: Some(1e-4), ..Default::default() };
        let report = propagate(&g, &UniformMedium(c.clone()), 0.01, &opts).unwrap();
        let last = report.final_metrics().unwrap();
        assert!((last.loss - 0.2).abs() < 1e-12);
        assert!((last.energy / report.records[0].energy - (-0.2f64).exp()).abs() < 1e-12);
        assert!((report.group_delay() - 0.01 / 20.0).abs() < 1e-15);
        let oracle = analytic_gaussian(&spec, &c, 0.01);
        assert!((oracle.peak - (-0.2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn window_overflow_is_reported() {
        let t0 = 1e-6;
        let (_, g) = gaussian(t0);
        let c = medium(Complex64::new(0.0, 1e-11), 0.0);
        let err = propagate(&g, &UniformMedium(c), 10.0, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::GridOverflow { .. }), "{err:?}");
    }

    #[test]
    fn coarse_steps_are_rejected() {
        let (_, g) = gaussian(1e-6);
        let c = medium(Complex64::new(0.0, 0.0), 1.0);
        let opts = PropagationOptions { dz: Some(1.0), ..Default::default() };
        let err = propagate(&g, &UniformMedium(c), 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::StepTooCoarse { .. }));
    }
}
