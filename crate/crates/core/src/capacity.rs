//! Bit-storage capacity C = L/(2 v_g τ): closed forms for a uniform medium
//! and direct propagation through the trapped cloud.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::condensate::{build_density, DensityField};
use crate::eit::{coefficients_exact, validity_check, ControlField, MediumCoefficients, TransitionParams};
use crate::pulse::{
    analytic_gaussian_path, propagate, MediumSampler, PropagationOptions, PropagationReport, PulseField,
    PulseSpec, TimeGrid,
};
use crate::condensate::CondensateSpec;
use crate::{Error, Result, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub omega_c: f64,
    /// Largest pulse width inside the medium [s].
    pub tau_used: f64,
    pub vg_used: f64,
    pub length: f64,
    /// Density entering the closed forms; the on-axis peak for numeric runs.
    pub density: f64,
    pub method: CapacityMethod,
    pub warnings: Vec<Warning>,
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {v}")))
    }
}

/// Leading-order group velocity 2πΩ_c²/(3λ²γρ).
pub fn reduced_group_velocity(omega_c: f64, rho: f64, tp: &TransitionParams) -> f64 {
    2.0 * PI * omega_c * omega_c / (3.0 * tp.lambda() * tp.lambda() * tp.gamma() * rho)
}

/// Uniform-medium capacity
///
/// ```text
/// C = L / (2τ₀ √(4π²Ω_c⁴/(9λ⁴γ²ρ²) + 4L²Γ₃²/(π²τ₀⁴Ω_c⁴)))
/// ```
///
/// The first term under the root is v_g², the second the dispersive growth
/// of v_g·τ, so τ_used = τ₀√(…)/v_g.
pub fn capacity_analytic(
    omega_c: f64,
    tau0: f64,
    rho: f64,
    length: f64,
    tp: &TransitionParams,
) -> Result<CapacityResult> {
    for (name, v) in [("omega_c", omega_c), ("tau0", tau0), ("rho", rho), ("length", length)] {
        check_positive(name, v)?;
    }
    let lam2 = tp.lambda() * tp.lambda();
    let om4 = omega_c.powi(4);
    let speed_term = 4.0 * PI * PI * om4 / (9.0 * lam2 * lam2 * tp.gamma().powi(2) * rho * rho);
    let spread_term = 4.0 * length * length * tp.gamma3().powi(2) / (PI * PI * tau0.powi(4) * om4);
    let root = (speed_term + spread_term).sqrt();
    let vg = reduced_group_velocity(omega_c, rho, tp);
    let mut warnings = Vec::new();
    if !validity_check(rho, omega_c, tp).ok {
        warnings.push(Warning::ValidityViolation);
    }
    Ok(CapacityResult {
        capacity: length / (2.0 * tau0 * root),
        omega_c,
        tau_used: tau0 * root / vg,
        vg_used: vg,
        length,
        density: rho,
        method: CapacityMethod::Analytic,
        warnings,
    })
}

/// Ω_c0 = (3Γ₃λ²γρL/π²τ₀²)^{1/4}, the maximiser of [`capacity_analytic`].
pub fn critical_rabi(tau0: f64, rho: f64, length: f64, tp: &TransitionParams) -> f64 {
    (3.0 * tp.gamma3() * tp.lambda().powi(2) * tp.gamma() * rho * length / (PI * PI * tau0 * tau0)).powf(0.25)
}

/// t_s0 = τ₀(√3λ√γ/2√Γ₃)√(ρL).
pub fn storage_time(tau0: f64, rho: f64, length: f64, tp: &TransitionParams) -> f64 {
    tau0 * (3f64.sqrt() * tp.lambda() * tp.gamma().sqrt() / (2.0 * tp.gamma3().sqrt())) * (rho * length).sqrt()
}

/// C_max = √(3γλ²Lρ/32Γ₃).
pub fn max_capacity(rho: f64, length: f64, tp: &TransitionParams) -> f64 {
    (3.0 * tp.gamma() * tp.lambda().powi(2) * length * rho / (32.0 * tp.gamma3())).sqrt()
}

/// Which density of the cloud feeds the uniform-medium formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DensityChoice {
    /// ∫ρ² dz / ∫ρ dz along the axis.
    #[default]
    ColumnMean,
    Peak,
}

/// (ρ, L) of a cloud for the closed forms.
pub fn analytic_inputs(field: &DensityField, choice: DensityChoice) -> Result<(f64, f64)> {
    let length = field.effective_length()?;
    let rho = match choice {
        DensityChoice::ColumnMean => field.column_mean_density(),
        DensityChoice::Peak => field.peak_density(),
    };
    if !(rho > 0.0) {
        return Err(Error::EmptyDensity);
    }
    Ok((rho, length))
}

/// Medium along the cloud axis with coefficients from the full susceptibility.
pub struct AxialMedium<'a> {
    density: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    control: ControlField,
    transition: TransitionParams,
}

impl<'a> AxialMedium<'a> {
    pub fn new(density: impl Fn(f64) -> f64 + Sync + 'a, control: ControlField, transition: TransitionParams) -> Self {
        Self {
            density: Box::new(density),
            control,
            transition,
        }
    }

    /// On-axis density ρ(0, z) of a cloud.
    pub fn on_axis(field: &'a DensityField, control: ControlField, transition: TransitionParams) -> Self {
        Self::new(move |z| field.total(0.0, z), control, transition)
    }

    pub fn density(&self, z: f64) -> f64 {
        (self.density)(z)
    }
}

impl MediumSampler for AxialMedium<'_> {
    fn coefficients_at(&self, z: f64) -> Result<MediumCoefficients> {
        coefficients_exact(self.density(z), &self.control, &self.transition)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericOptions {
    pub propagation: PropagationOptions,
    /// Lower bound on the number of axial steps across the cloud.
    pub min_steps: usize,
    /// Time samples per initial width T₀.
    pub samples_per_t0: f64,
    /// Time window margin over the predicted largest Gaussian width.
    pub window_margin: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            propagation: PropagationOptions {
                nonlinear: false,
                ..Default::default()
            },
            min_steps: 2000,
            samples_per_t0: 8.0,
            window_margin: 1.5,
        }
    }
}

/// Propagation through a finite medium occupying [z0, z0 + span].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediumRun {
    pub report: PropagationReport,
    pub span: f64,
}

impl MediumRun {
    /// Largest in-medium width, rms × √2 (T₀ for a Gaussian at entry).
    pub fn max_width(&self) -> f64 {
        self.report.max_rms() * 2f64.sqrt()
    }

    pub fn exit_width(&self) -> f64 {
        self.report.final_metrics().map_or(0.0, |r| r.rms) * 2f64.sqrt()
    }
}

/// Runs `pulse` through `medium` over [z0, z0 + span] on a window sized from
/// the Gaussian prediction of the broadening.
pub fn run_through(
    pulse: &PulseSpec,
    medium: &dyn MediumSampler,
    z0: f64,
    span: f64,
    opts: &NumericOptions,
) -> Result<MediumRun> {
    let predicted = analytic_gaussian_path(pulse, medium, z0, span, 2000)?;
    let grid = TimeGrid::for_broadening(pulse.t0, opts.window_margin * predicted.width, opts.samples_per_t0);
    let mut field = PulseField::from_spec(pulse, grid)?;
    field.z = z0;
    let mut prop = opts.propagation;
    let cap = span / opts.min_steps.max(1) as f64;
    prop.dz = Some(match prop.dz {
        Some(dz) => dz.min(cap),
        None => cap,
    });
    let report = propagate(&field, medium, span, &prop)?;
    Ok(MediumRun { report, span })
}

/// Numeric capacity from a medium run: v_g = L/delay, τ = max width,
/// C = L/(2v_gτ).
pub fn capacity_from_run(run: &MediumRun, length: f64, omega_c: f64, density: f64) -> Result<CapacityResult> {
    let delay = run.report.group_delay();
    check_positive("group delay", delay)?;
    let tau = run.max_width();
    let vg = length / delay;
    Ok(CapacityResult {
        capacity: length / (2.0 * vg * tau),
        omega_c,
        tau_used: tau,
        vg_used: vg,
        length,
        density,
        method: CapacityMethod::Numeric,
        warnings: Vec::new(),
    })
}

/// Capacity of the trapped cloud from direct propagation along its axis.
pub fn capacity_numeric(
    spec: &CondensateSpec,
    cf: &ControlField,
    tp: &TransitionParams,
    pulse: &PulseSpec,
    opts: &NumericOptions,
) -> Result<CapacityResult> {
    let field = build_density(spec)?;
    capacity_numeric_in(&field, cf, tp, pulse, opts)
}

pub fn capacity_numeric_in(
    field: &DensityField,
    cf: &ControlField,
    tp: &TransitionParams,
    pulse: &PulseSpec,
    opts: &NumericOptions,
) -> Result<CapacityResult> {
    let run = cloud_run(field, cf, tp, pulse, opts)?;
    let mut result = capacity_from_run(&run, field.effective_length()?, cf.omega_c, field.peak_density())?;
    result.warnings = field.warnings.clone();
    if !validity_check(field.peak_density(), cf.omega_c, tp).ok {
        result.warnings.push(Warning::ValidityViolation);
    }
    Ok(result)
}

/// Propagation along the full axial extent of the cloud.
pub fn cloud_run(
    field: &DensityField,
    cf: &ControlField,
    tp: &TransitionParams,
    pulse: &PulseSpec,
    opts: &NumericOptions,
) -> Result<MediumRun> {
    let half = field.axial_half_extent();
    let medium = AxialMedium::on_axis(field, *cf, *tp);
    run_through(pulse, &medium, -half, 2.0 * half, opts)
}

/// Propagation through a uniform slab of length L holding the cloud's axial
/// column density, padded with vacuum to the cloud's axial extent.
pub fn slab_run(
    field: &DensityField,
    cf: &ControlField,
    tp: &TransitionParams,
    pulse: &PulseSpec,
    opts: &NumericOptions,
) -> Result<(MediumRun, f64)> {
    let half = field.axial_half_extent();
    let length = field.effective_length()?;
    let rho = field.axial_column_density() / length;
    let medium = AxialMedium::new(
        move |z: f64| if z.abs() < 0.5 * length { rho } else { 0.0 },
        *cf,
        *tp,
    );
    Ok((run_through(pulse, &medium, -half, 2.0 * half, opts)?, rho))
}

/// Control field used at each point of a sweep that does not vary Ω_c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RabiChoice {
    /// Ω_c0 of the point's own (ρ, L, τ₀).
    Critical,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacitySetup {
    pub condensate: CondensateSpec,
    pub transition: TransitionParams,
    pub pulse: PulseSpec,
    /// Probe detuning of the control field setup [rad/s].
    pub detuning: f64,
    pub rabi: RabiChoice,
    pub density_choice: DensityChoice,
    pub method: CapacityMethod,
    pub numeric: NumericOptions,
}

impl CapacitySetup {
    /// Capacity at one parameter point.
    pub fn evaluate(&self) -> Result<CapacityResult> {
        let field = build_density(&self.condensate)?;
        let (rho, length) = analytic_inputs(&field, self.density_choice)?;
        let omega_c = match self.rabi {
            RabiChoice::Critical => critical_rabi(self.pulse.t0, rho, length, &self.transition),
            RabiChoice::Fixed(w) => w,
        };
        let mut result = match self.method {
            CapacityMethod::Analytic => capacity_analytic(omega_c, self.pulse.t0, rho, length, &self.transition)?,
            CapacityMethod::Numeric => {
                let cf = ControlField::new(omega_c, self.detuning)?;
                capacity_numeric_in(&field, &cf, &self.transition, &self.pulse, &self.numeric)?
            }
        };
        for w in &field.warnings {
            if !result.warnings.contains(w) {
                result.warnings.push(*w);
            }
        }
        Ok(result)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    OmegaC,
    Temperature,
    Tau0,
    ScatteringLength,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Soft failures keep the sweep going and are kept as messages.
    pub result: std::result::Result<CapacityResult, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    /// Index of the largest capacity among successful points.
    pub fn argmax(&self) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.result.as_ref().ok().map(|r| (i, r.capacity)))
            .fold(None, |best: Option<(usize, f64)>, (i, c)| match best {
                Some((_, b)) if b >= c => best,
                _ => Some((i, c)),
            })
            .map(|(i, _)| i)
    }

    /// Whether the maximum lies strictly inside the scanned range.
    pub fn has_interior_maximum(&self) -> bool {
        matches!(self.argmax(), Some(i) if i > 0 && i + 1 < self.points.len())
    }
}

fn point_setup(base: &CapacitySetup, variable: SweepVariable, value: f64) -> Result<CapacitySetup> {
    let mut s = base.clone();
    match variable {
        SweepVariable::OmegaC => s.rabi = RabiChoice::Fixed(value),
        SweepVariable::Temperature => s.condensate = s.condensate.with_temperature(value),
        SweepVariable::Tau0 => s.pulse = PulseSpec::new(s.pulse.shape, value, s.pulse.peak_intensity)?,
        SweepVariable::ScatteringLength => s.condensate = s.condensate.with_scattering_length(value),
    }
    s.condensate.validate()?;
    Ok(s)
}

/// Evaluates `setup` at each value in parallel; rows keep the input order.
pub fn sweep(setup: &CapacitySetup, variable: SweepVariable, values: &[f64]) -> SweepTable {
    let points = values
        .par_iter()
        .map(|&value| SweepPoint {
            value,
            result: point_setup(setup, variable, value)
                .and_then(|s| s.evaluate())
                .map_err(|e| e.to_string()),
        })
        .collect();
    SweepTable { variable, points }
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi / lo).ln() / (n - 1) as f64;
            (0..n).map(|i| lo * (step * i as f64).exp()).collect()
        }
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
