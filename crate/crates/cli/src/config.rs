//! Strict JSON run configuration and its conversion to SI model inputs.

use serde::Deserialize;

use bec_slowlight::capacity::{DensityChoice, RabiChoice, SweepVariable};
use bec_slowlight::condensate::{CondensateSpec, CoreDensity, CoreModel, GridSpec, ProfileShape, RadiusRule};
use bec_slowlight::eit::{ControlField, TransitionParams};
use bec_slowlight::pulse::{PulseShape, PulseSpec};

use crate::error::CliError;
use crate::units::{Density, Intensity, Length, Mass, Quantity, Rate, References, Temperature, Time};

/// Config used when no `--config` is given.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.json");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub transition: TransitionConfig,
    pub condensate: CondensateConfig,
    pub control: ControlConfig,
    pub pulse: PulseConfig,
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub capacity: CapacityConfig,
    #[serde(default)]
    pub modes: ModesConfig,
    pub output_dir: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionConfig {
    pub wavelength: Quantity<Length>,
    /// Spontaneous decay rate γ of the probe transition.
    pub linewidth: Quantity<Rate>,
    /// Dephasing rate of the excited-state coherence.
    pub excited_dephasing: Quantity<Rate>,
    /// Dephasing rate of the ground-state coherence.
    pub ground_dephasing: Quantity<Rate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondensateConfig {
    /// Where the trap and atom-number values come from.
    pub provenance: String,
    pub atoms: f64,
    pub radial_trap: Quantity<Rate>,
    pub axial_trap: Quantity<Rate>,
    pub scattering_length: Quantity<Length>,
    pub mass: Quantity<Mass>,
    pub temperature: Quantity<Temperature>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub rabi: Quantity<Rate>,
    /// Probe detuning ω₀ - ω_p.
    pub detuning: Quantity<Rate>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeConfig {
    Gaussian,
    Sech,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub shape: ShapeConfig,
    pub width: Quantity<Time>,
    pub peak_intensity: Quantity<Intensity>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientModel {
    #[default]
    Exact,
    Reduced,
}

impl CoefficientModel {
    pub fn name(self) -> &'static str {
        match self {
            CoefficientModel::Exact => "exact",
            CoefficientModel::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionMode {
    /// Complex β₂ = 2b₂ as derived.
    #[default]
    Literal,
    /// Real β₂ = 2|b₂| with the sign that supports bright solitons.
    FocusingReal,
}

impl DispersionMode {
    pub fn name(self) -> &'static str {
        match self {
            DispersionMode::Literal => "literal",
            DispersionMode::FocusingReal => "focusing_real",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityAverage {
    #[default]
    ColumnMean,
    Peak,
}

impl DensityAverage {
    pub fn name(self) -> &'static str {
        match self {
            DensityAverage::ColumnMean => "column_mean",
            DensityAverage::Peak => "peak",
        }
    }

    pub fn choice(self) -> DensityChoice {
        match self {
            DensityAverage::ColumnMean => DensityChoice::ColumnMean,
            DensityAverage::Peak => DensityChoice::Peak,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    #[serde(default)]
    pub coefficients: CoefficientModel,
    #[serde(default)]
    pub dispersion: DispersionMode,
    /// Density used by the uniform-medium capacity formulas.
    #[serde(default)]
    pub density_average: DensityAverage,
    /// Replaces the cloud's axial density everywhere.
    #[serde(default)]
    pub density_override: Option<Quantity<Density>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub radial_points: usize,
    pub axial_points: usize,
    pub extent_factor: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            radial_points: g.radial_points,
            axial_points: g.axial_points,
            extent_factor: g.extent_factor,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathConfig {
    /// Along the axis of the trapped cloud.
    #[default]
    Cloud,
    Uniform {
        density: Quantity<Density>,
        length: Quantity<Length>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationConfig {
    pub path: PathConfig,
    pub steps_per_scale: f64,
    pub min_steps: usize,
    pub record_every: usize,
    pub step: Option<Quantity<Length>>,
    pub samples_per_width: f64,
    pub window_margin: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            path: PathConfig::Cloud,
            steps_per_scale: 200.0,
            min_steps: 2000,
            record_every: 10,
            step: None,
            samples_per_width: 8.0,
            window_margin: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariableConfig {
    Rabi,
    Temperature,
    PulseWidth,
    ScatteringLength,
}

impl SweepVariableConfig {
    pub fn variable(self) -> SweepVariable {
        match self {
            SweepVariableConfig::Rabi => SweepVariable::OmegaC,
            SweepVariableConfig::Temperature => SweepVariable::Temperature,
            SweepVariableConfig::PulseWidth => SweepVariable::Tau0,
            SweepVariableConfig::ScatteringLength => SweepVariable::ScatteringLength,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepVariableConfig::Rabi => "rabi",
            SweepVariableConfig::Temperature => "temperature",
            SweepVariableConfig::PulseWidth => "pulse_width",
            SweepVariableConfig::ScatteringLength => "scattering_length",
        }
    }

    pub fn si_unit(self) -> &'static str {
        match self {
            SweepVariableConfig::Rabi => "rad/s",
            SweepVariableConfig::Temperature => "K",
            SweepVariableConfig::PulseWidth => "s",
            SweepVariableConfig::ScatteringLength => "m",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodConfig {
    #[default]
    Analytic,
    Numeric,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RabiName {
    #[default]
    Critical,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RabiConfig {
    Named(RabiName),
    Fixed(Quantity<Rate>),
}

impl Default for RabiConfig {
    fn default() -> Self {
        RabiConfig::Named(RabiName::Critical)
    }
}

/// Sweep bound whose unit is checked against the swept variable.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariableConfig,
    pub from: Bound,
    pub to: Bound,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default)]
    pub rabi: RabiConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidthScanConfig {
    pub scattering_lengths: Vec<Quantity<Length>>,
    pub from: Quantity<Temperature>,
    pub to: Quantity<Temperature>,
    pub points: usize,
    pub rabi: Quantity<Rate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacityConfig {
    /// Also evaluate the capacity from a propagation run at Ω_c0.
    pub numeric: bool,
    pub sweeps: Vec<SweepConfig>,
    pub width_scan: Option<WidthScanConfig>,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            numeric: true,
            sweeps: Vec::new(),
            width_scan: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeChoice {
    #[default]
    Graded,
    Step,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreDensityConfig {
    #[default]
    Condensed,
    Total,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusConfig {
    #[default]
    ThomasFermi,
    ThermalColumn(f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureScanConfig {
    pub from: Quantity<Temperature>,
    pub to: Quantity<Temperature>,
    pub points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    /// Control field for the guiding calculation; the top-level one if absent.
    pub control: Option<ControlConfig>,
    pub shape: ShapeChoice,
    pub core_density: CoreDensityConfig,
    pub radius: RadiusConfig,
    pub shells: usize,
    /// Frequency offset for the group-velocity difference; 1e-4 Ω_c if absent.
    pub frequency_step: Option<Quantity<Rate>>,
    /// Labels like "LP00" whose radial profiles are written out.
    pub profiles: Vec<String>,
    pub profile_points: usize,
    /// Profile sampling range as a multiple of the core radius.
    pub profile_extent: f64,
    pub temperature_scan: Option<TemperatureScanConfig>,
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self {
            control: None,
            shape: ShapeChoice::Graded,
            core_density: CoreDensityConfig::Condensed,
            radius: RadiusConfig::ThomasFermi,
            shells: bec_slowlight::modes::DEFAULT_SHELLS,
            frequency_step: None,
            profiles: vec!["LP00".into(), "LP10".into()],
            profile_points: 256,
            profile_extent: 2.0,
            temperature_scan: None,
        }
    }
}

/// 1-based line of the last key of `path` in `text`, searching each key
/// after the previous one.
pub fn locate(text: &str, path: &[&str]) -> Option<usize> {
    let mut pos = 0;
    for key in path {
        let needle = format!("\"{key}\"");
        pos += text[pos..].find(&needle)?;
    }
    Some(text[..pos].matches('\n').count() + 1)
}

/// Config text plus the parsed document.
pub struct LoadedConfig {
    pub text: String,
    pub source: String,
    pub config: RunConfig,
}

impl LoadedConfig {
    pub fn parse(text: String, source: impl Into<String>) -> Result<Self, CliError> {
        let source = source.into();
        let config = serde_json::from_str(&text).map_err(|e| {
            let mut msg = e.to_string();
            if let Some(at) = msg.rfind(" at line ") {
                msg.truncate(at);
            }
            CliError::Config(format!("{source}:{}:{}: {msg}", e.line(), e.column()))
        })?;
        Ok(Self { text, source, config })
    }

    /// Config error anchored at the line of `path`.
    pub fn error(&self, path: &[&str], message: impl std::fmt::Display) -> CliError {
        let dotted = path.join(".");
        match locate(&self.text, path) {
            Some(line) => CliError::Config(format!("{}:{line}: {dotted}: {message}", self.source)),
            None => CliError::Config(format!("{}: {dotted}: {message}", self.source)),
        }
    }
}

/// Model inputs converted to SI, with a log of every conversion.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub transition: TransitionParams,
    pub condensate: CondensateSpec,
    pub control: ControlField,
    pub pulse: PulseSpec,
    pub grid: GridSpec,
    pub refs: References,
    pub conversions: Vec<String>,
}

fn positive(loaded: &LoadedConfig, path: &[&str], v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(loaded.error(path, format!("must be > 0, got {v}")))
    }
}

impl LoadedConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let c = &self.config;
        let t = &c.transition;
        if t.linewidth.is_relative() {
            return Err(self.error(&["transition", "linewidth"], "cannot be given in units of itself"));
        }
        let no_refs = References {
            linewidth: f64::NAN,
            critical_temperature: f64::NAN,
        };
        let gamma = positive(self, &["transition", "linewidth"], t.linewidth.si(&no_refs))?;
        let mut refs = References {
            linewidth: gamma,
            critical_temperature: f64::NAN,
        };
        let lambda = positive(self, &["transition", "wavelength"], t.wavelength.si(&refs))?;
        let gamma3 = positive(self, &["transition", "excited_dephasing"], t.excited_dephasing.si(&refs))?;
        let gamma2 = t.ground_dephasing.si(&refs);
        let transition = TransitionParams::new(lambda, gamma, gamma2, gamma3)
            .map_err(|e| self.error(&["transition"], e))?;

        let cc = &c.condensate;
        if cc.provenance.trim().is_empty() {
            return Err(self.error(&["condensate", "provenance"], "must say where the trap values come from"));
        }
        let placeholder = CondensateSpec::new(
            cc.atoms,
            cc.radial_trap.si(&refs),
            cc.axial_trap.si(&refs),
            cc.scattering_length.si(&refs),
            cc.mass.si(&refs),
            0.0,
        )
        .map_err(|e| self.error(&["condensate"], e))?;
        refs.critical_temperature = placeholder.critical_temperature();
        let temperature = cc.temperature.si(&refs);
        let condensate = CondensateSpec::new(
            placeholder.n_atoms,
            placeholder.omega_r,
            placeholder.omega_z,
            placeholder.a_s,
            placeholder.mass,
            temperature,
        )
        .map_err(|e| self.error(&["condensate", "temperature"], e))?;

        let control = self.control(&c.control, &refs, &["control"])?;
        let shape = match c.pulse.shape {
            ShapeConfig::Gaussian => PulseShape::Gaussian,
            ShapeConfig::Sech => PulseShape::Sech,
        };
        let pulse = PulseSpec::new(shape, c.pulse.width.si(&refs), c.pulse.peak_intensity.si(&refs))
            .map_err(|e| self.error(&["pulse"], e))?;
        let g = &c.grid;
        if g.radial_points < 8 || g.axial_points < 8 {
            return Err(self.error(&["grid"], "need at least 8 points per axis"));
        }
        positive(self, &["grid", "extent_factor"], g.extent_factor)?;
        let grid = GridSpec {
            radial_points: g.radial_points,
            axial_points: g.axial_points,
            extent_factor: g.extent_factor,
        };

        let conversions = vec![
            format!("transition.wavelength: {}", t.wavelength.echo(&refs)),
            format!("transition.linewidth: {}", t.linewidth.echo(&refs)),
            format!("transition.excited_dephasing: {}", t.excited_dephasing.echo(&refs)),
            format!("transition.ground_dephasing: {}", t.ground_dephasing.echo(&refs)),
            format!("condensate.radial_trap: {}", cc.radial_trap.echo(&refs)),
            format!("condensate.axial_trap: {}", cc.axial_trap.echo(&refs)),
            format!("condensate.scattering_length: {}", cc.scattering_length.echo(&refs)),
            format!("condensate.mass: {}", cc.mass.echo(&refs)),
            format!("condensate.temperature: {}", cc.temperature.echo(&refs)),
            format!("control.rabi: {}", c.control.rabi.echo(&refs)),
            format!("control.detuning: {}", c.control.detuning.echo(&refs)),
            format!("pulse.width: {}", c.pulse.width.echo(&refs)),
            format!("pulse.peak_intensity: {}", c.pulse.peak_intensity.echo(&refs)),
        ];
        Ok(Resolved {
            transition,
            condensate,
            control,
            pulse,
            grid,
            refs,
            conversions,
        })
    }

    pub fn control(&self, cfg: &ControlConfig, refs: &References, path: &[&str]) -> Result<ControlField, CliError> {
        let mut rabi_path = path.to_vec();
        rabi_path.push("rabi");
        let rabi = positive(self, &rabi_path, cfg.rabi.si(refs))?;
        ControlField::new(rabi, cfg.detuning.si(refs)).map_err(|e| self.error(path, e))
    }

    /// Swept SI values of sweep `index`.
    pub fn sweep_values(&self, index: usize, refs: &References) -> Result<Vec<f64>, CliError> {
        let s = &self.config.capacity.sweeps[index];
        let convert = |b: &Bound, key: &'static str| -> Result<f64, CliError> {
            let path = ["capacity", "sweeps", key];
            let si = match s.variable {
                SweepVariableConfig::Rabi => Quantity::<Rate>::new(b.value, &b.unit).map(|q| q.si(refs)),
                SweepVariableConfig::Temperature => {
                    Quantity::<Temperature>::new(b.value, &b.unit).map(|q| q.si(refs))
                }
                SweepVariableConfig::PulseWidth => Quantity::<Time>::new(b.value, &b.unit).map(|q| q.si(refs)),
                SweepVariableConfig::ScatteringLength => {
                    Quantity::<Length>::new(b.value, &b.unit).map(|q| q.si(refs))
                }
            };
            let si = si.ok_or_else(|| {
                self.error(&path, format!("unit `{}` does not fit a {} sweep", b.unit, s.variable.name()))
            })?;
            positive(self, &path, si)
        };
        let lo = convert(&s.from, "from")?;
        let hi = convert(&s.to, "to")?;
        Ok(match s.spacing {
            Spacing::Linear => bec_slowlight::capacity::linear_grid(lo, hi, s.points),
            Spacing::Log => bec_slowlight::capacity::log_grid(lo, hi, s.points),
        })
    }

    pub fn sweep_rabi(&self, index: usize, refs: &References) -> Result<RabiChoice, CliError> {
        match &self.config.capacity.sweeps[index].rabi {
            RabiConfig::Named(RabiName::Critical) => Ok(RabiChoice::Critical),
            RabiConfig::Fixed(q) => Ok(RabiChoice::Fixed(positive(
                self,
                &["capacity", "sweeps", "rabi"],
                q.si(refs),
            )?)),
        }
    }
}

impl ModesConfig {
    pub fn core(&self) -> CoreModel {
        CoreModel {
            radius: match self.radius {
                RadiusConfig::ThomasFermi => RadiusRule::ThomasFermi,
                RadiusConfig::ThermalColumn(f) => RadiusRule::ThermalColumn(f),
            },
            density: match self.core_density {
                CoreDensityConfig::Condensed => CoreDensity::Condensed,
                CoreDensityConfig::Total => CoreDensity::Total,
            },
        }
    }

    pub fn profile_shape(&self) -> ProfileShape {
        match self.shape {
            ShapeChoice::Graded => ProfileShape::Graded,
            ShapeChoice::Step => ProfileShape::Step,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_resolves() {
        let loaded = LoadedConfig::parse(DEFAULT_CONFIG.to_owned(), "default").unwrap();
        let r = loaded.resolve().unwrap();
        assert!((r.transition.gamma() / (2.0 * std::f64::consts::PI) - 10.01e6).abs() < 1.0);
        assert_eq!(r.transition.gamma3(), 0.5 * r.transition.gamma());
        assert!((r.control.omega_c - 5.0 * r.transition.gamma()).abs() < 1e-6);
        assert!((r.condensate.temperature - 408e-9).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_is_a_config_error_with_line() {
        let text = DEFAULT_CONFIG.replacen("\"output_dir\"", "\"colour\": 1,\n  \"output_dir\"", 1);
        let Err(CliError::Config(msg)) = LoadedConfig::parse(text, "cfg.json") else {
            panic!("expected a config error");
        };
        assert!(msg.starts_with("cfg.json:"), "{msg}");
        assert!(msg.contains("unknown field `colour`"), "{msg}");
    }

    #[test]
    fn validation_errors_point_at_the_key() {
        let text = DEFAULT_CONFIG.replacen("\"atoms\": 8.3e6", "\"atoms\": -1", 1);
        let loaded = LoadedConfig::parse(text.clone(), "cfg.json").unwrap();
        let Err(CliError::Config(msg)) = loaded.resolve() else {
            panic!("expected a config error");
        };
        let line = locate(&text, &["condensate"]).unwrap();
        assert!(msg.starts_with(&format!("cfg.json:{line}:")), "{msg}");
    }

    #[test]
    fn locate_follows_the_path() {
        let text = "{\n \"a\": {\n  \"b\": 1\n },\n \"b\": 2\n}";
        assert_eq!(locate(text, &["a", "b"]), Some(3));
        assert_eq!(locate(text, &["b"]), Some(3));
        assert_eq!(locate(text, &["missing"]), None);
    }
}
