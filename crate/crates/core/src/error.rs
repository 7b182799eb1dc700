use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("susceptibility denominator vanishes (|D| = {magnitude:e})")]
    DegenerateDenominator { magnitude: f64 },
    #[error("on-resonance transmission {transmission:e} is already below 1/e")]
    NoWindow { transmission: f64 },
    #[error("density field carries no atoms")]
    EmptyDensity,
    #[error("pulse carries no energy")]
    EmptyPulse,
    #[error("envelope reached the time-grid guard band at z = {z:e} m (edge/peak = {ratio:e})")]
    GridOverflow { z: f64, ratio: f64 },
    #[error("step of {dz:e} m accumulates {phase:.3} rad per step (limit 0.1)")]
    StepTooCoarse { dz: f64, phase: f64 },
    #[error("bracketing found {found} of {expected} predicted modes for l = {l}")]
    RootLoss { l: usize, found: usize, expected: usize },
    #[error("bisection failed to converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("mode LP({l},{m}) lost while perturbing the frequency")]
    ModeTrackingLost { l: usize, m: usize },
    #[error("special function evaluation failed: {0}")]
    SpecialFunction(String),
}

/// Soft diagnostics attached to results that are still usable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Warning {
    /// Reduced-form coefficients evaluated outside Γ ≪ Ω_c ≪ Ω_max.
    ValidityViolation,
    /// No condensed core; only the thermal cloud is present.
    TemperatureAboveTc,
    /// Index contrast below 1e-8; the cloud does not guide.
    NoContrast,
    /// Probe is resonant, so the real index contrast is negligible.
    ResonantProbe,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
