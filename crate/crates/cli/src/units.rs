//! Value + unit quantities read from the config.
//!
//! Units are checked while the JSON is parsed, so a wrong unit is reported
//! with the line and column of the offending object.

use std::f64::consts::PI;
use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, Deserializer};
use serde::Deserialize;

use bec_slowlight::constants::ATOMIC_MASS_UNIT;

/// How a unit maps onto SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Factor(f64),
    /// Multiple of a run-dependent reference (the linewidth, or T_c).
    Relative(Reference),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Linewidth,
    CriticalTemperature,
}

pub trait Dimension {
    const NAME: &'static str;
    const SI: &'static str;
    const UNITS: &'static [(&'static str, Scale)];
}

macro_rules! dimension {
    ($ty:ident, $name:literal, $si:literal, [$(($unit:literal, $scale:expr)),* $(,)?]) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $ty;
        impl Dimension for $ty {
            const NAME: &'static str = $name;
            const SI: &'static str = $si;
            const UNITS: &'static [(&'static str, Scale)] = &[$(($unit, $scale)),*];
        }
    };
}

const TWO_PI: f64 = 2.0 * PI;

dimension!(Length, "length", "m", [
    ("m", Scale::Factor(1.0)),
    ("mm", Scale::Factor(1e-3)),
    ("um", Scale::Factor(1e-6)),
    ("nm", Scale::Factor(1e-9)),
]);
dimension!(Time, "time", "s", [
    ("s", Scale::Factor(1.0)),
    ("ms", Scale::Factor(1e-3)),
    ("us", Scale::Factor(1e-6)),
    ("ns", Scale::Factor(1e-9)),
    ("ps", Scale::Factor(1e-12)),
]);
// Hz-type units are cyclic frequencies and convert to angular rates.
dimension!(Rate, "angular frequency", "rad/s", [
    ("rad/s", Scale::Factor(1.0)),
    ("Hz", Scale::Factor(TWO_PI)),
    ("kHz", Scale::Factor(TWO_PI * 1e3)),
    ("MHz", Scale::Factor(TWO_PI * 1e6)),
    ("GHz", Scale::Factor(TWO_PI * 1e9)),
    ("gamma", Scale::Relative(Reference::Linewidth)),
]);
dimension!(Temperature, "temperature", "K", [
    ("K", Scale::Factor(1.0)),
    ("uK", Scale::Factor(1e-6)),
    ("nK", Scale::Factor(1e-9)),
    ("Tc", Scale::Relative(Reference::CriticalTemperature)),
]);
dimension!(Intensity, "intensity", "W/m2", [
    ("W/m2", Scale::Factor(1.0)),
    ("mW/cm2", Scale::Factor(10.0)),
    ("W/cm2", Scale::Factor(1e4)),
    ("kW/cm2", Scale::Factor(1e7)),
]);
dimension!(Mass, "mass", "kg", [
    ("kg", Scale::Factor(1.0)),
    ("amu", Scale::Factor(ATOMIC_MASS_UNIT)),
]);
dimension!(Density, "number density", "m^-3", [
    ("m^-3", Scale::Factor(1.0)),
    ("cm^-3", Scale::Factor(1e6)),
]);

fn lookup<D: Dimension>(unit: &str) -> Option<Scale> {
    D::UNITS.iter().find(|(u, _)| *u == unit).map(|(_, s)| *s)
}

fn unit_list<D: Dimension>() -> String {
    D::UNITS.iter().map(|(u, _)| format!("`{u}`")).collect::<Vec<_>>().join(", ")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantity {
    value: f64,
    unit: String,
}

/// A finite value with a unit valid for dimension `D`.
#[derive(Clone, PartialEq)]
pub struct Quantity<D> {
    pub value: f64,
    pub unit: String,
    pub scale: Scale,
    _dim: PhantomData<D>,
}

impl<D: Dimension> Quantity<D> {
    pub fn new(value: f64, unit: &str) -> Option<Self> {
        Some(Self {
            value,
            unit: unit.to_owned(),
            scale: lookup::<D>(unit)?,
            _dim: PhantomData,
        })
    }

    /// Value in SI units given the run's linewidth and critical temperature.
    pub fn si(&self, refs: &References) -> f64 {
        match self.scale {
            Scale::Factor(f) => self.value * f,
            Scale::Relative(Reference::Linewidth) => self.value * refs.linewidth,
            Scale::Relative(Reference::CriticalTemperature) => self.value * refs.critical_temperature,
        }
    }

    pub fn is_relative(&self) -> bool {
        matches!(self.scale, Scale::Relative(_))
    }

    /// `value unit = si SI` for echoing conversions.
    pub fn echo(&self, refs: &References) -> String {
        format!("{} {} = {:e} {}", self.value, self.unit, self.si(refs), D::SI)
    }
}

impl<D> fmt::Debug for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(deserializer: De) -> Result<Self, De::Error> {
        let raw = RawQuantity::deserialize(deserializer)?;
        if !raw.value.is_finite() {
            return Err(de::Error::custom(format!("{} value must be finite", D::NAME)));
        }
        Quantity::new(raw.value, &raw.unit).ok_or_else(|| {
            de::Error::custom(format!(
                "unit `{}` is not a {} unit (expected one of {})",
                raw.unit,
                D::NAME,
                unit_list::<D>()
            ))
        })
    }
}

/// Run-dependent references for relative units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct References {
    pub linewidth: f64,
    pub critical_temperature: f64,
}
