//! Ultraslow light in EIT-dressed Bose-Einstein condensates.
//!
//! The crate is organised bottom-up:
//!
//! * [`eit`] evaluates the three-level susceptibility and every propagation
//!   coefficient derived from it (loss, group velocity, dispersion, Kerr).
//! * [`condensate`] builds the semi-ideal density field of a trapped gas and
//!   the graded index profile it imprints on an off-resonant probe.
//! * [`pulse`] propagates probe envelopes with a symmetric split-step
//!   Fourier scheme and carries the closed-form Gaussian oracle.
//! * [`capacity`] evaluates bit-storage capacity analytically and from
//!   propagation runs, and performs deterministic parameter sweeps.
//! * [`modes`] counts and solves the LP modes of the condensate waveguide.

pub mod capacity;
pub mod condensate;
pub mod constants;
pub mod eit;
mod error;
pub mod modes;
pub mod pulse;
pub mod special;

pub use error::{Error, Result, Warning};
pub use num_complex::Complex64;
