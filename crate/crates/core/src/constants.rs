//! CODATA 2018 physical constants in SI units.

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of a sodium-23 atom.
pub const SODIUM_MASS: f64 = 22.989_769_28 * ATOMIC_MASS_UNIT;

/// Riemann zeta values used by the ideal Bose gas.
pub const ZETA_3_2: f64 = 2.612_375_348_685_488;
pub const ZETA_3: f64 = 1.202_056_903_159_594_2;
pub const ZETA_4: f64 = 1.082_323_233_711_138_2;
