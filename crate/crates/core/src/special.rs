//! Special functions: Bose polylogarithms and integer-order cylinder functions.
//!
//! The cylinder functions are thin wrappers over `complex-bessel` restricted
//! to real positive arguments. Each call returns the pair (f_l, f_l') so the
//! shell-matching code never has to juggle recurrences itself.

use complex_bessel::{besseli_seq, besselj_seq, besselk_seq, bessely_seq, Scaling};
use num_complex::Complex64;

use crate::{Error, Result};

// Series coefficients of g_{3/2}(e^{-u}) + 2 sqrt(pi u) in powers of u.
const G32_COEFFS: [f64; 18] = [
    2.612_375_348_685_488_3,
    1.460_354_508_809_586_8,
    -0.103_943_112_488_677_28,
    0.004_247_533_648_305_506,
    0.000_354_872_032_410_430_4,
    -0.000_037_008_427_795_661_93,
    -4.293_985_065_577_547e-6,
    5.300_511_944_244_493e-7,
    6.812_420_484_962_472e-8,
    -9.008_596_705_798_666e-9,
    -1.216_940_275_850_113e-9,
    1.671_519_835_374_238_6e-10,
    2.326_948_902_455_193e-11,
    -3.275_559_753_380_427_4e-12,
    -4.654_251_296_129_394e-13,
    6.666_434_552_781_358e-14,
    9.615_068_088_964_928e-15,
    -1.395_245_321_344_655_6e-15,
];

// Regular part of g_3(e^{-u}); the u^2 term carries the logarithm.
const G3_COEFFS: [f64; 18] = [
    1.202_056_903_159_594_3,
    -1.644_934_066_848_226_4,
    0.0,
    0.083_333_333_333_333_33,
    -0.003_472_222_222_222_222,
    0.0,
    0.000_011_574_074_074_074_074,
    0.0,
    -9.841_899_722_852_104e-8,
    0.0,
    1.148_221_634_332_745_4e-9,
    0.0,
    -1.581_572_499_080_916_6e-11,
    0.0,
    2.419_500_979_252_515e-13,
    0.0,
    -3.982_897_776_989_488e-15,
    0.0,
];

fn polylog_series(s: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = x;
    for k in 1..=2000 {
        let term = power / (k as f64).powf(s);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        power *= x;
    }
    sum
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

/// Bose function g_{3/2}(x) for 0 ≤ x ≤ 1.
pub fn bose_g32(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 0.5 {
        return polylog_series(1.5, x);
    }
    let u = -x.min(1.0).ln();
    horner(&G32_COEFFS, u) - 2.0 * (std::f64::consts::PI * u).sqrt()
}

/// Bose function g_3(x) for 0 ≤ x ≤ 1.
pub fn bose_g3(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 0.5 {
        return polylog_series(3.0, x);
    }
    let u = -x.min(1.0).ln();
    let log_term = if u > 0.0 { 0.5 * u * u * (1.5 - u.ln()) } else { 0.0 };
    horner(&G3_COEFFS, u) + log_term
}

/// A cylinder function value together with its derivative in the argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderValue {
    pub value: f64,
    pub derivative: f64,
}

fn pair<F>(f: F, l: usize, x: f64, scaling: Scaling) -> Result<(f64, f64)>
where
    F: Fn(f64, Complex64, usize, Scaling) -> std::result::Result<complex_bessel::BesselResult<f64>, complex_bessel::Error>,
{
    let res = f(l as f64, Complex64::new(x, 0.0), 2, scaling)
        .map_err(|e| Error::SpecialFunction(format!("order {l} at x = {x:e}: {e}")))?;
    Ok((res.values[0].re, res.values[1].re))
}

/// J_l(x) and J_l'(x).
pub fn bessel_j(l: usize, x: f64) -> Result<CylinderValue> {
    let (f0, f1) = pair(besselj_seq, l, x, Scaling::Unscaled)?;
    Ok(CylinderValue {
        value: f0,
        derivative: l as f64 / x * f0 - f1,
    })
}

/// Y_l(x) and Y_l'(x).
pub fn bessel_y(l: usize, x: f64) -> Result<CylinderValue> {
    let (f0, f1) = pair(bessely_seq, l, x, Scaling::Unscaled)?;
    Ok(CylinderValue {
        value: f0,
        derivative: l as f64 / x * f0 - f1,
    })
}

/// e^{-x} I_l(x) and e^{-x} I_l'(x).
pub fn bessel_i_scaled(l: usize, x: f64) -> Result<CylinderValue> {
    let (f0, f1) = pair(besseli_seq, l, x, Scaling::Exponential)?;
    Ok(CylinderValue {
        value: f0,
        derivative: l as f64 / x * f0 + f1,
    })
}

/// e^{x} K_l(x) and e^{x} K_l'(x).
pub fn bessel_k_scaled(l: usize, x: f64) -> Result<CylinderValue> {
    let (f0, f1) = pair(besselk_seq, l, x, Scaling::Exponential)?;
    Ok(CylinderValue {
        value: f0,
        derivative: l as f64 / x * f0 - f1,
    })
}

/// First zero of J_0.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bose_functions_at_unit_fugacity() {
        assert!((bose_g32(1.0) - crate::constants::ZETA_3_2).abs() < 1e-15);
        assert!((bose_g3(1.0) - crate::constants::ZETA_3).abs() < 1e-15);
    }

    #[test]
    fn bose_branches_agree_at_switch_point() {
        for &x in &[0.49, 0.5, 0.51, 0.8, 0.99] {
            let series32 = polylog_series(1.5, x);
            let series3 = polylog_series(3.0, x);
            // the plain series is slow near 1 but still converges to ~1e-10 by 2000 terms below 0.99
            let tol = if x > 0.9 { 1e-6 } else { 1e-12 };
            assert!((bose_g32(x) - series32).abs() < tol * series32, "g32 at {x}");
            assert!((bose_g3(x) - series3).abs() < 1e-12 * series3, "g3 at {x}");
        }
    }

    #[test]
    fn bessel_reference_values() {
        let j0 = bessel_j(0, 1.0).unwrap();
        assert!((j0.value - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((j0.derivative + 0.440_050_585_744_933_5).abs() < 1e-14);
        let y1 = bessel_y(1, 2.0).unwrap();
        assert!((y1.value + 0.107_032_431_540_937_5).abs() < 1e-14);
        let k0 = bessel_k_scaled(0, 1.0).unwrap();
        assert!((k0.value - 0.421_024_438_240_708_3 * 1f64.exp()).abs() < 1e-13);
        let i1 = bessel_i_scaled(1, 1.0).unwrap();
        assert!((i1.value - 0.565_159_103_992_485_1 * (-1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn wronskians_hold() {
        for &(l, x) in &[(0usize, 0.3), (3, 5.0), (12, 20.0), (25, 4.0)] {
            let j = bessel_j(l, x).unwrap();
            let y = bessel_y(l, x).unwrap();
            let w = j.value * y.derivative - j.derivative * y.value;
            let expect = 2.0 / (std::f64::consts::PI * x);
            assert!((w - expect).abs() < 1e-9 * expect, "J/Y l={l} x={x}");
            let i = bessel_i_scaled(l, x).unwrap();
            let k = bessel_k_scaled(l, x).unwrap();
            let w = i.value * k.derivative - i.derivative * k.value;
            assert!((w + 1.0 / x).abs() < 1e-9 / x, "I/K l={l} x={x}");
        }
    }
}
