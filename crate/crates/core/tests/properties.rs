use proptest::prelude::*;

use bec_slowlight::capacity::{capacity_analytic, critical_rabi, log_grid, max_capacity};
use bec_slowlight::condensate::{build_density, index_profile, CondensateSpec, GridSpec};
use bec_slowlight::eit::{
    coefficients_exact, compensation_peak_power, compensation_product, compensation_product_leading, susceptibility,
    susceptibility_derivatives, ControlField, MediumCoefficients, TransitionParams,
};
use bec_slowlight::pulse::{propagate, PropagationOptions, PulseField, PulseSpec, TimeGrid, UniformMedium};
use bec_slowlight::{Complex64, Result};

fn sodium() -> TransitionParams {
    TransitionParams::sodium()
}

/// Distance from `delta` to the nearest pole of χ in the complex Δ plane.
fn pole_distance(cf: &ControlField, tp: &TransitionParams) -> f64 {
    let g2 = tp.gamma2() / 2.0;
    let g3 = tp.gamma3() / 2.0;
    // D = (g2 + iΔ)(g3 + iΔ) + Ω²/4 vanishes at iΔ = x
    let disc = Complex64::new((g2 - g3).powi(2) - cf.omega_c * cf.omega_c, 0.0).sqrt();
    let i = Complex64::new(0.0, 1.0);
    [(-(g2 + g3) + disc) / 2.0, (-(g2 + g3) - disc) / 2.0]
        .iter()
        .map(|x| (-i * x - cf.detuning).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Richardson-extrapolated central differences of χ in Δ, orders 1 to 3.
fn finite_differences(rho: f64, cf: &ControlField, tp: &TransitionParams, h: f64) -> [Complex64; 3] {
    let f = |d: f64| susceptibility(rho, &cf.with_detuning(cf.detuning + d), tp).unwrap();
    let stencil = |h: f64| {
        let (m2, m1, p0, p1, p2) = (f(-2.0 * h), f(-h), f(0.0), f(h), f(2.0 * h));
        [
            (p1 - m1) / (2.0 * h),
            (p1 - 2.0 * p0 + m1) / (h * h),
            (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h),
        ]
    };
    let coarse = stencil(h);
    let fine = stencil(h / 2.0);
    [0, 1, 2].map(|k| (4.0 * fine[k] - coarse[k]) / 3.0)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn analytic_derivatives_match_finite_differences(
        log_rho in 17.0f64..21.0,
        rabi in 0.5f64..20.0,
        detuning in -2.0f64..2.0,
        g2_frac in 0.0f64..1e-3,
    ) {
        let base = sodium();
        let tp = base.with_gamma2(g2_frac * base.gamma()).unwrap();
        let cf = ControlField::new(rabi * tp.gamma(), detuning * tp.gamma()).unwrap();
        let rho = 10f64.powf(log_rho);
        let d = susceptibility_derivatives(rho, &cf, &tp).unwrap();
        let fd = finite_differences(rho, &cf, &tp, 0.02 * pole_distance(&cf, &tp));
        prop_assert!(rel(fd[0], d.d1) < 1e-6, "d1 {}", rel(fd[0], d.d1));
        prop_assert!(rel(fd[1], d.d2) < 1e-6, "d2 {}", rel(fd[1], d.d2));
        prop_assert!(rel(fd[2], d.d3) < 1e-6, "d3 {}", rel(fd[2], d.d3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn susceptibility_is_odd_even_without_ground_dephasing(
        log_rho in 17.0f64..21.0,
        rabi in 0.5f64..20.0,
        detuning in 0.001f64..3.0,
    ) {
        let tp = sodium().with_gamma2(0.0).unwrap();
        let cf = ControlField::new(rabi * tp.gamma(), detuning * tp.gamma()).unwrap();
        let rho = 10f64.powf(log_rho);
        let plus = susceptibility(rho, &cf, &tp).unwrap();
        let minus = susceptibility(rho, &cf.with_detuning(-cf.detuning), &tp).unwrap();
        prop_assert!((minus + plus.conj()).norm() <= 1e-12 * plus.norm());
    }

    #[test]
    fn resonant_absorption_is_proportional_to_ground_dephasing(
        rabi in 0.5f64..20.0,
        g2_frac in 1e-6f64..1e-3,
    ) {
        let base = sodium();
        let cf = ControlField::resonant(rabi * base.gamma()).unwrap();
        let rho = 5e19;
        let unit = base.with_gamma2(1e-6 * base.gamma()).unwrap();
        let tp = base.with_gamma2(g2_frac * base.gamma()).unwrap();
        let reference = susceptibility(rho, &cf, &unit).unwrap().im / 1e-6;
        let chi = susceptibility(rho, &cf, &tp).unwrap();
        prop_assert!(chi.im > 0.0);
        // linear in Γ₂ while Γ₂Γ₃ ≪ Ω_c²
        prop_assert!((chi.im / g2_frac / reference - 1.0).abs() < 1e-2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn compensation_product_is_density_and_rabi_free(
        log_rho in 17.0f64..21.0,
        rabi in 2.0f64..50.0,
        t0 in 1e-9f64..1e-6,
    ) {
        let tp = sodium();
        let p = compensation_peak_power(&tp, t0, 10f64.powf(log_rho), rabi * tp.gamma()).unwrap();
        let product = p.peak_intensity * t0 * t0;
        prop_assert!((product / compensation_product(&tp) - 1.0).abs() < 1e-9);
        // the Γ₂ ≪ Γ₃ form differs only by Γ₃/(Γ₂ + Γ₃)
        let leading = compensation_product_leading(&tp);
        prop_assert!((product / leading - 1.0).abs() < 2.0 * tp.gamma2() / tp.gamma3());
    }
}

fn small_grid() -> GridSpec {
    GridSpec {
        radial_points: 96,
        axial_points: 192,
        extent_factor: 1.2,
    }
}

fn cloud_at(fraction: f64) -> (CondensateSpec, f64) {
    let spec = CondensateSpec::sodium_slow_light();
    let tc = spec.critical_temperature();
    (spec.with_temperature(fraction * tc), tc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn density_integrates_to_atom_number(fraction in 0.0f64..0.95) {
        let (spec, _) = cloud_at(fraction);
        let field = bec_slowlight::condensate::build_density_with(&spec, small_grid()).unwrap();
        let n = field.integrated_atoms();
        prop_assert!((n / spec.n_atoms - 1.0).abs() < 5e-3, "N = {n:e}");
        prop_assert!(field.condensed_samples().iter().all(|&v| v >= 0.0));
        prop_assert!(field.thermal_samples().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn condensed_fraction_and_peak_fall_with_temperature(a in 0.05f64..0.9, gap in 0.01f64..0.05) {
        let (cold, _) = cloud_at(a);
        let (warm, _) = cloud_at(a + gap);
        let c = build_density(&cold).unwrap();
        let w = build_density(&warm).unwrap();
        prop_assert!(w.condensed_fraction() < c.condensed_fraction());
        prop_assert!(w.condensed(0.0, 0.0) < c.condensed(0.0, 0.0));
        // the thermal cloud fills the centre faster than the core empties below ~0.25 T_c
        if a >= 0.3 {
            prop_assert!(w.peak_density() < c.peak_density());
        }
    }

    #[test]
    fn stronger_interactions_lower_peak_and_lengthen_cloud(fraction in 0.1f64..0.9, a_s in 3e-9f64..10e-9) {
        let (spec, _) = cloud_at(fraction);
        let weak = build_density(&spec).unwrap();
        let strong = build_density(&spec.with_scattering_length(a_s)).unwrap();
        prop_assert!(strong.peak_density() < weak.peak_density());
        prop_assert!(strong.effective_length().unwrap() > weak.effective_length().unwrap());
    }

    #[test]
    fn index_profile_is_non_increasing(fraction in 0.1f64..0.95, detuning in -0.5f64..-0.01) {
        let (spec, _) = cloud_at(fraction);
        let field = build_density(&spec).unwrap();
        let tp = sodium();
        let cf = ControlField::new(2.5 * tp.gamma(), detuning * tp.gamma()).unwrap();
        let p = index_profile(&field, &cf, &tp).unwrap();
        let samples: Vec<f64> = (0..=200).map(|i| p.index(p.radius * i as f64 / 200.0)).collect();
        prop_assert!(samples.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!((samples[200] - 1.0).abs() < 1e-12);
    }
}

fn lossless(beta2: f64, gamma_nl: f64) -> MediumCoefficients {
    MediumCoefficients {
        alpha: Complex64::new(0.0, 0.0),
        inv_vg: Complex64::new(1e-3, 0.0),
        b2: Complex64::new(beta2 / 2.0, 0.0),
        b3: Complex64::new(0.0, 0.0),
        eta: gamma_nl * bec_slowlight::constants::EPSILON_0 * bec_slowlight::constants::SPEED_OF_LIGHT,
        warnings: Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lossless_propagation_conserves_energy(
        beta2 in prop_oneof![-1e-11f64..-1e-13, 1e-13f64..1e-11],
        order in 0.0f64..2.0,
        sech in any::<bool>(),
    ) {
        let t0 = 1e-6;
        let peak = 1e3;
        let gamma_nl = order * order * beta2.abs() / (t0 * t0 * peak);
        let spec = if sech { PulseSpec::sech(t0, peak) } else { PulseSpec::gaussian(t0, peak) }.unwrap();
        let pulse = PulseField::from_spec(&spec, TimeGrid::for_width(t0)).unwrap();
        let medium = UniformMedium(lossless(beta2, gamma_nl));
        let span = 2.0 * t0 * t0 / beta2.abs();
        let report = propagate(&pulse, &medium, span, &PropagationOptions::default()).unwrap();
        let drift = report.final_field.energy() / pulse.energy() - 1.0;
        prop_assert!(drift.abs() < 1e-8, "energy drift {drift:e}");
    }
}

#[test]
fn halving_the_step_barely_moves_the_width() {
    let t0 = 1e-6;
    let beta2 = 1e-11;
    let spec = PulseSpec::sech(t0, 1e3).unwrap();
    let gamma_nl = beta2 / (t0 * t0 * spec.peak_intensity);
    let medium = UniformMedium(lossless(beta2, gamma_nl));
    let pulse = PulseField::from_spec(&spec, TimeGrid::for_width(t0)).unwrap();
    let span = 3.0 * t0 * t0 / beta2;
    let run = |scale: f64| -> f64 {
        let opts = PropagationOptions {
            steps_per_scale: scale,
            ..Default::default()
        };
        let report = propagate(&pulse, &medium, span, &opts).unwrap();
        report.final_metrics().unwrap().rms
    };
    let coarse = run(200.0);
    let fine = run(400.0);
    assert!((coarse / fine - 1.0).abs() < 1e-4, "{coarse:e} vs {fine:e}");
}

#[test]
fn group_delay_is_the_transit_integral() {
    let tp = sodium();
    let cf = ControlField::resonant(5.0 * tp.gamma()).unwrap();
    let field = build_density(&CondensateSpec::sodium_slow_light()).unwrap();
    let half = field.axial_half_extent();
    let medium = |z: f64| -> Result<MediumCoefficients> { coefficients_exact(field.total(0.0, z), &cf, &tp) };
    let spec = PulseSpec::gaussian(1e-6, 1.0).unwrap();
    let mut pulse = PulseField::from_spec(&spec, TimeGrid::for_width(1e-6)).unwrap();
    pulse.z = -half;
    let opts = PropagationOptions {
        dz: Some(2.0 * half / 4000.0),
        nonlinear: false,
        ..Default::default()
    };
    let report = propagate(&pulse, &medium, 2.0 * half, &opts).unwrap();
    // composite Simpson on a much finer grid
    let n = 40_000;
    let h = 2.0 * half / n as f64;
    let integral: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * medium(-half + i as f64 * h).unwrap().inv_vg.re
        })
        .sum::<f64>()
        * h
        / 3.0;
    let delay = report.group_delay();
    // the step midpoints converge slowly across the kink at the Thomas-Fermi edge
    assert!((delay / integral - 1.0).abs() < 1e-5, "{delay:e} vs {integral:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn critical_rabi_and_max_capacity_depend_on_column_only(
        log_rho in 18.0f64..21.0,
        length in 2e-5f64..1e-3,
        factor in 0.1f64..10.0,
        tau0 in 1e-9f64..1e-7,
    ) {
        let tp = sodium();
        let rho = 10f64.powf(log_rho);
        let a = critical_rabi(tau0, rho, length, &tp);
        let b = critical_rabi(tau0, rho * factor, length / factor, &tp);
        prop_assert!((a / b - 1.0).abs() < 1e-12);
        let ca = max_capacity(rho, length, &tp);
        let cb = max_capacity(rho * factor, length / factor, &tp);
        prop_assert!((ca / cb - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_capacity_is_unimodal_in_rabi(
        log_rho in 18.0f64..21.0,
        length in 2e-5f64..1e-3,
        tau0 in 1e-9f64..1e-7,
        points in 20usize..200,
    ) {
        let tp = sodium();
        let rho = 10f64.powf(log_rho);
        let w0 = critical_rabi(tau0, rho, length, &tp);
        let caps: Vec<f64> = log_grid(w0 / 100.0, w0 * 100.0, points)
            .iter()
            .map(|&w| capacity_analytic(w, tau0, rho, length, &tp).unwrap().capacity)
            .collect();
        let signs: Vec<bool> = caps.windows(2).map(|w| w[1] > w[0]).collect();
        let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
        prop_assert_eq!(changes, 1);
    }
}
