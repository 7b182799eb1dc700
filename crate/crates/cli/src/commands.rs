use rayon::prelude::*;

use bec_slowlight::capacity::{
    analytic_inputs, capacity_analytic, capacity_numeric_in, cloud_run, critical_rabi, max_capacity,
    run_through, storage_time, sweep, CapacityMethod, CapacityResult, CapacitySetup, NumericOptions,
};
use bec_slowlight::condensate::{build_density_with, DensityField};
use bec_slowlight::constants::SPEED_OF_LIGHT;
use bec_slowlight::eit::{
    coefficients_exact, coefficients_reduced, compensation_peak_power, transparency_window, validity_check,
    ControlField, MediumCoefficients, TransitionParams,
};
use bec_slowlight::modes::{solve_with_group_velocity, temperature_mode_scan, EitProfileFamily, ProfileFamily};
use bec_slowlight::pulse::{scale_lengths, PropagationOptions, PulseSpec};
use bec_slowlight::{Result as ModelResult, Warning};

use crate::config::{CoefficientModel, DispersionMode, LoadedConfig, MethodConfig, PathConfig, Resolved};
use crate::error::CliError;
use crate::output::{num, Metadata, OutputDir, Table};

/// Output of one command: files written plus human-readable log lines.
pub struct Outcome {
    pub log: Vec<String>,
}

pub struct Context<'a> {
    pub loaded: &'a LoadedConfig,
    pub run: Resolved,
    pub out: &'a mut OutputDir,
}

const LENGTH_DEFINITION: &str = "L = 2 sqrt(<z^2>) of the total (condensed + thermal) density";
const WINDOW_DEFINITION: &str =
    "full detuning width where on-axis column transmission stays above 1/e of its resonant value";
const DETUNING_CONVENTION: &str = "detuning = omega0 - omega_probe";

impl Context<'_> {
    fn metadata(&self, command: &str) -> Metadata {
        let m = &self.loaded.config.medium;
        Metadata::new(command, &self.loaded.text)
            .with("length_definition", LENGTH_DEFINITION)
            .with("density_average", m.density_average.name())
            .with("window_definition", WINDOW_DEFINITION)
            .with("detuning_convention", DETUNING_CONVENTION)
            .with("coefficients", m.coefficients.name())
            .with("dispersion_mode", m.dispersion.name())
    }

    fn field(&self) -> ModelResult<DensityField> {
        build_density_with(&self.run.condensate, self.run.grid)
    }

    fn coefficients(&self, rho: f64, cf: &ControlField) -> ModelResult<MediumCoefficients> {
        let m = &self.loaded.config.medium;
        let c = match m.coefficients {
            CoefficientModel::Exact => coefficients_exact(rho, cf, &self.run.transition)?,
            CoefficientModel::Reduced => coefficients_reduced(rho, cf.omega_c, &self.run.transition)?,
        };
        Ok(match m.dispersion {
            DispersionMode::Literal => c,
            DispersionMode::FocusingReal => c.with_focusing_real_dispersion(),
        })
    }

    fn density_override(&self) -> Option<f64> {
        let refs = &self.run.refs;
        self.loaded.config.medium.density_override.as_ref().map(|q| q.si(refs))
    }

    fn numeric_options(&self, nonlinear: bool) -> NumericOptions {
        let p = &self.loaded.config.propagation;
        NumericOptions {
            propagation: PropagationOptions {
                dz: p.step.as_ref().map(|q| q.si(&self.run.refs)),
                steps_per_scale: p.steps_per_scale,
                record_every: p.record_every.max(1),
                nonlinear,
                ..Default::default()
            },
            min_steps: p.min_steps,
            samples_per_t0: p.samples_per_width,
            window_margin: p.window_margin,
        }
    }
}

fn warnings_text(w: &[Warning]) -> String {
    w.iter()
        .map(|w| format!("{w:?}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn coefficients(ctx: &mut Context) -> Result<Outcome, CliError> {
    let field = ctx.field()?;
    let cf = ctx.run.control;
    let tp = ctx.run.transition;
    let override_rho = ctx.density_override();
    let mut table = Table::new(vec![
        "z", "rho", "alpha", "vg", "b2_re", "b2_im", "b3_magnitude", "eta", "gamma_nl",
    ]);
    table.note(
        "units",
        "z [m], rho [m^-3], alpha [1/m], vg [m/s], b2 [s^2/m], b3 [s^3/m], eta [m/V^2], gamma_nl [m/W]",
    );
    if let Some(rho) = override_rho {
        table.note("density_override", format!("{} m^-3", num(rho)));
    }
    let mut peak_beta2 = 0.0f64;
    let mut peak_gamma = 0.0f64;
    for &z in field.z() {
        let rho = override_rho.unwrap_or_else(|| field.total(0.0, z));
        let c = ctx.coefficients(rho, &cf)?;
        peak_beta2 = peak_beta2.max(c.beta2().norm());
        peak_gamma = peak_gamma.max(c.gamma_nl());
        table.push(vec![
            num(z),
            num(rho),
            num(c.alpha.re),
            num(c.group_velocity()),
            num(c.b2.re),
            num(c.b2.im),
            num(c.b3.norm()),
            num(c.eta),
            num(c.gamma_nl()),
        ]);
    }
    let meta = ctx.metadata("coefficients");
    ctx.out.write("coefficients.csv", &meta, &table)?;

    let peak_rho = override_rho.unwrap_or_else(|| field.peak_density());
    let mut summary = Table::new(vec!["quantity", "value", "unit"]);
    let mut row = |q: &str, v: f64, u: &str| summary.push(vec![q.into(), num(v), u.into()]);
    row("peak_density", peak_rho, "m^-3");
    row("peak_beta2_magnitude", peak_beta2, "s^2/m");
    row("peak_gamma_nl", peak_gamma, "m/W");
    let mut log = vec![
        format!("peak |beta2| = {peak_beta2:e} s^2/m"),
        format!("peak gamma_nl = {peak_gamma:e} m/W"),
    ];
    let column = match override_rho {
        Some(rho) => rho * 2.0 * field.axial_half_extent(),
        None => field.axial_column_density(),
    };
    if peak_rho > 0.0 {
        row("axial_column_density", column, "m^-2");
        match transparency_window(peak_rho, cf.omega_c, &tp, column / peak_rho) {
            Ok(w) => {
                let width = w.width().unwrap_or(f64::INFINITY);
                row("transparency_window", width, "rad/s");
                log.push(format!("transparency window = {width:e} rad/s"));
            }
            Err(e) => log.push(format!("transparency window: {e}")),
        }
        match compensation_peak_power(&tp, ctx.run.pulse.t0, peak_rho, cf.omega_c) {
            Ok(p) => {
                row("compensation_peak_intensity", p.peak_intensity, "W/m^2");
                row("compensation_closed_form", p.closed_form, "W/m^2");
                log.push(format!(
                    "N = 1 peak intensity at T0 = {:e} s: {:e} W/m^2",
                    ctx.run.pulse.t0, p.peak_intensity
                ));
            }
            Err(e) => log.push(format!("compensation peak intensity: {e}")),
        }
        let v = validity_check(peak_rho, cf.omega_c, &tp);
        row("validity_lower_margin", v.lower_margin, "");
        row("validity_upper_margin", v.upper_margin, "");
    }
    ctx.out.write("coefficients_summary.csv", &meta, &summary)?;
    Ok(Outcome { log })
}

pub fn propagate(ctx: &mut Context, linear: bool, compensate: bool) -> Result<Outcome, CliError> {
    let cf = ctx.run.control;
    let tp = ctx.run.transition;
    let override_rho = ctx.density_override();
    let field = ctx.field()?;
    let (z0, span, reference_rho) = match &ctx.loaded.config.propagation.path {
        PathConfig::Cloud => {
            let half = field.axial_half_extent();
            (-half, 2.0 * half, override_rho.unwrap_or_else(|| field.peak_density()))
        }
        PathConfig::Uniform { density, length } => (0.0, length.si(&ctx.run.refs), density.si(&ctx.run.refs)),
    };
    let uniform_rho = match &ctx.loaded.config.propagation.path {
        PathConfig::Cloud => None,
        PathConfig::Uniform { .. } => Some(reference_rho),
    };
    let mut pulse = ctx.run.pulse;
    let mut log = Vec::new();
    if compensate {
        let p = compensation_peak_power(&tp, pulse.t0, reference_rho, cf.omega_c)?;
        pulse = PulseSpec::new(pulse.shape, pulse.t0, p.peak_intensity)?;
        log.push(format!("compensating peak intensity {:e} W/m^2", p.peak_intensity));
    }
    let density = |z: f64| -> f64 {
        match (uniform_rho, override_rho) {
            (Some(rho), _) => rho,
            (None, Some(rho)) => rho,
            (None, None) => field.total(0.0, z),
        }
    };
    let sampler = |z: f64| ctx.coefficients(density(z), &cf);
    let opts = ctx.numeric_options(!linear);
    let run = run_through(&pulse, &sampler, z0, span, &opts)?;
    let reference = ctx.coefficients(reference_rho, &cf)?;
    let scales = scale_lengths(&reference, &pulse);

    let mut meta = ctx.metadata("propagate");
    meta.set("nonlinear", if linear { "off" } else { "on" });
    meta.set("compensate", if compensate { "on" } else { "off" });
    let mut table = Table::new(vec!["z", "rms", "fwhm", "peak", "energy", "loss", "delay"]);
    table.note(
        "units",
        "z [m], rms and fwhm [s], peak [W/m^2], energy [J/m^2], loss [intensity nepers], delay [s]",
    );
    table.note("peak_intensity_in", num(pulse.peak_intensity));
    table.note("step", num(run.report.dz));
    table.note("steps", run.report.steps.to_string());
    table.note("dispersion_length_at_reference", num(scales.dispersion.value()));
    table.note("nonlinear_length_at_reference", num(scales.nonlinear.value()));
    table.note("soliton_order_at_reference", num(scales.soliton_order));
    for r in &run.report.records {
        table.push(vec![
            num(r.z),
            num(r.rms),
            num(r.fwhm),
            num(r.peak),
            num(r.energy),
            num(r.loss),
            num(r.delay),
        ]);
    }
    ctx.out.write("propagation.csv", &meta, &table)?;

    let f = &run.report.final_field;
    let mut env = Table::new(vec!["t", "re", "im", "intensity"]);
    env.note("units", "t [s] in the frame moving at the reference group velocity, envelope [sqrt(W/m^2)]");
    env.note("z", num(f.z));
    for (t, a) in f.times().iter().zip(&f.envelope) {
        env.push(vec![num(*t), num(a.re), num(a.im), num(a.norm_sqr())]);
    }
    ctx.out.write("envelope.csv", &meta, &env)?;
    log.push(format!(
        "exit width {:e} s, group delay {:e} s, loss {:e} Np",
        run.exit_width(),
        run.report.group_delay(),
        run.report.loss()
    ));
    Ok(Outcome { log })
}

fn result_row(value: f64, r: &Result<CapacityResult, String>) -> Vec<String> {
    match r {
        Ok(r) => vec![
            num(value),
            num(r.capacity),
            num(r.omega_c),
            num(r.tau_used),
            num(r.vg_used),
            num(r.length),
            num(r.density),
            warnings_text(&r.warnings),
            String::new(),
        ],
        Err(e) => {
            let mut row = vec![num(value)];
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.push(e.clone());
            row
        }
    }
}

const RESULT_HEADER: [&str; 9] = [
    "value", "capacity", "omega_c", "tau_used", "vg_used", "length", "density", "warnings", "error",
];

pub fn capacity(ctx: &mut Context) -> Result<Outcome, CliError> {
    let tp = ctx.run.transition;
    let pulse = ctx.run.pulse;
    let field = ctx.field()?;
    let cfg = &ctx.loaded.config;
    let choice = cfg.medium.density_average.choice();
    let (rho, length) = analytic_inputs(&field, choice)?;
    let omega_c0 = critical_rabi(pulse.t0, rho, length, &tp);
    let at_critical = capacity_analytic(omega_c0, pulse.t0, rho, length, &tp)?;
    let at_control = capacity_analytic(ctx.run.control.omega_c, pulse.t0, rho, length, &tp)?;
    let meta = ctx.metadata("capacity");
    let mut log = Vec::new();

    let mut summary = Table::new(vec!["quantity", "value", "unit"]);
    let mut row = |q: &str, v: f64, u: &str| summary.push(vec![q.into(), num(v), u.into()]);
    row("density", rho, "m^-3");
    row("length", length, "m");
    row("pulse_width", pulse.t0, "s");
    row("critical_rabi", omega_c0, "rad/s");
    row("storage_time", storage_time(pulse.t0, rho, length, &tp), "s");
    row("max_capacity", max_capacity(rho, length, &tp), "");
    row("capacity_at_critical_rabi", at_critical.capacity, "");
    row("capacity_at_control_rabi", at_control.capacity, "");
    log.push(format!(
        "analytic: Omega_c0 = {omega_c0:e} rad/s, C = {:.4}",
        at_critical.capacity
    ));
    if cfg.capacity.numeric {
        let control = ControlField::new(omega_c0, ctx.run.control.detuning)?;
        let numeric = capacity_numeric_in(&field, &control, &tp, &pulse, &ctx.numeric_options(false))?;
        row("numeric_capacity_at_critical_rabi", numeric.capacity, "");
        row("numeric_group_velocity", numeric.vg_used, "m/s");
        row("numeric_max_width", numeric.tau_used, "s");
        log.push(format!("numeric: C = {:.4}", numeric.capacity));
    }
    ctx.out.write("capacity.csv", &meta, &summary)?;

    for (i, s) in ctx.loaded.config.capacity.sweeps.iter().enumerate() {
        let values = ctx.loaded.sweep_values(i, &ctx.run.refs)?;
        let setup = CapacitySetup {
            condensate: ctx.run.condensate,
            transition: tp,
            pulse,
            detuning: ctx.run.control.detuning,
            rabi: ctx.loaded.sweep_rabi(i, &ctx.run.refs)?,
            density_choice: choice,
            method: match s.method {
                MethodConfig::Analytic => CapacityMethod::Analytic,
                MethodConfig::Numeric => CapacityMethod::Numeric,
            },
            numeric: ctx.numeric_options(false),
        };
        let result = sweep(&setup, s.variable.variable(), &values);
        let mut table = Table::new(RESULT_HEADER.to_vec());
        table.note("variable", format!("{} [{}]", s.variable.name(), s.variable.si_unit()));
        table.note("method", format!("{:?}", setup.method).to_lowercase());
        if let Some(best) = result.argmax() {
            table.note("argmax_value", num(result.points[best].value));
            table.note("interior_maximum", result.has_interior_maximum().to_string());
        }
        for p in &result.points {
            table.push(result_row(p.value, &p.result));
        }
        let name = format!("sweep{}_{}.csv", i + 1, s.variable.name());
        ctx.out.write(&name, &meta, &table)?;
        let failed = result.points.iter().filter(|p| p.result.is_err()).count();
        log.push(format!("{name}: {} points, {failed} failed", result.points.len()));
    }

    if let Some(scan) = &ctx.loaded.config.capacity.width_scan {
        let refs = ctx.run.refs;
        let lo = scan.from.si(&refs);
        let hi = scan.to.si(&refs);
        let temps = bec_slowlight::capacity::linear_grid(lo, hi, scan.points);
        let control = ControlField::new(scan.rabi.si(&refs), ctx.run.control.detuning)?;
        let cases: Vec<(f64, f64)> = scan
            .scattering_lengths
            .iter()
            .flat_map(|a| temps.iter().map(move |&t| (a.si(&refs), t)))
            .collect();
        let opts = ctx.numeric_options(false);
        let base = ctx.run.condensate;
        let grid = ctx.run.grid;
        let rows: Vec<Vec<String>> = cases
            .par_iter()
            .map(|&(a_s, t)| {
                let spec = base.with_scattering_length(a_s).with_temperature(t);
                let run = build_density_with(&spec, grid).and_then(|f| cloud_run(&f, &control, &tp, &pulse, &opts));
                let head = vec![num(a_s), num(t), num(t / refs.critical_temperature)];
                let tail = match run {
                    Ok(run) => vec![
                        num(run.exit_width()),
                        num(run.max_width()),
                        num(run.report.group_delay()),
                        String::new(),
                    ],
                    Err(e) => vec![String::new(), String::new(), String::new(), e.to_string()],
                };
                head.into_iter().chain(tail).collect()
            })
            .collect();
        let mut table = Table::new(vec![
            "scattering_length", "temperature", "t_over_tc", "exit_width", "max_width", "delay", "error",
        ]);
        table.note("units", "scattering_length [m], temperature [K], widths [s] as rms x sqrt(2), delay [s]");
        table.note("rabi", num(control.omega_c));
        table.rows = rows;
        ctx.out.write("width_vs_temperature.csv", &meta, &table)?;
    }
    Ok(Outcome { log })
}

pub fn modes(ctx: &mut Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.loaded.config.modes;
    let refs = ctx.run.refs;
    let tp: TransitionParams = ctx.run.transition;
    let control = match &cfg.control {
        Some(c) => ctx.loaded.control(c, &refs, &["modes", "control"])?,
        None => ctx.run.control,
    };
    let core = cfg.core();
    if cfg.shells < 16 {
        return Err(ctx.loaded.error(&["modes", "shells"], "need at least 16"));
    }
    let family = EitProfileFamily::for_cloud(&ctx.run.condensate, control, tp, core)?.with_shape(cfg.profile_shape());
    let step = cfg
        .frequency_step
        .as_ref()
        .map_or(1e-4 * control.omega_c, |q| q.si(&refs));
    let profile = family.profile(0.0)?;
    let k0 = family.k0(0.0);
    let set = solve_with_group_velocity(&family, cfg.shells, step)?;

    let mut meta = ctx.metadata("modes");
    meta.set("core_density", format!("{:?}", core.density).to_lowercase());
    meta.set("radius_rule", format!("{:?}", core.radius));
    meta.set("profile_shape", format!("{:?}", profile.shape).to_lowercase());
    let mut table = Table::new(vec![
        "l", "m", "label", "beta", "effective_index", "vg", "vg_over_c", "loss_estimate",
    ]);
    table.note("units", "beta [rad/m], vg [m/s], loss_estimate [1/m]");
    table.note("n1", num(profile.n1));
    table.note("core_radius", num(profile.radius));
    table.note("v_number", num(profile.v_number(k0)));
    table.note("wkb_spatial_modes", set.wkb.spatial.to_string());
    table.note("wkb_modes_with_polarisation", set.wkb.total.to_string());
    if set.modes.is_empty() {
        table.note(
            "no_guided_modes",
            format!("index contrast n1 - 1 = {:e} guides no LP mode", profile.n1 - 1.0),
        );
    }
    for m in &set.modes {
        let vg = m.vg_mode.unwrap_or(f64::NAN);
        table.push(vec![
            m.l.to_string(),
            m.m.to_string(),
            m.label(),
            num(m.beta),
            num(m.effective_index()),
            num(vg),
            num(vg / SPEED_OF_LIGHT),
            num(m.loss_estimate),
        ]);
    }
    ctx.out.write("modes.csv", &meta, &table)?;
    let mut log = vec![format!(
        "{} LP modes, V = {:.4}, n1 - 1 = {:e}",
        set.modes.len(),
        profile.v_number(k0),
        profile.n1 - 1.0
    )];

    let n = cfg.profile_points.max(2);
    for label in &cfg.profiles {
        let Some(mode) = set.modes.iter().find(|m| &m.label() == label) else {
            log.push(format!("profile {label}: mode not guided, skipped"));
            continue;
        };
        let mut t = Table::new(vec!["r", "psi"]);
        t.note("units", "r [m], psi [1/m] normalised to integral psi^2 2 pi r dr = 1");
        t.note("mode", label.clone());
        for i in 0..n {
            let r = cfg.profile_extent * profile.radius * i as f64 / (n - 1) as f64;
            t.push(vec![num(r), num(mode.value_at(r)?)]);
        }
        ctx.out.write(&format!("mode_{label}.csv"), &meta, &t)?;
    }

    if let Some(scan) = &cfg.temperature_scan {
        let temps = bec_slowlight::capacity::linear_grid(scan.from.si(&refs), scan.to.si(&refs), scan.points);
        let rows = temperature_mode_scan(&ctx.run.condensate, &control, &tp, &temps, core);
        let mut t = Table::new(vec![
            "temperature", "t_over_tc", "n1", "core_radius", "v_number", "spatial_modes", "modes", "error",
        ]);
        t.note("units", "temperature [K], core_radius [m]");
        for r in rows {
            let (spatial, total, err) = match &r.count {
                Ok(c) => (c.spatial.to_string(), c.total.to_string(), String::new()),
                Err(e) => (String::new(), String::new(), e.clone()),
            };
            t.push(vec![
                num(r.temperature),
                num(r.temperature / refs.critical_temperature),
                num(r.n1),
                num(r.radius),
                num(r.v_number),
                spatial,
                total,
                err,
            ]);
        }
        ctx.out.write("modes_vs_temperature.csv", &meta, &t)?;
    }
    Ok(Outcome { log })
}

pub fn density(ctx: &mut Context) -> Result<Outcome, CliError> {
    let field = ctx.field()?;
    let meta = ctx.metadata("density");
    let mut t = Table::new(vec!["r", "z", "rho_c", "rho_th"]);
    t.note("units", "r, z [m], densities [m^-3]");
    t.note("condensed_number", num(field.condensed_number));
    t.note("critical_temperature", num(field.critical_temperature));
    let nz = field.z().len();
    for (ir, &r) in field.r().iter().enumerate() {
        for (iz, &z) in field.z().iter().enumerate() {
            let k = ir * nz + iz;
            t.push(vec![
                num(r),
                num(z),
                num(field.condensed_samples()[k]),
                num(field.thermal_samples()[k]),
            ]);
        }
    }
    ctx.out.write("density.csv", &meta, &t)?;
    Ok(Outcome {
        log: vec![format!(
            "condensed fraction {:.4}, peak density {:e} m^-3",
            field.condensed_fraction(),
            field.peak_density()
        )],
    })
}
