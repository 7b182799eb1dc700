//! Weakly guided LP modes of a cylindrical index profile.
//!
//! The radial field obeys
//! ψ'' + ψ'/r + (k₀²n²(r) - β² - l²/r²)ψ = 0
//! with n = 1 outside the core radius R. Mode counts come from WKB
//! quantisation; eigenmodes from a shell transfer solver that replaces the
//! profile by equal-width annuli of constant index.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::condensate::{
    build_density, index_profile_from_axis, CondensateSpec, IndexProfile, ProfileShape, CoreModel,
};
use crate::constants::SPEED_OF_LIGHT;
use crate::eit::{ControlField, TransitionParams};
use crate::special::{bessel_i_scaled, bessel_j, bessel_k_scaled, bessel_y};
use crate::{Error, Result};

/// Modes below this |κ²|r² use the power-law solutions r^{±l} (or 1, ln r).
const POWER_LAW_THRESHOLD: f64 = 1e-12;
const BISECTION_LIMIT: usize = 200;

/// WKB mode numbers of a profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WkbCount {
    /// Radial mode count for each l = 0, 1, … up to the last guided l.
    pub per_l: Vec<usize>,
    /// Σ_l (2 - δ_l0)·count_l: spatial modes with the ±l degeneracy.
    pub spatial: usize,
    /// Spatial count times the two polarisations of each LP mode.
    pub total: usize,
}

impl WkbCount {
    pub fn count_for(&self, l: usize) -> usize {
        self.per_l.get(l).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.spatial == 0
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Local radial wavenumber squared at β: k₀²n²(r) - β² - l²/r².
fn radial_q(profile: &IndexProfile, k0: f64, beta: f64, l: usize, r: f64) -> f64 {
    let centrifugal = if l == 0 { 0.0 } else { (l * l) as f64 / (r * r) };
    k0 * k0 * profile.index_sq(r) - beta * beta - centrifugal
}

/// Phase integral ∫√(k₀²n² - β² - l²/r²) dr over the classically allowed
/// interval inside the core.
pub fn wkb_phase(profile: &IndexProfile, k0: f64, beta: f64, l: usize) -> f64 {
    let radius = profile.radius;
    let q = |r: f64| radial_q(profile, k0, beta, l, r);
    let samples = 4000;
    let h = radius / samples as f64;
    // first and last allowed samples; the profiles handled are non-increasing,
    // so the allowed region is a single interval
    let allowed: Vec<usize> = (1..=samples).filter(|&i| q(i as f64 * h * (1.0 - 1e-12)) > 0.0).collect();
    let (Some(&first), Some(&last)) = (allowed.first(), allowed.last()) else {
        return 0.0;
    };
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..100 {
            let mid = 0.5 * (inside + outside);
            if q(mid) > 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    let r_in = if l == 0 || first == 1 && q(1e-300f64.max(h * 1e-9)) > 0.0 {
        0.0
    } else {
        bisect(first as f64 * h, (first - 1) as f64 * h)
    };
    let r_out = if last == samples {
        radius
    } else {
        bisect(last as f64 * h, (last + 1) as f64 * h)
    };
    if r_out <= r_in {
        return 0.0;
    }
    // r = r_in + (r_out - r_in)(1 - cos θ)/2 removes the square-root endpoints
    let half = 0.5 * (r_out - r_in);
    let integrand = |theta: f64| {
        let r = r_in + half * (1.0 - theta.cos());
        q(r).max(0.0).sqrt() * half * theta.sin()
    };
    let scale = k0 * profile.n1 * (r_out - r_in);
    adaptive_simpson(&integrand, 0.0, PI, 1e-10 * scale.max(1e-300))
}

/// Number of m ≥ 0 with (m + ½)π below the phase integral at β = k₀.
fn radial_count(phase: f64) -> usize {
    let x = phase / PI - 0.5;
    if x > 0.0 {
        x.ceil() as usize
    } else {
        0
    }
}

pub fn wkb_mode_count(profile: &IndexProfile, k0: f64) -> WkbCount {
    let mut per_l = Vec::new();
    if profile.n1 > 1.0 && profile.has_contrast() {
        for l in 0.. {
            let count = radial_count(wkb_phase(profile, k0, k0, l));
            if count == 0 {
                break;
            }
            per_l.push(count);
        }
    }
    let spatial = per_l.iter().enumerate().map(|(l, &c)| if l == 0 { c } else { 2 * c }).sum::<usize>();
    WkbCount {
        per_l,
        spatial,
        total: 2 * spatial,
    }
}

/// Equal-width annuli with the annulus-mean n² of the profile.
#[derive(Debug, Clone, PartialEq)]
struct Shells {
    edges: Vec<f64>,
    index_sq: Vec<f64>,
}

impl Shells {
    fn new(profile: &IndexProfile, count: usize) -> Self {
        let radius = profile.radius;
        let edges: Vec<f64> = (0..=count).map(|i| radius * i as f64 / count as f64).collect();
        // n² is linear in r² for the graded profile, so its area mean is n² at
        // the r² midpoint
        let index_sq = edges
            .windows(2)
            .map(|w| profile.index_sq(((w[0] * w[0] + w[1] * w[1]) / 2.0).sqrt()))
            .collect();
        Self { edges, index_sq }
    }

    fn radius(&self) -> f64 {
        *self.edges.last().expect("at least one shell")
    }

    fn max_index_sq(&self) -> f64 {
        self.index_sq.iter().copied().fold(1.0, f64::max)
    }
}

/// Solution pair of one shell with constant κ² = k₀²n² - β².
#[derive(Debug, Clone, Copy, PartialEq)]
enum Basis {
    /// J_l(κr), Y_l(κr)
    Oscillatory(f64),
    /// e^{w(r - r_ref)}·[e^{-wr}I_l(wr)], e^{-w(r - r_ref)}·[e^{wr}K_l(wr)]
    Evanescent(f64),
    /// r^l, r^{-l} (1, ln r for l = 0)
    PowerLaw,
}

impl Basis {
    fn new(kappa_sq: f64, r_outer: f64) -> Self {
        if kappa_sq.abs() * r_outer * r_outer < POWER_LAW_THRESHOLD {
            Self::PowerLaw
        } else if kappa_sq > 0.0 {
            Self::Oscillatory(kappa_sq.sqrt())
        } else {
            Self::Evanescent((-kappa_sq).sqrt())
        }
    }

    /// (f, f', g, g') at r; evanescent pairs are scaled relative to `r_ref`.
    fn eval(&self, l: usize, r: f64, r_ref: f64) -> Result<[f64; 4]> {
        Ok(match *self {
            Self::Oscillatory(k) => {
                let j = bessel_j(l, k * r)?;
                let y = bessel_y(l, k * r)?;
                [j.value, k * j.derivative, y.value, k * y.derivative]
            }
            Self::Evanescent(w) => {
                let i = bessel_i_scaled(l, w * r)?;
                let kk = bessel_k_scaled(l, w * r)?;
                let grow = (w * (r - r_ref)).exp();
                let decay = 1.0 / grow;
                [
                    grow * i.value,
                    grow * w * i.derivative,
                    decay * kk.value,
                    decay * w * kk.derivative,
                ]
            }
            Self::PowerLaw => {
                if l == 0 {
                    [1.0, 0.0, r.ln(), 1.0 / r]
                } else {
                    let lf = l as f64;
                    [r.powi(l as i32), lf * r.powi(l as i32 - 1), r.powi(-(l as i32)), -lf * r.powi(-(l as i32) - 1)]
                }
            }
        })
    }

    /// The solution regular at r = 0, without evaluating its singular partner.
    fn regular(&self, l: usize, r: f64) -> Result<(f64, f64)> {
        if r == 0.0 {
            return Ok((if l == 0 { 1.0 } else { 0.0 }, 0.0));
        }
        Ok(match *self {
            Self::Oscillatory(k) => {
                let j = bessel_j(l, k * r)?;
                (j.value, k * j.derivative)
            }
            Self::Evanescent(w) => {
                let i = bessel_i_scaled(l, w * r)?;
                let grow = (w * r).exp();
                (grow * i.value, grow * w * i.derivative)
            }
            Self::PowerLaw => {
                let lf = l as f64;
                (r.powi(l as i32), if l == 0 { 0.0 } else { lf * r.powi(l as i32 - 1) })
            }
        })
    }
}

/// ψ in one shell as a·f + b·g, times e^{log_scale}.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ShellSolution {
    r_inner: f64,
    r_outer: f64,
    basis: Basis,
    a: f64,
    b: f64,
    log_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct RadialSolution {
    l: usize,
    shells: Vec<ShellSolution>,
    /// Exterior decay constant √(β² - k₀²).
    w_ext: f64,
    psi_edge: f64,
    /// ψ(R) is psi_edge·e^{edge_log_scale}.
    edge_log_scale: f64,
    /// f(β) = ψ'(R)K_l(wR) - ψ(R)wK_l'(wR), up to a positive factor.
    mismatch: f64,
}

impl RadialSolution {
    fn shell_value(s: &ShellSolution, l: usize, r: f64) -> Result<f64> {
        if s.r_inner == 0.0 {
            return Ok(s.a * s.basis.regular(l, r)?.0);
        }
        let ref_r = s.r_inner;
        let v = s.basis.eval(l, r, ref_r)?;
        Ok(s.a * v[0] + s.b * v[2])
    }

    fn value(&self, r: f64, norm_log: f64) -> Result<f64> {
        let radius = self.shells.last().map_or(0.0, |s| s.r_outer);
        if r >= radius {
            let k_edge = bessel_k_scaled(self.l, self.w_ext * radius)?.value;
            let k_r = bessel_k_scaled(self.l, self.w_ext * r)?.value;
            return Ok(self.psi_edge * (self.edge_log_scale - norm_log).exp() * (-self.w_ext * (r - radius)).exp() * k_r / k_edge);
        }
        let i = self.shells.partition_point(|s| s.r_outer <= r).min(self.shells.len() - 1);
        let s = &self.shells[i];
        Ok(Self::shell_value(s, self.l, r)? * (s.log_scale - norm_log).exp())
    }
}

fn integrate_shells(shells: &Shells, k0: f64, beta_sq: f64, l: usize, keep: bool) -> Result<RadialSolution> {
    let mut out = Vec::with_capacity(if keep { shells.index_sq.len() } else { 0 });
    let mut psi = 0.0;
    let mut dpsi = 0.0;
    let mut log_scale = 0.0;
    for (j, w) in shells.edges.windows(2).enumerate() {
        let (r0, r1) = (w[0], w[1]);
        let basis = Basis::new(k0 * k0 * shells.index_sq[j] - beta_sq, r1);
        let (a, b) = if j == 0 {
            (1.0, 0.0)
        } else {
            let v = basis.eval(l, r0, r0)?;
            let det = v[0] * v[3] - v[1] * v[2];
            ((psi * v[3] - dpsi * v[2]) / det, (v[0] * dpsi - v[1] * psi) / det)
        };
        let (p1, d1) = if j == 0 {
            basis.regular(l, r1)?
        } else {
            let v = basis.eval(l, r1, r0)?;
            (a * v[0] + b * v[2], a * v[1] + b * v[3])
        };
        if keep {
            out.push(ShellSolution {
                r_inner: r0,
                r_outer: r1,
                basis,
                a,
                b,
                log_scale,
            });
        }
        let scale = p1.abs() + d1.abs() * (r1 - r0);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::SpecialFunction(format!("shell {j}: degenerate solution at l = {l}")));
        }
        psi = p1 / scale;
        dpsi = d1 / scale;
        log_scale += scale.ln();
    }
    let radius = shells.radius();
    let w_ext = (beta_sq - k0 * k0).max(0.0).sqrt();
    let mismatch = if w_ext > 0.0 {
        let k = bessel_k_scaled(l, w_ext * radius)?;
        dpsi * k.value - psi * w_ext * k.derivative
    } else {
        // at cutoff the exterior solution is r^{-l} (constant for l = 0)
        dpsi * radius + l as f64 * psi
    };
    Ok(RadialSolution {
        l,
        shells: out,
        w_ext,
        psi_edge: psi,
        edge_log_scale: log_scale,
        mismatch,
    })
}

/// One guided LP mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSolution {
    pub l: usize,
    pub m: usize,
    /// Propagation constant [rad/m].
    pub beta: f64,
    pub k0: f64,
    /// Radial sample points [m] and ψ there, with ∫ψ²·2πr dr = 1 and max ψ > 0.
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    /// Group velocity [m/s], when computed.
    pub vg_mode: Option<f64>,
    /// k₀∫Im n·ψ²·2πr dr [1/m].
    pub loss_estimate: f64,
    #[serde(skip)]
    radial: RadialSolution,
    #[serde(skip)]
    norm_log: f64,
    #[serde(skip)]
    sign: f64,
}

impl ModeSolution {
    /// Normalised ψ(r).
    pub fn value_at(&self, r: f64) -> Result<f64> {
        Ok(self.sign * self.radial.value(r, self.norm_log)?)
    }

    /// Effective index β/k₀.
    pub fn effective_index(&self) -> f64 {
        self.beta / self.k0
    }

    pub fn label(&self) -> String {
        format!("LP{}{}", self.l, self.m)
    }
}

const SAMPLES_PER_SHELL: usize = 16;
const EXTERIOR_SAMPLES: usize = 1024;

/// Core samples shared by all modes of a shell set.
fn core_grid(shells: &Shells) -> Vec<f64> {
    let mut r = Vec::with_capacity(shells.index_sq.len() * SAMPLES_PER_SHELL + 1);
    for w in shells.edges.windows(2) {
        for k in 0..SAMPLES_PER_SHELL {
            r.push(w[0] + (w[1] - w[0]) * k as f64 / SAMPLES_PER_SHELL as f64);
        }
    }
    r.push(shells.radius());
    r
}

fn trapezoid(r: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (1..r.len()).map(|i| 0.5 * (f(i) + f(i - 1)) * (r[i] - r[i - 1])).sum()
}

fn build_mode(
    profile: &IndexProfile,
    shells: &Shells,
    k0: f64,
    beta_sq: f64,
    l: usize,
) -> Result<ModeSolution> {
    let radial = integrate_shells(shells, k0, beta_sq, l, true)?;
    let radius = shells.radius();
    let mut r = core_grid(shells);
    let tail = (30.0 / radial.w_ext.max(1e-300)).min(100.0 * radius);
    for k in 1..=EXTERIOR_SAMPLES {
        r.push(radius + tail * k as f64 / EXTERIOR_SAMPLES as f64);
    }
    let raw: Vec<f64> = r.iter().map(|&ri| radial.value(ri, 0.0)).collect::<Result<_>>()?;
    let norm_sq = trapezoid(&r, |i| raw[i] * raw[i] * 2.0 * PI * r[i]);
    let norm = norm_sq.sqrt();
    let peak = raw.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
    let sign = if peak < 0.0 { -1.0 } else { 1.0 };
    let psi: Vec<f64> = raw.iter().map(|v| sign * v / norm).collect();
    let loss_estimate = k0 * trapezoid(&r, |i| profile.index_imag(r[i]) * psi[i] * psi[i] * 2.0 * PI * r[i]);
    let core_len = shells.index_sq.len() * SAMPLES_PER_SHELL + 1;
    let m = interior_zeros(&psi[..core_len]);
    Ok(ModeSolution {
        l,
        m,
        beta: beta_sq.sqrt(),
        k0,
        r,
        psi,
        vg_mode: None,
        loss_estimate,
        radial,
        norm_log: norm.ln(),
        sign,
    })
}

fn interior_zeros(psi: &[f64]) -> usize {
    let mut zeros = 0;
    let mut last_sign = 0.0;
    // skip r = 0, where ψ vanishes for l > 0
    for &v in &psi[1..] {
        let s = v.signum();
        if v != 0.0 {
            if last_sign != 0.0 && s != last_sign {
                zeros += 1;
            }
            last_sign = s;
        }
    }
    zeros
}

fn bracket_grid(k0: f64, top_sq: f64, points: usize) -> Vec<f64> {
    let bottom = k0 * k0;
    let span = top_sq - bottom;
    let mut grid: Vec<f64> = (1..points).map(|i| bottom + span * i as f64 / points as f64).collect();
    // modes near cutoff crowd the bottom of the range
    for j in 1..=12 {
        grid.push(bottom + span * 10f64.powi(-j) / points as f64);
    }
    grid.push(top_sq - span * 1e-12);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn bisect_root(shells: &Shells, k0: f64, l: usize, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64> {
    let mut sign_lo = f_lo.signum();
    for _ in 0..BISECTION_LIMIT {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * hi || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = integrate_shells(shells, k0, mid, l, false)?.mismatch;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == sign_lo {
            lo = mid;
            sign_lo = f_mid.signum();
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        iterations: BISECTION_LIMIT,
    })
}

/// Eigenvalues β² of one l-channel, ascending.
fn channel_roots(shells: &Shells, k0: f64, l: usize, points: usize) -> Result<Vec<f64>> {
    let top = k0 * k0 * shells.max_index_sq();
    if top <= k0 * k0 {
        return Ok(Vec::new());
    }
    let grid = bracket_grid(k0, top, points);
    let values: Vec<f64> = grid
        .iter()
        .map(|&b| integrate_shells(shells, k0, b, l, false).map(|s| s.mismatch))
        .collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for i in 1..grid.len() {
        if values[i - 1] == 0.0 {
            roots.push(grid[i - 1]);
        } else if values[i - 1].signum() != values[i].signum() && values[i] != 0.0 {
            roots.push(bisect_root(shells, k0, l, grid[i - 1], grid[i], values[i - 1])?);
        }
    }
    Ok(roots)
}

fn solve_channel(
    profile: &IndexProfile,
    shells: &Shells,
    k0: f64,
    l: usize,
    expected: usize,
) -> Result<Vec<ModeSolution>> {
    let points = (4 * expected).max(16);
    let mut roots = channel_roots(shells, k0, l, points)?;
    if roots.len() + 1 < expected {
        roots = channel_roots(shells, k0, l, 4 * points)?;
        if roots.len() + 1 < expected {
            return Err(Error::RootLoss {
                l,
                found: roots.len(),
                expected,
            });
        }
    }
    let mut modes: Vec<ModeSolution> = roots
        .iter()
        .rev()
        .map(|&b2| build_mode(profile, shells, k0, b2, l))
        .collect::<Result<_>>()?;
    modes.sort_by(|a, b| b.beta.total_cmp(&a.beta));
    Ok(modes)
}

/// All guided modes of a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSet {
    pub modes: Vec<ModeSolution>,
    pub wkb: WkbCount,
    pub shells: usize,
}

impl ModeSet {
    pub fn count_for(&self, l: usize) -> usize {
        self.modes.iter().filter(|m| m.l == l).count()
    }

    pub fn find(&self, l: usize, m: usize) -> Option<&ModeSolution> {
        self.modes.iter().find(|s| s.l == l && s.m == m)
    }

    /// Highest l with a solved mode.
    pub fn max_l(&self) -> Option<usize> {
        self.modes.iter().map(|m| m.l).max()
    }
}

pub const DEFAULT_SHELLS: usize = 128;

/// Solves every l-channel up to `l_max` (default: one past the last WKB-guided l).
pub fn solve_modes(profile: &IndexProfile, k0: f64, l_max: Option<usize>, shells: usize) -> Result<ModeSet> {
    if shells < 16 {
        return Err(Error::invalid("shells", format!("need at least 16, got {shells}")));
    }
    if !(k0.is_finite() && k0 > 0.0) {
        return Err(Error::invalid("k0", "must be > 0"));
    }
    let wkb = wkb_mode_count(profile, k0);
    if profile.n1 <= 1.0 || !profile.has_contrast() {
        return Ok(ModeSet {
            modes: Vec::new(),
            wkb,
            shells,
        });
    }
    let shell_set = Shells::new(profile, shells);
    let l_top = l_max.unwrap_or(wkb.per_l.len());
    let channels: Vec<Vec<ModeSolution>> = (0..=l_top)
        .into_par_iter()
        .map(|l| solve_channel(profile, &shell_set, k0, l, wkb.count_for(l)))
        .collect::<Result<_>>()?;
    let mut modes: Vec<ModeSolution> = channels.into_iter().flatten().collect();
    modes.sort_by(|a, b| a.l.cmp(&b.l).then(a.m.cmp(&b.m)));
    Ok(ModeSet {
        modes,
        wkb,
        shells,
    })
}

/// ∫ψ_aψ_b·2πr dr on the core grid plus a shared exterior quadrature.
pub fn overlap(a: &ModeSolution, b: &ModeSolution) -> Result<f64> {
    let radius = a.radial.shells.last().map_or(0.0, |s| s.r_outer);
    let n_core = a.radial.shells.len() * 64;
    let mut r: Vec<f64> = (0..=n_core).map(|i| radius * i as f64 / n_core as f64).collect();
    let w = a.radial.w_ext.min(b.radial.w_ext).max(1e-300);
    let tail = (40.0 / w).min(100.0 * radius);
    r.extend((1..=4 * EXTERIOR_SAMPLES).map(|k| radius + tail * k as f64 / (4 * EXTERIOR_SAMPLES) as f64));
    let va: Vec<f64> = r.iter().map(|&x| a.value_at(x)).collect::<Result<_>>()?;
    let vb: Vec<f64> = r.iter().map(|&x| b.value_at(x)).collect::<Result<_>>()?;
    Ok(trapezoid(&r, |i| va[i] * vb[i] * 2.0 * PI * r[i]))
}

/// Index profiles of a fixed cloud at probe frequency offsets.
pub trait ProfileFamily: Sync {
    /// Profile at carrier offset `delta` [rad/s] from the nominal probe frequency.
    fn profile(&self, delta: f64) -> Result<IndexProfile>;
    /// Vacuum wavenumber at the same offset.
    fn k0(&self, delta: f64) -> f64;
}

/// EIT-dressed profile of a core with fixed on-axis density and radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EitProfileFamily {
    pub rho_axis: f64,
    pub radius: f64,
    pub control: ControlField,
    pub transition: TransitionParams,
    pub shape: ProfileShape,
}

impl EitProfileFamily {
    pub fn for_cloud(
        spec: &CondensateSpec,
        control: ControlField,
        transition: TransitionParams,
        core: CoreModel,
    ) -> Result<Self> {
        let field = build_density(spec)?;
        let (radius, rho_axis) = field.core_parameters(core)?;
        Ok(Self {
            rho_axis,
            radius,
            control,
            transition,
            shape: ProfileShape::Graded,
        })
    }

    pub fn with_shape(self, shape: ProfileShape) -> Self {
        Self { shape, ..self }
    }
}

impl ProfileFamily for EitProfileFamily {
    fn profile(&self, delta: f64) -> Result<IndexProfile> {
        // raising the probe frequency lowers Δ = ω₀ - ω_p
        let cf = self.control.with_detuning(self.control.detuning - delta);
        let mut p = index_profile_from_axis(self.rho_axis, self.radius, &cf, &self.transition)?;
        p.shape = self.shape;
        Ok(p)
    }

    fn k0(&self, delta: f64) -> f64 {
        (self.transition.omega0() - self.control.detuning + delta) / SPEED_OF_LIGHT
    }
}

/// Modes of a family at its nominal frequency with group velocities
/// 2δω/(β(+δω) - β(-δω)), tracking modes by (l, zero count).
pub fn solve_with_group_velocity(
    family: &dyn ProfileFamily,
    shells: usize,
    delta_omega: f64,
) -> Result<ModeSet> {
    if !(delta_omega.is_finite() && delta_omega > 0.0) {
        return Err(Error::invalid("delta_omega", "must be > 0"));
    }
    let mut set = solve_modes(&family.profile(0.0)?, family.k0(0.0), None, shells)?;
    let l_top = set.max_l();
    let Some(l_top) = l_top else {
        return Ok(set);
    };
    let plus = solve_modes(&family.profile(delta_omega)?, family.k0(delta_omega), Some(l_top), shells)?;
    let minus = solve_modes(&family.profile(-delta_omega)?, family.k0(-delta_omega), Some(l_top), shells)?;
    for mode in &mut set.modes {
        let (Some(p), Some(q)) = (plus.find(mode.l, mode.m), minus.find(mode.l, mode.m)) else {
            return Err(Error::ModeTrackingLost { l: mode.l, m: mode.m });
        };
        mode.vg_mode = Some(2.0 * delta_omega / (p.beta - q.beta));
    }
    Ok(set)
}

/// Group velocity of a single solved mode of `family`.
pub fn mode_group_velocity(
    mode: &ModeSolution,
    family: &dyn ProfileFamily,
    shells: usize,
    delta_omega: f64,
) -> Result<f64> {
    let beta_at = |delta: f64| -> Result<f64> {
        let profile = family.profile(delta)?;
        let k0 = family.k0(delta);
        let wkb = wkb_mode_count(&profile, k0);
        let shell_set = Shells::new(&profile, shells);
        let channel = solve_channel(&profile, &shell_set, k0, mode.l, wkb.count_for(mode.l))?;
        channel
            .iter()
            .find(|s| s.m == mode.m)
            .map(|s| s.beta)
            .ok_or(Error::ModeTrackingLost { l: mode.l, m: mode.m })
    };
    Ok(2.0 * delta_omega / (beta_at(delta_omega)? - beta_at(-delta_omega)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeScanRow {
    pub temperature: f64,
    pub n1: f64,
    pub radius: f64,
    pub v_number: f64,
    /// WKB counts, or the error message of a failed point.
    pub count: std::result::Result<WkbCount, String>,
}

/// WKB mode counts of the cloud's index profile at each temperature.
pub fn temperature_mode_scan(
    spec: &CondensateSpec,
    cf: &ControlField,
    tp: &TransitionParams,
    temperatures: &[f64],
    core: CoreModel,
) -> Vec<ModeScanRow> {
    temperatures
        .par_iter()
        .map(|&t| {
            let s = spec.with_temperature(t);
            let family = EitProfileFamily::for_cloud(&s, *cf, *tp, core);
            let built = family.and_then(|f| Ok((f.profile(0.0)?, f.k0(0.0))));
            match built {
                Ok((profile, k0)) => ModeScanRow {
                    temperature: t,
                    n1: profile.n1,
                    radius: profile.radius,
                    v_number: profile.v_number(k0),
                    count: Ok(wkb_mode_count(&profile, k0)),
                },
                Err(e) => ModeScanRow {
                    temperature: t,
                    n1: f64::NAN,
                    radius: f64::NAN,
                    v_number: f64::NAN,
                    count: Err(e.to_string()),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::J0_FIRST_ZERO;

    const K0: f64 = 1.0e7;

    fn graded_with_v(v: f64, n1: f64) -> IndexProfile {
        let radius = v / (K0 * (n1 * n1 - 1.0).sqrt());
        IndexProfile::graded(n1, radius).unwrap()
    }

    fn step_with_v(v: f64, n1: f64) -> IndexProfile {
        let radius = v / (K0 * (n1 * n1 - 1.0).sqrt());
        IndexProfile::step(n1, radius).unwrap()
    }

    #[test]
    fn parabolic_wkb_counts_are_exact() {
        // exact parabolic result: 2m + l + 1 < V/2
        for v in [5.3, 12.3, 26.5, 40.7] {
            let p = graded_with_v(v, 1.02);
            let count = wkb_mode_count(&p, K0);
            for (l, &c) in count.per_l.iter().enumerate() {
                let exact = (0..).take_while(|&m| ((2 * m + l + 1) as f64) < v / 2.0).count();
                assert_eq!(c, exact, "V={v} l={l}");
            }
            let l_max = (0..).take_while(|&l| ((l + 1) as f64) < v / 2.0).count();
            assert_eq!(count.per_l.len(), l_max, "V={v}");
        }
    }

    #[test]
    fn large_v_count_approaches_v_squared_over_four() {
        let v = 60.0;
        let count = wkb_mode_count(&graded_with_v(v, 1.02), K0);
        let estimate = v * v / 4.0;
        assert!((count.total as f64 / estimate - 1.0).abs() < 0.1, "{} vs {estimate}", count.total);
    }

    #[test]
    fn no_contrast_no_modes() {
        let p = IndexProfile::graded(1.0, 1e-5).unwrap();
        assert!(wkb_mode_count(&p, K0).is_empty());
        assert!(solve_modes(&p, K0, None, 64).unwrap().modes.is_empty());
    }

    #[test]
    fn step_index_second_mode_cutoff() {
        let second = |v: f64| solve_modes(&step_with_v(v, 1.01), K0, Some(2), 16).unwrap().modes.len() >= 2;
        assert!(!second(J0_FIRST_ZERO - 0.01));
        assert!(second(J0_FIRST_ZERO + 0.01));
        let single = solve_modes(&step_with_v(2.0, 1.01), K0, Some(2), 16).unwrap();
        assert_eq!(single.modes.len(), 1);
        assert_eq!((single.modes[0].l, single.modes[0].m), (0, 0));
    }

    #[test]
    fn modes_are_guided_labelled_and_normalised() {
        let p = graded_with_v(14.0, 1.015);
        let set = solve_modes(&p, K0, None, 64).unwrap();
        assert!(!set.modes.is_empty());
        for (l, &c) in set.wkb.per_l.iter().enumerate() {
            assert!(set.count_for(l).abs_diff(c) <= 1, "l={l}");
        }
        for mode in &set.modes {
            assert!(mode.beta > K0 && mode.beta < K0 * p.n1);
            let norm = trapezoid(&mode.r, |i| mode.psi[i] * mode.psi[i] * 2.0 * PI * mode.r[i]);
            assert!((norm - 1.0).abs() < 1e-12);
            let tail: Vec<f64> = mode.r.iter().zip(&mode.psi).filter(|(&r, _)| r >= p.radius).map(|(_, &v)| v.abs()).collect();
            assert!(tail.windows(2).all(|w| w[1] <= w[0]));
        }
        let lp00 = set.find(0, 0).unwrap();
        assert!(lp00.psi[0] > 0.0 && lp00.psi[0] >= lp00.psi.iter().copied().fold(0.0, f64::max) - 1e-12);
        let lp10 = set.find(1, 0).unwrap();
        assert_eq!(lp10.psi[0], 0.0);
    }

    #[test]
    fn equal_l_modes_are_orthogonal() {
        let set = solve_modes(&graded_with_v(14.0, 1.015), K0, Some(1), 64).unwrap();
        for l in 0..=1 {
            let channel: Vec<&ModeSolution> = set.modes.iter().filter(|m| m.l == l).collect();
            for i in 0..channel.len() {
                for j in 0..i {
                    let o = overlap(channel[i], channel[j]).unwrap();
                    assert!(o.abs() < 1e-4, "l={l} {i},{j}: {o}");
                }
            }
        }
    }

    #[test]
    fn shell_refinement_converges() {
        let p = graded_with_v(10.0, 1.015);
        let coarse = solve_modes(&p, K0, None, 64).unwrap();
        let fine = solve_modes(&p, K0, None, 256).unwrap();
        for m in &coarse.modes {
            let f = fine.find(m.l, m.m).unwrap();
            assert!((m.beta / f.beta - 1.0).abs() < 1e-5, "{}", m.label());
        }
    }

    #[test]
    fn too_few_shells_rejected() {
        assert!(solve_modes(&graded_with_v(5.0, 1.01), K0, None, 8).is_err());
    }
}
