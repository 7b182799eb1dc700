//! Semi-ideal density model of a harmonically trapped Bose gas.
//!
//! The condensate is a Thomas-Fermi parabola holding N₀(T) = N(1 - (T/T_c)³)
//! atoms; the thermal cloud is an ideal semiclassical Bose gas in the bare
//! trap, g_{3/2}(ζ e^{-V/k_BT})/λ_dB³, with ζ fixed by atom-number
//! conservation (ζ = 1 below T_c).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{BOLTZMANN, HBAR, SODIUM_MASS, ZETA_3};
use crate::eit::{susceptibility, ControlField, TransitionParams};
use crate::special::{bose_g3, bose_g32};
use crate::{Error, Result, Warning};

/// Trap, interaction and temperature of the atomic cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CondensateSpec {
    pub n_atoms: f64,
    pub omega_r: f64,
    pub omega_z: f64,
    pub a_s: f64,
    pub mass: f64,
    pub temperature: f64,
}

impl CondensateSpec {
    pub fn new(
        n_atoms: f64,
        omega_r: f64,
        omega_z: f64,
        a_s: f64,
        mass: f64,
        temperature: f64,
    ) -> Result<Self> {
        let spec = Self {
            n_atoms,
            omega_r,
            omega_z,
            a_s,
            mass,
            temperature,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Sodium cloud of the slow-light experiment: N = 8.3×10⁶,
    /// ω_r = 2π·69 Hz, ω_z = 2π·21 Hz, a_s = 2.75 nm, T = 408 nK.
    ///
    /// Trap and atom number are external inputs, not derived here.
    pub fn sodium_slow_light() -> Self {
        Self {
            n_atoms: 8.3e6,
            omega_r: 2.0 * PI * 69.0,
            omega_z: 2.0 * PI * 21.0,
            a_s: 2.75e-9,
            mass: SODIUM_MASS,
            temperature: 408e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_atoms", self.n_atoms),
            ("omega_r", self.omega_r),
            ("omega_z", self.omega_z),
            ("a_s", self.a_s),
            ("mass", self.mass),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::invalid("temperature", "must be >= 0"));
        }
        Ok(())
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self { temperature, ..self }
    }

    pub fn with_scattering_length(self, a_s: f64) -> Self {
        Self { a_s, ..self }
    }

    pub fn with_atoms(self, n_atoms: f64) -> Self {
        Self { n_atoms, ..self }
    }

    /// Geometric mean trap frequency ω̄ = (ω_r²ω_z)^{1/3}.
    pub fn mean_trap_frequency(&self) -> f64 {
        (self.omega_r * self.omega_r * self.omega_z).cbrt()
    }

    /// Ideal-gas transition temperature k_BT_c = ħω̄(N/ζ(3))^{1/3}.
    pub fn critical_temperature(&self) -> f64 {
        HBAR * self.mean_trap_frequency() * (self.n_atoms / ZETA_3).cbrt() / BOLTZMANN
    }

    /// Contact coupling U₀ = 4πħ²a_s/m.
    pub fn interaction_strength(&self) -> f64 {
        4.0 * PI * HBAR * HBAR * self.a_s / self.mass
    }

    /// Condensed atom number N(1 - (T/T_c)³), zero at and above T_c.
    pub fn condensed_number(&self) -> f64 {
        let t = self.temperature / self.critical_temperature();
        if t >= 1.0 {
            0.0
        } else {
            self.n_atoms * (1.0 - t.powi(3))
        }
    }

    /// Thomas-Fermi chemical potential of `n0` condensed atoms.
    pub fn thomas_fermi_mu(&self, n0: f64) -> f64 {
        if n0 <= 0.0 {
            return 0.0;
        }
        let wbar = self.mean_trap_frequency();
        let a_ho = (HBAR / (self.mass * wbar)).sqrt();
        0.5 * HBAR * wbar * (15.0 * n0 * self.a_s / a_ho).powf(0.4)
    }

    fn potential(&self, r: f64, z: f64) -> f64 {
        0.5 * self.mass * (self.omega_r * self.omega_r * r * r + self.omega_z * self.omega_z * z * z)
    }
}

/// Sampling grid of the cylindrical (r, z) density field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub radial_points: usize,
    pub axial_points: usize,
    /// Grid half-extent relative to the larger of the condensate and thermal extents.
    pub extent_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            radial_points: 256,
            axial_points: 512,
            extent_factor: 1.2,
        }
    }
}

/// Thermal extent is where the trap energy reaches this many k_BT.
const THERMAL_EXTENT_KT: f64 = 10.0;

/// Cylindrically symmetric density sampled on an (r, z) product grid.
pub trait DensityGrid {
    fn r_grid(&self) -> &[f64];
    fn z_grid(&self) -> &[f64];
    /// Total density at grid node (radial index, axial index).
    fn density_at(&self, ir: usize, iz: usize) -> f64;
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// ∫ρ d³x and ∫ρ z² d³x by the trapezoid rule in r and z.
fn grid_moments<G: DensityGrid + ?Sized>(g: &G) -> (f64, f64) {
    let wr = trapezoid_weights(g.r_grid());
    let wz = trapezoid_weights(g.z_grid());
    let mut total = 0.0;
    let mut z2 = 0.0;
    for (ir, (&r, &wri)) in g.r_grid().iter().zip(&wr).enumerate() {
        let shell = 2.0 * PI * r * wri;
        for (iz, (&z, &wzi)) in g.z_grid().iter().zip(&wz).enumerate() {
            let dn = g.density_at(ir, iz) * shell * wzi;
            total += dn;
            z2 += dn * z * z;
        }
    }
    (total, z2)
}

/// Total atom number by quadrature over the grid.
pub fn integrated_atoms<G: DensityGrid + ?Sized>(g: &G) -> f64 {
    grid_moments(g).0
}

/// Full effective length L = 2√⟨z²⟩ of the density distribution.
pub fn effective_length<G: DensityGrid + ?Sized>(g: &G) -> Result<f64> {
    let (total, z2) = grid_moments(g);
    if !(total > 0.0) {
        return Err(Error::EmptyDensity);
    }
    Ok(2.0 * (z2 / total).sqrt())
}

/// Arbitrary sampled density, used for externally supplied profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    /// Row-major in r: `rho[ir * z.len() + iz]`.
    pub rho: Vec<f64>,
}

impl SampledDensity {
    pub fn from_fn(r: Vec<f64>, z: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Self {
        let rho = r
            .iter()
            .flat_map(|&ri| z.iter().map(move |&zi| (ri, zi)))
            .map(|(ri, zi)| f(ri, zi))
            .collect();
        Self { r, z, rho }
    }
}

impl DensityGrid for SampledDensity {
    fn r_grid(&self) -> &[f64] {
        &self.r
    }
    fn z_grid(&self) -> &[f64] {
        &self.z
    }
    fn density_at(&self, ir: usize, iz: usize) -> f64 {
        self.rho[ir * self.z.len() + iz]
    }
}

/// Condensed plus thermal density of one [`CondensateSpec`].
#[derive(Debug, Clone, Serialize)]
pub struct DensityField {
    pub spec: CondensateSpec,
    pub critical_temperature: f64,
    pub condensed_number: f64,
    pub chemical_potential: f64,
    pub fugacity: f64,
    /// Thomas-Fermi radii (zero without a condensate).
    pub tf_radius_r: f64,
    pub tf_radius_z: f64,
    /// Radii at which V = 10 k_BT.
    pub thermal_extent_r: f64,
    pub thermal_extent_z: f64,
    #[serde(skip)]
    r: Vec<f64>,
    #[serde(skip)]
    z: Vec<f64>,
    #[serde(skip)]
    condensed_grid: Vec<f64>,
    #[serde(skip)]
    thermal_grid: Vec<f64>,
    pub warnings: Vec<Warning>,
}

/// Fugacity ζ ≤ 1 solving (k_BT/ħω̄)³ g₃(ζ) = N_th.
fn solve_fugacity(n_thermal: f64, spec: &CondensateSpec) -> f64 {
    let kt = BOLTZMANN * spec.temperature;
    let capacity = (kt / (HBAR * spec.mean_trap_frequency())).powi(3);
    let target = n_thermal / capacity;
    if target >= ZETA_3 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bose_g3(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Builds the semi-ideal density field on the default grid.
pub fn build_density(spec: &CondensateSpec) -> Result<DensityField> {
    build_density_with(spec, GridSpec::default())
}

pub fn build_density_with(spec: &CondensateSpec, grid: GridSpec) -> Result<DensityField> {
    spec.validate()?;
    if grid.radial_points < 2 || grid.axial_points < 3 || !(grid.extent_factor >= 1.0) {
        return Err(Error::invalid("grid", "need >= 2 radial, >= 3 axial points and extent >= 1"));
    }
    let tc = spec.critical_temperature();
    let mut warnings = Vec::new();
    if spec.temperature >= tc {
        warnings.push(Warning::TemperatureAboveTc);
    }
    let n0 = spec.condensed_number();
    let mu = spec.thomas_fermi_mu(n0);
    let n_thermal = spec.n_atoms - n0;
    let fugacity = if spec.temperature > 0.0 && n_thermal > 0.0 {
        solve_fugacity(n_thermal, spec)
    } else {
        0.0
    };
    let tf_r = (2.0 * mu / (spec.mass * spec.omega_r * spec.omega_r)).sqrt();
    let tf_z = (2.0 * mu / (spec.mass * spec.omega_z * spec.omega_z)).sqrt();
    let kt = BOLTZMANN * spec.temperature;
    let th_r = (2.0 * THERMAL_EXTENT_KT * kt / (spec.mass * spec.omega_r * spec.omega_r)).sqrt();
    let th_z = (2.0 * THERMAL_EXTENT_KT * kt / (spec.mass * spec.omega_z * spec.omega_z)).sqrt();

    let r_max = grid.extent_factor * tf_r.max(th_r);
    let z_max = grid.extent_factor * tf_z.max(th_z);
    let r: Vec<f64> = (0..grid.radial_points)
        .map(|i| r_max * i as f64 / (grid.radial_points - 1) as f64)
        .collect();
    let z: Vec<f64> = (0..grid.axial_points)
        .map(|i| -z_max + 2.0 * z_max * i as f64 / (grid.axial_points - 1) as f64)
        .collect();

    let mut field = DensityField {
        spec: *spec,
        critical_temperature: tc,
        condensed_number: n0,
        chemical_potential: mu,
        fugacity,
        tf_radius_r: tf_r,
        tf_radius_z: tf_z,
        thermal_extent_r: th_r,
        thermal_extent_z: th_z,
        r,
        z,
        condensed_grid: Vec::new(),
        thermal_grid: Vec::new(),
        warnings,
    };
    let nodes: Vec<(f64, f64)> = field
        .r
        .iter()
        .flat_map(|&ri| field.z.iter().map(move |&zi| (ri, zi)))
        .collect();
    field.condensed_grid = nodes.iter().map(|&(ri, zi)| field.condensed(ri, zi)).collect();
    field.thermal_grid = nodes.iter().map(|&(ri, zi)| field.thermal(ri, zi)).collect();
    Ok(field)
}

impl DensityField {
    /// Thomas-Fermi density max[(μ - V)/U₀, 0].
    pub fn condensed(&self, r: f64, z: f64) -> f64 {
        if self.condensed_number <= 0.0 {
            return 0.0;
        }
        ((self.chemical_potential - self.spec.potential(r, z)) / self.spec.interaction_strength())
            .max(0.0)
    }

    /// Ideal Bose gas density g_{3/2}(ζ e^{-V/k_BT})/λ_dB³.
    pub fn thermal(&self, r: f64, z: f64) -> f64 {
        if self.fugacity <= 0.0 {
            return 0.0;
        }
        let kt = BOLTZMANN * self.spec.temperature;
        let lambda_db = (2.0 * PI * HBAR * HBAR / (self.spec.mass * kt)).sqrt();
        bose_g32(self.fugacity * (-self.spec.potential(r, z) / kt).exp()) / lambda_db.powi(3)
    }

    pub fn total(&self, r: f64, z: f64) -> f64 {
        self.condensed(r, z) + self.thermal(r, z)
    }

    pub fn condensed_fraction(&self) -> f64 {
        self.condensed_number / self.spec.n_atoms
    }

    pub fn peak_density(&self) -> f64 {
        self.total(0.0, 0.0)
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn condensed_samples(&self) -> &[f64] {
        &self.condensed_grid
    }

    pub fn thermal_samples(&self) -> &[f64] {
        &self.thermal_grid
    }

    /// On-axis total density ρ(0, z) at the grid nodes.
    pub fn axial_profile(&self) -> Vec<f64> {
        (0..self.z.len()).map(|iz| self.density_at(0, iz)).collect()
    }

    /// ∫ρ(0, z) dz along the axis [m^-2], evaluated from the closed-form field.
    pub fn axial_column_density(&self) -> f64 {
        axial_integral(self, |rho| rho)
    }

    /// Column-weighted mean density ∫ρ² dz / ∫ρ dz along the axis.
    pub fn column_mean_density(&self) -> f64 {
        let col = self.axial_column_density();
        if col <= 0.0 {
            return 0.0;
        }
        axial_integral(self, |rho| rho * rho) / col
    }

    /// Half-length of the axial range that carries any density.
    pub fn axial_half_extent(&self) -> f64 {
        *self.z.last().expect("non-empty grid")
    }

    pub fn effective_length(&self) -> Result<f64> {
        effective_length(self)
    }

    /// Effective length of the condensed component alone.
    pub fn condensate_effective_length(&self) -> Result<f64> {
        effective_length(&Component {
            field: self,
            samples: &self.condensed_grid,
        })
    }

    /// Radius enclosing `fraction` of the radially integrated thermal column density.
    pub fn thermal_column_radius(&self, fraction: f64) -> Result<f64> {
        let wz = trapezoid_weights(&self.z);
        let nz = self.z.len();
        let ring: Vec<f64> = self
            .r
            .iter()
            .enumerate()
            .map(|(ir, &r)| {
                let col: f64 = (0..nz).map(|iz| self.thermal_grid[ir * nz + iz] * wz[iz]).sum();
                2.0 * PI * r * col
            })
            .collect();
        let mut cumulative = vec![0.0; ring.len()];
        for i in 1..ring.len() {
            cumulative[i] = cumulative[i - 1] + 0.5 * (ring[i] + ring[i - 1]) * (self.r[i] - self.r[i - 1]);
        }
        let total = *cumulative.last().unwrap_or(&0.0);
        if !(total > 0.0) {
            return Err(Error::EmptyDensity);
        }
        let target = fraction * total;
        let i = cumulative.iter().position(|&c| c >= target).unwrap_or(ring.len() - 1).max(1);
        let (c0, c1) = (cumulative[i - 1], cumulative[i]);
        let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        Ok(self.r[i - 1] + t * (self.r[i] - self.r[i - 1]))
    }

    pub fn integrated_atoms(&self) -> f64 {
        integrated_atoms(self)
    }
}

/// Composite Simpson over [-z_max, z_max] with the TF edges as breakpoints.
fn axial_integral(field: &DensityField, f: impl Fn(f64) -> f64) -> f64 {
    let z_max = field.axial_half_extent();
    let mut breaks = vec![-z_max];
    if field.tf_radius_z > 0.0 && field.tf_radius_z < z_max {
        breaks.extend([-field.tf_radius_z, field.tf_radius_z]);
    }
    breaks.push(z_max);
    let n = 4000;
    breaks
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let h = (b - a) / n as f64;
            let mut s = f(field.total(0.0, a)) + f(field.total(0.0, b));
            for i in 1..n {
                let c = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += c * f(field.total(0.0, a + i as f64 * h));
            }
            s * h / 3.0
        })
        .sum()
}

struct Component<'a> {
    field: &'a DensityField,
    samples: &'a [f64],
}

impl DensityGrid for Component<'_> {
    fn r_grid(&self) -> &[f64] {
        &self.field.r
    }
    fn z_grid(&self) -> &[f64] {
        &self.field.z
    }
    fn density_at(&self, ir: usize, iz: usize) -> f64 {
        self.samples[ir * self.field.z.len() + iz]
    }
}

impl DensityGrid for DensityField {
    fn r_grid(&self) -> &[f64] {
        &self.r
    }
    fn z_grid(&self) -> &[f64] {
        &self.z
    }
    fn density_at(&self, ir: usize, iz: usize) -> f64 {
        let k = ir * self.z.len() + iz;
        self.condensed_grid[k] + self.thermal_grid[k]
    }
}

/// Radial shape of the refractive index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileShape {
    /// n1·[1 - A(r/R)²]^{1/2} inside R.
    Graded,
    /// n1 inside R.
    Step,
}

/// Cylindrical index profile with n = 1 for r ≥ R.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexProfile {
    pub shape: ProfileShape,
    pub n1: f64,
    pub radius: f64,
    /// Complex susceptibility on axis; its imaginary part drives the loss estimate.
    pub axis_susceptibility: Complex64,
    pub warnings: Vec<Warning>,
}

impl IndexProfile {
    pub fn graded(n1: f64, radius: f64) -> Result<Self> {
        Self::lossless(ProfileShape::Graded, n1, radius)
    }

    pub fn step(n1: f64, radius: f64) -> Result<Self> {
        Self::lossless(ProfileShape::Step, n1, radius)
    }

    fn lossless(shape: ProfileShape, n1: f64, radius: f64) -> Result<Self> {
        if !(n1.is_finite() && n1 > 0.0) {
            return Err(Error::invalid("n1", format!("must be > 0, got {n1}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("radius", format!("must be > 0, got {radius}")));
        }
        let mut warnings = Vec::new();
        if n1 - 1.0 < 1e-8 {
            warnings.push(Warning::NoContrast);
        }
        Ok(Self {
            shape,
            n1,
            radius,
            axis_susceptibility: Complex64::new(n1 * n1 - 1.0, 0.0),
            warnings,
        })
    }

    /// Profile parameter A = 1 - 1/n1².
    pub fn a(&self) -> f64 {
        1.0 - 1.0 / (self.n1 * self.n1)
    }

    pub fn has_contrast(&self) -> bool {
        !self.warnings.contains(&Warning::NoContrast)
    }

    pub fn index_sq(&self, r: f64) -> f64 {
        if r >= self.radius {
            return 1.0;
        }
        match self.shape {
            ProfileShape::Graded => {
                let x = r / self.radius;
                self.n1 * self.n1 * (1.0 - self.a() * x * x)
            }
            ProfileShape::Step => self.n1 * self.n1,
        }
    }

    pub fn index(&self, r: f64) -> f64 {
        self.index_sq(r).sqrt()
    }

    /// Im n(r), from the complex susceptibility scaled with the radial density.
    pub fn index_imag(&self, r: f64) -> f64 {
        if r >= self.radius {
            return 0.0;
        }
        let scale = match self.shape {
            ProfileShape::Graded => 1.0 - (r / self.radius).powi(2),
            ProfileShape::Step => 1.0,
        };
        (1.0 + self.axis_susceptibility * scale).sqrt().im
    }

    /// Normalised frequency V = k₀R√(n1² - 1).
    pub fn v_number(&self, k0: f64) -> f64 {
        k0 * self.radius * (self.n1 * self.n1 - 1.0).max(0.0).sqrt()
    }
}

/// How the core radius R of the index profile is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RadiusRule {
    /// Thomas-Fermi radial radius of the condensate.
    #[default]
    ThomasFermi,
    /// Radius enclosing the given fraction of the thermal column density.
    ThermalColumn(f64),
}

/// Which on-axis density sets the core index n1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoreDensity {
    /// Condensed component only; the thermal background acts as cladding.
    #[default]
    Condensed,
    /// Condensed plus thermal density.
    Total,
}

/// Radius and density rules that turn a cloud into a graded core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct CoreModel {
    pub radius: RadiusRule,
    pub density: CoreDensity,
}

impl DensityField {
    /// Core radius and on-axis density under `core`.
    pub fn core_parameters(&self, core: CoreModel) -> Result<(f64, f64)> {
        let radius = match core.radius {
            RadiusRule::ThomasFermi => self.tf_radius_r,
            RadiusRule::ThermalColumn(fraction) => {
                if !(fraction > 0.0 && fraction < 1.0) {
                    return Err(Error::invalid("radius fraction", "must lie in (0, 1)"));
                }
                self.thermal_column_radius(fraction)?
            }
        };
        let rho = match core.density {
            CoreDensity::Condensed => self.condensed(0.0, 0.0),
            CoreDensity::Total => self.total(0.0, 0.0),
        };
        Ok((radius, rho))
    }
}

/// Index profile seen by a detuned probe in a Thomas-Fermi core.
///
/// The parabolic TF density makes n²(r) - 1 ∝ 1 - r²/R_TF², so with
/// n1 = Re√(1 + χ(ρ_c(0,0))) and R equal to the TF radial radius the profile
/// is exactly n1²[1 - A r²/R²] with A = 1 - 1/n1².
pub fn index_profile(
    field: &DensityField,
    cf: &ControlField,
    tp: &TransitionParams,
) -> Result<IndexProfile> {
    index_profile_with(field, cf, tp, CoreModel::default())
}

pub fn index_profile_with(
    field: &DensityField,
    cf: &ControlField,
    tp: &TransitionParams,
    core: CoreModel,
) -> Result<IndexProfile> {
    let (radius, rho) = field.core_parameters(core)?;
    index_profile_from_axis(rho, radius, cf, tp)
}

/// Graded profile from an on-axis condensed density and core radius.
pub fn index_profile_from_axis(
    rho_axis: f64,
    radius: f64,
    cf: &ControlField,
    tp: &TransitionParams,
) -> Result<IndexProfile> {
    let chi = susceptibility(rho_axis, cf, tp)?;
    let n1 = (1.0 + chi).sqrt().re;
    let radius = if radius > 0.0 { radius } else { f64::MIN_POSITIVE };
    let mut profile = IndexProfile::graded(n1, radius)?;
    profile.axis_susceptibility = chi;
    if cf.detuning == 0.0 {
        profile.warnings.push(Warning::ResonantProbe);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> CondensateSpec {
        CondensateSpec::sodium_slow_light()
    }

    #[test]
    fn critical_temperature_of_default_cloud() {
        let tc = spec().critical_temperature();
        assert!((tc - 424.159_886_064_921e-9).abs() < 1e-12 * 1e-7 * 424.0);
    }

    // Closed-form values (high-precision evaluation of the semi-ideal model):
    // (a_s, T) -> (peak density, axial TF radius, effective length).
    const ORACLES: [(f64, f64, f64, f64, f64); 4] = [
        (2.75e-9, 408e-9, 8.002_270_549_425_47e19, 4.468_743_487_094_07e-5, 1.652_051_183_005_97e-4),
        (2.75e-9, 0.0, 1.593_896_644_934_33e20, 6.948_797_286_546_15e-5, 5.252_797_008_914_73e-5),
        (7.0e-9, 405e-9, 5.411_705_018_768_81e19, 5.565_530_462_772_84e-5, 1.631_138_709_760_37e-4),
        (2.75e-9, 300e-9, 1.427_377_308_899_77e20, 6.367_678_890_596_87e-5, 9.715_177_389_828_65e-5),
    ];

    #[test]
    fn peak_and_radius_match_closed_form() {
        for &(a, t, peak, z_tf, _) in &ORACLES {
            let field = build_density(&spec().with_scattering_length(a).with_temperature(t)).unwrap();
            assert!((field.peak_density() / peak - 1.0).abs() < 1e-9, "peak a={a} T={t}");
            assert!((field.tf_radius_z / z_tf - 1.0).abs() < 1e-9, "Z a={a} T={t}");
        }
    }

    #[test]
    fn grid_quadrature_matches_closed_form() {
        for &(a, t, _, _, length) in &ORACLES {
            let s = spec().with_scattering_length(a).with_temperature(t);
            let field = build_density(&s).unwrap();
            let l = field.effective_length().unwrap();
            assert!((l / length - 1.0).abs() < 5e-3, "L a={a} T={t}: {l}");
            let n = field.integrated_atoms();
            assert!((n / s.n_atoms - 1.0).abs() < 5e-3, "N a={a} T={t}: {n}");
        }
    }

    #[test]
    fn larger_scattering_length_lowers_peak_and_widens_cloud() {
        let base = build_density(&spec()).unwrap();
        let wide = build_density(&spec().with_scattering_length(7e-9)).unwrap();
        assert!(wide.peak_density() < base.peak_density());
        assert!(wide.tf_radius_z > base.tf_radius_z);
        assert!(wide.effective_length().unwrap() > base.effective_length().unwrap());
    }

    #[test]
    fn length_trends_with_temperature() {
        let s = spec();
        let tc = s.critical_temperature();
        let mut last_total = 0.0;
        let mut last_condensed = f64::INFINITY;
        let mut last_fraction = f64::INFINITY;
        for i in 2..=9 {
            let field = build_density(&s.with_temperature(0.1 * i as f64 * tc)).unwrap();
            let total = field.effective_length().unwrap();
            let condensed = field.condensate_effective_length().unwrap();
            assert!(total > last_total, "thermal wings lengthen the cloud");
            assert!(condensed < last_condensed, "the core shrinks");
            assert!(field.condensed_fraction() < last_fraction);
            last_total = total;
            last_condensed = condensed;
            last_fraction = field.condensed_fraction();
        }
    }

    #[test]
    fn pure_condensate_length_is_two_z_over_root_seven() {
        let field = build_density(&spec().with_temperature(0.0)).unwrap();
        let l = field.effective_length().unwrap();
        let expect = 2.0 * field.tf_radius_z / 7f64.sqrt();
        assert!((l / expect - 1.0).abs() < 1e-3);
    }

    #[test]
    fn thermal_column_radius_is_inside_grid() {
        let field = build_density(&spec()).unwrap();
        let r99 = field.thermal_column_radius(0.99).unwrap();
        let r50 = field.thermal_column_radius(0.5).unwrap();
        assert!(r50 < r99 && r99 < *field.r().last().unwrap());
        assert!(r99 > field.tf_radius_r);
    }

    #[test]
    fn detuned_probe_gives_guiding_profile() {
        let tp = TransitionParams::sodium();
        let cf = ControlField::new(2.5 * tp.gamma(), -0.1 * tp.gamma()).unwrap();
        let field = build_density(&spec()).unwrap();
        let p = index_profile(&field, &cf, &tp).unwrap();
        assert!(p.n1 > 1.0 && p.a() > 0.0 && p.has_contrast());
        assert_eq!(p.radius, field.tf_radius_r);
        assert_eq!(p.index(p.radius), 1.0);
        let wide = index_profile_with(
            &field,
            &cf,
            &tp,
            CoreModel {
                radius: RadiusRule::ThermalColumn(0.99),
                ..Default::default()
            },
        ).unwrap();
        assert!(wide.radius > p.radius);
    }

    #[test]
    fn zero_temperature_is_pure_thomas_fermi() {
        let field = build_density(&spec().with_temperature(0.0)).unwrap();
        assert!(field.thermal_samples().iter().all(|&x| x == 0.0));
        let u0 = spec().interaction_strength();
        assert!((field.peak_density() - field.chemical_potential / u0).abs() < 1e-6 * field.peak_density());
    }

    #[test]
    fn thomas_fermi_edge_matches_axial_radius() {
        let field = build_density(&spec().with_temperature(0.0)).unwrap();
        let z = field.z();
        let dz = z[1] - z[0];
        let profile = field.axial_profile();
        let edge = z
            .iter()
            .zip(&profile)
            .filter(|(&zi, &rho)| zi > 0.0 && rho > 0.0)
            .map(|(&zi, _)| zi)
            .fold(0.0, f64::max);
        assert!((edge - field.tf_radius_z).abs() <= dz);
    }

    #[test]
    fn above_tc_is_thermal_only_with_warning() {
        let s = spec();
        let field = build_density(&s.with_temperature(1.1 * s.critical_temperature())).unwrap();
        assert!(field.warnings.contains(&Warning::TemperatureAboveTc));
        assert_eq!(field.condensed_number, 0.0);
        assert!(field.fugacity < 1.0 && field.fugacity > 0.0);
        let n = field.integrated_atoms();
        assert!((n / s.n_atoms - 1.0).abs() < 5e-3);
    }

    #[test]
    fn uniform_slab_effective_length() {
        let a = 3.0e-5;
        let r: Vec<f64> = (0..50).map(|i| i as f64 * 1e-6).collect();
        let z: Vec<f64> = (0..=2000).map(|i| -a + 2.0 * a * i as f64 / 2000.0).collect();
        let slab = SampledDensity::from_fn(r, z, |_, _| 1e19);
        let l = effective_length(&slab).unwrap();
        assert!((l - 2.0 * a / 3f64.sqrt()).abs() < 1e-6 * l);
    }

    #[test]
    fn empty_density_is_rejected() {
        let empty = SampledDensity::from_fn(vec![0.0, 1.0], vec![-1.0, 0.0, 1.0], |_, _| 0.0);
        assert_eq!(effective_length(&empty), Err(Error::EmptyDensity));
    }

    #[test]
    fn graded_profile_is_continuous_and_non_increasing() {
        let p = IndexProfile::graded(1.02, 1e-5).unwrap();
        assert!((p.index(1e-5 * (1.0 - 1e-12)) - 1.0).abs() < 1e-10);
        assert_eq!(p.index(1e-5), 1.0);
        let mut last = f64::INFINITY;
        for i in 0..=100 {
            let n = p.index(1e-5 * i as f64 / 100.0);
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn vacuum_axis_gives_no_contrast() {
        let tp = TransitionParams::sodium();
        let cf = ControlField::new(2.5 * tp.gamma(), -0.1 * tp.gamma()).unwrap();
        let p = index_profile_from_axis(0.0, 1e-5, &cf, &tp).unwrap();
        assert_eq!(p.n1, 1.0);
        assert_eq!(p.a(), 0.0);
        assert!(!p.has_contrast());
    }
}
