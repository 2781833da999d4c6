//! Free energies, Fisher informations, relative entropies and the quadratic
//! forms of the linearized problems.

mod forms;
mod ibp;
pub mod stencil;
mod weights;

pub use forms::{phi_functionals, psi_q_forms, Perturbation, PsiForms};
pub use ibp::{ibp_identity_residual, AlphaMap, IbpTerms};
pub use weights::{weight_m, weight_m1, weights_m};

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::params::{ModelParams, Variant};
use crate::profile::Profile;
use crate::stationary::StationaryState;
use crate::transport::{chemical_potential, confinement, interface_velocity, upwind};

/// One time sample of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub free_energy: f64,
    pub fisher: f64,
    pub rel_entropy: f64,
    pub weighted_l2: f64,
    pub second_moment: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,mass,free_energy,fisher,rel_entropy,weighted_l2,second_moment";

    pub fn csv_row(&self) -> String {
        [self.t, self.mass, self.free_energy, self.fisher, self.rel_entropy, self.weighted_l2, self.second_moment]
            .iter()
            .map(|x| format!("{x:.17e}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub(crate) fn entropy_part(density: &[f64], volumes: &[f64], q: f64) -> f64 {
    -density.iter().zip(volumes).map(|(u, v)| u.powf(q) * v).sum::<f64>() / (1.0 - q)
}

/// Free energy for precomputed confinement `V` (external or `V_λ * u`).
pub(crate) fn free_energy_with(density: &[f64], potential: &[f64], volumes: &[f64], p: &ModelParams) -> f64 {
    let weight = match p.variant() {
        Variant::Drift => 1.0,
        Variant::MeanField => 0.5,
    };
    let pot: f64 = density.iter().zip(potential).zip(volumes).map(|((u, w), v)| u * w * v).sum();
    entropy_part(density, volumes, p.q()) + weight * pot
}

/// Drift: `−1/(1−q)∫u^q + ∫V_λ u`; mean-field: `−1/(1−q)∫u^q + I_λ[u]/(2λ)`.
pub fn free_energy(u: &Profile, p: &ModelParams, kernel: Option<&KernelMatrix>) -> Result<f64> {
    let grid = u.grid();
    let entropy = entropy_part(u.density(), grid.volumes(), p.q());
    match p.variant() {
        Variant::Drift => {
            let pot = crate::transport::external_potential(grid, p);
            Ok(entropy + grid.integrate(&pot.iter().zip(u.density()).map(|(a, b)| a * b).collect::<Vec<_>>()))
        }
        Variant::MeanField => {
            let k = kernel.ok_or(Error::MissingKernel)?;
            Ok(entropy + k.interaction_energy(u, u)? / (2.0 * p.lambda()))
        }
    }
}

/// `Σ A Δr u^{up} v²` over interior interfaces, from a precomputed chemical potential.
pub(crate) fn fisher_with(density: &[f64], xi: &[f64], grid: &crate::grid::RadialGrid) -> f64 {
    let dr = grid.dr();
    let areas = grid.areas();
    interface_velocity(xi, dr).iter().enumerate().map(|(i, v)| areas[i + 1] * dr * upwind(density[i], density[i + 1], *v) * v * v).sum()
}

/// `∫u |∂_r(q/(q−1) u^{q−1} + V)|²` with interface differences and the
/// solver's donor-cell density, so that `dF/dt = −I` holds for the semi-discrete scheme.
pub fn fisher_information(u: &Profile, p: &ModelParams, kernel: Option<&KernelMatrix>) -> Result<f64> {
    let grid = u.grid();
    let pot = confinement(u.density(), grid, p, kernel)?;
    let xi = chemical_potential(u.density(), &pot, p.q());
    Ok(fisher_with(u.density(), &xi, grid))
}

fn check_mass(u: &Profile, s: &StationaryState) -> Result<()> {
    let (a, b) = (u.total_mass(), s.profile.total_mass());
    if (a - b).abs() > 1e-8 * b.abs() {
        return Err(Error::MassMismatch { left: a, right: b });
    }
    Ok(())
}

/// `Σ [φ(u) − φ(s) − φ'(s)(u − s)] V` with `φ(x) = x^q/(q−1)`.
pub fn bregman_entropy(u: &Profile, s: &StationaryState) -> Result<f64> {
    u.check_grid(s.grid())?;
    let q = s.params.q();
    let c = 1.0 / (q - 1.0);
    Ok(u.density()
        .iter()
        .zip(s.density())
        .zip(s.grid().volumes())
        .map(|((a, b), v)| c * (a.powf(q) - b.powf(q) - q * b.powf(q - 1.0) * (a - b)) * v)
        .sum())
}

/// Relative entropy with respect to a stationary state of the same mass, in
/// Bregman form; the mean-field variant adds `½∬V_λ(x−y)(u−s)(x)(u−s)(y)`.
pub fn relative_entropy(u: &Profile, s: &StationaryState, kernel: Option<&KernelMatrix>) -> Result<f64> {
    check_mass(u, s)?;
    let b = bregman_entropy(u, s)?;
    match s.params.variant() {
        Variant::Drift => Ok(b),
        Variant::MeanField => {
            let k = kernel.ok_or(Error::MissingKernel)?;
            let d: Vec<f64> = u.density().iter().zip(s.density()).map(|(a, b)| a - b).collect();
            Ok(b + k.bilinear(&d, &d) / (2.0 * k.lambda()))
        }
    }
}

/// `Σ s^{q−2}(u − s)² V`.
pub fn weighted_l2(u: &Profile, s: &StationaryState) -> Result<f64> {
    u.check_grid(s.grid())?;
    let q = s.params.q();
    Ok(u.density().iter().zip(s.density()).zip(s.grid().volumes()).map(|((a, b), v)| b.powf(q - 2.0) * (a - b) * (a - b) * v).sum())
}

/// Two-sided bound on the Bregman entropy from the cellwise extrema of `v = u/s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl Sandwich {
    pub fn holds(&self, rel_tol: f64) -> bool {
        let slack = rel_tol * self.value.abs();
        self.lower <= self.value + slack && self.value <= self.upper + slack
    }
}

/// `(q/2)𝒲₁^{q−2}∫|v−1|² s^q ≤ Bregman ≤ (q/2)𝒲₀^{q−2}∫|v−1|² s^q`.
pub fn entropy_sandwich(u: &Profile, s: &StationaryState) -> Result<Sandwich> {
    check_mass(u, s)?;
    let q = s.params.q();
    let ratio: Vec<f64> = u.density().iter().zip(s.density()).map(|(a, b)| a / b).collect();
    let lo = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dist: f64 =
        ratio.iter().zip(s.density()).zip(s.grid().volumes()).map(|((v, b), vol)| (v - 1.0) * (v - 1.0) * b.powf(q) * vol).sum();
    Ok(Sandwich {
        ratio_min: lo,
        ratio_max: hi,
        lower: 0.5 * q * hi.powf(q - 2.0) * dist,
        value: bregman_entropy(u, s)?,
        upper: 0.5 * q * lo.powf(q - 2.0) * dist,
    })
}

/// Full diagnostics sample at time `t`.
pub fn record(t: f64, u: &Profile, s: &StationaryState, kernel: Option<&KernelMatrix>) -> Result<DiagnosticsRecord> {
    let p = &s.params;
    let grid = u.grid();
    let pot = confinement(u.density(), grid, p, kernel)?;
    let xi = chemical_potential(u.density(), &pot, p.q());
    let rec = DiagnosticsRecord {
        t,
        mass: u.total_mass(),
        free_energy: free_energy_with(u.density(), &pot, grid.volumes(), p),
        fisher: fisher_with(u.density(), &xi, grid),
        rel_entropy: relative_entropy(u, s, kernel)?,
        weighted_l2: weighted_l2(u, s)?,
        second_moment: u.radial_moment(2.0),
    };
    Ok(rec)
}
