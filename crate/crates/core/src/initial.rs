//! Initial data sandwiched between two stationary envelopes, and seeded
//! smooth perturbations.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::kernels::KernelMatrix;
use crate::params::Variant;
use crate::profile::Profile;
use crate::stationary::{barenblatt_profile, StationaryState};
use crate::transport::confinement;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator used for every randomized routine.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `θ a + (1−θ) b` with `θ ∈ [0, 1]` chosen to hit `mass`.
pub fn mass_matched_mixture(a: &Profile, b: &Profile, mass: f64) -> Result<Profile> {
    b.check_grid(a.grid())?;
    let (ma, mb) = (a.total_mass(), b.total_mass());
    let theta = if ma == mb { 0.5 } else { (mass - mb) / (ma - mb) };
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::MassMismatch { left: mass, right: if theta < 0.0 { mb } else { ma } });
    }
    mixture(a, b, theta)
}

/// `θ a + (1−θ) b`.
pub fn mixture(a: &Profile, b: &Profile, theta: f64) -> Result<Profile> {
    b.check_grid(a.grid())?;
    Profile::new(a.grid().clone(), a.density().iter().zip(b.density()).map(|(x, y)| theta * x + (1.0 - theta) * y).collect())
}

/// Drift datum between `N_{h_* f_hi}` and `N_{h_* f_lo}` (`f_lo < 1 < f_hi`)
/// with the mass of `N_{h_*}`.
pub fn drift_sandwich(s: &StationaryState, f_lo: f64, f_hi: f64) -> Result<Profile> {
    s.params.require(Variant::Drift)?;
    let upper = barenblatt_profile(&s.params, f_lo * s.constant, s.grid())?;
    let lower = barenblatt_profile(&s.params, f_hi * s.constant, s.grid())?;
    mass_matched_mixture(&upper, &lower, s.profile.total_mass())
}

/// `((1−q)/q (V_λ*ρ∞ + C + δ))^{1/(q−1)}`: the stationary envelope shifted by `δ`.
pub fn meanfield_envelope(s: &StationaryState, kernel: &KernelMatrix, delta: f64) -> Result<Profile> {
    s.params.require(Variant::MeanField)?;
    let q = s.params.q();
    let w = confinement(s.density(), s.grid(), &s.params, Some(kernel))?;
    let c = s.potential_constant + delta;
    if w.iter().any(|x| x + c <= 0.0) {
        return Err(Error::InvalidProfile(format!("shift {delta} makes the envelope singular")));
    }
    Profile::new(s.grid().clone(), w.iter().map(|x| ((1.0 - q) / q * (x + c)).powf(1.0 / (q - 1.0))).collect())
}

/// Mean-field datum between the envelopes shifted by `±δ`, with the grid mass
/// of the reference state.
pub fn meanfield_sandwich(s: &StationaryState, kernel: &KernelMatrix, delta: f64) -> Result<Profile> {
    let upper = meanfield_envelope(s, kernel, -delta)?;
    let lower = meanfield_envelope(s, kernel, delta)?;
    mass_matched_mixture(&upper, &lower, s.profile.total_mass())
}

/// Random smooth radial bump `Σ a_k exp(−((r − c_k)/w_k)²)` with `n` terms,
/// centers in `[0, reach]`, widths in `[reach/8, reach/2]`, amplitudes in `[−1, 1]`.
pub fn smooth_bump<R: Rng>(grid: &RadialGrid, rng: &mut R, n: usize, reach: f64) -> Vec<f64> {
    let terms: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let a = rng.gen_range(-1.0..=1.0);
            let c = rng.gen_range(0.0..=reach);
            let w = rng.gen_range(reach / 8.0..=reach / 2.0);
            (a, c, w)
        })
        .collect();
    grid.centers().iter().map(|r| terms.iter().map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum()).collect()
}
