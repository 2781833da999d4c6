//! Stationary states: drift Barenblatt profiles and mean-field equilibria.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::kernels::KernelMatrix;
use crate::params::{ModelParams, Variant};
use crate::profile::Profile;
use std::sync::Arc;

/// A computed equilibrium together with its Lagrange multiplier.
///
/// For drift states `constant` is `h` in `N_h = ((1−q)/q (h + V_λ))^{1/(q−1)}`.
/// For mean-field states `potential_constant` is `C` in
/// `q/(1−q) ρ^{q−1} = V_λ * ρ + C`; when `λ = 2` the closed form is written as
/// `((1−q)/q (r²/2 + C'))^{1/(q−1)}` and `constant` holds `C'` instead, with
/// `C = C' − M₂/2`. For `λ > 2` both fields coincide.
#[derive(Debug, Clone)]
pub struct StationaryState {
    pub profile: Profile,
    pub constant: f64,
    pub potential_constant: f64,
    pub params: ModelParams,
    pub residual: f64,
    pub iterations: usize,
}

impl StationaryState {
    pub fn density(&self) -> &[f64] {
        self.profile.density()
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.profile.grid()
    }
}

/// `N_h(r)`.
pub fn barenblatt_value(p: &ModelParams, h: f64, r: f64) -> f64 {
    let q = p.q();
    ((1.0 - q) / q * (h + p.potential(r))).powf(1.0 / (q - 1.0))
}

pub fn barenblatt_profile(p: &ModelParams, h: f64, grid: &Arc<RadialGrid>) -> Result<Profile> {
    p.require(Variant::Drift)?;
    if !(h > 0.0) {
        return Err(Error::BracketFailure { lo: h, hi: h, target: p.mass() });
    }
    Profile::from_fn(grid.clone(), |r| barenblatt_value(p, h, r))
}

fn barenblatt_mass(p: &ModelParams, h: f64, grid: &RadialGrid) -> f64 {
    grid.centers().iter().zip(grid.volumes()).map(|(&r, v)| barenblatt_value(p, h, r) * v).sum()
}

/// Sup-norm relative residual of `q/(1−q) u^{q−1} = h + V_λ` (drift) on the grid.
fn drift_residual(p: &ModelParams, h: f64, u: &Profile) -> f64 {
    let q = p.q();
    u.density()
        .iter()
        .zip(u.grid().centers())
        .map(|(d, &r)| {
            let rhs = h + p.potential(r);
            (q / (1.0 - q) * d.powf(q - 1.0) - rhs).abs() / rhs
        })
        .fold(0.0, f64::max)
}

/// Finds `h_*` with `Σ N_h V = m` by bisection on the decreasing map `h ↦ mass`.
pub fn solve_h_star(p: &ModelParams, grid: &Arc<RadialGrid>) -> Result<StationaryState> {
    p.require(Variant::Drift)?;
    let target = p.mass();
    let mass = |h: f64| barenblatt_mass(p, h, grid);
    let (mut lo, mut hi) = (0.5, 2.0);
    let mut tries = 0;
    while mass(lo) < target {
        lo *= 0.5;
        tries += 1;
        if tries > 1100 || lo == 0.0 {
            return Err(Error::BracketFailure { lo, hi, target });
        }
    }
    tries = 0;
    while mass(hi) > target {
        hi *= 2.0;
        tries += 1;
        if tries > 1100 || !hi.is_finite() {
            return Err(Error::BracketFailure { lo, hi, target });
        }
    }
    let mut iterations = 0;
    while iterations < 400 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = mass(mid);
        if m > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
    }
    let h = if (mass(lo) - target).abs() <= (mass(hi) - target).abs() { lo } else { hi };
    let profile = barenblatt_profile(p, h, grid)?;
    let residual = drift_residual(p, h, &profile);
    Ok(StationaryState { profile, constant: h, potential_constant: h, params: p.clone(), residual, iterations })
}

/// `C'` in the `λ = 2` closed form, from the log-Gamma expression.
pub fn lambda2_constant(dim: usize, q: f64) -> Result<f64> {
    let n = dim as f64;
    let b = 1.0 / (1.0 - q);
    let e = b - 0.5 * n;
    if !(e > 0.0) {
        return Err(Error::GammaDomain(e));
    }
    let ln_rhs = 0.5 * n * (2.0 * std::f64::consts::PI).ln() + ((1.0 - q) / q).ln() / (q - 1.0) + libm::lgamma(e) - libm::lgamma(b);
    Ok((ln_rhs / e).exp())
}

/// Mean-field equilibrium for `λ = 2`, `ρ∞ = ((1−q)/q (r²/2 + C'))^{1/(q−1)}`.
pub fn meanfield_lambda2(p: &ModelParams, grid: &Arc<RadialGrid>) -> Result<StationaryState> {
    p.require(Variant::MeanField)?;
    if p.lambda() != 2.0 {
        return Err(Error::LambdaOutOfRange { lambda: p.lambda(), reason: "closed form needs lambda = 2" });
    }
    let q = p.q();
    let c = lambda2_constant(p.dim(), q)?;
    let profile = Profile::from_fn(grid.clone(), |r| ((1.0 - q) / q * (0.5 * r * r + c)).powf(1.0 / (q - 1.0)))?;
    // For λ = 2 the discrete potential is exactly (m r² + M₂)/2.
    let m = profile.total_mass();
    let m2 = profile.radial_moment(2.0);
    let potential_constant = c - 0.5 * m2;
    let w: Vec<f64> = grid.centers().iter().map(|r| 0.5 * (m * r * r + m2)).collect();
    let residual = meanfield_residual(&profile, &w, potential_constant, q);
    Ok(StationaryState { profile, constant: c, potential_constant, params: p.clone(), residual, iterations: 0 })
}

fn meanfield_residual(u: &Profile, w: &[f64], c: f64, q: f64) -> f64 {
    u.density()
        .iter()
        .zip(w)
        .map(|(d, wi)| {
            let lhs = q / (1.0 - q) * d.powf(q - 1.0);
            (lhs - wi - c).abs() / lhs
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self { damping: 0.5, tol: 1e-10, max_iter: 10_000 }
    }
}

/// `((1−q)/q (W + C))^{1/(q−1)}` with `C` chosen by bisection so the grid mass is one.
/// Returns the profile values and `C`.
fn normalized_image(w: &[f64], grid: &RadialGrid, q: f64) -> Result<(Vec<f64>, f64)> {
    let expo = 1.0 / (q - 1.0);
    let a = (1.0 - q) / q;
    let vol = grid.volumes();
    let mass = |c: f64| -> f64 { w.iter().zip(vol).map(|(wi, v)| (a * (wi + c)).powf(expo) * v).sum() };
    let w_min = w.iter().copied().fold(f64::INFINITY, f64::min);
    if !w_min.is_finite() {
        return Err(Error::BisectionFailure("non-finite potential".into()));
    }
    // Any C > −min W keeps the profile positive; mass is decreasing in C.
    let floor = -w_min;
    let mut hi = floor + 1.0;
    let mut k = 0;
    while mass(hi) > 1.0 {
        hi = floor + 2.0 * (hi - floor);
        k += 1;
        if k > 2000 || !hi.is_finite() {
            return Err(Error::BisectionFailure(format!("no upper bracket (C = {hi})")));
        }
    }
    let mut lo = floor + 0.5 * (hi - floor);
    k = 0;
    while mass(lo) < 1.0 {
        lo = floor + 0.5 * (lo - floor);
        k += 1;
        if k > 2000 || lo <= floor {
            return Err(Error::BisectionFailure(format!("no lower bracket (C = {lo})")));
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let rho = w.iter().map(|wi| (a * (wi + c)).powf(expo)).collect();
    Ok((rho, c))
}

/// Damped fixed-point iteration `ρ ← (1−θ)ρ + θ T(ρ)` for the mean-field
/// equilibrium, `λ ≥ 2`.
pub fn meanfield_fixed_point(p: &ModelParams, kernel: &KernelMatrix, cfg: FixedPointConfig) -> Result<StationaryState> {
    p.require(Variant::MeanField)?;
    if kernel.lambda() != p.lambda() {
        return Err(Error::LambdaOutOfRange { lambda: kernel.lambda(), reason: "kernel exponent differs from model" });
    }
    if !(cfg.damping > 0.0 && cfg.damping <= 1.0) {
        return Err(Error::BisectionFailure(format!("damping {} outside (0, 1]", cfg.damping)));
    }
    let grid = kernel.grid().clone();
    let q = p.q();
    // Barenblatt-type guess with the right power-law tail.
    let guess: Vec<f64> = grid.centers().iter().map(|&r| ((1.0 - q) / q * (1.0 + p.potential(r))).powf(1.0 / (q - 1.0))).collect();
    let scale = 1.0 / grid.integrate(&guess);
    let mut rho: Vec<f64> = guess.iter().map(|x| x * scale).collect();
    let theta = cfg.damping;
    let mut change = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let w = kernel.apply_potential(&rho);
        let (image, _) = normalized_image(&w, &grid, q)?;
        let sup = rho.iter().copied().fold(0.0, f64::max);
        change = 0.0;
        for (r, t) in rho.iter_mut().zip(&image) {
            let next = (1.0 - theta) * *r + theta * t;
            change = f64::max(change, (next - *r).abs());
            *r = next;
        }
        change /= sup;
        if change <= cfg.tol {
            let w = kernel.apply_potential(&rho);
            let (_, c) = normalized_image(&w, &grid, q)?;
            let profile = Profile::new(grid.clone(), rho)?;
            let residual = meanfield_residual(&profile, &w, c, q);
            return Ok(StationaryState { profile, constant: c, potential_constant: c, params: p.clone(), residual, iterations: it });
        }
    }
    Err(Error::NoConvergence { iterations: cfg.max_iter, residual: change })
}

/// Left side, right side and relative gap of one identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl IdentityGap {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, gap: (lhs - rhs).abs() / lhs.abs() }
    }
}

/// Virial identities of a mean-field equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialReport {
    /// `2N ∫ρ^q` vs `∬|x−y|^λ ρρ`.
    pub pressure: IdentityGap,
    /// `q/(1−q) ∫ρ^q` vs `(1/λ)∬|x−y|^λ ρρ + C`.
    pub multiplier: IdentityGap,
    /// `∬|x−y|^λ ρρ` vs `C(1−q)2Nλ / (qλ − 2N(1−q))`; undefined (NaN gap)
    /// when the denominator vanishes.
    pub combined: IdentityGap,
}

pub fn virial_residual(s: &StationaryState, kernel: &KernelMatrix) -> Result<VirialReport> {
    s.params.require(Variant::MeanField)?;
    s.profile.check_grid(kernel.grid())?;
    let p = &s.params;
    let (n, q, lambda) = (p.dim() as f64, p.q(), p.lambda());
    let rho_q: Vec<f64> = s.density().iter().map(|d| d.powf(q)).collect();
    let int_q = s.grid().integrate(&rho_q);
    let interaction = kernel.bilinear(s.density(), s.density());
    let c = s.potential_constant;
    let denom = q * lambda - 2.0 * n * (1.0 - q);
    Ok(VirialReport {
        pressure: IdentityGap::new(2.0 * n * int_q, interaction),
        multiplier: IdentityGap::new(q / (1.0 - q) * int_q, interaction / lambda + c),
        combined: IdentityGap::new(interaction, if denom == 0.0 { f64::NAN } else { c * (1.0 - q) * 2.0 * n * lambda / denom }),
    })
}

/// Check of the `λ = 4` polynomial structure of `q/(1−q)ρ^{q−1} − C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticFit {
    /// `a = ∫|x|² ρ`.
    pub second_moment: f64,
    pub fourth_moment: f64,
    /// Coefficient of `r²`: `(N+2)a/(2N)`.
    pub r2_coefficient: f64,
    /// Sup-norm residual (relative to `1 + |model|`) against
    /// `r⁴/4 + (N+2)a/(2N) r² + M₄/4`.
    pub residual: f64,
    /// Same with the one-dimensional coefficient `3a/2` and the best constant.
    pub residual_three_halves: f64,
}

pub fn lambda4_structure(s: &StationaryState) -> Result<QuarticFit> {
    s.params.require(Variant::MeanField)?;
    if s.params.lambda() != 4.0 {
        return Err(Error::LambdaOutOfRange { lambda: s.params.lambda(), reason: "quartic structure needs lambda = 4" });
    }
    let q = s.params.q();
    let n = s.params.dim() as f64;
    let a = s.profile.radial_moment(2.0);
    let m4 = s.profile.radial_moment(4.0);
    let coef = (n + 2.0) * a / (2.0 * n);
    let y: Vec<f64> = s.density().iter().map(|d| q / (1.0 - q) * d.powf(q - 1.0) - s.potential_constant).collect();
    let r = s.grid().centers();
    let residual = y
        .iter()
        .zip(r)
        .map(|(yi, ri)| {
            let model = ri.powi(4) / 4.0 + coef * ri * ri + m4 / 4.0;
            (yi - model).abs() / (1.0 + model.abs())
        })
        .fold(0.0, f64::max);
    // Literal coefficient with the constant chosen to minimize the sup error.
    let diff: Vec<f64> = y.iter().zip(r).map(|(yi, ri)| yi - ri.powi(4) / 4.0 - 1.5 * a * ri * ri).collect();
    let (lo, hi) = diff.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), d| (l.min(*d), h.max(*d)));
    let mid = 0.5 * (lo + hi);
    let residual_three_halves =
        diff.iter().zip(r).map(|(d, ri)| (d - mid).abs() / (1.0 + ri.powi(4) / 4.0 + 1.5 * a * ri * ri + mid.abs())).fold(0.0, f64::max);
    Ok(QuarticFit { second_moment: a, fourth_moment: m4, r2_coefficient: coef, residual, residual_three_halves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::kernels::KernelMatrix;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn barenblatt_closed_form() {
        let p = ModelParams::drift(1, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(barenblatt_value(&p, 1.0, 0.0), 1.0);
        for r in [0.3, 1.0, 4.0] {
            assert_relative_eq!(barenblatt_value(&p, 1.0, r), (1.0 + r * r / 2.0).powi(-2), max_relative = 1e-14);
        }
    }

    #[test]
    fn barenblatt_tail_ratio() {
        let p = ModelParams::drift(2, 3.0, 0.8, 1.0).unwrap();
        let q = p.q();
        let r = 1e4_f64;
        let tail = ((1.0 - q) / q).powf(1.0 / (q - 1.0)) * (r.powf(3.0) / 3.0).powf(1.0 / (q - 1.0));
        assert_relative_eq!(barenblatt_value(&p, 1.0, r) / tail, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn barenblatt_monotone_in_r_and_h() {
        let p = ModelParams::drift(3, 2.0, 0.8, 1.0).unwrap();
        let g = build_grid(3, 10.0, 200).unwrap();
        let a = barenblatt_profile(&p, 1.0, &g).unwrap();
        let b = barenblatt_profile(&p, 1.5, &g).unwrap();
        assert!(a.density().windows(2).all(|w| w[0] > w[1]));
        assert!(a.density().iter().zip(b.density()).all(|(x, y)| x > y));
    }

    #[test]
    fn h_star_round_trip() {
        let g = build_grid(1, 4000.0, 32768).unwrap();
        let probe = ModelParams::drift(1, 2.0, 0.5, 1.0).unwrap();
        let m = barenblatt_profile(&probe, 1.0, &g).unwrap().total_mass();
        let p = probe.with_mass(m).unwrap();
        let s = solve_h_star(&p, &g).unwrap();
        assert!((s.constant - 1.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
        assert_relative_eq!(s.profile.total_mass(), m, max_relative = 1e-12);
        // Against the full-space mass π/√2 the truncation error is ≈ 8/(3R³).
        let p = probe.with_mass(PI / 2f64.sqrt()).unwrap();
        let s = solve_h_star(&p, &g).unwrap();
        assert!((s.constant - 1.0).abs() < 1e-8, "h = {}", s.constant);
    }

    #[test]
    fn h_star_decreases_with_mass() {
        let g = build_grid(2, 30.0, 600).unwrap();
        let p = ModelParams::drift(2, 2.0, 0.8, 1.0).unwrap();
        let h1 = solve_h_star(&p, &g).unwrap().constant;
        let h2 = solve_h_star(&p.with_mass(2.0).unwrap(), &g).unwrap().constant;
        assert!(h2 < h1);
    }

    #[test]
    fn lambda2_constant_value() {
        let c = lambda2_constant(1, 0.5).unwrap();
        assert_relative_eq!(c, (PI / 2f64.sqrt()).powf(2.0 / 3.0), max_relative = 1e-13);
        assert!((c - 1.702511).abs() < 1e-6);
    }

    #[test]
    fn meanfield_lambda2_is_normalized_and_consistent() {
        let g = build_grid(1, 60.0, 1024).unwrap();
        let p = ModelParams::mean_field(1, 2.0, 0.7).unwrap();
        let s = meanfield_lambda2(&p, &g).unwrap();
        assert!((s.profile.total_mass() - 1.0).abs() < 1e-6);
        assert!(s.residual < 1e-6);
        let k = KernelMatrix::assemble(&g, 2.0, 64).unwrap();
        let v = virial_residual(&s, &k).unwrap();
        assert!(v.pressure.gap < 1e-4, "{v:?}");
        assert!(v.multiplier.gap < 1e-4, "{v:?}");
        assert!(v.combined.gap < 1e-4, "{v:?}");
    }

    #[test]
    fn fixed_point_recovers_lambda2_closed_form() {
        let g = build_grid(1, 40.0, 400).unwrap();
        let p = ModelParams::mean_field(1, 2.0, 0.75).unwrap();
        let k = KernelMatrix::assemble(&g, 2.0, 64).unwrap();
        let fp = meanfield_fixed_point(&p, &k, FixedPointConfig::default()).unwrap();
        let exact = meanfield_lambda2(&p, &g).unwrap();
        let scale = exact.density()[0];
        for (a, b) in fp.density().iter().zip(exact.density()) {
            assert!((a - b).abs() < 1e-4 * scale, "{a} vs {b}");
        }
        assert!(fp.density().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn wrong_variant_is_rejected() {
        let g = build_grid(1, 10.0, 10).unwrap();
        let p = ModelParams::mean_field(1, 2.0, 0.7).unwrap();
        assert!(matches!(solve_h_star(&p, &g), Err(Error::WrongVariant(_))));
        let d = ModelParams::drift(1, 2.0, 0.7, 1.0).unwrap();
        assert!(matches!(meanfield_lambda2(&d, &g), Err(Error::WrongVariant(_))));
    }
}
