//! Hardy–Poincaré constants, the Muckenhoupt bound, the reverse HLS quotient
//! and positivity of the constrained interaction form.

use crate::diagnostics::weight_m;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::initial::smooth_bump;
use crate::kernels::{KernelMatrix, ModeOneKernel};
use crate::params::ModelParams;
use crate::profile::Profile;
use crate::stationary::StationaryState;
use rand::Rng;

/// `𝒜_{q,N} = (Nq − 2q − N + 4)² / (8q(1−q))`.
///
/// Defined for `q ∈ (0, 1)` when `N ≤ 2` and for `q ∈ (max{(N−4)/(N−2), 0}, 1)` when `N ≥ 3`.
pub fn hp_constant_formula(dim: usize, q: f64) -> Result<f64> {
    let n = dim as f64;
    let lower = if dim >= 3 { ((n - 4.0) / (n - 2.0)).max(0.0) } else { 0.0 };
    if !(q > lower && q < 1.0) {
        return Err(Error::QOutOfRange { q, lower });
    }
    let base = n * q - 2.0 * q - n + 4.0;
    Ok(base * base / (8.0 * q * (1.0 - q)))
}

/// Smallest nonzero eigenvalue of the weighted Hardy–Poincaré problem.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    /// `C` in `Φ₁[f] ≤ C Φ₂[f]`, i.e. `1/(2q·rayleigh)`.
    pub constant: f64,
    /// `min ∫|∇f|² N ℳ / ∫f² N^{2−q}` over `∫f N^{2−q} = 0`.
    pub rayleigh: f64,
    pub grid_size: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Minimizer `f*` (normalized in the weighted `L²` norm).
    pub minimizer: Vec<f64>,
}

pub const HP_TOL: f64 = 1e-10;
pub const HP_MAX_ITER: usize = 500;

/// Inverse power iteration on `K f = μ B f`, deflating the constant mode.
/// `K` is the interface stiffness `Σ s_{i+1/2} ℳ_{i+1/2} A_{i+1/2} (Δf/Δr)² Δr`,
/// `B = diag(s_i^{2−q} V_i)`.
pub fn hp_estimate(s: &StationaryState) -> Result<EigenEstimate> {
    let grid = s.grid();
    let m = grid.cells();
    if m < 3 {
        return Err(Error::DegenerateWeight("need at least three cells"));
    }
    let q = s.params.q();
    let w = s.density();
    if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::DegenerateWeight("weight must be positive"));
    }
    let dr = grid.dr();
    let lambda = s.params.lambda();
    let c: Vec<f64> = (0..m - 1)
        .map(|i| {
            let r = grid.interfaces()[i + 1];
            0.5 * (w[i] + w[i + 1]) * weight_m(r, lambda) * grid.areas()[i + 1] / dr
        })
        .collect();
    let b: Vec<f64> = w.iter().zip(grid.volumes()).map(|(x, v)| x.powf(2.0 - q) * v).collect();
    let b_total: f64 = b.iter().sum();
    let project = |x: &mut [f64]| {
        let mean = x.iter().zip(&b).map(|(a, b)| a * b).sum::<f64>() / b_total;
        for v in x.iter_mut() {
            *v -= mean;
        }
    };
    let b_norm = |x: &[f64]| x.iter().zip(&b).map(|(a, b)| a * a * b).sum::<f64>().sqrt();
    let stiffness = |x: &[f64]| (0..m - 1).map(|i| c[i] * (x[i + 1] - x[i]).powi(2)).sum::<f64>();

    let mut y: Vec<f64> = grid.centers().iter().map(|r| r * r).collect();
    project(&mut y);
    let n0 = b_norm(&y);
    y.iter_mut().for_each(|v| *v /= n0);
    let mut mu = stiffness(&y);
    for it in 1..=HP_MAX_ITER {
        let rhs: Vec<f64> = y.iter().zip(&b).map(|(a, b)| a * b).collect();
        let mut x = solve_grounded(&c, &rhs);
        project(&mut x);
        let nx = b_norm(&x);
        if !(nx.is_finite() && nx > 0.0) {
            return Err(Error::DegenerateWeight("iteration collapsed"));
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let next = stiffness(&x);
        y = x;
        if (next - mu).abs() <= HP_TOL * next.abs() {
            return Ok(EigenEstimate {
                constant: 1.0 / (2.0 * q * next),
                rayleigh: next,
                grid_size: m,
                converged: true,
                iterations: it,
                minimizer: y,
            });
        }
        mu = next;
    }
    Err(Error::NoConvergence { iterations: HP_MAX_ITER, residual: mu })
}

/// Solves the Neumann Laplacian `K x = rhs` with `x₀ = 0` (rows `1..M`) by the Thomas algorithm.
fn solve_grounded(c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = rhs.len();
    // Row i (1 ≤ i < M): −c_{i−1} x_{i−1} + (c_{i−1} + c_i) x_i − c_i x_{i+1} = rhs_i, c_{M−1} = 0.
    let n = m - 1;
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut d = vec![0.0; n];
    for k in 0..n {
        let i = k + 1;
        let right = if i < m - 1 { c[i] } else { 0.0 };
        diag[k] = c[i - 1] + right;
        upper[k] = -right;
        lower[k] = -c[i - 1];
        d[k] = rhs[i];
    }
    for k in 1..n {
        let f = lower[k] / diag[k - 1];
        diag[k] -= f * upper[k - 1];
        d[k] -= f * d[k - 1];
    }
    let mut x = vec![0.0; m];
    x[n] = d[n - 1] / diag[n - 1];
    for k in (0..n - 1).rev() {
        x[k + 1] = (d[k] - upper[k] * x[k + 2]) / diag[k];
    }
    x
}

/// `B = sup_x μ([x, ∞)) ∫₀^x 1/ν`, over the interior interfaces, for densities
/// `μ`, `ν` with respect to `dr` given at the cell centers.
pub fn muckenhoupt_b(mu: &[f64], nu: &[f64], grid: &RadialGrid) -> Result<f64> {
    let m = grid.cells();
    if mu.len() != m || nu.len() != m {
        return Err(Error::GridMismatch);
    }
    if nu.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::DegenerateWeight("nu must be positive"));
    }
    let dr = grid.dr();
    let mut tail: Vec<f64> = vec![0.0; m + 1];
    for i in (0..m).rev() {
        tail[i] = tail[i + 1] + mu[i] * dr;
    }
    let mut inverse = 0.0;
    let mut best: f64 = 0.0;
    for k in 1..m {
        inverse += dr / nu[k - 1];
        best = best.max(tail[k] * inverse);
    }
    Ok(best)
}

/// One-dimensional radial weights of the Hardy–Poincaré problem for `s`:
/// `μ = s^{2−q} S_N r^{N−1}` and `ν = s ℳ S_N r^{N−1}`.
pub fn hp_weights(s: &StationaryState) -> (Vec<f64>, Vec<f64>) {
    let q = s.params.q();
    let grid = s.grid();
    let sn = grid.sphere_area();
    let n = grid.dim() as i32;
    let r = grid.centers();
    let mu = s.density().iter().zip(r).map(|(x, r)| x.powf(2.0 - q) * sn * r.powi(n - 1)).collect();
    let nu = s.density().iter().zip(r).map(|(x, r)| x * weight_m(*r, s.params.lambda()) * sn * r.powi(n - 1)).collect();
    (mu, nu)
}

/// `J[u] = ∬|x−y|^λ u u / (m^α (∫u^q)^{(2−α)/q})`.
pub fn rhls_quotient(u: &Profile, p: &ModelParams, kernel: &KernelMatrix) -> Result<f64> {
    if kernel.lambda() != p.lambda() {
        return Err(Error::LambdaOutOfRange { lambda: kernel.lambda(), reason: "kernel exponent differs from model" });
    }
    let mass = u.total_mass();
    if !(mass > 0.0) {
        return Err(Error::ZeroProfile);
    }
    let interaction = kernel.interaction_energy(u, u)?;
    quotient(u, p, interaction)
}

/// `J[u]` for `λ = 2` without a kernel: for radial data `∬|x−y|² u u = 2 m ∫|x|² u`.
/// Linear cost in `M`, so it suits the very large domains needed by slowly decaying tails.
pub fn rhls_quotient_lambda2(u: &Profile, p: &ModelParams) -> Result<f64> {
    if p.lambda() != 2.0 {
        return Err(Error::LambdaOutOfRange { lambda: p.lambda(), reason: "moment form needs lambda = 2" });
    }
    let mass = u.total_mass();
    if !(mass > 0.0) {
        return Err(Error::ZeroProfile);
    }
    let interaction = 2.0 * mass * u.radial_moment(2.0);
    quotient(u, p, interaction)
}

fn quotient(u: &Profile, p: &ModelParams, interaction: f64) -> Result<f64> {
    let q = p.q();
    let alpha = p.alpha();
    let lq = u.grid().integrate(&u.density().iter().map(|x| x.powf(q)).collect::<Vec<_>>());
    Ok(interaction / (u.total_mass().powf(alpha) * lq.powf((2.0 - alpha) / q)))
}

/// Outcome of random mass-preserving perturbations `ρ(1 + εg)` of a candidate minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityReport {
    pub trials: usize,
    pub violations: usize,
    /// `min (J[ρ(1+εg)] − J[ρ]) / J[ρ]`.
    pub worst_relative: f64,
    pub base: f64,
}

/// Draws smooth radial bumps `g` with `∫gρ = 0`, clipped so `ρ(1+εg) > 0`,
/// and counts how often the quotient drops below `J[ρ]`.
/// With `kernel = None` the `λ = 2` moment form is used.
pub fn rhls_minimality<R: Rng>(
    rho: &Profile,
    p: &ModelParams,
    kernel: Option<&KernelMatrix>,
    rng: &mut R,
    trials: usize,
    eps: f64,
    reach: f64,
) -> Result<MinimalityReport> {
    let eval = |u: &Profile| match kernel {
        Some(k) => rhls_quotient(u, p, k),
        None => rhls_quotient_lambda2(u, p),
    };
    let grid = rho.grid().clone();
    let base = eval(rho)?;
    let w = rho.density();
    let mass = rho.total_mass();
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let mut g = smooth_bump(&grid, rng, 3, reach);
        let mean = grid.integrate(&g.iter().zip(w).map(|(a, b)| a * b).collect::<Vec<_>>()) / mass;
        let floor = -0.5 / eps;
        g.iter_mut().for_each(|x| *x = (*x - mean).max(floor));
        let u = Profile::new(grid.clone(), w.iter().zip(&g).map(|(a, b)| a * (1.0 + eps * b)).collect())?;
        let rel = (eval(&u)? - base) / base;
        worst = worst.min(rel);
        if rel < 0.0 {
            violations += 1;
        }
    }
    Ok(MinimalityReport { trials, violations, worst_relative: worst, base })
}

/// `∬|x−y|^λ f(x) g(y)` for `f = f₀ + f₁ x₁/|x|`, `g = g₀ + g₁ x₁/|x|`.
pub fn interaction_form(f: (&[f64], &[f64]), g: (&[f64], &[f64]), kernel: &KernelMatrix, mode1: &ModeOneKernel) -> f64 {
    kernel.bilinear(f.0, g.0) + mode1.bilinear(f.1, g.1)
}

fn constraint_scale(a: &[f64], grid: &RadialGrid) -> f64 {
    a.iter().zip(grid.volumes()).map(|(x, v)| x.abs() * v).sum::<f64>().max(1.0)
}

/// Zero mass: `|∫f₀| ≤ 10⁻¹⁰`; zero first moment: `|∫x₁ f| = |Σ f₁ r V|/N ≤ 10⁻¹⁰`
/// (both relative to `max(1, ∫|·|)`).
pub fn check_constraints(f0: &[f64], f1: &[f64], grid: &RadialGrid) -> Result<()> {
    let mass = grid.integrate_compensated(f0);
    if mass.abs() > 1e-10 * constraint_scale(f0, grid) {
        return Err(Error::ConstraintViolated(format!("zero mass: ∫f0 = {mass:e}")));
    }
    let n = grid.dim() as f64;
    let rf1: Vec<f64> = f1.iter().zip(grid.centers()).map(|(a, r)| a * r).collect();
    let moment = grid.integrate_compensated(&rf1) / n;
    if moment.abs() > 1e-10 * constraint_scale(&rf1, grid) {
        return Err(Error::ConstraintViolated(format!("zero first moment: ∫x f = {moment:e}")));
    }
    Ok(())
}

/// Value of the interaction form on a constrained pair.
pub fn interaction_positivity(f0: &[f64], f1: &[f64], kernel: &KernelMatrix, mode1: &ModeOneKernel) -> Result<f64> {
    let grid = kernel.grid();
    if f0.len() != grid.cells() || f1.len() != grid.cells() || !mode1.grid().same_as(grid) {
        return Err(Error::GridMismatch);
    }
    check_constraints(f0, f1, grid)?;
    Ok(interaction_form((f0, f1), (f0, f1), kernel, mode1))
}

/// Removes mass from `f₀` and first moment from `f₁` along a Gaussian profile.
/// Two passes with compensated moments leave residuals at the roundoff of the entries.
pub fn project_constraints(f0: &mut [f64], f1: &mut [f64], grid: &RadialGrid, width: f64) {
    let r = grid.centers();
    let phi: Vec<f64> = r.iter().map(|r| (-(r / width).powi(2)).exp()).collect();
    let rphi: Vec<f64> = phi.iter().zip(r).map(|(p, r)| p * r * r).collect();
    let (phi_mass, rphi_mass) = (grid.integrate_compensated(&phi), grid.integrate_compensated(&rphi));
    for _ in 0..2 {
        let c0 = grid.integrate_compensated(f0) / phi_mass;
        for (a, p) in f0.iter_mut().zip(&phi) {
            *a -= c0 * p;
        }
        let rf1: Vec<f64> = f1.iter().zip(r).map(|(a, r)| a * r).collect();
        let c1 = grid.integrate_compensated(&rf1) / rphi_mass;
        for ((a, p), r) in f1.iter_mut().zip(&phi).zip(r) {
            *a -= c1 * p * r;
        }
    }
}

/// Draws a constrained pair: smooth bumps in both modes, the `ℓ = 1` part
/// vanishing linearly at the origin.
pub fn random_constrained_pair<R: Rng>(grid: &RadialGrid, rng: &mut R, reach: f64) -> (Vec<f64>, Vec<f64>) {
    let mut f0 = smooth_bump(grid, rng, 3, reach);
    let mut f1: Vec<f64> = smooth_bump(grid, rng, 3, reach).iter().zip(grid.centers()).map(|(a, r)| a * r).collect();
    project_constraints(&mut f0, &mut f1, grid, 0.5 * reach);
    (f0, f1)
}

/// Outcome of a randomized search for negative values of the constrained form.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivitySearch {
    pub trials: usize,
    /// Smallest raw form value among the random trials.
    pub min_value: f64,
    /// Smallest value of `form / ∫(f₀² + f₁²/N)` after coordinate descent.
    pub min_normalized: f64,
    pub witness: (Vec<f64>, Vec<f64>),
}

/// Random constrained pairs followed by coordinate descent on a small
/// Gaussian basis around the best pair.
pub fn positivity_search<R: Rng>(
    kernel: &KernelMatrix,
    mode1: &ModeOneKernel,
    rng: &mut R,
    trials: usize,
    reach: f64,
) -> Result<PositivitySearch> {
    let grid = kernel.grid().clone();
    let n = grid.dim() as f64;
    let norm = |f0: &[f64], f1: &[f64]| -> f64 { grid.integrate(&f0.iter().zip(f1).map(|(a, b)| a * a + b * b / n).collect::<Vec<_>>()) };
    let mut min_value = f64::INFINITY;
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for _ in 0..trials {
        let (f0, f1) = random_constrained_pair(&grid, rng, reach);
        let v = interaction_positivity(&f0, &f1, kernel, mode1)?;
        min_value = min_value.min(v);
        let nv = v / norm(&f0, &f1);
        if best.as_ref().is_none_or(|b| nv < b.0) {
            best = Some((nv, f0, f1));
        }
    }
    let (mut best_val, mut f0, mut f1) = best.ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    // Coordinate descent: add ± multiples of fixed constrained directions.
    let centers: Vec<f64> = (1..=6).map(|k| reach * k as f64 / 6.0).collect();
    let directions: Vec<(Vec<f64>, Vec<f64>)> = centers
        .iter()
        .flat_map(|&c| {
            let bump: Vec<f64> = grid.centers().iter().map(|r| (-((r - c) / (0.25 * reach)).powi(2)).exp()).collect();
            let mut a0 = bump.clone();
            let mut a1 = vec![0.0; bump.len()];
            project_constraints(&mut a0, &mut a1, &grid, 0.5 * reach);
            let mut b0 = vec![0.0; bump.len()];
            let mut b1: Vec<f64> = bump.iter().zip(grid.centers()).map(|(b, r)| b * r).collect();
            project_constraints(&mut b0, &mut b1, &grid, 0.5 * reach);
            [(a0, a1), (b0, b1)]
        })
        .collect();
    let mut step = 0.5;
    for _ in 0..30 {
        let mut improved = false;
        for (d0, d1) in &directions {
            for sign in [1.0, -1.0] {
                let c0: Vec<f64> = f0.iter().zip(d0).map(|(a, b)| a + sign * step * b).collect();
                let c1: Vec<f64> = f1.iter().zip(d1).map(|(a, b)| a + sign * step * b).collect();
                let v = interaction_form((&c0, &c1), (&c0, &c1), kernel, mode1) / norm(&c0, &c1);
                if v < best_val {
                    best_val = v;
                    f0 = c0;
                    f1 = c1;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(PositivitySearch { trials, min_value, min_normalized: best_val, witness: (f0, f1) })
}
