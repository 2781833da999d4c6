//! Quadratic forms of the linearized problems.

use super::stencil::{derivative, Parity};
use super::weights::weight_m_interfaces;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::kernels::{KernelMatrix, ModeOneKernel};
use crate::params::Variant;
use crate::stationary::StationaryState;
use std::sync::Arc;

/// Signed perturbation `g(x) = g₀(r) + g₁(r) x₁/|x|` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    grid: Arc<RadialGrid>,
    pub mode0: Vec<f64>,
    pub mode1: Vec<f64>,
}

impl Perturbation {
    pub fn new(grid: Arc<RadialGrid>, mode0: Vec<f64>, mode1: Vec<f64>) -> Result<Self> {
        let m = grid.cells();
        if mode0.len() != m || mode1.len() != m {
            return Err(Error::InvalidProfile("perturbation length differs from grid".into()));
        }
        if mode0.iter().chain(&mode1).any(|x| !x.is_finite()) {
            return Err(Error::InvalidProfile("non-finite perturbation".into()));
        }
        Ok(Self { grid, mode0, mode1 })
    }

    pub fn radial(grid: Arc<RadialGrid>, mode0: Vec<f64>) -> Result<Self> {
        let m = grid.cells();
        Self::new(grid, mode0, vec![0.0; m])
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// `∫ g₀ w` over the grid.
    pub fn weighted_mean(&self, w: &[f64]) -> f64 {
        self.grid.integrate(&self.mode0.iter().zip(w).map(|(a, b)| a * b).collect::<Vec<_>>())
    }

    /// Subtracts the constant that makes `∫ g₀ w = 0`.
    pub fn project_mean_zero(&mut self, w: &[f64]) {
        let c = self.weighted_mean(w) / self.grid.integrate(w);
        for g in &mut self.mode0 {
            *g -= c;
        }
    }
}

/// `(Φ₁[f], Φ₂[f]) = (½∫f² N^{2−q}, q∫|∇f|² N ℳ)` for a stationary weight `N`.
/// The gradient uses interface differences with the weight averaged across the interface.
pub fn phi_functionals(f: &[f64], s: &StationaryState) -> Result<(f64, f64)> {
    let grid = s.grid();
    if f.len() != grid.cells() {
        return Err(Error::GridMismatch);
    }
    let q = s.params.q();
    let n = s.density();
    let phi1 = 0.5 * f.iter().zip(n).zip(grid.volumes()).map(|((x, w), v)| x * x * w.powf(2.0 - q) * v).sum::<f64>();
    let dr = grid.dr();
    let weight = weight_m_interfaces(grid, s.params.lambda());
    let areas = grid.areas();
    let phi2 = q
        * (0..f.len().saturating_sub(1))
            .map(|i| {
                let d = (f[i + 1] - f[i]) / dr;
                d * d * 0.5 * (n[i] + n[i + 1]) * weight[i] * areas[i + 1] * dr
            })
            .sum::<f64>();
    Ok((phi1, phi2))
}

/// Linearized mean-field forms at `ρ∞` for `λ = 2`.
///
/// `q1` is the second variation of the free energy, `qΨ₁ + ∬V₂(gρ)(gρ)`.
/// `q2_minus` uses `q∇(ρ^{q−1}g) − ∇V₂*(gρ)` inside the square;
/// `q2_limit` uses the plus sign, which is the actual `ε → 0` limit of
/// `𝕀[ρ∞(1+εg)]/ε²`. Residuals are relative to the respective form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiForms {
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
    /// `∬V₂(x−y)(gρ)(x)(gρ)(y)` from the kernels.
    pub interaction: f64,
    /// The same from the moment identity, `−Ψ₃`.
    pub interaction_moment: f64,
    pub q1: f64,
    pub q2_minus: f64,
    pub q2_limit: f64,
    /// `|Q₁ − (Ψ₁ − Ψ₃)| / |Q₁|`.
    pub q1_residual_unscaled: f64,
    /// `|Q₁ − (qΨ₁ − Ψ₃)| / |Q₁|`.
    pub q1_residual_scaled: f64,
    /// `|Q₂ − (Ψ₂ + 3Ψ₃)| / |Q₂|` with the minus sign.
    pub q2_residual_minus: f64,
    /// `|Q₂ − (Ψ₂ − Ψ₃)| / |Q₂|` with the plus sign.
    pub q2_residual_limit: f64,
}

pub fn psi_q_forms(g: &Perturbation, s: &StationaryState, kernel: &KernelMatrix, mode1: &ModeOneKernel) -> Result<PsiForms> {
    let p = &s.params;
    p.require(Variant::MeanField)?;
    if p.lambda() != 2.0 || kernel.lambda() != 2.0 {
        return Err(Error::LambdaOutOfRange { lambda: p.lambda(), reason: "quadratic-form identities need lambda = 2" });
    }
    let grid = s.grid();
    if !(g.grid().same_as(grid) && kernel.grid().same_as(grid) && mode1.grid().same_as(grid)) {
        return Err(Error::GridMismatch);
    }
    let rho = s.density();
    let mean = g.weighted_mean(rho);
    if mean.abs() > 1e-10 {
        return Err(Error::MassNotZero(mean));
    }
    let q = p.q();
    let n = p.dim() as f64;
    let r = grid.centers();
    let vol = grid.volumes();
    let dr = grid.dr();

    let psi1: f64 = (0..rho.len()).map(|i| rho[i].powf(q) * (g.mode0[i] * g.mode0[i] + g.mode1[i] * g.mode1[i] / n) * vol[i]).sum();
    let first_moment: f64 = (0..rho.len()).map(|i| g.mode1[i] * rho[i] * r[i] * vol[i]).sum::<f64>() / n;
    let psi3 = first_moment * first_moment;

    let g0rho: Vec<f64> = g.mode0.iter().zip(rho).map(|(a, b)| a * b).collect();
    let g1rho: Vec<f64> = g.mode1.iter().zip(rho).map(|(a, b)| a * b).collect();
    let interaction = (kernel.bilinear(&g0rho, &g0rho) + mode1.bilinear(&g1rho, &g1rho)) / 2.0;

    let f0: Vec<f64> = g.mode0.iter().zip(rho).map(|(a, b)| b.powf(q - 1.0) * a).collect();
    let f1: Vec<f64> = g.mode1.iter().zip(rho).map(|(a, b)| b.powf(q - 1.0) * a).collect();
    let u0 = kernel.apply_potential(&g0rho);
    let u1 = mode1.apply(&g1rho);
    let df0 = derivative(&f0, dr, Parity::Even);
    let df1 = derivative(&f1, dr, Parity::Odd);
    let du0 = derivative(&u0, dr, Parity::Even);
    let du1 = derivative(&u1, dr, Parity::Odd);

    let gradient_form = |sigma: f64| -> f64 {
        (0..rho.len())
            .map(|i| {
                let a = q * df0[i] + sigma * du0[i];
                let b = q * df1[i] + sigma * du1[i];
                let c = q * f1[i] + sigma * u1[i];
                rho[i] * (a * a + (b * b + (n - 1.0) * c * c / (r[i] * r[i])) / n) * vol[i]
            })
            .sum()
    };
    let psi2 = gradient_form(0.0);
    let q2_minus = gradient_form(-1.0);
    let q2_limit = gradient_form(1.0);
    let q1 = q * psi1 + interaction;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs();
    Ok(PsiForms {
        psi1,
        psi2,
        psi3,
        interaction,
        interaction_moment: -psi3,
        q1,
        q2_minus,
        q2_limit,
        q1_residual_unscaled: rel(q1, psi1 - psi3),
        q1_residual_scaled: rel(q1, q * psi1 - psi3),
        q2_residual_minus: rel(q2_minus, psi2 + 3.0 * psi3),
        q2_residual_limit: rel(q2_limit, psi2 - psi3),
    })
}
