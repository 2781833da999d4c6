//! Sphere-averaged power-law interaction kernels.
//!
//! For radii `r, s` the potential kernel is the spherical mean
//! `k(r, s) = ⟨|r e₁ − s ω|^λ⟩ / λ`, which reduces to a one-dimensional
//! integral in the polar angle with weight `sin^{N−2}θ`. In one dimension the
//! "sphere" is `{−1, +1}` and the mean is a two-point average.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::profile::Profile;
use crate::quadrature::gauss_legendre_on;
use std::sync::Arc;

pub const DEFAULT_ANGULAR_ORDER: usize = 64;

/// Normalized angular rule: `Σ w_k f(cos θ_k) ≈ ⟨f(cos θ)⟩` over the sphere.
#[derive(Debug, Clone)]
pub(crate) struct AngularRule {
    cos: Vec<f64>,
    weight: Vec<f64>,
}

impl AngularRule {
    pub(crate) fn new(dim: usize, order: usize) -> Self {
        if dim == 1 {
            return Self { cos: vec![-1.0, 1.0], weight: vec![0.5, 0.5] };
        }
        let (theta, w) = gauss_legendre_on(order, 0.0, std::f64::consts::PI);
        let raw: Vec<f64> = theta.iter().zip(&w).map(|(t, w)| w * t.sin().powi(dim as i32 - 2)).collect();
        let total: f64 = raw.iter().sum();
        Self { cos: theta.iter().map(|t| t.cos()).collect(), weight: raw.iter().map(|w| w / total).collect() }
    }
}

/// `d2^{λ/2 − 1}`, with integer fast paths.
#[inline]
fn reduced_power(d2: f64, lambda: f64) -> f64 {
    if lambda == 2.0 {
        1.0
    } else if lambda == 4.0 {
        d2
    } else if lambda == 6.0 {
        d2 * d2
    } else {
        d2.powf(0.5 * lambda - 1.0)
    }
}

/// Dense potential and radial-force kernels over the grid centers.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: Arc<RadialGrid>,
    lambda: f64,
    order: usize,
    pot: Vec<f64>,
    force: Vec<f64>,
    rule: AngularRule,
}

pub fn assemble_kernel(grid: &Arc<RadialGrid>, lambda: f64) -> Result<KernelMatrix> {
    KernelMatrix::assemble(grid, lambda, DEFAULT_ANGULAR_ORDER)
}

impl KernelMatrix {
    /// Assembles both kernels with an `order`-point angular rule (ignored for `N = 1`).
    pub fn assemble(grid: &Arc<RadialGrid>, lambda: f64, order: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::LambdaOutOfRange { lambda, reason: "must be positive" });
        }
        if order == 0 {
            return Err(Error::BadGridSpec("angular order must be positive".into()));
        }
        let rule = AngularRule::new(grid.dim(), order);
        let m = grid.cells();
        let r = grid.centers();
        let mut pot = vec![0.0; m * m];
        let mut force = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let (ri, rj) = (r[i], r[j]);
                if lambda == 2.0 {
                    // Exact angular averages; the quadrature sum would cancel `⟨c⟩ = 0` only to roundoff.
                    let k = 0.5 * (ri * ri + rj * rj);
                    pot[i * m + j] = k;
                    pot[j * m + i] = k;
                    force[i * m + j] = ri;
                    force[j * m + i] = rj;
                    continue;
                }
                let (mut k, mut fij, mut fji) = (0.0, 0.0, 0.0);
                for (c, w) in rule.cos.iter().zip(&rule.weight) {
                    let d2 = ri * ri + rj * rj - 2.0 * ri * rj * c;
                    if d2 <= 0.0 {
                        continue;
                    }
                    let p = w * reduced_power(d2, lambda);
                    k += p * d2;
                    fij += p * (ri - rj * c);
                    fji += p * (rj - ri * c);
                }
                k /= lambda;
                if !(k.is_finite() && fij.is_finite() && fji.is_finite()) {
                    return Err(Error::QuadratureFailure { r: ri, s: rj });
                }
                pot[i * m + j] = k;
                pot[j * m + i] = k;
                force[i * m + j] = fij;
                force[j * m + i] = fji;
            }
        }
        Ok(Self { grid: grid.clone(), lambda, order, pot, force, rule })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn potential(&self, i: usize, j: usize) -> f64 {
        self.pot[i * self.grid.cells() + j]
    }

    pub fn force(&self, i: usize, j: usize) -> f64 {
        self.force[i * self.grid.cells() + j]
    }

    /// `W_i = Σ_j k_pot[i][j] a_j V_j` for an arbitrary cell array.
    pub fn apply_potential(&self, a: &[f64]) -> Vec<f64> {
        self.apply(&self.pot, a)
    }

    /// `F_i = Σ_j k_force[i][j] a_j V_j`.
    pub fn apply_force(&self, a: &[f64]) -> Vec<f64> {
        self.apply(&self.force, a)
    }

    fn apply(&self, kernel: &[f64], a: &[f64]) -> Vec<f64> {
        let m = self.grid.cells();
        let mass: Vec<f64> = a.iter().zip(self.grid.volumes()).map(|(x, v)| x * v).collect();
        kernel.chunks_exact(m).map(|row| row.iter().zip(&mass).map(|(k, x)| k * x).sum()).collect()
    }

    /// `λ Σ_ij k_pot[i][j] a_i V_i b_j V_j`, summed over `i ≤ j` so that swapping
    /// the arguments reproduces the value bit for bit.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let m = self.grid.cells();
        let v = self.grid.volumes();
        let av: Vec<f64> = a.iter().zip(v).map(|(x, v)| x * v).collect();
        let bv: Vec<f64> = b.iter().zip(v).map(|(x, v)| x * v).collect();
        let total = symmetric_form(&self.pot, m, &av, &bv);
        self.lambda * total
    }

    pub fn convolve_potential(&self, u: &Profile) -> Result<Vec<f64>> {
        u.check_grid(&self.grid)?;
        Ok(self.apply_potential(u.density()))
    }

    pub fn convolve_force(&self, u: &Profile) -> Result<Vec<f64>> {
        u.check_grid(&self.grid)?;
        Ok(self.apply_force(u.density()))
    }

    /// `∬ |x − y|^λ u(x) w(y) dx dy`.
    pub fn interaction_energy(&self, u: &Profile, w: &Profile) -> Result<f64> {
        u.check_grid(&self.grid)?;
        w.check_grid(&self.grid)?;
        Ok(self.bilinear(u.density(), w.density()))
    }

    /// `(V_λ * a)(r)` at an arbitrary radius, with the same angular rule.
    pub fn potential_at(&self, r: f64, a: &[f64]) -> f64 {
        self.row_at(r, a).0
    }

    /// `∂_r (V_λ * a)(r)` at an arbitrary radius; zero at the origin.
    pub fn force_at(&self, r: f64, a: &[f64]) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        self.row_at(r, a).1
    }

    fn row_at(&self, r: f64, a: &[f64]) -> (f64, f64) {
        let (mut pot, mut force) = (0.0, 0.0);
        for ((s, x), v) in self.grid.centers().iter().zip(a).zip(self.grid.volumes()) {
            let (mut k, mut f) = (0.0, 0.0);
            for (c, w) in self.rule.cos.iter().zip(&self.rule.weight) {
                let d2 = r * r + s * s - 2.0 * r * s * c;
                if d2 <= 0.0 {
                    continue;
                }
                let p = w * reduced_power(d2, self.lambda);
                k += p * d2;
                f += p * (r - s * c);
            }
            pot += k / self.lambda * x * v;
            force += f * x * v;
        }
        (pot, force)
    }
}

/// Kernel of the `ℓ = 1` harmonic: `k₁(r, s) = ⟨|r e₁ − s ω|^λ cos θ⟩ / λ`.
///
/// For `f = f₁(r) x₁/|x|` the interaction form is
/// `∬|x−y|^λ f f = (λ/N) Σ_ij k₁[i][j] f₁_i V_i f₁_j V_j`.
#[derive(Debug, Clone)]
pub struct ModeOneKernel {
    grid: Arc<RadialGrid>,
    lambda: f64,
    pot: Vec<f64>,
}

impl ModeOneKernel {
    pub fn assemble(grid: &Arc<RadialGrid>, lambda: f64, order: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::LambdaOutOfRange { lambda, reason: "must be positive" });
        }
        let rule = AngularRule::new(grid.dim(), order.max(1));
        let m = grid.cells();
        let r = grid.centers();
        let mut pot = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let (ri, rj) = (r[i], r[j]);
                if lambda == 2.0 {
                    let k = -ri * rj / grid.dim() as f64;
                    pot[i * m + j] = k;
                    pot[j * m + i] = k;
                    continue;
                }
                let mut k = 0.0;
                for (c, w) in rule.cos.iter().zip(&rule.weight) {
                    let d2 = ri * ri + rj * rj - 2.0 * ri * rj * c;
                    if d2 <= 0.0 {
                        continue;
                    }
                    k += w * c * reduced_power(d2, lambda) * d2;
                }
                k /= lambda;
                if !k.is_finite() {
                    return Err(Error::QuadratureFailure { r: ri, s: rj });
                }
                pot[i * m + j] = k;
                pot[j * m + i] = k;
            }
        }
        Ok(Self { grid: grid.clone(), lambda, pot })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn potential(&self, i: usize, j: usize) -> f64 {
        self.pot[i * self.grid.cells() + j]
    }

    /// Radial amplitude `U₁_i = Σ_j k₁[i][j] a_j V_j` of `V_λ * (a(r) x₁/|x|)`.
    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        let m = self.grid.cells();
        let mass: Vec<f64> = a.iter().zip(self.grid.volumes()).map(|(x, v)| x * v).collect();
        self.pot.chunks_exact(m).map(|row| row.iter().zip(&mass).map(|(k, x)| k * x).sum()).collect()
    }

    /// `(λ/N) Σ_ij k₁[i][j] a_i V_i b_j V_j`, symmetric bit for bit.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let m = self.grid.cells();
        let v = self.grid.volumes();
        let av: Vec<f64> = a.iter().zip(v).map(|(x, v)| x * v).collect();
        let bv: Vec<f64> = b.iter().zip(v).map(|(x, v)| x * v).collect();
        let total = symmetric_form(&self.pot, m, &av, &bv);
        self.lambda * total / self.grid.dim() as f64
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `Σ_{i≤j} k_ij (a_i b_j + a_j b_i)` (diagonal once), accumulated with
/// error-free products and sums: constrained forms cancel to many digits.
/// Swapping `a` and `b` gives bit-identical results.
fn symmetric_form(pot: &[f64], m: usize, av: &[f64], bv: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..m {
        let row = &pot[i * m..(i + 1) * m];
        let (p, e) = two_prod(av[i], bv[i]);
        let (t, et) = two_prod(row[i], p);
        let (s, es) = two_sum(sum, t);
        sum = s;
        comp += es + (et + row[i] * e);
        for j in i + 1..m {
            let (p1, e1) = two_prod(av[i], bv[j]);
            let (p2, e2) = two_prod(av[j], bv[i]);
            let (x, ex) = two_sum(p1, p2);
            let lo = ex + (e1 + e2);
            let (t, et) = two_prod(row[j], x);
            let (s, es) = two_sum(sum, t);
            sum = s;
            comp += es + (et + row[j] * lo);
        }
    }
    sum + comp
}
