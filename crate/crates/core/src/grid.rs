//! Uniform radial grids on a truncated ball `[0, R]`.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Surface area `S_N = 2π^{N/2}/Γ(N/2)` of the unit sphere in `R^N`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            let n = dim as f64;
            2.0 * PI.powf(0.5 * n) / libm::tgamma(0.5 * n)
        }
    }
}

/// Cell geometry for radially-symmetric quadrature. Cell `i` spans
/// `[interfaces[i], interfaces[i+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    dr: f64,
    interfaces: Vec<f64>,
    centers: Vec<f64>,
    volumes: Vec<f64>,
    areas: Vec<f64>,
}

/// Uniform grid with `cells` cells on `[0, radius]` in dimension `dim`.
pub fn build_grid(dim: usize, radius: f64, cells: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::uniform(dim, radius, cells).map(Arc::new)
}

impl RadialGrid {
    pub fn uniform(dim: usize, radius: f64, cells: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadGridSpec("dimension must be at least 1".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::BadGridSpec(format!("radius must be positive, got {radius}")));
        }
        if cells == 0 {
            return Err(Error::BadGridSpec("need at least one cell".into()));
        }
        let dr = radius / cells as f64;
        let mut interfaces: Vec<f64> = (0..=cells).map(|k| k as f64 * radius / cells as f64).collect();
        interfaces[cells] = radius;
        let s_n = unit_sphere_area(dim);
        let n = dim as i32;
        let centers = interfaces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let volumes = interfaces.windows(2).map(|w| s_n / dim as f64 * (w[1].powi(n) - w[0].powi(n))).collect();
        let areas = interfaces.iter().map(|&r| s_n * r.powi(n - 1)).collect();
        Ok(Self { dim, radius, dr, interfaces, centers, volumes, areas })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    /// Uniform cell width.
    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn interfaces(&self) -> &[f64] {
        &self.interfaces
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Sphere areas at the interfaces (length `cells + 1`).
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn sphere_area(&self) -> f64 {
        unit_sphere_area(self.dim)
    }

    /// Closed-form volume `(S_N/N) R^N` of the truncated ball.
    pub fn ball_volume(&self) -> f64 {
        self.sphere_area() / self.dim as f64 * self.radius.powi(self.dim as i32)
    }

    /// Midpoint quadrature `Σ f_i V_i`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.volumes).map(|(a, v)| a * v).sum()
    }

    /// `Σ fl(f_i V_i)` summed with Neumaier compensation.
    pub fn integrate_compensated(&self, f: &[f64]) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for (a, v) in f.iter().zip(&self.volumes) {
            let x = a * v;
            let t = sum + x;
            comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
            sum = t;
        }
        sum + comp
    }

    /// Same geometry, regardless of allocation.
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other) || (self.dim == other.dim && self.radius == other.radius && self.cells() == other.cells())
    }
}
