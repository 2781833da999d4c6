//! Chemical potential `ξ = q/(q−1) u^{q−1} + V` and the upwind interface
//! quantities shared by the solver and the dissipation diagnostics.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::kernels::KernelMatrix;
use crate::params::{ModelParams, Variant};

/// `V_λ(r_i)` at the cell centers.
pub fn external_potential(grid: &RadialGrid, p: &ModelParams) -> Vec<f64> {
    grid.centers().iter().map(|&r| p.potential(r)).collect()
}

/// Confinement potential for the variant: `V_λ` for drift, `V_λ * u` for mean-field.
pub fn confinement(density: &[f64], grid: &RadialGrid, p: &ModelParams, kernel: Option<&KernelMatrix>) -> Result<Vec<f64>> {
    match p.variant() {
        Variant::Drift => Ok(external_potential(grid, p)),
        Variant::MeanField => {
            let k = kernel.ok_or(Error::MissingKernel)?;
            if !k.grid().same_as(grid) {
                return Err(Error::GridMismatch);
            }
            Ok(k.apply_potential(density))
        }
    }
}

/// `ξ_i = q/(q−1) u_i^{q−1} + V_i`.
pub fn chemical_potential(density: &[f64], potential: &[f64], q: f64) -> Vec<f64> {
    let c = q / (q - 1.0);
    density.iter().zip(potential).map(|(u, v)| c * u.powf(q - 1.0) + v).collect()
}

/// Interior interface velocities `v_{i+1/2} = −(ξ_{i+1} − ξ_i)/Δr`, length `M − 1`.
pub fn interface_velocity(xi: &[f64], dr: f64) -> Vec<f64> {
    xi.windows(2).map(|w| -(w[1] - w[0]) / dr).collect()
}

/// Donor-cell density at interior interface `i + 1/2` for velocity `v`.
#[inline]
pub fn upwind(left: f64, right: f64, v: f64) -> f64 {
    if v >= 0.0 {
        left
    } else {
        right
    }
}
