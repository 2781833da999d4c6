//! Cell-averaged densities on a shared grid.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use std::sync::Arc;

/// Nonnegative cell averages on a [`RadialGrid`], optionally carrying an
/// `ℓ = 1` harmonic amplitude used only by perturbation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Arc<RadialGrid>,
    density: Vec<f64>,
    mode1: Option<Vec<f64>>,
}

impl Profile {
    pub fn new(grid: Arc<RadialGrid>, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.cells() {
            return Err(Error::InvalidProfile(format!("{} values for {} cells", density.len(), grid.cells())));
        }
        if let Some(i) = density.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidProfile(format!("density[{i}] = {}", density[i])));
        }
        Ok(Self { grid, density, mode1: None })
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let density = grid.centers().iter().map(|&r| f(r)).collect();
        Self::new(grid, density)
    }

    pub fn with_mode1(mut self, mode1: Vec<f64>) -> Result<Self> {
        if mode1.len() != self.density.len() {
            return Err(Error::InvalidProfile("mode1 length differs from density".into()));
        }
        self.mode1 = Some(mode1);
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn mode1(&self) -> Option<&[f64]> {
        self.mode1.as_deref()
    }

    pub fn into_density(self) -> Vec<f64> {
        self.density
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    /// `Σ_i u_i V_i`.
    pub fn total_mass(&self) -> f64 {
        self.grid.integrate(&self.density)
    }

    /// `Σ_i r_i^p u_i V_i`.
    pub fn radial_moment(&self, p: f64) -> f64 {
        if p == 0.0 {
            return self.total_mass();
        }
        self.density.iter().zip(self.grid.centers()).zip(self.grid.volumes()).map(|((u, r), v)| r.powf(p) * u * v).sum()
    }

    /// Multiplies the density by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.density.iter().map(|d| c * d).collect())
    }

    /// Rescales to the requested total mass.
    pub fn with_total_mass(&self, mass: f64) -> Result<Self> {
        let m = self.total_mass();
        if m <= 0.0 {
            return Err(Error::ZeroProfile);
        }
        self.scaled(mass / m)
    }

    pub fn same_grid(&self, other: &Profile) -> bool {
        self.grid.same_as(&other.grid)
    }

    pub(crate) fn check_grid(&self, grid: &RadialGrid) -> Result<()> {
        if self.grid.same_as(grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `Σ |u_i − w_i| V_i`.
    pub fn l1_distance(&self, other: &Profile) -> Result<f64> {
        other.check_grid(&self.grid)?;
        Ok(self.density.iter().zip(&other.density).zip(self.grid.volumes()).map(|((a, b), v)| (a - b).abs() * v).sum())
    }
}

pub fn total_mass(u: &Profile) -> f64 {
    u.total_mass()
}

pub fn radial_moment(u: &Profile, p: f64) -> f64 {
    u.radial_moment(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_densities() {
        let g = build_grid(1, 10.0, 10).unwrap();
        let u = Profile::from_fn(g, |_| 1.0).unwrap();
        assert_relative_eq!(u.total_mass(), 20.0, epsilon = 1e-13);

        let g = build_grid(2, 1.0, 64).unwrap();
        let u = Profile::from_fn(g, |_| 1.0).unwrap();
        assert_relative_eq!(u.total_mass(), PI, max_relative = 1e-14);
        assert_eq!(u.radial_moment(0.0), u.total_mass());
    }

    #[test]
    fn disk_second_moment_converges() {
        // Midpoint error of 2π∫r³dr is 2π·Σ(dr³ r/2)… second order.
        let g = build_grid(2, 1.0, 2000).unwrap();
        let u = Profile::from_fn(g, |_| 1.0).unwrap();
        assert_relative_eq!(u.radial_moment(2.0), PI / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn barenblatt_mass() {
        let g = build_grid(1, 200.0, 4096).unwrap();
        let u = Profile::from_fn(g, |r| (1.0 + r * r / 2.0).powi(-2)).unwrap();
        // Tail beyond R=200 is ≈ 8/(3R³) ≈ 3e-7.
        let exact = PI / 2f64.sqrt();
        assert!((u.total_mass() - exact).abs() < 1e-6);
    }

    #[test]
    fn rejects_negative_and_wrong_length() {
        let g = build_grid(1, 1.0, 3).unwrap();
        assert!(Profile::new(g.clone(), vec![1.0, -1.0, 0.0]).is_err());
        assert!(Profile::new(g.clone(), vec![1.0]).is_err());
        let u = Profile::new(g, vec![1.0, 1.0, 1.0]).unwrap();
        assert!(u.with_mode1(vec![0.0]).is_err());
    }

    proptest! {
        #[test]
        fn mass_and_moments_are_linear(
            a in proptest::collection::vec(0.0f64..10.0, 16),
            b in proptest::collection::vec(0.0f64..10.0, 16),
            c in 0.0f64..5.0,
            p in 0.0f64..4.0,
        ) {
            let g = build_grid(3, 2.0, 16).unwrap();
            let ua = Profile::new(g.clone(), a.clone()).unwrap();
            let ub = Profile::new(g.clone(), b.clone()).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| c * x + y).collect();
            let us = Profile::new(g, sum).unwrap();
            let lhs = us.radial_moment(p);
            let rhs = c * ua.radial_moment(p) + ub.radial_moment(p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }
}
