//! Discrete check of the weighted integration-by-parts identity
//!
//! `∫|∇(α(w)φ)|² N ℳ = ∫α'(w)²|∇w|² N^{2q−1} ℳ + 1/(1−q) ∫α(w)²|∇φ|² N ℳ − ∫α(w)² N^q ℳ₁`
//!
//! with `N = N_{h_*}` and `φ = N^{q−1}`.

use super::weights::{weight_m1, weight_m_interfaces};
use crate::error::{Error, Result};
use crate::params::Variant;
use crate::stationary::StationaryState;

/// The maps `h_k(x) = (x^{k−1} − 1)/(k − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMap {
    H(f64),
}

impl AlphaMap {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            AlphaMap::H(1.0) => x.ln(),
            AlphaMap::H(k) => (x.powf(k - 1.0) - 1.0) / (k - 1.0),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            AlphaMap::H(k) => x.powf(k - 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpTerms {
    pub lhs: f64,
    pub gradient_term: f64,
    pub weight_term: f64,
    pub curvature_term: f64,
    pub residual: f64,
}

/// Evaluates both sides on interface/cell quadrature; `residual = |LHS − RHS|/(1 + |LHS|)`.
pub fn ibp_identity_residual(w: &[f64], alpha: AlphaMap, s: &StationaryState) -> Result<IbpTerms> {
    let p = &s.params;
    p.require(Variant::Drift)?;
    let grid = s.grid();
    let m = grid.cells();
    if w.len() != m {
        return Err(Error::GridMismatch);
    }
    if w.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidProfile("w must be positive".into()));
    }
    let q = p.q();
    let n = s.density();
    let dr = grid.dr();
    let areas = grid.areas();
    let weight = weight_m_interfaces(grid, p.lambda());
    let phi: Vec<f64> = n.iter().map(|x| x.powf(q - 1.0)).collect();
    let a: Vec<f64> = w.iter().map(|x| alpha.value(*x)).collect();

    let (mut lhs, mut grad, mut wt) = (0.0, 0.0, 0.0);
    for i in 0..m.saturating_sub(1) {
        let measure = weight[i] * areas[i + 1] * dr;
        let n_if = 0.5 * (n[i] + n[i + 1]);
        let w_if = 0.5 * (w[i] + w[i + 1]);
        let a_if = alpha.value(w_if);
        let d_total = (a[i + 1] * phi[i + 1] - a[i] * phi[i]) / dr;
        let dw = (w[i + 1] - w[i]) / dr;
        let dphi = (phi[i + 1] - phi[i]) / dr;
        let ap = alpha.derivative(w_if);
        lhs += d_total * d_total * n_if * measure;
        grad += ap * ap * dw * dw * n_if.powf(2.0 * q - 1.0) * measure;
        wt += a_if * a_if * dphi * dphi * n_if * measure;
    }
    wt /= 1.0 - q;
    let curvature: f64 = (0..m)
        .map(|i| {
            let r = grid.centers()[i];
            a[i] * a[i] * n[i].powf(q) * weight_m1(r, p.lambda(), p.dim(), q) * grid.volumes()[i]
        })
        .sum();
    let rhs = grad + wt - curvature;
    Ok(IbpTerms { lhs, gradient_term: grad, weight_term: wt, curvature_term: curvature, residual: (lhs - rhs).abs() / (1.0 + lhs.abs()) })
}
