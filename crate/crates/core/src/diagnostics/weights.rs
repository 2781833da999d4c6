//! Drift weights `ℳ` and `ℳ₁`.

use crate::grid::RadialGrid;
use crate::params::ModelParams;

/// `ℳ(r) = 1/(1 + r^{λ−2})`, and `1` when `λ = 2`.
pub fn weight_m(r: f64, lambda: f64) -> f64 {
    if lambda == 2.0 {
        1.0
    } else {
        1.0 / (1.0 + r.powf(lambda - 2.0))
    }
}

/// `ℳ₁ = ∇·(ℳ ∇N_{h_*}^{q−1})`, which is independent of `h_*`.
pub fn weight_m1(r: f64, lambda: f64, dim: usize, q: f64) -> f64 {
    let n = dim as f64;
    let c = (1.0 - q) / q;
    if lambda == 2.0 {
        return n * c;
    }
    let a = r.powf(lambda - 2.0);
    c * (n * a * a + (lambda + n - 2.0) * a) / ((1.0 + a) * (1.0 + a))
}

/// `(ℳ(r_i), ℳ₁(r_i))` at the cell centers.
pub fn weights_m(grid: &RadialGrid, p: &ModelParams) -> (Vec<f64>, Vec<f64>) {
    let r = grid.centers();
    (r.iter().map(|&x| weight_m(x, p.lambda())).collect(), r.iter().map(|&x| weight_m1(x, p.lambda(), p.dim(), p.q())).collect())
}

/// `ℳ` at the interior interfaces `r_{i+1/2}`, `i = 0..M−1`.
pub(crate) fn weight_m_interfaces(grid: &RadialGrid, lambda: f64) -> Vec<f64> {
    let r = grid.interfaces();
    r[1..r.len() - 1].iter().map(|&x| weight_m(x, lambda)).collect()
}
