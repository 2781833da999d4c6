//! Radially-symmetric numerics for two fast-diffusion equations:
//!
//! * the external-drift equation `n_t = Δ(n^q) + ∇·(n ∇V_λ)`, and
//! * the mean-field equation `ρ_t = Δ(ρ^q) + ∇·(ρ ∇(V_λ * ρ))`,
//!
//! with `V_λ(x) = |x|^λ / λ` and `q ∈ (0, 1)`.
//!
//! The crate builds the stationary states of both equations, integrates them
//! in time with a mass-conservative, positivity-preserving upwind finite-volume
//! scheme written in gradient-flow (velocity) form, and evaluates the free
//! energies, Fisher informations, relative entropies, linearized quadratic forms
//! and functional-inequality constants used to study their large-time behavior.
//!
//! Everything lives on a uniform [`RadialGrid`]; densities are cell averages and
//! integrals are midpoint sums over cells.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod inequalities;
pub mod initial;
pub mod io;
pub mod kernels;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod rates;
pub mod stationary;
pub mod transport;

pub use diagnostics::{DiagnosticsRecord, Perturbation};
pub use error::{Error, Result};
pub use evolve::{RunResult, SolverConfig};
pub use grid::{build_grid, unit_sphere_area, RadialGrid};
pub use inequalities::EigenEstimate;
pub use kernels::{KernelMatrix, ModeOneKernel};
pub use params::{ModelParams, Variant};
pub use profile::Profile;
pub use rates::{DecayFit, DecayKind};
pub use stationary::StationaryState;
