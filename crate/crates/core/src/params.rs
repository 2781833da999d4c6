//! Model parameters and their admissible ranges.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Which of the two equations is being modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// External drift `∇·(n ∇V_λ)`.
    Drift,
    /// Mean-field drift `∇·(ρ ∇(V_λ * ρ))`, unit mass.
    MeanField,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Drift => f.write_str("drift"),
            Variant::MeanField => f.write_str("meanfield"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "drift" => Ok(Variant::Drift),
            "meanfield" | "mean-field" | "mean_field" => Ok(Variant::MeanField),
            other => Err(Error::Parse(format!("unknown variant `{other}`"))),
        }
    }
}

/// Validated parameters `(N, λ, q, variant, m)` together with the derived
/// exponents `α`, `q_*` and `q_#`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    dim: usize,
    lambda: f64,
    q: f64,
    variant: Variant,
    mass: f64,
    alpha: f64,
    q_star: f64,
    q_sharp: f64,
}

/// `α = (2N − q(2N+λ)) / (N(1−q))`, written as `2 − qλ/(N(1−q))`.
pub fn alpha(dim: usize, lambda: f64, q: f64) -> f64 {
    2.0 - q * lambda / (dim as f64 * (1.0 - q))
}

/// Finite-mass threshold `N/(N+λ)` of the drift equation.
pub fn finite_mass_threshold(dim: usize, lambda: f64) -> f64 {
    let n = dim as f64;
    n / (n + lambda)
}

/// Lower bound `q_*(N, λ)` of the mean-field regime without a Dirac part.
pub fn q_star(dim: usize, lambda: f64) -> f64 {
    let n = dim as f64;
    if lambda == 2.0 {
        n / (n + 2.0)
    } else {
        2.0 * n / (2.0 * n + lambda)
    }
}

/// `q_# = (N−2−λ)/(N−2)` for `N ≥ 3`, zero otherwise.
pub fn q_sharp(dim: usize, lambda: f64) -> f64 {
    if dim >= 3 {
        let n = dim as f64;
        (n - 2.0 - lambda) / (n - 2.0)
    } else {
        0.0
    }
}

impl ModelParams {
    /// Validates raw parameters. The mean-field variant always carries unit mass
    /// and ignores `mass`.
    pub fn new(dim: usize, lambda: f64, q: f64, variant: Variant, mass: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadGridSpec("dimension must be at least 1".into()));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::LambdaOutOfRange { lambda, reason: "must be positive" });
        }
        if variant == Variant::MeanField && lambda < 2.0 {
            return Err(Error::LambdaOutOfRange { lambda, reason: "mean-field variant requires lambda >= 2" });
        }
        let lower = match variant {
            Variant::Drift => finite_mass_threshold(dim, lambda),
            Variant::MeanField => q_star(dim, lambda),
        };
        if !(q.is_finite() && q > lower && q < 1.0) {
            return Err(Error::QOutOfRange { q, lower });
        }
        let mass = match variant {
            Variant::Drift => mass,
            Variant::MeanField => 1.0,
        };
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::MassMismatch { left: mass, right: 0.0 });
        }
        Ok(Self { dim, lambda, q, variant, mass, alpha: alpha(dim, lambda, q), q_star: q_star(dim, lambda), q_sharp: q_sharp(dim, lambda) })
    }

    pub fn drift(dim: usize, lambda: f64, q: f64, mass: f64) -> Result<Self> {
        Self::new(dim, lambda, q, Variant::Drift, mass)
    }

    pub fn mean_field(dim: usize, lambda: f64, q: f64) -> Result<Self> {
        Self::new(dim, lambda, q, Variant::MeanField, 1.0)
    }

    /// Same parameters with a different target mass (drift only; mean-field
    /// stays at unit mass).
    pub fn with_mass(&self, mass: f64) -> Result<Self> {
        Self::new(self.dim, self.lambda, self.q, self.variant, mass)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    pub fn q_sharp(&self) -> f64 {
        self.q_sharp
    }

    /// External potential `V_λ(r) = r^λ / λ`.
    pub fn potential(&self, r: f64) -> f64 {
        r.powf(self.lambda) / self.lambda
    }

    pub(crate) fn require(&self, variant: Variant) -> Result<()> {
        if self.variant == variant {
            Ok(())
        } else {
            Err(Error::WrongVariant(match variant {
                Variant::Drift => "drift",
                Variant::MeanField => "mean-field",
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_example_has_zero_alpha() {
        let p = ModelParams::drift(1, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(p.alpha(), 0.0);
    }

    #[test]
    fn drift_rejects_finite_mass_threshold() {
        // q = N/(N+λ) = 0.4 is exactly where α reaches 1.
        let err = ModelParams::drift(2, 3.0, 0.4, 1.0).unwrap_err();
        assert!(matches!(err, Error::QOutOfRange { .. }));
        assert!((alpha(2, 3.0, 0.4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mean_field_rejects_dirac_boundary() {
        let err = ModelParams::mean_field(3, 4.0, 0.6).unwrap_err();
        assert!(matches!(err, Error::QOutOfRange { .. }));
        assert!(ModelParams::mean_field(3, 4.0, 0.61).is_ok());
    }

    #[test]
    fn mean_field_rejects_small_lambda() {
        let err = ModelParams::mean_field(1, 1.5, 0.9).unwrap_err();
        assert!(matches!(err, Error::LambdaOutOfRange { .. }));
        assert!(matches!(ModelParams::drift(1, 0.0, 0.9, 1.0).unwrap_err(), Error::LambdaOutOfRange { .. }));
    }

    #[test]
    fn rejects_q_at_or_above_one() {
        assert!(ModelParams::drift(1, 2.0, 1.0, 1.0).is_err());
        assert!(ModelParams::mean_field(1, 2.0, 1.2).is_err());
    }

    #[test]
    fn alpha_endpoints_are_exact() {
        // N=2, λ=2: N/(N+λ) = 1/2 gives α = 1.
        assert_eq!(alpha(2, 2.0, 0.5), 1.0);
        // N=2, λ=4: 2N/(2N+λ) = 1/2 gives α = 0.
        assert_eq!(alpha(2, 4.0, 0.5), 0.0);
    }

    #[test]
    fn alpha_decreases_in_q() {
        let (n, lambda) = (3, 2.5);
        let lo = finite_mass_threshold(n, lambda);
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let q = lo + (1.0 - lo) * k as f64 / 100.0;
            let a = alpha(n, lambda, q);
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn derived_thresholds() {
        assert_eq!(q_star(1, 2.0), 1.0 / 3.0);
        assert_eq!(q_star(2, 4.0), 0.5);
        assert_eq!(q_sharp(2, 3.0), 0.0);
        assert_eq!(q_sharp(5, 1.0), 2.0 / 3.0);
        let p = ModelParams::mean_field(2, 3.0, 0.8).unwrap();
        assert_eq!(p.mass(), 1.0);
        assert_eq!(p.q_star(), 4.0 / 7.0);
    }

    #[test]
    fn variant_round_trips_through_text() {
        for v in [Variant::Drift, Variant::MeanField] {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
    }
}
