//! Least-squares decay fits for diagnostic time series.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayKind {
    /// `y ≈ κ e^{−μ t}`.
    Exponential,
    /// `y ≈ κ (1 + t)^{−μ}`.
    Algebraic,
}

impl fmt::Display for DecayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecayKind::Exponential => "exponential",
            DecayKind::Algebraic => "algebraic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub kind: DecayKind,
    /// `μ`; positive for a decaying series.
    pub rate: f64,
    /// `κ`.
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Which samples enter a fit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitWindow {
    /// Explicit time range; `None` keeps the last half of the series.
    pub range: Option<(f64, f64)>,
    /// Values at or below this floor are dropped (discretization floor).
    pub floor: f64,
}

pub const MIN_SAMPLES: usize = 10;

/// Level below which quadratic diagnostics (relative entropy, weighted `L²`)
/// measured against `s` carry no information: `10²` times the larger of the
/// squared stationary residual and machine epsilon, in units of `∫s^q`.
pub fn noise_floor(s: &crate::stationary::StationaryState) -> f64 {
    let q = s.params.q();
    let scale = s.grid().integrate(&s.density().iter().map(|x| x.powf(q)).collect::<Vec<_>>());
    1e2 * f64::max(s.residual * s.residual, f64::EPSILON) * scale
}

fn select(t: &[f64], y: &[f64], window: &FitWindow) -> Result<Vec<(f64, f64)>> {
    if t.len() != y.len() {
        return Err(Error::Parse("time and value columns differ in length".into()));
    }
    // Drop samples at the floor first; "last half" then refers to what is left.
    let above: Vec<(f64, f64)> =
        t.iter().zip(y).filter(|(_, y)| !(window.floor > 0.0 && **y <= window.floor)).map(|(a, b)| (*a, *b)).collect();
    let kept: Vec<(f64, f64)> = match window.range {
        Some((a, b)) => above.into_iter().filter(|(t, _)| *t >= a && *t <= b).collect(),
        None => {
            let skip = above.len() / 2;
            above.into_iter().skip(skip).collect()
        }
    };
    if kept.iter().any(|(_, y)| !(*y > 0.0)) {
        return Err(Error::NonPositiveValues);
    }
    if kept.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: kept.len() });
    }
    Ok(kept)
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r²)`.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    (intercept, slope, r2)
}

pub fn fit_decay(t: &[f64], y: &[f64], kind: DecayKind, window: &FitWindow) -> Result<DecayFit> {
    let pts = select(t, y, window)?;
    let xs: Vec<f64> = pts
        .iter()
        .map(|(t, _)| match kind {
            DecayKind::Exponential => *t,
            DecayKind::Algebraic => (1.0 + t).ln(),
        })
        .collect();
    let ys: Vec<f64> = pts.iter().map(|(_, y)| y.ln()).collect();
    let (a, b, r2) = least_squares(&xs, &ys);
    Ok(DecayFit { kind, rate: -b, prefactor: a.exp(), r_squared: r2, window: (pts[0].0, pts[pts.len() - 1].0), samples: pts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub kind: DecayKind,
    pub exponential: DecayFit,
    pub algebraic: DecayFit,
}

impl Classification {
    pub fn best(&self) -> &DecayFit {
        match self.kind {
            DecayKind::Exponential => &self.exponential,
            DecayKind::Algebraic => &self.algebraic,
        }
    }

    /// `r²` of the chosen model minus that of the other.
    pub fn gap(&self) -> f64 {
        (self.exponential.r_squared - self.algebraic.r_squared).abs()
    }
}

/// Fits both models on the same window and keeps the one with larger `r²`.
pub fn classify_decay(t: &[f64], y: &[f64], window: &FitWindow) -> Result<Classification> {
    let exponential = fit_decay(t, y, DecayKind::Exponential, window)?;
    let algebraic = fit_decay(t, y, DecayKind::Algebraic, window)?;
    let kind = if exponential.r_squared >= algebraic.r_squared { DecayKind::Exponential } else { DecayKind::Algebraic };
    Ok(Classification { kind, exponential, algebraic })
}
