//! Explicit upwind finite-volume integration in gradient-flow form
//! `u_t = ∇·(u ∇ξ)`, `ξ = q/(q−1) u^{q−1} + V`.

use crate::diagnostics::{free_energy_with, record, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::kernels::KernelMatrix;
use crate::params::ModelParams;
use crate::profile::Profile;
use crate::stationary::StationaryState;
use crate::transport::confinement;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt_init: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub entropy_guard: bool,
    /// Upper bound on the step; `None` leaves growth unbounded.
    pub dt_max: Option<f64>,
    /// Stop after this many accepted steps even if `t_end` is not reached.
    pub max_steps: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt_init: 1e-4, cfl_safety: 0.9, t_end: 1.0, snapshot_every: 0.1, entropy_guard: true, dt_max: None, max_steps: None }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt_init > 0.0
            && self.cfl_safety > 0.0
            && self.cfl_safety < 1.0
            && self.t_end >= 0.0
            && self.snapshot_every > 0.0
            && self.dt_max.is_none_or(|d| d > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Parse(format!("invalid solver configuration {self:?}")))
        }
    }
}

const GROWTH_AFTER: usize = 50;
const GROWTH: f64 = 1.2;
const DT_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_profile: Profile,
    pub series: Vec<DiagnosticsRecord>,
    /// Profiles at the snapshot times of `series`.
    pub snapshots: Vec<Profile>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_time: f64,
    /// Largest relative deviation of the mass from its initial value over all accepted steps.
    pub max_mass_drift: f64,
    /// Smallest density over all accepted steps.
    pub min_density: f64,
    /// Largest `(F_new − F_old)/|F_old|` over accepted steps (negative when F always decreased).
    pub max_energy_increase: f64,
}

impl RunResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", DiagnosticsRecord::CSV_HEADER)?;
        for r in &self.series {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

/// Mutable state of one trajectory.
struct Trajectory {
    density: Vec<f64>,
    potential: Vec<f64>,
    energy: f64,
}

/// Outcome of one trial step on a trajectory.
struct Trial {
    density: Vec<f64>,
    potential: Vec<f64>,
    energy: f64,
}

/// Largest step allowed by the positivity/monotonicity restriction
/// `dt · d_i ≤ cfl_safety`, where `d_i` is the diagonal rate of the
/// linearized update of cell `i`. Also returns the interface fluxes.
fn fluxes_and_limit(density: &[f64], potential: &[f64], grid: &RadialGrid, q: f64) -> (Vec<f64>, Vec<f64>) {
    let m = density.len();
    let dr = grid.dr();
    let areas = grid.areas();
    let c = q / (q - 1.0);
    let pw: Vec<f64> = density.iter().map(|u| u.powf(q - 1.0)).collect();
    let mut flux = vec![0.0; m + 1];
    let mut rate = vec![0.0; m];
    for j in 0..m.saturating_sub(1) {
        let xi_l = c * pw[j] + potential[j];
        let xi_r = c * pw[j + 1] + potential[j + 1];
        let v = -(xi_r - xi_l) / dr;
        let up = if v >= 0.0 { density[j] } else { density[j + 1] };
        let a = areas[j + 1];
        flux[j + 1] = a * up * v;
        // d(outflow)/du for the two adjacent cells.
        rate[j] += a * (v.max(0.0) + up * q * pw[j] / density[j] / dr);
        rate[j + 1] += a * ((-v).max(0.0) + up * q * pw[j + 1] / density[j + 1] / dr);
    }
    for (r, v) in rate.iter_mut().zip(grid.volumes()) {
        *r /= v;
    }
    (flux, rate)
}

fn euler_update(density: &[f64], flux: &[f64], grid: &RadialGrid, dt: f64) -> Result<Vec<f64>> {
    let out: Vec<f64> = density.iter().zip(grid.volumes()).enumerate().map(|(i, (u, v))| u - dt * (flux[i + 1] - flux[i]) / v).collect();
    if out.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::NonFiniteState);
    }
    Ok(out)
}

/// Largest stable step for `u` (the positivity restriction with `cfl_safety`).
pub fn max_stable_dt(u: &Profile, p: &ModelParams, kernel: Option<&KernelMatrix>, cfl_safety: f64) -> Result<f64> {
    let pot = confinement(u.density(), u.grid(), p, kernel)?;
    let (_, rate) = fluxes_and_limit(u.density(), &pot, u.grid(), p.q());
    let max = rate.iter().copied().fold(0.0, f64::max);
    Ok(if max > 0.0 { cfl_safety / max } else { f64::INFINITY })
}

fn try_step(density: &[f64], potential: &[f64], grid: &RadialGrid, p: &ModelParams, dt: f64, cfl_safety: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::StepTooLarge { dt, limit: 0.0 });
    }
    let (flux, rate) = fluxes_and_limit(density, potential, grid, p.q());
    let max = rate.iter().copied().fold(0.0, f64::max);
    if dt * max > cfl_safety {
        return Err(Error::StepTooLarge { dt, limit: cfl_safety / max });
    }
    euler_update(density, &flux, grid, dt)
}

/// One explicit Euler step with the default safety factor `0.9`.
pub fn step(u: &Profile, p: &ModelParams, kernel: Option<&KernelMatrix>, dt: f64) -> Result<Profile> {
    step_with_safety(u, p, kernel, dt, 0.9)
}

pub fn step_with_safety(u: &Profile, p: &ModelParams, kernel: Option<&KernelMatrix>, dt: f64, cfl_safety: f64) -> Result<Profile> {
    if u.density().iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidProfile("density must be positive".into()));
    }
    let pot = confinement(u.density(), u.grid(), p, kernel)?;
    let next = try_step(u.density(), &pot, u.grid(), p, dt, cfl_safety)?;
    Profile::new(u.grid().clone(), next)
}

/// Interface fluxes `F_{i+1/2}` (length `M + 1`, zero at both ends) of the current state.
pub fn fluxes(u: &Profile, p: &ModelParams, kernel: Option<&KernelMatrix>) -> Result<Vec<f64>> {
    let pot = confinement(u.density(), u.grid(), p, kernel)?;
    Ok(fluxes_and_limit(u.density(), &pot, u.grid(), p.q()).0)
}

/// Integrates one initial datum; see [`run_coupled`].
pub fn run(u0: &Profile, reference: &StationaryState, kernel: Option<&KernelMatrix>, cfg: &SolverConfig) -> Result<RunResult> {
    Ok(run_coupled(std::slice::from_ref(u0), &[reference], kernel, cfg)?.pop().expect("one trajectory"))
}

/// Integrates several initial data with one shared step sequence: a step is
/// accepted only if it is admissible for every trajectory. Sharing the steps
/// makes the scheme's monotonicity (order preservation, `L¹` contraction)
/// directly observable between the runs.
///
/// `references[k]` is the stationary state the diagnostics of trajectory `k`
/// are measured against (ordered data have different masses). All references
/// share the model up to the mass and the grid.
pub fn run_coupled(
    initial: &[Profile],
    references: &[&StationaryState],
    kernel: Option<&KernelMatrix>,
    cfg: &SolverConfig,
) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    if references.len() != initial.len() || initial.is_empty() {
        return Err(Error::Parse(format!("{} initial data but {} references", initial.len(), references.len())));
    }
    let p = &references[0].params;
    let grid = references[0].grid().clone();
    for r in references {
        let q = &r.params;
        if (q.dim(), q.lambda(), q.q(), q.variant()) != (p.dim(), p.lambda(), p.q(), p.variant()) {
            return Err(Error::Parse("references describe different models".into()));
        }
        r.profile.check_grid(&grid)?;
    }
    let vol = grid.volumes();
    let mut states = Vec::with_capacity(initial.len());
    let mut results = Vec::with_capacity(initial.len());
    for (u0, reference) in initial.iter().zip(references) {
        u0.check_grid(&grid)?;
        if u0.density().iter().any(|x| !(*x > 0.0)) {
            return Err(Error::InvalidProfile("initial density must be positive".into()));
        }
        let potential = confinement(u0.density(), &grid, p, kernel)?;
        let energy = free_energy_with(u0.density(), &potential, vol, p);
        states.push(Trajectory { density: u0.density().to_vec(), potential, energy });
        results.push(RunResult {
            final_profile: u0.clone(),
            series: vec![record(0.0, u0, reference, kernel)?],
            snapshots: vec![u0.clone()],
            accepted_steps: 0,
            rejected_steps: 0,
            final_time: 0.0,
            max_mass_drift: 0.0,
            min_density: u0.density().iter().copied().fold(f64::INFINITY, f64::min),
            max_energy_increase: f64::NEG_INFINITY,
        });
    }
    let masses: Vec<f64> = initial.iter().map(|u| u.total_mass()).collect();

    let mut t = 0.0;
    let mut dt = cfg.dt_init;
    if let Some(cap) = cfg.dt_max {
        dt = dt.min(cap);
    }
    let mut streak = 0;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut snapshot_index = 1u64;
    let t_tol = 1e-12 * cfg.snapshot_every.max(cfg.t_end);
    while cfg.t_end - t > t_tol && cfg.max_steps.is_none_or(|n| accepted < n) {
        let next_snapshot = (snapshot_index as f64 * cfg.snapshot_every).min(cfg.t_end);
        let h = dt.min(next_snapshot - t);
        let mut trials = Vec::with_capacity(states.len());
        let mut failure = None;
        for s in &states {
            match try_step(&s.density, &s.potential, &grid, p, h, cfg.cfl_safety) {
                Ok(density) => {
                    let potential = match p.variant() {
                        crate::params::Variant::Drift => s.potential.clone(),
                        crate::params::Variant::MeanField => confinement(&density, &grid, p, kernel)?,
                    };
                    let energy = free_energy_with(&density, &potential, vol, p);
                    if cfg.entropy_guard && energy > s.energy + 1e-12 * s.energy.abs() {
                        failure = Some(Error::NonFiniteState);
                        break;
                    }
                    trials.push(Trial { density, potential, energy });
                }
                Err(e @ (Error::StepTooLarge { .. } | Error::NonFiniteState)) => {
                    failure = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(err) = failure {
            rejected += 1;
            streak = 0;
            dt = 0.5 * h;
            if dt < DT_FLOOR {
                return Err(match err {
                    Error::StepTooLarge { .. } => err,
                    _ => Error::TimeStepUnderflow(dt),
                });
            }
            continue;
        }
        t += h;
        accepted += 1;
        let at_snapshot = (next_snapshot - t).abs() <= t_tol;
        if at_snapshot {
            t = next_snapshot;
            snapshot_index += 1;
        }
        for (((s, trial), (res, m0)), reference) in states.iter_mut().zip(trials).zip(results.iter_mut().zip(&masses)).zip(references) {
            let increase = (trial.energy - s.energy) / s.energy.abs().max(f64::MIN_POSITIVE);
            res.max_energy_increase = res.max_energy_increase.max(increase);
            *s = Trajectory { density: trial.density, potential: trial.potential, energy: trial.energy };
            let mass: f64 = s.density.iter().zip(vol).map(|(u, v)| u * v).sum();
            res.max_mass_drift = res.max_mass_drift.max((mass - m0).abs() / m0);
            res.min_density = res.min_density.min(s.density.iter().copied().fold(f64::INFINITY, f64::min));
            if at_snapshot {
                let u = Profile::new(grid.clone(), s.density.clone())?;
                res.series.push(record(t, &u, reference, kernel)?);
                res.snapshots.push(u);
            }
        }
        streak += 1;
        if streak >= GROWTH_AFTER {
            streak = 0;
            dt *= GROWTH;
        }
        if let Some(cap) = cfg.dt_max {
            dt = dt.min(cap);
        }
    }
    for ((s, res), reference) in states.into_iter().zip(results.iter_mut()).zip(references) {
        let u = Profile::new(grid.clone(), s.density)?;
        if res.series.last().is_none_or(|r| r.t < t) {
            res.series.push(record(t, &u, reference, kernel)?);
            res.snapshots.push(u.clone());
        }
        res.final_profile = u;
        res.accepted_steps = accepted;
        res.rejected_steps = rejected;
        res.final_time = t;
    }
    Ok(results)
}

/// Largest discrepancy between the recorded energy decrease and the Fisher information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationDefect {
    /// `max_k |ΔF/Δt + I(t_k)|`.
    pub max_defect: f64,
    /// `max_k |ΔF/Δt + I(t_k)| / (1 + I(t_k))`.
    pub normalized: f64,
}

pub fn dissipation_check(series: &[DiagnosticsRecord]) -> Result<DissipationDefect> {
    if series.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: series.len() });
    }
    let mut out = DissipationDefect { max_defect: 0.0, normalized: 0.0 };
    for w in series.windows(2) {
        let dt = w[1].t - w[0].t;
        let d = ((w[1].free_energy - w[0].free_energy) / dt + w[0].fisher).abs();
        out.max_defect = out.max_defect.max(d);
        out.normalized = out.normalized.max(d / (1.0 + w[0].fisher));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::stationary::{barenblatt_profile, meanfield_lambda2, solve_h_star};

    fn drift_setup(m: usize) -> StationaryState {
        let g = build_grid(1, 20.0, m).unwrap();
        let p = ModelParams::drift(1, 2.0, 0.7, 1.0).unwrap();
        solve_h_star(&p, &g).unwrap()
    }

    #[test]
    fn barenblatt_is_a_fixed_point() {
        let s = drift_setup(256);
        let dt = 0.5 * max_stable_dt(&s.profile, &s.params, None, 0.9).unwrap();
        let next = step(&s.profile, &s.params, None, dt).unwrap();
        for (a, b) in next.density().iter().zip(s.density()) {
            assert!((a - b).abs() <= 1e-13 * b);
        }
        let f = fluxes(&s.profile, &s.params, None).unwrap();
        assert!(f.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn meanfield_lambda2_nearly_stationary() {
        let g = build_grid(1, 40.0, 1024).unwrap();
        let p = ModelParams::mean_field(1, 2.0, 0.7).unwrap();
        let s = meanfield_lambda2(&p, &g).unwrap();
        let k = KernelMatrix::assemble(&g, 2.0, 64).unwrap();
        let dt = 0.5 * max_stable_dt(&s.profile, &p, Some(&k), 0.9).unwrap();
        let next = step(&s.profile, &p, Some(&k), dt).unwrap();
        assert!(next.l1_distance(&s.profile).unwrap() <= 1e-8);
    }

    #[test]
    fn too_large_step_is_rejected() {
        let s = drift_setup(128);
        let u = barenblatt_profile(&s.params, 0.5, s.grid()).unwrap();
        let limit = max_stable_dt(&u, &s.params, None, 0.9).unwrap();
        assert!(matches!(step(&u, &s.params, None, 2.0 * limit), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn mass_is_conserved_per_step() {
        let s = drift_setup(128);
        let mut u = barenblatt_profile(&s.params, 0.5, s.grid()).unwrap();
        let m0 = u.total_mass();
        for _ in 0..50 {
            let dt = 0.5 * max_stable_dt(&u, &s.params, None, 0.9).unwrap();
            let m = u.total_mass();
            u = step(&u, &s.params, None, dt).unwrap();
            assert!((u.total_mass() - m).abs() <= 1e-14 * m);
        }
        assert!((u.total_mass() - m0).abs() <= 1e-13 * m0);
    }

    #[test]
    fn run_decreases_energy_and_hits_snapshots() {
        let s = drift_setup(128);
        let u0 = barenblatt_profile(&s.params, 0.5, s.grid()).unwrap().with_total_mass(1.0).unwrap();
        let cfg = SolverConfig { dt_init: 1e-3, t_end: 1.0, snapshot_every: 0.25, ..Default::default() };
        let res = run(&u0, &s, None, &cfg).unwrap();
        let times: Vec<f64> = res.series.iter().map(|r| r.t).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(res.series.windows(2).all(|w| w[1].free_energy < w[0].free_energy));
        assert!(res.max_mass_drift < 1e-12);
        assert!(res.min_density > 0.0);
        let d = dissipation_check(&res.series).unwrap();
        assert!(d.normalized.is_finite());
    }

    #[test]
    fn dissipation_needs_two_samples() {
        assert!(matches!(dissipation_check(&[]), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let s = drift_setup(32);
        let cfg = SolverConfig { cfl_safety: 1.5, ..Default::default() };
        assert!(run(&s.profile, &s, None, &cfg).is_err());
    }
}
