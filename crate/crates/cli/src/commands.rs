use crate::args::{EvolveArgs, FitKind, HpArgs, Model, PositivityArgs, RatesArgs, RhlsArgs, StationaryArgs};
use fastdiff::evolve::{run, run_coupled};
use fastdiff::inequalities::{hp_constant_formula, hp_estimate, hp_weights, muckenhoupt_b, positivity_search, rhls_minimality};
use fastdiff::initial::{drift_sandwich, meanfield_sandwich, seeded_rng};
use fastdiff::io::{format_snapshot, parse_snapshot, parse_table};
use fastdiff::kernels::assemble_kernel;
use fastdiff::rates::{classify_decay, fit_decay, FitWindow};
use fastdiff::stationary::{meanfield_fixed_point, meanfield_lambda2, solve_h_star, virial_residual};
use fastdiff::{
    build_grid, DecayKind, DiagnosticsRecord, Error, KernelMatrix, ModeOneKernel, ModelParams, Profile, RadialGrid, Result, SolverConfig,
    StationaryState, Variant,
};
use std::fmt::Display;
use std::path::Path;
use std::sync::Arc;

/// What a command produces: the parameter echo for the manifest, the files to
/// write, and a few headline numbers for the terminal.
#[derive(Debug, Default)]
pub struct Outcome {
    pub params: Vec<(String, String)>,
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub summary: Vec<(String, String)>,
}

impl Outcome {
    fn param(&mut self, k: &str, v: impl Display) {
        self.params.push((k.to_string(), v.to_string()));
    }

    fn say(&mut self, k: &str, v: impl Display) {
        self.summary.push((k.to_string(), v.to_string()));
    }
}

const TAIL_RADII: [f64; 20] = [2., 3., 4., 5., 6., 8., 10., 12., 16., 20., 25., 32., 40., 50., 64., 80., 100., 128., 160., 200.];
const TAIL_TOL: f64 = 1e-10;
const DEFAULT_CELLS: usize = 1024;

/// Smallest radius from a fixed ladder at which the Barenblatt-type tail
/// `((1−q)/q R^λ/λ)^{1/(q−1)} R^N` drops below `1e-10`; 200 when none does.
pub fn tail_radius(dim: usize, lambda: f64, q: f64) -> f64 {
    let a = (1.0 - q) / q;
    let tail = |r: f64| (a * r.powf(lambda) / lambda).powf(1.0 / (q - 1.0)) * r.powi(dim as i32);
    TAIL_RADII.iter().copied().find(|r| tail(*r) <= TAIL_TOL).unwrap_or(200.0)
}

fn grid_for(m: &Model, default_cells: usize, out: &mut Outcome) -> Result<Arc<RadialGrid>> {
    let radius = m.radius.unwrap_or_else(|| tail_radius(m.dim, m.lambda, m.q));
    let cells = m.cells.unwrap_or(default_cells);
    out.param("radius", radius);
    out.param("cells", cells);
    build_grid(m.dim, radius, cells)
}

fn params_for(variant: Variant, m: &Model, mass: Option<f64>, out: &mut Outcome) -> Result<ModelParams> {
    out.param("variant", variant);
    out.param("dim", m.dim);
    out.param("lambda", m.lambda);
    out.param("q", m.q);
    let p = match variant {
        Variant::Drift => ModelParams::drift(m.dim, m.lambda, m.q, mass.unwrap_or(1.0))?,
        Variant::MeanField => {
            if mass.is_some_and(|x| x != 1.0) {
                return Err(Error::Parse("the mean-field state has unit mass; drop --mass".into()));
            }
            ModelParams::mean_field(m.dim, m.lambda, m.q)?
        }
    };
    out.param("mass", p.mass());
    Ok(p)
}

/// Stationary state plus the kernel the mean-field variant needs.
fn stationary_state(p: &ModelParams, grid: &Arc<RadialGrid>) -> Result<(StationaryState, Option<KernelMatrix>)> {
    match p.variant() {
        Variant::Drift => Ok((solve_h_star(p, grid)?, None)),
        Variant::MeanField => {
            let k = assemble_kernel(grid, p.lambda())?;
            let s = if p.lambda() == 2.0 { meanfield_lambda2(p, grid)? } else { meanfield_fixed_point(p, &k, Default::default())? };
            Ok((s, Some(k)))
        }
    }
}

fn e17(x: f64) -> String {
    format!("{x:.17e}")
}

fn csv(header: &[&str], row: &[String]) -> Vec<u8> {
    format!("{}\n{}\n", header.join(","), row.join(",")).into_bytes()
}

pub fn stationary(a: &StationaryArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let p = params_for(a.variant, &a.model, a.mass, &mut out)?;
    let grid = grid_for(&a.model, DEFAULT_CELLS, &mut out)?;
    let (s, kernel) = stationary_state(&p, &grid)?;
    let mut extra = vec![
        ("h_or_C", e17(s.constant)),
        ("potential_constant", e17(s.potential_constant)),
        ("residual", e17(s.residual)),
        ("iterations", s.iterations.to_string()),
    ];
    out.say("h_or_C", e17(s.constant));
    out.say("residual", e17(s.residual));
    if let Some(k) = &kernel {
        let v = virial_residual(&s, k)?;
        let rows = [
            ("pressure", "virial_pressure_gap", v.pressure),
            ("multiplier", "virial_multiplier_gap", v.multiplier),
            ("combined", "virial_combined_gap", v.combined),
        ];
        let mut text = String::from("identity,lhs,rhs,relative_gap\n");
        for (name, key, g) in rows {
            text.push_str(&format!("{name},{},{},{}\n", e17(g.lhs), e17(g.rhs), e17(g.gap)));
            extra.push((key, e17(g.gap)));
        }
        out.say("virial_pressure_gap", e17(v.pressure.gap));
        out.artifacts.push(("virial.csv".into(), text.into_bytes()));
    }
    let snap = format_snapshot(&s.profile, Some(&p), 0.0, &extra);
    out.artifacts.insert(0, ("stationary.txt".into(), snap.into_bytes()));
    Ok(out)
}

fn read_snapshot(path: &Path) -> Result<Profile> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_snapshot(&text)?.profile)
}

pub fn evolve(a: &EvolveArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let p = params_for(a.variant, &a.model, a.mass, &mut out)?;
    let initial = a.initial.as_deref().map(read_snapshot).transpose()?;
    let grid = match &initial {
        Some(u) => {
            let g = u.grid().clone();
            if g.dim() != p.dim() {
                return Err(Error::Parse(format!("initial snapshot has N = {}, expected {}", g.dim(), p.dim())));
            }
            out.param("initial", a.initial.as_ref().unwrap().display());
            out.param("radius", g.radius());
            out.param("cells", g.cells());
            g
        }
        None => grid_for(&a.model, DEFAULT_CELLS, &mut out)?,
    };
    let (s, kernel) = stationary_state(&p, &grid)?;
    let u0 = match initial {
        Some(u) => u,
        None => match p.variant() {
            Variant::Drift => {
                out.param("lower", a.lower);
                out.param("upper", a.upper);
                drift_sandwich(&s, a.lower, a.upper)?
            }
            Variant::MeanField => {
                out.param("delta", a.delta);
                meanfield_sandwich(&s, kernel.as_ref().ok_or(Error::MissingKernel)?, a.delta)?
            }
        },
    };
    let reference_for = |u: &Profile| -> Result<StationaryState> {
        match p.variant() {
            Variant::Drift if (u.total_mass() - s.profile.total_mass()).abs() > 1e-12 * s.profile.total_mass() => {
                solve_h_star(&p.with_mass(u.total_mass())?, &grid)
            }
            _ => Ok(s.clone()),
        }
    };
    let cfg = SolverConfig {
        dt_init: a.dt_init,
        cfl_safety: a.cfl,
        t_end: a.t_end,
        snapshot_every: a.snapshot_every,
        dt_max: a.dt_max,
        max_steps: a.max_steps,
        ..Default::default()
    };
    out.param("t_end", cfg.t_end);
    out.param("snapshot_every", cfg.snapshot_every);
    out.param("dt_init", cfg.dt_init);
    out.param("cfl", cfg.cfl_safety);
    out.param("dt_max", cfg.dt_max.map_or("none".into(), |x| x.to_string()));
    out.param("max_steps", cfg.max_steps.map_or("none".into(), |x| x.to_string()));

    let r0 = reference_for(&u0)?;
    let mut series = String::from(DiagnosticsRecord::CSV_HEADER);
    let result = match &a.compare {
        None => {
            series.push('\n');
            let res = run(&u0, &r0, kernel.as_ref(), &cfg)?;
            for r in &res.series {
                series.push_str(&r.csv_row());
                series.push('\n');
            }
            res
        }
        Some(path) => {
            out.param("compare", path.display());
            let v0 = read_snapshot(path)?;
            if !v0.grid().same_as(&grid) {
                return Err(Error::GridMismatch);
            }
            let r1 = reference_for(&v0)?;
            let mut res = run_coupled(&[u0, v0], &[&r0, &r1], kernel.as_ref(), &cfg)?;
            series.push_str(",l1_distance\n");
            let (first, second) = (&res[0], &res[1]);
            for ((rec, x), y) in first.series.iter().zip(&first.snapshots).zip(&second.snapshots) {
                series.push_str(&format!("{},{}\n", rec.csv_row(), e17(x.l1_distance(y)?)));
            }
            res.swap_remove(0)
        }
    };
    out.say("final_time", e17(result.final_time));
    out.say("accepted_steps", result.accepted_steps);
    out.say("max_mass_drift", e17(result.max_mass_drift));
    out.artifacts.push(("series.csv".into(), series.into_bytes()));
    let snap = format_snapshot(&result.final_profile, Some(&p), result.final_time, &[]);
    out.artifacts.push(("final.txt".into(), snap.into_bytes()));
    Ok(out)
}

pub fn hp(a: &HpArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let p = params_for(a.variant, &a.model, a.mass, &mut out)?;
    let grid = grid_for(&a.model, 2 * DEFAULT_CELLS, &mut out)?;
    let (s, _) = stationary_state(&p, &grid)?;
    let e = hp_estimate(&s)?;
    let (mu, nu) = hp_weights(&s);
    let b = muckenhoupt_b(&mu, &nu, &grid)?;
    // Closed form only for the drift problem with the quadratic potential.
    let formula = match (p.variant(), p.lambda() == 2.0) {
        (Variant::Drift, true) => hp_constant_formula(p.dim(), p.q()).ok(),
        _ => None,
    };
    let opt = |x: Option<f64>| x.map_or(String::new(), e17);
    let header = [
        "variant",
        "dim",
        "lambda",
        "q",
        "mass",
        "radius",
        "cells",
        "rayleigh",
        "constant",
        "poincare",
        "formula_rayleigh",
        "formula_constant",
        "muckenhoupt_b",
        "converged",
        "iterations",
    ];
    let row = [
        p.variant().to_string(),
        p.dim().to_string(),
        e17(p.lambda()),
        e17(p.q()),
        e17(p.mass()),
        e17(grid.radius()),
        grid.cells().to_string(),
        e17(e.rayleigh),
        e17(e.constant),
        e17(1.0 / e.rayleigh),
        opt(formula),
        opt(formula.map(|f| 1.0 / (2.0 * p.q() * f))),
        e17(b),
        e.converged.to_string(),
        e.iterations.to_string(),
    ];
    out.say("rayleigh", e17(e.rayleigh));
    out.say("constant", e17(e.constant));
    if let Some(f) = formula {
        out.say("formula_rayleigh", e17(f));
    }
    out.artifacts.push(("hp.csv".into(), csv(&header, &row)));
    Ok(out)
}

/// `λ = 2` runs through the kernel-free moment form on a long domain unless
/// the grid is given explicitly.
const RHLS_LAMBDA2_GRID: (f64, usize) = (1e5, 2_000_000);

pub fn rhls(a: &RhlsArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let p = params_for(Variant::MeanField, &a.model, None, &mut out)?;
    let lambda2 = p.lambda() == 2.0;
    let mut model = a.model.clone();
    if lambda2 {
        model.radius = model.radius.or(Some(RHLS_LAMBDA2_GRID.0));
        model.cells = model.cells.or(Some(RHLS_LAMBDA2_GRID.1));
    }
    let grid = grid_for(&model, DEFAULT_CELLS, &mut out)?;
    out.param("seed", a.seed);
    out.param("trials", a.trials);
    out.param("eps", a.eps);
    out.param("reach", a.reach);
    if !(a.eps > 0.0 && a.reach > 0.0) {
        return Err(Error::Parse("--eps and --reach must be positive".into()));
    }
    let mut rng = seeded_rng(a.seed);
    let report = if lambda2 {
        let s = meanfield_lambda2(&p, &grid)?;
        rhls_minimality(&s.profile, &p, None, &mut rng, a.trials, a.eps, a.reach)?
    } else {
        let k = assemble_kernel(&grid, p.lambda())?;
        let s = meanfield_fixed_point(&p, &k, Default::default())?;
        rhls_minimality(&s.profile, &p, Some(&k), &mut rng, a.trials, a.eps, a.reach)?
    };
    let header = ["dim", "lambda", "q", "radius", "cells", "seed", "trials", "eps", "reach", "quotient", "violations", "worst_relative"];
    let row = [
        p.dim().to_string(),
        e17(p.lambda()),
        e17(p.q()),
        e17(grid.radius()),
        grid.cells().to_string(),
        a.seed.to_string(),
        a.trials.to_string(),
        e17(a.eps),
        e17(a.reach),
        e17(report.base),
        report.violations.to_string(),
        e17(report.worst_relative),
    ];
    out.say("violations", report.violations);
    out.say("worst_relative", e17(report.worst_relative));
    out.artifacts.push(("rhls.csv".into(), csv(&header, &row)));
    Ok(out)
}

const POSITIVITY_TOL: f64 = 1e-10;

pub fn positivity(a: &PositivityArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.param("dim", a.dim);
    out.param("lambda", a.lambda);
    out.param("radius", a.radius);
    out.param("cells", a.cells);
    out.param("seed", a.seed);
    out.param("trials", a.trials);
    out.param("reach", a.reach);
    let grid = build_grid(a.dim, a.radius, a.cells)?;
    let k = assemble_kernel(&grid, a.lambda)?;
    let k1 = ModeOneKernel::assemble(&grid, a.lambda, k.order())?;
    let search = positivity_search(&k, &k1, &mut seeded_rng(a.seed), a.trials, a.reach)?;
    let negative = search.min_value < -POSITIVITY_TOL || search.min_normalized < -POSITIVITY_TOL;
    // Not finding a negative value outside [2, 4] proves nothing.
    let verdict = match (negative, (2.0..=4.0).contains(&a.lambda)) {
        (true, _) => "negative",
        (false, true) => "nonnegative",
        (false, false) => "inconclusive",
    };
    let header = ["dim", "lambda", "radius", "cells", "seed", "trials", "reach", "min_value", "min_normalized", "verdict"];
    let row = [
        a.dim.to_string(),
        e17(a.lambda),
        e17(a.radius),
        a.cells.to_string(),
        a.seed.to_string(),
        a.trials.to_string(),
        e17(a.reach),
        e17(search.min_value),
        e17(search.min_normalized),
        verdict.to_string(),
    ];
    out.say("min_value", e17(search.min_value));
    out.say("verdict", verdict);
    out.artifacts.push(("positivity.csv".into(), csv(&header, &row)));
    Ok(out)
}

pub fn rates(a: &RatesArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.param("input", a.input.display());
    out.param("column", &a.column);
    out.param("kind", format!("{:?}", a.kind).to_lowercase());
    out.param("floor", a.floor);
    let table = parse_table(&std::fs::read_to_string(&a.input)?)?;
    let t = table.column("t")?;
    let y = table.column(&a.column)?;
    let window = FitWindow { range: a.from.zip(a.to), floor: a.floor };
    if let Some((from, to)) = window.range {
        out.param("from", from);
        out.param("to", to);
    }
    let (fit, other_r2) = match a.kind {
        FitKind::Exponential => (fit_decay(t, y, DecayKind::Exponential, &window)?, None),
        FitKind::Algebraic => (fit_decay(t, y, DecayKind::Algebraic, &window)?, None),
        FitKind::Auto => {
            let c = classify_decay(t, y, &window)?;
            let other = match c.kind {
                DecayKind::Exponential => c.algebraic.r_squared,
                DecayKind::Algebraic => c.exponential.r_squared,
            };
            (*c.best(), Some(other))
        }
    };
    let header = ["column", "kind", "rate", "prefactor", "r_squared", "other_r_squared", "window_start", "window_end", "samples"];
    let row = [
        a.column.clone(),
        fit.kind.to_string(),
        e17(fit.rate),
        e17(fit.prefactor),
        e17(fit.r_squared),
        other_r2.map_or(String::new(), e17),
        e17(fit.window.0),
        e17(fit.window.1),
        fit.samples.to_string(),
    ];
    out.say("kind", fit.kind);
    out.say("rate", e17(fit.rate));
    out.say("r_squared", e17(fit.r_squared));
    out.artifacts.push(("rates.csv".into(), csv(&header, &row)));
    Ok(out)
}
