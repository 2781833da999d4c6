use fastdiff::evolve::*;
use fastdiff::initial::*;
use fastdiff::io::parse_series;
use fastdiff::stationary::*;
use fastdiff::*;

fn drift(m: usize) -> StationaryState {
    let g = build_grid(1, 20.0, m).unwrap();
    solve_h_star(&ModelParams::drift(1, 2.0, 0.7, 1.0).unwrap(), &g).unwrap()
}

#[test]
fn stationary_run_has_no_dissipation() {
    let s = drift(256);
    let res = run(&s.profile, &s, None, &SolverConfig { t_end: 0.2, snapshot_every: 0.05, ..Default::default() }).unwrap();
    let d = dissipation_check(&res.series).unwrap();
    assert!(d.max_defect <= 1e-8);
    assert!(res.series.iter().all(|r| r.fisher <= 1e-8));
}

#[test]
fn adaptive_run_keeps_dissipation_defect_small() {
    let s = drift(512);
    let u0 = drift_sandwich(&s, 0.5, 2.0).unwrap();
    let res = run(&u0, &s, None, &SolverConfig { t_end: 0.5, snapshot_every: 0.01, ..Default::default() }).unwrap();
    let d = dissipation_check(&res.series).unwrap();
    assert!(d.normalized <= 5e-2, "{d:?}");
    assert!(res.series.windows(2).all(|w| w[1].free_energy < w[0].free_energy));
}

#[test]
fn series_survives_csv_round_trip() {
    let s = drift(128);
    let u0 = drift_sandwich(&s, 0.5, 2.0).unwrap();
    let res = run(&u0, &s, None, &SolverConfig { t_end: 0.3, snapshot_every: 0.1, ..Default::default() }).unwrap();
    let mut buf = Vec::new();
    res.write_csv(&mut buf).unwrap();
    let back = parse_series(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back, res.series);
}

#[test]
fn coupled_runs_need_matching_references() {
    let s = drift(128);
    let u0 = drift_sandwich(&s, 0.5, 2.0).unwrap();
    let other = solve_h_star(&ModelParams::drift(1, 2.0, 0.8, 1.0).unwrap(), s.grid()).unwrap();
    let cfg = SolverConfig { t_end: 0.1, ..Default::default() };
    assert!(run_coupled(&[u0.clone(), u0.clone()], &[&s], None, &cfg).is_err());
    assert!(run_coupled(&[u0.clone(), u0.clone()], &[&s, &other], None, &cfg).is_err());
}

#[test]
fn meanfield_run_is_ordered_and_conservative() {
    let g = build_grid(2, 4.0, 64).unwrap();
    let p = ModelParams::mean_field(2, 3.0, 0.8).unwrap();
    let k = KernelMatrix::assemble(&g, 3.0, 32).unwrap();
    let s = meanfield_fixed_point(&p, &k, Default::default()).unwrap();
    let u0 = meanfield_sandwich(&s, &k, 0.2).unwrap();
    let res = run(&u0, &s, Some(&k), &SolverConfig { t_end: 0.2, snapshot_every: 0.02, ..Default::default() }).unwrap();
    assert!(res.max_mass_drift <= 1e-12);
    assert!(res.min_density > 0.0);
    assert!(res.series.windows(2).all(|w| w[1].free_energy <= w[0].free_energy));
    assert!(res.series.last().unwrap().rel_entropy < res.series[0].rel_entropy);
}
