use std::f64::consts::PI;

use epsqueeze::figures::figure_preset;
use epsqueeze::params::{baseline, freeze_drive_power};
use epsqueeze::spectra::nsd_output;
use epsqueeze::sweep::{run_sweep, Axis, ParamPath, PhaseChoice, Quantity, SweepSpec};
use epsqueeze::{build_system, steady};

#[test]
fn single_point_matches_direct_evaluation() {
    let base = baseline();
    let mut spec = SweepSpec::new(
        base.clone(),
        vec![Axis::list(ParamPath::Omega, &[0.93])],
        vec![Quantity::Nsd, Quantity::Cooperativity],
    );
    spec.phi = PhaseChoice::Fixed(0.75 * PI);
    let r = run_sweep(&spec).unwrap();

    let op = steady::solve(&base).unwrap();
    let sys = build_system(&op, &base).unwrap().into_stable(0.0).unwrap();
    let direct = nsd_output(&sys, 0.93 * base.omega_b, 0.75 * PI).unwrap();
    assert_eq!(r.values[0][0], Some(direct));
    assert_eq!(r.values[1][0], Some(steady::cooperativity(&op, &base).unwrap()));
}

#[test]
fn squeezing_grows_with_cooperativity() {
    let preset = figure_preset("fig3a").unwrap();
    let r = run_sweep(&preset.panels[0].spec).unwrap();
    let c = r.column(Quantity::Cooperativity).unwrap();
    let db = r.column(Quantity::MaxDb).unwrap();
    assert!(r.stable.iter().all(|&s| s));
    for k in 1..r.len() {
        assert!(c[k].unwrap() > c[k - 1].unwrap());
        assert!(db[k].unwrap() >= db[k - 1].unwrap(), "dB drops at point {k}");
    }
    // the full-coupling end of the sweep is the baseline operating point
    assert!((c[r.len() - 1].unwrap() - 32_000.0).abs() < 1e-6);
}

#[test]
fn fixed_power_sweep_keeps_power() {
    let frozen = freeze_drive_power(&baseline()).unwrap();
    let mut spec = SweepSpec::new(
        baseline(),
        vec![Axis::list(ParamPath::Gad, &[20.0])],
        vec![Quantity::PhotonNumber],
    );
    spec.drive = epsqueeze::sweep::DriveConvention::FixedPower;
    let r = run_sweep(&spec).unwrap();
    let direct = steady::solve(&frozen).unwrap().photon_number();
    assert!((r.values[0][0].unwrap() - direct).abs() <= 1e-9 * direct);
}

#[test]
fn unstable_points_report_only_the_eigenvalue() {
    let mut spec = SweepSpec::new(
        baseline(),
        vec![Axis::list(ParamPath::DeltaDEff, &[-0.1, 0.3])],
        vec![Quantity::Cooperativity, Quantity::MaxRealEig],
    );
    spec.drive = epsqueeze::sweep::DriveConvention::AsGiven;
    let r = run_sweep(&spec).unwrap();
    assert_eq!(r.stable, vec![false, true]);
    assert_eq!(r.values[0][0], None);
    assert!(r.values[1][0].unwrap() >= 0.0);
    assert!(r.values[0][1].is_some());
}
