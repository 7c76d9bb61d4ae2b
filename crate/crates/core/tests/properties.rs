use epsqueeze::params::{
    angular, baseline, drive_amplitude_from_power, power_from_drive_amplitude, thermal_occupation,
    Drive, GHZ,
};
use epsqueeze::spectra::squeezing_db;
use epsqueeze::steady;
use proptest::prelude::*;

proptest! {
    #[test]
    fn occupation_grows_with_temperature(nu_ghz in 0.1f64..1000.0, t1 in 0.01f64..500.0, dt in 0.0f64..500.0) {
        let w = angular(nu_ghz * GHZ);
        let cold = thermal_occupation(w, t1).unwrap();
        let hot = thermal_occupation(w, t1 + dt).unwrap();
        prop_assert!(cold >= 0.0);
        prop_assert!(hot >= cold);
    }

    #[test]
    fn occupation_falls_with_frequency(nu_ghz in 0.1f64..1000.0, factor in 1.0f64..10.0, t in 0.01f64..500.0) {
        let low = thermal_occupation(angular(nu_ghz * GHZ), t).unwrap();
        let high = thermal_occupation(angular(nu_ghz * factor * GHZ), t).unwrap();
        prop_assert!(high <= low);
    }

    #[test]
    fn drive_power_round_trip(power_mw in 1e-6f64..100.0, kappa_ghz in 0.1f64..200.0, nu_thz in 100.0f64..1000.0) {
        let kappa = angular(kappa_ghz * GHZ);
        let omega_0 = angular(nu_thz * 1e12);
        let p = power_mw * 1e-3;
        let amplitude = drive_amplitude_from_power(p, kappa, omega_0).unwrap();
        let back = power_from_drive_amplitude(amplitude, kappa, omega_0).unwrap();
        prop_assert!(((back - p) / p).abs() < 1e-12);
    }

    #[test]
    fn amplitudes_scale_linearly_with_drive(scale in 0.01f64..100.0) {
        let mut p = baseline();
        let omega = steady::resolve_drive(&p).unwrap();
        p.drive = Drive::Amplitude(omega);
        let reference = steady::solve(&p).unwrap();
        p.drive = Drive::Amplitude(scale * omega);
        let scaled = steady::solve(&p).unwrap();
        for (x, y) in [(reference.a_ss, scaled.a_ss), (reference.d_ss, scaled.d_ss)] {
            prop_assert!((y - x * scale).norm() <= 1e-12 * (x * scale).norm());
        }
    }

    #[test]
    fn decibel_map_is_decreasing(s in 1e-6f64..10.0, ds in 1e-6f64..10.0) {
        prop_assert!(squeezing_db(s).unwrap() > squeezing_db(s + ds).unwrap());
    }
}

#[test]
fn decibel_reference_points() {
    assert_eq!(squeezing_db(0.5).unwrap(), 0.0);
    assert!((squeezing_db(0.05).unwrap() - 10.0).abs() < 1e-12);
    assert!(squeezing_db(-0.1).is_err());
}

#[test]
fn phonon_occupation_oracle() {
    // 1 / (exp(ħω/kT) − 1) at 20 GHz and 4 K, evaluated at 50 digits
    let n = thermal_occupation(angular(20.0 * GHZ), 4.0).unwrap();
    assert!((n - 3.687301508700263).abs() < 1e-12);
}
