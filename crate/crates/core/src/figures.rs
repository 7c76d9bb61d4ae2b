//! Sweep definitions for each named figure panel.
//!
//! Figure 2 holds |G_db|/2π = 4 GHz fixed; Figures 3 and 4 hold the laser
//! power of that baseline fixed while other parameters change. Panel grids
//! not fixed otherwise use the defaults documented per panel.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::baseline;
use crate::sweep::{Axis, AxisRange, DriveConvention, OmegaWindow, ParamPath, PhaseChoice, Quantity, SweepSpec};

/// One sweep of a figure (most figures have exactly one).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub label: &'static str,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePreset {
    pub name: &'static str,
    pub description: &'static str,
    pub panels: Vec<Panel>,
}

pub const FIGURES: &[(&str, &str)] = &[
    ("fig2a", "S(ω) at φ = 0.9π, 0.75π, 0.6π"),
    ("fig2b", "squeezing (dB) vs ω and φ"),
    ("fig2c", "squeezing (dB) vs ω and Δ̃_a at φ = 0.75π"),
    ("fig2d", "squeezing (dB) vs ω and Δ̃_d at φ = 0.75π, unstable region masked"),
    ("fig3a", "peak squeezing vs cooperativity (g_db from 0 to 20 MHz, fixed power)"),
    ("fig3b", "photon number, exciton number and cooperativity vs g_ad (fixed power)"),
    ("fig3c", "squeezing spectra for g_ad/2π = 20, 15, 10, 8, 6 GHz, optimized φ"),
    ("fig4a", "squeezing spectra for several κ_d at φ = 0.75π"),
    ("fig4b", "squeezing spectra for several κ₁ with κ₂/2π = 2 GHz at φ = 0.75π"),
    ("fig4c", "squeezing spectra for g_ab = 0, 0.1, 0.2 g_db at φ = 0.75π"),
    ("fig4d", "squeezing spectra at several temperatures, g_ad/2π = 20 GHz (main) and 8 GHz (inset)"),
];

/// Exciton decay rates of `fig4a`, GHz.
pub const FIG4A_KAPPA_D_GHZ: [f64; 5] = [2.0, 1.0, 0.5, 0.2, 0.1];
/// External cavity decay rates of `fig4b`, GHz.
pub const FIG4B_KAPPA_1_GHZ: [f64; 6] = [14.0, 18.0, 30.0, 50.0, 80.0, 120.0];
/// Temperatures of `fig4d`, K.
pub const FIG4D_TEMPERATURES: [f64; 4] = [0.4, 4.0, 40.0, 300.0];
/// Exciton-photon couplings of `fig3c`, GHz.
pub const FIG3C_G_AD_GHZ: [f64; 5] = [20.0, 15.0, 10.0, 8.0, 6.0];

const DENSITY_POINTS: usize = 201;
const SPECTRUM_POINTS: usize = 2001;

fn omega_axis(points: usize) -> Axis {
    Axis::linear(ParamPath::Omega, -2.0, 2.0, points)
}

fn spec(axes: Vec<Axis>, quantities: Vec<Quantity>, drive: DriveConvention, phi: PhaseChoice) -> SweepSpec {
    SweepSpec {
        drive,
        phi,
        ..SweepSpec::new(baseline(), axes, quantities)
    }
}

fn single(name: &'static str, description: &'static str, spec: SweepSpec) -> FigurePreset {
    FigurePreset {
        name,
        description,
        panels: vec![Panel { label: "main", spec }],
    }
}

fn spectra_family(path: ParamPath, values: &[f64], phi: PhaseChoice) -> SweepSpec {
    spec(
        vec![omega_axis(SPECTRUM_POINTS), Axis::list(path, values)],
        vec![Quantity::Db, Quantity::Nsd],
        DriveConvention::FixedPower,
        phi,
    )
}

pub fn figure_preset(name: &str) -> Result<FigurePreset> {
    let description = FIGURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, d)| *d)
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            available: FIGURES.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
        })?;
    let phi_075 = PhaseChoice::Fixed(0.75 * PI);
    let preset = match name {
        "fig2a" => single(
            "fig2a",
            description,
            spec(
                vec![omega_axis(SPECTRUM_POINTS), Axis::list(ParamPath::Phi, &[0.9, 0.75, 0.6])],
                vec![Quantity::Nsd, Quantity::Db],
                DriveConvention::AsGiven,
                PhaseChoice::Optimal,
            ),
        ),
        "fig2b" => single(
            "fig2b",
            description,
            spec(
                vec![
                    omega_axis(DENSITY_POINTS),
                    Axis::linear(ParamPath::Phi, 0.0, 1.0, DENSITY_POINTS),
                ],
                vec![Quantity::Db],
                DriveConvention::AsGiven,
                PhaseChoice::Optimal,
            ),
        ),
        "fig2c" => single(
            "fig2c",
            description,
            spec(
                vec![
                    omega_axis(DENSITY_POINTS),
                    Axis::linear(ParamPath::DeltaAEff, 0.0, 1.0, DENSITY_POINTS),
                ],
                vec![Quantity::Db],
                DriveConvention::AsGiven,
                phi_075,
            ),
        ),
        "fig2d" => single(
            "fig2d",
            description,
            spec(
                vec![
                    omega_axis(DENSITY_POINTS),
                    Axis::linear(ParamPath::DeltaDEff, -0.2, 1.0, DENSITY_POINTS),
                ],
                vec![Quantity::Db],
                DriveConvention::AsGiven,
                phi_075,
            ),
        ),
        "fig3a" => {
            let mut s = spec(
                vec![Axis::linear(ParamPath::Gdb, 0.0, 20.0, 41)],
                vec![Quantity::Cooperativity, Quantity::MaxDb, Quantity::OmegaAtMax],
                DriveConvention::FixedPower,
                PhaseChoice::Optimal,
            );
            s.omega_window = OmegaWindow { start: 0.0, end: 2.0, points: 801 };
            single("fig3a", description, s)
        }
        "fig3b" => single(
            "fig3b",
            description,
            spec(
                vec![Axis::linear(ParamPath::Gad, 1.0, 30.0, 117)],
                vec![Quantity::PhotonNumber, Quantity::ExcitonNumber, Quantity::Cooperativity],
                DriveConvention::FixedPower,
                PhaseChoice::Optimal,
            ),
        ),
        "fig3c" => single(
            "fig3c",
            description,
            spectra_family(ParamPath::Gad, &FIG3C_G_AD_GHZ, PhaseChoice::OptimalPerCurve),
        ),
        "fig4a" => single(
            "fig4a",
            description,
            spectra_family(ParamPath::KappaD, &FIG4A_KAPPA_D_GHZ, phi_075),
        ),
        "fig4b" => single(
            "fig4b",
            description,
            spectra_family(ParamPath::Kappa1, &FIG4B_KAPPA_1_GHZ, phi_075),
        ),
        "fig4c" => {
            let g_db_mhz = ParamPath::Gdb.unit().from_si(baseline().g_db, 1.0);
            let values: Vec<f64> = [0.0, 0.1, 0.2]
                .iter()
                .map(|f| (f * g_db_mhz * 1e9).round() / 1e9)
                .collect();
            single("fig4c", description, spectra_family(ParamPath::Gab, &values, phi_075))
        }
        "fig4d" => {
            let mut panels = Vec::new();
            for (label, g_ad) in [("main", 20.0), ("inset", 8.0)] {
                let mut s = spectra_family(
                    ParamPath::Temperature,
                    &FIG4D_TEMPERATURES,
                    PhaseChoice::OptimalPerCurve,
                );
                // the drive power is frozen at the baseline before g_ad changes
                s.base.drive = crate::params::freeze_drive_power(&s.base)?.drive;
                ParamPath::Gad.apply(&mut s.base, g_ad)?;
                s.drive = DriveConvention::AsGiven;
                panels.push(Panel { label, spec: s });
            }
            FigurePreset { name: "fig4d", description, panels }
        }
        _ => unreachable!("name checked against FIGURES"),
    };
    Ok(preset)
}

/// Replace the resolution of every linear axis and the search window, keeping ranges.
pub fn with_resolution(mut preset: FigurePreset, points: usize) -> FigurePreset {
    for panel in &mut preset.panels {
        for axis in &mut panel.spec.axes {
            if let AxisRange::Linear { points: p, .. } = &mut axis.range {
                *p = points;
            }
        }
        panel.spec.omega_window.points = points;
    }
    preset
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_figure_builds() {
        for (name, _) in FIGURES {
            let f = figure_preset(name).unwrap();
            assert!(!f.panels.is_empty());
        }
        assert!(matches!(figure_preset("fig9"), Err(Error::UnknownPreset { .. })));
    }

    #[test]
    fn fig2a_phases() {
        let f = figure_preset("fig2a").unwrap();
        let phi = &f.panels[0].spec.axes[1];
        assert_eq!(phi.path, ParamPath::Phi);
        assert_eq!(phi.range.values().unwrap(), vec![0.9, 0.75, 0.6]);
    }

    #[test]
    fn fig3c_couplings() {
        let f = figure_preset("fig3c").unwrap();
        let s = &f.panels[0].spec;
        assert_eq!(s.axes[1].range.values().unwrap(), FIG3C_G_AD_GHZ.to_vec());
        assert_eq!(s.phi, PhaseChoice::OptimalPerCurve);
        assert_eq!(s.drive, DriveConvention::FixedPower);
    }

    #[test]
    fn fig4_lists() {
        let a = figure_preset("fig4a").unwrap();
        let kd = a.panels[0].spec.axes[1].range.values().unwrap();
        assert!(kd.contains(&2.0) && kd.contains(&0.2));
        let c = figure_preset("fig4c").unwrap();
        let gab = c.panels[0].spec.axes[1].range.values().unwrap();
        assert_eq!(gab, vec![0.0, 2.0, 4.0]);
        let d = figure_preset("fig4d").unwrap();
        assert_eq!(d.panels.len(), 2);
        let g_ad: Vec<f64> = d.panels.iter().map(|p| ParamPath::Gad.unit().from_si(p.spec.base.g_ad, 1.0)).collect();
        assert!((g_ad[0] - 20.0).abs() < 1e-9 && (g_ad[1] - 8.0).abs() < 1e-9);
    }
}
