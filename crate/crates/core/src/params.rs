//! Physical constants, the system parameter container and the preset catalogue.
//!
//! Every quantity stored here is in SI angular units (rad/s, K, W). Values
//! quoted as cyclic frequencies (ν = ω/2π) are converted with [`angular`] at
//! the I/O boundary only.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::steady;

/// Fixed CODATA 2018 constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    k_b: 1.380_649e-23,
};

/// Exponent above which the Bose-Einstein occupation is flushed to zero.
pub const OCCUPATION_EXPONENT_GUARD: f64 = 700.0;

/// Cyclic frequency in Hz to angular frequency in rad/s.
pub fn angular(nu_hz: f64) -> f64 {
    TAU * nu_hz
}

/// Angular frequency in rad/s to cyclic frequency in Hz.
pub fn cyclic(omega: f64) -> f64 {
    omega / TAU
}

pub const GHZ: f64 = 1e9;
pub const MHZ: f64 = 1e6;
pub const THZ: f64 = 1e12;

/// How the drive detunings are specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetuningMode {
    /// Effective detunings Δ̃_a, Δ̃_d that already include the phonon-induced shifts.
    Effective { delta_a: f64, delta_d: f64 },
    /// Bare detunings Δ_a = ω_a − ω₀ and Δ_d = ω_d − ω₀; shifts are solved self-consistently.
    Bare { delta_a: f64, delta_d: f64 },
}

/// How the strength of the cavity drive is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Drive {
    /// Drive rate Ω in rad/s.
    Amplitude(f64),
    /// Laser power P in W.
    Power(f64),
    /// Whatever drive gives |G_db| equal to this value (rad/s).
    TargetGdb(f64),
}

/// Complete parameter set of the exciton-phonon-photon system.
///
/// The total cavity decay rate is not stored: [`SystemParams::kappa_a`]
/// returns `kappa_1 + kappa_2`, so the two can never disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_b: f64,
    pub omega_d: f64,
    /// Only enters the cavity bath occupation; the dynamics see detunings.
    pub omega_a: f64,
    /// External (output-coupler) cavity decay rate.
    pub kappa_1: f64,
    /// All other cavity losses.
    pub kappa_2: f64,
    pub kappa_d: f64,
    pub kappa_b: f64,
    pub g_ad: f64,
    pub g_ab: f64,
    pub g_db: f64,
    pub temperature: f64,
    pub detuning: DetuningMode,
    pub drive: Drive,
}

impl SystemParams {
    pub fn kappa_a(&self) -> f64 {
        self.kappa_1 + self.kappa_2
    }

    /// Set the total cavity decay rate keeping the external fraction κ₁/κ_a.
    pub fn set_kappa_a(&mut self, kappa_a: f64) {
        let total = self.kappa_a();
        let fraction = if total > 0.0 { self.kappa_1 / total } else { 1.0 };
        self.kappa_1 = fraction * kappa_a;
        self.kappa_2 = kappa_a - self.kappa_1;
    }

    /// Laser frequency ω₀ implied by the exciton frequency and detuning.
    pub fn laser_frequency(&self) -> f64 {
        match self.detuning {
            DetuningMode::Effective { delta_d, .. } | DetuningMode::Bare { delta_d, .. } => {
                self.omega_d - delta_d
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_b", self.omega_b),
            ("omega_d", self.omega_d),
            ("omega_a", self.omega_a),
            ("kappa_1", self.kappa_1),
            ("kappa_2", self.kappa_2),
            ("kappa_d", self.kappa_d),
            ("kappa_b", self.kappa_b),
            ("g_ad", self.g_ad),
            ("g_ab", self.g_ab),
            ("g_db", self.g_db),
            ("temperature", self.temperature),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {value}")));
            }
            if value < 0.0 {
                return Err(Error::Domain(format!("{name} must be non-negative, got {value}")));
            }
        }
        if self.omega_b <= 0.0 || self.omega_d <= 0.0 || self.omega_a <= 0.0 {
            return Err(Error::Domain("mode frequencies must be positive".into()));
        }
        let (da, dd) = match self.detuning {
            DetuningMode::Effective { delta_a, delta_d } | DetuningMode::Bare { delta_a, delta_d } => {
                (delta_a, delta_d)
            }
        };
        if !da.is_finite() || !dd.is_finite() {
            return Err(Error::Domain("detunings must be finite".into()));
        }
        let drive = match self.drive {
            Drive::Amplitude(v) | Drive::Power(v) | Drive::TargetGdb(v) => v,
        };
        if !drive.is_finite() || drive < 0.0 {
            return Err(Error::Domain(format!("drive must be finite and non-negative, got {drive}")));
        }
        Ok(())
    }

    /// Short provenance token: the first 16 hex digits of SHA-256 over the
    /// canonical JSON encoding of the parameters.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("parameters always serialize");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Mean thermal occupation 1/(exp(ħω/k_BT) − 1).
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!("occupation needs ω > 0, got {omega}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!("temperature must be ≥ 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = CODATA.hbar * omega / (CODATA.k_b * temperature);
    if x > OCCUPATION_EXPONENT_GUARD {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// Ω = √(2Pκ₁/ħω₀).
pub fn drive_amplitude_from_power(power: f64, kappa_1: f64, omega_0: f64) -> Result<f64> {
    if !(power >= 0.0) {
        return Err(Error::Domain(format!("power must be ≥ 0, got {power}")));
    }
    if !(kappa_1 > 0.0) || !(omega_0 > 0.0) {
        return Err(Error::Domain("κ₁ and ω₀ must be positive for power conversion".into()));
    }
    Ok((2.0 * power * kappa_1 / (CODATA.hbar * omega_0)).sqrt())
}

/// Inverse of [`drive_amplitude_from_power`]: P = Ω²ħω₀/(2κ₁).
pub fn power_from_drive_amplitude(omega_drive: f64, kappa_1: f64, omega_0: f64) -> Result<f64> {
    if !(omega_drive >= 0.0) {
        return Err(Error::Domain(format!("drive amplitude must be ≥ 0, got {omega_drive}")));
    }
    if !(kappa_1 > 0.0) || !(omega_0 > 0.0) {
        return Err(Error::Domain("κ₁ and ω₀ must be positive for power conversion".into()));
    }
    Ok(omega_drive * omega_drive * CODATA.hbar * omega_0 / (2.0 * kappa_1))
}

/// Baseline parameter set used for the stationary-squeezing results.
pub fn baseline() -> SystemParams {
    let omega_b = angular(20.0 * GHZ);
    let kappa_a = angular(20.0 * GHZ);
    SystemParams {
        omega_b,
        omega_d: angular(360.0 * THZ),
        omega_a: angular(360.0 * THZ),
        kappa_1: 0.9 * kappa_a,
        kappa_2: 0.1 * kappa_a,
        kappa_d: angular(2.0 * GHZ),
        kappa_b: angular(1.0 * MHZ),
        g_ad: angular(20.0 * GHZ),
        g_ab: 0.0,
        g_db: angular(20.0 * MHZ),
        temperature: 4.0,
        detuning: DetuningMode::Effective {
            delta_a: 0.1 * omega_b,
            delta_d: 0.3 * omega_b,
        },
        drive: Drive::TargetGdb(angular(4.0 * GHZ)),
    }
}

/// Replace the drive by the laser power it currently corresponds to, so that
/// later parameter changes happen at fixed power.
pub fn freeze_drive_power(params: &SystemParams) -> Result<SystemParams> {
    let omega_drive = steady::resolve_drive(params)?;
    let power = power_from_drive_amplitude(omega_drive, params.kappa_1, params.laser_frequency())?;
    Ok(SystemParams {
        drive: Drive::Power(power),
        ..params.clone()
    })
}

/// Names accepted by [`paper_preset`], with a one-line description each.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", "baseline: |G_db|/2π = 4 GHz, Δ̃_a = 0.1ω_b, Δ̃_d = 0.3ω_b, T = 4 K"),
    ("fixed-power", "baseline with the drive frozen at its laser power (≈ 0.675 mW)"),
    ("fig3c-gad20", "fixed power, g_ad/2π = 20 GHz"),
    ("fig3c-gad15", "fixed power, g_ad/2π = 15 GHz"),
    ("fig3c-gad10", "fixed power, g_ad/2π = 10 GHz"),
    ("fig3c-gad8", "fixed power, g_ad/2π = 8 GHz"),
    ("fig3c-gad6", "fixed power, g_ad/2π = 6 GHz"),
    ("fig4a-kd200", "fixed power, κ_d/2π = 200 MHz"),
    ("fig4c-gab01", "fixed power, g_ab = 0.1 g_db"),
    ("fig4c-gab02", "fixed power, g_ab = 0.2 g_db"),
    ("fig4d-room", "fixed power, g_ad/2π = 20 GHz, T = 300 K"),
    ("fig4d-inset-room", "fixed power, g_ad/2π = 8 GHz, T = 300 K"),
];

pub fn paper_preset(name: &str) -> Result<SystemParams> {
    let base = baseline();
    if name == "fig2a" {
        return Ok(base);
    }
    let mut p = freeze_drive_power(&base)?;
    match name {
        "fixed-power" => {}
        "fig3c-gad20" => p.g_ad = angular(20.0 * GHZ),
        "fig3c-gad15" => p.g_ad = angular(15.0 * GHZ),
        "fig3c-gad10" => p.g_ad = angular(10.0 * GHZ),
        "fig3c-gad8" => p.g_ad = angular(8.0 * GHZ),
        "fig3c-gad6" => p.g_ad = angular(6.0 * GHZ),
        "fig4a-kd200" => p.kappa_d = angular(200.0 * MHZ),
        "fig4c-gab01" => p.g_ab = 0.1 * p.g_db,
        "fig4c-gab02" => p.g_ab = 0.2 * p.g_db,
        "fig4d-room" => p.temperature = 300.0,
        "fig4d-inset-room" => {
            p.g_ad = angular(8.0 * GHZ);
            p.temperature = 300.0;
        }
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                available: PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
            })
        }
    }
    Ok(p)
}
