//! Classical steady state of the driven three-mode system.
//!
//! With effective detunings the amplitudes are closed-form:
//!
//! ```text
//! ⟨a⟩ = (κ_d/2 + iΔ̃_d) Ω / [g_ad² + (κ_a/2 + iΔ̃_a)(κ_d/2 + iΔ̃_d)]
//! ⟨d⟩ = −i g_ad ⟨a⟩ / (κ_d/2 + iΔ̃_d)
//! ⟨b⟩ = (i g_ab |⟨a⟩|² + i g_db |⟨d⟩|²) / (κ_b/2 + iω_b)
//! ```
//!
//! Bare detunings need the shifts Δ̃_j = Δ_j + 2 g_jb Re⟨b⟩, found by a damped
//! fixed-point iteration on Re⟨b⟩.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{drive_amplitude_from_power, DetuningMode, Drive, SystemParams};

/// Relative size below which a steady-state denominator counts as zero.
const SINGULAR_RATIO: f64 = 1e-30;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;
const RELAXATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub a_ss: Complex64,
    pub d_ss: Complex64,
    pub b_ss: Complex64,
    pub delta_a_eff: f64,
    pub delta_d_eff: f64,
    /// G_ab = g_ab⟨a⟩.
    pub g_ab_eff: Complex64,
    /// G_db = g_db⟨d⟩.
    pub g_db_eff: Complex64,
    pub omega_drive: f64,
}

impl OperatingPoint {
    pub fn photon_number(&self) -> f64 {
        self.a_ss.norm_sqr()
    }

    pub fn exciton_number(&self) -> f64 {
        self.d_ss.norm_sqr()
    }
}

/// g_ad² + (κ_a/2 + iΔ̃_a)(κ_d/2 + iΔ̃_d), checked against cancellation to zero.
fn polariton_denominator(params: &SystemParams, delta_a: f64, delta_d: f64) -> Result<Complex64> {
    let ca = Complex64::new(params.kappa_a() / 2.0, delta_a);
    let cd = Complex64::new(params.kappa_d / 2.0, delta_d);
    let g2 = params.g_ad * params.g_ad;
    let product = ca * cd;
    let den = g2 + product;
    let largest = g2.max(product.norm());
    if !(den.norm() > SINGULAR_RATIO * largest) {
        return Err(Error::SingularSteadyState(format!(
            "g_ad² + (κ_a/2 + iΔ̃_a)(κ_d/2 + iΔ̃_d) vanishes (|·| = {:e})",
            den.norm()
        )));
    }
    Ok(den)
}

fn amplitudes(
    params: &SystemParams,
    delta_a: f64,
    delta_d: f64,
    omega_drive: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    let cd = Complex64::new(params.kappa_d / 2.0, delta_d);
    let den = polariton_denominator(params, delta_a, delta_d)?;
    let a = cd * omega_drive / den;
    let d = if params.g_ad == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        if cd.norm() == 0.0 {
            return Err(Error::SingularSteadyState("κ_d/2 + iΔ̃_d = 0".into()));
        }
        -Complex64::i() * params.g_ad * a / cd
    };
    let cb = Complex64::new(params.kappa_b / 2.0, params.omega_b);
    let b = Complex64::i() * (params.g_ab * a.norm_sqr() + params.g_db * d.norm_sqr()) / cb;
    Ok((a, d, b))
}

fn operating_point(
    params: &SystemParams,
    delta_a: f64,
    delta_d: f64,
    omega_drive: f64,
) -> Result<OperatingPoint> {
    let (a, d, b) = amplitudes(params, delta_a, delta_d, omega_drive)?;
    Ok(OperatingPoint {
        a_ss: a,
        d_ss: d,
        b_ss: b,
        delta_a_eff: delta_a,
        delta_d_eff: delta_d,
        g_ab_eff: params.g_ab * a,
        g_db_eff: params.g_db * d,
        omega_drive,
    })
}

/// Steady state for given effective detunings; no iteration is involved.
pub fn solve_effective(params: &SystemParams, omega_drive: f64) -> Result<OperatingPoint> {
    match params.detuning {
        DetuningMode::Effective { delta_a, delta_d } => {
            operating_point(params, delta_a, delta_d, omega_drive)
        }
        DetuningMode::Bare { .. } => Err(Error::Domain(
            "solve_effective needs effective detunings".into(),
        )),
    }
}

/// Steady state for bare detunings, solving the phonon-induced shifts.
///
/// Returns the branch reached from Re⟨b⟩ = 0; no search for other branches
/// of a bistable response is made.
pub fn solve_bare(
    params: &SystemParams,
    omega_drive: f64,
    tol: f64,
    max_iter: usize,
) -> Result<OperatingPoint> {
    let DetuningMode::Bare { delta_a, delta_d } = params.detuning else {
        return Err(Error::Domain("solve_bare needs bare detunings".into()));
    };
    if params.g_ab == 0.0 && params.g_db == 0.0 {
        return operating_point(params, delta_a, delta_d, omega_drive);
    }

    let shifted = |re_b: f64| {
        (
            delta_a + 2.0 * params.g_ab * re_b,
            delta_d + 2.0 * params.g_db * re_b,
        )
    };
    let mut re_b = 0.0_f64;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let (da, dd) = shifted(re_b);
        let (_, _, b) = amplitudes(params, da, dd, omega_drive)?;
        let next = (1.0 - RELAXATION) * re_b + RELAXATION * b.re;
        residual = (next - re_b).abs();
        re_b = next;
        if residual == 0.0 || residual < tol * re_b.abs() {
            let (da, dd) = shifted(re_b);
            return operating_point(params, da, dd, omega_drive);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual,
    })
}

/// C = 4|G_db|²/(κ_d κ_b).
pub fn cooperativity(op: &OperatingPoint, params: &SystemParams) -> Result<f64> {
    if !(params.kappa_d > 0.0 && params.kappa_b > 0.0) {
        return Err(Error::Domain("cooperativity needs κ_d, κ_b > 0".into()));
    }
    Ok(4.0 * op.g_db_eff.norm_sqr() / (params.kappa_d * params.kappa_b))
}

/// Drive rate Ω giving |G_db| = `target` at the current effective detunings.
pub fn drive_for_target_coupling(params: &SystemParams, target: f64) -> Result<f64> {
    let DetuningMode::Effective { delta_a, delta_d } = params.detuning else {
        return Err(Error::Domain(
            "a coupling target needs effective detunings".into(),
        ));
    };
    if !(target >= 0.0) {
        return Err(Error::Domain(format!("target coupling must be ≥ 0, got {target}")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    if params.g_ad == 0.0 || params.g_db == 0.0 {
        return Err(Error::UnreachableTarget(
            "|G_db| is identically zero when g_ad = 0 or g_db = 0".into(),
        ));
    }
    let den = polariton_denominator(params, delta_a, delta_d)?;
    // |⟨d⟩| = g_ad Ω / |den|
    let exciton_amplitude = target / params.g_db;
    Ok(exciton_amplitude * den.norm() / params.g_ad)
}

/// Drive rate Ω described by `params.drive`.
pub fn resolve_drive(params: &SystemParams) -> Result<f64> {
    match params.drive {
        Drive::Amplitude(omega_drive) => Ok(omega_drive),
        Drive::Power(power) => {
            drive_amplitude_from_power(power, params.kappa_1, params.laser_frequency())
        }
        Drive::TargetGdb(target) => drive_for_target_coupling(params, target),
    }
}

/// Resolve the drive and solve the steady state with default iteration settings.
pub fn solve(params: &SystemParams) -> Result<OperatingPoint> {
    params.validate()?;
    let omega_drive = resolve_drive(params)?;
    match params.detuning {
        DetuningMode::Effective { .. } => solve_effective(params, omega_drive),
        DetuningMode::Bare { .. } => solve_bare(params, omega_drive, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER),
    }
}
