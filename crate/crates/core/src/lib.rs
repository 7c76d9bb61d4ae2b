//! Stationary quadrature squeezing of the cavity output field of a driven
//! exciton-phonon-photon microcavity.
//!
//! The pipeline is: [`params::SystemParams`] → classical steady state
//! ([`steady`]) → linearized fluctuation dynamics ([`linear`]) → output
//! quadrature spectra ([`spectra`]). [`sweep`] and [`figures`] scan parameters
//! on top of that; [`cli`] is the command-line front end.

pub mod cli;
pub mod error;
pub mod figures;
pub mod linear;
pub mod output;
pub mod params;
pub mod plot;
pub mod spectra;
pub mod steady;
pub mod sweep;

pub use error::{Error, Result};
pub use linear::{build_system, DoubledLinearSystem, StableSystem};
pub use params::{paper_preset, SystemParams};
pub use steady::OperatingPoint;

/// Steady state plus the linearized system for `params`.
pub fn prepare(params: &SystemParams) -> Result<(OperatingPoint, DoubledLinearSystem)> {
    let op = steady::solve(params)?;
    let sys = build_system(&op, params)?;
    Ok((op, sys))
}
