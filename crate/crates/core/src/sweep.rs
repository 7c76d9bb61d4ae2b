//! Parameter sweeps with stability and above-vacuum masking.
//!
//! Axis values are stored in the units users type (GHz, MHz, multiples of
//! ω_b or π, ...); [`ParamPath::apply`] converts them to SI when a grid point
//! is built. Grid points are evaluated in parallel and written back by index,
//! so the result does not depend on scheduling.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::{build_system, StableSystem};
use crate::params::{
    angular, power_from_drive_amplitude, DetuningMode, Drive, SystemParams, GHZ, MHZ, THZ,
};
use crate::spectra::{self, linspace, S_VACUUM};
use crate::steady::{self, OperatingPoint};

/// Unit in which a parameter is entered and reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Ghz,
    Mhz,
    Thz,
    Kelvin,
    Milliwatt,
    /// Multiples of the phonon frequency ω_b.
    OmegaB,
    /// Multiples of π radians.
    Pi,
}

impl Unit {
    pub fn label(self) -> &'static str {
        match self {
            Unit::Ghz => "GHz",
            Unit::Mhz => "MHz",
            Unit::Thz => "THz",
            Unit::Kelvin => "K",
            Unit::Milliwatt => "mW",
            Unit::OmegaB => "omega_b",
            Unit::Pi => "pi",
        }
    }

    /// SI value of `value` given in this unit (cyclic units become rad/s).
    pub fn to_si(self, value: f64, omega_b: f64) -> f64 {
        match self {
            Unit::Ghz => angular(value * GHZ),
            Unit::Mhz => angular(value * MHZ),
            Unit::Thz => angular(value * THZ),
            Unit::Kelvin => value,
            Unit::Milliwatt => value * 1e-3,
            Unit::OmegaB => value * omega_b,
            Unit::Pi => value * PI,
        }
    }

    pub fn from_si(self, value: f64, omega_b: f64) -> f64 {
        match self {
            Unit::Ghz => value / angular(GHZ),
            Unit::Mhz => value / angular(MHZ),
            Unit::Thz => value / angular(THZ),
            Unit::Kelvin => value,
            Unit::Milliwatt => value * 1e3,
            Unit::OmegaB => value / omega_b,
            Unit::Pi => value / PI,
        }
    }
}

/// A settable parameter, addressed by a dotted key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "&'static str")]
pub enum ParamPath {
    OmegaB,
    OmegaD,
    OmegaA,
    KappaA,
    Kappa1,
    Kappa2,
    KappaD,
    KappaB,
    Gad,
    Gab,
    Gdb,
    Temperature,
    DeltaAEff,
    DeltaDEff,
    DeltaA,
    DeltaD,
    DrivePower,
    DriveAmplitude,
    DriveTarget,
    /// Analysis frequency ω (sweep axes only).
    Omega,
    /// Homodyne angle φ (sweep axes only).
    Phi,
}

impl From<ParamPath> for &'static str {
    fn from(p: ParamPath) -> Self {
        p.key()
    }
}

impl ParamPath {
    pub const ALL: [ParamPath; 21] = [
        ParamPath::OmegaB,
        ParamPath::OmegaD,
        ParamPath::OmegaA,
        ParamPath::KappaA,
        ParamPath::Kappa1,
        ParamPath::Kappa2,
        ParamPath::KappaD,
        ParamPath::KappaB,
        ParamPath::Gad,
        ParamPath::Gab,
        ParamPath::Gdb,
        ParamPath::Temperature,
        ParamPath::DeltaAEff,
        ParamPath::DeltaDEff,
        ParamPath::DeltaA,
        ParamPath::DeltaD,
        ParamPath::DrivePower,
        ParamPath::DriveAmplitude,
        ParamPath::DriveTarget,
        ParamPath::Omega,
        ParamPath::Phi,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ParamPath::OmegaB => "frequencies.omega_b",
            ParamPath::OmegaD => "frequencies.omega_d",
            ParamPath::OmegaA => "frequencies.omega_a",
            ParamPath::KappaA => "rates.kappa_a",
            ParamPath::Kappa1 => "rates.kappa_1",
            ParamPath::Kappa2 => "rates.kappa_2",
            ParamPath::KappaD => "rates.kappa_d",
            ParamPath::KappaB => "rates.kappa_b",
            ParamPath::Gad => "couplings.g_ad",
            ParamPath::Gab => "couplings.g_ab",
            ParamPath::Gdb => "couplings.g_db",
            ParamPath::Temperature => "bath.temperature",
            ParamPath::DeltaAEff => "detuning.delta_a_eff",
            ParamPath::DeltaDEff => "detuning.delta_d_eff",
            ParamPath::DeltaA => "detuning.delta_a",
            ParamPath::DeltaD => "detuning.delta_d",
            ParamPath::DrivePower => "drive.power",
            ParamPath::DriveAmplitude => "drive.omega",
            ParamPath::DriveTarget => "drive.target_gdb",
            ParamPath::Omega => "omega",
            ParamPath::Phi => "phi",
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            ParamPath::OmegaB => Unit::Ghz,
            ParamPath::OmegaD | ParamPath::OmegaA => Unit::Thz,
            ParamPath::KappaA | ParamPath::Kappa1 | ParamPath::Kappa2 | ParamPath::KappaD => Unit::Ghz,
            ParamPath::KappaB => Unit::Mhz,
            ParamPath::Gad => Unit::Ghz,
            ParamPath::Gab | ParamPath::Gdb => Unit::Mhz,
            ParamPath::Temperature => Unit::Kelvin,
            ParamPath::DeltaAEff | ParamPath::DeltaDEff | ParamPath::DeltaA | ParamPath::DeltaD => {
                Unit::OmegaB
            }
            ParamPath::DrivePower => Unit::Milliwatt,
            ParamPath::DriveAmplitude => Unit::Thz,
            ParamPath::DriveTarget => Unit::Ghz,
            ParamPath::Omega => Unit::OmegaB,
            ParamPath::Phi => Unit::Pi,
        }
    }

    pub fn parse(key: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.key() == key)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown parameter `{key}`; valid keys: {}",
                    Self::ALL.iter().map(|p| p.key()).collect::<Vec<_>>().join(", ")
                ))
            })
    }

    /// ω and φ select where a spectrum is read, not a physical parameter.
    pub fn is_spectral(self) -> bool {
        matches!(self, ParamPath::Omega | ParamPath::Phi)
    }

    pub fn is_drive(self) -> bool {
        matches!(
            self,
            ParamPath::DrivePower | ParamPath::DriveAmplitude | ParamPath::DriveTarget
        )
    }

    pub fn is_detuning(self) -> bool {
        matches!(
            self,
            ParamPath::DeltaAEff | ParamPath::DeltaDEff | ParamPath::DeltaA | ParamPath::DeltaD
        )
    }

    /// Set this parameter from a value in [`ParamPath::unit`].
    ///
    /// Setting an effective detuning on a bare-detuning parameter set (or the
    /// reverse) switches the mode and keeps the other detuning's value.
    pub fn apply(self, params: &mut SystemParams, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Config(format!("{} must be finite", self.key())));
        }
        let si = self.unit().to_si(value, params.omega_b);
        let (da, dd) = match params.detuning {
            DetuningMode::Effective { delta_a, delta_d } | DetuningMode::Bare { delta_a, delta_d } => {
                (delta_a, delta_d)
            }
        };
        match self {
            ParamPath::OmegaB => params.omega_b = si,
            ParamPath::OmegaD => params.omega_d = si,
            ParamPath::OmegaA => params.omega_a = si,
            ParamPath::KappaA => params.set_kappa_a(si),
            ParamPath::Kappa1 => params.kappa_1 = si,
            ParamPath::Kappa2 => params.kappa_2 = si,
            ParamPath::KappaD => params.kappa_d = si,
            ParamPath::KappaB => params.kappa_b = si,
            ParamPath::Gad => params.g_ad = si,
            ParamPath::Gab => params.g_ab = si,
            ParamPath::Gdb => params.g_db = si,
            ParamPath::Temperature => params.temperature = si,
            ParamPath::DeltaAEff => {
                params.detuning = DetuningMode::Effective { delta_a: si, delta_d: dd }
            }
            ParamPath::DeltaDEff => {
                params.detuning = DetuningMode::Effective { delta_a: da, delta_d: si }
            }
            ParamPath::DeltaA => params.detuning = DetuningMode::Bare { delta_a: si, delta_d: dd },
            ParamPath::DeltaD => params.detuning = DetuningMode::Bare { delta_a: da, delta_d: si },
            ParamPath::DrivePower => params.drive = Drive::Power(si),
            ParamPath::DriveAmplitude => params.drive = Drive::Amplitude(si),
            ParamPath::DriveTarget => params.drive = Drive::TargetGdb(si),
            ParamPath::Omega | ParamPath::Phi => {
                return Err(Error::Config(format!(
                    "`{}` is a sweep coordinate, not a system parameter",
                    self.key()
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisRange {
    Linear { start: f64, end: f64, points: usize },
    Log { start: f64, end: f64, points: usize },
    List { values: Vec<f64> },
}

impl AxisRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        let check = |start: f64, end: f64, points: usize| {
            if points == 0 {
                return Err(Error::InvalidSweep("axis needs at least one point".into()));
            }
            if !(start.is_finite() && end.is_finite()) || start > end {
                return Err(Error::InvalidSweep(format!(
                    "axis range must be finite and ordered, got [{start}, {end}]"
                )));
            }
            Ok(())
        };
        match self {
            AxisRange::Linear { start, end, points } => {
                check(*start, *end, *points)?;
                Ok(linspace(*start, *end, *points))
            }
            AxisRange::Log { start, end, points } => {
                check(*start, *end, *points)?;
                if !(*start > 0.0) {
                    return Err(Error::InvalidSweep("log axis needs a positive start".into()));
                }
                Ok(linspace(start.ln(), end.ln(), *points)
                    .into_iter()
                    .map(f64::exp)
                    .collect())
            }
            AxisRange::List { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidSweep("axis needs at least one point".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSweep("axis values must be finite".into()));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub path: ParamPath,
    pub range: AxisRange,
}

impl Axis {
    pub fn linear(path: ParamPath, start: f64, end: f64, points: usize) -> Self {
        Self { path, range: AxisRange::Linear { start, end, points } }
    }

    pub fn list(path: ParamPath, values: &[f64]) -> Self {
        Self { path, range: AxisRange::List { values: values.to_vec() } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// S_φ(ω).
    Nsd,
    /// Squeezing of S_φ(ω) in dB.
    Db,
    /// Largest squeezing (dB) over the frequency grid.
    MaxDb,
    /// Frequency (in units of ω_b) where `MaxDb` is attained.
    OmegaAtMax,
    Cooperativity,
    PhotonNumber,
    ExcitonNumber,
    /// Largest real part of the drift eigenvalues, rad/s.
    MaxRealEig,
}

impl Quantity {
    pub fn column(self) -> &'static str {
        match self {
            Quantity::Nsd => "S",
            Quantity::Db => "dB",
            Quantity::MaxDb => "max_dB",
            Quantity::OmegaAtMax => "omega_at_max_over_omega_b",
            Quantity::Cooperativity => "cooperativity",
            Quantity::PhotonNumber => "photon_number",
            Quantity::ExcitonNumber => "exciton_number",
            Quantity::MaxRealEig => "max_re_eig",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "nsd" | "S" => Quantity::Nsd,
            "db" | "dB" => Quantity::Db,
            "max-db" | "max_db" => Quantity::MaxDb,
            "omega-at-max" => Quantity::OmegaAtMax,
            "cooperativity" => Quantity::Cooperativity,
            "photon-number" => Quantity::PhotonNumber,
            "exciton-number" => Quantity::ExcitonNumber,
            "max-re-eig" => Quantity::MaxRealEig,
            _ => {
                return Err(Error::Config(format!(
                    "unknown quantity `{name}`; valid: nsd, db, max-db, omega-at-max, cooperativity, photon-number, exciton-number, max-re-eig"
                )))
            }
        })
    }

    fn needs_frequency(self) -> bool {
        matches!(self, Quantity::Nsd | Quantity::Db)
    }
}

/// Homodyne angle used for spectral quantities when φ is not an axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PhaseChoice {
    /// Fixed angle in radians.
    Fixed(f64),
    /// Optimized separately at every frequency.
    Optimal,
    /// One angle per curve: the optimum at the curve's best frequency.
    OptimalPerCurve,
}

/// What stays fixed about the drive while the other parameters vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveConvention {
    /// Use `base.drive` unchanged at every point.
    AsGiven,
    /// Hold Ω at its base value.
    FixedAmplitude,
    /// Hold the laser power at its base value.
    FixedPower,
    /// Hold |G_db| at its base value.
    FixedTarget,
}

/// Frequency window in units of ω_b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaWindow {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Default for OmegaWindow {
    fn default() -> Self {
        Self { start: -2.0, end: 2.0, points: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub base: SystemParams,
    pub drive: DriveConvention,
    pub axes: Vec<Axis>,
    pub quantities: Vec<Quantity>,
    pub phi: PhaseChoice,
    /// Analysis frequency (units of ω_b) when ω is not an axis.
    pub omega: Option<f64>,
    /// Window searched by `MaxDb` / `OmegaAtMax`.
    pub omega_window: OmegaWindow,
    /// Points with max Re(λ) ≥ −margin are masked as unstable.
    pub margin: f64,
}

impl SweepSpec {
    pub fn new(base: SystemParams, axes: Vec<Axis>, quantities: Vec<Quantity>) -> Self {
        Self {
            base,
            drive: DriveConvention::AsGiven,
            axes,
            quantities,
            phi: PhaseChoice::Optimal,
            omega: None,
            omega_window: OmegaWindow::default(),
            margin: 0.0,
        }
    }

    fn validate(&self) -> Result<Vec<Vec<f64>>> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidSweep(format!(
                "a sweep has one or two axes, got {}",
                self.axes.len()
            )));
        }
        if self.axes.len() == 2 && self.axes[0].path == self.axes[1].path {
            return Err(Error::InvalidSweep("both axes sweep the same parameter".into()));
        }
        if self.quantities.is_empty() {
            return Err(Error::InvalidSweep("no quantity requested".into()));
        }
        let has_omega = self.axes.iter().any(|a| a.path == ParamPath::Omega);
        if self.quantities.iter().any(|q| q.needs_frequency()) && !has_omega && self.omega.is_none() {
            return Err(Error::InvalidSweep(
                "spectral quantities need an `omega` axis or a fixed frequency".into(),
            ));
        }
        if self.phi == PhaseChoice::OptimalPerCurve && !has_omega {
            return Err(Error::InvalidSweep(
                "per-curve phase optimization needs an `omega` axis".into(),
            ));
        }
        let w = self.omega_window;
        if w.points == 0 || !(w.start.is_finite() && w.end.is_finite()) || w.start > w.end {
            return Err(Error::InvalidSweep("invalid frequency window".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::InvalidSweep("stability margin must be ≥ 0".into()));
        }
        self.axes.iter().map(|a| a.range.values()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisValues {
    pub key: &'static str,
    pub unit: &'static str,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axes: Vec<AxisValues>,
    pub quantities: Vec<Quantity>,
    /// `values[q][k]` for quantity `q` at flat point `k` (row-major over axes).
    pub values: Vec<Vec<Option<f64>>>,
    pub stable: Vec<bool>,
    pub above_vacuum: Vec<bool>,
    pub max_real_eig: Vec<f64>,
    /// Homodyne angle (rad) used at each point, where one applies.
    pub phi: Vec<Option<f64>>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.stable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stable.is_empty()
    }

    /// Axis indices of flat point `k`.
    pub fn indices(&self, k: usize) -> Vec<usize> {
        match self.axes.len() {
            1 => vec![k],
            _ => {
                let n1 = self.axes[1].values.len();
                vec![k / n1, k % n1]
            }
        }
    }

    pub fn coordinates(&self, k: usize) -> Vec<f64> {
        self.indices(k)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.values[i])
            .collect()
    }

    pub fn column(&self, quantity: Quantity) -> Option<&[Option<f64>]> {
        self.quantities
            .iter()
            .position(|&q| q == quantity)
            .map(|i| self.values[i].as_slice())
    }
}

/// Everything about one grid point's physical configuration.
struct ParamPoint {
    params: SystemParams,
    op: OperatingPoint,
    max_real_eig: f64,
    system: Option<StableSystem>,
}

fn drive_for_convention(spec: &SweepSpec) -> Result<Option<Drive>> {
    if spec.drive == DriveConvention::AsGiven {
        return Ok(None);
    }
    let base = &spec.base;
    base.validate()?;
    let omega_drive = steady::resolve_drive(base)?;
    Ok(Some(match spec.drive {
        DriveConvention::AsGiven => unreachable!(),
        DriveConvention::FixedAmplitude => Drive::Amplitude(omega_drive),
        DriveConvention::FixedPower => Drive::Power(power_from_drive_amplitude(
            omega_drive,
            base.kappa_1,
            base.laser_frequency(),
        )?),
        DriveConvention::FixedTarget => Drive::TargetGdb(steady::solve(base)?.g_db_eff.norm()),
    }))
}

fn build_point(
    spec: &SweepSpec,
    drive: Option<Drive>,
    settings: &[(ParamPath, f64)],
) -> Result<ParamPoint> {
    let mut params = spec.base.clone();
    if let Some(drive) = drive {
        params.drive = drive;
    }
    // detunings are multiples of ω_b, so apply them after any ω_b change
    for &(path, value) in settings.iter().filter(|(p, _)| !p.is_detuning()) {
        path.apply(&mut params, value)?;
    }
    for &(path, value) in settings.iter().filter(|(p, _)| p.is_detuning()) {
        path.apply(&mut params, value)?;
    }
    params.validate()?;
    let op = steady::solve(&params)?;
    let sys = build_system(&op, &params)?;
    let stability = sys.stability(spec.margin)?;
    let system = if stability.stable {
        Some(sys.into_stable(spec.margin)?)
    } else {
        None
    };
    Ok(ParamPoint {
        params,
        op,
        max_real_eig: stability.max_real_eig,
        system,
    })
}

#[derive(Default, Clone)]
struct PointOutput {
    values: Vec<Option<f64>>,
    above_vacuum: bool,
    phi: Option<f64>,
}

struct Evaluator<'a> {
    spec: &'a SweepSpec,
    point: &'a ParamPoint,
    curve_phi: Option<f64>,
}

impl Evaluator<'_> {
    fn window(&self) -> Result<Vec<f64>> {
        let w = self.spec.omega_window;
        let omega_b = self.point.params.omega_b;
        Ok(linspace(w.start * omega_b, w.end * omega_b, w.points))
    }

    fn eval(&self, omega_units: Option<f64>, phi_axis: Option<f64>) -> Result<PointOutput> {
        let Some(sys) = &self.point.system else {
            // only the stability diagnostic itself is reported at unstable points
            let values = self
                .spec
                .quantities
                .iter()
                .map(|&q| (q == Quantity::MaxRealEig).then_some(self.point.max_real_eig))
                .collect();
            return Ok(PointOutput { values, ..Default::default() });
        };
        let params = &self.point.params;
        let omega = omega_units.or(self.spec.omega).map(|w| w * params.omega_b);
        let fixed_phi = phi_axis.map(|v| v * PI).or(match self.spec.phi {
            PhaseChoice::Fixed(phi) => Some(phi),
            PhaseChoice::OptimalPerCurve => self.curve_phi,
            PhaseChoice::Optimal => None,
        });

        let mut out = PointOutput::default();
        let mut nsd: Option<(f64, f64)> = None;
        let mut peak = None;
        for &q in &self.spec.quantities {
            let value = match q {
                Quantity::Nsd | Quantity::Db => {
                    let (s, phi) = match nsd {
                        Some(v) => v,
                        None => {
                            let omega = omega.expect("validated: frequency available");
                            let v = match fixed_phi {
                                Some(phi) => (spectra::nsd_output(sys, omega, phi)?, phi),
                                None => {
                                    let o = spectra::optimal_phase(sys, omega)?;
                                    (o.s_min, o.phi)
                                }
                            };
                            nsd = Some(v);
                            v
                        }
                    };
                    out.phi = Some(phi);
                    out.above_vacuum = s > S_VACUUM;
                    if q == Quantity::Nsd {
                        s
                    } else {
                        spectra::squeezing_db(s).unwrap_or(f64::INFINITY)
                    }
                }
                Quantity::MaxDb | Quantity::OmegaAtMax => {
                    let p = match peak {
                        Some(p) => p,
                        None => {
                            let p = spectra::peak_squeezing(sys, &self.window()?, fixed_phi)?;
                            peak = Some(p);
                            p
                        }
                    };
                    if nsd.is_none() {
                        out.above_vacuum = p.s > S_VACUUM;
                        out.phi = Some(p.phi);
                    }
                    if q == Quantity::MaxDb {
                        p.db
                    } else {
                        p.omega / params.omega_b
                    }
                }
                Quantity::Cooperativity => steady::cooperativity(&self.point.op, params)?,
                Quantity::PhotonNumber => self.point.op.photon_number(),
                Quantity::ExcitonNumber => self.point.op.exciton_number(),
                Quantity::MaxRealEig => self.point.max_real_eig,
            };
            out.values.push(Some(value));
        }
        Ok(out)
    }
}

/// Evaluate every grid point of `spec`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let axis_values = spec.validate()?;
    let drive = drive_for_convention(spec)?;

    let sizes: Vec<usize> = axis_values.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let param_axes: Vec<usize> = (0..spec.axes.len())
        .filter(|&i| !spec.axes[i].path.is_spectral())
        .collect();
    let flat = |idx: &[usize]| -> usize {
        idx.iter().zip(&sizes).fold(0, |acc, (&i, &n)| acc * n + i)
    };

    // enumerate physical configurations (product of the non-spectral axes)
    let param_combos: Vec<Vec<usize>> = match param_axes.as_slice() {
        [] => vec![vec![]],
        [a] => (0..sizes[*a]).map(|i| vec![i]).collect(),
        [a, b] => (0..sizes[*a])
            .flat_map(|i| (0..sizes[*b]).map(move |j| vec![i, j]))
            .collect(),
        _ => unreachable!(),
    };
    let spectral_axes: Vec<usize> = (0..spec.axes.len())
        .filter(|&i| spec.axes[i].path.is_spectral())
        .collect();
    let spectral_combos: Vec<Vec<usize>> = match spectral_axes.as_slice() {
        [] => vec![vec![]],
        [a] => (0..sizes[*a]).map(|i| vec![i]).collect(),
        [a, b] => (0..sizes[*a])
            .flat_map(|i| (0..sizes[*b]).map(move |j| vec![i, j]))
            .collect(),
        _ => unreachable!(),
    };
    let omega_axis = spec.axes.iter().position(|a| a.path == ParamPath::Omega);
    let phi_axis = spec.axes.iter().position(|a| a.path == ParamPath::Phi);

    let blocks: Vec<Vec<(usize, f64, PointOutput)>> = param_combos
        .par_iter()
        .map(|combo| -> Result<Vec<(usize, f64, PointOutput)>> {
            let settings: Vec<(ParamPath, f64)> = param_axes
                .iter()
                .zip(combo)
                .map(|(&a, &i)| (spec.axes[a].path, axis_values[a][i]))
                .collect();
            let point = build_point(spec, drive, &settings)?;

            let curve_phi = match (&point.system, spec.phi, omega_axis) {
                (Some(sys), PhaseChoice::OptimalPerCurve, Some(a)) => {
                    let omegas: Vec<f64> = axis_values[a]
                        .iter()
                        .map(|w| w * point.params.omega_b)
                        .collect();
                    Some(spectra::peak_squeezing(sys, &omegas, None)?.phi)
                }
                _ => None,
            };
            let evaluator = Evaluator { spec, point: &point, curve_phi };

            spectral_combos
                .par_iter()
                .map(|scombo| {
                    let mut idx = vec![0; spec.axes.len()];
                    for (&a, &i) in param_axes.iter().zip(combo) {
                        idx[a] = i;
                    }
                    for (&a, &i) in spectral_axes.iter().zip(scombo) {
                        idx[a] = i;
                    }
                    let omega = omega_axis.map(|a| axis_values[a][idx[a]]);
                    let phi = phi_axis.map(|a| axis_values[a][idx[a]]);
                    let out = evaluator.eval(omega, phi)?;
                    Ok((flat(&idx), point.max_real_eig, out))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut values = vec![vec![None; total]; spec.quantities.len()];
    let mut stable = vec![false; total];
    let mut above_vacuum = vec![false; total];
    let mut max_real_eig = vec![f64::NAN; total];
    let mut phi = vec![None; total];
    for (k, eig, out) in blocks.into_iter().flatten() {
        for (q, v) in out.values.into_iter().enumerate() {
            values[q][k] = v;
        }
        stable[k] = eig < -spec.margin;
        above_vacuum[k] = out.above_vacuum;
        max_real_eig[k] = eig;
        phi[k] = out.phi;
    }

    Ok(SweepResult {
        axes: spec
            .axes
            .iter()
            .zip(axis_values)
            .map(|(a, values)| AxisValues {
                key: a.path.key(),
                unit: a.path.unit().label(),
                values,
            })
            .collect(),
        quantities: spec.quantities.clone(),
        values,
        stable,
        above_vacuum,
        max_real_eig,
        phi,
    })
}
