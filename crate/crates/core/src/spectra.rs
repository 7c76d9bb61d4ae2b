//! Output-field quadrature noise spectra.
//!
//! The output fluctuation is δa_out(ω) = √κ₁ δa(ω) − a₁,in(ω); its quadrature
//! X_φ = (e^{−iφ} δa_out + e^{iφ} δa_out‡)/√2 is a linear form u_φ(ω)·n(ω) in
//! the input noise. With ⟨n_i(ω) n_j(ω')⟩ = 2π (Dn)_ij δ(ω + ω') the
//! symmetrized spectral density reduces to
//!
//! ```text
//! S_φ(ω) = ½ [u_φ(ω) Dn u_φ(−ω)ᵀ + u_φ(−ω) Dn u_φ(ω)ᵀ]
//! ```
//!
//! normalized so that vacuum gives 0.5.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::SVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::{StableSystem, A, A1_IN, A1_IN_CONJ, A_CONJ, B, B_CONJ, CHANNELS, D, D_CONJ};

pub type Row = SVector<Complex64, CHANNELS>;

/// Vacuum noise level.
pub const S_VACUUM: f64 = 0.5;

/// Allowed imaginary part of S, relative to max(|S|, S_VACUUM).
const IMAG_TOLERANCE: f64 = 1e-10;
/// Negative values within this window of zero are clamped.
const CLAMP_WINDOW: f64 = 1e-10;

/// Coefficient rows of (δa_out, δa_out‡) over the noise channels.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRows {
    pub plain: Row,
    pub conj: Row,
}

pub fn output_rows(sys: &StableSystem, omega: f64) -> Result<OutputRows> {
    let t = sys.transfer(omega)?;
    let gain = Complex64::from(sys.kappa_1.sqrt());
    let mut plain: Row = t.matrix.row(A).transpose() * gain;
    let mut conj: Row = t.matrix.row(A_CONJ).transpose() * gain;
    plain[A1_IN] -= 1.0;
    conj[A1_IN_CONJ] -= 1.0;
    Ok(OutputRows { plain, conj })
}

/// Intracavity mode whose quadrature is analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cavity,
    Exciton,
    Phonon,
}

impl Mode {
    fn indices(self) -> (usize, usize) {
        match self {
            Mode::Cavity => (A, A_CONJ),
            Mode::Exciton => (D, D_CONJ),
            Mode::Phonon => (B, B_CONJ),
        }
    }
}

fn intracavity_rows(sys: &StableSystem, omega: f64, mode: Mode) -> Result<OutputRows> {
    let t = sys.transfer(omega)?;
    let (plain, conj) = mode.indices();
    Ok(OutputRows {
        plain: t.matrix.row(plain).transpose(),
        conj: t.matrix.row(conj).transpose(),
    })
}

fn quadrature_row(rows: &OutputRows, phi: f64) -> Row {
    let rotate = Complex64::from_polar(FRAC_1_SQRT_2, -phi);
    rows.plain * rotate + rows.conj * rotate.conj()
}

/// x Dn yᵀ
fn contract(sys: &StableSystem, x: &Row, y: &Row) -> Complex64 {
    (x.transpose() * sys.noise * y)[(0, 0)]
}

fn symmetrized(sys: &StableSystem, pos: &Row, neg: &Row) -> Complex64 {
    0.5 * (contract(sys, pos, neg) + contract(sys, neg, pos))
}

fn checked_real(value: Complex64) -> Result<f64> {
    let allowed = IMAG_TOLERANCE * value.re.abs().max(S_VACUUM);
    if !(value.im.abs() <= allowed) {
        return Err(Error::Consistency(format!(
            "spectral density has imaginary part {:e} (real part {:e})",
            value.im, value.re
        )));
    }
    if value.re < 0.0 {
        if value.re >= -CLAMP_WINDOW {
            return Ok(0.0);
        }
        return Err(Error::Consistency(format!(
            "negative spectral density {:e}",
            value.re
        )));
    }
    Ok(value.re)
}

fn nsd_from_rows(sys: &StableSystem, pos: &OutputRows, neg: &OutputRows, phi: f64) -> Result<f64> {
    let u_pos = quadrature_row(pos, phi);
    let u_neg = quadrature_row(neg, phi);
    checked_real(symmetrized(sys, &u_pos, &u_neg))
}

/// Symmetrized noise spectral density of the output quadrature at angle `phi`.
pub fn nsd_output(sys: &StableSystem, omega: f64, phi: f64) -> Result<f64> {
    let pos = output_rows(sys, omega)?;
    let neg = output_rows(sys, -omega)?;
    nsd_from_rows(sys, &pos, &neg, phi)
}

/// Same contraction for an intracavity mode quadrature.
pub fn nsd_intracavity(sys: &StableSystem, omega: f64, phi: f64, mode: Mode) -> Result<f64> {
    let pos = intracavity_rows(sys, omega, mode)?;
    let neg = intracavity_rows(sys, -omega, mode)?;
    nsd_from_rows(sys, &pos, &neg, phi)
}

/// Exact phase dependence S_φ = s0 + Re[s2 e^{−2iφ}].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseDecomposition {
    pub s0: f64,
    pub s2: Complex64,
}

impl PhaseDecomposition {
    pub fn at(&self, phi: f64) -> f64 {
        self.s0 + (self.s2 * Complex64::from_polar(1.0, -2.0 * phi)).re
    }

    pub fn minimum(&self) -> f64 {
        self.s0 - self.s2.norm()
    }

    /// Minimizing angle in [0, π); φ = 0 when S does not depend on φ.
    pub fn optimal_phi(&self) -> f64 {
        if self.s2.norm() <= 1e-14 * self.s0.abs().max(S_VACUUM) {
            return 0.0;
        }
        let phi = (self.s2.arg() + PI) / 2.0;
        let wrapped = phi.rem_euclid(PI);
        if wrapped >= PI { 0.0 } else { wrapped }
    }
}

fn decompose(sys: &StableSystem, pos: &OutputRows, neg: &OutputRows) -> Result<PhaseDecomposition> {
    // u_φ = (e^{−iφ} r₁ + e^{iφ} r₂)/√2; the e^{−2iφ} term carries ½·sym(r₁, r₁)
    let s2 = symmetrized(sys, &pos.plain, &neg.plain);
    let s0 = 0.5 * (symmetrized(sys, &pos.plain, &neg.conj) + symmetrized(sys, &pos.conj, &neg.plain));
    Ok(PhaseDecomposition {
        s0: checked_real(s0)?,
        s2,
    })
}

pub fn phase_decomposition(sys: &StableSystem, omega: f64) -> Result<PhaseDecomposition> {
    let pos = output_rows(sys, omega)?;
    let neg = output_rows(sys, -omega)?;
    decompose(sys, &pos, &neg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalPhase {
    pub phi: f64,
    pub s_min: f64,
}

/// Homodyne angle minimizing S_φ(ω), found analytically.
pub fn optimal_phase(sys: &StableSystem, omega: f64) -> Result<OptimalPhase> {
    let dec = phase_decomposition(sys, omega)?;
    let s_min = dec.minimum();
    let s_min = checked_real(Complex64::from(s_min))?;
    Ok(OptimalPhase {
        phi: dec.optimal_phi(),
        s_min,
    })
}

/// Squeezing in dB below vacuum, −10 log₁₀(S / 0.5).
pub fn squeezing_db(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("squeezing needs S > 0, got {s}")));
    }
    Ok(-10.0 * (s / S_VACUUM).log10())
}

/// dB value used in summaries: S = 0 maps to +∞ rather than an error.
fn db_or_infinite(s: f64) -> f64 {
    squeezing_db(s).unwrap_or(f64::INFINITY)
}

/// Uniform frequency grid in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl FrequencyGrid {
    pub const DEFAULT_POINTS: usize = 2001;

    /// The default output window ω ∈ [−2ω_b, 2ω_b].
    pub fn default_for(omega_b: f64) -> Self {
        Self {
            start: -2.0 * omega_b,
            end: 2.0 * omega_b,
            points: Self::DEFAULT_POINTS,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::Domain("frequency grid is empty".into()));
        }
        if !(self.start.is_finite() && self.end.is_finite()) || self.end < self.start {
            return Err(Error::Domain(format!(
                "frequency grid bounds must be finite and ordered, got [{}, {}]",
                self.start, self.end
            )));
        }
        Ok(linspace(self.start, self.end, self.points))
    }
}

pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    let step = (end - start) / (points - 1) as f64;
    (0..points)
        .map(|k| if k == points - 1 { end } else { start + step * k as f64 })
        .collect()
}

/// Phase setting used to build a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SpectrumPhase {
    Fixed(f64),
    /// Optimal angle at every frequency; one entry per grid point.
    PerPoint(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSpectrum {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub phi: SpectrumPhase,
    pub params_hash: String,
}

impl QuadratureSpectrum {
    pub fn phi_at(&self, index: usize) -> f64 {
        match &self.phi {
            SpectrumPhase::Fixed(phi) => *phi,
            SpectrumPhase::PerPoint(phis) => phis[index],
        }
    }

    pub fn db_values(&self) -> Vec<f64> {
        self.values.iter().map(|&s| db_or_infinite(s)).collect()
    }
}

/// Spectrum at a fixed homodyne angle.
pub fn spectrum_fixed(
    sys: &StableSystem,
    omegas: &[f64],
    phi: f64,
    params_hash: &str,
) -> Result<QuadratureSpectrum> {
    let values = omegas
        .iter()
        .map(|&w| nsd_output(sys, w, phi))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadratureSpectrum {
        omegas: omegas.to_vec(),
        values,
        phi: SpectrumPhase::Fixed(phi),
        params_hash: params_hash.to_string(),
    })
}

/// Spectrum with the angle optimized independently at each frequency.
pub fn spectrum_optimal(
    sys: &StableSystem,
    omegas: &[f64],
    params_hash: &str,
) -> Result<QuadratureSpectrum> {
    let optima = omegas
        .iter()
        .map(|&w| optimal_phase(sys, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadratureSpectrum {
        omegas: omegas.to_vec(),
        values: optima.iter().map(|o| o.s_min).collect(),
        phi: SpectrumPhase::PerPoint(optima.iter().map(|o| o.phi).collect()),
        params_hash: params_hash.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezingSummary {
    pub max_db: f64,
    pub omega_at_max: f64,
    pub phi_at_max: f64,
    /// (threshold dB, total bandwidth in rad/s over which dB exceeds it).
    pub bandwidth_above: Vec<(f64, f64)>,
}

impl SqueezingSummary {
    pub fn bandwidth(&self, threshold: f64) -> Option<f64> {
        self.bandwidth_above
            .iter()
            .find(|(t, _)| *t == threshold)
            .map(|(_, bw)| *bw)
    }
}

/// Measure of the part of [x0, x1] where the linear interpolant of (y0, y1) exceeds `level`.
fn interval_above(x0: f64, x1: f64, y0: f64, y1: f64, level: f64) -> f64 {
    let width = x1 - x0;
    match (y0 > level, y1 > level) {
        (true, true) => width,
        (false, false) => 0.0,
        (above0, _) => {
            if !(y0.is_finite() && y1.is_finite()) {
                return width / 2.0;
            }
            let frac = (level - y0) / (y1 - y0);
            if above0 { width * frac } else { width * (1.0 - frac) }
        }
    }
}

pub fn summarize(spectrum: &QuadratureSpectrum, thresholds: &[f64]) -> Result<SqueezingSummary> {
    if spectrum.values.is_empty() {
        return Err(Error::Domain("cannot summarize an empty spectrum".into()));
    }
    let db = spectrum.db_values();
    let (best, max_db) = db
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let bandwidth_above = thresholds
        .iter()
        .map(|&level| {
            let total = spectrum
                .omegas
                .windows(2)
                .zip(db.windows(2))
                .map(|(w, y)| interval_above(w[0], w[1], y[0], y[1], level))
                .sum();
            (level, total)
        })
        .collect();
    Ok(SqueezingSummary {
        max_db,
        omega_at_max: spectrum.omegas[best],
        phi_at_max: spectrum.phi_at(best),
        bandwidth_above,
    })
}

/// Location and depth of the strongest squeezing over a frequency window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingPeak {
    pub db: f64,
    pub s: f64,
    pub omega: f64,
    pub phi: f64,
}

/// Strongest squeezing over `omegas`, refined between neighbouring grid
/// points by golden-section search. `phi = None` optimizes the angle at every
/// frequency.
pub fn peak_squeezing(sys: &StableSystem, omegas: &[f64], phi: Option<f64>) -> Result<SqueezingPeak> {
    if omegas.is_empty() {
        return Err(Error::Domain("empty frequency grid".into()));
    }
    let eval = |w: f64| -> Result<(f64, f64)> {
        match phi {
            Some(phi) => Ok((nsd_output(sys, w, phi)?, phi)),
            None => optimal_phase(sys, w).map(|o| (o.s_min, o.phi)),
        }
    };
    let values = omegas.iter().map(|&w| eval(w)).collect::<Result<Vec<_>>>()?;
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v.0 < bv { (i, v.0) } else { (bi, bv) });
    let (mut s, mut at_phi) = values[best];
    let mut omega = omegas[best];

    if omegas.len() > 2 {
        let lo = omegas[best.saturating_sub(1)];
        let hi = omegas[(best + 1).min(omegas.len() - 1)];
        let (w, (sv, pv)) = golden_section(lo, hi, 60, |w| eval(w))?;
        if sv < s {
            s = sv;
            at_phi = pv;
            omega = w;
        }
    }
    Ok(SqueezingPeak {
        db: db_or_infinite(s),
        s,
        omega,
        phi: at_phi,
    })
}

fn golden_section<F>(mut lo: f64, mut hi: f64, iterations: usize, f: F) -> Result<(f64, (f64, f64))>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let ratio = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iterations {
        if f1.0 < f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1.0 < f2.0 { (x1, f1) } else { (x2, f2) })
}
