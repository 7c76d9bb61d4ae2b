//! Linearized fluctuation dynamics in the doubled basis
//! v = (δa, δa‡, δd, δd‡, δb, δb‡), where `‡` marks the conjugate partner.
//!
//! The equations of motion are `v̇ = M v + B n` with input noise channels
//! n = (a₁, a₁‡, a₂, a₂‡, d, d‡, b, b‡) and delta-correlated statistics
//! ⟨n(t) n(t')ᵀ⟩ = Dn δ(t − t'). With the transform δj(ω) = ∫ δj(t) e^{iωt} dt
//! the response is v(ω) = (−iω − M)⁻¹ B n(ω).

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{thermal_occupation, SystemParams};
use crate::steady::OperatingPoint;

pub const DIM: usize = 6;
pub const CHANNELS: usize = 8;

pub type DriftMatrix = SMatrix<Complex64, DIM, DIM>;
pub type InputMatrix = SMatrix<Complex64, DIM, CHANNELS>;
pub type NoiseMatrix = SMatrix<Complex64, CHANNELS, CHANNELS>;

/// Basis indices.
pub const A: usize = 0;
pub const A_CONJ: usize = 1;
pub const D: usize = 2;
pub const D_CONJ: usize = 3;
pub const B: usize = 4;
pub const B_CONJ: usize = 5;

/// Noise channel indices.
pub const A1_IN: usize = 0;
pub const A1_IN_CONJ: usize = 1;
pub const A2_IN: usize = 2;
pub const A2_IN_CONJ: usize = 3;
pub const D_IN: usize = 4;
pub const D_IN_CONJ: usize = 5;
pub const B_IN: usize = 6;
pub const B_IN_CONJ: usize = 7;

/// Index of the conjugate partner (pairs are adjacent: 0↔1, 2↔3, ...).
pub fn partner(index: usize) -> usize {
    index ^ 1
}

/// Σ X* Σ' where Σ, Σ' swap each (mode, ‡) pair of rows and columns.
pub fn conjugate_pairs<const R: usize, const C: usize>(
    m: &SMatrix<Complex64, R, C>,
) -> SMatrix<Complex64, R, C> {
    SMatrix::from_fn(|i, j| m[(partner(i), partner(j))].conj())
}

/// Thermal occupations of the three baths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathOccupations {
    /// Shared by both cavity ports.
    pub cavity: f64,
    pub exciton: f64,
    pub phonon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubledLinearSystem {
    pub drift: DriftMatrix,
    pub input: InputMatrix,
    pub noise: NoiseMatrix,
    pub kappa_1: f64,
    pub occupations: BathOccupations,
    /// Characteristic rate used to condition eigen- and Lyapunov solves.
    pub scale: f64,
}

pub fn build_system(op: &OperatingPoint, params: &SystemParams) -> Result<DoubledLinearSystem> {
    let i = Complex64::i();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut m = DriftMatrix::zeros();

    m[(A, A)] = -c(params.kappa_a() / 2.0, op.delta_a_eff);
    m[(A, D)] = -i * params.g_ad;
    m[(A, B)] = i * op.g_ab_eff;
    m[(A, B_CONJ)] = i * op.g_ab_eff;

    m[(D, D)] = -c(params.kappa_d / 2.0, op.delta_d_eff);
    m[(D, A)] = -i * params.g_ad;
    m[(D, B)] = i * op.g_db_eff;
    m[(D, B_CONJ)] = i * op.g_db_eff;

    m[(B, B)] = -c(params.kappa_b / 2.0, params.omega_b);
    m[(B, A)] = i * op.g_ab_eff.conj();
    m[(B, A_CONJ)] = i * op.g_ab_eff;
    m[(B, D)] = i * op.g_db_eff.conj();
    m[(B, D_CONJ)] = i * op.g_db_eff;

    let mirrored = conjugate_pairs(&m);
    for row in [A_CONJ, D_CONJ, B_CONJ] {
        m.set_row(row, &mirrored.row(row));
    }

    let mut input = InputMatrix::zeros();
    let root = |k: f64| Complex64::from(k.sqrt());
    for (row, ch, rate) in [
        (A, A1_IN, params.kappa_1),
        (A, A2_IN, params.kappa_2),
        (D, D_IN, params.kappa_d),
        (B, B_IN, params.kappa_b),
    ] {
        input[(row, ch)] = root(rate);
        input[(partner(row), partner(ch))] = root(rate);
    }

    let occupations = BathOccupations {
        cavity: thermal_occupation(params.omega_a, params.temperature)?,
        exciton: thermal_occupation(params.omega_d, params.temperature)?,
        phonon: thermal_occupation(params.omega_b, params.temperature)?,
    };
    let mut noise = NoiseMatrix::zeros();
    for (ch, n) in [
        (A1_IN, occupations.cavity),
        (A2_IN, occupations.cavity),
        (D_IN, occupations.exciton),
        (B_IN, occupations.phonon),
    ] {
        // ⟨R R†⟩ = N + 1, ⟨R† R⟩ = N
        noise[(ch, partner(ch))] = Complex64::from(n + 1.0);
        noise[(partner(ch), ch)] = Complex64::from(n);
    }

    let scale = m.iter().map(|z| z.norm()).fold(params.omega_b, f64::max);
    Ok(DoubledLinearSystem {
        drift: m,
        input,
        noise,
        kappa_1: params.kappa_1,
        occupations,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stability {
    pub stable: bool,
    pub max_real_eig: f64,
}

impl DoubledLinearSystem {
    /// Eigenvalues of the drift matrix, via a complex Schur decomposition.
    pub fn eigenvalues(&self) -> Result<[Complex64; DIM]> {
        let scaled = self.drift.unscale(self.scale);
        let schur = nalgebra::Schur::try_new(scaled, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
        let (_, t) = schur.unpack();
        let mut out = [Complex64::new(0.0, 0.0); DIM];
        for (k, z) in out.iter_mut().enumerate() {
            *z = t[(k, k)] * self.scale;
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Numerical("non-finite eigenvalue".into()));
            }
        }
        Ok(out)
    }

    /// Stable when every eigenvalue satisfies Re(λ) < −margin.
    pub fn stability(&self, margin: f64) -> Result<Stability> {
        let max_real_eig = self
            .eigenvalues()?
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Stability {
            stable: max_real_eig < -margin,
            max_real_eig,
        })
    }

    /// Wrap the system after checking it is stable.
    pub fn into_stable(self, margin: f64) -> Result<StableSystem> {
        let stability = self.stability(margin)?;
        if !stability.stable {
            return Err(Error::Unstable {
                max_real: stability.max_real_eig,
            });
        }
        Ok(StableSystem {
            system: self,
            max_real_eig: stability.max_real_eig,
        })
    }

    /// T(ω) = (−iω − M)⁻¹ B.
    pub fn transfer(&self, omega: f64) -> Result<TransferMatrix> {
        let resolvent = self.resolvent(omega);
        let lu = resolvent.lu();
        let u = lu.u();
        let pivots: Vec<f64> = (0..DIM).map(|k| u[(k, k)].norm()).collect();
        let largest = pivots.iter().cloned().fold(0.0, f64::max);
        let smallest = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smallest > 1e-14 * largest) {
            return Err(Error::SingularTransfer { omega });
        }
        let mut t = lu
            .solve(&self.input)
            .ok_or(Error::SingularTransfer { omega })?;
        // one step of iterative refinement
        let residual = self.input - resolvent * t;
        if let Some(correction) = lu.solve(&residual) {
            t += correction;
        }
        Ok(TransferMatrix { omega, matrix: t })
    }

    /// −iω I − M.
    pub fn resolvent(&self, omega: f64) -> DriftMatrix {
        DriftMatrix::from_diagonal_element(Complex64::new(0.0, -omega)) - self.drift
    }

    /// Stationary second moments V = ⟨v vᵀ⟩ from M V + V Mᵀ + B Dn Bᵀ = 0.
    pub fn lyapunov_covariance(&self) -> Result<DriftMatrix> {
        let stability = self.stability(0.0)?;
        if !stability.stable {
            return Err(Error::Unstable {
                max_real: stability.max_real_eig,
            });
        }
        let m = self.drift.unscale(self.scale);
        let q = self.diffusion().unscale(self.scale);
        // column-major vec: vec(MV) = (I⊗M) vec V, vec(VMᵀ) = (M⊗I) vec V
        let n = DIM * DIM;
        let mut k = DMatrix::<Complex64>::zeros(n, n);
        for col in 0..DIM {
            for row in 0..DIM {
                let r = col * DIM + row;
                for l in 0..DIM {
                    k[(r, col * DIM + l)] += m[(row, l)];
                    k[(r, l * DIM + row)] += m[(col, l)];
                }
            }
        }
        let rhs = DVector::from_iterator(n, q.iter().map(|z| -z));
        let solution = k
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("singular Lyapunov operator".into()))?;
        Ok(DriftMatrix::from_column_slice(solution.as_slice()))
    }

    /// B Dn Bᵀ.
    pub fn diffusion(&self) -> DriftMatrix {
        self.input * self.noise * self.input.transpose()
    }
}

/// A linear system known to be stable; spectra are only defined for these.
#[derive(Debug, Clone, PartialEq)]
pub struct StableSystem {
    system: DoubledLinearSystem,
    max_real_eig: f64,
}

impl StableSystem {
    pub fn max_real_eig(&self) -> f64 {
        self.max_real_eig
    }

    pub fn into_inner(self) -> DoubledLinearSystem {
        self.system
    }
}

impl std::ops::Deref for StableSystem {
    type Target = DoubledLinearSystem;

    fn deref(&self) -> &DoubledLinearSystem {
        &self.system
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub omega: f64,
    pub matrix: InputMatrix,
}

impl TransferMatrix {
    /// Backward error ‖(−iω − M)T − B‖ / (‖−iω − M‖ ‖T‖ + ‖B‖).
    pub fn residual(&self, sys: &DoubledLinearSystem) -> f64 {
        let resolvent = sys.resolvent(self.omega);
        let r = resolvent * self.matrix - sys.input;
        r.norm() / (resolvent.norm() * self.matrix.norm() + sys.input.norm())
    }
}
