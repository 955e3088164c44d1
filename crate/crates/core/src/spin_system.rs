//! Two-spin Heisenberg Hamiltonian and its exact spectral decomposition.
//!
//! The Hamiltonian is `H = H_int + H_ext` with isotropic exchange
//! `H_int = 2J sigma1.sigma2` and longitudinal fields
//! `H_ext = B1 sigma_z1 + B2 sigma_z2`. The sign convention is
//! `sigma_z|0> = -|0>`, chosen so that |00> has energy `2J - B1 - B2` and
//! |11> has `2J + B1 + B2`. Total magnetization is conserved, so the matrix
//! is block-diagonal: |00> and |11> are always eigenvectors, and only the
//! {|10>, |01>} block mixes.

use crate::error::{EngineError, Result};
use crate::{frobenius, re, CMatrix4, CVector4};
use num_complex::Complex64;

/// Physical configuration of the spin pair: exchange coupling and the two
/// longitudinal fields, in units with hbar = k_B = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPairParams {
    pub j_coupling: f64,
    pub b1: f64,
    pub b2: f64,
}

impl SpinPairParams {
    pub fn new(j_coupling: f64, b1: f64, b2: f64) -> Result<Self> {
        let p = Self { j_coupling, b1, b2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.j_coupling.is_finite() || self.j_coupling <= 0.0 {
            return Err(EngineError::InvalidParameter(format!(
                "j_coupling must be finite and > 0, got {}",
                self.j_coupling
            )));
        }
        if !self.b1.is_finite() || !self.b2.is_finite() {
            return Err(EngineError::InvalidParameter(format!(
                "fields must be finite, got b1 = {}, b2 = {}",
                self.b1, self.b2
            )));
        }
        Ok(())
    }

    /// Field inhomogeneity `Delta B = B1 - B2`.
    pub fn delta_b(&self) -> f64 {
        self.b1 - self.b2
    }
}

/// 4x4 Hamiltonian matrix together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    entries: CMatrix4,
    params: SpinPairParams,
}

impl HamiltonianMatrix {
    pub fn entries(&self) -> &CMatrix4 {
        &self.entries
    }

    pub fn params(&self) -> &SpinPairParams {
        &self.params
    }
}

/// Exchange part `2J sigma1.sigma2` alone.
pub fn exchange_hamiltonian(j_coupling: f64) -> CMatrix4 {
    let j2 = re(2.0 * j_coupling);
    let j4 = re(4.0 * j_coupling);
    let z = Complex64::ZERO;
    CMatrix4::new(
        j2, z, z, z, //
        z, -j2, j4, z, //
        z, j4, -j2, z, //
        z, z, z, j2,
    )
}

/// Field part `B1 sigma_z1 + B2 sigma_z2` alone (sigma_z|0> = -|0>).
pub fn field_hamiltonian(b1: f64, b2: f64) -> CMatrix4 {
    CMatrix4::from_diagonal(&CVector4::new(
        re(-b1 - b2),
        re(b1 - b2),
        re(-b1 + b2),
        re(b1 + b2),
    ))
}

/// Full Hamiltonian `H_int + H_ext` in the fixed computational basis order.
pub fn build_hamiltonian(params: SpinPairParams) -> Result<HamiltonianMatrix> {
    params.validate()?;
    let entries = exchange_hamiltonian(params.j_coupling) + field_hamiltonian(params.b1, params.b2);
    Ok(HamiltonianMatrix { entries, params })
}

/// Closed-form eigensystem of the two-spin Hamiltonian.
///
/// Eigenvalues and eigenvectors are kept in the fixed order
/// (|psi1>, |00>, |psi3>, |11>) with energies
/// (-2J-K, 2J-B1-B2, -2J+K, 2J+B1+B2); this order is *not* ascending in
/// general and downstream population indexing depends on it. The mixing
/// amplitudes satisfy a^2 + b^2 = 1 with a >= 0, b > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Dimensionless field asymmetry y = (B1 - B2) / 4J.
    pub y: f64,
    /// Central-block gap K = 4J sqrt(1 + y^2) > 0.
    pub k_gap: f64,
    /// Amplitude of |10> in |psi3> (and of -|01> in |psi1>).
    pub a_coeff: f64,
    /// Amplitude of |01> in |psi3> (and of |10> in |psi1>).
    pub b_coeff: f64,
    /// Normalizer N = sqrt(1 + (y + sqrt(1+y^2))^2).
    pub n_norm: f64,
    /// Energies in the fixed order (E_psi1, E_00, E_psi3, E_11).
    pub eigenvalues: [f64; 4],
    /// Orthonormal kets in the fixed order (|psi1>, |00>, |psi3>, |11>).
    pub eigenvectors: [CVector4; 4],
}

pub fn spectral_decomposition(params: SpinPairParams) -> Result<SpectralDecomposition> {
    params.validate()?;
    let j = params.j_coupling;
    let y = (params.b1 - params.b2) / (4.0 * j);
    let root = (1.0 + y * y).sqrt();
    let k_gap = 4.0 * j * root;
    let n_norm = (1.0 + (y + root).powi(2)).sqrt();
    // y + sqrt(1+y^2) > 0 for all y, so a > 0 and the phase convention
    // a >= 0, b > 0 holds without extra sign fixes.
    let a_coeff = (y + root) / n_norm;
    let b_coeff = 1.0 / n_norm;

    let z = Complex64::ZERO;
    let psi1 = CVector4::new(z, re(b_coeff), re(-a_coeff), z);
    let ket00 = CVector4::new(re(1.0), z, z, z);
    let psi3 = CVector4::new(z, re(a_coeff), re(b_coeff), z);
    let ket11 = CVector4::new(z, z, z, re(1.0));

    Ok(SpectralDecomposition {
        y,
        k_gap,
        a_coeff,
        b_coeff,
        n_norm,
        eigenvalues: [
            -2.0 * j - k_gap,
            2.0 * j - params.b1 - params.b2,
            -2.0 * j + k_gap,
            2.0 * j + params.b1 + params.b2,
        ],
        eigenvectors: [psi1, ket00, psi3, ket11],
    })
}

/// Frobenius norm of the commutator [A, B] = AB - BA.
pub fn commutator_norm(h_a: &CMatrix4, h_b: &CMatrix4) -> f64 {
    frobenius(&(h_a * h_b - h_b * h_a))
}
