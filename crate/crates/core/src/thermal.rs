//! Gibbs states and the two entropy functionals that diagnose friction.
//!
//! The von Neumann entropy is invariant under the unitary driving branches;
//! the energy entropy (Shannon entropy of the populations in the
//! instantaneous energy eigenbasis) grows whenever the drive generates
//! coherences, and the gap between the two is the friction signature.

use crate::error::{EngineError, Result};
use crate::spin_system::{spectral_decomposition, SpinPairParams};
use crate::{frobenius, re, CMatrix4, CVector4};

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const EIGENVALUE_CLIP: f64 = 1e-10;

/// 4x4 density matrix of the working medium: Hermitian, unit trace,
/// positive semidefinite (all checked on construction).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix4,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix4) -> Result<Self> {
        let herm = frobenius(&(entries - entries.adjoint()));
        if herm > HERMITICITY_TOL {
            return Err(EngineError::InvalidState(format!(
                "density matrix not Hermitian: ||rho - rho^dag|| = {herm:.3e}"
            )));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(EngineError::InvalidState(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min_eig = entries
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -EIGENVALUE_CLIP {
            return Err(EngineError::InvalidState(format!(
                "density matrix not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { entries })
    }

    /// Pure state |psi><psi| from a normalized ket.
    pub fn pure(ket: &CVector4) -> Result<Self> {
        Self::new(ket * ket.adjoint())
    }

    pub fn entries(&self) -> &CMatrix4 {
        &self.entries
    }

    /// Tr(rho^2).
    pub fn purity(&self) -> f64 {
        (self.entries * self.entries).trace().re
    }
}

/// Probabilities over the four energy eigenstates in the fixed order
/// (psi1, 00, psi3, 11).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationVector {
    p: [f64; 4],
}

impl PopulationVector {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let mut clipped = p;
        for x in &mut clipped {
            if *x < -1e-12 || *x > 1.0 + 1e-12 {
                return Err(EngineError::InvalidState(format!(
                    "population {x} outside [0, 1]"
                )));
            }
            *x = x.clamp(0.0, 1.0);
        }
        let sum: f64 = clipped.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(EngineError::InvalidState(format!(
                "populations sum to {sum}, expected 1"
            )));
        }
        Ok(Self { p: clipped })
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.p
    }

    /// Shannon entropy -sum p ln p with 0 ln 0 = 0.
    pub fn shannon_entropy(&self) -> f64 {
        self.p
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| -x * x.ln())
            .sum()
    }

    /// Mean energy for the matching set of level energies.
    pub fn mean_energy(&self, energies: &[f64; 4]) -> f64 {
        self.p.iter().zip(energies).map(|(p, e)| p * e).sum()
    }
}

impl std::ops::Index<usize> for PopulationVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.p[i]
    }
}

/// Equilibrium populations exp(-E_i/T)/Z over the closed-form spectrum, in
/// the fixed eigenstate order. The minimum energy is subtracted before
/// exponentiation so low temperatures do not overflow.
pub fn gibbs_populations(params: SpinPairParams, temperature: f64) -> Result<PopulationVector> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(EngineError::InvalidTemperature(temperature));
    }
    let sd = spectral_decomposition(params)?;
    let e_min = sd.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights = sd.eigenvalues.map(|e| (-(e - e_min) / temperature).exp());
    let z: f64 = weights.iter().sum();
    PopulationVector::new(weights.map(|w| w / z))
}

/// Thermal state exp(-H/T)/Z assembled from the closed-form eigensystem.
pub fn gibbs_state(params: SpinPairParams, temperature: f64) -> Result<DensityMatrix> {
    let pops = gibbs_populations(params, temperature)?;
    let sd = spectral_decomposition(params)?;
    let mut m = CMatrix4::zeros();
    for i in 0..4 {
        let v = &sd.eigenvectors[i];
        m += (v * v.adjoint()) * re(pops[i]);
    }
    DensityMatrix::new(m)
}

/// Populations <e_i|rho|e_i> in the closed-form eigenbasis of the given
/// parameters.
pub fn project_populations(rho: &DensityMatrix, params: SpinPairParams) -> Result<PopulationVector> {
    let sd = spectral_decomposition(params)?;
    let mut p = [0.0; 4];
    for i in 0..4 {
        let v = &sd.eigenvectors[i];
        p[i] = (v.adjoint() * rho.entries() * v)[(0, 0)].re;
    }
    PopulationVector::new(p)
}

/// -Tr(rho ln rho) over the eigenvalues of rho, with 0 ln 0 = 0.
///
/// Eigenvalues in [-1e-10, 0) are treated as exact zeros; anything more
/// negative is a corrupted state and raises an error.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eigs = rho.entries().symmetric_eigen().eigenvalues;
    let mut s = 0.0;
    for &lambda in eigs.iter() {
        if lambda < -EIGENVALUE_CLIP {
            return Err(EngineError::InvalidState(format!(
                "negative eigenvalue {lambda:.3e} in entropy evaluation"
            )));
        }
        if lambda > 0.0 {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s.max(0.0))
}

/// Shannon entropy of the populations in the energy eigenbasis of `params`.
pub fn energy_entropy(rho: &DensityMatrix, params: SpinPairParams) -> Result<f64> {
    Ok(project_populations(rho, params)?.shannon_entropy())
}
