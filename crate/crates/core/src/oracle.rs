//! Independent brute-force implementations used for cross-validation only.
//!
//! Nothing here reuses the closed-form a/b/y/K algebra or the RK4 stepper:
//! the eigensolver is a cyclic complex Jacobi iteration, the propagator is a
//! piecewise matrix exponential built from that eigensolver, and populations
//! come from explicit projector inner products. Eigenvalues are reported in
//! ascending order (unlike the paper-fixed order of `spin_system`), so
//! comparisons happen as multisets plus eigenvector overlaps.

use crate::error::{EngineError, Result};
use crate::thermal::{DensityMatrix, PopulationVector};
use crate::{frobenius, re, CMatrix4, CVector4};
use crate::dynamics::FieldProtocol;
use crate::spin_system::{exchange_hamiltonian, field_hamiltonian};
use num_complex::Complex64;

const OFF_DIAGONAL_TARGET: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Numerically diagonalized 4x4 Hermitian matrix.
#[derive(Debug, Clone)]
pub struct OracleEigensystem {
    /// Eigenvalues in ascending order.
    pub eigenvalues: [f64; 4],
    /// Matching orthonormal eigenvectors as columns.
    pub eigenvectors: CMatrix4,
}

fn off_diagonal_mass(m: &CMatrix4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi diagonalization of a 4x4 Hermitian matrix.
///
/// Sweeps the strict upper triangle in a fixed order, annihilating each
/// off-diagonal element with a complex plane rotation, until the
/// off-diagonal Frobenius mass drops below 1e-14.
pub fn jacobi_eigensystem(h: &CMatrix4) -> Result<OracleEigensystem> {
    if frobenius(&(h - h.adjoint())) > 1e-12 {
        return Err(EngineError::InvalidParameter(
            "jacobi_eigensystem requires a Hermitian matrix".into(),
        ));
    }
    let mut a = *h;
    let mut v = CMatrix4::identity();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_mass(&a) < OFF_DIAGONAL_TARGET {
            converged = true;
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a[(p, q)];
                if apq.norm() < OFF_DIAGONAL_TARGET * 1e-2 {
                    continue;
                }
                let phi = apq.arg();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(a[(q, q)].re - a[(p, p)].re);
                let (s, c) = theta.sin_cos();
                let mut g = CMatrix4::identity();
                g[(p, p)] = re(c);
                g[(q, q)] = re(c);
                g[(p, q)] = Complex64::from_polar(s, phi);
                g[(q, p)] = -Complex64::from_polar(s, -phi);
                a = g.adjoint() * a * g;
                v *= g;
            }
        }
    }
    if !converged && off_diagonal_mass(&a) >= OFF_DIAGONAL_TARGET {
        return Err(EngineError::NoConvergence(MAX_SWEEPS));
    }

    let mut order = [0usize, 1, 2, 3];
    let diag: Vec<f64> = (0..4).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let mut eigenvalues = [0.0; 4];
    let mut eigenvectors = CMatrix4::zeros();
    for (slot, &i) in order.iter().enumerate() {
        eigenvalues[slot] = diag[i];
        eigenvectors.set_column(slot, &v.column(i).into_owned());
    }
    Ok(OracleEigensystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Piecewise-exact propagation of `rho0` through the protocol: the
/// Hamiltonian is frozen at the midpoint of each of `n_slices` equal
/// sub-intervals and the exact 4x4 propagator exp(-i H dt) is applied.
/// Each slice is exactly unitary by construction.
pub fn reference_evolve(
    rho0: &DensityMatrix,
    j_coupling: f64,
    protocol: &FieldProtocol,
    n_slices: usize,
) -> Result<DensityMatrix> {
    if n_slices == 0 {
        return Err(EngineError::InvalidParameter(
            "reference_evolve needs n_slices >= 1".into(),
        ));
    }
    let duration = protocol.duration();
    let dt = duration / n_slices as f64;
    let h_int = exchange_hamiltonian(j_coupling);
    let mut rho = *rho0.entries();
    for k in 0..n_slices {
        let t_mid = (k as f64 + 0.5) * dt;
        let (b1, b2) = protocol.field_at(t_mid)?;
        let eig = jacobi_eigensystem(&(h_int + field_hamiltonian(b1, b2)))?;
        let phases = CVector4::from_fn(|i, _| {
            Complex64::from_polar(1.0, -eig.eigenvalues[i] * dt)
        });
        let u = eig.eigenvectors * CMatrix4::from_diagonal(&phases) * eig.eigenvectors.adjoint();
        rho = u * rho * u.adjoint();
    }
    DensityMatrix::new(rho)
}

/// Populations <v_i|rho|v_i> against an explicitly supplied basis.
pub fn projector_populations(rho: &DensityMatrix, basis: &[CVector4; 4]) -> Result<PopulationVector> {
    let mut p = [0.0; 4];
    for (slot, v) in basis.iter().enumerate() {
        p[slot] = (v.adjoint() * rho.entries() * v)[(0, 0)].re;
    }
    PopulationVector::new(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, StepPolicy};
    use crate::spin_system::{build_hamiltonian, spectral_decomposition, SpinPairParams};
    use crate::thermal::{gibbs_populations, gibbs_state, project_populations};
    use approx::assert_relative_eq;

    #[test]
    fn identity_and_diagonal_inputs() {
        let eye = jacobi_eigensystem(&CMatrix4::identity()).unwrap();
        for &e in &eye.eigenvalues {
            assert_relative_eq!(e, 1.0, epsilon = 1e-14);
        }
        let d = CMatrix4::from_diagonal(&CVector4::new(
            re(-5.8),
            re(-0.6),
            re(0.2),
            re(6.2),
        ));
        let eig = jacobi_eigensystem(&d).unwrap();
        assert_eq!(eig.eigenvalues, [-5.8, -0.6, 0.2, 6.2]);
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let mut m = CMatrix4::identity();
        m[(0, 1)] = re(1.0);
        assert!(jacobi_eigensystem(&m).is_err());
    }

    #[test]
    fn reproduces_closed_form_spectrum() {
        let p = SpinPairParams::new(0.1, 3.0, 4.0).unwrap();
        let h = build_hamiltonian(p).unwrap();
        let eig = jacobi_eigensystem(h.entries()).unwrap();
        let sd = spectral_decomposition(p).unwrap();
        let mut expected = sd.eigenvalues;
        expected.sort_by(f64::total_cmp);
        for i in 0..4 {
            assert_relative_eq!(eig.eigenvalues[i], expected[i], epsilon = 1e-12);
        }
        // residuals and orthonormality
        for i in 0..4 {
            let v = eig.eigenvectors.column(i);
            let r = h.entries() * v - v * re(eig.eigenvalues[i]);
            assert!(r.norm() < 1e-11);
            for j in 0..4 {
                let ovl = (eig.eigenvectors.column(j).adjoint() * v)[(0, 0)].norm();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ovl - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_hamiltonian_single_slice_is_exact() {
        // ramp with zero field change: H constant, one slice suffices
        let protocol = FieldProtocol::sine_pulse(3.0, 4.0, 4.0, 7.0).unwrap();
        let p = SpinPairParams::new(0.1, 3.0, 3.0).unwrap();
        // start from a non-stationary state for the final Hamiltonian
        let rho0 = gibbs_state(p, 1.0).unwrap();
        let one = reference_evolve(&rho0, 0.1, &protocol, 1).unwrap();
        let many = reference_evolve(&rho0, 0.1, &protocol, 64).unwrap();
        assert!(frobenius(&(one.entries() - many.entries())) < 1e-12);
    }

    #[test]
    fn stationary_state_is_preserved() {
        let ket00 = CVector4::new(re(1.0), Complex64::ZERO, Complex64::ZERO, Complex64::ZERO);
        let rho0 = DensityMatrix::pure(&ket00).unwrap();
        let protocol = FieldProtocol::sine_pulse(3.0, 3.0, 4.0, 5.0).unwrap();
        let out = reference_evolve(&rho0, 0.1, &protocol, 200).unwrap();
        assert!(frobenius(&(out.entries() - rho0.entries())) < 1e-12);
    }

    #[test]
    fn rk4_and_reference_propagator_agree_on_fig2_branch() {
        let p0 = SpinPairParams::new(0.1, 3.0, 3.0).unwrap();
        let protocol = FieldProtocol::sine_pulse(3.0, 3.0, 4.0, 10.0).unwrap();
        let rho0 = gibbs_state(p0, 1.0).unwrap();
        let step = StepPolicy::Auto.step_for(0.1, &protocol).unwrap();
        let rk4 = evolve(&rho0, &p0, &protocol, step).unwrap();
        let reference = reference_evolve(&rho0, 0.1, &protocol, 100_000).unwrap();
        let dist = frobenius(&(rk4.final_state.entries() - reference.entries()));
        assert!(dist < 1e-7, "distance {dist}");
    }

    #[test]
    fn projector_populations_match_closed_form_projection() {
        let p = SpinPairParams::new(0.1, 3.0, 4.0).unwrap();
        let rho = gibbs_state(SpinPairParams::new(0.1, 3.0, 3.0).unwrap(), 1.0).unwrap();
        let sd = spectral_decomposition(p).unwrap();
        let brute = projector_populations(&rho, &sd.eigenvectors).unwrap();
        let closed = project_populations(&rho, p).unwrap();
        for i in 0..4 {
            assert_relative_eq!(brute[i], closed[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn gibbs_state_in_numeric_basis_gives_boltzmann_populations() {
        let p = SpinPairParams::new(0.1, 3.0, 4.0).unwrap();
        let rho = gibbs_state(p, 2.0).unwrap();
        let h = build_hamiltonian(p).unwrap();
        let eig = jacobi_eigensystem(h.entries()).unwrap();
        let basis = [
            eig.eigenvectors.column(0).into_owned(),
            eig.eigenvectors.column(1).into_owned(),
            eig.eigenvectors.column(2).into_owned(),
            eig.eigenvectors.column(3).into_owned(),
        ];
        let pops = projector_populations(&rho, &basis).unwrap();
        // independent Boltzmann weights from the numeric eigenvalues
        let e_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let w = eig.eigenvalues.map(|e| (-(e - e_min) / 2.0).exp());
        let z: f64 = w.iter().sum();
        for i in 0..4 {
            assert_relative_eq!(pops[i], w[i] / z, epsilon = 1e-10);
        }
        // sorted ascending by energy means sorted descending by population
        assert!(pops[0] >= pops[1] && pops[1] >= pops[2] && pops[2] >= pops[3]);

        // cross-check against the Eq.-(3)-style closed-form populations
        let closed = gibbs_populations(p, 2.0).unwrap();
        let mut closed_sorted = closed.as_array();
        closed_sorted.sort_by(|a, b| b.total_cmp(a));
        for i in 0..4 {
            assert_relative_eq!(pops[i], closed_sorted[i], epsilon = 1e-12);
        }
    }
}
