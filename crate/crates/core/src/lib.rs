//! Simulation library for a quantum Otto heat engine whose working medium is
//! a pair of spin-1/2 particles with isotropic Heisenberg exchange in
//! inhomogeneous longitudinal magnetic fields.
//!
//! The engine alternates two unitary field-driving branches with two
//! instantaneous thermalization strokes. Driving the fields inhomogeneously
//! at a finite rate makes the Hamiltonian fail to commute with itself at
//! different times, which shows up as entropy production in the energy basis
//! and a work deficit relative to the quasistatic cycle. The library exposes
//!
//! * [`spin_system`] - the 4x4 Hamiltonian and its exact closed-form
//!   eigensystem,
//! * [`thermal`] - Gibbs states, eigenbasis projections and the two entropy
//!   functionals,
//! * [`dynamics`] - RK4 integration of the Liouville-von Neumann equation for
//!   time-dependent field protocols,
//! * [`otto_cycle`] - the four-stage cycle with work/heat accounting and the
//!   analytic sudden (lower) and adiabatic (upper) work bounds,
//! * [`oracle`] - independent brute-force cross-checks (complex Jacobi
//!   eigensolver, piecewise-exact propagator, raw projector populations).
//!
//! Units: hbar = k_B = 1 throughout; energies, fields and temperatures share
//! one energy unit, times its inverse.

pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod otto_cycle;
pub mod spin_system;
pub mod thermal;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

/// 4x4 complex matrix in the fixed computational basis order
/// (|00>, |10>, |01>, |11>).
pub type CMatrix4 = Matrix4<Complex64>;
/// 4-component complex ket in the same basis order.
pub type CVector4 = Vector4<Complex64>;

pub use error::{EngineError, Result};
pub use spin_system::{
    build_hamiltonian, commutator_norm, spectral_decomposition, HamiltonianMatrix,
    SpectralDecomposition, SpinPairParams,
};
pub use thermal::{
    energy_entropy, gibbs_populations, gibbs_state, project_populations, von_neumann_entropy,
    DensityMatrix, PopulationVector,
};
pub use dynamics::{
    evolve, evolve_traced, heat_rate_check, instantaneous_power, mixing_angle, EvolutionResult,
    FieldProtocol, StepPolicy, TrajectoryPoint,
};
pub use otto_cycle::{
    adiabatic_work_bound, entropy_production, run_constant_delta_b_cycle, run_cycle,
    sudden_work_bound, work_from_populations, CycleConfig, CycleReport,
};

pub(crate) fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Frobenius norm of a complex 4x4 matrix.
pub(crate) fn frobenius(m: &CMatrix4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
