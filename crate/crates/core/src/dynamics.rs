//! Liouville-von Neumann integration for time-dependent field protocols.
//!
//! The equation of motion is d(rho)/dt = -i [H(t), rho] with hbar = 1,
//! integrated by classical fixed-step fourth-order Runge-Kutta. The
//! integrator never renormalizes or re-Hermitizes the state: trace and
//! Hermiticity drift are monitored and reported, and exceeding the tolerance
//! is an error (the honest signal that the step is too large), never a
//! silent correction.

use crate::error::{EngineError, Result};
use crate::spin_system::{exchange_hamiltonian, field_hamiltonian, SpinPairParams};
use crate::thermal::DensityMatrix;
use crate::{frobenius, re, CMatrix4};
use num_complex::Complex64;

/// Drift tolerance for trace and Hermiticity over one `evolve` run.
pub const DRIFT_TOLERANCE: f64 = 1e-8;

/// Tolerance below which a time slightly outside [0, duration] is clamped.
const TIME_SLACK: f64 = 1e-12;

/// One sample of an (b1, b2) field table for tabulated protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub t: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Time-dependent field schedule for one driving branch.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldProtocol {
    /// B1 held fixed; B2(t) = start + (end - start) sin(pi t / 2D), so the
    /// pulse starts at `b2_start` with zero curvature lag and ends exactly at
    /// `b2_end` where sin reaches 1.
    SinePulse {
        b1: f64,
        b2_start: f64,
        b2_end: f64,
        duration: f64,
    },
    /// Both fields follow the same sine-shaped ramp so Delta B = B1 - B2 is
    /// constant in time; the eigenbasis is then time-independent and the
    /// drive is frictionless.
    ConstantDeltaBRamp {
        b1_start: f64,
        b1_end: f64,
        b2_start: f64,
        b2_end: f64,
        duration: f64,
    },
    /// Monotone-cubic (Fritsch-Carlson) interpolation through tabulated
    /// samples; build with [`FieldProtocol::custom_tabulated`].
    CustomTabulated {
        samples: Vec<FieldSample>,
        /// Interpolant tangents per sample for (b1, b2).
        tangents: Vec<(f64, f64)>,
    },
}

/// Sine ramp from `start` to `end` over `duration`, and its time derivative.
fn sine_ramp(start: f64, end: f64, duration: f64, t: f64) -> (f64, f64) {
    let phase = std::f64::consts::FRAC_PI_2 * t / duration;
    let rate = std::f64::consts::FRAC_PI_2 / duration;
    (
        start + (end - start) * phase.sin(),
        (end - start) * rate * phase.cos(),
    )
}

/// Fritsch-Carlson tangents for a monotonicity-preserving cubic Hermite
/// interpolant through (x_i, y_i).
fn monotone_tangents(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut d = vec![0.0; n - 1];
    for i in 0..n - 1 {
        d[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    }
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 {
            0.0
        } else {
            0.5 * (d[i - 1] + d[i])
        };
    }
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let alpha = m[i] / d[i];
        let beta = m[i + 1] / d[i];
        let s = alpha * alpha + beta * beta;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * alpha * d[i];
            m[i + 1] = tau * beta * d[i];
        }
    }
    m
}

/// Cubic Hermite value and derivative on one interval.
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * m0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * m1;
    let deriv = ((6.0 * s2 - 6.0 * s) * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * h * m0
        + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * h * m1)
        / h;
    (value, deriv)
}

impl FieldProtocol {
    pub fn sine_pulse(b1: f64, b2_start: f64, b2_end: f64, duration: f64) -> Result<Self> {
        let p = Self::SinePulse {
            b1,
            b2_start,
            b2_end,
            duration,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn constant_delta_b_ramp(
        b1_start: f64,
        b1_end: f64,
        b2_start: f64,
        b2_end: f64,
        duration: f64,
    ) -> Result<Self> {
        let p = Self::ConstantDeltaBRamp {
            b1_start,
            b1_end,
            b2_start,
            b2_end,
            duration,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn custom_tabulated(samples: Vec<FieldSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(EngineError::InvalidParameter(
                "tabulated protocol needs at least 2 samples".into(),
            ));
        }
        if samples[0].t != 0.0 {
            return Err(EngineError::InvalidParameter(
                "tabulated protocol must start at t = 0".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(EngineError::InvalidParameter(
                "tabulated sample times must be strictly increasing".into(),
            ));
        }
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let b1s: Vec<f64> = samples.iter().map(|s| s.b1).collect();
        let b2s: Vec<f64> = samples.iter().map(|s| s.b2).collect();
        let m1 = monotone_tangents(&ts, &b1s);
        let m2 = monotone_tangents(&ts, &b2s);
        let tangents = m1.into_iter().zip(m2).collect();
        let p = Self::CustomTabulated { samples, tangents };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let check_finite = |vals: &[f64]| -> Result<()> {
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(EngineError::InvalidParameter(
                    "protocol fields must be finite".into(),
                ));
            }
            Ok(())
        };
        match self {
            Self::SinePulse {
                b1,
                b2_start,
                b2_end,
                duration,
            } => {
                check_finite(&[*b1, *b2_start, *b2_end, *duration])?;
                if *duration <= 0.0 {
                    return Err(EngineError::InvalidParameter(format!(
                        "protocol duration must be > 0, got {duration}"
                    )));
                }
            }
            Self::ConstantDeltaBRamp {
                b1_start,
                b1_end,
                b2_start,
                b2_end,
                duration,
            } => {
                check_finite(&[*b1_start, *b1_end, *b2_start, *b2_end, *duration])?;
                if *duration <= 0.0 {
                    return Err(EngineError::InvalidParameter(format!(
                        "protocol duration must be > 0, got {duration}"
                    )));
                }
                let drift = (b1_end - b2_end) - (b1_start - b2_start);
                if drift.abs() > 1e-12 {
                    return Err(EngineError::InvalidParameter(format!(
                        "constant-Delta-B ramp does not preserve Delta B: drift {drift:.3e}"
                    )));
                }
            }
            Self::CustomTabulated { samples, .. } => {
                for s in samples {
                    check_finite(&[s.t, s.b1, s.b2])?;
                }
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        match self {
            Self::SinePulse { duration, .. } | Self::ConstantDeltaBRamp { duration, .. } => {
                *duration
            }
            Self::CustomTabulated { samples, .. } => samples.last().unwrap().t,
        }
    }

    /// Fields (B1, B2) at time t in [0, duration]; endpoints are exact.
    pub fn field_at(&self, t: f64) -> Result<(f64, f64)> {
        Ok(self.field_and_derivative_at(t)?.0)
    }

    /// Analytic field derivatives (dB1/dt, dB2/dt) at time t.
    pub fn field_derivative_at(&self, t: f64) -> Result<(f64, f64)> {
        Ok(self.field_and_derivative_at(t)?.1)
    }

    fn field_and_derivative_at(&self, t: f64) -> Result<((f64, f64), (f64, f64))> {
        let d = self.duration();
        if !(-TIME_SLACK..=d + TIME_SLACK).contains(&t) {
            return Err(EngineError::TimeOutOfRange { t, duration: d });
        }
        let t = t.clamp(0.0, d);
        match self {
            Self::SinePulse {
                b1,
                b2_start,
                b2_end,
                duration,
            } => {
                let (b2, db2) = sine_ramp(*b2_start, *b2_end, *duration, t);
                Ok(((*b1, b2), (0.0, db2)))
            }
            Self::ConstantDeltaBRamp {
                b1_start,
                b1_end,
                b2_start,
                b2_end,
                duration,
            } => {
                let (b1, db1) = sine_ramp(*b1_start, *b1_end, *duration, t);
                let (b2, db2) = sine_ramp(*b2_start, *b2_end, *duration, t);
                Ok(((b1, b2), (db1, db2)))
            }
            Self::CustomTabulated { samples, tangents } => {
                let i = match samples.partition_point(|s| s.t <= t) {
                    0 => 0,
                    k if k >= samples.len() => samples.len() - 2,
                    k => k - 1,
                };
                let (s0, s1) = (&samples[i], &samples[i + 1]);
                let (m0, m1) = (tangents[i], tangents[i + 1]);
                let (b1, db1) = hermite(s0.t, s1.t, s0.b1, s1.b1, m0.0, m1.0, t);
                let (b2, db2) = hermite(s0.t, s1.t, s0.b2, s1.b2, m0.1, m1.1, t);
                Ok(((b1, b2), (db1, db2)))
            }
        }
    }
}

/// Step-size selection for the RK4 integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    /// duration/2000, capped so that step * ||H|| <= 0.05.
    Auto,
    /// Fixed step, taken as given (last step shortened to hit the endpoint).
    Fixed(f64),
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self::Auto
    }
}

impl StepPolicy {
    pub fn step_for(&self, j_coupling: f64, protocol: &FieldProtocol) -> Result<f64> {
        match *self {
            Self::Fixed(h) => {
                if !h.is_finite() || h <= 0.0 {
                    return Err(EngineError::InvalidParameter(format!(
                        "fixed step must be finite and > 0, got {h}"
                    )));
                }
                Ok(h)
            }
            Self::Auto => {
                let d = protocol.duration();
                let mut h_norm_max: f64 = 0.0;
                for k in 0..=4 {
                    let (b1, b2) = protocol.field_at(d * k as f64 / 4.0)?;
                    let h = exchange_hamiltonian(j_coupling) + field_hamiltonian(b1, b2);
                    h_norm_max = h_norm_max.max(frobenius(&h));
                }
                let cap = if h_norm_max > 0.0 {
                    0.05 / h_norm_max
                } else {
                    f64::INFINITY
                };
                Ok((d / 2000.0).min(cap))
            }
        }
    }
}

/// Outcome of one `evolve` run with its drift diagnostics.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: DensityMatrix,
    pub trace_drift: f64,
    pub hermiticity_drift: f64,
    pub purity_initial: f64,
    pub purity_final: f64,
    pub steps_taken: usize,
}

/// State sample along a trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: CMatrix4,
}

fn liouville_rhs(h: &CMatrix4, rho: &CMatrix4) -> CMatrix4 {
    (h * rho - rho * h) * Complex64::new(0.0, -1.0)
}

fn integrate(
    rho0: &DensityMatrix,
    params0: &SpinPairParams,
    protocol: &FieldProtocol,
    step: f64,
    mut on_step: impl FnMut(f64, &CMatrix4),
) -> Result<EvolutionResult> {
    params0.validate()?;
    protocol.validate()?;
    if !step.is_finite() || step <= 0.0 {
        return Err(EngineError::InvalidParameter(format!(
            "step must be finite and > 0, got {step}"
        )));
    }
    let (b1_0, b2_0) = protocol.field_at(0.0)?;
    if (b1_0 - params0.b1).abs() > 1e-9 || (b2_0 - params0.b2).abs() > 1e-9 {
        return Err(EngineError::InvalidParameter(format!(
            "protocol start fields ({b1_0}, {b2_0}) disagree with params ({}, {})",
            params0.b1, params0.b2
        )));
    }

    let h_int = exchange_hamiltonian(params0.j_coupling);
    let ham_at = |t: f64| -> Result<CMatrix4> {
        let (b1, b2) = protocol.field_at(t)?;
        Ok(h_int + field_hamiltonian(b1, b2))
    };

    let duration = protocol.duration();
    let mut rho = *rho0.entries();
    let purity_initial = rho0.purity();
    on_step(0.0, &rho);

    // Uniform grid of full steps; the remainder (if any) is one shorter
    // step so the endpoint fields are hit exactly, never overshot.
    let n_full = (duration / step + TIME_SLACK).floor() as usize;
    let remainder = duration - n_full as f64 * step;
    let mut steps_taken = 0;
    let advance = |t: f64, t_end: f64, rho: &mut CMatrix4| -> Result<()> {
        let h = t_end - t;
        let h1 = ham_at(t)?;
        let hm = ham_at(t + 0.5 * h)?;
        let h2 = ham_at(t_end)?;
        let k1 = liouville_rhs(&h1, rho);
        let k2 = liouville_rhs(&hm, &(*rho + k1 * re(0.5 * h)));
        let k3 = liouville_rhs(&hm, &(*rho + k2 * re(0.5 * h)));
        let k4 = liouville_rhs(&h2, &(*rho + k3 * re(h)));
        *rho += (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(h / 6.0);
        Ok(())
    };
    for i in 0..n_full {
        // hit the exact duration on the last step regardless of remainder
        let t = i as f64 * step;
        let t_end = if i + 1 == n_full && remainder <= step * TIME_SLACK {
            duration
        } else {
            (i + 1) as f64 * step
        };
        advance(t, t_end, &mut rho)?;
        steps_taken += 1;
        on_step(t_end, &rho);
    }
    if remainder > step * TIME_SLACK {
        advance(n_full as f64 * step, duration, &mut rho)?;
        steps_taken += 1;
        on_step(duration, &rho);
    }

    let trace_drift = {
        let tr = rho.trace();
        ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt()
    };
    let hermiticity_drift = frobenius(&(rho - rho.adjoint()));
    if trace_drift > DRIFT_TOLERANCE || hermiticity_drift > DRIFT_TOLERANCE {
        return Err(EngineError::DriftExceeded {
            trace: trace_drift,
            hermiticity: hermiticity_drift,
            tolerance: DRIFT_TOLERANCE,
        });
    }
    let final_state = DensityMatrix::new(rho)?;
    let purity_final = final_state.purity();
    Ok(EvolutionResult {
        final_state,
        trace_drift,
        hermiticity_drift,
        purity_initial,
        purity_final,
        steps_taken,
    })
}

/// RK4 integration of the Liouville-von Neumann equation over the full
/// protocol duration. `params0` supplies the exchange coupling and must
/// agree with the protocol fields at t = 0.
pub fn evolve(
    rho0: &DensityMatrix,
    params0: &SpinPairParams,
    protocol: &FieldProtocol,
    step: f64,
) -> Result<EvolutionResult> {
    integrate(rho0, params0, protocol, step, |_, _| {})
}

/// As [`evolve`], additionally recording the state after every step
/// (including the initial state at t = 0).
pub fn evolve_traced(
    rho0: &DensityMatrix,
    params0: &SpinPairParams,
    protocol: &FieldProtocol,
    step: f64,
) -> Result<(EvolutionResult, Vec<TrajectoryPoint>)> {
    let mut samples = Vec::new();
    let result = integrate(rho0, params0, protocol, step, |t, rho| {
        samples.push(TrajectoryPoint { t, state: *rho });
    })?;
    Ok((result, samples))
}

/// Instantaneous power Tr((dH/dt) rho). The trace must be real up to 1e-10.
pub fn instantaneous_power(rho: &DensityMatrix, dh_dt: &CMatrix4) -> Result<f64> {
    let tr = (dh_dt * rho.entries()).trace();
    if tr.im.abs() > 1e-10 {
        return Err(EngineError::NonRealTrace(tr.im));
    }
    Ok(tr.re)
}

/// Maximum |Tr(H d(rho)/dt)| over the sampled trajectory. Along a unitary
/// trajectory this heat-rate term vanishes identically (Tr(H [H, rho]) = 0),
/// so anything above roundoff flags a broken integration.
pub fn heat_rate_check(
    samples: &[TrajectoryPoint],
    j_coupling: f64,
    protocol: &FieldProtocol,
) -> Result<f64> {
    let h_int = exchange_hamiltonian(j_coupling);
    let mut max_rate: f64 = 0.0;
    for s in samples {
        let (b1, b2) = protocol.field_at(s.t)?;
        let h = h_int + field_hamiltonian(b1, b2);
        let drho = liouville_rhs(&h, &s.state);
        max_rate = max_rate.max((h * drho).trace().norm());
    }
    Ok(max_rate)
}

/// Mixing angle delta in [0, pi] between the final state's central-block
/// eigenvectors and the final Hamiltonian's eigenbasis.
///
/// The central 2x2 block of `rho_final` (the {|10>, |01>} sector) is
/// diagonalized; |phi1'> is the eigenvector carrying the larger population
/// and delta satisfies cos^2(delta/2) = |<psi1'|phi1'>|^2. Degenerate block
/// populations leave delta undefined and raise an error.
pub fn mixing_angle(rho_final: &DensityMatrix, params_final: SpinPairParams) -> Result<f64> {
    let m = rho_final.entries();
    let r11 = m[(1, 1)].re;
    let r22 = m[(2, 2)].re;
    let r12 = m[(1, 2)];

    let half_diff = 0.5 * (r11 - r22);
    let radius = (half_diff * half_diff + r12.norm_sqr()).sqrt();
    if 2.0 * radius < 1e-12 {
        return Err(EngineError::DegenerateBlock(2.0 * radius));
    }
    // eigenvector of the larger eigenvalue, in (|10>, |01>) block coordinates
    let phi1 = if r12.norm() < 1e-300 {
        if r11 >= r22 {
            [Complex64::new(1.0, 0.0), Complex64::ZERO]
        } else {
            [Complex64::ZERO, Complex64::new(1.0, 0.0)]
        }
    } else {
        let v0 = r12;
        let v1 = re(radius - half_diff);
        let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        [v0 / norm, v1 / norm]
    };

    let sd = crate::spin_system::spectral_decomposition(params_final)?;
    // <psi1'| = (b, -a) in the same block coordinates
    let overlap = (re(sd.b_coeff) * phi1[0] - re(sd.a_coeff) * phi1[1]).norm();
    Ok(2.0 * overlap.clamp(0.0, 1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_system::spectral_decomposition;
    use crate::thermal::{
        energy_entropy, gibbs_state, project_populations, von_neumann_entropy,
    };
    use crate::CVector4;
    use approx::assert_relative_eq;

    fn params(b1: f64, b2: f64) -> SpinPairParams {
        SpinPairParams::new(0.1, b1, b2).unwrap()
    }

    fn fig2_branch(duration: f64) -> FieldProtocol {
        FieldProtocol::sine_pulse(3.0, 3.0, 4.0, duration).unwrap()
    }

    #[test]
    fn sine_pulse_endpoints_and_midpoint() {
        let p = FieldProtocol::sine_pulse(3.0, 3.0, 4.0, 5.0).unwrap();
        assert_eq!(p.field_at(0.0).unwrap(), (3.0, 3.0));
        assert_eq!(p.field_at(5.0).unwrap(), (3.0, 4.0));
        let (_, b2) = p.field_at(2.5).unwrap();
        assert_relative_eq!(b2, 3.0 + std::f64::consts::FRAC_PI_4.sin(), epsilon = 1e-15);
        assert!(p.field_at(-0.1).is_err());
        assert!(p.field_at(5.1).is_err());
    }

    #[test]
    fn constant_delta_b_ramp_must_preserve_delta_b() {
        assert!(FieldProtocol::constant_delta_b_ramp(3.0, 3.5, 3.5, 4.0, 1.0).is_ok());
        assert!(FieldProtocol::constant_delta_b_ramp(3.0, 3.6, 3.5, 4.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_protocol_interpolates_through_samples() {
        let samples = vec![
            FieldSample { t: 0.0, b1: 3.0, b2: 3.0 },
            FieldSample { t: 1.0, b1: 3.0, b2: 3.4 },
            FieldSample { t: 2.0, b1: 3.0, b2: 4.0 },
        ];
        let p = FieldProtocol::custom_tabulated(samples).unwrap();
        assert_eq!(p.duration(), 2.0);
        assert_eq!(p.field_at(0.0).unwrap(), (3.0, 3.0));
        assert_eq!(p.field_at(1.0).unwrap(), (3.0, 3.4));
        assert_eq!(p.field_at(2.0).unwrap(), (3.0, 4.0));
        // monotone data stays monotone between knots
        let mut last = 3.0;
        for k in 1..=40 {
            let (_, b2) = p.field_at(2.0 * k as f64 / 40.0).unwrap();
            assert!(b2 >= last - 1e-12);
            last = b2;
        }
    }

    #[test]
    fn field_independent_eigenstate_is_stationary() {
        let ket00 = CVector4::new(re(1.0), Complex64::ZERO, Complex64::ZERO, Complex64::ZERO);
        let rho0 = DensityMatrix::pure(&ket00).unwrap();
        let protocol = fig2_branch(5.0);
        let step = StepPolicy::Auto.step_for(0.1, &protocol).unwrap();
        let out = evolve(&rho0, &params(3.0, 3.0), &protocol, step).unwrap();
        let diff = frobenius(&(out.final_state.entries() - rho0.entries()));
        assert!(diff < 1e-10, "drifted by {diff}");
    }

    #[test]
    fn unitary_invariants_on_fig2_branch() {
        for &tau in &[0.5, 5.0, 50.0] {
            let protocol = fig2_branch(tau / 2.0);
            let rho0 = gibbs_state(params(3.0, 3.0), 1.0).unwrap();
            let step = StepPolicy::Auto.step_for(0.1, &protocol).unwrap();
            let out = evolve(&rho0, &params(3.0, 3.0), &protocol, step).unwrap();
            assert!(out.trace_drift < 1e-9);
            assert!(out.hermiticity_drift < 1e-9);
            assert!((out.purity_final - out.purity_initial).abs() < 1e-8);
            let sv0 = von_neumann_entropy(&rho0).unwrap();
            let sv1 = von_neumann_entropy(&out.final_state).unwrap();
            assert!((sv1 - sv0).abs() < 1e-8, "S_v drift {} at tau {}", sv1 - sv0, tau);
        }
    }

    #[test]
    fn sector_populations_conserved_along_trajectory() {
        let protocol = fig2_branch(5.0);
        let rho0 = gibbs_state(params(3.0, 3.0), 1.0).unwrap();
        let step = StepPolicy::Auto.step_for(0.1, &protocol).unwrap();
        let (_, samples) = evolve_traced(&rho0, &params(3.0, 3.0), &protocol, step).unwrap();
        let m0 = rho0.entries();
        for s in &samples {
            assert!((s.state[(0, 0)].re - m0[(0, 0)].re).abs() < 1e-9);
            assert!((s.state[(3, 3)].re - m0[(3, 3)].re).abs() < 1e-9);
            let central = s.state[(1, 1)].re + s.state[(2, 2)].re;
            let central0 = m0[(1, 1)].re + m0[(2, 2)].re;
            assert!((central - central0).abs() < 1e-9);
        }
    }

    #[test]
    fn projected_population_mixing_follows_the_mixing_angle() {
        // p1' = p1 cos^2(d/2) + p3 sin^2(d/2) with delta from the final state
        let protocol = fig2_branch(2.0);
        let p0 = params(3.0, 3.0);
        let p1 = params(3.0, 4.0);
        let rho0 = gibbs_state(p0, 1.0).unwrap();
        let step = StepPolicy::Auto.step_for(0.1, &protocol).unwrap();
        let out = evolve(&rho0, &p0, &protocol, step).unwrap();

        let p = project_populations(&rho0, p0).unwrap();
        let pp = project_populations(&out.final_state, p1).unwrap();
        let delta = mixing_angle(&out.final_state, p1).unwrap();
        let c2 = (delta / 2.0).cos().powi(2);
        let s2 = 1.0 - c2;
        assert_relative_eq!(pp[0], p[0] * c2 + p[2] * s2, epsilon = 1e-8);
        assert_relative_eq!(pp[2], p[0] * s2 + p[2] * c2, epsilon = 1e-8);
        // Eq-chain: p1 >= p1' >= p3 and p1 >= p3' >= p3
        assert!(p[0] + 1e-12 >= pp[0] && pp[0] + 1e-12 >= p[2]);
        assert!(p[0] + 1e-12 >= pp[2] && pp[2] + 1e-12 >= p[2]);
        // energy entropy cannot decrease on a branch started from a Gibbs state
        let se0 = energy_entropy(&rho0, p0).unwrap();
        let se1 = energy_entropy(&out.final_state, p1).unwrap();
        assert!(se1 >= se0 - 1e-10);
    }

    #[test]
    fn constant_delta_b_drive_is_frictionless() {
        let protocol =
            FieldProtocol::constant_delta_b_ramp(3.0, 3.5, 3.5, 4.0, 1.0).unwrap();
        let p0 = params(3.0, 3.5);
        let p1 = params(3.5, 4.0);
        let rho0 = gibbs_state(p0, 1.0).unwrap();
        let step = StepPolicy::Auto.step_for(0.1, &protocol).unwrap();
        let out = evolve(&rho0, &p0, &protocol, step).unwrap();
        let before = project_populations(&rho0, p0).unwrap();
        let after = project_populations(&out.final_state, p1).unwrap();
        for i in 0..4 {
            assert_relative_eq!(after[i], before[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn step_halving_shows_fourth_order_convergence() {
        let protocol = fig2_branch(2.0);
        let p0 = params(3.0, 3.0);
        let rho0 = gibbs_state(p0, 1.0).unwrap();
        let run = |h: f64| {
            evolve(&rho0, &p0, &protocol, h)
                .unwrap()
                .final_state
                .entries()
                .clone_owned()
        };
        let h = 0.25;
        let d1 = frobenius(&(run(h) - run(h / 2.0)));
        let d2 = frobenius(&(run(h / 2.0) - run(h / 4.0)));
        let ratio = d1 / d2;
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn power_vanishes_for_static_hamiltonian_and_traceless_derivative() {
        let rho = gibbs_state(params(3.0, 3.0), 1.0).unwrap();
        assert_eq!(instantaneous_power(&rho, &CMatrix4::zeros()).unwrap(), 0.0);
        // maximally mixed state against the traceless sigma_z2 derivative
        let mixed = DensityMatrix::new(CMatrix4::identity() * re(0.25)).unwrap();
        let dh = crate::spin_system::field_hamiltonian(0.0, 1.7);
        assert!(instantaneous_power(&mixed, &dh).unwrap().abs() < 1e-14);
    }

    #[test]
    fn integrated_power_matches_mean_energy_change() {
        let protocol = fig2_branch(10.0);
        let p0 = params(3.0, 3.0);
        let rho0 = gibbs_state(p0, 1.0).unwrap();
        let step = 10.0 / 8192.0;
        let (out, samples) = evolve_traced(&rho0, &p0, &protocol, step).unwrap();

        let h_int = exchange_hamiltonian(0.1);
        let energy = |t: f64, m: &CMatrix4| -> f64 {
            let (b1, b2) = protocol.field_at(t).unwrap();
            ((h_int + field_hamiltonian(b1, b2)) * m).trace().re
        };
        let power = |s: &TrajectoryPoint| -> f64 {
            let (db1, db2) = protocol.field_derivative_at(s.t).unwrap();
            let dm = DensityMatrix::new(s.state).unwrap();
            instantaneous_power(&dm, &field_hamiltonian(db1, db2)).unwrap()
        };
        // composite Simpson over the uniform trajectory grid
        let n = samples.len() - 1;
        assert!(n % 2 == 0);
        let mut integral = power(&samples[0]) + power(&samples[n]);
        for (k, s) in samples.iter().enumerate().skip(1).take(n - 1) {
            integral += if k % 2 == 1 { 4.0 } else { 2.0 } * power(s);
        }
        integral *= step / 3.0;

        let delta_e = energy(10.0, out.final_state.entries()) - energy(0.0, rho0.entries());
        assert_relative_eq!(integral, delta_e, epsilon = 1e-8);
    }

    #[test]
    fn heat_rate_term_vanishes_along_unitary_trajectory() {
        let protocol = fig2_branch(10.0);
        let p0 = params(3.0, 3.0);
        let rho0 = gibbs_state(p0, 1.0).unwrap();
        let step = StepPolicy::Auto.step_for(0.1, &protocol).unwrap();
        let (_, samples) = evolve_traced(&rho0, &p0, &protocol, step).unwrap();
        let max_rate = heat_rate_check(&samples, 0.1, &protocol).unwrap();
        assert!(max_rate < 1e-9, "heat rate {max_rate}");
    }

    #[test]
    fn mixing_angle_of_thermal_state_is_zero() {
        let pr = params(3.0, 4.0);
        let rho = gibbs_state(pr, 1.0).unwrap();
        let delta = mixing_angle(&rho, pr).unwrap();
        assert!(delta.abs() < 1e-6, "delta {delta}");
    }

    #[test]
    fn mixing_angle_in_sudden_limit_matches_basis_overlap() {
        // state frozen at the homogeneous-field Gibbs state, Hamiltonian
        // jumped to y = -2.5: cos(delta/2) = |b b0 + a a0| with a0 = b0 = 1/sqrt(2)
        let p0 = params(3.0, 3.0);
        let p1 = params(3.0, 4.0);
        let rho = gibbs_state(p0, 1.0).unwrap();
        let delta = mixing_angle(&rho, p1).unwrap();
        let sd = spectral_decomposition(p1).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        let expected = 2.0 * (sd.b_coeff * s + sd.a_coeff * s).min(1.0).acos();
        assert_relative_eq!(delta, expected, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_central_block_is_an_error() {
        let mixed = DensityMatrix::new(CMatrix4::identity() * re(0.25)).unwrap();
        assert!(matches!(
            mixing_angle(&mixed, params(3.0, 4.0)),
            Err(EngineError::DegenerateBlock(_))
        ));
    }

    #[test]
    fn oversized_step_reports_drift_not_garbage() {
        let protocol = fig2_branch(5.0);
        let p0 = params(3.0, 3.0);
        let rho0 = gibbs_state(p0, 1.0).unwrap();
        let result = evolve(&rho0, &p0, &protocol, 2.0);
        match result {
            Err(EngineError::DriftExceeded { .. }) | Err(EngineError::InvalidState(_)) => {}
            Ok(out) => {
                // a big step may still keep trace/hermiticity exact; the
                // purity then carries the damage
                assert!((out.purity_final - out.purity_initial).abs() > 1e-8);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
