//! Four-stage Otto cycle orchestration and work/heat/entropy accounting.
//!
//! Stage 1 equilibrates with the cold bath at the starting fields; stage 2
//! drives B2 to its hot-side value in time tau/2 under unitary evolution;
//! stage 3 replaces the state with the hot Gibbs state; stage 4 drives the
//! field back, again in tau/2. Work is the mean-energy change on each
//! driving branch; heats are the unique energy-conserving assignments given
//! the four population vectors. The sudden (tau -> 0) and adiabatic
//! (tau -> infinity) limits give closed-form lower and upper work bounds.

use crate::dynamics::{evolve, mixing_angle, FieldProtocol, StepPolicy};
use crate::error::{EngineError, Result};
use crate::spin_system::{spectral_decomposition, SpinPairParams};
use crate::thermal::{gibbs_populations, gibbs_state, project_populations, PopulationVector};

/// Full configuration of one engine cycle.
///
/// `tau_total` is the time allotted to *both* driving branches together;
/// each branch gets tau_total/2. `tau_total = 0` selects the sudden limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    pub j_coupling: f64,
    /// Field on spin 1 (held fixed except in constant-Delta-B cycles).
    pub b1: f64,
    /// Stage-1 field on spin 2.
    pub b2_start: f64,
    /// Stage-3 field on spin 2.
    pub b3: f64,
    /// Cold-bath temperature T1.
    pub t_cold: f64,
    /// Hot-bath temperature T2.
    pub t_hot: f64,
    pub tau_total: f64,
    pub step_policy: StepPolicy,
}

impl CycleConfig {
    /// Paper-figure defaults: J = 0.1, B1 = B2(0) = 3, B3 = 4, T1 = 1, T2 = 2.
    pub fn reference(tau_total: f64) -> Self {
        Self {
            j_coupling: 0.1,
            b1: 3.0,
            b2_start: 3.0,
            b3: 4.0,
            t_cold: 1.0,
            t_hot: 2.0,
            tau_total,
            step_policy: StepPolicy::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cold_params()?;
        if !self.b3.is_finite() {
            return Err(EngineError::InvalidParameter(format!(
                "b3 must be finite, got {}",
                self.b3
            )));
        }
        for (name, t) in [("t_cold", self.t_cold), ("t_hot", self.t_hot)] {
            if !t.is_finite() || t <= 0.0 {
                return Err(EngineError::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {t}"
                )));
            }
        }
        if !self.tau_total.is_finite() || self.tau_total < 0.0 {
            return Err(EngineError::InvalidParameter(format!(
                "tau_total must be >= 0, got {}",
                self.tau_total
            )));
        }
        Ok(())
    }

    fn cold_params(&self) -> Result<SpinPairParams> {
        SpinPairParams::new(self.j_coupling, self.b1, self.b2_start)
    }
}

/// Everything measured over one cycle.
#[derive(Debug, Clone)]
pub struct CycleReport {
    /// Work done by the system on branch 1 (stage 2).
    pub w_branch1: f64,
    /// Work on branch 2 (stage 4); negative values are work done on the system.
    pub w_branch2: f64,
    /// Net extracted work W = W_I + W_II.
    pub w_total: f64,
    /// Heat absorbed from the hot bath in stage 3.
    pub q_hot: f64,
    /// Heat exchanged with the cold bath closing the cycle (negative when released).
    pub q_cold: f64,
    /// Sudden-limit work (lower bound).
    pub w_lower_bound: f64,
    /// Adiabatic-limit work (upper bound).
    pub w_upper_bound: f64,
    pub entropy_production_branch1: f64,
    pub entropy_production_branch2: f64,
    pub entropy_production_total: f64,
    /// Mixing angles of the post-branch states in the final eigenbases.
    pub delta_branch1: f64,
    pub delta_branch2: f64,
    /// Cold-side Gibbs populations p.
    pub p: PopulationVector,
    /// Populations projected after branch 1, p'.
    pub p_prime: PopulationVector,
    /// Hot-side Gibbs populations q.
    pub q: PopulationVector,
    /// Populations projected after branch 2, q'.
    pub q_prime: PopulationVector,
    pub trace_drift_max: f64,
    pub hermiticity_drift_max: f64,
    /// Set when the cycle extracts no positive net work. Not an error.
    pub infeasible: bool,
}

/// Cycle work assembled from level energies and the four population vectors:
/// sum(p e_cold) - sum(p' e_hot) + sum(q e_hot) - sum(q' e_cold).
pub fn work_from_populations(
    e_cold: &[f64; 4],
    e_hot: &[f64; 4],
    p: &PopulationVector,
    p_prime: &PopulationVector,
    q: &PopulationVector,
    q_prime: &PopulationVector,
) -> f64 {
    p.mean_energy(e_cold) - p_prime.mean_energy(e_hot) + q.mean_energy(e_hot)
        - q_prime.mean_energy(e_cold)
}

/// Closed-form sudden-limit (lower) work bound.
///
/// Requires the stage-1 fields to be homogeneous (B2(0) = B1): the closed
/// form assumes the maximally entangled a = b = 1/sqrt(2) starting basis.
pub fn sudden_work_bound(config: &CycleConfig) -> Result<f64> {
    let (p, q, sd_hot) = bound_ingredients(config)?;
    let j = config.j_coupling;
    let ab = sd_hot.a_coeff * sd_hot.b_coeff;
    Ok((config.b3 - config.b1) * (q[3] - q[1] + p[1] - p[3])
        + (q[2] - q[0]) * (sd_hot.k_gap - 8.0 * j * ab))
}

/// Closed-form adiabatic-limit (upper) work bound.
pub fn adiabatic_work_bound(config: &CycleConfig) -> Result<f64> {
    let (p, q, sd_hot) = bound_ingredients(config)?;
    let j = config.j_coupling;
    Ok((config.b3 - config.b1) * (q[3] - q[1] + p[1] - p[3])
        + (q[2] - q[0] + p[0] - p[2]) * (sd_hot.k_gap - 4.0 * j))
}

fn bound_ingredients(
    config: &CycleConfig,
) -> Result<(PopulationVector, PopulationVector, crate::SpectralDecomposition)> {
    config.validate()?;
    if config.b2_start != config.b1 {
        return Err(EngineError::InvalidParameter(format!(
            "closed-form bounds need homogeneous stage-1 fields, got b1 = {}, b2_start = {}",
            config.b1, config.b2_start
        )));
    }
    let cold = SpinPairParams::new(config.j_coupling, config.b1, config.b1)?;
    let hot = SpinPairParams::new(config.j_coupling, config.b1, config.b3)?;
    let p = gibbs_populations(cold, config.t_cold)?;
    let q = gibbs_populations(hot, config.t_hot)?;
    Ok((p, q, spectral_decomposition(hot)?))
}

/// Sum of the per-branch energy-entropy increases recorded in a report.
pub fn entropy_production(report: &CycleReport) -> f64 {
    report.entropy_production_branch1 + report.entropy_production_branch2
}

/// Run the standard cycle: B1 fixed, B2 driven b2_start -> b3 -> b2_start
/// by sine pulses of duration tau_total/2 each.
pub fn run_cycle(config: &CycleConfig) -> Result<CycleReport> {
    run_cycle_inner(config, false)
}

/// Run the frictionless variant where B1 is driven in lockstep with B2 so
/// that Delta B stays constant: B1 ends at b1 + (b3 - b2_start).
pub fn run_constant_delta_b_cycle(config: &CycleConfig) -> Result<CycleReport> {
    run_cycle_inner(config, true)
}

struct BranchOutcome {
    p_prime: PopulationVector,
    delta: f64,
    entropy_production: f64,
    trace_drift: f64,
    hermiticity_drift: f64,
}

fn run_branch(
    config: &CycleConfig,
    start: SpinPairParams,
    end: SpinPairParams,
    temperature: f64,
    constant_delta_b: bool,
) -> Result<BranchOutcome> {
    let rho0 = gibbs_state(start, temperature)?;
    let p0 = gibbs_populations(start, temperature)?;
    let duration = config.tau_total / 2.0;

    let final_state = if duration == 0.0 {
        // sudden limit: U(0,0) = I, the state is frozen while H jumps
        rho0.clone()
    } else {
        let protocol = if constant_delta_b {
            FieldProtocol::constant_delta_b_ramp(start.b1, end.b1, start.b2, end.b2, duration)?
        } else {
            FieldProtocol::sine_pulse(start.b1, start.b2, end.b2, duration)?
        };
        let step = config.step_policy.step_for(config.j_coupling, &protocol)?;
        let out = evolve(&rho0, &start, &protocol, step)?;
        return Ok(BranchOutcome {
            p_prime: project_populations(&out.final_state, end)?,
            delta: mixing_angle(&out.final_state, end)?,
            entropy_production: project_populations(&out.final_state, end)?.shannon_entropy()
                - p0.shannon_entropy(),
            trace_drift: out.trace_drift,
            hermiticity_drift: out.hermiticity_drift,
        });
    };

    let p_prime = project_populations(&final_state, end)?;
    Ok(BranchOutcome {
        p_prime,
        delta: mixing_angle(&final_state, end)?,
        entropy_production: p_prime.shannon_entropy() - p0.shannon_entropy(),
        trace_drift: 0.0,
        hermiticity_drift: 0.0,
    })
}

fn run_cycle_inner(config: &CycleConfig, constant_delta_b: bool) -> Result<CycleReport> {
    config.validate()?;
    let cold = config.cold_params()?;
    let hot = if constant_delta_b {
        SpinPairParams::new(
            config.j_coupling,
            config.b1 + (config.b3 - config.b2_start),
            config.b3,
        )?
    } else {
        SpinPairParams::new(config.j_coupling, config.b1, config.b3)?
    };
    let e_cold = spectral_decomposition(cold)?.eigenvalues;
    let e_hot = spectral_decomposition(hot)?.eigenvalues;

    // stages 1-2
    let p = gibbs_populations(cold, config.t_cold)?;
    let branch1 = run_branch(config, cold, hot, config.t_cold, constant_delta_b)?;
    let p_prime = branch1.p_prime;
    let w_branch1 = p.mean_energy(&e_cold) - p_prime.mean_energy(&e_hot);

    // stages 3-4
    let q = gibbs_populations(hot, config.t_hot)?;
    let branch2 = run_branch(config, hot, cold, config.t_hot, constant_delta_b)?;
    let q_prime = branch2.p_prime;
    let w_branch2 = q.mean_energy(&e_hot) - q_prime.mean_energy(&e_cold);

    let w_total = w_branch1 + w_branch2;
    let q_hot: f64 = (0..4).map(|i| e_hot[i] * (q[i] - p_prime[i])).sum();
    let q_cold: f64 = (0..4).map(|i| e_cold[i] * (p[i] - q_prime[i])).sum();

    // Bounds: the paper's closed forms when the stage-1 fields are
    // homogeneous and B1 is static; otherwise the general sudden/adiabatic
    // projections over the same population data.
    let (w_lower_bound, w_upper_bound) = if !constant_delta_b && config.b2_start == config.b1 {
        (sudden_work_bound(config)?, adiabatic_work_bound(config)?)
    } else {
        general_bounds(&cold, &hot, &e_cold, &e_hot, &p, &q)?
    };

    let entropy_production_total = branch1.entropy_production + branch2.entropy_production;
    Ok(CycleReport {
        w_branch1,
        w_branch2,
        w_total,
        q_hot,
        q_cold,
        w_lower_bound,
        w_upper_bound,
        entropy_production_branch1: branch1.entropy_production,
        entropy_production_branch2: branch2.entropy_production,
        entropy_production_total,
        delta_branch1: branch1.delta,
        delta_branch2: branch2.delta,
        p,
        p_prime,
        q,
        q_prime,
        trace_drift_max: branch1.trace_drift.max(branch2.trace_drift),
        hermiticity_drift_max: branch1.hermiticity_drift.max(branch2.hermiticity_drift),
        infeasible: w_total <= 0.0,
    })
}

/// Sudden and adiabatic work bounds via basis-overlap projection, valid for
/// any pair of endpoint parameter sets (used when the Eq.-style closed forms'
/// homogeneous-start precondition does not hold).
fn general_bounds(
    cold: &SpinPairParams,
    hot: &SpinPairParams,
    e_cold: &[f64; 4],
    e_hot: &[f64; 4],
    p: &PopulationVector,
    q: &PopulationVector,
) -> Result<(f64, f64)> {
    let sd_cold = spectral_decomposition(*cold)?;
    let sd_hot = spectral_decomposition(*hot)?;
    // overlap of the central-block eigenbases at the two endpoints
    let c2 = (sd_hot.a_coeff * sd_cold.a_coeff + sd_hot.b_coeff * sd_cold.b_coeff).powi(2);
    let mix = |v: &PopulationVector| -> Result<PopulationVector> {
        PopulationVector::new([
            v[0] * c2 + v[2] * (1.0 - c2),
            v[1],
            v[0] * (1.0 - c2) + v[2] * c2,
            v[3],
        ])
    };
    let w_fast = work_from_populations(e_cold, e_hot, p, &mix(p)?, q, &mix(q)?);
    let w_slow = work_from_populations(e_cold, e_hot, p, p, q, q);
    Ok((w_fast, w_slow))
}
