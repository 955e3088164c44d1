//! The `validate` subcommand: runs the oracle cross-check battery against
//! the closed forms and the integrator, printing one pass/fail row per
//! check.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qotto_core::oracle::{jacobi_eigensystem, projector_populations, reference_evolve};
use qotto_core::{
    adiabatic_work_bound, build_hamiltonian, evolve, gibbs_state, run_cycle,
    spectral_decomposition, sudden_work_bound, work_from_populations, FieldProtocol, SpinPairParams,
};

use crate::config::Settings;

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.value.is_finite() && self.value < self.tolerance
    }
}

fn frob_diff(a: &qotto_core::CMatrix4, b: &qotto_core::CMatrix4) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn closed_form_vs_jacobi(settings: &Settings) -> Result<Check, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = SpinPairParams::new(
            rng.gen_range(0.01..2.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        )
        .map_err(|e| e.to_string())?;
        let h = build_hamiltonian(p).map_err(|e| e.to_string())?;
        let sd = spectral_decomposition(p).map_err(|e| e.to_string())?;
        let oracle = jacobi_eigensystem(h.entries()).map_err(|e| e.to_string())?;
        let mut closed = sd.eigenvalues;
        closed.sort_by(f64::total_cmp);
        for i in 0..4 {
            worst = worst.max((closed[i] - oracle.eigenvalues[i]).abs());
        }
    }
    let _ = settings;
    Ok(Check {
        name: "closed-form spectrum vs jacobi oracle (200 random sets)",
        value: worst,
        tolerance: 1e-10,
    })
}

fn rk4_vs_reference(settings: &Settings) -> Result<Check, String> {
    let c = &settings.cycle;
    let p0 = SpinPairParams::new(c.j_coupling, c.b1, c.b2_start).map_err(|e| e.to_string())?;
    let protocol =
        FieldProtocol::sine_pulse(c.b1, c.b2_start, c.b3, 10.0).map_err(|e| e.to_string())?;
    let rho0 = gibbs_state(p0, c.t_cold).map_err(|e| e.to_string())?;
    let step = c
        .step_policy
        .step_for(c.j_coupling, &protocol)
        .map_err(|e| e.to_string())?;
    let value = match evolve(&rho0, &p0, &protocol, step) {
        Ok(rk4) => {
            let reference =
                reference_evolve(&rho0, c.j_coupling, &protocol, 100_000).map_err(|e| e.to_string())?;
            frob_diff(rk4.final_state.entries(), reference.entries())
        }
        // a drift failure is a failed check, not an aborted battery
        Err(_) => f64::INFINITY,
    };
    Ok(Check {
        name: "rk4 vs piecewise-exact propagator (reference branch)",
        value,
        tolerance: 1e-7,
    })
}

fn sudden_limit_vs_simulation(settings: &Settings) -> Result<Check, String> {
    let mut cfg = settings.cycle;
    cfg.tau_total = 1e-3;
    let report = run_cycle(&cfg).map_err(|e| e.to_string())?;
    let mut bound_cfg = cfg;
    bound_cfg.tau_total = 0.0;
    let w_lb = sudden_work_bound(&bound_cfg).map_err(|e| e.to_string())?;
    Ok(Check {
        name: "sudden work bound vs tau -> 0 simulation",
        value: (report.w_total - w_lb).abs(),
        tolerance: 1e-6,
    })
}

fn adiabatic_limit_vs_simulation(settings: &Settings) -> Result<Check, String> {
    let mut cfg = settings.cycle;
    cfg.tau_total = 500.0;
    let report = run_cycle(&cfg).map_err(|e| e.to_string())?;
    let w_ub = adiabatic_work_bound(&cfg).map_err(|e| e.to_string())?;
    Ok(Check {
        name: "adiabatic work bound vs tau = 500 simulation",
        value: (report.w_total - w_ub).abs(),
        tolerance: 1e-3,
    })
}

fn sudden_algebra_vs_projectors(settings: &Settings) -> Result<Check, String> {
    let c = &settings.cycle;
    let cold = SpinPairParams::new(c.j_coupling, c.b1, c.b2_start).map_err(|e| e.to_string())?;
    let hot = SpinPairParams::new(c.j_coupling, c.b1, c.b3).map_err(|e| e.to_string())?;
    let sd_cold = spectral_decomposition(cold).map_err(|e| e.to_string())?;
    let sd_hot = spectral_decomposition(hot).map_err(|e| e.to_string())?;
    let rho_cold = gibbs_state(cold, c.t_cold).map_err(|e| e.to_string())?;
    let rho_hot = gibbs_state(hot, c.t_hot).map_err(|e| e.to_string())?;
    let p = projector_populations(&rho_cold, &sd_cold.eigenvectors).map_err(|e| e.to_string())?;
    let p_prime =
        projector_populations(&rho_cold, &sd_hot.eigenvectors).map_err(|e| e.to_string())?;
    let q = projector_populations(&rho_hot, &sd_hot.eigenvectors).map_err(|e| e.to_string())?;
    let q_prime =
        projector_populations(&rho_hot, &sd_cold.eigenvectors).map_err(|e| e.to_string())?;
    let w_fast = work_from_populations(
        &sd_cold.eigenvalues,
        &sd_hot.eigenvalues,
        &p,
        &p_prime,
        &q,
        &q_prime,
    );
    let mut bound_cfg = *c;
    bound_cfg.tau_total = 0.0;
    let w_lb = sudden_work_bound(&bound_cfg).map_err(|e| e.to_string())?;
    Ok(Check {
        name: "projector brute force vs closed-form sudden bound",
        value: (w_fast - w_lb).abs(),
        tolerance: 1e-10,
    })
}

/// Run the battery; returns the process exit code (0 all pass, 1 any fail).
pub fn run(settings: &Settings) -> i32 {
    // bounds and the homogeneous-start algebra need B2(0) = B1; surface
    // that as a config problem before running anything
    if settings.cycle.b2_start != settings.cycle.b1 {
        eprintln!("config error: validate requires b2_start = b1 (homogeneous stage-1 fields)");
        return 2;
    }
    let battery: Vec<fn(&Settings) -> Result<Check, String>> = vec![
        closed_form_vs_jacobi,
        rk4_vs_reference,
        sudden_limit_vs_simulation,
        adiabatic_limit_vs_simulation,
        sudden_algebra_vs_projectors,
    ];
    let mut all_passed = true;
    println!("{:<55} {:>12} {:>10} {:>6}", "check", "value", "tol", "state");
    for check_fn in battery {
        match check_fn(settings) {
            Ok(check) => {
                let state = if check.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{:<55} {:>12.3e} {:>10.0e} {:>6}",
                    check.name, check.value, check.tolerance, state
                );
                all_passed &= check.passed();
            }
            Err(e) => {
                println!("{:<55} {:>12} {:>10} {:>6}", "battery step failed", "-", "-", "FAIL");
                eprintln!("error: {e}");
                all_passed = false;
            }
        }
    }
    if all_passed {
        0
    } else {
        1
    }
}
