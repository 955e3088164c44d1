//! Property tests over randomized parameters and states.

use nalgebra::Matrix4;
use num_complex::Complex64;
use proptest::prelude::*;
use qotto_core::oracle::jacobi_eigensystem;
use qotto_core::{
    build_hamiltonian, commutator_norm, energy_entropy, gibbs_populations, project_populations,
    spectral_decomposition, von_neumann_entropy, CMatrix4, DensityMatrix, SpinPairParams,
};

fn params_strategy() -> impl Strategy<Value = SpinPairParams> {
    (0.01f64..2.0, -5.0f64..5.0, -5.0f64..5.0)
        .prop_map(|(j, b1, b2)| SpinPairParams::new(j, b1, b2).unwrap())
}

/// Random mixed state rho = M M^dag / Tr(M M^dag).
fn density_strategy() -> impl Strategy<Value = DensityMatrix> {
    proptest::collection::vec(-1.0f64..1.0, 32).prop_map(|xs| {
        let m = Matrix4::from_fn(|i, j| Complex64::new(xs[4 * i + j], xs[16 + 4 * i + j]));
        let mm: CMatrix4 = m * m.adjoint() + CMatrix4::identity() * Complex64::new(1e-6, 0.0);
        let tr = mm.trace().re;
        DensityMatrix::new(mm / Complex64::new(tr, 0.0)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_spectrum_matches_jacobi_oracle(p in params_strategy()) {
        let h = build_hamiltonian(p).unwrap();
        let sd = spectral_decomposition(p).unwrap();
        let oracle = jacobi_eigensystem(h.entries()).unwrap();

        let mut closed = sd.eigenvalues;
        closed.sort_by(f64::total_cmp);
        for i in 0..4 {
            prop_assert!((closed[i] - oracle.eigenvalues[i]).abs() < 1e-10);
        }
        // each closed-form eigenvector overlaps some numeric eigenvector of
        // the same eigenvalue with |<u|v>| > 1 - 1e-10
        for i in 0..4 {
            let v = &sd.eigenvectors[i];
            let best = (0..4)
                .filter(|&k| (oracle.eigenvalues[k] - sd.eigenvalues[i]).abs() < 1e-8)
                .map(|k| (oracle.eigenvectors.column(k).adjoint() * v)[(0, 0)].norm())
                .fold(0.0f64, f64::max);
            prop_assert!(best > 1.0 - 1e-10, "overlap {best} for eigenvector {i}");
        }
    }

    #[test]
    fn gibbs_populations_are_normalized_softmax(p in params_strategy(), t in 0.05f64..20.0) {
        let pops = gibbs_populations(p, t).unwrap();
        let sd = spectral_decomposition(p).unwrap();
        let sum: f64 = pops.as_array().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        // lower energy always carries more weight; in particular p1 > p3
        for i in 0..4 {
            for j in 0..4 {
                if sd.eigenvalues[i] < sd.eigenvalues[j] - 1e-12 {
                    prop_assert!(pops[i] > pops[j]);
                }
            }
        }
        prop_assert!(pops[0] > pops[2]);
    }

    #[test]
    fn projection_cannot_decrease_entropy(rho in density_strategy(), p in params_strategy()) {
        let se = energy_entropy(&rho, p).unwrap();
        let sv = von_neumann_entropy(&rho).unwrap();
        prop_assert!(se >= sv - 1e-10, "S_e = {se} < S_v = {sv}");
    }

    #[test]
    fn projection_preserves_total_probability(rho in density_strategy(), p in params_strategy()) {
        let pops = project_populations(&rho, p).unwrap();
        let sum: f64 = pops.as_array().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn commutator_vanishes_iff_delta_b_matches(
        j in 0.01f64..2.0,
        b1 in -5.0f64..5.0,
        b2 in -5.0f64..5.0,
        shift in -3.0f64..3.0,
    ) {
        let ha = build_hamiltonian(SpinPairParams::new(j, b1, b2).unwrap()).unwrap();
        // same Delta B, both fields shifted: always commutes
        let hb = build_hamiltonian(SpinPairParams::new(j, b1 + shift, b2 + shift).unwrap()).unwrap();
        prop_assert!(commutator_norm(ha.entries(), hb.entries()) < 1e-10);
        // changed Delta B: commutes only if one of them is homogeneous-equivalent
        if shift.abs() > 1e-3 {
            let hc = build_hamiltonian(SpinPairParams::new(j, b1 + shift, b2).unwrap()).unwrap();
            prop_assert!(commutator_norm(ha.entries(), hc.entries()) > 1e-12);
        }
    }
}
