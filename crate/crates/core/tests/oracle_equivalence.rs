use qcomp_core::compression::{index_stats, make_params, CompressionParams};
use qcomp_core::corrsample::exact_joint_output;
use qcomp_core::hilbert::linalg::max_abs_diff;
use qcomp_core::hilbert::{random_density_on, rng_from_seed, RegisterLayout};
use qcomp_core::oracle::{dense_copy_stats, dense_index_stats};

/// Caps without the 2^{c′}/δ inflation, so Bob's projector is not trivial.
fn unsaturated(p: &CompressionParams) -> CompressionParams {
    CompressionParams {
        c_prime: 0.0,
        delta: 1.0,
        ..p.clone()
    }
}

#[test]
fn closed_form_matches_dense_state() {
    let mut rng = rng_from_seed(2024);
    for (n, k) in [(2, 16), (3, 8), (2, 32)] {
        for _ in 0..6 {
            let l = RegisterLayout::single("A", n);
            let rho = random_density_on(l.clone(), n, &mut rng).unwrap();
            let sigma = random_density_on(l, n, &mut rng).unwrap();
            let base = make_params(0.45, 0.5, n, k).unwrap();
            for p in [base.clone(), unsaturated(&base)] {
                let s = index_stats(&rho, &sigma, &p).unwrap();
                let d = dense_index_stats(&rho, &sigma, &p).unwrap();
                assert!((s.p_alice - d.p_alice).abs() < 1e-10);
                assert!((s.p_bob - d.p_bob).abs() < 1e-10);
                assert!((s.p_both - d.p_both).abs() < 1e-10);
                assert!(max_abs_diff(s.rho_tilde.matrix(), &d.rho_tilde) < 1e-10);
            }
        }
    }
}

#[test]
fn joint_output_copy_statistics_match_dense_state() {
    let mut rng = rng_from_seed(77);
    for (n, k) in [(2, 8), (3, 8), (2, 16)] {
        for _ in 0..5 {
            let l = RegisterLayout::single("A", n);
            let rho = random_density_on(l.clone(), n, &mut rng).unwrap();
            let sigma = random_density_on(l, n, &mut rng).unwrap();
            let out = exact_joint_output(&rho, &sigma, k).unwrap();
            let d = dense_copy_stats(&rho, &sigma, k).unwrap();
            assert!((out.q_alice - d.q_alice).abs() < 1e-12);
            assert!((out.q_bob - d.q_bob).abs() < 1e-12);
            assert!((out.q_both - d.q_both).abs() < 1e-12);
            let same_b = out.same.adjoint() * &out.same;
            let same_a = &out.same * out.same.adjoint();
            let la = qcomp_core::compression::projectors::alice_layout(n, k);
            let tb = qcomp_core::hilbert::partial_trace_matrix(&same_b, &la, &["A1"]).unwrap();
            let ta = qcomp_core::hilbert::partial_trace_matrix(&same_a, &la, &["A1"]).unwrap();
            assert!(max_abs_diff(&ta, &d.same_alice) < 1e-10);
            assert!(max_abs_diff(&tb, &d.same_bob) < 1e-10);
        }
    }
}
