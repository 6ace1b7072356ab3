use serde::Serialize;

use super::params::CompressionParams;
use super::projectors::caps_for;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{c64, ComplexMatrix};
use crate::hilbert::DensityMatrix;
use crate::info;

/// Per-index statistics of the protocol on one copy of the shared state.
#[derive(Debug, Clone, Serialize)]
pub struct IndexStats {
    pub p_alice: f64,
    pub p_bob: f64,
    pub p_both: f64,
    pub p_bob_given_alice: f64,
    /// Bob's B₁ marginal given both succeed, in the frame where it
    /// approximates ρ.
    #[serde(skip)]
    pub rho_tilde: DensityMatrix,
    /// Bob's B₁ marginal given only that he succeeds (∝ Σ L_j |b_j⟩⟨b_j|).
    #[serde(skip)]
    pub bob_fresh: DensityMatrix,
    pub fidelity_out: f64,
    pub alice_caps: Vec<usize>,
    pub bob_caps: Vec<usize>,
}

/// Σ_{k,k′,l} |u_k⟩⟨u_k|v_l⟩⟨v_l|u_k′⟩⟨u_k′| · min(s_k, s_k′, t_l).
///
/// This is Tr₂ of Π_U Π_V Π_U for slot projectors Π_U = Σ |u_k⟩⟨u_k| ⊗ Π_{s_k}
/// and Π_V = Σ |v_l⟩⟨v_l| ⊗ Π_{t_l}.
pub fn sandwich_marginal(
    outer: &ComplexMatrix,
    outer_caps: &[usize],
    inner: &ComplexMatrix,
    inner_caps: &[usize],
) -> ComplexMatrix {
    let n = outer.nrows();
    // o[l, k] = ⟨v_l|u_k⟩
    let o = inner.adjoint() * outer;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        if outer_caps[k] == 0 {
            continue;
        }
        for kp in 0..n {
            if outer_caps[kp] == 0 {
                continue;
            }
            let cap = outer_caps[k].min(outer_caps[kp]);
            let mut acc = c64(0.0, 0.0);
            for l in 0..n {
                let w = cap.min(inner_caps[l]);
                if w > 0 {
                    acc += o[(l, k)].conj() * o[(l, kp)] * w as f64;
                }
            }
            m[(k, kp)] = acc;
        }
    }
    outer * m * outer.adjoint()
}

/// Σ_k s_k |u_k⟩⟨u_k|, the B₂-traced slot projector.
pub fn slot_marginal(vectors: &ComplexMatrix, caps: &[usize]) -> ComplexMatrix {
    let n = vectors.nrows();
    let mut d = ComplexMatrix::zeros(n, n);
    for (k, &c) in caps.iter().enumerate() {
        d[(k, k)] = c64(c as f64, 0.0);
    }
    vectors * d * vectors.adjoint()
}

/// Σ_{ij} |⟨b_j|a_i⟩|² min(s_i, t_j).
pub fn joint_slot_count(
    a: &ComplexMatrix,
    a_caps: &[usize],
    b: &ComplexMatrix,
    b_caps: &[usize],
) -> f64 {
    let o = b.adjoint() * a;
    let mut acc = 0.0;
    for (i, &ni) in a_caps.iter().enumerate() {
        for (j, &lj) in b_caps.iter().enumerate() {
            acc += o[(j, i)].norm_sqr() * ni.min(lj) as f64;
        }
    }
    acc
}

pub fn index_stats(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    params: &CompressionParams,
) -> Result<IndexStats> {
    info::check_support(rho, sigma)?;
    if rho.dim() != params.n || sigma.dim() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            found: rho.dim(),
        });
    }
    let (alice_caps, bob_caps) = caps_for(rho.eigen(), sigma.eigen(), params);
    let (a, b) = (rho.eigenvectors(), sigma.eigenvectors());
    let total = (params.k * params.n) as f64;

    let p_alice = alice_caps.iter().sum::<usize>() as f64 / total;
    let p_bob = bob_caps.iter().sum::<usize>() as f64 / total;
    let p_both = joint_slot_count(a, &alice_caps, b, &bob_caps) / total;
    if !(p_both > 0.0) {
        return Err(Error::InvalidState("joint acceptance probability is zero".into()));
    }
    let layout = rho.layout().clone();
    let rho_tilde = DensityMatrix::from_unnormalized(
        sandwich_marginal(b, &bob_caps, a, &alice_caps),
        layout.clone(),
    )?;
    let bob_fresh = DensityMatrix::from_unnormalized(slot_marginal(b, &bob_caps), layout)?;
    let fidelity_out = info::fidelity(rho, &rho_tilde)?;
    Ok(IndexStats {
        p_alice,
        p_bob,
        p_both,
        p_bob_given_alice: p_both / p_alice,
        rho_tilde,
        bob_fresh,
        fidelity_out,
        alice_caps,
        bob_caps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::params::make_params;
    use crate::hilbert::{random_density_on, rng_from_seed, RegisterLayout};

    #[test]
    fn equal_states_zero_c() {
        let rho = DensityMatrix::from_diagonal(&[0.6, 0.4], RegisterLayout::single("A", 2)).unwrap();
        let p = make_params(0.3, 0.0, 2, 64).unwrap();
        let s = index_stats(&rho, &rho, &p).unwrap();
        assert!((s.p_alice - 0.5).abs() <= 2.0 / 64.0);
        assert!(s.p_bob_given_alice >= p.relative_success_bound());
        assert!(s.p_both <= s.p_alice.min(s.p_bob) + 1e-15);
    }

    #[test]
    fn saturated_bob_reproduces_alice_marginal() {
        let mut rng = rng_from_seed(9);
        let l = RegisterLayout::single("A", 3);
        let rho = random_density_on(l.clone(), 3, &mut rng).unwrap();
        let sigma = random_density_on(l, 3, &mut rng).unwrap();
        let p = make_params(0.45, 1.0, 3, 64).unwrap();
        let s = index_stats(&rho, &sigma, &p).unwrap();
        assert_eq!(s.bob_caps, vec![64; 3]);
        assert!((s.p_bob_given_alice - 1.0).abs() < 1e-12);
        assert!(s.fidelity_out > 1.0 - 4.0 * 3.0 / 64.0);
    }

    #[test]
    fn success_probability_upper_bound() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let l = RegisterLayout::single("A", 2);
            let rho = random_density_on(l.clone(), 2, &mut rng).unwrap();
            let sigma = random_density_on(l, 2, &mut rng).unwrap();
            let p = make_params(0.6, 0.2, 2, 32).unwrap();
            let s = index_stats(&rho, &sigma, &p).unwrap();
            let bound = 2f64.powf(p.c_prime) / (p.delta * 2.0) + 2.0 / 32.0;
            assert!(s.p_bob <= bound);
        }
    }
}
