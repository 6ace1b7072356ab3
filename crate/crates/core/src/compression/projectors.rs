use serde::Serialize;

use super::params::CompressionParams;
use crate::error::Result;
use crate::hilbert::linalg::{ComplexMatrix, HermitianEigen};
use crate::hilbert::{DensityMatrix, Projector, RegisterLayout, TOL_SUPPORT};
use crate::info;

/// Slack against eigen-solver noise when rounding K·x up (K·0.5 must give K/2).
const CEIL_SLACK: f64 = 1e-9;

/// ⌈K·x⌉ capped at K; eigenvalues inside the support tolerance get no slots.
pub fn cap(k: usize, x: f64) -> usize {
    if x <= TOL_SUPPORT {
        return 0;
    }
    ((k as f64 * x - CEIL_SLACK).ceil().max(0.0) as usize).min(k)
}

/// min(K, ⌈K·2^{c′}·b/δ⌉), evaluated in log space since 2^{c′} overflows.
pub fn bob_cap(k: usize, b: f64, c_prime: f64, delta: f64) -> usize {
    if b <= TOL_SUPPORT {
        return 0;
    }
    let log_slots = (k as f64).log2() + c_prime + b.log2() - delta.log2();
    if log_slots >= (k as f64).log2() {
        k
    } else {
        cap(k, 2f64.powf(c_prime) * b / delta)
    }
}

/// Σ_i |v_i⟩⟨v_i| ⊗ Σ_{m<cap_i} |m⟩⟨m| on (N, K).
pub fn slot_projector(vectors: &ComplexMatrix, caps: &[usize], k: usize) -> ComplexMatrix {
    let n = vectors.nrows();
    let mut p = ComplexMatrix::zeros(n * k, n * k);
    for (i, &ci) in caps.iter().enumerate() {
        let v = vectors.column(i);
        for r in 0..n {
            for s in 0..n {
                let amp = v[r] * v[s].conj();
                if amp.norm() == 0.0 {
                    continue;
                }
                for m in 0..ci {
                    p[(r * k + m, s * k + m)] += amp;
                }
            }
        }
    }
    p
}

/// Acceptance projectors of the two parties.
///
/// Bob's half of the shared maximally entangled state is read in the
/// conjugate basis: (M ⊗ I)|Φ⟩ = (I ⊗ Mᵀ)|Φ⟩, so the physical operator Bob
/// applies uses the conjugated eigenvectors |b̄_j⟩ and the state he holds
/// is the conjugate of the one reported.
#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceProjectors {
    pub alice_caps: Vec<usize>,
    pub bob_caps: Vec<usize>,
    #[serde(skip)]
    pub alice: Projector,
    /// Physical projector on B₁B₂ (conjugated eigenvectors).
    #[serde(skip)]
    pub bob: Projector,
}

pub fn alice_layout(n: usize, k: usize) -> RegisterLayout {
    RegisterLayout::new([("A1", n), ("A2", k)]).expect("distinct names")
}

pub fn bob_layout(n: usize, k: usize) -> RegisterLayout {
    RegisterLayout::new([("B1", n), ("B2", k)]).expect("distinct names")
}

pub(crate) fn caps_for(
    rho: &HermitianEigen,
    sigma: &HermitianEigen,
    params: &CompressionParams,
) -> (Vec<usize>, Vec<usize>) {
    let alice = rho.values.iter().map(|&a| cap(params.k, a)).collect();
    let bob = sigma
        .values
        .iter()
        .map(|&b| bob_cap(params.k, b, params.c_prime, params.delta))
        .collect();
    (alice, bob)
}

pub fn projectors(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    params: &CompressionParams,
) -> Result<AcceptanceProjectors> {
    info::check_support(rho, sigma)?;
    let (n, k) = (params.n, params.k);
    let (alice_caps, bob_caps) = caps_for(rho.eigen(), sigma.eigen(), params);
    let alice = slot_projector(rho.eigenvectors(), &alice_caps, k);
    let bob_vectors = sigma.eigenvectors().map(|z| z.conj());
    let bob = slot_projector(&bob_vectors, &bob_caps, k);
    Ok(AcceptanceProjectors {
        alice_caps,
        bob_caps,
        alice: Projector::from_parts_unchecked(alice, alice_layout(n, k)),
        bob: Projector::from_parts_unchecked(bob, bob_layout(n, k)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::params::make_params;
    use crate::hilbert::{random_density_on, rng_from_seed};

    #[test]
    fn maximally_mixed_alice_rank() {
        let rho = DensityMatrix::maximally_mixed(RegisterLayout::single("A", 4));
        let p = make_params(0.3, 0.0, 4, 4).unwrap();
        let pr = projectors(&rho, &rho, &p).unwrap();
        assert_eq!(pr.alice_caps, vec![1; 4]);
        assert_eq!(pr.alice.rank(), 4);
    }

    #[test]
    fn saturated_bob_projector_is_support_times_identity() {
        let sigma = DensityMatrix::from_diagonal(&[0.7, 0.3, 0.0], RegisterLayout::single("A", 3)).unwrap();
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5, 0.0], RegisterLayout::single("A", 3)).unwrap();
        let p = make_params(0.3, 1.0, 3, 8).unwrap();
        let pr = projectors(&rho, &sigma, &p).unwrap();
        assert_eq!(pr.bob_caps, vec![8, 8, 0]);
        let want = sigma.support_projector().kronecker(&ComplexMatrix::identity(8, 8));
        let diff = pr.bob.matrix() - want;
        assert!(diff.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn alice_rank_is_sum_of_caps() {
        let rho = random_density_on(RegisterLayout::single("A", 3), 3, &mut rng_from_seed(2)).unwrap();
        let p = make_params(0.45, 0.5, 3, 32).unwrap();
        let pr = projectors(&rho, &rho, &p).unwrap();
        let want: usize = rho.eigenvalues().iter().map(|&a| (32.0 * a).ceil() as usize).sum();
        assert_eq!(pr.alice_caps.iter().sum::<usize>(), want);
        assert!((pr.alice.matrix().trace().re - want as f64).abs() < 1e-9);
        let sq = pr.alice.matrix() * pr.alice.matrix();
        assert!((sq - pr.alice.matrix()).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn cap_rounding() {
        assert_eq!(cap(64, 0.5), 32);
        assert_eq!(cap(64, 0.5 + 1e-14), 32);
        assert_eq!(cap(64, 0.51), 33);
        assert_eq!(cap(64, 0.0), 0);
        assert_eq!(cap(64, 1.0), 64);
        assert_eq!(bob_cap(64, 0.01, 0.0, 1.0), 1);
        assert_eq!(bob_cap(64, 1e-8, 4000.0, 1e-4), 64);
    }
}
