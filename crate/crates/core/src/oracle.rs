//! Brute-force constructions on the full A₁A₂B₁B₂ space, used to check the
//! closed forms. Everything here is quadratic in (NK)² and meant for N·K ≤ 192.

use crate::compression::params::CompressionParams;
use crate::compression::projectors::{alice_layout, bob_layout, projectors};
use crate::corrsample::cs_projectors;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{c64, ComplexMatrix, ComplexVector};
use crate::hilbert::{apply_local, reduced_density, DensityMatrix, Projector, RegisterLayout};

pub const MAX_ORACLE_SLOTS: usize = 192;

pub fn shared_layout(n: usize, k: usize) -> RegisterLayout {
    alice_layout(n, k)
        .concat(&bob_layout(n, k))
        .expect("distinct names")
}

/// |S⟩ = Σ_{i,m} |i m⟩_{A₁A₂} |i m⟩_{B₁B₂} / √(NK).
pub fn shared_state(n: usize, k: usize) -> Result<ComplexVector> {
    let d = n * k;
    if d > MAX_ORACLE_SLOTS {
        return Err(Error::DimensionCap(format!("N·K = {d} exceeds {MAX_ORACLE_SLOTS}")));
    }
    let mut v = ComplexVector::zeros(d * d);
    let amp = c64(1.0 / (d as f64).sqrt(), 0.0);
    for x in 0..d {
        v[x * d + x] = amp;
    }
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct DenseIndexStats {
    pub p_alice: f64,
    pub p_bob: f64,
    pub p_both: f64,
    /// Conjugate of Bob's physical B₁ marginal given both succeed.
    pub rho_tilde: ComplexMatrix,
}

struct Collapsed {
    p_alice: f64,
    p_bob: f64,
    both: ComplexVector,
    layout: RegisterLayout,
}

fn collapse(n: usize, k: usize, pa: &Projector, pb: &Projector) -> Result<Collapsed> {
    let layout = shared_layout(n, k);
    let s = shared_state(n, k)?;
    let sa = apply_local(&s, &layout, pa.matrix(), &["A1", "A2"])?;
    let sb = apply_local(&s, &layout, pb.matrix(), &["B1", "B2"])?;
    let both = apply_local(&sa, &layout, pb.matrix(), &["B1", "B2"])?;
    Ok(Collapsed {
        p_alice: sa.norm_squared(),
        p_bob: sb.norm_squared(),
        both,
        layout,
    })
}

pub fn dense_index_stats(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    params: &CompressionParams,
) -> Result<DenseIndexStats> {
    let pr = projectors(rho, sigma, params)?;
    let c = collapse(params.n, params.k, &pr.alice, &pr.bob)?;
    let p_both = c.both.norm_squared();
    let rho_b1 = reduced_density(&c.both, &c.layout, &["B1"])?;
    Ok(DenseIndexStats {
        p_alice: c.p_alice,
        p_bob: c.p_bob,
        p_both,
        rho_tilde: rho_b1.map(|z| z.conj()).unscale(p_both),
    })
}

#[derive(Debug, Clone)]
pub struct DenseCopyStats {
    pub q_alice: f64,
    pub q_bob: f64,
    pub q_both: f64,
    /// Same-index A₁ marginal and Bob's B₁ marginal (his frame).
    pub same_alice: ComplexMatrix,
    pub same_bob: ComplexMatrix,
}

/// Per-copy statistics of the correlated-sampling projectors on |S⟩.
pub fn dense_copy_stats(rho: &DensityMatrix, sigma: &DensityMatrix, k: usize) -> Result<DenseCopyStats> {
    let n = rho.dim();
    let (pa, pb) = cs_projectors(rho, sigma, k)?;
    let c = collapse(n, k, &pa, &pb)?;
    let q_both = c.both.norm_squared();
    let same_alice = reduced_density(&c.both, &c.layout, &["A1"])?.unscale(q_both);
    let same_bob = reduced_density(&c.both, &c.layout, &["B1"])?
        .map(|z| z.conj())
        .unscale(q_both);
    Ok(DenseCopyStats {
        q_alice: c.p_alice,
        q_bob: c.p_bob,
        q_both,
        same_alice,
        same_bob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linalg::max_abs_diff;

    #[test]
    fn shared_state_is_normalized_and_maximally_entangled() {
        let s = shared_state(2, 3).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let l = shared_layout(2, 3);
        let a = reduced_density(&s, &l, &["A1", "A2"]).unwrap();
        assert!(max_abs_diff(&a, &ComplexMatrix::identity(6, 6).unscale(6.0)) < 1e-12);
    }

    #[test]
    fn transpose_rule() {
        let mut rng = crate::hilbert::rng_from_seed(6);
        let m = crate::hilbert::random::gaussian_matrix(6, 6, &mut rng);
        let s = shared_state(2, 3).unwrap();
        let l = shared_layout(2, 3);
        let left = apply_local(&s, &l, &m, &["A1", "A2"]).unwrap();
        let right = apply_local(&s, &l, &m.transpose(), &["B1", "B2"]).unwrap();
        assert!((left - right).iter().all(|z| z.norm() < 1e-12));
    }
}
