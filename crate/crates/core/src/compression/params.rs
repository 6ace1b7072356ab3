use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 1 << 16;

/// All derived quantities of the compression protocol for (ε, c, N, K).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionParams {
    pub epsilon: f64,
    /// Upper bound on D(ρ‖σ), bits.
    pub c: f64,
    /// (ε/3)⁴.
    pub delta: f64,
    /// (c + 2)/δ, bits.
    pub c_prime: f64,
    pub k: usize,
    pub n: usize,
    /// ⌈log₂(1/δ)⌉ blocks of N indices each.
    pub blocks: usize,
    pub total_indices: usize,
    /// ⌈c′ + log₂(1/δ) + 2 log₂(1/ε)⌉.
    pub hash_count: usize,
    /// ⌈log₂ blocks⌉.
    pub block_bits: usize,
}

fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

pub fn make_params(epsilon: f64, c: f64, n: usize, k: usize) -> Result<CompressionParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon {epsilon} not in (0, 1)")));
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Parameter(format!("c = {c} must be finite and ≥ 0")));
    }
    if n == 0 {
        return Err(Error::Parameter("dimension N must be positive".into()));
    }
    if k < n {
        return Err(Error::Parameter(format!("K = {k} must be at least N = {n}")));
    }
    let delta = (epsilon / 3.0).powi(4);
    let c_prime = (c + 2.0) / delta;
    let log_inv_delta = (1.0 / delta).log2();
    let blocks = log_inv_delta.ceil() as usize;
    let hash = (c_prime + log_inv_delta + 2.0 * (1.0 / epsilon).log2()).ceil();
    if hash > 2f64.powi(52) {
        return Err(Error::Parameter(format!("hash count {hash:e} is not representable")));
    }
    Ok(CompressionParams {
        epsilon,
        c,
        delta,
        c_prime,
        k,
        n,
        blocks,
        total_indices: n * blocks,
        hash_count: hash as usize,
        block_bits: ceil_log2(blocks),
    })
}

impl CompressionParams {
    /// Block id plus hash values.
    pub fn bits_sent(&self) -> usize {
        self.block_bits + self.hash_count
    }

    /// ⌈3⁴ (c+2)/ε⁴ + 7 log₂(1/ε)⌉, the closed-form simplification of the cost.
    pub fn simplified_bound(&self) -> f64 {
        (81.0 * (self.c + 2.0) / self.epsilon.powi(4) + 7.0 * (1.0 / self.epsilon).log2()).ceil()
    }

    /// ⌈log₂ log₂(1/ε)⌉, the block-id width written with ε instead of δ.
    pub fn block_bits_epsilon_variant(&self) -> usize {
        let inner = (1.0 / self.epsilon).log2();
        if inner <= 1.0 {
            0
        } else {
            inner.log2().ceil() as usize
        }
    }

    /// 1 − δ − 2δ^{1/4}.
    pub fn relative_success_bound(&self) -> f64 {
        1.0 - self.delta - 2.0 * self.delta.powf(0.25)
    }

    /// Allowance for the ⌈K·x⌉ rounding of the acceptance caps.
    pub fn discretization_tolerance(&self) -> f64 {
        discretization_tolerance(self.n, self.k)
    }
}

pub fn discretization_tolerance(n: usize, k: usize) -> f64 {
    4.0 * n as f64 / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let p = make_params(0.3, 1.0, 2, 64).unwrap();
        assert!((p.delta - 1e-4).abs() < 1e-15);
        assert!((p.c_prime - 30000.0).abs() < 1e-6);
        assert_eq!(p.blocks, 14);
        assert_eq!(p.total_indices, 28);
        assert_eq!(p.hash_count, 30017);
        assert_eq!(p.block_bits, 4);
        assert_eq!(p.bits_sent(), 30021);
    }

    #[test]
    fn zero_c() {
        let p = make_params(0.3, 0.0, 2, 64).unwrap();
        assert!((p.c_prime - 20000.0).abs() < 1e-6);
    }

    #[test]
    fn range_checks() {
        assert!(make_params(1.0, 1.0, 2, 64).is_err());
        assert!(make_params(0.0, 1.0, 2, 64).is_err());
        assert!(make_params(0.3, -1.0, 2, 64).is_err());
        assert!(make_params(0.3, 1.0, 4, 2).is_err());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(11), 4);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
    }
}
