//! Constructive substate smoothing: truncate the tilted operator
//! σ^{-1/2} ρ σ^{-1/2} above a threshold and map back.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, ComplexMatrix};
use crate::hilbert::{DensityMatrix, SupportFn};
use crate::info;

#[derive(Debug, Clone, Serialize)]
pub struct SmoothedState {
    #[serde(skip)]
    pub rho_prime: DensityMatrix,
    /// Truncation threshold in bits; equals log₂ of a tilted eigenvalue.
    pub lambda_achieved: f64,
    /// Normalization Z of the truncated operator.
    pub normalization: f64,
    pub fidelity_achieved: f64,
    /// (D(ρ‖σ) + 1)/ε + log₂(1/(1 − ε)).
    pub bound: f64,
    pub epsilon: f64,
}

impl SmoothedState {
    /// λ − log₂ Z, which upper-bounds D_max(ρ′‖σ) by construction.
    pub fn dmax_certificate(&self) -> f64 {
        self.lambda_achieved - self.normalization.log2()
    }
}

pub fn substate_bound(rel_entropy: f64, epsilon: f64) -> f64 {
    (rel_entropy + 1.0) / epsilon + (1.0 / (1.0 - epsilon)).log2()
}

/// Smallest truncation threshold whose state has F(ρ, ρ′) ≥ 1 − ε.
///
/// Candidate thresholds are the distinct eigenvalues of the tilted operator;
/// F is evaluated at each in increasing order, so the returned λ is exact
/// rather than a bisection bracket.
pub fn smooth_substate(rho: &DensityMatrix, sigma: &DensityMatrix, epsilon: f64) -> Result<SmoothedState> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon {epsilon} not in (0, 1)")));
    }
    let tilted = info::tilted_operator(rho, sigma)?;
    let eig = linalg::eig_hermitian(&tilted)?;
    let sqrt_sigma = sigma.map(SupportFn::Sqrt).matrix;
    let d_rel = info::rel_entropy(rho, sigma)?;
    let bound = substate_bound(d_rel, epsilon);

    let n = eig.dim();
    let top = eig.values[0].max(f64::MIN_POSITIVE);
    let scale_tol = 1e-12 * top;

    // eigenvalues are descending; walk thresholds from the smallest positive one up
    let mut k = n;
    while k > 0 {
        let mu = eig.values[k - 1];
        // group equal eigenvalues so Π covers whole eigenspaces
        let mut start = k - 1;
        while start > 0 && (eig.values[start - 1] - mu).abs() <= scale_tol {
            start -= 1;
        }
        k = start;
        if mu <= scale_tol {
            continue;
        }
        // indices [start, n) carry eigenvalue ≤ mu
        let kept = eig.vectors.columns(start, n - start);
        let values = &eig.values[start..];
        let mut truncated = ComplexMatrix::zeros(n, n);
        for (c, &v) in values.iter().enumerate() {
            let col = kept.column(c);
            truncated += (&col * col.adjoint()).scale(v.max(0.0));
        }
        let unnormalized = linalg::hermitian_part(&(&sqrt_sigma * &truncated * &sqrt_sigma));
        let z = unnormalized.trace().re;
        if !(z > 0.0) {
            continue;
        }
        let rho_prime = DensityMatrix::from_unnormalized(unnormalized, rho.layout().clone())?;
        let f = info::fidelity(rho, &rho_prime)?;
        if f >= 1.0 - epsilon {
            return Ok(SmoothedState {
                rho_prime,
                lambda_achieved: mu.log2(),
                normalization: z,
                fidelity_achieved: f,
                bound,
                epsilon,
            });
        }
    }
    // unreachable in exact arithmetic: the top threshold gives ρ′ = ρ
    Err(Error::InvalidState(
        "no truncation threshold reached the fidelity target".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random_density_on, rng_from_seed, RegisterLayout};

    fn diag(v: &[f64]) -> DensityMatrix {
        DensityMatrix::from_diagonal(v, RegisterLayout::single("A", v.len())).unwrap()
    }

    #[test]
    fn identical_states_need_no_smoothing() {
        let rho = diag(&[0.6, 0.3, 0.1]);
        let s = smooth_substate(&rho, &rho, 0.1).unwrap();
        assert!(s.lambda_achieved.abs() <= 1e-3);
        assert!((s.fidelity_achieved - 1.0).abs() < 1e-12);
    }

    /// Grid search over thresholds on the classical tilted values (1.5, 0.5).
    #[test]
    fn commuting_case_matches_grid_search() {
        let rho = diag(&[0.75, 0.25]);
        let sigma = diag(&[0.5, 0.5]);
        let eps = 0.4;
        let tilted = [1.5, 0.5];
        let probs = [0.75, 0.25];
        let mut grid_lambda = None;
        for step in -20_000..=20_000 {
            let lambda = step as f64 * 1e-4;
            let cap = 2f64.powf(lambda);
            // truncation keeps tilted values ≤ 2^λ
            let kept: f64 = (0..2).filter(|&i| tilted[i] <= cap).map(|i| probs[i]).sum();
            if kept > 0.0 && kept.sqrt() >= 1.0 - eps {
                grid_lambda = Some(lambda);
                break;
            }
        }
        let grid_lambda = grid_lambda.unwrap();
        let s = smooth_substate(&rho, &sigma, eps).unwrap();
        assert!((s.lambda_achieved - grid_lambda).abs() <= 1e-3, "{} vs {grid_lambda}", s.lambda_achieved);
        // F = √0.25 = 0.5 < 0.6, so the full state is needed
        assert!((s.lambda_achieved - 1.5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn loose_epsilon_truncates() {
        let rho = diag(&[0.75, 0.25]);
        let sigma = diag(&[0.5, 0.5]);
        let s = smooth_substate(&rho, &sigma, 0.6).unwrap();
        assert!((s.lambda_achieved - 0.5f64.log2()).abs() < 1e-12);
        assert!((s.fidelity_achieved - 0.5).abs() < 1e-12);
    }

    #[test]
    fn certificate_matches_independent_dmax() {
        let mut rng = rng_from_seed(23);
        let l = RegisterLayout::single("A", 2);
        for _ in 0..20 {
            let rho = random_density_on(l.clone(), 2, &mut rng).unwrap();
            let sigma = random_density_on(l.clone(), 2, &mut rng).unwrap();
            let s = smooth_substate(&rho, &sigma, 0.2).unwrap();
            assert!(s.fidelity_achieved >= 0.8 - 1e-8);
            let dm = info::dmax(&s.rho_prime, &sigma).unwrap();
            assert!((dm - s.dmax_certificate()).abs() < 1e-6);
            assert!(dm <= s.bound, "{dm} > {}", s.bound);
        }
    }

    #[test]
    fn rejects_bad_epsilon_and_support() {
        let rho = diag(&[0.5, 0.5]);
        assert!(matches!(smooth_substate(&rho, &rho, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(
            smooth_substate(&rho, &diag(&[1.0, 0.0]), 0.1),
            Err(Error::Support(_))
        ));
    }
}
