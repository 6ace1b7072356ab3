//! Fidelity, trace distance and the entropic quantities, all in bits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, trace_norm, trace_norm_hermitian, ComplexMatrix, LN_2};
use crate::hilbert::{DensityMatrix, SupportFn, TOL_CHECK, TOL_SUPPORT};

#[derive(Debug, Clone, Serialize)]
pub struct QuantityReport {
    pub name: String,
    pub value: f64,
    pub support_ok: bool,
}

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// ‖√ρ √σ‖₁.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let a = rho.map(SupportFn::Sqrt).matrix;
    let b = sigma.map(SupportFn::Sqrt).matrix;
    Ok(trace_norm(&(a * b)).clamp(0.0, 1.0))
}

/// Tr(√ρ √σ), which is real for PSD arguments.
pub fn sqrt_overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let a = rho.map(SupportFn::Sqrt).matrix;
    let b = sigma.map(SupportFn::Sqrt).matrix;
    Ok((a * b).trace().re)
}

/// ‖ρ − σ‖₁ (no factor ½; ranges over [0, 2]).
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    trace_norm_hermitian(&(rho.matrix() - sigma.matrix()))
}

/// Von Neumann entropy with 0 log 0 = 0.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    -rho.eigenvalues()
        .into_iter()
        .filter(|&x| x > TOL_SUPPORT)
        .map(|x| x * x.log2())
        .sum::<f64>()
}

/// ‖(I − Π_σ) ρ (I − Π_σ)‖₁: weight of ρ outside supp(σ).
pub fn support_leakage(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let d = rho.dim();
    let outside = ComplexMatrix::identity(d, d) - sigma.support_projector();
    let leaked = &outside * rho.matrix() * &outside;
    trace_norm_hermitian(&linalg::hermitian_part(&leaked))
}

pub fn check_support(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    let leak = support_leakage(rho, sigma)?;
    if leak > TOL_CHECK {
        return Err(Error::Support(leak));
    }
    Ok(())
}

/// Tr(ρ log₂ σ) restricted to supp(σ).
fn cross_log(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let e = sigma.eigen();
    let mut acc = 0.0;
    for (j, &b) in e.values.iter().enumerate() {
        if b > TOL_SUPPORT {
            let v = e.vectors.column(j);
            let weight = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
            acc += weight * b.log2();
        }
    }
    acc
}

/// D(ρ‖σ) = Tr ρ log ρ − Tr ρ log σ.
pub fn rel_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_support(rho, sigma)?;
    Ok(-entropy(rho) - cross_log(rho, sigma))
}

/// σ^{-1/2} ρ σ^{-1/2} with the inverse taken on supp(σ).
pub fn tilted_operator(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ComplexMatrix> {
    check_support(rho, sigma)?;
    let s = sigma.map(SupportFn::InvSqrt).matrix;
    Ok(linalg::hermitian_part(&(&s * rho.matrix() * &s)))
}

/// D_max(ρ‖σ) = log₂ λ_max(σ^{-1/2} ρ σ^{-1/2}).
pub fn dmax(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let tilted = tilted_operator(rho, sigma)?;
    let top = linalg::eig_hermitian(&tilted)?.values[0];
    Ok(top.log2())
}

pub fn entropy_of(rho: &DensityMatrix, regs: &[&str]) -> Result<f64> {
    Ok(entropy(&rho.partial_trace(regs)?))
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b).copied().collect()
}

/// I(A:B) = S(A) + S(B) − S(AB) for disjoint register groups.
pub fn mutual_info(rho: &DensityMatrix, a: &[&str], b: &[&str]) -> Result<f64> {
    Ok(entropy_of(rho, a)? + entropy_of(rho, b)? - entropy_of(rho, &union(a, b))?)
}

/// I(A:B) as D(ρ_AB ‖ ρ_A ⊗ ρ_B).
pub fn mutual_info_relent(rho: &DensityMatrix, a: &[&str], b: &[&str]) -> Result<f64> {
    let ab = rho.partial_trace(&union(a, b))?;
    let ra = rho.partial_trace(a)?;
    let rb = rho.partial_trace(b)?;
    // ρ_A ⊗ ρ_B in the layout order of ρ_AB
    let prod = ra.tensor(&rb)?;
    let names: Vec<&str> = ab.layout().names().collect();
    let reordered = reorder(&prod, &names)?;
    rel_entropy(&ab, &reordered)
}

/// I(A:B|C) = I(A:BC) − I(A:C).
pub fn cond_mutual_info(rho: &DensityMatrix, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    Ok(mutual_info(rho, a, &union(b, c))? - mutual_info(rho, a, c)?)
}

/// I(A:B|C) = S(AC) + S(BC) − S(ABC) − S(C).
pub fn cond_mutual_info_entropies(
    rho: &DensityMatrix,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    let ac = union(a, c);
    let bc = union(b, c);
    let abc = union(&ac, b);
    let s_c = if c.is_empty() { 0.0 } else { entropy_of(rho, c)? };
    Ok(entropy_of(rho, &ac)? + entropy_of(rho, &bc)? - entropy_of(rho, &abc)? - s_c)
}

/// Permutes the registers of `rho` into the given order.
pub fn reorder(rho: &DensityMatrix, order: &[&str]) -> Result<DensityMatrix> {
    let layout = rho.layout();
    if order.len() != layout.len() {
        return Err(Error::DimensionMismatch {
            expected: layout.len(),
            found: order.len(),
        });
    }
    let target = layout.select(order)?; // validates names
    let target = crate::hilbert::RegisterLayout::new(
        order.iter().map(|n| (n.to_string(), target.dim_of(n).unwrap())),
    )?;
    let d = layout.dim();
    let pos: Vec<usize> = order.iter().map(|n| layout.position(n)).collect::<Result<_>>()?;
    let mut perm = vec![0usize; d];
    for (flat, slot) in perm.iter_mut().enumerate() {
        let digits = layout.digits(flat);
        *slot = pos
            .iter()
            .zip(target.registers())
            .fold(0, |acc, (&p, r)| acc * r.dim + digits[p]);
    }
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(perm[i], perm[j])] = rho.matrix()[(i, j)];
        }
    }
    DensityMatrix::new(m, target)
}

/// Joint distributions R_ij = a_i |⟨a_i|b_j⟩|², R'_ij = b_j |⟨a_i|b_j⟩|².
#[derive(Debug, Clone, Serialize)]
pub struct JointEigenDistributions {
    pub n: usize,
    pub r: Vec<f64>,
    pub r_prime: Vec<f64>,
}

impl JointEigenDistributions {
    /// Σ √(R R').
    pub fn classical_fidelity(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.r_prime)
            .map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt())
            .sum()
    }

    /// Σ min(R, R') = 1 − ½‖R − R'‖₁.
    pub fn overlap_mass(&self) -> f64 {
        self.r.iter().zip(&self.r_prime).map(|(a, b)| a.min(*b)).sum()
    }
}

pub fn joint_eigen_distributions(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<JointEigenDistributions> {
    same_dim(rho, sigma)?;
    let n = rho.dim();
    let (ea, eb) = (rho.eigen(), sigma.eigen());
    let overlaps = ea.vectors.adjoint() * &eb.vectors;
    let mut r = Vec::with_capacity(n * n);
    let mut r_prime = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let c = overlaps[(i, j)].norm_sqr();
            r.push(ea.values[i].max(0.0) * c);
            r_prime.push(eb.values[j].max(0.0) * c);
        }
    }
    Ok(JointEigenDistributions { n, r, r_prime })
}

/// The pairwise quantities of two states, for reports.
pub fn quantity_reports(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Vec<QuantityReport>> {
    let support_ok = check_support(rho, sigma).is_ok();
    let mut out = vec![
        QuantityReport {
            name: "fidelity".into(),
            value: fidelity(rho, sigma)?,
            support_ok: true,
        },
        QuantityReport {
            name: "trace_distance".into(),
            value: trace_distance(rho, sigma)?,
            support_ok: true,
        },
        QuantityReport {
            name: "entropy_rho".into(),
            value: entropy(rho),
            support_ok: true,
        },
        QuantityReport {
            name: "entropy_sigma".into(),
            value: entropy(sigma),
            support_ok: true,
        },
    ];
    let (d, dm) = if support_ok {
        (rel_entropy(rho, sigma)?, dmax(rho, sigma)?)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    out.push(QuantityReport {
        name: "rel_entropy".into(),
        value: d,
        support_ok,
    });
    out.push(QuantityReport {
        name: "dmax".into(),
        value: dm,
        support_ok,
    });
    out.push(QuantityReport {
        name: "eigen_overlap_mass".into(),
        value: joint_eigen_distributions(rho, sigma)?.overlap_mass(),
        support_ok: true,
    });
    Ok(out)
}

/// Natural-log quantities convert to bits through this factor.
pub fn nats_to_bits(x: f64) -> f64 {
    x / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random_density_on, rng_from_seed, RegisterLayout, StateVector};

    fn diag(v: &[f64]) -> DensityMatrix {
        DensityMatrix::from_diagonal(v, RegisterLayout::single("A", v.len())).unwrap()
    }

    #[test]
    fn identical_states() {
        let rho = diag(&[0.75, 0.25]);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-14);
        assert!(rel_entropy(&rho, &rho).unwrap().abs() < 1e-12);
        assert!(dmax(&rho, &rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pure_states() {
        let a = diag(&[1.0, 0.0]);
        let b = diag(&[0.0, 1.0]);
        assert!(fidelity(&a, &b).unwrap().abs() < 1e-12);
        assert!((trace_distance(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pair_values() {
        let rho = diag(&[0.75, 0.25]);
        let sigma = diag(&[0.5, 0.5]);
        let f = 0.375f64.sqrt() + 0.125f64.sqrt();
        assert!((fidelity(&rho, &sigma).unwrap() - f).abs() < 1e-12);
        assert!((fidelity(&rho, &sigma).unwrap() - 0.96593).abs() < 1e-5);
        assert!((trace_distance(&rho, &sigma).unwrap() - 0.5).abs() < 1e-12);
        // 0.75 log2 1.5 + 0.25 log2 0.5
        let d = 0.75 * 1.5f64.log2() + 0.25 * 0.5f64.log2();
        assert!((rel_entropy(&rho, &sigma).unwrap() - d).abs() < 1e-12);
        assert!((rel_entropy(&rho, &sigma).unwrap() - 0.18872).abs() < 1e-5);
        assert!((dmax(&rho, &sigma).unwrap() - 1.5f64.log2()).abs() < 1e-12);
        assert!((dmax(&rho, &sigma).unwrap() - 0.58496).abs() < 1e-5);
    }

    #[test]
    fn support_violation_is_reported() {
        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[1.0, 0.0]);
        assert!(matches!(rel_entropy(&rho, &sigma), Err(Error::Support(_))));
        assert!(matches!(dmax(&rho, &sigma), Err(Error::Support(_))));
    }

    #[test]
    fn mutual_information_cases() {
        let mut rng = rng_from_seed(5);
        let ra = random_density_on(RegisterLayout::single("A", 2), 2, &mut rng).unwrap();
        let rb = random_density_on(RegisterLayout::single("B", 2), 2, &mut rng).unwrap();
        let prod = ra.tensor(&rb).unwrap();
        assert!(mutual_info(&prod, &["A"], &["B"]).unwrap().abs() < 1e-12);

        let bell = DensityMatrix::pure(&StateVector::maximally_entangled("A", "B", 2).unwrap());
        assert!((mutual_info(&bell, &["A"], &["B"]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cmi_two_expansions_agree() {
        let layout = RegisterLayout::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let rho = random_density_on(layout, 12, &mut rng_from_seed(9)).unwrap();
        let x = cond_mutual_info(&rho, &["A"], &["B"], &["C"]).unwrap();
        let y = cond_mutual_info_entropies(&rho, &["A"], &["B"], &["C"]).unwrap();
        assert!((x - y).abs() < 1e-9);
        assert!(x >= -1e-9);
        let via_d = mutual_info_relent(&rho, &["A"], &["C", "B"]).unwrap();
        assert!((via_d - mutual_info(&rho, &["A"], &["B", "C"]).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn joint_distribution_commuting_pair() {
        let j = joint_eigen_distributions(&diag(&[0.75, 0.25]), &diag(&[0.5, 0.5])).unwrap();
        let want_r = [0.75, 0.0, 0.0, 0.25];
        let want_rp = [0.5, 0.0, 0.0, 0.5];
        for k in 0..4 {
            assert!((j.r[k] - want_r[k]).abs() < 1e-12, "{:?}", j.r);
            assert!((j.r_prime[k] - want_rp[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_distribution_fidelity_identity() {
        let mut rng = rng_from_seed(17);
        let l = RegisterLayout::single("A", 3);
        let rho = random_density_on(l.clone(), 3, &mut rng).unwrap();
        let sigma = random_density_on(l, 3, &mut rng).unwrap();
        let j = joint_eigen_distributions(&rho, &sigma).unwrap();
        assert!((j.r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((j.r_prime.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((j.classical_fidelity() - sqrt_overlap(&rho, &sigma).unwrap()).abs() < 1e-8);
    }
}
