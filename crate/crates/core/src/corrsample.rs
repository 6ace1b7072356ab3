//! Zero-communication correlated sampling from a shared maximally entangled
//! state: Alice accepts copy m with her slot projector for ρ, Bob with his for
//! σ, each stopping at the first acceptance.
//!
//! Matrices on B₁B₂ are stored in Bob's frame (the complex conjugate of his
//! physical operators), where his marginal approximates σ rather than σ̄. A
//! pure component on A₁A₂B₁B₂ is stored as its coefficient matrix Ψ with rows
//! indexed by A and columns by B, so ⟨ψ|X ⊗ Ȳ|ψ⟩ = Tr(Ψ† X Ψ Y) for Y given
//! in Bob's frame.

use rand::Rng;
use serde::Serialize;

use crate::compression::projectors::{alice_layout, bob_layout, cap, slot_projector};
use crate::compression::stats::joint_slot_count;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, c64, ComplexMatrix, HermitianEigen};
use crate::hilbert::{partial_trace_matrix, rng_for_stream, DensityMatrix, Projector, TOL_CHECK};
use crate::info;

/// Largest N·K for which the joint output is built.
pub const MAX_SLOT_DIM: usize = 128;

/// ⌈K·a_i⌉ and ⌈K·b_j⌉.
pub fn cs_caps(rho: &HermitianEigen, sigma: &HermitianEigen, k: usize) -> (Vec<usize>, Vec<usize>) {
    (
        rho.values.iter().map(|&a| cap(k, a)).collect(),
        sigma.values.iter().map(|&b| cap(k, b)).collect(),
    )
}

/// (P_A, P_B) with P_B the physical operator, i.e. on conjugated eigenvectors.
pub fn cs_projectors(rho: &DensityMatrix, sigma: &DensityMatrix, k: usize) -> Result<(Projector, Projector)> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let n = rho.dim();
    let (ac, bc) = cs_caps(rho.eigen(), sigma.eigen(), k);
    let pa = slot_projector(rho.eigenvectors(), &ac, k);
    let pb = slot_projector(&sigma.eigenvectors().map(|z| z.conj()), &bc, k);
    Ok((
        Projector::from_parts_unchecked(pa, alice_layout(n, k)),
        Projector::from_parts_unchecked(pb, bob_layout(n, k)),
    ))
}

/// A product component α ⊗ β̄ of τ (β in Bob's frame).
#[derive(Debug, Clone)]
pub struct ProductComponent {
    pub alice: ComplexMatrix,
    pub bob: ComplexMatrix,
}

/// The exact output state τ of the protocol in structured form.
#[derive(Debug, Clone)]
pub struct JointOutput {
    pub n: usize,
    pub k: usize,
    /// Per-copy acceptance probabilities.
    pub q_alice: f64,
    pub q_bob: f64,
    pub q_both: f64,
    pub p_same_index: f64,
    pub p_alice_first: f64,
    pub p_bob_first: f64,
    pub alice_caps: Vec<usize>,
    pub bob_caps: Vec<usize>,
    /// Normalized coefficient matrix of the same-index component.
    pub same: ComplexMatrix,
    /// Alice stops first: her P_A(I − P_B)P_A-collapsed copy, Bob's fresh accepted copy.
    pub alice_first: ProductComponent,
    /// Bob stops first.
    pub bob_first: ProductComponent,
    /// P_A on A₁A₂ (also Bob's frame of the P̄_A he would apply for |θ⟩).
    pub alice_projector: ComplexMatrix,
    /// P_B in Bob's frame.
    pub bob_projector: ComplexMatrix,
}

fn normalized(m: ComplexMatrix) -> Result<ComplexMatrix> {
    let tr = m.trace().re;
    if !(tr > 0.0) {
        return Err(Error::InvalidState("empty conditional state".into()));
    }
    Ok(m.unscale(tr))
}

pub fn exact_joint_output(rho: &DensityMatrix, sigma: &DensityMatrix, k: usize) -> Result<JointOutput> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    exact_joint_output_from(rho.eigen(), sigma.eigen(), k)
}

/// Same as [`exact_joint_output`] for explicitly chosen eigenbases.
pub fn exact_joint_output_from(rho: &HermitianEigen, sigma: &HermitianEigen, k: usize) -> Result<JointOutput> {
    let n = rho.dim();
    if k == 0 {
        return Err(Error::Parameter("K must be positive".into()));
    }
    if n * k > MAX_SLOT_DIM {
        return Err(Error::DimensionCap(format!("N·K = {} exceeds {MAX_SLOT_DIM}", n * k)));
    }
    let (ac, bc) = cs_caps(rho, sigma, k);
    let (a, b) = (&rho.vectors, &sigma.vectors);
    let total = (n * k) as f64;
    let sum_a = ac.iter().sum::<usize>() as f64;
    let sum_b = bc.iter().sum::<usize>() as f64;
    let both = joint_slot_count(a, &ac, b, &bc);
    let (q_alice, q_bob, q_both) = (sum_a / total, sum_b / total, both / total);
    let stop = q_alice + q_bob - q_both;

    let pa = slot_projector(a, &ac, k);
    let pb = slot_projector(b, &bc, k);
    let d = n * k;
    let id = ComplexMatrix::identity(d, d);

    let same = if both > 0.0 { (&pa * &pb).unscale(both.sqrt()) } else { ComplexMatrix::zeros(d, d) };
    let alice_first = ProductComponent {
        alice: normalized(&pa * (&id - &pb) * &pa).unwrap_or_else(|_| ComplexMatrix::zeros(d, d)),
        bob: pb.unscale(sum_b),
    };
    let bob_first = ProductComponent {
        alice: pa.unscale(sum_a),
        bob: normalized(&pb * (&id - &pa) * &pb).unwrap_or_else(|_| ComplexMatrix::zeros(d, d)),
    };
    Ok(JointOutput {
        n,
        k,
        q_alice,
        q_bob,
        q_both,
        p_same_index: q_both / stop,
        p_alice_first: (q_alice - q_both) / stop,
        p_bob_first: (q_bob - q_both) / stop,
        alice_caps: ac,
        bob_caps: bc,
        same,
        alice_first,
        bob_first,
        alice_projector: pa,
        bob_projector: pb,
    })
}

fn tr_prod(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    // Tr(XY) for Hermitian X, Y
    x.iter().zip(y.transpose().iter()).map(|(p, q)| (p * q).re).sum()
}

/// Checked projective measurement on A₁A₂ whose outcomes sum to P_A.
fn check_measurement(out: &JointOutput, m: &[Projector]) -> Result<()> {
    let d = out.n * out.k;
    let mut sum = ComplexMatrix::zeros(d, d);
    for (i, mi) in m.iter().enumerate() {
        if mi.matrix().nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: mi.matrix().nrows(),
            });
        }
        for mj in &m[i + 1..] {
            let cross = mi.matrix() * mj.matrix();
            if cross.iter().any(|z| z.norm() > TOL_CHECK) {
                return Err(Error::Measurement("outcomes are not orthogonal".into()));
            }
        }
        sum += mi.matrix();
    }
    let dev = linalg::max_abs_diff(&sum, &out.alice_projector);
    if dev > TOL_CHECK {
        return Err(Error::Measurement(format!(
            "outcomes do not sum to Alice's acceptance projector (deviation {dev:.2e})"
        )));
    }
    Ok(())
}

/// Outcome distributions of the common measurement on each component.
/// Index w (one past the last outcome) is "outside the measured subspace".
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeTables {
    pub outcomes: usize,
    /// Joint (I, J) table of the same-index component, row-major (w+1)².
    pub same: Vec<f64>,
    pub alice_first: (Vec<f64>, Vec<f64>),
    pub bob_first: (Vec<f64>, Vec<f64>),
}

fn with_complement(m: &[Projector], pa: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let d = pa.nrows();
    let mut ops: Vec<ComplexMatrix> = m.iter().map(|p| p.matrix().clone()).collect();
    ops.push(ComplexMatrix::identity(d, d) - pa);
    ops
}

pub fn outcome_tables(out: &JointOutput, m: &[Projector]) -> Result<OutcomeTables> {
    check_measurement(out, m)?;
    let ops = with_complement(m, &out.alice_projector);
    let w = ops.len();
    let psi = &out.same;
    let left: Vec<ComplexMatrix> = ops.iter().map(|x| psi.adjoint() * x * psi).collect();
    let mut same = vec![0.0; w * w];
    for i in 0..w {
        for j in 0..w {
            same[i * w + j] = tr_prod(&left[i], &ops[j]).max(0.0);
        }
    }
    let marg = |rho: &ComplexMatrix| -> Vec<f64> { ops.iter().map(|x| tr_prod(x, rho).max(0.0)).collect() };
    Ok(OutcomeTables {
        outcomes: w - 1,
        same,
        alice_first: (marg(&out.alice_first.alice), marg(&out.alice_first.bob)),
        bob_first: (marg(&out.bob_first.alice), marg(&out.bob_first.bob)),
    })
}

/// Tr(E τ) with E = Σ_i M_i ⊗ M̄_i.
pub fn agreement_probability(out: &JointOutput, m: &[Projector]) -> Result<f64> {
    let t = outcome_tables(out, m)?;
    Ok(agreement_from_tables(out, &t))
}

fn agreement_from_tables(out: &JointOutput, t: &OutcomeTables) -> f64 {
    let w = t.outcomes + 1;
    let mut same = 0.0;
    let mut af = 0.0;
    let mut bf = 0.0;
    for i in 0..t.outcomes {
        same += t.same[i * w + i];
        af += t.alice_first.0[i] * t.alice_first.1[i];
        bf += t.bob_first.0[i] * t.bob_first.1[i];
    }
    out.p_same_index * same + out.p_alice_first * af + out.p_bob_first * bf
}

impl JointOutput {
    /// Θ = P_A/√rank, the coefficient matrix of |θ⟩ ∝ (P_A ⊗ P̄_A)|S⟩.
    pub fn theta(&self) -> ComplexMatrix {
        let rank: usize = self.alice_caps.iter().sum();
        self.alice_projector.unscale((rank as f64).sqrt())
    }

    fn layout_a(&self) -> crate::hilbert::RegisterLayout {
        alice_layout(self.n, self.k)
    }

    /// Tr_{A₂B₁B₂} τ.
    pub fn alice_marginal(&self) -> Result<ComplexMatrix> {
        let l = self.layout_a();
        let same = &self.same * self.same.adjoint();
        let mix = same * c64(self.p_same_index, 0.0)
            + self.alice_first.alice.clone() * c64(self.p_alice_first, 0.0)
            + self.bob_first.alice.clone() * c64(self.p_bob_first, 0.0);
        partial_trace_matrix(&mix, &l, &["A1"])
    }

    /// Tr_{A₁A₂B₂} τ in Bob's frame.
    pub fn bob_marginal(&self) -> Result<ComplexMatrix> {
        let l = self.layout_a();
        let same = self.same.adjoint() * &self.same;
        let mix = same * c64(self.p_same_index, 0.0)
            + self.alice_first.bob.clone() * c64(self.p_alice_first, 0.0)
            + self.bob_first.bob.clone() * c64(self.p_bob_first, 0.0);
        partial_trace_matrix(&mix, &l, &["A1"])
    }

    /// ‖Tr τ_A − ρ‖₁ and ‖Tr τ_B − σ‖₁.
    pub fn marginal_errors(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(f64, f64)> {
        let ea = linalg::trace_norm_hermitian(&(self.alice_marginal()? - rho.matrix()))?;
        let eb = linalg::trace_norm_hermitian(&(self.bob_marginal()? - sigma.matrix()))?;
        Ok((ea, eb))
    }

    /// ⟨θ|τ|θ⟩.
    pub fn theta_overlap(&self) -> f64 {
        let th = self.theta();
        let amp = (th.adjoint() * &self.same).trace();
        let prod = |c: &ProductComponent| tr_prod(&(&th * &c.alice * &th), &c.bob);
        self.p_same_index * amp.norm_sqr()
            + self.p_alice_first * prod(&self.alice_first)
            + self.p_bob_first * prod(&self.bob_first)
    }

    /// Tr(E |θ⟩⟨θ|).
    pub fn theta_agreement(&self, m: &[Projector]) -> Result<f64> {
        check_measurement(self, m)?;
        let th = self.theta();
        Ok(m.iter().map(|mi| tr_prod(&(&th * mi.matrix() * &th), mi.matrix())).sum())
    }

    /// Lower bound on the smallest eigenvalue of τ minus its same-index term.
    pub fn residual_min_eigenvalue(&self) -> Result<f64> {
        let mut total = 0.0;
        for (w, c) in [(self.p_alice_first, &self.alice_first), (self.p_bob_first, &self.bob_first)] {
            if w == 0.0 {
                continue;
            }
            let ea = linalg::eig_hermitian(&linalg::hermitian_part(&c.alice))?.values;
            let eb = linalg::eig_hermitian(&linalg::hermitian_part(&c.bob))?.values;
            let (amax, amin) = (ea[0], *ea.last().unwrap());
            let (bmax, bmin) = (eb[0], *eb.last().unwrap());
            let lo = [amin * bmax, amax * bmin, amin * bmin, amax * bmax]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            total += w * lo.min(0.0);
        }
        Ok(total)
    }

    /// τ as a dense operator on A₁A₂B₁B₂ in physical coordinates.
    pub fn to_dense(&self) -> Result<DensityMatrix> {
        let d = self.n * self.k;
        if d * d > 1024 {
            return Err(Error::DimensionCap(format!("dense τ of dimension {}", d * d)));
        }
        let mut psi = ComplexMatrix::zeros(d * d, 1);
        for a in 0..d {
            for b in 0..d {
                psi[(a * d + b, 0)] = self.same[(a, b)];
            }
        }
        let mut tau = (&psi * psi.adjoint()) * c64(self.p_same_index, 0.0);
        tau += linalg::kron(&self.alice_first.alice, &self.alice_first.bob.map(|z| z.conj()))
            * c64(self.p_alice_first, 0.0);
        tau += linalg::kron(&self.bob_first.alice, &self.bob_first.bob.map(|z| z.conj()))
            * c64(self.p_bob_first, 0.0);
        let layout = alice_layout(self.n, self.k).concat(&bob_layout(self.n, self.k))?;
        DensityMatrix::new(linalg::hermitian_part(&tau), layout)
    }
}

/// (1 − √(t − t²/4))³ with t = ‖ρ − σ‖₁.
pub fn correlation_bound(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let t = info::trace_distance(rho, sigma)?;
    Ok(bound_from_distance(t))
}

pub fn bound_from_distance(t: f64) -> f64 {
    (1.0 - (t - t * t / 4.0).max(0.0).sqrt()).max(0.0).powi(3)
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub trials: usize,
    pub agreements: usize,
    pub empirical: f64,
    pub exact: f64,
    /// Binomial standard deviation at the exact rate.
    pub sigma: f64,
    /// Counts of stopping indices 1, 2, …, with the last bin holding the tail.
    pub stop_histogram: Vec<usize>,
    pub mean_stop: f64,
}

pub const STOP_BINS: usize = 5;

fn draw(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Trajectory-level simulation: sequential search over i.i.d. copies, then
/// the common measurement on the stopping copy's state.
pub fn mc_sample(out: &JointOutput, m: &[Projector], seed: u64, trials: usize) -> Result<SampleReport> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be positive".into()));
    }
    let tables = outcome_tables(out, m)?;
    let exact = agreement_from_tables(out, &tables);
    let w = tables.outcomes;
    let q_none = (1.0 - (out.q_alice + out.q_bob - out.q_both)).max(0.0);
    let cases = [out.p_same_index, out.p_alice_first, out.p_bob_first];

    let mut agreements = 0;
    let mut hist = vec![0usize; STOP_BINS];
    let mut stop_sum = 0.0;
    for t in 0..trials {
        let mut rng = rng_for_stream(seed, t as u64);
        let mut stop = 1usize;
        while rng.random::<f64>() < q_none {
            stop += 1;
        }
        hist[(stop - 1).min(STOP_BINS - 1)] += 1;
        stop_sum += stop as f64;
        let (i, j) = match draw(&cases, &mut rng) {
            0 => {
                let ij = draw(&tables.same, &mut rng);
                (ij / (w + 1), ij % (w + 1))
            }
            1 => (draw(&tables.alice_first.0, &mut rng), draw(&tables.alice_first.1, &mut rng)),
            _ => (draw(&tables.bob_first.0, &mut rng), draw(&tables.bob_first.1, &mut rng)),
        };
        if i == j && i < w {
            agreements += 1;
        }
    }
    let empirical = agreements as f64 / trials as f64;
    Ok(SampleReport {
        trials,
        agreements,
        empirical,
        exact,
        sigma: (exact * (1.0 - exact) / trials as f64).sqrt(),
        stop_histogram: hist,
        mean_stop: stop_sum / trials as f64,
    })
}

/// Geometric probabilities of the stopping-index bins used by [`mc_sample`].
pub fn stop_bin_probabilities(out: &JointOutput) -> Vec<f64> {
    let q_none = (1.0 - (out.q_alice + out.q_bob - out.q_both)).max(0.0);
    let mut p: Vec<f64> = (0..STOP_BINS - 1).map(|s| (1.0 - q_none) * q_none.powi(s as i32)).collect();
    p.push(q_none.powi((STOP_BINS - 1) as i32));
    p
}
