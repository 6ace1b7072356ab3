//! Single-coordinate information-cost reduction for one-way protocols: the
//! conditional message states, the internal information cost, and the
//! protocol obtained by compressing the message to that cost.

pub mod fixture;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::compression::{CompressionSession, OutputKind, ProtocolConfig};
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, c64, ComplexMatrix, ComplexVector};
use crate::hilbert::{
    apply_local, partial_trace_matrix, reduced_density, rng_for_stream, DensityMatrix, RegisterLayout,
    TOL_CHECK,
};
use crate::info;

pub use fixture::ProtocolFixture;

/// Largest message-plus-entanglement dimension the compressed run accepts.
pub const MAX_MESSAGE_DIM: usize = 8;

/// Alice holds E_A, Bob E_B of a shared pure state. Alice applies
/// U_x : E_A → A ⊗ M and sends M; Bob applies V_y : M ⊗ E_B → Z ⊗ B′ and
/// measures Z in the computational basis.
#[derive(Debug, Clone)]
pub struct OneWayProtocol {
    pub ea: usize,
    pub eb: usize,
    pub m: usize,
    pub z: usize,
    pub shared: ComplexVector,
    pub alice: Vec<ComplexMatrix>,
    pub bob: Vec<ComplexMatrix>,
}

fn check_unitary(u: &ComplexMatrix, d: usize, what: &str) -> Result<()> {
    if u.shape() != (d, d) {
        return Err(Error::Fixture(format!("{what} must be {d}×{d}, found {:?}", u.shape())));
    }
    let dev = linalg::max_abs_diff(&(u.adjoint() * u), &ComplexMatrix::identity(d, d));
    if dev > TOL_CHECK {
        return Err(Error::Fixture(format!("{what} is not unitary (deviation {dev:.2e})")));
    }
    Ok(())
}

/// Valid answers and the input distribution.
#[derive(Debug, Clone, Serialize)]
pub struct RelationTable {
    pub valid: BTreeSet<(usize, usize, usize)>,
    pub mu: BTreeMap<(usize, usize), f64>,
}

impl RelationTable {
    pub fn new(valid: BTreeSet<(usize, usize, usize)>, mu: BTreeMap<(usize, usize), f64>) -> Result<Self> {
        let total: f64 = mu.values().sum();
        if (total - 1.0).abs() > TOL_CHECK || mu.values().any(|&p| p < 0.0) {
            return Err(Error::Fixture(format!("input distribution sums to {total}")));
        }
        for (&(x, y), &p) in &mu {
            if p > 0.0 && !valid.iter().any(|&(a, b, _)| a == x && b == y) {
                return Err(Error::Fixture(format!("no valid answer for ({x}, {y})")));
            }
        }
        Ok(Self { valid, mu })
    }

    pub fn accepts(&self, x: usize, y: usize, z: usize) -> bool {
        self.valid.contains(&(x, y, z))
    }

    /// Support of μ with positive weight, in key order.
    pub fn pairs(&self) -> Vec<((usize, usize), f64)> {
        self.mu.iter().filter(|(_, &p)| p > 0.0).map(|(&k, &p)| (k, p)).collect()
    }

    pub fn y_marginal(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (&(_, y), &p) in &self.mu {
            *out.entry(y).or_insert(0.0) += p;
        }
        out
    }
}

impl OneWayProtocol {
    pub fn new(
        ea: usize,
        eb: usize,
        m: usize,
        z: usize,
        shared: ComplexVector,
        alice: Vec<ComplexMatrix>,
        bob: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if ea == 0 || eb == 0 || m == 0 || z == 0 || ea % m != 0 || (m * eb) % z != 0 {
            return Err(Error::Fixture(format!(
                "inconsistent dimensions EA={ea} EB={eb} M={m} Z={z}"
            )));
        }
        if shared.len() != ea * eb || (shared.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::Fixture("shared state must be a unit vector on E_A ⊗ E_B".into()));
        }
        if alice.is_empty() || bob.is_empty() {
            return Err(Error::Fixture("empty input set".into()));
        }
        for (x, u) in alice.iter().enumerate() {
            check_unitary(u, ea, &format!("U_{x}"))?;
        }
        for (y, v) in bob.iter().enumerate() {
            check_unitary(v, m * eb, &format!("V_{y}"))?;
        }
        Ok(Self {
            ea,
            eb,
            m,
            z,
            shared,
            alice,
            bob,
        })
    }

    pub fn check_relation(&self, rel: &RelationTable) -> Result<()> {
        for &(x, y) in rel.mu.keys() {
            if x >= self.alice.len() || y >= self.bob.len() {
                return Err(Error::Fixture(format!("input ({x}, {y}) outside the unitary tables")));
            }
        }
        Ok(())
    }

    /// Dimension of Alice's kept register A.
    pub fn a_dim(&self) -> usize {
        self.ea / self.m
    }

    pub fn b_prime(&self) -> usize {
        self.m * self.eb / self.z
    }

    pub fn pure_layout(&self) -> RegisterLayout {
        RegisterLayout::new([("A", self.a_dim()), ("M", self.m), ("EB", self.eb)]).expect("distinct names")
    }

    pub fn message_layout(&self) -> RegisterLayout {
        RegisterLayout::new([("M", self.m), ("EB", self.eb)]).expect("distinct names")
    }

    /// (U_x ⊗ I)|ψ⟩ on A ⊗ M ⊗ E_B.
    pub fn after_alice(&self, x: usize) -> Result<ComplexVector> {
        let l = RegisterLayout::new([("EA", self.ea), ("EB", self.eb)])?;
        apply_local(&self.shared, &l, &self.alice[x], &["EA"])
    }

    /// ρ_B^x on M ⊗ E_B.
    pub fn message_state(&self, x: usize) -> Result<DensityMatrix> {
        let phi = self.after_alice(x)?;
        let m = reduced_density(&phi, &self.pure_layout(), &["M", "EB"])?;
        DensityMatrix::new(linalg::hermitian_part(&m), self.message_layout())
    }

    /// Answer distribution of Bob on (x, y), by applying V_y to the pure state.
    pub fn answer_distribution(&self, x: usize, y: usize) -> Result<Vec<f64>> {
        let phi = self.after_alice(x)?;
        let out = apply_local(&phi, &self.pure_layout(), &self.bob[y], &["M", "EB"])?;
        let l = RegisterLayout::new([("A", self.a_dim()), ("Z", self.z), ("BP", self.b_prime())])?;
        let rz = reduced_density(&out, &l, &["Z"])?;
        Ok((0..self.z).map(|z| rz[(z, z)].re.max(0.0)).collect())
    }

    /// Answer distribution when Bob's M ⊗ E_B holds `state`: V ω V† then Tr_{B′}.
    pub fn answer_distribution_of(&self, y: usize, state: &ComplexMatrix) -> Result<Vec<f64>> {
        let v = &self.bob[y];
        let rotated = v * state * v.adjoint();
        let l = RegisterLayout::new([("Z", self.z), ("BP", self.b_prime())])?;
        let rz = partial_trace_matrix(&rotated, &l, &["Z"])?;
        let tr: f64 = (0..self.z).map(|z| rz[(z, z)].re.max(0.0)).sum();
        Ok((0..self.z).map(|z| rz[(z, z)].re.max(0.0) / tr).collect())
    }
}

/// Conditional message states at a single coordinate.
#[derive(Debug, Clone)]
pub struct MessageStates {
    pub by_x: Vec<DensityMatrix>,
    pub by_y: BTreeMap<usize, DensityMatrix>,
}

pub fn message_states(p: &OneWayProtocol, rel: &RelationTable) -> Result<MessageStates> {
    let by_x = (0..p.alice.len()).map(|x| p.message_state(x)).collect::<Result<Vec<_>>>()?;
    let py = rel.y_marginal();
    let mut by_y = BTreeMap::new();
    for (&y, &wy) in &py {
        if wy <= 0.0 {
            continue;
        }
        let d = p.m * p.eb;
        let mut acc = ComplexMatrix::zeros(d, d);
        for x in 0..by_x.len() {
            let w = rel.mu.get(&(x, y)).copied().unwrap_or(0.0) / wy;
            acc += by_x[x].matrix() * c64(w, 0.0);
        }
        by_y.insert(y, DensityMatrix::new(linalg::hermitian_part(&acc), p.message_layout())?);
    }
    Ok(MessageStates { by_x, by_y })
}

/// ρ on X ⊗ Y ⊗ A ⊗ M ⊗ E_B: Σ μ(x,y) |x⟩⟨x| ⊗ |y⟩⟨y| ⊗ |φ_x⟩⟨φ_x|.
pub fn global_state(p: &OneWayProtocol, rel: &RelationTable) -> Result<DensityMatrix> {
    let (nx, ny) = (p.alice.len(), p.bob.len());
    let inner = p.pure_layout();
    let layout = RegisterLayout::new([("X", nx), ("Y", ny)])?.concat(&inner)?;
    let di = inner.dim();
    let d = nx * ny * di;
    let mut rho = ComplexMatrix::zeros(d, d);
    for (&(x, y), &w) in &rel.mu {
        if w <= 0.0 {
            continue;
        }
        let phi = p.after_alice(x)?;
        let block = &phi * phi.adjoint() * c64(w, 0.0);
        let off = (x * ny + y) * di;
        let mut view = rho.view_mut((off, off), (di, di));
        view += block;
    }
    DensityMatrix::new(rho, layout)
}

/// E_{(x,y)∼μ} D(ρ_B^x ‖ ρ_B^y) = I(X : M E_B | Y), in bits.
pub fn info_cost(p: &OneWayProtocol, rel: &RelationTable) -> Result<f64> {
    let states = message_states(p, rel)?;
    let mut total = 0.0;
    for ((x, y), w) in rel.pairs() {
        total += w * info::rel_entropy(&states.by_x[x], &states.by_y[&y])?;
    }
    Ok(total.max(0.0))
}

/// Pairs whose divergence is at most info_cost/δ.
pub fn good_set(p: &OneWayProtocol, rel: &RelationTable, delta: f64) -> Result<BTreeSet<(usize, usize)>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta {delta} not in (0, 1)")));
    }
    let states = message_states(p, rel)?;
    let threshold = info_cost(p, rel)? / delta + 1e-12;
    let mut out = BTreeSet::new();
    for ((x, y), _) in rel.pairs() {
        if info::rel_entropy(&states.by_x[x], &states.by_y[&y])? <= threshold {
            out.insert((x, y));
        }
    }
    Ok(out)
}

pub fn set_weight(rel: &RelationTable, set: &BTreeSet<(usize, usize)>) -> f64 {
    set.iter().map(|k| rel.mu.get(k).copied().unwrap_or(0.0)).sum()
}

fn error_of(rel: &RelationTable, x: usize, y: usize, dist: &[f64]) -> f64 {
    dist.iter()
        .enumerate()
        .filter(|&(z, _)| !rel.accepts(x, y, z))
        .map(|(_, &q)| q)
        .sum()
}

/// Distributional error of the uncompressed protocol, via the pure state.
pub fn base_error(p: &OneWayProtocol, rel: &RelationTable) -> Result<f64> {
    let mut e = 0.0;
    for ((x, y), w) in rel.pairs() {
        e += w * error_of(rel, x, y, &p.answer_distribution(x, y)?);
    }
    Ok(e)
}

/// The same error, composing the message-state channel with Bob's measurement.
pub fn base_error_via_states(p: &OneWayProtocol, rel: &RelationTable) -> Result<f64> {
    let states = message_states(p, rel)?;
    let mut e = 0.0;
    for ((x, y), w) in rel.pairs() {
        e += w * error_of(rel, x, y, &p.answer_distribution_of(y, states.by_x[x].matrix())?);
    }
    Ok(e)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompressedRun {
    pub trials: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub base_error: f64,
    pub info_cost: f64,
    /// c handed to the compression step: info_cost/δ.
    pub c: f64,
    pub bits: usize,
    pub good_weight: f64,
    /// ε_base + 2δ + 5ε.
    pub bound: f64,
    pub slack: f64,
    pub ok: bool,
}

/// Runs the protocol with the message replaced by the compression step.
pub fn compress_protocol(
    p: &OneWayProtocol,
    rel: &RelationTable,
    epsilon: f64,
    delta: f64,
    seed: u64,
    trials: usize,
) -> Result<CompressedRun> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be positive".into()));
    }
    if p.m * p.eb > MAX_MESSAGE_DIM {
        return Err(Error::DimensionCap(format!(
            "message dimension {} exceeds {MAX_MESSAGE_DIM}",
            p.m * p.eb
        )));
    }
    let states = message_states(p, rel)?;
    let cost = info_cost(p, rel)?;
    let good = good_set(p, rel, delta)?;
    let c = cost / delta;
    let pairs = rel.pairs();

    struct PairPlan {
        session: CompressionSession,
        answers: [Vec<f64>; 3],
    }
    let plans = pairs
        .par_iter()
        .map(|&((x, y), _)| {
            let cfg = ProtocolConfig::new(epsilon, seed, 1).with_c(c);
            let session = CompressionSession::prepare(&states.by_x[x], &states.by_y[&y], cfg)?;
            let answers = [
                p.answer_distribution_of(y, session.output_state(OutputKind::Agreed).matrix())?,
                p.answer_distribution_of(y, session.output_state(OutputKind::Collision).matrix())?,
                p.answer_distribution_of(y, session.output_state(OutputKind::Empty).matrix())?,
            ];
            Ok(PairPlan { session, answers })
        })
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = pairs.iter().map(|(_, w)| *w).collect();
    let bits = plans[0].session.params.bits_sent();

    let errors: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for_stream(seed ^ 0x9e37_79b9_7f4a_7c15, t as u64);
            let k = draw(&weights, &mut rng);
            let ((x, y), _) = pairs[k];
            let outcome = plans[k].session.run_trial(t);
            let slot = match outcome.output {
                OutputKind::Agreed => 0,
                OutputKind::Collision => 1,
                OutputKind::Empty => 2,
            };
            let z = draw(&plans[k].answers[slot], &mut rng);
            usize::from(!rel.accepts(x, y, z))
        })
        .sum();
    let base = base_error(p, rel)?;
    let error_rate = errors as f64 / trials as f64;
    let bound = base + 2.0 * delta + 5.0 * epsilon;
    let pb = bound.clamp(0.0, 1.0);
    let slack = 3.0 * (pb * (1.0 - pb) / trials as f64).sqrt();
    Ok(CompressedRun {
        trials,
        errors,
        error_rate,
        base_error: base,
        info_cost: cost,
        c,
        bits,
        good_weight: set_weight(rel, &good),
        bound,
        slack,
        ok: error_rate <= bound + slack,
    })
}

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
