//! Randomized property suite: the information inequalities and the
//! protocol-level bounds, each checked on seeded random instances.
//!
//! Every check returns a slack that is non-negative when the property
//! holds. A failing case can be regenerated from `(seed, property, case)`
//! and written out as a counterexample fixture.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::compression::projectors::alice_layout;
use crate::compression::{side_info_rate, side_info_tau, CompressionSession, ProtocolConfig};
use crate::corrsample::{agreement_probability, correlation_bound, exact_joint_output};
use crate::error::Result;
use crate::hilbert::random::random_unitary;
use crate::hilbert::{
    partial_trace_matrix, random_density_on, random_projective_measurement_on, rng_for_stream, DensityMatrix,
    InstanceRng, MatrixRepr, RegisterLayout,
};
use crate::info;
use crate::substate::smooth_substate;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// One evaluated instance.
pub struct Case {
    pub slack: f64,
    pub states: Vec<(String, DensityMatrix)>,
}

impl Case {
    fn new(slack: f64, states: Vec<(&str, DensityMatrix)>) -> Self {
        Self {
            slack,
            states: states.into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
        }
    }
}

pub type Check = fn(&mut InstanceRng) -> Result<Case>;

#[derive(Clone, Copy)]
pub struct Property {
    pub name: &'static str,
    pub tolerance: f64,
    pub check: Check,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub cases: u64,
    pub tolerance: f64,
    pub min_slack: f64,
    pub worst_case: u64,
    pub violations: u64,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// A failing instance, serializable as a fixture.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub property: String,
    pub seed: u64,
    pub case: u64,
    pub slack: f64,
    pub layouts: BTreeMap<String, RegisterLayout>,
    pub states: BTreeMap<String, MatrixRepr>,
}

pub fn information_inequalities() -> Vec<Property> {
    let p = |name, check| Property {
        name,
        tolerance: DEFAULT_TOLERANCE,
        check,
    };
    vec![
        p("fuchs-van de graaf", fuchs_van_de_graaf),
        p("monotonicity", monotonicity),
        p("fidelity vs trace", fidelity_vs_trace),
        p("joint concavity", joint_concavity),
        p("strong subadditivity", strong_subadditivity),
        p("chain rule", chain_rule),
    ]
}

pub fn protocol_bounds() -> Vec<Property> {
    let p = |name, check| Property {
        name,
        tolerance: DEFAULT_TOLERANCE,
        check,
    };
    vec![
        p("relative success", relative_success),
        p("gentle output", gentle_output),
        p("substate bound", substate_bound),
        p("ruskai trace", ruskai_trace),
        Property {
            name: "side-info rate",
            tolerance: 1e-7,
            check: side_info_gap,
        },
        p("correlated sampling", correlated_sampling),
    ]
}

pub fn full_suite() -> Vec<Property> {
    let mut s = information_inequalities();
    s.extend(protocol_bounds());
    s
}

/// Stream of case `case` for the property at position `index` of its suite.
fn case_rng(seed: u64, index: usize, case: u64) -> InstanceRng {
    rng_for_stream(seed, ((index as u64) << 32) | case)
}

pub fn run_property(prop: &Property, index: usize, seed: u64, cases: u64) -> Result<PropertyReport> {
    let slacks = (0..cases)
        .into_par_iter()
        .map(|i| (prop.check)(&mut case_rng(seed, index, i)).map(|c| c.slack))
        .collect::<Result<Vec<_>>>()?;
    let (worst_case, min_slack) = slacks
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
    Ok(PropertyReport {
        name: prop.name.to_string(),
        cases,
        tolerance: prop.tolerance,
        min_slack,
        worst_case: worst_case as u64,
        violations: slacks.iter().filter(|&&s| s < -prop.tolerance).count() as u64,
    })
}

pub fn counterexample(prop: &Property, index: usize, seed: u64, case: u64) -> Result<Counterexample> {
    let c = (prop.check)(&mut case_rng(seed, index, case))?;
    let mut layouts = BTreeMap::new();
    let mut states = BTreeMap::new();
    for (name, s) in &c.states {
        layouts.insert(name.clone(), s.layout().clone());
        states.insert(name.clone(), MatrixRepr::from(s.matrix()));
    }
    Ok(Counterexample {
        property: prop.name.to_string(),
        seed,
        case,
        slack: c.slack,
        layouts,
        states,
    })
}

fn single(n: usize) -> RegisterLayout {
    RegisterLayout::single("A", n)
}

fn random_pair(rng: &mut InstanceRng, n: usize, full_rank_sigma: bool) -> Result<(DensityMatrix, DensityMatrix)> {
    let rho = random_density_on(single(n), rng.random_range(1..=n), rng)?;
    let rank = if full_rank_sigma { n } else { rng.random_range(1..=n) };
    let sigma = random_density_on(single(n), rank, rng)?;
    Ok((rho, sigma))
}

fn fuchs_van_de_graaf(rng: &mut InstanceRng) -> Result<Case> {
    let n = rng.random_range(2..=8usize);
    let (rho, sigma) = random_pair(rng, n, false)?;
    let f = info::fidelity(&rho, &sigma)?;
    let t = info::trace_distance(&rho, &sigma)?;
    let slack = (t - 2.0 * (1.0 - f)).min(2.0 * (1.0 - f * f).max(0.0).sqrt() - t);
    Ok(Case::new(slack, vec![("rho", rho), ("sigma", sigma)]))
}

fn monotonicity(rng: &mut InstanceRng) -> Result<Case> {
    let l = RegisterLayout::new([("A", 2), ("B", 3)])?;
    let rho = random_density_on(l.clone(), rng.random_range(1..=6), rng)?;
    let sigma = random_density_on(l, 6, rng)?;
    let (ra, sa) = (rho.partial_trace(&["A"])?, sigma.partial_trace(&["A"])?);
    let f = info::fidelity(&ra, &sa)? - info::fidelity(&rho, &sigma)?;
    let t = info::trace_distance(&rho, &sigma)? - info::trace_distance(&ra, &sa)?;
    let d = info::rel_entropy(&rho, &sigma)? - info::rel_entropy(&ra, &sa)?;
    Ok(Case::new(f.min(t).min(d), vec![("rho", rho), ("sigma", sigma)]))
}

fn fidelity_vs_trace(rng: &mut InstanceRng) -> Result<Case> {
    let n = rng.random_range(2..=8usize);
    let (rho, sigma) = random_pair(rng, n, false)?;
    let slack = info::sqrt_overlap(&rho, &sigma)? - (1.0 - 0.5 * info::trace_distance(&rho, &sigma)?);
    Ok(Case::new(slack, vec![("rho", rho), ("sigma", sigma)]))
}

fn joint_concavity(rng: &mut InstanceRng) -> Result<Case> {
    let n = rng.random_range(2..=6usize);
    let k = rng.random_range(2..=4usize);
    let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let mut parts = Vec::new();
    let mut avg = 0.0;
    for &p in &w {
        let (r, s) = random_pair(rng, n, false)?;
        avg += p * info::fidelity(&r, &s)?;
        parts.push((p, r, s));
    }
    let mix = |pick: fn(&(f64, DensityMatrix, DensityMatrix)) -> &DensityMatrix| {
        parts
            .iter()
            .fold(crate::ComplexMatrix::zeros(n, n), |acc, t| acc + pick(t).matrix().scale(t.0))
    };
    let r = DensityMatrix::from_unnormalized(mix(|t| &t.1), single(n))?;
    let s = DensityMatrix::from_unnormalized(mix(|t| &t.2), single(n))?;
    let mut states = Vec::new();
    for (i, (_, ri, si)) in parts.into_iter().enumerate() {
        states.push((format!("rho_{i}"), ri));
        states.push((format!("sigma_{i}"), si));
    }
    let slack = info::fidelity(&r, &s)? - avg;
    Ok(Case { slack, states })
}

fn strong_subadditivity(rng: &mut InstanceRng) -> Result<Case> {
    let l = RegisterLayout::new([("A", 2), ("B", 2), ("C", rng.random_range(2..=3))])?;
    let d = l.dim();
    let rho = random_density_on(l, rng.random_range(1..=d), rng)?;
    let slack = info::cond_mutual_info(&rho, &["A"], &["B"], &["C"])?;
    Ok(Case::new(slack, vec![("rho", rho)]))
}

/// A-parts independent of each other and of C; B = the R registers, which
/// become correlated with C through a traced-out ancilla S.
fn chain_rule(rng: &mut InstanceRng) -> Result<Case> {
    let k = if rng.random::<bool>() { 2 } else { 3 };
    let pair = RegisterLayout::new([("A", 2), ("R", 2)])?;
    let mut state = random_density_on(pair.renamed(["A1", "R1"])?, rng.random_range(1..=4), rng)?;
    for i in 2..=k {
        let w = random_density_on(pair.renamed([format!("A{i}"), format!("R{i}")])?, rng.random_range(1..=4), rng)?;
        state = state.tensor(&w)?;
    }
    let cs = RegisterLayout::new([("C", 2), ("S", 2)])?;
    state = state.tensor(&random_density_on(cs, rng.random_range(1..=4), rng)?)?;
    let r_names: Vec<String> = (1..=k).map(|i| format!("R{i}")).collect();
    let a_names: Vec<String> = (1..=k).map(|i| format!("A{i}")).collect();
    let b: Vec<&str> = r_names.iter().map(String::as_str).collect();
    let a: Vec<&str> = a_names.iter().map(String::as_str).collect();
    let mut mixed = b.clone();
    mixed.push("S");
    let u = random_unitary(1 << (k + 1), rng);
    let mut keep: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
    keep.push("C");
    let rotated = state.conjugate_by(&u, &mixed)?;
    let kept = partial_trace_matrix(&rotated, state.layout(), &keep)?;
    let state = DensityMatrix::new(kept, state.layout().select(&keep)?)?;
    let joint = info::cond_mutual_info(&state, &a, &b, &["C"])?;
    let mut parts = 0.0;
    for ai in &a {
        parts += info::cond_mutual_info(&state, &[ai], &b, &["C"])?;
    }
    Ok(Case::new(joint - parts, vec![("rho", state)]))
}

fn low_divergence_session(rng: &mut InstanceRng) -> Result<(DensityMatrix, DensityMatrix, CompressionSession)> {
    let eps = [0.3, 0.45, 0.6][rng.random_range(0..3)];
    let n = rng.random_range(2..=4usize);
    let (rho, sigma) = loop {
        let (r, s) = random_pair(rng, n, true)?;
        if info::rel_entropy(&r, &s)? <= 1.0 {
            break (r, s);
        }
    };
    let cfg = ProtocolConfig::new(eps, 0, 1).with_k(64).with_c(1.0);
    let session = CompressionSession::prepare(&rho, &sigma, cfg)?;
    Ok((rho, sigma, session))
}

fn relative_success(rng: &mut InstanceRng) -> Result<Case> {
    let (rho, sigma, s) = low_divergence_session(rng)?;
    let p = &s.params;
    let slack = s.stats.p_bob_given_alice - (p.relative_success_bound() - p.discretization_tolerance());
    Ok(Case::new(slack, vec![("rho", rho), ("sigma", sigma)]))
}

fn gentle_output(rng: &mut InstanceRng) -> Result<Case> {
    let (rho, sigma, s) = low_divergence_session(rng)?;
    let tol = s.params.discretization_tolerance();
    let slack = s.stats.fidelity_out - (s.stats.p_bob_given_alice.sqrt() - tol);
    Ok(Case::new(slack, vec![("rho", rho), ("sigma", sigma)]))
}

fn substate_bound(rng: &mut InstanceRng) -> Result<Case> {
    let eps = [0.05, 0.1, 0.2, 0.3, 0.5, 0.7][rng.random_range(0..6)];
    let n = rng.random_range(2..=6usize);
    let (rho, sigma) = random_pair(rng, n, true)?;
    let sm = smooth_substate(&rho, &sigma, eps)?;
    let dmax = info::dmax(&sm.rho_prime, &sigma)?;
    let slack = (sm.fidelity_achieved - (1.0 - eps)).min(sm.bound - dmax);
    Ok(Case::new(slack, vec![("rho", rho), ("sigma", sigma)]))
}

fn side_info_layout(rng: &mut InstanceRng) -> Result<RegisterLayout> {
    RegisterLayout::new([("A", 2), ("B", rng.random_range(2..=3))])
}

fn ruskai_trace(rng: &mut InstanceRng) -> Result<Case> {
    let l = side_info_layout(rng)?;
    let sab = random_density_on(l.clone(), l.dim(), rng)?;
    let ra = random_density_on(single(2), rng.random_range(1..=2), rng)?;
    let z = side_info_tau(&ra, &sab)?.z;
    Ok(Case::new(1.0 - z, vec![("rho_a", ra), ("sigma_ab", sab)]))
}

fn side_info_gap(rng: &mut InstanceRng) -> Result<Case> {
    let l = side_info_layout(rng)?;
    let sab = random_density_on(l.clone(), l.dim(), rng)?;
    let rab = random_density_on(l.clone(), l.dim(), rng)?;
    let tau = side_info_tau(&rab.partial_trace(&["A"])?, &sab)?.tau;
    let slack = side_info_rate(&rab, &sab, &["A"])? - info::rel_entropy(&rab, &tau)?;
    Ok(Case::new(slack, vec![("rho_ab", rab), ("sigma_ab", sab)]))
}

fn correlated_sampling(rng: &mut InstanceRng) -> Result<Case> {
    let n = rng.random_range(2..=4usize);
    let k = [8usize, 16, 32][rng.random_range(0..3)];
    let w = rng.random_range(2..=4usize);
    let (rho, sigma) = random_pair(rng, n, false)?;
    let out = exact_joint_output(&rho, &sigma, k)?;
    let tol = 4.0 * n as f64 / k as f64;
    let (ea, eb) = out.marginal_errors(&rho, &sigma)?;
    let m = random_projective_measurement_on(&alice_layout(n, k), &out.alice_projector, w, rng)?;
    let bound = correlation_bound(&rho, &sigma)?;
    let slack = (tol - ea)
        .min(tol - eb)
        .min(agreement_probability(&out, &m)? - (bound - tol))
        .min(out.theta_overlap() - (bound - tol));
    Ok(Case::new(slack, vec![("rho", rho), ("sigma", sigma)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_holds_and_is_reproducible() {
        for (i, p) in full_suite().iter().enumerate() {
            let a = run_property(p, i, 3, 4).unwrap();
            assert!(a.holds(), "{} min slack {}", a.name, a.min_slack);
            let b = run_property(p, i, 3, 4).unwrap();
            assert_eq!(a.min_slack.to_bits(), b.min_slack.to_bits());
        }
    }

    #[test]
    fn counterexample_replays_the_reported_case() {
        let suite = information_inequalities();
        let r = run_property(&suite[0], 0, 9, 6).unwrap();
        let c = counterexample(&suite[0], 0, 9, r.worst_case).unwrap();
        assert_eq!(c.slack.to_bits(), r.min_slack.to_bits());
        assert_eq!(c.states.len(), 2);
    }
}
