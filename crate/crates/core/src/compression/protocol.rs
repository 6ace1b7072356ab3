use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::params::{make_params, CompressionParams, DEFAULT_K};
use super::stats::{index_stats, IndexStats};
use crate::error::{Error, Result};
use crate::hilbert::{rng_for_stream, DensityMatrix, InstanceRng, MatrixRepr};
use crate::info;
use crate::substate::{smooth_substate, SmoothedState};

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolConfig {
    pub epsilon: f64,
    pub k: usize,
    pub seed: u64,
    pub trials: usize,
    /// Upper bound on D(ρ‖σ) to use instead of the computed value.
    pub c_override: Option<f64>,
    /// Run on the smoothed ρ′ (parameter δ) rather than ρ itself.
    pub smooth: bool,
}

impl ProtocolConfig {
    pub fn new(epsilon: f64, seed: u64, trials: usize) -> Self {
        Self {
            epsilon,
            k: DEFAULT_K,
            seed,
            trials,
            c_override: None,
            smooth: true,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c_override = Some(c);
        self
    }
}

/// What Bob ends up holding after a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// Bob picked Alice's index: B₁ holds ρ̃.
    Agreed,
    /// A wrong candidate passed every hash check: B₁ holds his fresh accepted marginal.
    Collision,
    /// Abort, or no candidate in the announced block.
    Empty,
}

impl OutputKind {
    fn slot(self) -> usize {
        match self {
            OutputKind::Agreed => 0,
            OutputKind::Collision => 1,
            OutputKind::Empty => 2,
        }
    }
}

/// One run of the protocol. Indices are 1-based.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolOutcome {
    pub trial: usize,
    pub aborted: bool,
    pub alice_index: Option<usize>,
    pub bob_index: Option<usize>,
    pub first_joint_index: Option<usize>,
    pub agreed: bool,
    /// Wrong candidates Bob discarded after a hash mismatch.
    pub hash_rejections: usize,
    pub bits_sent: usize,
    pub output: OutputKind,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolSummary {
    pub trials: usize,
    pub abort_rate: f64,
    pub agreed_rate: f64,
    pub collision_rate: f64,
    pub mean_fidelity: f64,
    pub fidelity_std: f64,
    /// 3σ binomial allowances at the respective thresholds.
    pub abort_slack: f64,
    pub agreed_slack: f64,
    pub fidelity_slack: f64,
    pub abort_ok: bool,
    pub agreed_ok: bool,
    pub fidelity_ok: bool,
    pub bits_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolRun {
    pub outcomes: Vec<ProtocolOutcome>,
    pub summary: ProtocolSummary,
}

/// Everything fixed before the trials: parameters, smoothed state and the
/// per-index statistics the trials sample from.
#[derive(Debug, Clone)]
pub struct CompressionSession {
    pub config: ProtocolConfig,
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub rel_entropy: f64,
    pub smoothed: Option<SmoothedState>,
    pub params: CompressionParams,
    pub stats: IndexStats,
    pub empty_output: DensityMatrix,
    /// Fidelity of each output kind with the target, indexed like [`OutputKind`].
    pub output_fidelity: [f64; 3],
}

fn binomial_slack(p: f64, n: usize) -> f64 {
    let p = p.clamp(0.0, 1.0);
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Whether a wrong candidate survives `hash_count` independent fair-coin
/// comparisons; coins are drawn until the first disagreement.
pub fn hash_matches(rng: &mut impl Rng, hash_count: usize) -> bool {
    (0..hash_count).all(|_| rng.random::<bool>())
}

impl CompressionSession {
    pub fn prepare(rho: &DensityMatrix, sigma: &DensityMatrix, config: ProtocolConfig) -> Result<Self> {
        if config.trials == 0 {
            return Err(Error::Parameter("trials must be positive".into()));
        }
        info::check_support(rho, sigma)?;
        let rel_entropy = info::rel_entropy(rho, sigma)?.max(0.0);
        let c = config.c_override.unwrap_or(rel_entropy);
        let params = make_params(config.epsilon, c, rho.dim(), config.k)?;
        let smoothed = if config.smooth {
            Some(smooth_substate(rho, sigma, params.delta)?)
        } else {
            None
        };
        let alice = smoothed.as_ref().map_or(rho, |s| &s.rho_prime);
        let stats = index_stats(alice, sigma, &params)?;
        let empty_output = DensityMatrix::basis(0, rho.layout().clone())?;
        let output_fidelity = [
            info::fidelity(rho, &stats.rho_tilde)?,
            info::fidelity(rho, &stats.bob_fresh)?,
            info::fidelity(rho, &empty_output)?,
        ];
        Ok(Self {
            config,
            rho: rho.clone(),
            sigma: sigma.clone(),
            rel_entropy,
            smoothed,
            params,
            stats,
            empty_output,
            output_fidelity,
        })
    }

    /// Re-scores the three output states, e.g. after mapping them back
    /// through a dilation.
    pub fn rescore(&mut self, f: impl Fn(&DensityMatrix) -> Result<f64>) -> Result<()> {
        self.output_fidelity = [
            f(&self.stats.rho_tilde)?,
            f(&self.stats.bob_fresh)?,
            f(&self.empty_output)?,
        ];
        Ok(())
    }

    pub fn output_state(&self, kind: OutputKind) -> &DensityMatrix {
        match kind {
            OutputKind::Agreed => &self.stats.rho_tilde,
            OutputKind::Collision => &self.stats.bob_fresh,
            OutputKind::Empty => &self.empty_output,
        }
    }

    pub fn run_trial(&self, trial: usize) -> ProtocolOutcome {
        let mut rng = rng_for_stream(self.config.seed, trial as u64);
        self.trial_with(trial, &mut rng)
    }

    fn trial_with(&self, trial: usize, rng: &mut InstanceRng) -> ProtocolOutcome {
        let p = &self.params;
        let s = &self.stats;
        let (both, alice_only) = (s.p_both, s.p_alice - s.p_both);
        let bob_only = s.p_bob - s.p_both;

        // (alice, bob) acceptance per index
        let events: Vec<(bool, bool)> = (0..p.total_indices)
            .map(|_| {
                let u: f64 = rng.random();
                if u < both {
                    (true, true)
                } else if u < both + alice_only {
                    (true, false)
                } else if u < both + alice_only + bob_only {
                    (false, true)
                } else {
                    (false, false)
                }
            })
            .collect();
        let first_joint = events.iter().position(|&(a, b)| a && b).map(|i| i + 1);
        let Some(m) = events.iter().position(|&(a, _)| a) else {
            return ProtocolOutcome {
                trial,
                aborted: true,
                alice_index: None,
                bob_index: None,
                first_joint_index: first_joint,
                agreed: false,
                hash_rejections: 0,
                bits_sent: 0,
                output: OutputKind::Empty,
                fidelity: self.output_fidelity[OutputKind::Empty.slot()],
            };
        };
        let block = m / p.n;
        let mut rejections = 0;
        let mut chosen = None;
        for c in block * p.n..(block + 1) * p.n {
            if !events[c].1 {
                continue;
            }
            if c == m || hash_matches(rng, p.hash_count) {
                chosen = Some(c);
                break;
            }
            rejections += 1;
        }
        let output = match chosen {
            Some(c) if c == m => OutputKind::Agreed,
            Some(_) => OutputKind::Collision,
            None => OutputKind::Empty,
        };
        ProtocolOutcome {
            trial,
            aborted: false,
            alice_index: Some(m + 1),
            bob_index: chosen.map(|c| c + 1),
            first_joint_index: first_joint,
            agreed: output == OutputKind::Agreed,
            hash_rejections: rejections,
            bits_sent: p.bits_sent(),
            output,
            fidelity: self.output_fidelity[output.slot()],
        }
    }

    pub fn run(&self) -> ProtocolRun {
        let outcomes: Vec<ProtocolOutcome> =
            (0..self.config.trials).into_par_iter().map(|t| self.run_trial(t)).collect();
        let summary = self.summarize(&outcomes);
        ProtocolRun { outcomes, summary }
    }

    pub fn summarize(&self, outcomes: &[ProtocolOutcome]) -> ProtocolSummary {
        let n = outcomes.len().max(1);
        let nf = n as f64;
        let eps = self.config.epsilon;
        let count = |f: &dyn Fn(&ProtocolOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / nf;
        let abort_rate = count(&|o| o.aborted);
        let agreed_rate = count(&|o| o.agreed && o.first_joint_index == o.alice_index);
        let collision_rate = count(&|o| o.output == OutputKind::Collision);
        let mean = outcomes.iter().map(|o| o.fidelity).sum::<f64>() / nf;
        let var = outcomes.iter().map(|o| (o.fidelity - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
        let std = var.sqrt();
        let abort_slack = binomial_slack(eps, n);
        let agreed_slack = binomial_slack(1.0 - 4.0 * eps, n);
        let fidelity_slack = 3.0 * std / nf.sqrt();
        let bits = self.params.bits_sent();
        ProtocolSummary {
            trials: outcomes.len(),
            abort_rate,
            agreed_rate,
            collision_rate,
            mean_fidelity: mean,
            fidelity_std: std,
            abort_slack,
            agreed_slack,
            fidelity_slack,
            abort_ok: abort_rate <= eps + abort_slack,
            agreed_ok: agreed_rate >= 1.0 - 4.0 * eps - agreed_slack,
            fidelity_ok: mean >= 1.0 - 5.0 * eps - fidelity_slack,
            bits_ok: outcomes
                .iter()
                .all(|o| o.bits_sent == if o.aborted { 0 } else { bits }),
        }
    }

    /// One JSON object for a transcript line; Bob's output state is included
    /// when `dump_states` is set.
    pub fn transcript_line(&self, outcome: &ProtocolOutcome, dump_states: bool) -> Result<String> {
        let mut value = serde_json::to_value(outcome)?;
        if dump_states {
            let state = MatrixRepr::from(self.output_state(outcome.output).matrix());
            value["state"] = serde_json::to_value(state)?;
        }
        Ok(serde_json::to_string(&value)?)
    }
}

/// Prepares and runs the protocol in one call.
pub fn run_protocol(rho: &DensityMatrix, sigma: &DensityMatrix, config: ProtocolConfig) -> Result<ProtocolRun> {
    Ok(CompressionSession::prepare(rho, sigma, config)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random_density_on, rng_from_seed, RegisterLayout, StateVector};

    #[test]
    fn pure_one_dimensional_instance() {
        let l = RegisterLayout::single("A", 1);
        let rho = DensityMatrix::pure(&StateVector::basis(0, l).unwrap());
        let run = run_protocol(&rho, &rho, ProtocolConfig::new(0.3, 1, 200).with_k(16)).unwrap();
        for o in &run.outcomes {
            assert_eq!(o.alice_index, Some(1));
            assert!(o.agreed);
            assert_eq!(o.hash_rejections, 0);
            assert!((o.fidelity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn forced_collision_rate() {
        let mut rng = rng_from_seed(17);
        let trials = 80_000;
        let hits = (0..trials).filter(|_| hash_matches(&mut rng, 3)).count();
        let p = 1.0 / 8.0;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - p).abs() < 4.0 * sd);
    }

    #[test]
    fn deterministic_and_accounted() {
        let mut rng = rng_from_seed(4);
        let l = RegisterLayout::single("A", 2);
        let rho = random_density_on(l.clone(), 2, &mut rng).unwrap();
        let sigma = random_density_on(l, 2, &mut rng).unwrap();
        let cfg = ProtocolConfig::new(0.45, 99, 500).with_k(64);
        let s = CompressionSession::prepare(&rho, &sigma, cfg).unwrap();
        let a = s.run();
        let b = s.run();
        assert_eq!(
            serde_json::to_string(&a.outcomes).unwrap(),
            serde_json::to_string(&b.outcomes).unwrap()
        );
        assert!(a.summary.bits_ok);
        assert!(a.summary.abort_ok && a.summary.agreed_ok && a.summary.fidelity_ok);
        let line = s.transcript_line(&a.outcomes[0], true).unwrap();
        assert!(line.contains("\"state\""));
    }

    #[test]
    fn zero_trials_rejected() {
        let rho = DensityMatrix::maximally_mixed(RegisterLayout::single("A", 2));
        assert!(CompressionSession::prepare(&rho, &rho, ProtocolConfig::new(0.3, 0, 0)).is_err());
    }
}
