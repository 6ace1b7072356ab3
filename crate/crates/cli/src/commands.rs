use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use qcomp_core::compression::projectors::alice_layout;
use qcomp_core::compression::{
    channel_protocol, side_info_protocol, Channel, CompressionParams, CompressionSession, ProtocolConfig,
    ProtocolOutcome, ProtocolRun,
};
use qcomp_core::corrsample::{correlation_bound, mc_sample, MAX_SLOT_DIM};
use qcomp_core::facts;
use qcomp_core::hilbert::{
    random_density_on, random_projective_measurement_on, rng_for_stream, DensityMatrix, MatrixRepr, RegisterLayout,
    StatePair,
};
use qcomp_core::oneway::{self, fixture};
use qcomp_core::{exact_joint_output, info, smooth_substate};

use crate::args::{Axis, Common, CompressArgs, CorrsampleArgs, Format, OnewayArgs, SelfcheckArgs, SweepArgs};
use crate::error::{CliError, Result};
use crate::report::{content_hash, write_atomic, Report, Table};

/// A finished command: the report plus anything written beside it.
pub struct Outcome {
    pub report: Report,
    pub format: Format,
    pub transcript: Option<Vec<u8>>,
    /// (file name, bytes) written next to the report.
    pub extra_files: Vec<(String, Vec<u8>)>,
    pub violation: bool,
}

fn to_map<T: Serialize>(v: &T) -> Result<Map<String, Value>> {
    match serde_json::to_value(v)? {
        Value::Object(m) => Ok(m),
        other => Err(CliError::Usage(format!("expected an object, got {other}"))),
    }
}

fn config_echo<T: Serialize>(args: &T, defaults: Value) -> Result<Value> {
    let mut m = to_map(args)?;
    m.insert("resolved".into(), defaults);
    Ok(Value::Object(m))
}

/// Resolves a fixture path; bare names fall back to the bundled fixtures/.
pub fn fixture_path(p: &Path) -> PathBuf {
    if p.exists() {
        return p.to_path_buf();
    }
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(p);
    if bundled.exists() {
        bundled
    } else {
        p.to_path_buf()
    }
}

fn read_fixture(p: &Path) -> Result<Vec<u8>> {
    let path = fixture_path(p);
    std::fs::read(&path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

/// The (ρ, σ) input with the bytes it was read or generated from.
struct PairInput {
    rho: DensityMatrix,
    sigma: DensityMatrix,
    bytes: Vec<u8>,
}

fn pair_input(c: &Common, default_n: usize) -> Result<PairInput> {
    if let Some(f) = &c.fixture {
        let bytes = read_fixture(f)?;
        let pair: StatePair = serde_json::from_slice(&bytes)?;
        let (rho, sigma) = pair.states()?;
        return Ok(PairInput { rho, sigma, bytes });
    }
    let n = c.n.unwrap_or(default_n);
    if n < 2 {
        return Err(CliError::Usage(format!("--N {n}: need at least 2")));
    }
    let mut rng = rng_for_stream(c.seed, 0);
    let layout = RegisterLayout::single("A", n);
    let rho = random_density_on(layout.clone(), n, &mut rng)?;
    let sigma = random_density_on(layout, n, &mut rng)?;
    let bytes = serde_json::to_vec(&StatePair::new(None, &rho, &sigma))?;
    Ok(PairInput { rho, sigma, bytes })
}

fn derivations(p: &CompressionParams) -> Result<Value> {
    let mut m = to_map(p)?;
    m.insert("bits_sent".into(), json!(p.bits_sent()));
    m.insert("simplified_bound".into(), json!(p.simplified_bound()));
    m.insert("relative_success_bound".into(), json!(p.relative_success_bound()));
    m.insert("discretization_tolerance".into(), json!(p.discretization_tolerance()));
    Ok(Value::Object(m))
}

fn opt(v: Option<usize>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

fn trial_table(run: &ProtocolRun) -> Table {
    let mut t = Table::new(&["trial", "m", "n", "agreed", "bits", "fidelity"]);
    for o in &run.outcomes {
        t.push(vec![
            json!(o.trial),
            opt(o.alice_index),
            opt(o.bob_index),
            json!(o.agreed),
            json!(o.bits_sent),
            json!(o.fidelity),
        ]);
    }
    let n = run.outcomes.len().max(1) as f64;
    let mean_bits = run.outcomes.iter().map(|o| o.bits_sent as f64).sum::<f64>() / n;
    t.summary_row = Some(vec![
        json!("summary"),
        Value::Null,
        Value::Null,
        json!(run.summary.agreed_rate),
        json!(mean_bits),
        json!(run.summary.mean_fidelity),
    ]);
    t
}

fn transcript(session: &CompressionSession, outcomes: &[ProtocolOutcome], dump: bool) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for o in outcomes {
        out.extend_from_slice(session.transcript_line(o, dump)?.as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}

fn parse_channel(spec: &str, d: usize, seed: u64) -> Result<Channel> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let bad = || CliError::Usage(format!("bad --channel `{spec}`"));
    Ok(match kind {
        "identity" => Channel::identity(d),
        "depolarizing" => Channel::depolarizing(arg.parse().map_err(|_| bad())?)?,
        "random" => {
            let r: usize = arg.parse().map_err(|_| bad())?;
            Channel::random(d, d, r, &mut rng_for_stream(seed, 1))?
        }
        _ => return Err(bad()),
    })
}

pub fn quantities(c: &Common) -> Result<Outcome> {
    let input = pair_input(c, 2)?;
    let mut t = Table::new(&["quantity", "value", "support_ok"]);
    for q in info::quantity_reports(&input.rho, &input.sigma)? {
        let value = if q.value.is_finite() { json!(q.value) } else { json!("inf") };
        t.push(vec![json!(q.name), value, json!(q.support_ok)]);
    }
    let mut summary = Map::new();
    summary.insert("dim".into(), json!(input.rho.dim()));
    summary.insert("rank_rho".into(), json!(input.rho.rank()));
    summary.insert("rank_sigma".into(), json!(input.sigma.rank()));
    finish("quantities", c, json!({"N": input.rho.dim()}), &input.bytes, Value::Null, t, summary, Format::Json)
}

pub fn substate(c: &Common) -> Result<Outcome> {
    let input = pair_input(c, 3)?;
    let eps = c.eps.unwrap_or(0.2);
    let sm = smooth_substate(&input.rho, &input.sigma, eps)?;
    let dmax = info::dmax(&sm.rho_prime, &input.sigma)?;
    let rel = info::rel_entropy(&input.rho, &input.sigma)?;
    let mut t = Table::new(&["epsilon", "rel_entropy", "lambda", "dmax", "certificate", "bound", "fidelity"]);
    t.push(vec![
        json!(eps),
        json!(rel),
        json!(sm.lambda_achieved),
        json!(dmax),
        json!(sm.dmax_certificate()),
        json!(sm.bound),
        json!(sm.fidelity_achieved),
    ]);
    let mut summary = to_map(&sm)?;
    summary.insert("dmax".into(), json!(dmax));
    summary.insert("margin".into(), json!(sm.bound - dmax));
    summary.insert("fidelity_ok".into(), json!(sm.fidelity_achieved >= 1.0 - eps - 1e-12));
    if c.dump_states {
        summary.insert("rho_prime".into(), serde_json::to_value(MatrixRepr::from(sm.rho_prime.matrix()))?);
    }
    let resolved = json!({"N": input.rho.dim(), "eps": eps});
    finish("substate", c, resolved, &input.bytes, Value::Null, t, summary, Format::Json)
}

pub fn compress(a: &CompressArgs) -> Result<Outcome> {
    let c = &a.common;
    let input = pair_input(c, 2)?;
    let eps = c.eps.unwrap_or(0.45);
    let k = c.k.unwrap_or(64);
    let trials = c.trials.unwrap_or(1000);
    let mut cfg = ProtocolConfig::new(eps, c.seed, trials).with_k(k);
    cfg.c_override = a.c;
    cfg.smooth = !a.no_smooth;
    let mut summary = Map::new();
    let (session, run) = match &a.channel {
        Some(spec) => {
            let ch = parse_channel(spec, input.rho.dim(), c.seed)?;
            let r = channel_protocol(&input.rho, &input.sigma, &ch, cfg)?;
            summary.insert("channel_rate".into(), json!(r.rate));
            summary.insert("z".into(), json!(r.z));
            (r.session, r.run)
        }
        None => {
            let s = CompressionSession::prepare(&input.rho, &input.sigma, cfg)?;
            let run = s.run();
            (s, run)
        }
    };
    summary.insert("rel_entropy".into(), json!(session.rel_entropy));
    summary.insert("bits_sent".into(), json!(session.params.bits_sent()));
    summary.insert("index_stats".into(), serde_json::to_value(&session.stats)?);
    summary.extend(to_map(&run.summary)?);
    let tx = match c.transcript {
        Some(_) => Some(transcript(&session, &run.outcomes, c.dump_states)?),
        None => None,
    };
    let resolved = json!({"N": input.rho.dim(), "K": k, "eps": eps, "trials": trials});
    let mut o = finish(
        "compress",
        a,
        resolved,
        &input.bytes,
        derivations(&session.params)?,
        trial_table(&run),
        summary,
        Format::Csv,
    )?;
    o.transcript = tx;
    Ok(o)
}

pub fn sideinfo(c: &Common) -> Result<Outcome> {
    let db = c.n.unwrap_or(2);
    let layout = RegisterLayout::new([("A", 2), ("B", db)])?;
    let (rho, sigma, bytes) = match &c.fixture {
        Some(f) => {
            let bytes = read_fixture(f)?;
            let pair: StatePair = serde_json::from_slice(&bytes)?;
            let (r, s) = pair.states()?;
            if r.dim() % 2 != 0 {
                return Err(CliError::Usage("side-info fixture must have dimension 2·d_B".into()));
            }
            let l = RegisterLayout::new([("A", 2), ("B", r.dim() / 2)])?;
            let rho = DensityMatrix::new(r.matrix().clone(), l.clone())?;
            let sigma = DensityMatrix::new(s.matrix().clone(), l)?;
            (rho, sigma, bytes)
        }
        None => {
            let mut rng = rng_for_stream(c.seed, 0);
            let d = layout.dim();
            let rho = random_density_on(layout.clone(), d, &mut rng)?;
            let sigma = random_density_on(layout, d, &mut rng)?;
            let bytes = serde_json::to_vec(&StatePair::new(None, &rho, &sigma))?;
            (rho, sigma, bytes)
        }
    };
    let eps = c.eps.unwrap_or(0.45);
    let k = c.k.unwrap_or(64);
    let trials = c.trials.unwrap_or(1000);
    let cfg = ProtocolConfig::new(eps, c.seed, trials).with_k(k);
    let r = side_info_protocol(&rho, &sigma, &["A"], cfg)?;
    let mut summary = Map::new();
    summary.insert("z".into(), json!(r.z));
    summary.insert("rate".into(), json!(r.rate));
    summary.insert("rel_entropy_to_tau".into(), json!(r.rel_entropy_to_tau));
    summary.insert("bits_sent".into(), json!(r.session.params.bits_sent()));
    summary.extend(to_map(&r.run.summary)?);
    let tx = match c.transcript {
        Some(_) => Some(transcript(&r.session, &r.run.outcomes, c.dump_states)?),
        None => None,
    };
    let resolved = json!({"dims": [2, rho.dim() / 2], "K": k, "eps": eps, "trials": trials});
    let mut o = finish(
        "sideinfo",
        c,
        resolved,
        &bytes,
        derivations(&r.session.params)?,
        trial_table(&r.run),
        summary,
        Format::Json,
    )?;
    o.transcript = tx;
    Ok(o)
}

pub fn corrsample(a: &CorrsampleArgs) -> Result<Outcome> {
    let c = &a.common;
    let input = pair_input(c, 2)?;
    let n = input.rho.dim();
    let k = c.k.unwrap_or(32);
    let trials = c.trials.unwrap_or(10_000);
    let out = exact_joint_output(&input.rho, &input.sigma, k)?;
    let m = random_projective_measurement_on(
        &alice_layout(n, k),
        &out.alice_projector,
        a.outcomes,
        &mut rng_for_stream(c.seed, 1),
    )?;
    let sample = mc_sample(&out, &m, c.seed, trials)?;
    let bound = correlation_bound(&input.rho, &input.sigma)?;
    let (ea, eb) = out.marginal_errors(&input.rho, &input.sigma)?;
    let tol = 4.0 * n as f64 / k as f64;

    let mut t = Table::new(&["stop_bin", "count"]);
    for (i, &cnt) in sample.stop_histogram.iter().enumerate() {
        t.push(vec![json!(i + 1), json!(cnt)]);
    }
    let mut summary = Map::new();
    summary.insert("bound".into(), json!(bound));
    summary.insert("exact_agreement".into(), json!(sample.exact));
    summary.insert("empirical_agreement".into(), json!(sample.empirical));
    summary.insert("sigma".into(), json!(sample.sigma));
    summary.insert("agreements".into(), json!(sample.agreements));
    summary.insert("mean_stop".into(), json!(sample.mean_stop));
    summary.insert("theta_overlap".into(), json!(out.theta_overlap()));
    summary.insert("marginal_error_alice".into(), json!(ea));
    summary.insert("marginal_error_bob".into(), json!(eb));
    summary.insert("bound_ok".into(), json!(sample.exact >= bound - tol));
    let derived = json!({
        "N": n,
        "K": k,
        "slot_dim": n * k,
        "max_slot_dim": MAX_SLOT_DIM,
        "discretization_tolerance": tol,
        "alice_caps": out.alice_caps,
        "bob_caps": out.bob_caps,
        "q_alice": out.q_alice,
        "q_bob": out.q_bob,
        "q_both": out.q_both,
    });
    let resolved = json!({"N": n, "K": k, "trials": trials});
    finish("corrsample", a, resolved, &input.bytes, derived, t, summary, Format::Json)
}

pub fn oneway_cmd(a: &OnewayArgs) -> Result<Outcome> {
    let c = &a.common;
    let (fx, bytes) = match &c.fixture {
        Some(f) => {
            let bytes = read_fixture(f)?;
            (serde_json::from_slice::<fixture::ProtocolFixture>(&bytes)?, bytes)
        }
        None => {
            let fx = fixture::builtin(&a.builtin)
                .ok_or_else(|| CliError::Usage(format!("unknown built-in protocol `{}`", a.builtin)))?;
            let bytes = fx.to_json()?.into_bytes();
            (fx, bytes)
        }
    };
    let (p, rel) = fx.build()?;
    let eps = c.eps.unwrap_or(0.45);
    let delta = c.delta.unwrap_or(0.25);
    let trials = c.trials.unwrap_or(10_000);
    let run = oneway::compress_protocol(&p, &rel, eps, delta, c.seed, trials)?;
    let states = oneway::message_states(&p, &rel)?;
    let good = oneway::good_set(&p, &rel, delta)?;
    let mut t = Table::new(&["x", "y", "mu", "divergence", "good"]);
    for ((x, y), w) in rel.pairs() {
        let d = info::rel_entropy(&states.by_x[x], &states.by_y[&y])?;
        t.push(vec![json!(x), json!(y), json!(w), json!(d), json!(good.contains(&(x, y)))]);
    }
    let global = oneway::global_state(&p, &rel)?;
    let mut summary = to_map(&run)?;
    summary.insert(
        "markov_cmi".into(),
        json!(info::cond_mutual_info(&global, &["Y"], &["M", "EB"], &["X"])?),
    );
    let derived = json!({"info_cost": run.info_cost, "c": run.c, "bits": run.bits, "delta": delta});
    let resolved = json!({"eps": eps, "delta": delta, "trials": trials, "protocol": fx.name});
    finish("oneway", a, resolved, &bytes, derived, t, summary, Format::Json)
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome> {
    let c = &a.common;
    let input = pair_input(c, 2)?;
    let n = input.rho.dim();
    let values = if a.values.is_empty() {
        match a.over {
            Axis::K => vec![8.0, 16.0, 32.0, 64.0],
            Axis::Eps => vec![0.3, 0.45, 0.6],
        }
    } else {
        a.values.clone()
    };
    let mut t = Table::new(&[
        "K",
        "eps",
        "delta",
        "c_prime",
        "total_indices",
        "hash_count",
        "bits_sent",
        "p_alice",
        "p_bob",
        "p_both",
        "p_bob_given_alice",
        "relative_success_bound",
        "fidelity_out",
        "discretization_tolerance",
        "marginal_error_alice",
        "marginal_error_bob",
        "abort_rate",
        "agreed_rate",
        "mean_fidelity",
    ]);
    for &v in &values {
        let (k, eps) = match a.over {
            Axis::K => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(CliError::Usage(format!("K value {v} is not a positive integer")));
                }
                (v as usize, c.eps.unwrap_or(0.45))
            }
            Axis::Eps => (c.k.unwrap_or(32), v),
        };
        let cfg = ProtocolConfig::new(eps, c.seed, c.trials.unwrap_or(1)).with_k(k);
        let s = CompressionSession::prepare(&input.rho, &input.sigma, cfg)?;
        let (ea, eb) = if n * k <= MAX_SLOT_DIM {
            let (ea, eb) = exact_joint_output(&input.rho, &input.sigma, k)?.marginal_errors(&input.rho, &input.sigma)?;
            (json!(ea), json!(eb))
        } else {
            (Value::Null, Value::Null)
        };
        let mc = match c.trials {
            Some(_) => {
                let r = s.run();
                [json!(r.summary.abort_rate), json!(r.summary.agreed_rate), json!(r.summary.mean_fidelity)]
            }
            None => [Value::Null, Value::Null, Value::Null],
        };
        let (p, st) = (&s.params, &s.stats);
        let mut row = vec![
            json!(k),
            json!(eps),
            json!(p.delta),
            json!(p.c_prime),
            json!(p.total_indices),
            json!(p.hash_count),
            json!(p.bits_sent()),
            json!(st.p_alice),
            json!(st.p_bob),
            json!(st.p_both),
            json!(st.p_bob_given_alice),
            json!(p.relative_success_bound()),
            json!(st.fidelity_out),
            json!(p.discretization_tolerance()),
            ea,
            eb,
        ];
        row.extend(mc);
        t.push(row);
    }
    let mut summary = Map::new();
    summary.insert("points".into(), json!(values.len()));
    let resolved = json!({"N": n, "values": values});
    finish("sweep", a, resolved, &input.bytes, Value::Null, t, summary, Format::Csv)
}

pub fn selfcheck(a: &SelfcheckArgs) -> Result<Outcome> {
    let c = &a.common;
    let cases = c.trials.unwrap_or(100) as u64;
    let suite = facts::full_suite();
    let mut t = Table::new(&["property", "cases", "tolerance", "min_slack", "worst_case", "violations", "holds"]);
    let mut extra = Vec::new();
    let mut failed = Vec::new();
    for (i, prop) in suite.iter().enumerate() {
        let r = facts::run_property(prop, i, c.seed, cases)?;
        let holds = match a.margin {
            Some(m) => r.min_slack >= m,
            None => r.holds(),
        };
        if !holds {
            let cx = facts::counterexample(prop, i, c.seed, r.worst_case)?;
            let name = format!("counterexample-{}-seed{}.json", r.name.replace(' ', "-"), c.seed);
            let mut bytes = serde_json::to_vec_pretty(&cx)?;
            bytes.push(b'\n');
            extra.push((name.clone(), bytes));
            failed.push(name);
        }
        t.push(vec![
            json!(r.name),
            json!(r.cases),
            json!(r.tolerance),
            json!(r.min_slack),
            json!(r.worst_case),
            json!(r.violations),
            json!(holds),
        ]);
    }
    let mut summary = Map::new();
    summary.insert("properties".into(), json!(suite.len()));
    summary.insert("all_hold".into(), json!(failed.is_empty()));
    summary.insert("counterexamples".into(), json!(failed));
    let resolved = json!({"cases": cases, "margin": a.margin});
    let input = serde_json::to_vec(&json!({"seed": c.seed, "cases": cases}))?;
    let mut o = finish("selfcheck", a, resolved, &input, Value::Null, t, summary, Format::Json)?;
    o.violation = !failed.is_empty();
    o.extra_files = extra;
    Ok(o)
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Serialize + HasCommon>(
    command: &'static str,
    args: &T,
    resolved: Value,
    input: &[u8],
    derivations: Value,
    table: Table,
    summary: Map<String, Value>,
    default_format: Format,
) -> Result<Outcome> {
    let common = args.common();
    let format = common.format.unwrap_or(default_format);
    Ok(Outcome {
        report: Report {
            command,
            config: config_echo(args, resolved)?,
            input_hash: content_hash(input),
            derivations,
            table,
            summary,
        },
        format,
        transcript: None,
        extra_files: Vec::new(),
        violation: false,
    })
}

pub trait HasCommon {
    fn common(&self) -> &Common;
}

impl HasCommon for Common {
    fn common(&self) -> &Common {
        self
    }
}

macro_rules! has_common {
    ($($t:ty),*) => {
        $(impl HasCommon for $t {
            fn common(&self) -> &Common {
                &self.common
            }
        })*
    };
}

has_common!(CompressArgs, CorrsampleArgs, OnewayArgs, SweepArgs, SelfcheckArgs);

/// Writes the report (or prints it), the transcript and any extra files.
pub fn emit(o: &Outcome, common: &Common) -> Result<()> {
    let bytes = o.report.render(o.format)?;
    match &common.out {
        Some(p) => write_atomic(p, &bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    if let (Some(p), Some(tx)) = (&common.transcript, &o.transcript) {
        write_atomic(p, tx)?;
    }
    let dir = common
        .out
        .as_ref()
        .and_then(|p| p.parent())
        .filter(|p| !p.as_os_str().is_empty())
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    for (name, bytes) in &o.extra_files {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        eprintln!("counterexample written to {}", path.display());
    }
    Ok(())
}
