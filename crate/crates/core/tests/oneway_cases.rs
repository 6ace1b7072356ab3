use std::collections::BTreeMap;
use std::path::Path;

use qcomp_core::hilbert::MatrixRepr;
use qcomp_core::oneway::fixture::{self, FixtureDims};
use qcomp_core::oneway::{self, ProtocolFixture};
use qcomp_core::{info, make_params};

/// Message |0⟩ whatever x is; Bob always answers 0.
fn constant_message() -> ProtocolFixture {
    let id = MatrixRepr(vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]]);
    ProtocolFixture {
        name: Some("constant".into()),
        dims: FixtureDims { ea: 2, eb: 1, m: 2, z: Some(2) },
        shared_state: vec![[1.0, 0.0], [0.0, 0.0]],
        u: [("0".to_string(), id.clone()), ("1".to_string(), id.clone())].into(),
        v: [("0".to_string(), id.clone()), ("1".to_string(), id)].into(),
        relation: (0..2).flat_map(|x| (0..2).map(move |y| [x, y, 0])).collect(),
        mu: (0..2)
            .flat_map(|x| (0..2).map(move |y| (format!("{x},{y}"), 0.25)))
            .collect::<BTreeMap<_, _>>(),
    }
}

#[test]
fn x_independent_message_is_free() {
    let (p, rel) = constant_message().build().unwrap();
    assert!(oneway::info_cost(&p, &rel).unwrap().abs() <= 1e-10);
    let good = oneway::good_set(&p, &rel, 0.1).unwrap();
    assert_eq!(good.len(), rel.pairs().len());
    let states = oneway::message_states(&p, &rel).unwrap();
    for s in states.by_x.iter().chain(states.by_y.values()) {
        assert!((s.matrix() - states.by_x[0].matrix()).norm() <= 1e-12);
    }
    let run = oneway::compress_protocol(&p, &rel, 0.45, 0.25, 1, 2000).unwrap();
    assert_eq!(run.errors, 0);
}

fn builtins() -> Vec<ProtocolFixture> {
    ["equality", "index", "superdense"].iter().map(|n| fixture::builtin(n).unwrap()).collect()
}

#[test]
fn builtins_satisfy_markov_and_cost_cap() {
    for f in builtins() {
        let (p, rel) = f.build().unwrap();
        let global = oneway::global_state(&p, &rel).unwrap();
        let markov = info::cond_mutual_info(&global, &["Y"], &["M", "EB"], &["X"]).unwrap();
        assert!(markov.abs() <= 1e-8, "{:?}: {markov}", f.name);
        let cost = oneway::info_cost(&p, &rel).unwrap();
        assert!(cost <= 2.0 * (p.m as f64).log2() + 1e-9);
        let e1 = oneway::base_error(&p, &rel).unwrap();
        let e2 = oneway::base_error_via_states(&p, &rel).unwrap();
        assert!((e1 - e2).abs() <= 1e-10);
    }
}

#[test]
fn good_set_grows_with_delta() {
    for f in builtins() {
        let (p, rel) = f.build().unwrap();
        let mut prev = oneway::good_set(&p, &rel, 0.05).unwrap();
        for d in [0.1, 0.25, 0.5, 0.9] {
            let g = oneway::good_set(&p, &rel, d).unwrap();
            assert!(prev.is_subset(&g));
            prev = g;
        }
    }
}

#[test]
fn compressed_bits_follow_the_parameter_formula() {
    let (p, rel) = fixture::builtin("equality").unwrap().build().unwrap();
    let (eps, delta) = (0.45, 0.25);
    let run = oneway::compress_protocol(&p, &rel, eps, delta, 3, 500).unwrap();
    let c = oneway::info_cost(&p, &rel).unwrap() / delta;
    assert!((run.c - c).abs() <= 1e-12);
    assert_eq!(run.bits, make_params(eps, c, 2, 64).unwrap().bits_sent());
}

#[test]
fn fixture_files_match_builtins() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for (file, name) in [("equality.json", "equality"), ("index.json", "index"), ("superdense.json", "superdense")] {
        let loaded = ProtocolFixture::load(&dir.join(file)).unwrap();
        let builtin = fixture::builtin(name).unwrap();
        let a: serde_json::Value = serde_json::from_str(&loaded.to_json().unwrap()).unwrap();
        let b: serde_json::Value = serde_json::from_str(&builtin.to_json().unwrap()).unwrap();
        assert_eq!(a, b, "{file}");
    }
}
