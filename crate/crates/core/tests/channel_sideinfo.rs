use qcomp_core::compression::{channel_protocol, side_info_protocol, stinespring, Channel};
use qcomp_core::hilbert::linalg::max_abs_diff;
use qcomp_core::hilbert::{random_density_on, rng_for_stream, RegisterLayout};
use qcomp_core::{info, ComplexMatrix, ProtocolConfig};

#[test]
fn dilation_reproduces_random_channel() {
    let mut rng = rng_for_stream(50, 0);
    let ch = Channel::random(2, 2, 2, &mut rng).unwrap();
    let sum = ch.kraus().iter().fold(ComplexMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * k);
    assert!(max_abs_diff(&sum, &ComplexMatrix::identity(2, 2)) <= 1e-10);
    let dil = stinespring(&ch);
    let v = dil.isometry();
    assert!(max_abs_diff(&(v.adjoint() * &v), &ComplexMatrix::identity(2, 2)) <= 1e-10);
    for i in 0..100 {
        let mut r = rng_for_stream(51, i);
        let rho = random_density_on(RegisterLayout::single("A", 2), 1 + (i as usize % 2), &mut r).unwrap();
        let direct = ch.apply(&rho).unwrap();
        let via = dil.dilate(&rho).unwrap().partial_trace(&["B"]).unwrap();
        assert!(max_abs_diff(direct.matrix(), via.matrix()) <= 1e-9);
        let back = dil.undilate(&dil.dilate(&rho).unwrap(), rho.layout().clone()).unwrap().unwrap();
        assert!(max_abs_diff(back.matrix(), rho.matrix()) <= 1e-9);
    }
}

#[test]
fn fully_depolarizing_channel_keeps_the_full_divergence() {
    let mut rng = rng_for_stream(52, 0);
    let l = RegisterLayout::single("A", 2);
    let rho = random_density_on(l.clone(), 2, &mut rng).unwrap();
    let sigma = random_density_on(l, 2, &mut rng).unwrap();
    let ch = Channel::depolarizing(1.0).unwrap();
    let out = info::rel_entropy(&ch.apply(&rho).unwrap(), &ch.apply(&sigma).unwrap()).unwrap();
    assert!(out.abs() <= 1e-10);
    let run = channel_protocol(&rho, &sigma, &ch, ProtocolConfig::new(0.45, 3, 50).with_k(16)).unwrap();
    assert!((run.rate - info::rel_entropy(&rho, &sigma).unwrap()).abs() <= 1e-9);
    assert!(run.z <= 1.0 + 1e-8);
}

#[test]
fn side_info_run_is_accounted() {
    let mut rng = rng_for_stream(53, 0);
    let l = RegisterLayout::new([("A", 2), ("B", 2)]).unwrap();
    let rho = random_density_on(l.clone(), 4, &mut rng).unwrap();
    let sigma = random_density_on(l, 4, &mut rng).unwrap();
    let run = side_info_protocol(&rho, &sigma, &["A"], ProtocolConfig::new(0.45, 4, 400).with_k(32)).unwrap();
    assert!(run.z <= 1.0 + 1e-8);
    assert!(run.rel_entropy_to_tau <= run.rate + 1e-7);
    assert_eq!(run.session.params.c, run.rate);
    let bits = run.session.params.bits_sent();
    assert!(run.run.outcomes.iter().all(|o| o.bits_sent == bits || o.aborted));
    assert!(run.run.summary.abort_ok && run.run.summary.agreed_ok && run.run.summary.fidelity_ok);
}
