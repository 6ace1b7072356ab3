use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qcomp_core::hilbert::linalg::eig_hermitian;
use qcomp_core::hilbert::{random_density, random_density_on, rng_from_seed, RegisterLayout};
use qcomp_core::{exact_joint_output, index_stats, info, make_params, CompressionSession, ProtocolConfig};

fn eig(c: &mut Criterion) {
    let mut g = c.benchmark_group("eig_hermitian");
    for n in [4usize, 16, 64, 128] {
        let rho = random_density(n, n, 1).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &rho, |b, rho| {
            b.iter(|| eig_hermitian(black_box(rho.matrix())).unwrap())
        });
    }
    g.finish();
}

fn quantities(c: &mut Criterion) {
    let rho = random_density(8, 8, 2).unwrap();
    let sigma = random_density(8, 8, 3).unwrap();
    c.bench_function("fidelity_8", |b| b.iter(|| info::fidelity(black_box(&rho), &sigma).unwrap()));
    c.bench_function("rel_entropy_8", |b| b.iter(|| info::rel_entropy(black_box(&rho), &sigma).unwrap()));
    let l = RegisterLayout::new([("A", 2), ("B", 4), ("C", 4)]).unwrap();
    let abc = random_density_on(l, 32, &mut rng_from_seed(4)).unwrap();
    c.bench_function("cond_mutual_info_2x4x4", |b| {
        b.iter(|| info::cond_mutual_info(black_box(&abc), &["A"], &["B"], &["C"]).unwrap())
    });
}

fn stats(c: &mut Criterion) {
    let mut g = c.benchmark_group("index_stats");
    for (n, k) in [(2usize, 64usize), (4, 1024), (8, 1 << 16)] {
        let rho = random_density(n, n, 5).unwrap();
        let sigma = random_density(n, n, 6).unwrap();
        let p = make_params(0.45, 1.0, n, k).unwrap();
        g.bench_function(format!("N{n}_K{k}"), |b| {
            b.iter(|| index_stats(black_box(&rho), &sigma, &p).unwrap())
        });
    }
    g.finish();
}

fn joint_output(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_joint_output");
    for (n, k) in [(2usize, 16usize), (2, 32), (4, 32)] {
        let rho = random_density(n, n, 7).unwrap();
        let sigma = random_density(n, n, 8).unwrap();
        g.bench_function(format!("N{n}_K{k}"), |b| {
            b.iter(|| exact_joint_output(black_box(&rho), &sigma, k).unwrap())
        });
    }
    g.finish();
}

fn protocol(c: &mut Criterion) {
    let rho = random_density(2, 2, 9).unwrap();
    let sigma = random_density(2, 2, 10).unwrap();
    let session = CompressionSession::prepare(&rho, &sigma, ProtocolConfig::new(0.45, 1, 1000).with_k(64)).unwrap();
    c.bench_function("protocol_1000_trials", |b| b.iter(|| black_box(session.run())));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = eig, quantities, stats, joint_output, protocol
}
criterion_main!(benches);
