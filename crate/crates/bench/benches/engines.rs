use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qadv_core::circuit::{random_brickwork, PairingScheme};
use qadv_core::dequant::{self, SQVector};
use qadv_core::propagation::backpropagate;
use qadv_core::{seed, Pauli, PauliMap, PauliString, PropagationConfig, StateVector};

fn propagation(c: &mut Criterion) {
    let mut group = c.benchmark_group("backpropagate");
    for k in [1, 2] {
        let circuit = random_brickwork(16, 20, PairingScheme::Brickwork, 1).unwrap();
        let o = PauliMap::from_term(PauliString::single(16, 0, Pauli::Z).unwrap(), 1.0);
        let cfg = PropagationConfig::with_k(k);
        group.bench_with_input(BenchmarkId::new("n16_L20", k), &k, |b, _| {
            b.iter(|| backpropagate(black_box(&circuit), &o, &cfg).unwrap())
        });
    }
    group.finish();
}

fn statevector(c: &mut Criterion) {
    let mut group = c.benchmark_group("statevector");
    for n in [8, 12, 16] {
        let circuit = random_brickwork(n, 10, PairingScheme::Brickwork, 2).unwrap();
        let zero = vec![false; n];
        group.bench_with_input(BenchmarkId::new("apply_L10", n), &n, |b, _| {
            b.iter(|| {
                let mut s = StateVector::prepare_basis(n, &zero).unwrap();
                s.apply(black_box(&circuit)).unwrap();
                s
            })
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut rng = seed::rng_from_seed(3);
    let v = dequant::random_unit(1 << 16, &mut rng);
    let sq = SQVector::build(&v, false).unwrap();
    c.bench_function("sq_build_65536", |b| b.iter(|| SQVector::build(black_box(&v), false).unwrap()));
    c.bench_function("sq_draw_65536", |b| b.iter(|| sq.draw(&mut rng)));
}

criterion_group!(benches, propagation, statevector, sampling);
criterion_main!(benches);
