use criterion::{black_box, criterion_group, criterion_main, Criterion};
use vbqc::adversary::AdversaryStrategy;
use vbqc::css::{remote_prepare, CssCode};
use vbqc::fkproto::{run_fk, PreparedQubit, Role};
use vbqc::gadget::{bob_circuit_postselected, input_state, run_gadget};
use vbqc::harness::instances::n6_fixed;
use vbqc::qsim::PureState;
use vbqc::RandomStream;

fn bench_gadget_round(c: &mut Criterion) {
    let mut rng = RandomStream::from_seed(1);
    c.bench_function("gadget_round_honest", |b| {
        b.iter(|| {
            let run = run_gadget(0.25, 0.5, &AdversaryStrategy::Honest, &mut rng).unwrap();
            black_box(run.outcome.accepted)
        })
    });
}

fn bench_postselect_sweep(c: &mut Criterion) {
    c.bench_function("bob_circuit_postselected", |b| {
        let inputs: [PureState; 5] =
            std::array::from_fn(|i| input_state((i % 2) as u8, ((i / 2) % 2) as u8));
        b.iter(|| black_box(bob_circuit_postselected(&inputs).unwrap().0))
    });
}

fn bench_remote_prepare(c: &mut Criterion) {
    let code = CssCode::steane();
    let mut rng = RandomStream::from_seed(2);
    c.bench_function("steane_remote_prepare", |b| {
        b.iter(|| {
            let prep =
                remote_prepare(&code, 0, 1, 0, &AdversaryStrategy::Honest, &mut rng).unwrap();
            black_box(prep.o)
        })
    });
}

fn bench_fk_run(c: &mut Criterion) {
    let (graph, pattern) = n6_fixed().unwrap();
    let mut rng = RandomStream::from_seed(3);
    c.bench_function("fk_run_n6", |b| {
        b.iter(|| {
            let prepared: Vec<PreparedQubit> = (0..graph.n)
                .map(|v| {
                    PreparedQubit::honest(match graph.roles[v] {
                        Role::Dummy => vbqc::fkproto::random_z_label(&mut rng),
                        _ => vbqc::fkproto::random_plus_label(&mut rng),
                    })
                })
                .collect();
            let run = run_fk(&graph, &pattern, &prepared, &AdversaryStrategy::Honest, &mut rng)
                .unwrap();
            black_box(run.result.accepted)
        })
    });
}

fn bench_decoder(c: &mut Criterion) {
    let code = CssCode::steane();
    c.bench_function("steane_decode", |b| {
        let bits = [1u8, 0, 0, 1, 0, 1, 1];
        b.iter(|| black_box(code.decode_classical(&bits, vbqc::qsim::Basis::Z).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_gadget_round,
    bench_postselect_sweep,
    bench_remote_prepare,
    bench_fk_run,
    bench_decoder
);
criterion_main!(benches);
