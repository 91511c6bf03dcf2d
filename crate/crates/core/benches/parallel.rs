use bondgraph_core::components::{new_atomic, Kind, ParamValue, Value};
use bondgraph_core::fixtures;
use bondgraph_core::model::{Arena, NodeId};
use bondgraph_core::par::Execution;
use bondgraph_core::reduce::{reduce, reduce_with};
use bondgraph_core::sim::{bind_controls, classify, simulate_batch};
use bondgraph_core::symexpr::integer;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

// `n` oscillators sharing one dissipative bus.
fn bank(n: usize) -> (Arena, NodeId) {
    let mut arena = Arena::new();
    let root = arena.new_composite("bank").unwrap();
    let bus = arena.insert(new_atomic(Kind::One, "bus", Value::Default).unwrap());
    let r = arena.insert(new_atomic(Kind::R, "R", Value::Param(ParamValue::Number(integer(1)))).unwrap());
    arena.add(root, &[bus, r]).unwrap();
    arena.connect(bus, r).unwrap();
    for k in 0..n {
        let osc = fixtures::linear_osc(&mut arena, integer(k as i64 + 1), k);
        arena.add(root, &[osc]).unwrap();
        arena.connect((osc, "P_in"), bus).unwrap();
    }
    (arena, root)
}

fn reduction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduce");
    group.sample_size(10);
    for n in [8, 24] {
        let (arena, root) = bank(n);
        for (label, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                b.iter(|| reduce_with(&arena, root, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let (arena, root) = fixtures::build("cavity").unwrap();
    let r = reduce(&arena, root).unwrap();
    let sys = bind_controls(&classify(&r.relations, &r.space).unwrap(), &["6"]).unwrap();
    let starts: Vec<Vec<f64>> = (0..32)
        .map(|k| {
            let mut x = vec![0.0; r.space.states()];
            x[1] = 1.0 + k as f64 / 32.0;
            x
        })
        .collect();
    let mut group = c.benchmark_group("simulate_batch");
    group.sample_size(10);
    for (label, exec) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| simulate_batch(exec, &sys, &starts, (0.0, 1.0), 0.01))
        });
    }
    group.finish();
}

criterion_group!(benches, reduction, batch);
criterion_main!(benches);
