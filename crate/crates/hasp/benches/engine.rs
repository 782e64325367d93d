//! Benchmarks for the data-parallel hot paths: brute-force answer-set
//! enumeration, exhaustive selector enumeration, and split assembly.
//!
//! With the default `parallel` feature each group measures both the rayon
//! path and the forced-sequential path, so one `cargo bench` run compares
//! them directly. Building with `--no-default-features` measures the plain
//! sequential build instead.

use criterion::{criterion_group, criterion_main, Criterion};

use hasp::corpus::{generate_hybrid, CorpusBounds, HybridInstance};
use hasp::exec;
use hasp::incremental;
use hasp::oracle;
use hasp::registry::{Env, Registry};
use hasp::splitting;

/// The corpus instance with the largest enumeration base: the heaviest
/// oracle workload the acceptance suite sees.
fn heaviest_instance(registry: &Registry) -> HybridInstance {
    let bounds = CorpusBounds::default();
    (0..200)
        .map(|seed| generate_hybrid(seed, &bounds))
        .max_by_key(|inst| {
            let env = Env::new(registry, inst.program.delta_t());
            let uni =
                oracle::reachable_universe(&env, &inst.program, &inst.init, inst.horizon).unwrap();
            oracle::derivable_facts(&env, inst.program.rules(), uni.positions())
                .unwrap()
                .len()
        })
        .unwrap()
}

fn modes() -> Vec<(&'static str, bool)> {
    if cfg!(feature = "parallel") {
        vec![("parallel", false), ("sequential", true)]
    } else {
        vec![("sequential", true)]
    }
}

fn bench_oracle(c: &mut Criterion) {
    let registry = Registry::with_builtins();
    let inst = heaviest_instance(&registry);
    let env = Env::new(&registry, inst.program.delta_t());
    let mut group = c.benchmark_group("oracle");
    for (label, sequential) in modes() {
        group.bench_function(label, |b| {
            exec::force_sequential(sequential);
            b.iter(|| {
                oracle::brute_force_answer_sets(&env, &inst.program, &inst.init, inst.horizon)
                    .unwrap()
            });
        });
    }
    group.finish();
    exec::force_sequential(false);
}

fn bench_selector_enumeration(c: &mut Criterion) {
    let registry = Registry::with_builtins();
    let inst = heaviest_instance(&registry);
    let env = Env::new(&registry, inst.program.delta_t());
    let mut group = c.benchmark_group("enumerate");
    for (label, sequential) in modes() {
        group.bench_function(label, |b| {
            exec::force_sequential(sequential);
            b.iter(|| {
                incremental::enumerate_all(&env, &inst.program, &inst.init, inst.horizon).unwrap()
            });
        });
    }
    group.finish();
    exec::force_sequential(false);
}

fn bench_split_assembly(c: &mut Criterion) {
    let registry = Registry::with_builtins();
    let inst = heaviest_instance(&registry);
    let env = Env::new(&registry, inst.program.delta_t());
    let universe =
        oracle::reachable_universe(&env, &inst.program, &inst.init, inst.horizon).unwrap();
    let sequence = splitting::prefix_sequence(&universe);
    let mut group = c.benchmark_group("split-assembly");
    for (label, sequential) in modes() {
        group.bench_function(label, |b| {
            exec::force_sequential(sequential);
            b.iter(|| {
                splitting::theorem2_assemble(
                    &env,
                    &sequence,
                    inst.program.rules(),
                    &inst.init,
                    universe.positions(),
                )
                .unwrap()
            });
        });
    }
    group.finish();
    exec::force_sequential(false);
}

fn bench_corpus_sweep(c: &mut Criterion) {
    let registry = Registry::with_builtins();
    let bounds = CorpusBounds::default();
    let instances: Vec<HybridInstance> =
        (0..25).map(|seed| generate_hybrid(seed, &bounds)).collect();
    let mut group = c.benchmark_group("corpus-sweep");
    group.sample_size(20);
    for (label, sequential) in modes() {
        group.bench_function(label, |b| {
            exec::force_sequential(sequential);
            b.iter(|| {
                for inst in &instances {
                    let env = Env::new(&registry, inst.program.delta_t());
                    let enumerated =
                        incremental::enumerate_all(&env, &inst.program, &inst.init, inst.horizon)
                            .unwrap();
                    let expected = oracle::brute_force_answer_sets(
                        &env,
                        &inst.program,
                        &inst.init,
                        inst.horizon,
                    )
                    .unwrap();
                    assert_eq!(enumerated, expected);
                }
            });
        });
    }
    group.finish();
    exec::force_sequential(false);
}

criterion_group!(
    benches,
    bench_oracle,
    bench_selector_enumeration,
    bench_split_assembly,
    bench_corpus_sweep
);
criterion_main!(benches);
