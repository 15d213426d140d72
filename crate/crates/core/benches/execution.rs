use std::hint::black_box;

use bellpt_core::exec::Execution;
use bellpt_core::optimize::{maximize_violation, SeesawOptions};
use bellpt_core::partition::{ppt_check_all, Partition};
use bellpt_core::states::{random_density, random_separable};
use bellpt_core::verify::verify_identities;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_maximize(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximize_violation");
    group.sample_size(10);
    let rho = random_density(4, 3, 1).unwrap();
    let options = SeesawOptions {
        restarts: 16,
        ..SeesawOptions::default()
    };
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 4), &rho, |b, rho| {
            b.iter(|| maximize_violation(black_box(rho), &options, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_identities");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 5), |b| {
            b.iter(|| verify_identities(black_box(5), 50, 0, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_ppt(c: &mut Criterion) {
    let mut group = c.benchmark_group("ppt_check_all");
    group.sample_size(10);
    let n = 6;
    let rho = random_separable(n, 4, 3).unwrap();
    let partition = Partition::singletons(n).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, n), &rho, |b, rho| {
            b.iter(|| ppt_check_all(black_box(rho), &partition, 1e-9, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_maximize, bench_verify, bench_ppt);
criterion_main!(benches);
