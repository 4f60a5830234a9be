// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hamming_cutoff::bounds::suites::{
    verify_identities, verify_majorant, verify_upper, MajorantGrid, UpperGrid,
};
use hamming_cutoff::montecarlo::{simulate, SimConfig};
use hamming_cutoff::{make_scheme, Exec};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn upper_grid(c: &mut Criterion) {
    let grid = UpperGrid {
        n_min: 1,
        n_max: 14,
        qs: vec![2, 3, 4, 5],
        k_max: 80,
    };
    let mut g = c.benchmark_group("verify_upper");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_upper(&grid, exec).unwrap())
        });
    }
    g.finish();
}

fn majorant_grid(c: &mut Criterion) {
    let grid = MajorantGrid {
        n_max: 20,
        qs: vec![3, 4, 5],
        ..MajorantGrid::default()
    };
    let mut g = c.benchmark_group("verify_majorant");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_majorant(&grid, exec).unwrap())
        });
    }
    g.finish();
}

fn identities(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_identities");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_identities(16, &[2, 3, 4], exec).unwrap())
        });
    }
    g.finish();
}

// Sampling takes a worker count rather than an `Exec`; one worker is the
// sequential path.
fn sampling(c: &mut Criterion) {
    let params = make_scheme(50, 4).unwrap();
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    for workers in [1, 4] {
        let cfg = SimConfig::new(params, 200, 40_000, 7).with_streams(workers);
        g.bench_function(BenchmarkId::new("workers", workers), |b| {
            b.iter(|| simulate(&cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, upper_grid, majorant_grid, identities, sampling);
criterion_main!(benches);
