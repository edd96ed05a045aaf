//! Parallel against sequential evaluation of the batch drivers.

use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bdepth::asymptotic::{exceptional_set_scan, ScanOptions};
use bdepth::filtered::DepthOptions;
use bdepth::io;
use bdepth::par::{map_range, Execution};
use bdepth::random::{self, MapShape};
use bdepth::suite::{run_suite, SuiteOptions};

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn depth_batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let maps: Vec<_> = (0..64)
        .map(|_| random::filtered_map(&mut rng, &MapShape::default()))
        .collect();
    let opts = DepthOptions::default();
    let mut group = c.benchmark_group("depth_batch");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                map_range(exec, maps.len(), |i| {
                    black_box(maps[i].depth_witness(&opts).ok())
                })
            })
        });
    }
    group.finish();
}

fn suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = SuiteOptions {
            count: 4,
            execution: exec,
            ..SuiteOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(run_suite(&opts)))
        });
    }
    group.finish();
}

fn scan(c: &mut Criterion) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/family_crossing.csv");
    let fam = io::parse_family(&io::read_text(&path).unwrap(), "crossing").unwrap();
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut opts = ScanOptions {
            resolution: 32,
            execution: exec,
            ..ScanOptions::default()
        };
        opts.integrator.steps = 1024;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(exceptional_set_scan(&fam, 0.25, 3.0, &opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, depth_batch, suite, scan);
criterion_main!(benches);
