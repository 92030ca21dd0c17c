//! Sequential (`workers = 1`) against the rayon pool (`workers = 0`) on the
//! Haar sampler and the trace-datum histogram.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use grmat::experiments::{run_trace_congruence, run_trace_equidistribution, sample_matrices, ExperimentConfig, TraceShape};
use grmat::groups::{Family, GroupSpec, Section};

const WORKERS: [(&str, usize); 2] = [("sequential", 1), ("parallel", 0)];

fn haar_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("haar_sampling");
    group.sample_size(10);
    for (family, n, k) in [(Family::GL, 4, 2), (Family::Sp, 2, 2), (Family::U, 3, 2)] {
        let spec = GroupSpec::new(family, n, 3, 1, k, None).unwrap();
        let samples = 4096;
        group.throughput(Throughput::Elements(samples as u64));
        for (label, workers) in WORKERS {
            group.bench_with_input(BenchmarkId::new(label, spec.label()), &spec, |b, spec| {
                b.iter(|| sample_matrices(spec, Section::Standard, 1, samples, workers))
            });
        }
    }
    group.finish();
}

fn trace_histogram(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace_histogram");
    group.sample_size(10);
    let mut cfg = ExperimentConfig::new(Family::GL, 6, 3, 1, 2);
    cfg.shape = TraceShape::Positive { d: 2 };
    cfg.samples = 8192;
    cfg.seed = 7;
    for (label, workers) in WORKERS {
        let cfg = ExperimentConfig { workers, ..cfg.clone() };
        group.bench_function(BenchmarkId::new(label, "gl_6(Z/9) d=2"), |b| b.iter(|| run_trace_equidistribution(&cfg).unwrap()));
    }
    group.finish();
}

fn congruences(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace_congruence");
    group.sample_size(10);
    let mut cfg = ExperimentConfig::new(Family::SO, 4, 5, 1, 3);
    cfg.samples = 2048;
    cfg.seed = 3;
    for (label, workers) in WORKERS {
        let cfg = ExperimentConfig { workers, ..cfg.clone() };
        group.bench_function(BenchmarkId::new(label, "so_4(Z/125)"), |b| b.iter(|| run_trace_congruence(&cfg, None).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, haar_sampling, trace_histogram, congruences);
criterion_main!(benches);
