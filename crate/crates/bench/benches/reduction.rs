use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use cds_bench::noise;
use cds_core::strided_sum;

fn reduction(c: &mut Criterion) {
    let values = noise(4096);
    let mut group = c.benchmark_group("strided_sum");
    group.throughput(Throughput::Elements(values.len() as u64));
    group.bench_function("naive", |b| {
        b.iter(|| black_box(&values).iter().fold(0.0, |acc, &v| acc + v))
    });
    for lanes in [1, 4, 7, 8, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(lanes), &lanes, |b, &lanes| {
            b.iter(|| strided_sum(black_box(&values), lanes).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, reduction);
criterion_main!(benches);
