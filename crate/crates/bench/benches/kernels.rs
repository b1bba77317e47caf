use std::hint::black_box;

use cokernels::experiments::{lift_census, sample_joint_distribution, SamplerConfig};
use cokernels::snf::cokernel_class_via_lee;
use cokernels::{smith_normal_form, ChainRing, PolySpec, RingMatrix};
use cokernels_bench::random_matrices;
use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

fn snf(c: &mut Criterion) {
    let mut group = c.benchmark_group("snf");
    let z8 = ChainRing::integers(2, 3).unwrap();
    let quadratic = ChainRing::extension(&PolySpec::parse("1,1,1", 2).unwrap(), 2).unwrap();
    let wide = ChainRing::integers(1_000_003, 3).unwrap();
    for (name, ring, n) in [("z8_4x4", &z8, 4), ("z8_8x8", &z8, 8), ("quadratic_4x4", &quadratic, 4), ("wide_6x6", &wide, 6)] {
        let inputs = random_matrices(ring, n, 256, 1);
        group.throughput(Throughput::Elements(inputs.len() as u64));
        group.bench_function(name, |b| {
            b.iter(|| {
                for x in &inputs {
                    black_box(smith_normal_form(x, false));
                }
            })
        });
    }
    let inputs = random_matrices(&z8, 4, 64, 2);
    group.throughput(Throughput::Elements(inputs.len() as u64));
    group.bench_function("z8_4x4_transforms", |b| {
        b.iter(|| {
            for x in &inputs {
                black_box(smith_normal_form(x, true));
            }
        })
    });
    group.finish();
}

fn lee(c: &mut Criterion) {
    let ring = ChainRing::integers(2, 3).unwrap();
    let poly = PolySpec::parse("1,1,0,1", 2).unwrap();
    let inputs = random_matrices(&ring, 3, 256, 3);
    let mut group = c.benchmark_group("lee");
    group.throughput(Throughput::Elements(inputs.len() as u64));
    group.bench_function("cubic_3x3", |b| {
        b.iter(|| {
            for x in &inputs {
                black_box(cokernel_class_via_lee(x, &poly).unwrap());
            }
        })
    });
    group.finish();
}

fn lifts(c: &mut Criterion) {
    let mut group = c.benchmark_group("lifts");
    group.sample_size(10);
    let t = PolySpec::identity(2).unwrap();
    let xbar = RingMatrix::from_ints(&ChainRing::integers(2, 1).unwrap(), 3, 3, &[0, 1, 0, 0, 0, 1, 0, 0, 0]).unwrap();
    group.throughput(Throughput::Elements(1 << 18));
    group.bench_function("t_n3_N2", |b| {
        b.iter(|| black_box(lift_census(&xbar, std::slice::from_ref(&t), 2, u64::MAX).unwrap()))
    });
    let quadratic = PolySpec::parse("1,1,1", 2).unwrap();
    let companion = RingMatrix::companion(&ChainRing::integers(2, 1).unwrap(), &quadratic);
    group.throughput(Throughput::Elements(1 << 8));
    group.bench_function("quadratic_n2_N2", |b| {
        b.iter(|| black_box(lift_census(&companion, std::slice::from_ref(&quadratic), 2, u64::MAX).unwrap()))
    });
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample");
    group.sample_size(10);
    let polys = [PolySpec::identity(2).unwrap(), PolySpec::parse("-1,1", 2).unwrap()];
    let samples = 1 << 16;
    group.throughput(Throughput::Elements(samples));
    group.bench_function("joint_n8_N2", |b| {
        b.iter_batched(
            || SamplerConfig { seed: 7, samples, workers: 1 },
            |cfg| black_box(sample_joint_distribution(2, 8, 2, &polys, &cfg).unwrap()),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, snf, lee, lifts, sampling);
criterion_main!(benches);
