use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solvharm_core::flow::{energy_gradient, random_compatible_j, run_flow, FlowOptions};
use solvharm_core::gh::classify_oracle;
use solvharm_core::harmonic::{is_harmonic_general, is_harmonic_oracle};
use solvharm_core::lattice::{smith_normal_form, IntMat};
use solvharm_core::scalar::ScalarContext;
use solvharm_core::{AlgebraSpec, ComplexStructure, Mat};

fn random_spec(rng: &mut ChaCha8Rng, n: usize, unimodular: bool) -> AlgebraSpec<f64> {
    let m = 2 * n - 1;
    let mut l = Mat::from_fn(m, m, |_, _| rng.gen_range(-2.0..2.0));
    if unimodular {
        let shift = l.trace() / m as f64;
        for i in 0..m {
            l[(i, i)] -= shift;
        }
    }
    AlgebraSpec::new(n, l, ScalarContext::default()).unwrap()
}

fn bench_harmonicity(c: &mut Criterion) {
    let mut group = c.benchmark_group("harmonicity");
    for n in [2usize, 3, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = random_spec(&mut rng, n, false);
        let cs = ComplexStructure::standard(n).unwrap();
        let dec = spec.decompose();
        group.bench_with_input(BenchmarkId::new("closed-form", n), &n, |b, _| {
            b.iter(|| is_harmonic_general(black_box(&dec), black_box(&cs)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("oracle", n), &n, |b, _| {
            b.iter(|| is_harmonic_oracle(black_box(&dec), black_box(&cs)))
        });
    }
    group.finish();
}

fn bench_classification(c: &mut Criterion) {
    let mut group = c.benchmark_group("classification");
    for n in [3usize, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = random_spec(&mut rng, n, false);
        let cs = ComplexStructure::standard(n).unwrap();
        let dec = spec.decompose();
        group.bench_with_input(BenchmarkId::new("tensor-oracle", n), &n, |b, _| {
            b.iter(|| classify_oracle(black_box(&dec), black_box(&cs)).unwrap())
        });
    }
    group.finish();
}

fn bench_flow(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // Kaehler-admitting algebra: the flow has real work to do
    let mut l = Mat::<f64>::zeros(5, 5);
    l[(1, 2)] = -1.0;
    l[(2, 1)] = 1.0;
    let dec = AlgebraSpec::new(3, l, ScalarContext::default()).unwrap().decompose();
    let j0 = random_compatible_j(3, &mut rng);
    group.bench_function("gradient", |b| {
        b.iter(|| energy_gradient(black_box(&dec), black_box(&j0)).unwrap())
    });
    group.bench_function("descent-to-kaehler", |b| {
        b.iter(|| {
            run_flow(
                black_box(&dec),
                black_box(&j0),
                &FlowOptions { tol_grad: 1e-6, ..Default::default() },
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_snf(c: &mut Criterion) {
    let mut group = c.benchmark_group("smith-normal-form");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for size in [4usize, 8] {
        let rows: Vec<Vec<i64>> =
            (0..size).map(|_| (0..size).map(|_| rng.gen_range(-20..=20)).collect()).collect();
        let m = IntMat::from_i64_rows(&rows);
        group.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, _| {
            b.iter(|| smith_normal_form(black_box(&m)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_harmonicity, bench_classification, bench_flow, bench_snf);
criterion_main!(benches);
