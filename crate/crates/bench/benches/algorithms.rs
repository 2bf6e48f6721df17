use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signrange::density::{density, IndexSet};
use signrange::moran::{attractor_points, synthetic_two_ratio_system};
use signrange::oracle::exact_range;
use signrange::selection::{bounded_signs, combine5, pairable, tail_control};
use signrange::{Complex2, SequenceSpec, SequenceWindow};

fn random_window(len: usize, seed: u64) -> SequenceWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..len)
        .map(|_| Complex2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        .collect();
    SequenceWindow::new(terms).unwrap()
}

fn selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("selection");
    for len in [1_000usize, 10_000, 100_000] {
        let window = random_window(len, len as u64);
        group.bench_with_input(BenchmarkId::new("bounded_signs", len), &window, |b, w| b.iter(|| bounded_signs(w)));
    }
    let spec = SequenceSpec::example41(None).window(100_000).unwrap();
    group.bench_function("tail_control/example41", |b| b.iter(|| tail_control(&spec)));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut unit = || Complex2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
    let quintuples: Vec<[Complex2; 5]> = (0..256)
        .map(|_| {
            let mut q = [unit(); 5];
            for i in 1..5 {
                q[i] = std::iter::repeat_with(&mut unit)
                    .find(|&c| pairable(q[i - 1], c).unwrap().is_none())
                    .unwrap();
            }
            q
        })
        .collect();
    group.bench_function("combine5/256", |b| {
        b.iter(|| quintuples.iter().map(|q| combine5(q).unwrap().sum.max_norm()).sum::<f64>())
    });
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_range");
    group.sample_size(10);
    for len in [12usize, 16, 20] {
        let window = random_window(len, 7);
        group.bench_with_input(BenchmarkId::from_parameter(len), &window, |b, w| b.iter(|| exact_range(w).unwrap()));
    }
    group.finish();
}

fn attractor(c: &mut Criterion) {
    let system = synthetic_two_ratio_system(2.0, 3.0, 0.9, 8).unwrap().built.system;
    let mut group = c.benchmark_group("attractor_points");
    group.sample_size(10);
    for depth in [4usize, 6, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| attractor_points(&system, d).unwrap())
        });
    }
    group.finish();
}

fn densities(c: &mut Criterion) {
    let set = IndexSet::arithmetic(7, 3).unwrap();
    c.bench_function("density/arith_1e6", |b| b.iter(|| density(&set, 1_000_000).unwrap()));
}

criterion_group!(benches, selection, oracle, attractor, densities);
criterion_main!(benches);
