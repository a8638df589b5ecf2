use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qbm::par;
use qbm::qsim::NoiseModel;
use qbm::target;
use qbm::train::{self, TrainConfig};

fn train_one(seed: usize, noise: NoiseModel) -> f64 {
    let cfg = TrainConfig {
        global_max_iters: 5,
        seed: seed as u64,
        ..TrainConfig::default()
    };
    let t = target::one_point("1001", 4).unwrap();
    train::bilevel_train(&t, 1, &cfg, noise).unwrap().loss
}

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("training_batch");
    group.sample_size(10);
    let runs = 8;
    for (label, noise) in [("noiseless", NoiseModel::NOISELESS), ("noisy", NoiseModel::new(0.005, 0.02).unwrap())] {
        group.bench_with_input(BenchmarkId::new("parallel", label), &noise, |b, &noise| {
            b.iter(|| par::map_indexed(runs, |i| train_one(i, noise)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", label), &noise, |b, &noise| {
            b.iter(|| par::map_indexed_sequential(runs, |i| train_one(i, noise)))
        });
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
