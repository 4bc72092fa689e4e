use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holodyn::cxcore::c;
use holodyn::dynamics::{dichotomy_classify, DEFAULT_BOUND};
use holodyn::lattices::Lattice;
use holodyn::measures::{gibbs_u_estimate, FiberDensity, CUTOFF};
use holodyn::zoo::build;
use holodyn::Execution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn gibbs(cr: &mut Criterion) {
    let sys = build("cat2c").unwrap();
    let x = sys.sample_point(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut g = cr.benchmark_group("gibbs_u_estimate");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "100x2048"), |b| {
            b.iter(|| gibbs_u_estimate(&sys, &x, 0.5, 100, 2048, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn heat(cr: &mut Criterion) {
    let lattice = Lattice::planar(c(1.0, 0.0), c(0.5, 3f64.sqrt() / 2.0)).unwrap();
    let d = FiberDensity::single_mode(&lattice, CUTOFF, (1, 0), 0.5).unwrap();
    let mut g = cr.benchmark_group("heat_step");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, CUTOFF), |b| b.iter(|| d.heat_step_with(black_box(0.01), exec).unwrap()));
    }
    g.finish();
}

fn dichotomy(cr: &mut Criterion) {
    let sys = build("mobius_modulated").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples: Vec<_> = (0..16).map(|_| sys.sample_point(&mut rng).unwrap()).collect();
    let mut g = cr.benchmark_group("dichotomy_classify");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 16), |b| {
            b.iter(|| dichotomy_classify(&sys, &samples, 40, DEFAULT_BOUND, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, gibbs, heat, dichotomy);
criterion_main!(benches);
