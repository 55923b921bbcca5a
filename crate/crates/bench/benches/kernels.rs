use attractor_bench::{problem, rhs};
use attractor_core::linalg::{conjugate_gradient, count_below_inertia, lowest_eigenpairs, BandLdlt, CgOptions, LanczosOptions};
use attractor_core::semiflow::{evolve, SemiflowConfig, Stepper};
use attractor_core::tangent::{propagate_tangents, TangentBundle};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

const SIZES: [usize; 2] = [8, 16];

fn linalg(c: &mut Criterion) {
    let mut group = c.benchmark_group("linalg");
    for n in SIZES {
        let p = problem(n);
        let m = p.a.matrix();
        let b = rhs(m.n());
        let mut y = vec![0.0; m.n()];
        group.bench_with_input(BenchmarkId::new("matvec", n), &n, |bch, _| {
            bch.iter(|| m.matvec(black_box(&b), &mut y))
        });
        group.bench_with_input(BenchmarkId::new("cg", n), &n, |bch, _| {
            bch.iter(|| {
                let mut x = vec![0.0; b.len()];
                conjugate_gradient(m, &b, &mut x, CgOptions::default()).unwrap();
                x
            })
        });
        group.bench_with_input(BenchmarkId::new("ldlt_factor", n), &n, |bch, _| {
            bch.iter(|| BandLdlt::factor(m, 0.0, 1e-14).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("inertia_count", n), &n, |bch, _| {
            bch.iter(|| count_below_inertia(m, black_box(60.0)).unwrap())
        });
    }
    group.finish();
}

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigen");
    group.sample_size(10);
    for n in SIZES {
        let p = problem(n);
        let m = p.a.matrix();
        let scale = m.norm_bound();
        group.bench_with_input(BenchmarkId::new("lanczos_k5", n), &n, |bch, _| {
            bch.iter(|| lowest_eigenpairs(m, None, 5, scale, &LanczosOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn flow(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow");
    group.sample_size(10);
    for n in SIZES {
        let p = problem(n);
        let cfg = SemiflowConfig {
            dt: 1e-3,
            t_end: 0.02,
            ..Default::default()
        };
        let stepper = Stepper::new(&p.a, cfg.dt, cfg.solver).unwrap();
        group.bench_with_input(BenchmarkId::new("step", n), &n, |bch, _| {
            bch.iter(|| stepper.step(black_box(&p.u0), &p.spec).unwrap())
        });
        let base = evolve(&p.u0, &cfg, &p.spec, &p.a).unwrap();
        group.bench_with_input(BenchmarkId::new("tangents_d4_20_steps", n), &n, |bch, _| {
            bch.iter(|| {
                let bundle = TangentBundle::random(&p.grid, 4, 7, 5).unwrap();
                propagate_tangents(bundle, &base, &p.spec, &p.a, &cfg).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, linalg, eigen, flow);
criterion_main!(benches);
