use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lie_maps::burgers::{analytic_field, build_stencil_map, fdm_step, step_field, BurgersConfig};
use lie_maps::liemap::{build_map, BuildOptions};
use lie_maps::odebench::vdp_system;
use lie_maps::Exec;
use std::hint::black_box;

const PATHS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn map_batch(c: &mut Criterion) {
    let map = build_map(&vdp_system(), 0.01, 7, &BuildOptions::default()).unwrap();
    let states: Vec<Vec<f64>> = (0..10_000)
        .map(|i| {
            let a = i as f64 * 0.001;
            vec![3.0 * a.sin(), 3.0 * (2.0 * a).cos()]
        })
        .collect();
    let mut g = c.benchmark_group("vdp_apply_batch_10k");
    for (name, exec) in PATHS {
        g.bench_function(name, |b| b.iter(|| map.apply_batch(black_box(&states), exec).unwrap()));
    }
    g.finish();
}

fn map_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("vdp_build_map");
    for order in [3usize, 7] {
        for (name, exec) in PATHS {
            let opts = BuildOptions { exec, ..BuildOptions::with_backend(lie_maps::liemap::Backend::rk4()) };
            g.bench_with_input(BenchmarkId::new(name, order), &order, |b, &k| {
                b.iter(|| build_map(&vdp_system(), 0.01, k, &opts).unwrap())
            });
        }
    }
    g.finish();
}

fn burgers_steps(c: &mut Criterion) {
    let nu = 0.07;
    let nx = 1000;
    let start = analytic_field(0.0, nx, nu);
    let fdm = BurgersConfig::new(nu, nx, 2.5e-4, 0.5);
    let map_cfg = BurgersConfig::new(nu, nx, 1.25e-3, 0.5);
    let stencil = build_stencil_map(&map_cfg, &BuildOptions::default()).unwrap();
    let mut next = vec![0.0; nx];

    let mut g = c.benchmark_group("burgers_single_step_1000");
    for (name, exec) in PATHS {
        g.bench_function(BenchmarkId::new("fdm", name), |b| {
            b.iter(|| fdm_step(black_box(&start.u), &mut next, nu, fdm.dt, fdm.dx(), exec))
        });
        g.bench_function(BenchmarkId::new("stencil_map", name), |b| {
            b.iter(|| step_field(&stencil, black_box(&start), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, map_batch, map_build, burgers_steps);
criterion_main!(benches);
