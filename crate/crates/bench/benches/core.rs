use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use nhfp_bench::{drives, k_grid, short_run};
use nhfp_core::{oracle, propagate, FloquetProblem};

fn floquet_modes(c: &mut Criterion) {
    let mut g = c.benchmark_group("floquet_modes");
    for (name, p) in drives() {
        for n_h in [20, 40] {
            let problem = FloquetProblem::new(&p, n_h).unwrap();
            g.bench_with_input(BenchmarkId::new(name, n_h), &problem, |b, pr| b.iter(|| pr.modes(black_box(0.7)).unwrap()));
        }
    }
    g.finish();
}

fn full_eigensystem(c: &mut Criterion) {
    let p = drives()[0].1;
    let problem = FloquetProblem::new(&p, 20).unwrap();
    c.bench_function("eigensystem_nh20", |b| b.iter(|| problem.eigensystem(black_box(0.7)).unwrap()));
}

fn band_structure(c: &mut Criterion) {
    let p = drives()[0].1;
    let problem = FloquetProblem::new(&p, 20).unwrap();
    let grid = k_grid(32);
    let mut g = c.benchmark_group("band_structure");
    g.sample_size(10);
    g.bench_function("nk32_nh20", |b| b.iter(|| problem.band_structure(black_box(&grid)).unwrap()));
    g.finish();
}

fn monodromy(c: &mut Criterion) {
    let p = drives()[0].1;
    let mut g = c.benchmark_group("monodromy");
    for steps in [1usize << 10, 1 << 14] {
        g.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |b, &s| {
            b.iter(|| oracle::monodromy(&p, black_box(0.7), s).unwrap())
        });
    }
    g.finish();
}

fn rk4_propagation(c: &mut Criterion) {
    let p = drives()[0].1;
    let mut g = c.benchmark_group("propagate_one_cycle");
    g.sample_size(10);
    for n_cells in [61, 201] {
        let (input, opts) = short_run(n_cells);
        g.bench_with_input(BenchmarkId::from_parameter(n_cells), &opts, |b, o| b.iter(|| propagate(&p, input, o).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, floquet_modes, full_eigensystem, band_structure, monodromy, rk4_propagation);
criterion_main!(benches);
