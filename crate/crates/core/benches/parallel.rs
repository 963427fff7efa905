use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinor_minimal::c64;
use spinor_minimal::moduli::{sphere4_solve, sphere_nonexistence_trials};
use spinor_minimal::par::Exec;
use spinor_minimal::surface::{integrate_surface, GridSpec, WeierstrassData};

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn sphere4_mesh(c: &mut Criterion) {
    let fam = sphere4_solve().unwrap();
    let data = WeierstrassData::with_default_clearance(fam.k_basis[0].section.clone(), fam.k_basis[1].section.clone())
        .unwrap();
    let mut group = c.benchmark_group("sphere4_mesh_24");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| integrate_surface(&data, GridSpec::square(1.5, 24), c64(0.71, -0.93), exec).unwrap())
        });
    }
    group.finish();
}

fn nonexistence(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonexistence_n5_40");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sphere_nonexistence_trials(5, 40, 1, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sphere4_mesh, nonexistence);
criterion_main!(benches);
