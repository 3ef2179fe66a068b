use std::hint::black_box;

use amb_emcm::analysis::{sweep, SweepAxis, SweepSpec};
use amb_emcm::flux::solve_radial_control;
use amb_emcm::geometry::PoseAxis;
use amb_emcm::{reference_config, Emcm, Excitation, Pose};
use criterion::{criterion_group, criterion_main, Criterion};

fn benches(c: &mut Criterion) {
    let model = Emcm::new(reference_config()).unwrap();
    let pose = Pose::from_boundary(0.1, -0.05, 0.02, 0.01, -0.005);
    let ex = Excitation { i_axial: 1.0, ..Excitation::tilt(-200.0, 100.0) };

    c.bench_function("reluctances", |b| b.iter(|| model.reluctances(black_box(&pose)).unwrap()));
    c.bench_function("solve", |b| b.iter(|| model.solve(black_box(&pose), black_box(&ex)).unwrap()));

    let r = model.reluctances(&pose).unwrap();
    let f = [300.0, -300.0, 100.0, -100.0, 0.0, 50.0, -50.0, 0.0];
    c.bench_function("radial_16x16", |b| b.iter(|| solve_radial_control(black_box(&r), black_box(&f)).unwrap()));

    let spec = SweepSpec::new(SweepAxis::Pose(PoseAxis::X), -0.5, 0.5, 51);
    c.bench_function("sweep_x_51", |b| b.iter(|| sweep(black_box(&spec), &model).unwrap()));
}

criterion_group!(solve_benches, benches);
criterion_main!(solve_benches);
