use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use flatness_core::poly_matrix::smith_decompose;
use flatness_core::sysdsl::fixtures;
use flatness_core::{flatness_pipeline, parse_system, OreMatrix, SmithOptions};

fn pipeline(c: &mut Criterion) {
    for (name, text) in [("car", fixtures::CAR), ("car_seeded", fixtures::CAR_SEEDED), ("pendulum", fixtures::PENDULUM)] {
        let src = parse_system(text).unwrap();
        let sys = src.to_implicit().unwrap();
        let cfg = src.pipeline_config();
        c.bench_function(&format!("pipeline/{name}"), |b| b.iter(|| flatness_pipeline(black_box(&sys), &cfg).unwrap()));
    }
}

fn smith(c: &mut Criterion) {
    let car = OreMatrix::parse("sin(theta)*D; -cos(theta)*D; dot(x)*cos(theta) + dot(y)*sin(theta)").unwrap();
    let torsion = OreMatrix::parse(fixtures::TORSION_MAT).unwrap();
    let opts = SmithOptions::default();
    c.bench_function("smith/car", |b| b.iter(|| smith_decompose(black_box(&car), &opts).unwrap()));
    c.bench_function("smith/torsion", |b| b.iter(|| smith_decompose(black_box(&torsion), &opts).unwrap()));
}

criterion_group!(benches, pipeline, smith);
criterion_main!(benches);
