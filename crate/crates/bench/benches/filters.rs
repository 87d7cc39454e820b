use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tessfusion::experiments::Preset;
use tessfusion::filter::TkFilter;
use tessfusion::oracles::{MomentTable, RealFilter};
use tessfusion_bench::fixture;

const HORIZON: usize = 50;
const SEED: u64 = 7;

fn filters(c: &mut Criterion) {
    for (preset, case) in [(Preset::Example1T1, 3), (Preset::Example1T2, 8)] {
        let mut group = c.benchmark_group(format!("filter/{preset}"));
        for sensors in [2, 5] {
            let fx = fixture(preset, case, sensors, HORIZON, SEED).unwrap();
            let tk = TkFilter::new(&fx.spec, fx.k).unwrap();
            group.bench_with_input(BenchmarkId::new("reduced", sensors), &fx, |b, fx| {
                b.iter(|| {
                    let mut st = tk.init_filter().unwrap();
                    for y in &fx.reduced {
                        st = tk.filter_step(&st, y).unwrap().0;
                    }
                    black_box(st)
                })
            });
            let real = RealFilter::new(&fx.spec).unwrap();
            group.bench_with_input(BenchmarkId::new("real", sensors), &fx, |b, fx| {
                b.iter(|| black_box(real.run(&fx.real).unwrap()))
            });
        }
        group.finish();
    }
}

fn precomputed_gains(c: &mut Criterion) {
    let fx = fixture(Preset::Example1T1, 3, 5, HORIZON, SEED).unwrap();
    let tk = TkFilter::new(&fx.spec, fx.k).unwrap();
    let schedule = tk.gain_schedule(HORIZON).unwrap();
    c.bench_function("schedule/gains", |b| {
        b.iter(|| black_box(tk.gain_schedule(HORIZON).unwrap()))
    });
    c.bench_function("schedule/apply", |b| {
        b.iter(|| black_box(tk.run_schedule(&schedule, &fx.reduced)))
    });
}

fn moment_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("moment_table");
    group.sample_size(10);
    for horizon in [5, 10] {
        let fx = fixture(Preset::Example1T1, 3, 2, horizon, SEED).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(horizon), &fx, |b, fx| {
            b.iter(|| black_box(MomentTable::new(&fx.spec, horizon).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, filters, precomputed_gains, moment_table);
criterion_main!(benches);
