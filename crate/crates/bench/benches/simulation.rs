use chrono::Duration;
use criterion::{criterion_group, criterion_main, Criterion};
use daylite_bench::{clear_days, midwinter_noon, reference_building};
use daylite_core::daylight::simulate_period;
use daylite_core::{PeriodOptions, Simulator};

fn precompute(c: &mut Criterion) {
    c.bench_function("daylight factor grid", |b| {
        b.iter(|| Simulator::new(reference_building()).unwrap())
    });
}

fn timestep(c: &mut Criterion) {
    let sim = Simulator::new(reference_building()).unwrap();
    let rec = clear_days(midwinter_noon(), 1)[0];
    c.bench_function("sunny timestep", |b| b.iter(|| sim.simulate_timestep(&rec).unwrap()));
}

fn one_day(c: &mut Criterion) {
    let sim = Simulator::new(reference_building()).unwrap();
    let start = midwinter_noon() - Duration::hours(12);
    let weather = clear_days(start, 1440);
    let opts = PeriodOptions::new(start, weather[1439].timestamp, 1);
    let mut group = c.benchmark_group("period");
    group.sample_size(10);
    group.bench_function("one day at 1 min", |b| {
        b.iter(|| simulate_period(&sim, &weather, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, precompute, timestep, one_day);
criterion_main!(benches);
