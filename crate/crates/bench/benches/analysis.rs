use clustersim::analysis::CollapsePoint;
use clustersim::{fit_collapse, fit_power_law, locate_critical, FitOptions, SeriesPoint, SweepSeries};
use criterion::{criterion_group, criterion_main, Criterion};

fn family(p: f64, n: usize) -> f64 {
    let x = (p - 0.5) * (n as f64).powf(0.75);
    (n as f64).powf(-0.6) / (1.0 + (x / 2.0).exp())
}

fn sizes() -> [usize; 4] {
    [64, 128, 256, 512]
}

fn fits(c: &mut Criterion) {
    let series: Vec<SeriesPoint> =
        sizes().iter().map(|&n| SeriesPoint { n, value: 0.1 + 2.0 * (n as f64).powf(-1.2), std_error: 1e-3 }).collect();
    let opts = FitOptions::default();
    c.bench_function("fit_power_law", |b| b.iter(|| fit_power_law(&series, &opts).unwrap()));

    let sweep: Vec<SweepSeries> = (0..9)
        .map(|i| {
            let p = 0.42 + 0.02 * i as f64;
            let series = sizes().iter().map(|&n| SeriesPoint { n, value: family(p, n), std_error: 1e-4 }).collect();
            SweepSeries { p, series }
        })
        .collect();
    c.bench_function("locate_critical", |b| b.iter(|| locate_critical(&sweep, &opts).unwrap()));

    let points: Vec<CollapsePoint> = sweep
        .iter()
        .flat_map(|s| s.series.iter().map(move |pt| CollapsePoint { p: s.p, n: pt.n, value: pt.value, std_error: pt.std_error }))
        .collect();
    c.bench_function("fit_collapse", |b| b.iter(|| fit_collapse(&points, 0.5, 0.6, (0.5, 3.0)).unwrap()));
}

criterion_group!(benches, fits);
criterion_main!(benches);
