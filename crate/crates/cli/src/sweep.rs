//! Runs every point of a sweep config and writes the results table.

use std::path::Path;
use std::time::Instant;

use clustersim::run_ensemble;

use crate::config::{SweepConfig, SweepPoint};
use crate::error::{CliError, CliResult};
use crate::table::{Row, RowKey, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepSummary {
    pub points: usize,
    pub computed: usize,
    pub skipped: usize,
}

fn point_keys(p: &SweepPoint) -> impl Iterator<Item = RowKey> + '_ {
    p.observables.iter().map(move |&observable| RowKey {
        alpha: p.spec.alpha,
        n: p.spec.n,
        p_s: p.spec.p_s,
        p_u: p.spec.p_u,
        engine: p.engine,
        observable,
        master_seed: p.spec.master_seed,
    })
}

/// Computes one point's rows.
pub fn run_point(point: &SweepPoint) -> CliResult<Vec<Row>> {
    let result = run_ensemble(&point.spec, point.engine, &point.observables)?;
    Ok(result.estimates()?.iter().map(|e| Row::from_estimate(&point.spec, point.engine, e)).collect())
}

/// Runs the sweep, skipping points whose rows already exist in `output`
/// and rewriting the table after each finished point.
pub fn run_sweep(cfg: &SweepConfig, output: &Path, quiet: bool) -> CliResult<SweepSummary> {
    let points = cfg.points()?;
    let mut table = Table::read_or_empty(output)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let mut summary = SweepSummary { points: points.len(), ..Default::default() };
    let start = Instant::now();
    for (i, point) in points.iter().enumerate() {
        if point_keys(point).all(|k| table.contains(&k)) {
            summary.skipped += 1;
            continue;
        }
        let t0 = Instant::now();
        let rows = pool.install(|| run_point(point))?;
        for row in rows {
            table.insert(row)?;
        }
        table.write(output)?;
        summary.computed += 1;
        if !quiet {
            eprintln!(
                "[{}/{}] alpha={} N={} p_s={} p_u={} done in {:.1}s (elapsed {:.1}s)",
                i + 1,
                points.len(),
                point.spec.alpha,
                point.spec.n,
                point.spec.p_s,
                point.spec.p_u,
                t0.elapsed().as_secs_f64(),
                start.elapsed().as_secs_f64()
            );
        }
    }
    if !output.exists() {
        table.write(output)?;
    }
    Ok(summary)
}
