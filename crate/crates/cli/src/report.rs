//! Finite-size analysis of a results table.

use std::collections::BTreeMap;

use clustersim::analysis::{CollapsePoint, Extrapolated};
use clustersim::{
    classify_phase, fit_collapse, fit_power_law, locate_critical, CollapseResult, CriticalPoint, EngineKind,
    FitOptions, FitResult, GateFamily, ObservableId, PhaseLabel, SeriesPoint, SweepSeries,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::table::Table;

/// Fewest distinct sizes a power-law fit accepts.
pub const MIN_SIZES: usize = 3;

/// Rows sharing everything but the seed, pooled by circuit count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pooled {
    pub mean_abs: f64,
    pub std_error: f64,
    pub n_circuits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Family {
    pub alpha: usize,
    #[serde(serialize_with = "ser_bits")]
    pub p_u: u64,
    pub engine: EngineKind,
    pub gate_family: GateFamily,
}

fn ser_bits<S: serde::Serializer>(bits: &u64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(f64::from_bits(*bits))
}

impl Family {
    pub fn p_u(&self) -> f64 {
        f64::from_bits(self.p_u)
    }
}

/// family → observable → p_s bits → N → pooled value.
type Grouped = BTreeMap<Family, BTreeMap<ObservableId, BTreeMap<u64, BTreeMap<usize, Pooled>>>>;

pub fn group(table: &Table) -> Grouped {
    let mut sums: BTreeMap<(Family, ObservableId, u64, usize), Vec<(f64, f64, usize)>> = BTreeMap::new();
    for r in table.rows() {
        // Non-negative grid values sort correctly by their bit patterns.
        let fam = Family { alpha: r.alpha, p_u: r.p_u.to_bits(), engine: r.engine, gate_family: r.gate_family };
        sums.entry((fam, r.observable, r.p_s.to_bits(), r.n)).or_default().push((
            r.mean_abs,
            r.std_error,
            r.n_circuits,
        ));
    }
    let mut out: Grouped = BTreeMap::new();
    for ((fam, obs, p, n), parts) in sums {
        let total: usize = parts.iter().map(|x| x.2).sum();
        let w = |k: usize| k as f64 / total.max(1) as f64;
        let mean_abs = parts.iter().map(|&(m, _, k)| w(k) * m).sum();
        let std_error = parts.iter().map(|&(_, s, k)| (w(k) * s).powi(2)).sum::<f64>().sqrt();
        out.entry(fam)
            .or_default()
            .entry(obs)
            .or_default()
            .entry(p)
            .or_default()
            .insert(n, Pooled { mean_abs, std_error, n_circuits: total });
    }
    out
}

fn series(by_n: &BTreeMap<usize, Pooled>) -> Vec<SeriesPoint> {
    by_n.iter().map(|(&n, v)| SeriesPoint { n, value: v.mean_abs, std_error: v.std_error }).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PointFit {
    pub p_s: f64,
    pub sizes: Vec<usize>,
    pub fit: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtrapolationGroup {
    #[serde(flatten)]
    pub family: Family,
    pub observable: ObservableId,
    pub points: Vec<PointFit>,
    pub critical: Option<CriticalPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_error: Option<String>,
}

fn usable_sizes(by_n: &BTreeMap<usize, Pooled>, opts: &FitOptions) -> Vec<usize> {
    by_n.keys().copied().filter(|&n| n >= opts.n_min).collect()
}

fn check_sizes(grouped: &Grouped, opts: &FitOptions) -> CliResult<()> {
    let most = grouped
        .values()
        .flat_map(|o| o.values())
        .flat_map(|p| p.values())
        .map(|by_n| usable_sizes(by_n, opts))
        .max_by_key(|s| s.len())
        .unwrap_or_default();
    if most.len() < MIN_SIZES {
        return Err(CliError::Config(format!(
            "extrapolation needs at least {MIN_SIZES} system sizes with N >= {}, found {} ({:?})",
            opts.n_min,
            most.len(),
            most
        )));
    }
    Ok(())
}

pub fn extrapolate(table: &Table, opts: &FitOptions) -> CliResult<Vec<ExtrapolationGroup>> {
    let grouped = group(table);
    check_sizes(&grouped, opts)?;
    let mut out = Vec::new();
    for (family, by_obs) in &grouped {
        for (&observable, by_p) in by_obs {
            let mut points = Vec::new();
            let mut sweep = Vec::new();
            for (&p_bits, by_n) in by_p {
                let p_s = f64::from_bits(p_bits);
                let s = series(by_n);
                let (fit, error) = match fit_power_law(&s, opts) {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                if fit.is_some() {
                    sweep.push(SweepSeries { p: p_s, series: s });
                }
                points.push(PointFit { p_s, sizes: usable_sizes(by_n, opts), fit, error });
            }
            let (critical, critical_error) = match locate_critical(&sweep, opts) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.push(ExtrapolationGroup { family: *family, observable, points, critical, critical_error });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhasePoint {
    #[serde(flatten)]
    pub family: Family,
    pub p_s: f64,
    pub label: PhaseLabel,
    pub s_spt: Option<Extrapolated>,
    pub s_triv: Option<Extrapolated>,
    pub c_m: Option<Extrapolated>,
}

pub fn phase_diagram(table: &Table, opts: &FitOptions) -> CliResult<Vec<PhasePoint>> {
    let grouped = group(table);
    let missing: Vec<&str> = [ObservableId::SSpt, ObservableId::STriv]
        .into_iter()
        .filter(|id| !grouped.values().any(|o| o.contains_key(id)))
        .map(|id| id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Config(format!("phase diagram needs observables missing from the table: {}", missing.join(", "))));
    }
    check_sizes(&grouped, opts)?;
    let mut out = Vec::new();
    for (family, by_obs) in &grouped {
        let extrap = |id: ObservableId, p: u64| {
            let by_n = by_obs.get(&id)?.get(&p)?;
            fit_power_law(&series(by_n), opts).ok().map(|f| Extrapolated::from_fit(&f))
        };
        let ps: Vec<u64> = by_obs.values().flat_map(|m| m.keys().copied()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        for p in ps {
            let s_spt = extrap(ObservableId::SSpt, p);
            let s_triv = extrap(ObservableId::STriv, p);
            let c_m = if family.alpha % 2 == 1 { extrap(ObservableId::CM, p) } else { None };
            let label = match (s_spt, s_triv) {
                (Some(a), Some(b)) => classify_phase(a, b, c_m),
                _ => PhaseLabel::Undetermined,
            };
            out.push(PhasePoint { family: *family, p_s: f64::from_bits(p), label, s_spt, s_triv, c_m });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseRequest {
    pub observable: ObservableId,
    pub alpha: Option<usize>,
    pub p_u: Option<f64>,
    pub p_c: Option<f64>,
    pub eta: Option<f64>,
    pub nu_range: (f64, f64),
    pub window: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseReport {
    #[serde(flatten)]
    pub family: Family,
    pub observable: ObservableId,
    pub p_c_source: &'static str,
    pub points_used: usize,
    pub collapse: CollapseResult,
}

pub fn collapse(table: &Table, req: &CollapseRequest, opts: &FitOptions) -> CliResult<Vec<CollapseReport>> {
    let grouped = group(table);
    let mut out = Vec::new();
    for (family, by_obs) in &grouped {
        if req.alpha.is_some_and(|a| a != family.alpha) || req.p_u.is_some_and(|p| p != family.p_u()) {
            continue;
        }
        let Some(by_p) = by_obs.get(&req.observable) else { continue };
        let (p_c, eta, source) = match (req.p_c, req.eta) {
            (Some(p), Some(e)) => (p, e, "given"),
            _ => {
                let sweep: Vec<SweepSeries> = by_p
                    .iter()
                    .map(|(&p, by_n)| SweepSeries { p: f64::from_bits(p), series: series(by_n) })
                    .collect();
                let c = locate_critical(&sweep, opts)?;
                (req.p_c.unwrap_or(c.p_c), req.eta.unwrap_or(c.eta), "located")
            }
        };
        let points: Vec<CollapsePoint> = by_p
            .iter()
            .map(|(&p, by_n)| (f64::from_bits(p), by_n))
            .filter(|(p, _)| req.window.is_none_or(|w| (p - p_c).abs() <= w))
            .flat_map(|(p, by_n)| {
                by_n.iter().filter(|(&n, _)| n >= opts.n_min).map(move |(&n, v)| CollapsePoint {
                    p,
                    n,
                    value: v.mean_abs,
                    std_error: v.std_error,
                })
            })
            .collect();
        let collapse = fit_collapse(&points, p_c, eta, req.nu_range)?;
        out.push(CollapseReport {
            family: *family,
            observable: req.observable,
            p_c_source: source,
            points_used: points.len(),
            collapse,
        });
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("no rows for observable {} match the selection", req.observable)));
    }
    Ok(out)
}
