//! Finite-size extrapolation, critical-point location, scaling collapse and
//! phase labels.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One system size of an order-parameter series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: usize,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Sizes below this are ignored.
    pub n_min: usize,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { n_min: 64, eta_min: 0.1, eta_max: 4.0 }
    }
}

/// Weighted fit of `c N^(−η) + b`, plus the fit with `b ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub eta: f64,
    pub c: f64,
    pub b: f64,
    /// Standard error of `b` propagated from the input errors.
    pub b_err: f64,
    pub residual: f64,
    pub constrained_b0_residual: f64,
    pub eta_b0: f64,
    pub c_b0: f64,
    /// The optimal `η` sits on the search interval's edge.
    pub eta_at_bound: bool,
    pub n_points: usize,
}

struct Prepared {
    n: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

fn prepare(series: &[SeriesPoint], opts: &FitOptions) -> Result<Prepared> {
    let pts: Vec<&SeriesPoint> = series.iter().filter(|p| p.n >= opts.n_min).collect();
    let mut sizes: Vec<usize> = pts.iter().map(|p| p.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::Analysis(format!("power-law fit needs 3 distinct sizes ≥ {}, got {}", opts.n_min, sizes.len())));
    }
    if pts.iter().any(|p| !p.value.is_finite() || !p.std_error.is_finite() || p.std_error < 0.0) {
        return Err(Error::Analysis("non-finite or negative entries in series".into()));
    }
    let floor = pts.iter().map(|p| p.std_error).filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    let w = pts
        .iter()
        .map(|p| if floor.is_finite() { 1.0 / p.std_error.max(floor).powi(2) } else { 1.0 })
        .collect();
    Ok(Prepared { n: pts.iter().map(|p| p.n as f64).collect(), y: pts.iter().map(|p| p.value).collect(), w })
}

/// Closed-form weighted fit of `y = c x + b` (or `c x` when `free_b` is off).
fn linear_fit(x: &[f64], y: &[f64], w: &[f64], free_b: bool) -> (f64, f64, f64) {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        sxy += w[i] * x[i] * y[i];
    }
    let (c, b) = if free_b {
        let det = sw * sxx - sx * sx;
        if det.abs() <= 1e-300 {
            (0.0, sy / sw)
        } else {
            ((sw * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det)
        }
    } else if sxx > 0.0 {
        (sxy / sxx, 0.0)
    } else {
        (0.0, 0.0)
    };
    let res = (0..x.len()).map(|i| w[i] * (y[i] - c * x[i] - b).powi(2)).sum();
    (c, b, res)
}

/// Minimizes `f` over `[lo, hi]`: coarse scan, then golden-section refinement
/// around the best grid cell.
fn minimize_1d(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const GRID: usize = 64;
    let step = (hi - lo) / GRID as f64;
    let (mut best_t, mut best_v) = (lo, f(lo));
    for i in 1..=GRID {
        let t = lo + step * i as f64;
        let v = f(t);
        if v < best_v {
            best_t = t;
            best_v = v;
        }
    }
    let (mut a, mut b) = ((best_t - step).max(lo), (best_t + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    let (t, v) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if v <= best_v {
        (t, v)
    } else {
        (best_t, best_v)
    }
}

fn fit_prepared(p: &Prepared, opts: &FitOptions, free_b: bool) -> (f64, f64, f64, f64) {
    let (lo, hi) = (opts.eta_min.ln(), opts.eta_max.ln());
    let xs = |eta: f64| -> Vec<f64> { p.n.iter().map(|n| n.powf(-eta)).collect() };
    let (t, _) = minimize_1d(lo, hi, |t| linear_fit(&xs(t.exp()), &p.y, &p.w, free_b).2);
    let eta = t.exp();
    let (c, b, res) = linear_fit(&xs(eta), &p.y, &p.w, free_b);
    (eta, c, b, res)
}

/// Fits `c N^(−η) + b` by weighted least squares, with `η` found by a
/// log-scale search over `[eta_min, eta_max]` and `(c, b)` in closed form.
pub fn fit_power_law(series: &[SeriesPoint], opts: &FitOptions) -> Result<FitResult> {
    if !(opts.eta_min > 0.0 && opts.eta_max > opts.eta_min) {
        return Err(Error::Analysis(format!("bad η interval [{}, {}]", opts.eta_min, opts.eta_max)));
    }
    let prep = prepare(series, opts)?;
    let (eta, c, b, residual) = fit_prepared(&prep, opts, true);
    let (eta_b0, c_b0, _, constrained_b0_residual) = fit_prepared(&prep, opts, false);

    // Propagate input errors to b by finite differences.
    let sigma: Vec<f64> = prep.w.iter().map(|w| 1.0 / w.sqrt()).collect();
    let have_errors = series.iter().any(|p| p.std_error > 0.0);
    let mut var = 0.0;
    if have_errors {
        for i in 0..prep.y.len() {
            let h = sigma[i];
            let mut up = Prepared { n: prep.n.clone(), y: prep.y.clone(), w: prep.w.clone() };
            up.y[i] += h;
            let b_up = fit_prepared(&up, opts, true).2;
            up.y[i] -= 2.0 * h;
            let b_dn = fit_prepared(&up, opts, true).2;
            var += ((b_up - b_dn) / 2.0).powi(2);
        }
    }
    let edge = |e: f64| (e.ln() - opts.eta_min.ln()).abs() < 1e-6 || (e.ln() - opts.eta_max.ln()).abs() < 1e-6;
    Ok(FitResult {
        eta,
        c,
        b,
        b_err: var.sqrt(),
        residual,
        constrained_b0_residual,
        eta_b0,
        c_b0,
        eta_at_bound: edge(eta),
        n_points: prep.y.len(),
    })
}

/// Order-parameter series at one grid value of the tuning parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub p: f64,
    pub series: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePoint {
    pub p: f64,
    /// Coefficient of `(ln N)²` in a weighted quadratic fit of `ln y`.
    /// Positive when the series levels off, negative when it decays faster
    /// than any power, zero for a pure power law.
    pub kappa: f64,
    pub kappa_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub p_c: f64,
    pub uncertainty: f64,
    /// `η` of the `b ≡ 0` fit at `p_c`; NaN when bracketed.
    pub eta: f64,
    /// No grid point is critical; `p_c` is the midpoint between the last
    /// ordered point and its decaying neighbour.
    pub bracketed: bool,
    /// Whether the ordered side (`b > 0`) is at small `p`.
    pub ordered_below: bool,
    /// Relative misfit of the `b ≡ 0` fit per grid point; `None` for points
    /// that are not candidates.
    pub scores: Vec<Option<f64>>,
    pub curvature: Vec<CurvaturePoint>,
    pub fits: Vec<Option<FitResult>>,
}

/// Log-log curvature of one series.
pub fn loglog_curvature(series: &[SeriesPoint], opts: &FitOptions) -> Result<CurvaturePoint> {
    let prep = prepare(series, opts)?;
    if prep.y.iter().any(|&y| y <= 0.0) {
        // Decayed to exactly zero within resolution: maximally disordered.
        return Ok(CurvaturePoint { p: f64::NAN, kappa: f64::NEG_INFINITY, kappa_err: 0.0 });
    }
    let u: Vec<f64> = prep.n.iter().map(|n| n.ln()).collect();
    let u0 = u.iter().sum::<f64>() / u.len() as f64;
    let have_errors = series.iter().any(|p| p.std_error > 0.0);
    let mut xtwx = Matrix3::<f64>::zeros();
    let mut xtwy = Vector3::<f64>::zeros();
    for i in 0..u.len() {
        let d = u[i] - u0;
        let row = Vector3::new(1.0, d, d * d);
        // Error of ln y is σ / y.
        let w = if have_errors { prep.w[i] * prep.y[i] * prep.y[i] } else { 1.0 };
        xtwx += w * row * row.transpose();
        xtwy += w * row * prep.y[i].ln();
    }
    let inv = xtwx.try_inverse().ok_or_else(|| Error::Analysis("singular curvature fit".into()))?;
    let beta = inv * xtwy;
    let kappa_err = if have_errors { inv[(2, 2)].max(0.0).sqrt() } else { 0.0 };
    Ok(CurvaturePoint { p: f64::NAN, kappa: beta[2], kappa_err })
}

/// Largest size's value is resolved from zero at 2σ.
fn resolved(series: &[SeriesPoint], opts: &FitOptions) -> bool {
    let used = || series.iter().filter(|p| p.n >= opts.n_min);
    let largest = used().max_by_key(|p| p.n);
    used().all(|p| p.value > 0.0) && largest.is_some_and(|p| p.value > 2.0 * p.std_error)
}

/// The two largest sizes show no decay at 2σ.
fn not_decaying(series: &[SeriesPoint], opts: &FitOptions) -> bool {
    let mut used: Vec<&SeriesPoint> = series.iter().filter(|p| p.n >= opts.n_min).collect();
    used.sort_by_key(|p| p.n);
    match used[..] {
        [.., a, b] => {
            let sigma = a.std_error.hypot(b.std_error);
            b.value >= a.value - 2.0 * sigma && resolved(series, opts)
        }
        _ => false,
    }
}

fn weighted_norm(series: &[SeriesPoint], opts: &FitOptions) -> f64 {
    prepare(series, opts).map(|p| p.w.iter().zip(&p.y).map(|(w, y)| w * y * y).sum()).unwrap_or(0.0)
}

/// Locates the transition as the grid point where the order parameter is
/// best described by a pure power law `c N^(−η)`.
///
/// Candidates are grid points whose largest-size value is resolved from zero,
/// whose free fit has `b` compatible with zero at 2σ, that decay between the
/// two largest sizes, and whose `b ≡ 0` fit has `η` strictly inside the
/// search interval. Among them the one with the smallest relative misfit
/// `res₀ / Σ w y²` wins. Uncertainty is half the grid spacing, or a full
/// spacing when a neighbouring candidate scores within a factor of two.
///
/// Without candidates, an ordered point next to a decaying one brackets the
/// transition: `p_c` is their midpoint and `η` is undefined.
pub fn locate_critical(sweep: &[SweepSeries], opts: &FitOptions) -> Result<CriticalPoint> {
    let mut sweep: Vec<&SweepSeries> = sweep.iter().collect();
    sweep.sort_by(|a, b| a.p.total_cmp(&b.p));
    if sweep.len() < 2 {
        return Err(Error::Analysis("need at least two grid points".into()));
    }
    let mut curvature = Vec::with_capacity(sweep.len());
    for s in &sweep {
        let mut k = loglog_curvature(&s.series, opts)?;
        k.p = s.p;
        curvature.push(k);
    }
    let fits: Vec<Option<FitResult>> = sweep.iter().map(|s| fit_power_law(&s.series, opts).ok()).collect();
    let scale = |s: &SweepSeries| s.series.iter().map(|p| p.value.abs()).fold(0.0, f64::max);
    let ordered: Vec<bool> = sweep
        .iter()
        .zip(&fits)
        .map(|(s, f)| f.is_some_and(|f| f.b > 2.0 * f.b_err + 1e-6 * scale(s)) || not_decaying(&s.series, opts))
        .collect();
    if !ordered.iter().any(|&o| o) {
        return Err(Error::Analysis("no grid point extrapolates to a nonzero value".into()));
    }
    let scores: Vec<Option<f64>> = sweep
        .iter()
        .zip(&fits)
        .zip(&ordered)
        .map(|((s, f), &ord)| {
            let f = f.as_ref()?;
            let inside = f.eta_b0 > opts.eta_min * (1.0 + 1e-6) && f.eta_b0 < opts.eta_max * (1.0 - 1e-6);
            if ord || !inside || !resolved(&s.series, opts) {
                return None;
            }
            let norm = weighted_norm(&s.series, opts);
            (norm > 0.0).then(|| f.constrained_b0_residual / norm)
        })
        .collect();
    let m = sweep.len();
    let lower = (0..m / 2).filter(|&j| ordered[j]).count() as f64 / (m / 2).max(1) as f64;
    let upper = (m - m / 2..m).filter(|&j| ordered[j]).count() as f64 / (m / 2).max(1) as f64;
    let ordered_below = lower >= upper;
    let best = scores.iter().enumerate().filter_map(|(i, s)| s.map(|v| (i, v))).min_by(|a, b| a.1.total_cmp(&b.1));
    let Some((i, best)) = best else {
        // Ordered next to a resolved-zero neighbour: bracket the transition.
        let edge = (0..m - 1).find(|&j| {
            let (o, d) = if ordered_below { (j, j + 1) } else { (j + 1, j) };
            ordered[o] && !ordered[d] && fits[d].is_some()
        });
        let j = edge.ok_or_else(|| Error::Analysis("no sign of a transition in the sweep range".into()))?;
        let (a, b) = (sweep[j].p, sweep[j + 1].p);
        return Ok(CriticalPoint {
            p_c: 0.5 * (a + b),
            uncertainty: 0.5 * (b - a),
            eta: f64::NAN,
            bracketed: true,
            ordered_below,
            scores,
            curvature,
            fits,
        });
    };
    let spacing = |j: usize, k: usize| (sweep[j].p - sweep[k].p).abs();
    let mut uncertainty: f64 = 0.0;
    for j in [i.wrapping_sub(1), i + 1] {
        if j < m {
            let flat = scores[j].is_some_and(|v| v <= 2.0 * best);
            let d = spacing(i, j);
            uncertainty = uncertainty.max(if flat { d } else { d / 2.0 });
        }
    }
    let eta = fits[i].map_or(f64::NAN, |f| f.eta_b0);
    Ok(CriticalPoint { p_c: sweep[i].p, uncertainty, eta, bracketed: false, ordered_below, scores, curvature, fits })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub p: f64,
    pub n: usize,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub nu: f64,
    pub p_c: f64,
    pub eta: f64,
    /// Mean squared (error-normalized) deviation from the other sizes'
    /// interpolants at the optimum.
    pub quality: f64,
    /// Half-width of the range where the objective stays below twice its
    /// minimum.
    pub nu_err: f64,
    pub overlaps: usize,
}

const MIN_OVERLAPS: usize = 3;

/// Quality of the collapse `((p − p_c) N^(1/ν), y N^η)`; `None` when too few
/// points land inside another size's range.
pub fn collapse_objective(points: &[CollapsePoint], p_c: f64, eta: f64, nu: f64) -> Option<(f64, usize)> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let have_errors = points.iter().any(|p| p.std_error > 0.0);
    let scaled: Vec<Vec<(f64, f64, f64)>> = sizes
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let mut v: Vec<(f64, f64, f64)> = points
                .iter()
                .filter(|p| p.n == n)
                .map(|p| ((p.p - p_c) * nf.powf(1.0 / nu), p.value * nf.powf(eta), p.std_error * nf.powf(eta)))
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        })
        .collect();
    let (mut total, mut count) = (0.0, 0usize);
    for (a, own) in scaled.iter().enumerate() {
        for &(x, y, dy) in own {
            for (b, other) in scaled.iter().enumerate() {
                if a == b || other.len() < 2 {
                    continue;
                }
                let Some(k) = other.windows(2).position(|w| w[0].0 <= x && x <= w[1].0) else {
                    continue;
                };
                let (l, r) = (other[k], other[k + 1]);
                let t = if r.0 > l.0 { (x - l.0) / (r.0 - l.0) } else { 0.5 };
                let yi = l.1 + t * (r.1 - l.1);
                let var = if have_errors {
                    dy * dy + ((1.0 - t) * l.2).powi(2) + (t * r.2).powi(2)
                } else {
                    1.0
                };
                if var > 0.0 {
                    total += (y - yi).powi(2) / var;
                    count += 1;
                }
            }
        }
    }
    (count >= MIN_OVERLAPS).then(|| (total / count as f64, count))
}

/// Best collapse exponent `ν` in `nu_range` for fixed `p_c` and `η`.
pub fn fit_collapse(points: &[CollapsePoint], p_c: f64, eta: f64, nu_range: (f64, f64)) -> Result<CollapseResult> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::Analysis(format!("collapse needs 3 system sizes, got {}", sizes.len())));
    }
    let (lo, hi) = nu_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Analysis(format!("bad ν interval [{lo}, {hi}]")));
    }
    let obj = |nu: f64| collapse_objective(points, p_c, eta, nu).map_or(f64::INFINITY, |(q, _)| q);
    let (nu, quality) = minimize_1d(lo, hi, obj);
    let Some((_, overlaps)) = collapse_objective(points, p_c, eta, nu) else {
        return Err(Error::Analysis("rescaled size ranges do not overlap".into()));
    };
    let scan: Vec<(f64, f64)> = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).map(|v| (v, obj(v))).collect();
    let cut = 2.0 * quality.max(1e-300);
    let inside: Vec<f64> = scan.iter().filter(|(_, q)| *q <= cut).map(|(v, _)| *v).collect();
    let nu_err = match (inside.first(), inside.last()) {
        (Some(a), Some(b)) => ((b - a) / 2.0).max((nu - a).abs().max((b - nu).abs()) / 2.0),
        _ => 0.0,
    };
    Ok(CollapseResult { nu, p_c, eta, quality, nu_err, overlaps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseLabel {
    #[serde(rename = "SPT")]
    Spt,
    #[serde(rename = "trivial")]
    Trivial,
    #[serde(rename = "volume")]
    Volume,
    #[serde(rename = "SPT+SSB")]
    SptSsb,
    #[serde(rename = "undetermined")]
    Undetermined,
}

/// Thermodynamic-limit value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub value: f64,
    pub err: f64,
}

impl Extrapolated {
    pub fn new(value: f64, err: f64) -> Self {
        Self { value, err }
    }

    /// Significantly positive at 2σ.
    pub fn is_positive(&self) -> bool {
        self.value > 2.0 * self.err
    }

    /// Compatible with zero at 2σ (significantly negative values count too;
    /// offsets below zero are a fit artifact of fast decay).
    pub fn is_zero(&self) -> bool {
        !self.is_positive()
    }

    pub fn from_fit(fit: &FitResult) -> Self {
        Self { value: fit.b, err: fit.b_err }
    }
}

/// Phase from extrapolated string values, and for odd `α` the SSB
/// correlator.
pub fn classify_phase(spt: Extrapolated, triv: Extrapolated, cm: Option<Extrapolated>) -> PhaseLabel {
    let finite = |e: &Extrapolated| e.value.is_finite() && e.err.is_finite() && e.err >= 0.0;
    if !finite(&spt) || !finite(&triv) || cm.as_ref().is_some_and(|c| !finite(c)) {
        return PhaseLabel::Undetermined;
    }
    match (spt.is_positive(), triv.is_positive()) {
        (true, false) if cm.is_some_and(|c| c.is_positive()) => PhaseLabel::SptSsb,
        (true, false) => PhaseLabel::Spt,
        (false, true) => PhaseLabel::Trivial,
        (false, false) => PhaseLabel::Volume,
        (true, true) => PhaseLabel::Undetermined,
    }
}
