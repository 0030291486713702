//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Sweeps are cached as CSV tables under `ACCEPTANCE_CACHE` (default: the
//! test target's tmp dir), keyed by a hash of everything but the grid, so an
//! interrupted run resumes and a widened grid only computes the new points.
//! `ACCEPTANCE_ONLY=1,4` restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clustersim::analysis::Extrapolated;
use clustersim::circuit::run_trajectory;
use clustersim::duality::{run_duality_suite, DualitySuiteConfig};
use clustersim::observables::{multiplet_structure, SCHMIDT_TOL, SCHMIDT_TOP};
use clustersim::{
    check_trajectory, cross_check, fit_power_law, CircuitSpec, DenseEngine, Engine, FitOptions, GateFamily,
    ObservableId, SeriesPoint, XcheckConfig,
};
use clustersim_cli::report::{collapse, extrapolate, CollapseRequest, ExtrapolationGroup};
use clustersim_cli::sweep::run_sweep;
use clustersim_cli::{SweepConfig, Table};
use serde_json::{json, Value};

struct Verdict {
    passed: bool,
    summary: String,
}

type Outcome = Result<Verdict, String>;

fn verdict(passed: bool, summary: impl Into<String>) -> Outcome {
    Ok(Verdict { passed, summary: summary.into() })
}

fn cache_dir() -> PathBuf {
    std::env::var_os("ACCEPTANCE_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance"))
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let k = ((to - from) / step).round() as usize;
    (0..=k).map(|i| ((from + step * i as f64) * 1000.0).round() / 1000.0).collect()
}

/// Runs (or resumes) a sweep over `sizes × p_s` and returns its table.
fn sweep(name: &str, mut base: Value, sizes: &[usize], p_s: &[f64]) -> Result<Table, String> {
    let mut h = DefaultHasher::new();
    base.to_string().hash(&mut h);
    let path = cache_dir().join(format!("{name}-{:016x}.csv", h.finish()));
    std::fs::create_dir_all(cache_dir()).map_err(|e| e.to_string())?;
    base["n_qubits"] = json!(sizes[0]);
    base["p_s"] = json!(p_s[0]);
    base["sweep"] = json!([
        {"axis": "p_s", "values": p_s},
        {"axis": "n_qubits", "values": sizes},
    ]);
    let cfg = SweepConfig::from_json(&base.to_string(), &[]).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let s = run_sweep(&cfg, &path, false).map_err(|e| e.to_string())?;
    println!(
        "  {name}: {} points ({} computed) in {:.0}s, table {}",
        s.points,
        s.computed,
        t.elapsed().as_secs_f64(),
        path.display()
    );
    Table::read(&path).map_err(|e| e.to_string())
}

fn find(groups: &[ExtrapolationGroup], obs: ObservableId) -> Result<&ExtrapolationGroup, String> {
    groups.iter().find(|g| g.observable == obs).ok_or_else(|| format!("no {obs} data"))
}

/// Located critical point as `(p_c, uncertainty, η)`.
fn critical(g: &ExtrapolationGroup) -> Result<(f64, f64, f64), String> {
    match (&g.critical, &g.critical_error) {
        (Some(c), _) => Ok((c.p_c, c.uncertainty, c.eta)),
        (None, e) => Err(format!("{}: {}", g.observable, e.as_deref().unwrap_or("no critical point"))),
    }
}

fn print_fits(g: &ExtrapolationGroup) {
    let scores = g.critical.as_ref().map(|c| c.scores.clone()).unwrap_or_default();
    for (i, p) in g.points.iter().enumerate() {
        let score = scores.get(i).copied().flatten().map_or("-".to_string(), |s| format!("{s:.2e}"));
        match &p.fit {
            Some(f) => println!(
                "    {} p_s={:.3} b={:+.4}±{:.4} eta={:.3} eta(b=0)={:.3} score={score}",
                g.observable, p.p_s, f.b, f.b_err, f.eta, f.eta_b0
            ),
            None => println!("    {} p_s={:.3} fit failed: {}", g.observable, p.p_s, p.error.as_deref().unwrap_or("")),
        }
    }
}

fn near(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol + 1e-9
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in 1..=3usize {
        let sizes: Vec<usize> = if alpha == 3 { vec![66, 126, 258] } else { vec![64, 128, 256] };
        let p_s = if alpha == 2 { grid(0.40, 0.60, 0.02) } else { grid(0.44, 0.56, 0.02) };
        let base = json!({
            "alpha": alpha, "n_qubits": 0, "p_s": 0.0, "p_u": 0.0,
            "n_circuits": 400, "sample_steps": 100, "master_seed": 100 + alpha,
            "observables": ["S_triv", "S_spt"],
        });
        let table = sweep(&format!("c1-alpha{alpha}"), base, &sizes, &p_s)?;
        let groups = extrapolate(&table, &FitOptions::default()).map_err(|e| e.to_string())?;
        let spt = find(&groups, ObservableId::SSpt)?;
        print_fits(spt);
        let (p_c, u, eta) = critical(spt)?;
        let pass = near(p_c, 0.5, 0.02);
        ok &= pass;
        let triv = critical(find(&groups, ObservableId::STriv)?)
            .map_or_else(|e| e, |(p, u, _)| format!("{p:.3}±{u:.3}"));
        println!("  alpha={alpha}: S_spt p_c={p_c:.3}±{u:.3} (eta {eta:.2}); S_triv p_c={triv}");
        parts.push(format!("α={alpha}: p_c={p_c:.3}"));
    }
    verdict(ok, format!("self-dual point 0.50±0.02 from S_spt; {}", parts.join(", ")))
}

fn c2_table() -> Result<Table, String> {
    let base = json!({
        "alpha": 2, "n_qubits": 0, "p_s": 0.0, "p_u": 0.2, "gate_family": "clifford",
        "n_circuits": 300, "sample_steps": 100, "master_seed": 202,
        "observables": ["S_triv", "S_spt"],
    });
    sweep("c2-xzx-clifford", base, &[64, 128, 256, 512], &grid(0.21, 0.45, 0.03))
}

fn criterion_2() -> Outcome {
    let table = c2_table()?;
    let groups = extrapolate(&table, &FitOptions::default()).map_err(|e| e.to_string())?;
    let spt = find(&groups, ObservableId::SSpt)?;
    let triv = find(&groups, ObservableId::STriv)?;
    print_fits(spt);
    print_fits(triv);
    let (pc1, u1, eta1) = critical(spt)?;
    let (pc2, u2, eta2) = critical(triv)?;
    let pass_spt = near(pc1, 0.27, 0.03) && (0.9..=1.6).contains(&eta1);
    let pass_triv = near(pc2, 0.38, 0.03);
    println!("  SPT→volume: p_c={pc1:.3}±{u1:.3}, eta={eta1:.3} (target 0.27±0.03, eta in [0.9, 1.6])");
    println!("  volume→trivial: p_c={pc2:.3}±{u2:.3}, eta={eta2:.3} (target 0.38±0.03)");
    verdict(
        pass_spt && pass_triv,
        format!("SPT→volume p_c={pc1:.3} eta={eta1:.2}; volume→trivial p_c={pc2:.3}"),
    )
}

fn criterion_3() -> Outcome {
    let base = json!({
        "alpha": 3, "n_qubits": 0, "p_s": 0.0, "p_u": 0.1, "gate_family": "clifford",
        "n_circuits": 200, "sample_steps": 100, "master_seed": 303,
        "observables": ["S_triv", "S_spt", "C_M"],
    });
    let p_s = [0.10, 0.15, 0.20, 0.24, 0.27, 0.30, 0.31, 0.32, 0.33, 0.34, 0.35, 0.36, 0.40];
    let table = sweep("c3-xzzx-clifford", base, &[96, 192, 384], &p_s)?;
    let groups = extrapolate(&table, &FitOptions::default()).map_err(|e| e.to_string())?;
    let (spt, cm, triv) =
        (find(&groups, ObservableId::SSpt)?, find(&groups, ObservableId::CM)?, find(&groups, ObservableId::STriv)?);
    for g in [spt, cm, triv] {
        print_fits(g);
    }
    let b = |g: &ExtrapolationGroup, i: usize| g.points[i].fit.as_ref().map(Extrapolated::from_fit);
    let coexisting: Vec<f64> = (0..spt.points.len())
        .filter(|&i| {
            let (s, c, t) = (b(spt, i), b(cm, i), b(triv, i));
            s.is_some_and(|x| x.is_positive()) && c.is_some_and(|x| x.is_positive()) && t.is_some_and(|x| x.is_zero())
        })
        .map(|i| spt.points[i].p_s)
        .collect();
    let (pc_s, u_s, _) = critical(spt)?;
    let (pc_m, u_m, _) = critical(cm)?;
    let agree = (pc_s - pc_m).abs() <= u_s + u_m + 1e-9;
    println!("  coexistence (b(S_spt)>0, b(C_M)>0, b(S_triv)=0) at p_s = {coexisting:?}");
    println!("  p_c(S_spt)={pc_s:.3}±{u_s:.3}, p_c(C_M)={pc_m:.3}±{u_m:.3}");
    verdict(
        !coexisting.is_empty() && agree,
        format!(
            "{} coexistence points; p_c(S_spt)={pc_s:.3}±{u_s:.3} vs p_c(C_M)={pc_m:.3}±{u_m:.3}",
            coexisting.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let rep = run_duality_suite(&DualitySuiteConfig::default()).map_err(|e| e.to_string())?;
    let mut ok = rep.passed;
    for s in &rep.summaries {
        let exact = s.lemma_passed == s.lemma_checks && s.max_entropy_difference <= s.entropy_bound;
        ok &= exact;
        println!(
            "  alpha={} sizes={:?}: {} realizations, lemma {}/{}, max S̃−S = {} (bound {})",
            s.alpha, s.sizes, s.realizations, s.lemma_passed, s.lemma_checks, s.max_entropy_difference, s.entropy_bound
        );
    }
    let checks: u64 = rep.summaries.iter().map(|s| s.lemma_checks).sum();
    verdict(ok, format!("{checks} lemma checks, {} failing realizations", rep.failures.len()))
}

fn criterion_5() -> Outcome {
    let spec = CircuitSpec::new(2, 10, 0.4, 0.2).with_seed(1);
    let rep = cross_check(&spec, &XcheckConfig::default()).map_err(|e| e.to_string())?;
    for f in rep.failures.iter().take(5) {
        println!("  {f}");
    }
    verdict(
        rep.passed && rep.max_expectation_diff <= 1e-10 && rep.max_entropy_diff <= 1e-9,
        format!(
            "{} trajectories × {} ops: max |Δ⟨P⟩| = {:.1e} over {} checks, max |ΔS| = {:.1e} over {} checks",
            rep.trajectories,
            rep.operations / rep.trajectories.max(1),
            rep.max_expectation_diff,
            rep.expectation_checks,
            rep.max_entropy_diff,
            rep.entropy_checks
        ),
    )
}

/// Histogram of the leading multiplet pattern in SPT-region snapshots.
fn multiplet_census(trajectories: u64) -> Result<Vec<(Vec<usize>, usize)>, String> {
    let spec = CircuitSpec::new(2, 16, 0.1, 0.3).with_gate_family(GateFamily::Haar).with_steps(32, 10).with_seed(606);
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for t in 0..trajectories {
        let mut engine = DenseEngine::new(&spec).map_err(|e| e.to_string())?;
        let mut obs = |e: &DenseEngine, _: usize| {
            let sp = e.schmidt_spectrum(8)?;
            let mut pattern = Vec::new();
            let mut seen = 0;
            for g in multiplet_structure(&sp.values, SCHMIDT_TOL) {
                if seen >= SCHMIDT_TOP {
                    break;
                }
                pattern.push(g);
                seen += g;
            }
            *counts.entry(pattern).or_default() += 1;
            Ok(())
        };
        run_trajectory(&spec, t, &mut engine, &mut obs, false).map_err(|e| e.to_string())?;
    }
    let mut v: Vec<_> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1));
    Ok(v)
}

fn criterion_6() -> Outcome {
    let base = json!({
        "alpha": 2, "n_qubits": 16, "p_s": 0.0, "p_u": 0.3, "gate_family": "haar", "engine": "dense",
        "n_circuits": 200, "sample_steps": 20, "master_seed": 606,
        "observables": ["S_triv", "S_spt", "schmidt"],
    });
    let table = sweep("c6-haar-dense", base, &[16], &[0.1, 0.5])?;
    let value = |p: f64, obs: ObservableId| {
        table
            .rows()
            .find(|r| r.p_s == p && r.observable == obs)
            .map(|r| (r.mean_abs, r.std_error))
            .ok_or_else(|| format!("missing {obs} at p_s={p}"))
    };
    let (spt_lo, triv_lo) = (value(0.1, ObservableId::SSpt)?, value(0.1, ObservableId::STriv)?);
    let (spt_hi, triv_hi) = (value(0.5, ObservableId::SSpt)?, value(0.5, ObservableId::STriv)?);
    let (quad, quad_err) = value(0.1, ObservableId::Schmidt)?;
    println!("  p_s=0.1: S_spt={:.4}±{:.4} S_triv={:.4}±{:.4}", spt_lo.0, spt_lo.1, triv_lo.0, triv_lo.1);
    println!("  p_s=0.5: S_spt={:.4}±{:.4} S_triv={:.4}±{:.4}", spt_hi.0, spt_hi.1, triv_hi.0, triv_hi.1);
    println!("  quadruplet fraction at p_s=0.1: {quad:.3}±{quad_err:.3} (need ≥ 0.80)");
    let ordering = spt_lo.0 > 3.0 * triv_lo.0 && triv_hi.0 > 3.0 * spt_hi.0;
    let grouped = quad >= 0.8;
    if !grouped {
        let census = multiplet_census(20)?;
        let total: usize = census.iter().map(|c| c.1).sum();
        println!("  observed leading multiplets (top {SCHMIDT_TOP}, tol {SCHMIDT_TOL:e}) over {total} snapshots:");
        for (pattern, k) in census.iter().take(6) {
            println!("    {pattern:?}: {:.1}%", 100.0 * *k as f64 / total as f64);
        }
    }
    verdict(
        ordering && grouped,
        format!(
            "ordering {} (p_s=0.1 ratio {:.1}, p_s=0.5 ratio {:.1}); quadruplets in {:.0}% of snapshots",
            if ordering { "holds" } else { "fails" },
            spt_lo.0 / triv_lo.0,
            triv_hi.0 / spt_hi.0,
            100.0 * quad
        ),
    )
}

fn criterion_7() -> Outcome {
    let opts = FitOptions::default();
    let c1 = {
        let base = json!({
            "alpha": 2, "n_qubits": 0, "p_s": 0.0, "p_u": 0.0,
            "n_circuits": 400, "sample_steps": 100, "master_seed": 102,
            "observables": ["S_triv", "S_spt"],
        });
        sweep("c1-alpha2", base, &[64, 128, 256], &grid(0.40, 0.60, 0.02))?
    };
    let request = |obs, p_u, p_c, eta| CollapseRequest {
        observable: obs,
        alpha: Some(2),
        p_u: Some(p_u),
        p_c,
        eta,
        nu_range: (0.5, 3.0),
        window: Some(0.1),
    };
    let mut ok = true;
    let mut parts = Vec::new();
    let mo = collapse(&c1, &request(ObservableId::SSpt, 0.0, Some(0.5), Some(0.6)), &opts).map_err(|e| e.to_string())?;
    let nu = mo[0].collapse.nu;
    ok &= near(nu, 1.33, 0.15);
    println!(
        "  measurement-only S_spt (p_c=0.5, eta=0.6): nu={nu:.3}±{:.3}, quality {:.2}",
        mo[0].collapse.nu_err, mo[0].collapse.quality
    );
    parts.push(format!("measurement-only ν={nu:.2}"));
    let c2 = c2_table()?;
    for obs in [ObservableId::SSpt, ObservableId::STriv] {
        let r = collapse(&c2, &request(obs, 0.2, None, None), &opts).map_err(|e| e.to_string())?;
        let c = &r[0].collapse;
        ok &= (1.1..=1.5).contains(&c.nu);
        println!(
            "  p_u=0.2 {obs} (p_c={:.3}, eta={:.3} located): nu={:.3}±{:.3}, quality {:.2}",
            c.p_c, c.eta, c.nu, c.nu_err, c.quality
        );
        parts.push(format!("{obs} ν={:.2}", c.nu));
    }
    verdict(ok, parts.join(", "))
}

fn criterion_8() -> Outcome {
    let mut trajectories = 0;
    let mut snapshots = 0;
    for alpha in 1..=3usize {
        for (p_s, p_u) in [(0.2, 0.0), (0.5, 0.0), (0.8, 0.0), (0.3, 0.2), (0.6, 0.3)] {
            let n = 8 * alpha;
            let spec = CircuitSpec::new(alpha, n, p_s, p_u).with_steps(4, 6).with_seed(808 + alpha as u64);
            for id in 0..4 {
                let c = check_trajectory(&spec, id, 4)
                    .map_err(|e| format!("α={alpha} p_s={p_s} p_u={p_u} trajectory {id}: {e}"))?;
                trajectories += 1;
                snapshots += c.snapshots;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for eta in grid(0.2, 3.4, 0.2) {
        for c in [0.3, 1.0, 2.5] {
            let series: Vec<SeriesPoint> = [64usize, 128, 256, 512]
                .iter()
                .map(|&n| {
                    let v = c * (n as f64).powf(-eta);
                    SeriesPoint { n, value: v, std_error: 0.01 * v }
                })
                .collect();
            let fit = fit_power_law(&series, &FitOptions::default()).map_err(|e| e.to_string())?;
            worst = worst.max((fit.eta - eta).abs() / eta);
        }
    }
    println!("  {trajectories} trajectories, {snapshots} snapshots checked; worst relative η error {worst:.1e}");
    verdict(
        worst < 0.01,
        format!("tableau/symmetry/ternary/S_A=S_Ā/replay on {trajectories} trajectories; η error {worst:.1e}"),
    )
}

fn main() -> ExitCode {
    let only: Option<Vec<u8>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(u8, &str, fn() -> Outcome); 8] = [
        (1, "self-dual critical point", criterion_1),
        (2, "Clifford XZX boundaries", criterion_2),
        (3, "XZZX coexistence", criterion_3),
        (4, "duality lemma", criterion_4),
        (5, "cross-engine oracle", criterion_5),
        (6, "Haar phase fingerprint", criterion_6),
        (7, "collapse exponents", criterion_7),
        (8, "property suites", criterion_8),
    ];
    let mut lines = Vec::new();
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        println!("criterion {id}: {name}");
        let t = Instant::now();
        let (passed, summary) = match run() {
            Ok(v) => (v.passed, v.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        let line = format!("{} {id}. {name}: {summary}", if passed { "PASS" } else { "FAIL" });
        println!("{line}  [{:.0}s]", t.elapsed().as_secs_f64());
        lines.push((passed, line));
    }
    println!("\nacceptance summary");
    for (_, line) in &lines {
        println!("{line}");
    }
    let failed = lines.iter().filter(|l| !l.0).count();
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
