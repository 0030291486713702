//! Replays stabilizer trajectories on the state-vector engine and compares
//! expectations and entropies along the way.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{execute, sample_operation, trajectory_rng, CircuitSpec, GateFamily};
use crate::engine::{DenseEngine, Engine, StabilizerEngine};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XcheckConfig {
    pub trajectories: u64,
    pub operations: usize,
    /// Compare after every this many operations.
    pub check_every: usize,
    pub random_probes: usize,
    pub random_regions: usize,
    pub expectation_tol: f64,
    pub entropy_tol: f64,
}

impl Default for XcheckConfig {
    fn default() -> Self {
        Self {
            trajectories: 20,
            operations: 500,
            check_every: 10,
            random_probes: 32,
            random_regions: 16,
            expectation_tol: 1e-10,
            entropy_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XcheckReport {
    pub trajectories: u64,
    pub operations: u64,
    pub expectation_checks: u64,
    pub entropy_checks: u64,
    pub max_expectation_diff: f64,
    pub max_entropy_diff: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Runs `config.trajectories` Clifford trajectories of `spec` on the tableau,
/// forcing every outcome on the dense engine.
pub fn cross_check(spec: &CircuitSpec, config: &XcheckConfig) -> Result<XcheckReport> {
    spec.validate()?;
    if spec.gate_family == GateFamily::Haar {
        return Err(Error::UnsupportedGateFamily("haar circuits have no stabilizer reference".into()));
    }
    let mut report = XcheckReport {
        trajectories: config.trajectories,
        operations: 0,
        expectation_checks: 0,
        entropy_checks: 0,
        max_expectation_diff: 0.0,
        max_entropy_diff: 0.0,
        passed: true,
        failures: Vec::new(),
    };
    let every = config.check_every.max(1);
    for t in 0..config.trajectories {
        let mut tab = StabilizerEngine::new(spec)?;
        let mut dense = DenseEngine::new(spec)?;
        let mut rng = trajectory_rng(spec.master_seed, t);
        let mut probe_rng = ChaCha8Rng::seed_from_u64(spec.master_seed ^ t.rotate_left(32));
        for op in 1..=config.operations {
            let mut rec = sample_operation(spec, &mut rng);
            execute(&mut tab, &mut rec, None, true, &mut rng)?;
            let mut forced = rec;
            execute(&mut dense, &mut forced, rec.outcome, false, &mut rng)?;
            report.operations += 1;
            if op % every == 0 || op == config.operations {
                compare(&tab, &dense, config, &mut probe_rng, &mut report, t, op)?;
            }
        }
    }
    report.passed = report.failures.is_empty();
    Ok(report)
}

fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    let letters: Vec<Letter> = (0..n).map(|_| [Letter::I, Letter::X, Letter::Y, Letter::Z][rng.random_range(0..4)]).collect();
    PauliString::from_letters(&letters)
}

fn compare<R: Rng>(
    tab: &StabilizerEngine,
    dense: &DenseEngine,
    config: &XcheckConfig,
    rng: &mut R,
    report: &mut XcheckReport,
    t: u64,
    op: usize,
) -> Result<()> {
    let n = tab.num_qubits();
    let mut probes = tab.state().stabilizers();
    probes.extend((0..config.random_probes).map(|_| random_pauli(n, rng)));
    // Products of a few stabilizers give probes with non-zero expectation.
    for _ in 0..config.random_probes {
        let mut p = PauliString::identity(n);
        let k = rng.random_range(1..=n.min(4));
        for i in sample(rng, n, k) {
            p = p.multiply(&tab.state().stabilizer(i))?;
        }
        if p.is_hermitian() {
            probes.push(p);
        }
    }
    for p in &probes {
        let diff = (tab.expectation(p)? - dense.expectation(p)?).abs();
        report.expectation_checks += 1;
        report.max_expectation_diff = report.max_expectation_diff.max(diff);
        if !(diff <= config.expectation_tol) {
            report.failures.push(format!("trajectory {t}, op {op}: <{p}> differs by {diff:e}"));
        }
    }
    let mut regions: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        for b in a + 1..=n {
            regions.push((a..b).collect());
        }
    }
    for _ in 0..config.random_regions {
        let k = rng.random_range(1..n);
        let mut r = sample(rng, n, k).into_vec();
        r.sort_unstable();
        regions.push(r);
    }
    for r in &regions {
        let mut mask = vec![0u64; n.div_ceil(64)];
        for &q in r {
            mask[q / 64] |= 1 << (q % 64);
        }
        let s_tab = tab.state().entropy_of_mask(&mask)? as f64;
        let s_dense = dense.state().entanglement_entropy(r)?;
        let diff = (s_tab - s_dense).abs();
        report.entropy_checks += 1;
        report.max_entropy_diff = report.max_entropy_diff.max(diff);
        if !(diff <= config.entropy_tol) {
            report.failures.push(format!("trajectory {t}, op {op}: S{r:?} = {s_tab} vs {s_dense}"));
        }
    }
    Ok(())
}
