//! Runtime checks of the structural invariants of a trajectory.
//!
//! Used by the property suites and by the acceptance run, so both exercise
//! the same contract on the public engine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{parse_log, replay, run_trajectory, write_log, CircuitSpec};
use crate::engine::{Engine, StabilizerEngine};
use crate::error::{Error, Result};
use crate::operators::symmetries;
use crate::pauli::{Letter, PauliString};
use crate::stabilizer::qubit_mask;

/// Counts of what [`check_trajectory`] inspected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckCounts {
    pub snapshots: usize,
    pub probes: usize,
}

fn fail(msg: String) -> Error {
    Error::TableauInvariant(msg)
}

fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    let letters: Vec<Letter> =
        (0..n).map(|_| [Letter::I, Letter::X, Letter::Y, Letter::Z][rng.random_range(0..4)]).collect();
    PauliString::from_letters(&letters)
}

/// Runs one stabilizer trajectory and checks, after every sampled step:
/// the tableau contract, conservation of every `G_r`, ternary Pauli
/// expectations and `S(A) = S(Ā)` for a random contiguous `A`. Then checks
/// that the trajectory is deterministic in its seed, that its log survives a
/// text round trip and that replaying the log rebuilds the same tableau.
pub fn check_trajectory(spec: &CircuitSpec, trajectory_id: u64, probes_per_step: usize) -> Result<CheckCounts> {
    let n = spec.n;
    let syms = symmetries(spec.alpha, n)?;
    let fresh = StabilizerEngine::new(spec)?;
    let initial: Vec<f64> = syms.iter().map(|g| fresh.expectation(g)).collect::<Result<_>>()?;
    let full = qubit_mask(n, 0..n);
    let mut probe_rng = ChaCha8Rng::seed_from_u64(trajectory_id ^ 0x5eed);
    let mut counts = CheckCounts::default();

    let mut observer = |e: &StabilizerEngine, step: usize| -> Result<()> {
        let s = e.state();
        s.check_invariants()?;
        for (r, (g, &want)) in syms.iter().zip(&initial).enumerate() {
            let got = e.expectation(g)?;
            if got != want {
                return Err(fail(format!("G_{} moved from {want} to {got} at step {step}", r + 1)));
            }
        }
        for _ in 0..probes_per_step {
            let p = random_pauli(n, &mut probe_rng);
            let v = e.expectation(&p)?;
            if v != -1.0 && v != 0.0 && v != 1.0 {
                return Err(fail(format!("expectation {v} is not in {{-1, 0, 1}}")));
            }
            let a = probe_rng.random_range(0..=n);
            let b = probe_rng.random_range(a..=n);
            let mask = qubit_mask(n, a..b);
            let comp: Vec<u64> = mask.iter().zip(&full).map(|(m, f)| m ^ f).collect();
            let (sa, sc) = (s.entropy_of_mask(&mask)?, s.entropy_of_mask(&comp)?);
            if sa != sc {
                return Err(fail(format!("S({a}..{b}) = {sa} but its complement has {sc}")));
            }
            counts.probes += 1;
        }
        counts.snapshots += 1;
        Ok(())
    };

    let mut first = StabilizerEngine::new(spec)?;
    let run = run_trajectory(spec, trajectory_id, &mut first, &mut observer, true)?;
    let log = run.log.expect("log was requested");

    let mut second = StabilizerEngine::new(spec)?;
    let rerun = run_trajectory(spec, trajectory_id, &mut second, &mut crate::circuit::NoObserver, true)?;
    if rerun.log.as_deref() != Some(&log[..]) || second.state() != first.state() {
        return Err(fail(format!("trajectory {trajectory_id} is not reproducible from its seed")));
    }

    let parsed = parse_log(&write_log(&log))?;
    if parsed != log {
        return Err(fail("operation log does not survive a text round trip".into()));
    }
    let mut replayed = StabilizerEngine::new(spec)?;
    replay(&mut replayed, &parsed)?;
    if replayed.state().to_text() != first.state().to_text() {
        return Err(fail(format!("replaying trajectory {trajectory_id} gives a different tableau")));
    }
    Ok(counts)
}
