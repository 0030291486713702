//! Monitored generalized cluster circuits: specification, operation sampling,
//! and trajectory execution over any [`Engine`].
//!
//! One time step is `N` operations. Each operation is, independently, a
//! cluster-operator measurement (probability `p_t`), a single-site `Z`
//! measurement (`p_s`), or a symmetric random gate on `α + 1` neighbouring
//! sites (`p_u`).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{make_clifford_gate, CliffordGate};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::operators::Boundary;
use crate::statevector::sample_symmetric_haar_gate;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateFamily {
    Clifford,
    Haar,
    None,
}

impl GateFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            GateFamily::Clifford => "clifford",
            GateFamily::Haar => "haar",
            GateFamily::None => "none",
        }
    }
}

impl fmt::Display for GateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clifford" => Ok(GateFamily::Clifford),
            "haar" => Ok(GateFamily::Haar),
            "none" => Ok(GateFamily::None),
            other => Err(Error::Parse(format!("unknown gate family `{other}`"))),
        }
    }
}

/// Everything needed to reproduce an ensemble of trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub alpha: usize,
    pub n: usize,
    pub p_s: f64,
    pub p_t: f64,
    pub p_u: f64,
    pub boundary: Boundary,
    pub gate_family: GateFamily,
    pub initial_sign: i8,
    pub burn_in_steps: usize,
    pub sample_steps: usize,
    pub master_seed: u64,
    pub trajectory_count: usize,
}

impl CircuitSpec {
    /// Open chain starting from `|Z=−1⟩`, with `p_t = 1 − p_s − p_u`, a
    /// burn-in of `2N` steps and the gate family implied by `p_u`.
    pub fn new(alpha: usize, n: usize, p_s: f64, p_u: f64) -> Self {
        Self {
            alpha,
            n,
            p_s,
            p_t: 1.0 - p_s - p_u,
            p_u,
            boundary: Boundary::Open,
            gate_family: if p_u > 0.0 { GateFamily::Clifford } else { GateFamily::None },
            initial_sign: -1,
            burn_in_steps: 2 * n,
            sample_steps: 100,
            master_seed: 0,
            trajectory_count: 100,
        }
    }

    pub fn with_gate_family(mut self, family: GateFamily) -> Self {
        self.gate_family = family;
        self
    }

    pub fn with_steps(mut self, burn_in: usize, samples: usize) -> Self {
        self.burn_in_steps = burn_in;
        self.sample_steps = samples;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_trajectories(mut self, count: usize) -> Self {
        self.trajectory_count = count;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.alpha == 0 {
            return bad("alpha must be positive".into());
        }
        for (name, p) in [("p_s", self.p_s), ("p_t", self.p_t), ("p_u", self.p_u)] {
            if !(p.is_finite() && (-PROB_TOL..=1.0 + PROB_TOL).contains(&p)) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        let total = self.p_s + self.p_t + self.p_u;
        if (total - 1.0).abs() > PROB_TOL {
            return bad(format!("p_s + p_t + p_u = {total}, expected 1"));
        }
        if (self.gate_family == GateFamily::None) != (self.p_u <= 0.0) {
            return bad(format!("gate_family {} is inconsistent with p_u = {}", self.gate_family, self.p_u));
        }
        if self.n < 2 * self.alpha + 2 {
            return bad(format!("N = {} is below the minimum 2α + 2 = {}", self.n, 2 * self.alpha + 2));
        }
        if self.boundary == Boundary::Periodic {
            if self.p_u > 0.0 {
                return bad("periodic chains support measurement-only circuits".into());
            }
            if !self.n.is_multiple_of(self.alpha) {
                return bad(format!("periodic N = {} must be a multiple of α = {}", self.n, self.alpha));
            }
        }
        if self.initial_sign != 1 && self.initial_sign != -1 {
            return bad(format!("initial_sign must be ±1, got {}", self.initial_sign));
        }
        Ok(())
    }

    /// Largest legal 1-based position for an operation of the given kind.
    pub fn max_position(&self, kind: OpKind) -> usize {
        match (kind, self.boundary) {
            (OpKind::ZMeas, _) | (OpKind::ClusterMeas, Boundary::Periodic) => self.n,
            _ => self.n - self.alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    ClusterMeas,
    ZMeas,
    Unitary,
}

impl OpKind {
    fn tag(self) -> char {
        match self {
            OpKind::ClusterMeas => 'T',
            OpKind::ZMeas => 'Z',
            OpKind::Unitary => 'U',
        }
    }
}

/// One executed (or planned) operation. `position` is a 1-based site label:
/// the first site of the cluster operator or gate, or the measured site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperationRecord {
    pub kind: OpKind,
    pub position: usize,
    pub outcome: Option<i8>,
    pub gate_seed: Option<u64>,
}

impl OperationRecord {
    pub fn measurement(kind: OpKind, position: usize, outcome: Option<i8>) -> Self {
        Self { kind, position, outcome, gate_seed: None }
    }

    pub fn unitary(position: usize, gate_seed: u64) -> Self {
        Self { kind: OpKind::Unitary, position, outcome: None, gate_seed: Some(gate_seed) }
    }
}

/// Log line format: `T 3 +1`, `Z 5 -1`, `T 4 ?` (outcome not recorded),
/// `U 2 00000000deadbeef` (gate seed in hex).
impl fmt::Display for OperationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OpKind::Unitary => write!(f, "U {} {:016x}", self.position, self.gate_seed.unwrap_or(0)),
            kind => {
                let out = match self.outcome {
                    Some(1) => "+1",
                    Some(_) => "-1",
                    None => "?",
                };
                write!(f, "{} {} {}", kind.tag(), self.position, out)
            }
        }
    }
}

impl FromStr for OperationRecord {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad operation record `{line}`"));
        let mut parts = line.split_whitespace();
        let (tag, pos, last) = (parts.next(), parts.next(), parts.next());
        if parts.next().is_some() {
            return Err(bad());
        }
        let (Some(tag), Some(pos), Some(last)) = (tag, pos, last) else {
            return Err(bad());
        };
        let position: usize = pos.parse().map_err(|_| bad())?;
        if position == 0 {
            return Err(bad());
        }
        let kind = match tag {
            "T" => OpKind::ClusterMeas,
            "Z" => OpKind::ZMeas,
            "U" => {
                let seed = u64::from_str_radix(last, 16).map_err(|_| bad())?;
                return Ok(OperationRecord::unitary(position, seed));
            }
            _ => return Err(bad()),
        };
        let outcome = match last {
            "+1" => Some(1),
            "-1" => Some(-1),
            "?" => None,
            _ => return Err(bad()),
        };
        Ok(OperationRecord::measurement(kind, position, outcome))
    }
}

pub fn write_log(log: &[OperationRecord]) -> String {
    log.iter().map(|r| format!("{r}\n")).collect()
}

pub fn parse_log(text: &str) -> Result<Vec<OperationRecord>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(str::parse).collect()
}

/// Random stream of trajectory `trajectory_id` under `master_seed`.
pub fn trajectory_rng(master_seed: u64, trajectory_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trajectory_id);
    rng
}

/// Random stream that a gate seed expands into.
pub fn gate_rng(gate_seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(gate_seed)
}

/// Draws one operation (kind and position; gate seed for unitaries).
pub fn sample_operation<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R) -> OperationRecord {
    let u: f64 = rng.random();
    let kind = if u < spec.p_t {
        OpKind::ClusterMeas
    } else if u < spec.p_t + spec.p_s || spec.gate_family == GateFamily::None {
        OpKind::ZMeas
    } else {
        OpKind::Unitary
    };
    let position = rng.random_range(1..=spec.max_position(kind));
    match kind {
        OpKind::Unitary => OperationRecord::unitary(position, rng.random()),
        kind => OperationRecord::measurement(kind, position, None),
    }
}

/// Symmetric Clifford gate on `α + 1` sites, reproducible from `gate_seed`.
pub fn clifford_gate_from_seed(alpha: usize, gate_seed: u64) -> CliffordGate {
    make_clifford_gate(alpha, &mut gate_rng(gate_seed))
}

/// Symmetric Haar gate, as drawn by the dense engine for `gate_seed`.
pub fn make_haar_gate<R: Rng + ?Sized>(alpha: usize, rng: &mut R) -> DMatrix<Complex64> {
    sample_symmetric_haar_gate(alpha, rng)
}

/// Called after every post-burn-in time step.
pub trait Observer<E: Engine> {
    fn observe(&mut self, engine: &E, step: usize) -> Result<()>;
}

impl<E: Engine, F: FnMut(&E, usize) -> Result<()>> Observer<E> for F {
    fn observe(&mut self, engine: &E, step: usize) -> Result<()> {
        self(engine, step)
    }
}

/// Observer that ignores every step.
pub struct NoObserver;

impl<E: Engine> Observer<E> for NoObserver {
    fn observe(&mut self, _: &E, _: usize) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryResult {
    pub trajectory_id: u64,
    pub operations: u64,
    pub log: Option<Vec<OperationRecord>>,
}

/// Executes one trajectory on a freshly initialized `engine`.
///
/// With `keep_log`, every measurement outcome (deterministic ones included)
/// is recorded so the trajectory can be replayed.
pub fn run_trajectory<E: Engine, O: Observer<E>>(
    spec: &CircuitSpec,
    trajectory_id: u64,
    engine: &mut E,
    observer: &mut O,
    keep_log: bool,
) -> Result<TrajectoryResult> {
    spec.validate()?;
    if engine.num_qubits() != spec.n {
        return Err(Error::SizeMismatch { expected: spec.n, got: engine.num_qubits() });
    }
    let mut rng = trajectory_rng(spec.master_seed, trajectory_id);
    let mut log = keep_log.then(Vec::new);
    let mut operations = 0u64;
    for step in 0..spec.burn_in_steps + spec.sample_steps {
        for _ in 0..spec.n {
            let mut rec = sample_operation(spec, &mut rng);
            execute(engine, &mut rec, None, keep_log, &mut rng)?;
            if let Some(log) = log.as_mut() {
                log.push(rec);
            }
            operations += 1;
        }
        if step >= spec.burn_in_steps {
            observer.observe(engine, step - spec.burn_in_steps)?;
        }
    }
    Ok(TrajectoryResult { trajectory_id, operations, log })
}

/// Executes `rec` on `engine`, filling in its outcome.
pub fn execute<E: Engine, R: Rng + ?Sized>(
    engine: &mut E,
    rec: &mut OperationRecord,
    forced: Option<i8>,
    want_outcome: bool,
    rng: &mut R,
) -> Result<()> {
    match rec.kind {
        OpKind::Unitary => {
            let seed = rec.gate_seed.ok_or_else(|| Error::InvalidSpec("unitary record without a gate seed".into()))?;
            engine.apply_unitary(rec.position, seed)
        }
        kind => {
            rec.outcome = engine.measure_site(kind, rec.position, forced, want_outcome, rng)?;
            Ok(())
        }
    }
}

/// Re-executes a logged trajectory, forcing every recorded outcome.
pub fn replay<E: Engine>(engine: &mut E, log: &[OperationRecord]) -> Result<()> {
    // Forced outcomes never consume randomness; the stream is a placeholder.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for rec in log {
        let mut r = *rec;
        execute(engine, &mut r, rec.outcome, false, &mut rng)?;
    }
    Ok(())
}
