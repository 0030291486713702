//! Uniform interface over the stabilizer and state-vector simulators, with
//! the per-chain operator caches the circuit hot loop needs.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{clifford_gate_from_seed, gate_rng, make_haar_gate, CircuitSpec, GateFamily, OpKind};
use crate::error::{Error, Result};
use crate::operators::{build_operator, OperatorKind};
use crate::pauli::{Letter, PauliString};
use crate::stabilizer::{CompiledPauli, StabilizerState};
use crate::statevector::{clifford_to_dense, DenseState, SchmidtSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Stabilizer,
    Dense,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Stabilizer => "stabilizer",
            EngineKind::Dense => "dense",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stabilizer" => Ok(EngineKind::Stabilizer),
            "dense" => Ok(EngineKind::Dense),
            other => Err(Error::Parse(format!("unknown engine `{other}`"))),
        }
    }
}

/// A simulator that can run circuit operations. Positions are 1-based site
/// labels as in [`crate::circuit::OperationRecord`]; regions are 0-based.
pub trait Engine: Sized {
    const KIND: EngineKind;

    /// Fresh engine in the spec's initial product state.
    fn new(spec: &CircuitSpec) -> Result<Self>;

    fn num_qubits(&self) -> usize;

    /// Measures the cluster operator or `Z` at `position`. Returns `None` only
    /// for deterministic outcomes when `want_outcome` is false.
    fn measure_site<R: Rng + ?Sized>(
        &mut self,
        kind: OpKind,
        position: usize,
        forced: Option<i8>,
        want_outcome: bool,
        rng: &mut R,
    ) -> Result<Option<i8>>;

    fn apply_unitary(&mut self, position: usize, gate_seed: u64) -> Result<()>;

    fn expectation(&self, p: &PauliString) -> Result<f64>;

    /// Entanglement entropy in bits of a contiguous 0-based qubit range.
    fn entropy(&self, region: Range<usize>) -> Result<f64>;

    fn schmidt_spectrum(&self, _cut: usize) -> Result<SchmidtSpectrum> {
        Err(Error::Observer(format!("{} engine has no Schmidt spectra", Self::KIND)))
    }
}

/// Measured operators for every legal position.
fn operator_cache(spec: &CircuitSpec) -> Result<(Vec<PauliString>, Vec<PauliString>)> {
    let n_cluster = spec.max_position(OpKind::ClusterMeas);
    let cluster = (1..=n_cluster)
        .map(|site| build_operator(OperatorKind::Cluster { site }, spec.alpha, spec.n, spec.boundary))
        .collect::<Result<Vec<_>>>()?;
    let z = (0..spec.n).map(|q| PauliString::single(spec.n, q, Letter::Z)).collect();
    Ok((cluster, z))
}

fn check_position(position: usize, max: usize, width: usize, n: usize) -> Result<usize> {
    if position == 0 || position > max {
        return Err(Error::PositionOutOfRange { position, width, n });
    }
    Ok(position - 1)
}

pub struct StabilizerEngine {
    state: StabilizerState,
    alpha: usize,
    cluster: Vec<CompiledPauli>,
    z: Vec<CompiledPauli>,
}

impl StabilizerEngine {
    pub fn state(&self) -> &StabilizerState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut StabilizerState {
        &mut self.state
    }
}

impl Engine for StabilizerEngine {
    const KIND: EngineKind = EngineKind::Stabilizer;

    fn new(spec: &CircuitSpec) -> Result<Self> {
        spec.validate()?;
        if spec.gate_family == GateFamily::Haar {
            return Err(Error::UnsupportedGateFamily("haar (stabilizer engine)".into()));
        }
        let (cluster, z) = operator_cache(spec)?;
        Ok(Self {
            state: StabilizerState::new_product_state(spec.n, spec.initial_sign),
            alpha: spec.alpha,
            cluster: cluster.iter().map(CompiledPauli::new).collect(),
            z: z.iter().map(CompiledPauli::new).collect(),
        })
    }

    fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    fn measure_site<R: Rng + ?Sized>(
        &mut self,
        kind: OpKind,
        position: usize,
        forced: Option<i8>,
        want_outcome: bool,
        rng: &mut R,
    ) -> Result<Option<i8>> {
        let n = self.num_qubits();
        let op = match kind {
            OpKind::ClusterMeas => &self.cluster[check_position(position, self.cluster.len(), self.alpha + 1, n)?],
            OpKind::ZMeas => &self.z[check_position(position, n, 1, n)?],
            OpKind::Unitary => return Err(Error::InvalidOperator("a gate is not a measurement".into())),
        };
        Ok(self.state.measure_compiled(op, forced, want_outcome, rng)?.outcome)
    }

    fn apply_unitary(&mut self, position: usize, gate_seed: u64) -> Result<()> {
        let n = self.num_qubits();
        let q = check_position(position, n - self.alpha, self.alpha + 1, n)?;
        let gate = clifford_gate_from_seed(self.alpha, gate_seed);
        self.state.apply_clifford(&gate, q)
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        Ok(self.state.expectation(p)? as f64)
    }

    fn entropy(&self, region: Range<usize>) -> Result<f64> {
        Ok(self.state.entanglement_entropy(region)? as f64)
    }
}

pub struct DenseEngine {
    state: DenseState,
    alpha: usize,
    family: GateFamily,
    cluster: Vec<PauliString>,
    z: Vec<PauliString>,
}

impl DenseEngine {
    pub fn state(&self) -> &DenseState {
        &self.state
    }

    /// The gate a record with `gate_seed` applies.
    pub fn gate_matrix(&self, gate_seed: u64) -> Result<DMatrix<Complex64>> {
        match self.family {
            GateFamily::Clifford => Ok(clifford_to_dense(&clifford_gate_from_seed(self.alpha, gate_seed))),
            GateFamily::Haar => Ok(make_haar_gate(self.alpha, &mut gate_rng(gate_seed))),
            GateFamily::None => Err(Error::InvalidSpec("gate applied in a measurement-only circuit".into())),
        }
    }
}

impl Engine for DenseEngine {
    const KIND: EngineKind = EngineKind::Dense;

    fn new(spec: &CircuitSpec) -> Result<Self> {
        spec.validate()?;
        let (cluster, z) = operator_cache(spec)?;
        Ok(Self {
            state: DenseState::new_product_state(spec.n, spec.initial_sign)?,
            alpha: spec.alpha,
            family: spec.gate_family,
            cluster,
            z,
        })
    }

    fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    fn measure_site<R: Rng + ?Sized>(
        &mut self,
        kind: OpKind,
        position: usize,
        forced: Option<i8>,
        _want_outcome: bool,
        rng: &mut R,
    ) -> Result<Option<i8>> {
        let n = self.num_qubits();
        let op = match kind {
            OpKind::ClusterMeas => &self.cluster[check_position(position, self.cluster.len(), self.alpha + 1, n)?],
            OpKind::ZMeas => &self.z[check_position(position, n, 1, n)?],
            OpKind::Unitary => return Err(Error::InvalidOperator("a gate is not a measurement".into())),
        };
        match forced {
            Some(o) => {
                self.state.project(op, o)?;
                Ok(Some(o))
            }
            None => Ok(Some(self.state.measure_pauli(op, rng)?)),
        }
    }

    fn apply_unitary(&mut self, position: usize, gate_seed: u64) -> Result<()> {
        let n = self.num_qubits();
        let q = check_position(position, n - self.alpha, self.alpha + 1, n)?;
        let u = self.gate_matrix(gate_seed)?;
        self.state.apply_local_unitary(&u, q)
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.state.expectation(p)
    }

    fn entropy(&self, region: Range<usize>) -> Result<f64> {
        let qubits: Vec<usize> = region.collect();
        self.state.entanglement_entropy(&qubits)
    }

    fn schmidt_spectrum(&self, cut: usize) -> Result<SchmidtSpectrum> {
        self.state.schmidt_spectrum(cut)
    }
}
