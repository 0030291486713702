//! Simulation of monitored generalized cluster circuits.

pub mod analysis;
pub mod checks;
pub mod circuit;
pub mod clifford;
pub mod engine;
pub mod duality;
pub mod ensemble;
pub mod error;
pub mod gf2;
pub mod observables;
pub mod operators;
pub mod pauli;
pub mod stabilizer;
pub mod statevector;
pub mod xcheck;

pub use clifford::{make_clifford_gate, CliffordGate, LocalPauli};
pub use error::{Error, Result};
pub use operators::{build_operator, Boundary, OperatorKind};
pub use pauli::{Letter, PauliString};
pub use stabilizer::{CompiledPauli, StabilizerState};
pub use statevector::{DenseState, SchmidtSpectrum};
pub use circuit::{CircuitSpec, GateFamily, OpKind, OperationRecord};
pub use engine::{DenseEngine, Engine, EngineKind, StabilizerEngine};
pub use ensemble::{run_ensemble, EnsembleResult};
pub use observables::{Accumulator, ObservableEstimate, ObservableId, ObservableSet, StringPlacement};
pub use checks::{check_trajectory, CheckCounts};
pub use xcheck::{cross_check, XcheckConfig, XcheckReport};
pub use duality::{dualize, verify_entropy_bound, verify_lemma, DualLattice, EntropyBoundReport, LemmaReport};
pub use analysis::{classify_phase, fit_collapse, fit_power_law, locate_critical, CollapseResult, CriticalPoint, FitOptions, FitResult, PhaseLabel, SeriesPoint, SweepSeries};
