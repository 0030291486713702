//! Parallel averaging of observables over independent circuit realizations.
//!
//! Trajectory `i` always draws from stream `i` of the master seed, so the
//! result is independent of the worker count and of how the trajectory range
//! is split between runs.

use std::collections::BTreeMap;
use std::ops::Range;

use rayon::prelude::*;

use crate::circuit::{run_trajectory, CircuitSpec};
use crate::engine::{DenseEngine, Engine, EngineKind, StabilizerEngine};
use crate::error::{Error, Result};
use crate::observables::{Accumulator, ObservableEstimate, ObservableId, ObservableSet};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnsembleResult {
    pub accumulators: BTreeMap<ObservableId, Accumulator>,
}

impl EnsembleResult {
    pub fn merge(&mut self, other: EnsembleResult) -> Result<()> {
        for (id, acc) in other.accumulators {
            self.accumulators.entry(id).or_default().merge(acc)?;
        }
        Ok(())
    }

    pub fn estimate(&self, id: ObservableId) -> Result<ObservableEstimate> {
        self.accumulators
            .get(&id)
            .ok_or_else(|| Error::Analysis(format!("observable {id} was not recorded")))?
            .estimate(id)
    }

    pub fn estimates(&self) -> Result<Vec<ObservableEstimate>> {
        self.accumulators.iter().map(|(id, acc)| acc.estimate(*id)).collect()
    }
}

/// Runs trajectories `0..spec.trajectory_count` on the chosen engine.
pub fn run_ensemble(spec: &CircuitSpec, engine: EngineKind, ids: &[ObservableId]) -> Result<EnsembleResult> {
    let range = 0..spec.trajectory_count as u64;
    match engine {
        EngineKind::Stabilizer => run_ensemble_range::<StabilizerEngine>(spec, ids, range),
        EngineKind::Dense => run_ensemble_range::<DenseEngine>(spec, ids, range),
    }
}

/// Runs the trajectories with ids in `range`, in parallel on the current
/// rayon pool.
pub fn run_ensemble_range<E: Engine>(
    spec: &CircuitSpec,
    ids: &[ObservableId],
    range: Range<u64>,
) -> Result<EnsembleResult> {
    spec.validate()?;
    let set = ObservableSet::new(spec.alpha, spec.n, ids)?;
    let per_trajectory: Vec<Vec<Accumulator>> =
        range.into_par_iter().map(|t| observe_trajectory::<E>(spec, &set, t)).collect::<Result<_>>()?;
    let mut result = EnsembleResult::default();
    for accs in per_trajectory {
        for (id, acc) in set.ids().iter().zip(accs) {
            result.accumulators.entry(*id).or_default().merge(acc)?;
        }
    }
    Ok(result)
}

fn observe_trajectory<E: Engine>(spec: &CircuitSpec, set: &ObservableSet, t: u64) -> Result<Vec<Accumulator>> {
    let mut engine = E::new(spec)?;
    let mut accs = vec![Accumulator::new(); set.ids().len()];
    let mut observer = |e: &E, _step: usize| -> Result<()> {
        for (acc, v) in accs.iter_mut().zip(set.evaluate(e)?) {
            acc.push(t, v);
        }
        Ok(())
    };
    run_trajectory(spec, t, &mut engine, &mut observer, false)?;
    Ok(accs)
}
