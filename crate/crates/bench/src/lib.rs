//! Shared fixtures for the benchmarks.

use clustersim::circuit::{execute, run_trajectory, sample_operation, NoObserver};
use clustersim::{CircuitSpec, Engine, GateFamily};
use rand_chacha::ChaCha8Rng;

/// Spec with a short burn-in, enough to leave the initial product state.
pub fn spec(alpha: usize, n: usize, p_s: f64, p_u: f64) -> CircuitSpec {
    let family = if p_u > 0.0 { GateFamily::Clifford } else { GateFamily::None };
    CircuitSpec::new(alpha, n, p_s, p_u).with_gate_family(family).with_steps(8, 0).with_seed(17)
}

/// Engine evolved through the spec's burn-in.
pub fn evolved<E: Engine>(spec: &CircuitSpec) -> E {
    let mut engine = E::new(spec).expect("valid spec");
    run_trajectory(spec, 0, &mut engine, &mut NoObserver, false).expect("trajectory runs");
    engine
}

/// One time step (`N` random operations).
pub fn time_step<E: Engine>(spec: &CircuitSpec, engine: &mut E, rng: &mut ChaCha8Rng) {
    for _ in 0..spec.n {
        let mut rec = sample_operation(spec, rng);
        execute(engine, &mut rec, None, false, rng).expect("operation runs");
    }
}
