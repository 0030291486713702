//! Order parameters evaluated on trajectory states, and their circuit/time
//! averages.
//!
//! Placement convention (frozen; see `placement_golden` test): with
//! `q = N / (2α)`, the strings run between period indices `j = ⌊q/2⌋ + 1` and
//! `k = j + q − 1`, so the SPT string covers `α(q − 1) + 1` sites around the
//! chain centre (`N/2 − 1` sites for α = 2). Shift `s ∈ 0..α` translates the
//! whole placement `s` sites to the right. The correlator `M_a M_b` puts `M_a`
//! at the left string endpoint and ends `M_b` at the right one.
//!
//! Sublattice averages take the absolute value per shift before averaging,
//! so independent random signs on different sublattices do not cancel.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::operators::{build_operator, Boundary, OperatorKind};
use crate::pauli::PauliString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObservableId {
    #[serde(rename = "S_triv")]
    STriv,
    #[serde(rename = "S_spt")]
    SSpt,
    #[serde(rename = "C_M")]
    CM,
    /// Half-chain entropy divided by `N/2`.
    #[serde(rename = "S_half")]
    SHalf,
    /// Fraction of snapshots whose leading half-chain Schmidt values come in
    /// degenerate quadruplets.
    #[serde(rename = "schmidt")]
    Schmidt,
}

impl ObservableId {
    pub const ALL: [ObservableId; 5] =
        [ObservableId::STriv, ObservableId::SSpt, ObservableId::CM, ObservableId::SHalf, ObservableId::Schmidt];

    pub fn as_str(self) -> &'static str {
        match self {
            ObservableId::STriv => "S_triv",
            ObservableId::SSpt => "S_spt",
            ObservableId::CM => "C_M",
            ObservableId::SHalf => "S_half",
            ObservableId::Schmidt => "schmidt",
        }
    }
}

impl fmt::Display for ObservableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObservableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObservableId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown observable `{s}`")))
    }
}

/// Centered string window for one sublattice shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StringPlacement {
    pub alpha: usize,
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub shift: usize,
}

impl StringPlacement {
    pub fn centered(alpha: usize, n: usize, shift: usize) -> Result<Self> {
        if alpha == 0 || !n.is_multiple_of(2 * alpha) || n < 4 * alpha {
            return Err(Error::InvalidSpec(format!("no centered string placement for N = {n}, α = {alpha}")));
        }
        if shift >= alpha {
            return Err(Error::InvalidSpec(format!("shift {shift} outside 0..{alpha}")));
        }
        let q = n / (2 * alpha);
        let j = q / 2 + 1;
        Ok(Self { alpha, n, j, k: j + q - 1, shift })
    }

    pub fn all_shifts(alpha: usize, n: usize) -> Result<Vec<Self>> {
        (0..alpha).map(|s| Self::centered(alpha, n, s)).collect()
    }

    pub fn trivial_operator(&self) -> Result<PauliString> {
        let kind = OperatorKind::StringTrivial { j: self.j, k: self.k, offset: self.shift };
        build_operator(kind, self.alpha, self.n, Boundary::Open)
    }

    pub fn spt_operator(&self) -> Result<PauliString> {
        let kind = OperatorKind::StringSpt { j: self.j, k: self.k, offset: self.shift };
        build_operator(kind, self.alpha, self.n, Boundary::Open)
    }

    /// First sites of the two local order parameters.
    pub fn ssb_sites(&self) -> Result<(usize, usize)> {
        let a = self.alpha * self.j + self.shift;
        let b = self.alpha * self.k + self.shift + 1 - self.alpha;
        if b < a + self.alpha {
            return Err(Error::InvalidSpec(format!("chain of {} sites too short for the correlator", self.n)));
        }
        Ok((a, b))
    }
}

/// `M_a M_b` for 1-based first sites `a < b`.
pub fn ssb_correlator_operator(alpha: usize, n: usize, (a, b): (usize, usize)) -> Result<PauliString> {
    if alpha.is_multiple_of(2) {
        return Err(Error::InvalidOperator(format!("local order parameter needs odd alpha, got {alpha}")));
    }
    if b < a + alpha {
        return Err(Error::InvalidOperator(format!("M at {a} and {b} overlap")));
    }
    let ma = build_operator(OperatorKind::LocalM { site: a }, alpha, n, Boundary::Open)?;
    let mb = build_operator(OperatorKind::LocalM { site: b }, alpha, n, Boundary::Open)?;
    ma.multiply(&mb)
}

pub fn eval_string_trivial<E: Engine>(engine: &E, placement: &StringPlacement) -> Result<f64> {
    engine.expectation(&placement.trivial_operator()?)
}

pub fn eval_string_spt<E: Engine>(engine: &E, placement: &StringPlacement) -> Result<f64> {
    engine.expectation(&placement.spt_operator()?)
}

pub fn eval_ssb_correlator<E: Engine>(engine: &E, alpha: usize, sites: (usize, usize)) -> Result<f64> {
    engine.expectation(&ssb_correlator_operator(alpha, engine.num_qubits(), sites)?)
}

/// Which string a sublattice average refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringKind {
    Trivial,
    Spt,
}

/// Arithmetic mean of the signed string value over the `α` shifts.
pub fn sublattice_average<E: Engine>(engine: &E, kind: StringKind, alpha: usize, n: usize) -> Result<f64> {
    sublattice_values(engine, kind, alpha, n).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Mean over the `α` shifts of the absolute string value.
pub fn sublattice_average_abs<E: Engine>(engine: &E, kind: StringKind, alpha: usize, n: usize) -> Result<f64> {
    sublattice_values(engine, kind, alpha, n).map(|v| v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64)
}

fn sublattice_values<E: Engine>(engine: &E, kind: StringKind, alpha: usize, n: usize) -> Result<Vec<f64>> {
    StringPlacement::all_shifts(alpha, n)?
        .iter()
        .map(|p| match kind {
            StringKind::Trivial => eval_string_trivial(engine, p),
            StringKind::Spt => eval_string_spt(engine, p),
        })
        .collect()
}

/// Schmidt values below this are numerical zeros.
pub const SCHMIDT_ZERO: f64 = 1e-12;

fn same_level(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs() || a.abs().max(b.abs()) < SCHMIDT_ZERO
}

/// Sizes of consecutive groups of (descending) values whose relative spread
/// is below `tol`; values under [`SCHMIDT_ZERO`] form one group.
pub fn multiplet_structure(values: &[f64], tol: f64) -> Vec<usize> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let close = i < values.len() && same_level(values[start], values[i], tol);
        if !close {
            groups.push(i - start);
            start = i;
        }
    }
    groups
}

/// Whether the leading `top` values split into quadruplets, each with
/// relative spread below `tol`.
pub fn quadruplet_grouped(values: &[f64], top: usize, tol: f64) -> bool {
    if values.len() < top || !top.is_multiple_of(4) {
        return false;
    }
    values[..top].chunks(4).all(|c| same_level(c[0], c[3], tol))
}

/// Leading Schmidt values and tolerance used by the `schmidt` observable.
pub const SCHMIDT_TOP: usize = 8;
pub const SCHMIDT_TOL: f64 = 1e-6;

/// Precomputed operators for a set of observables on one chain.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    alpha: usize,
    n: usize,
    ids: Vec<ObservableId>,
    triv: Vec<PauliString>,
    spt: Vec<PauliString>,
    cm: Vec<PauliString>,
}

impl ObservableSet {
    pub fn new(alpha: usize, n: usize, ids: &[ObservableId]) -> Result<Self> {
        let mut ids = ids.to_vec();
        ids.sort();
        ids.dedup();
        let placements = StringPlacement::all_shifts(alpha, n)?;
        let want = |id| ids.contains(&id);
        let triv = if want(ObservableId::STriv) {
            placements.iter().map(|p| p.trivial_operator()).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let spt = if want(ObservableId::SSpt) {
            placements.iter().map(|p| p.spt_operator()).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let cm = if want(ObservableId::CM) {
            placements
                .iter()
                .map(|p| ssb_correlator_operator(alpha, n, p.ssb_sites()?))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self { alpha, n, ids, triv, spt, cm })
    }

    pub fn ids(&self) -> &[ObservableId] {
        &self.ids
    }

    /// One snapshot value per observable, in [`Self::ids`] order.
    pub fn evaluate<E: Engine>(&self, engine: &E) -> Result<Vec<f64>> {
        let abs_mean = |ops: &[PauliString]| -> Result<f64> {
            let mut acc = 0.0;
            for op in ops {
                acc += engine.expectation(op)?.abs();
            }
            Ok(acc / ops.len() as f64)
        };
        self.ids
            .iter()
            .map(|id| match id {
                ObservableId::STriv => abs_mean(&self.triv),
                ObservableId::SSpt => abs_mean(&self.spt),
                ObservableId::CM => abs_mean(&self.cm),
                ObservableId::SHalf => Ok(engine.entropy(0..self.n / 2)? / (self.n / 2) as f64),
                ObservableId::Schmidt => {
                    let sp = engine.schmidt_spectrum(self.n / 2)?;
                    Ok(if quadruplet_grouped(&sp.values, SCHMIDT_TOP, SCHMIDT_TOL) { 1.0 } else { 0.0 })
                }
            })
            .collect()
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }
}

/// Circuit/time average of one observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableEstimate {
    pub observable: ObservableId,
    pub mean_abs: f64,
    pub std_error: f64,
    pub n_circuits: usize,
    /// Samples per circuit.
    pub n_time_samples: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CircuitSums {
    abs: f64,
    signed: f64,
    count: usize,
}

/// Per-circuit sums keyed by trajectory id. Merging is a union, so the result
/// does not depend on the order in which circuits finish.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Accumulator {
    circuits: BTreeMap<u64, CircuitSums>,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, circuit: u64, value: f64) {
        let e = self.circuits.entry(circuit).or_default();
        e.abs += value.abs();
        e.signed += value;
        e.count += 1;
    }

    pub fn merge(&mut self, other: Accumulator) -> Result<()> {
        for (id, sums) in other.circuits {
            if self.circuits.insert(id, sums).is_some() {
                return Err(Error::Analysis(format!("circuit {id} accumulated twice")));
            }
        }
        Ok(())
    }

    pub fn n_circuits(&self) -> usize {
        self.circuits.len()
    }

    fn stats(&self, pick: impl Fn(&CircuitSums) -> f64) -> Result<(f64, f64)> {
        if self.circuits.is_empty() {
            return Err(Error::Analysis("no samples accumulated".into()));
        }
        let total: usize = self.circuits.values().map(|c| c.count).sum();
        if total == 0 {
            return Err(Error::Analysis("no samples accumulated".into()));
        }
        let mean = self.circuits.values().map(&pick).sum::<f64>() / total as f64;
        let means: Vec<f64> =
            self.circuits.values().filter(|c| c.count > 0).map(|c| pick(c) / c.count as f64).collect();
        let m = means.len() as f64;
        let se = if means.len() > 1 {
            let mu = means.iter().sum::<f64>() / m;
            let var = means.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1.0);
            (var / m).sqrt()
        } else {
            0.0
        };
        Ok((mean, se))
    }

    /// Mean of `|value|` over all samples, with the standard error of the
    /// per-circuit means.
    pub fn estimate(&self, observable: ObservableId) -> Result<ObservableEstimate> {
        let (mean_abs, std_error) = self.stats(|c| c.abs)?;
        let per_circuit = self.circuits.values().map(|c| c.count).max().unwrap_or(0);
        Ok(ObservableEstimate {
            observable,
            mean_abs,
            std_error,
            n_circuits: self.circuits.len(),
            n_time_samples: per_circuit,
        })
    }

    /// Mean of the signed values and its standard error.
    pub fn signed_estimate(&self) -> Result<(f64, f64)> {
        self.stats(|c| c.signed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{run_trajectory, CircuitSpec, NoObserver};
    use crate::engine::{DenseEngine, StabilizerEngine};
    use crate::pauli::Letter;
    use crate::stabilizer::StabilizerState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn placement_golden() {
        let p = StringPlacement::centered(2, 64, 0).unwrap();
        assert_eq!((p.j, p.k), (9, 24));
        assert_eq!(p.spt_operator().unwrap().support().first(), Some(&17));
        assert_eq!(p.spt_operator().unwrap().support().last(), Some(&47));
        assert_eq!(p.spt_operator().unwrap().support().last().unwrap() - 17 + 1, 64 / 2 - 1);
        let p3 = StringPlacement::centered(3, 96, 2).unwrap();
        assert_eq!((p3.j, p3.k), (9, 24));
        assert_eq!(p3.ssb_sites().unwrap(), (29, 72));
        let t = StringPlacement::centered(1, 8, 0).unwrap();
        assert_eq!(t.spt_operator().unwrap(), PauliString::parse("X3 X6", 8).unwrap());
        assert_eq!(t.trivial_operator().unwrap(), PauliString::parse("Z4 Z5 Z6", 8).unwrap());
        assert!(StringPlacement::centered(2, 18, 0).is_err());
        for alpha in 1..=4 {
            for n in (4 * alpha..=40 * alpha).step_by(2 * alpha) {
                for pl in StringPlacement::all_shifts(alpha, n).unwrap() {
                    assert!(pl.spt_operator().is_ok() && pl.trivial_operator().is_ok());
                }
            }
        }
    }

    fn fixed_point(alpha: usize, n: usize) -> StabilizerEngine {
        let spec = CircuitSpec::new(alpha, n, 0.0, 0.0).with_steps(0, 0);
        let mut e = StabilizerEngine::new(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for site in 1..=n - alpha {
            let g = crate::operators::cluster(alpha, site, n).unwrap();
            e.state_mut().measure_pauli(&g, None, &mut rng).unwrap();
        }
        e
    }

    #[test]
    fn strings_on_reference_states() {
        let n = 16;
        let spec = CircuitSpec::new(2, n, 1.0, 0.0).with_steps(0, 0);
        let product = StabilizerEngine::new(&spec).unwrap();
        let pl = StringPlacement::centered(2, n, 0).unwrap();
        let m = pl.trivial_operator().unwrap().weight();
        assert_eq!(eval_string_trivial(&product, &pl).unwrap(), if m.is_multiple_of(2) { 1.0 } else { -1.0 });
        assert_eq!(eval_string_spt(&product, &pl).unwrap(), 0.0);

        for alpha in 1..=3 {
            let cl = fixed_point(alpha, 12 * alpha);
            for pl in StringPlacement::all_shifts(alpha, 12 * alpha).unwrap() {
                assert_eq!(eval_string_spt(&cl, &pl).unwrap().abs(), 1.0);
                assert_eq!(eval_string_trivial(&cl, &pl).unwrap(), 0.0);
            }
        }
        let cl = fixed_point(2, n);
        let avg = sublattice_average(&cl, StringKind::Spt, 2, n).unwrap();
        assert!(avg.abs() <= 1.0);
        assert_eq!(sublattice_average_abs(&cl, StringKind::Spt, 2, n).unwrap(), 1.0);
        let one = fixed_point(1, n);
        let pl1 = StringPlacement::centered(1, n, 0).unwrap();
        assert_eq!(sublattice_average(&one, StringKind::Spt, 1, n).unwrap(), eval_string_spt(&one, &pl1).unwrap());
    }

    #[test]
    fn ssb_correlator_values() {
        // α = 1: GHZ-type state stabilized by X_i X_{i+1} and ∏ X.
        let n = 6;
        let mut s = StabilizerState::new_product_state(n, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for site in 1..n {
            s.measure_pauli(&crate::operators::cluster(1, site, n).unwrap(), Some(1), &mut rng).unwrap();
        }
        let all_x = PauliString::from_letters(&[Letter::X; 6]);
        assert_eq!(s.expectation(&all_x).unwrap(), 1);
        let op = ssb_correlator_operator(1, n, (2, 5)).unwrap();
        assert_eq!(s.expectation(&op).unwrap(), 1);

        let cl = fixed_point(3, 24);
        for pl in StringPlacement::all_shifts(3, 24).unwrap() {
            assert_eq!(eval_ssb_correlator(&cl, 3, pl.ssb_sites().unwrap()).unwrap().abs(), 1.0);
        }
        let spec = CircuitSpec::new(3, 24, 1.0, 0.0).with_steps(0, 0);
        let product = StabilizerEngine::new(&spec).unwrap();
        assert_eq!(eval_ssb_correlator(&product, 3, (4, 10)).unwrap(), 0.0);
        assert!(ssb_correlator_operator(2, 24, (4, 10)).is_err());
    }

    #[test]
    fn dense_fixed_point_agrees() {
        let (alpha, n) = (3, 12);
        let spec = CircuitSpec::new(alpha, n, 0.0, 0.0).with_steps(3 * n, 0);
        let mut d = DenseEngine::new(&spec).unwrap();
        run_trajectory(&spec, 0, &mut d, &mut NoObserver, false).unwrap();
        let pl = StringPlacement::centered(alpha, n, 0).unwrap();
        assert!((eval_string_spt(&d, &pl).unwrap().abs() - 1.0).abs() < 1e-10);
        let sites = (1, 10);
        assert!((eval_ssb_correlator(&d, alpha, sites).unwrap().abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn accumulator_statistics() {
        let mut acc = Accumulator::new();
        for c in 0..5 {
            for _ in 0..4 {
                acc.push(c, -1.0);
            }
        }
        let e = acc.estimate(ObservableId::STriv).unwrap();
        assert_eq!((e.mean_abs, e.std_error, e.n_circuits, e.n_time_samples), (1.0, 0.0, 5, 4));

        let mut alt = Accumulator::new();
        for (i, v) in [1.0, -1.0, 1.0, -1.0].into_iter().enumerate() {
            alt.push(i as u64, v);
        }
        assert_eq!(alt.estimate(ObservableId::SSpt).unwrap().mean_abs, 1.0);
        assert_eq!(alt.signed_estimate().unwrap().0, 0.0);

        assert!(Accumulator::new().estimate(ObservableId::SSpt).is_err());
        let mut a = Accumulator::new();
        a.push(1, 0.5);
        assert!(a.clone().merge(a.clone()).is_err());
    }

    #[test]
    fn bernoulli_stream_matches_closed_form() {
        // Values ±1 with probability 0.3 each, else 0: E|v| = 0.6.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut acc = Accumulator::new();
        for c in 0..400 {
            for _ in 0..25 {
                let u: f64 = rng.random();
                let v = if u < 0.3 { 1.0 } else if u < 0.6 { -1.0 } else { 0.0 };
                acc.push(c, v);
            }
        }
        let e = acc.estimate(ObservableId::SSpt).unwrap();
        assert!((e.mean_abs - 0.6).abs() < 3.0 * e.std_error, "{e:?}");
        let (signed, se) = acc.signed_estimate().unwrap();
        assert!(signed.abs() < 5.0 * se);
    }

    #[test]
    fn multiplets() {
        let v = [0.2, 0.2, 0.2, 0.2, 0.05, 0.05, 0.05, 0.05, 0.01];
        assert!(quadruplet_grouped(&v, 8, 1e-6));
        assert_eq!(multiplet_structure(&v, 1e-6), vec![4, 4, 1]);
        let w = [0.3, 0.3, 0.2, 0.2, 0.0, 0.0, 0.0, 0.0];
        assert!(!quadruplet_grouped(&w, 8, 1e-6));
        assert_eq!(multiplet_structure(&w, 1e-6), vec![2, 2, 4]);
        let z = [0.25, 0.25, 0.25, 0.25, 3e-17, 1e-18, 0.0, 0.0];
        assert!(quadruplet_grouped(&z, 8, 1e-6));
        assert_eq!(multiplet_structure(&z, 1e-6), vec![4, 4]);
    }

    #[test]
    fn observable_ids_round_trip() {
        for id in ObservableId::ALL {
            assert_eq!(id.as_str().parse::<ObservableId>().unwrap(), id);
        }
        assert!("S".parse::<ObservableId>().is_err());
    }
}
