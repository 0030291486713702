//! Exchange of `Z` and cluster measurements in measurement-only circuits on
//! periodic chains.
//!
//! Positions live on a doubled coordinate ring (mod `2N`): qubit `q` of a
//! lattice with parity `p` sits at `2q + p`, and the cluster operator with
//! left endpoint `l` is centred at `2l + p + α`. The map sends `Z` at
//! coordinate `x` to the cluster operator centred at `x` on the dual lattice,
//! whose parity is `p ⊕ (α mod 2)`. In these coordinates it is an exact
//! involution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{run_trajectory, CircuitSpec, NoObserver, OpKind, OperationRecord};
use crate::engine::{Engine, StabilizerEngine};
use crate::error::{Error, Result};
use crate::gf2::XorBasis;
use crate::operators::{build_operator, Boundary, OperatorKind};
use crate::pauli::{words_for, Letter, PauliString};
use crate::stabilizer::StabilizerState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualLattice {
    pub alpha: usize,
    pub n: usize,
    /// Parity of the doubled coordinates of this lattice's qubits.
    pub parity: usize,
    /// Whether this lattice hosts the dual circuit.
    pub is_dual: bool,
}

impl DualLattice {
    /// The integer-site lattice of the original circuit.
    pub fn original(alpha: usize, n: usize) -> Result<Self> {
        if alpha == 0 || !n.is_multiple_of(alpha) || n < 2 * alpha + 2 {
            return Err(Error::InvalidSpec(format!("periodic duality needs N a multiple of α and N ≥ 2α + 2, got N = {n}, α = {alpha}")));
        }
        Ok(Self { alpha, n, parity: 0, is_dual: false })
    }

    pub fn dual(&self) -> Self {
        Self { parity: self.parity ^ (self.alpha & 1), is_dual: !self.is_dual, ..*self }
    }

    fn wrap(&self, x: i64) -> i64 {
        x.rem_euclid(2 * self.n as i64)
    }

    /// Doubled coordinate of 0-based qubit `q`.
    pub fn site_coord(&self, q: usize) -> i64 {
        self.wrap(2 * q as i64 + self.parity as i64)
    }

    /// Qubit at doubled coordinate `x`, if it lies on this lattice.
    pub fn qubit_at(&self, x: i64) -> Option<usize> {
        let x = self.wrap(x);
        ((x - self.parity as i64) % 2 == 0).then(|| ((x - self.parity as i64) / 2) as usize)
    }

    /// Centre of the cluster operator whose left endpoint is qubit `l`.
    pub fn cluster_center(&self, l: usize) -> i64 {
        self.wrap(self.site_coord(l) + self.alpha as i64)
    }

    /// Left endpoint of the cluster operator centred at `x`.
    pub fn cluster_left(&self, x: i64) -> Option<usize> {
        self.qubit_at(x - self.alpha as i64)
    }

    pub fn z(&self, q: usize) -> PauliString {
        PauliString::single(self.n, q, Letter::Z)
    }

    pub fn cluster(&self, l: usize) -> Result<PauliString> {
        build_operator(OperatorKind::Cluster { site: l + 1 }, self.alpha, self.n, Boundary::Periodic)
    }

    fn operator(&self, kind: OpKind, q: usize) -> Result<PauliString> {
        match kind {
            OpKind::ZMeas => Ok(self.z(q)),
            OpKind::ClusterMeas => self.cluster(q),
            OpKind::Unitary => Err(Error::InvalidOperator("unitaries have no dual".into())),
        }
    }

    /// Initial state: `Z = +1` everywhere for the original circuit; every
    /// cluster operator and every symmetry `+1` for the dual one.
    pub fn initial_state(&self) -> Result<StabilizerState> {
        let mut s = StabilizerState::new_product_state(self.n, 1);
        if self.is_dual {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for l in 0..self.n - self.alpha {
                s.measure_pauli(&self.cluster(l)?, Some(1), &mut rng)?;
            }
        }
        Ok(s)
    }
}

/// Maps a measurement record on `lattice` to the corresponding record on
/// `lattice.dual()`, keeping the outcome.
pub fn dualize_record(rec: &OperationRecord, lattice: &DualLattice) -> Result<OperationRecord> {
    let dual = lattice.dual();
    let q = rec.position.checked_sub(1).filter(|&q| q < lattice.n).ok_or(Error::PositionOutOfRange {
        position: rec.position,
        width: 1,
        n: lattice.n,
    })?;
    let (kind, q) = match rec.kind {
        OpKind::ZMeas => (OpKind::ClusterMeas, dual.cluster_left(lattice.site_coord(q))),
        OpKind::ClusterMeas => (OpKind::ZMeas, dual.qubit_at(lattice.cluster_center(q))),
        OpKind::Unitary => return Err(Error::InvalidOperator("dualize needs a measurement-only log".into())),
    };
    let q = q.ok_or_else(|| Error::InvalidOperator("dual position off the lattice".into()))?;
    Ok(OperationRecord::measurement(kind, q + 1, rec.outcome))
}

pub fn dualize(log: &[OperationRecord], lattice: &DualLattice) -> Result<Vec<OperationRecord>> {
    log.iter().map(|r| dualize_record(r, lattice)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaWitness {
    /// Number of operations applied before the failing check.
    pub step: usize,
    pub generator: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub steps: usize,
    pub checks: u64,
    /// Images that are in the dual group up to sign.
    pub membership_passed: u64,
    /// Images that are in the dual group with the predicted sign.
    pub sign_passed: u64,
    pub witness: Option<LemmaWitness>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none() && self.membership_passed == self.checks && self.sign_passed == self.checks
    }
}

/// Spanning set `{Z_q} ∪ {g_l}` of a lattice with its image under the map.
struct Spanning {
    n: usize,
    basis: XorBasis,
    letters: Vec<PauliString>,
    images: Vec<PauliString>,
}

fn packed(p: &PauliString) -> Vec<u64> {
    p.x_words().iter().chain(p.z_words()).copied().collect()
}

impl Spanning {
    fn new(lattice: &DualLattice) -> Result<Self> {
        let n = lattice.n;
        let dual = lattice.dual();
        let mut letters = Vec::with_capacity(2 * n);
        let mut images = Vec::with_capacity(2 * n);
        for q in 0..n {
            letters.push(lattice.z(q));
            let l = dual.cluster_left(lattice.site_coord(q)).expect("cluster centres sit on the dual parity");
            images.push(dual.cluster(l)?);
        }
        for l in 0..n {
            letters.push(lattice.cluster(l)?);
            let q = dual.qubit_at(lattice.cluster_center(l)).expect("cluster centres sit on the dual parity");
            images.push(dual.z(q));
        }
        let mut basis = XorBasis::new(2 * 64 * words_for(n), 2 * n);
        for (i, p) in letters.iter().enumerate() {
            basis.insert(i, &packed(p));
        }
        Ok(Self { n, basis, letters, images })
    }

    /// Image of `s` with its predicted sign, or `None` when `s` lies outside
    /// the span.
    fn image(&self, s: &PauliString) -> Result<Option<PauliString>> {
        let Some(word) = self.basis.decompose(&packed(s)) else {
            return Ok(None);
        };
        let mut orig = PauliString::identity(self.n);
        let mut img = PauliString::identity(self.n);
        for &i in &word {
            orig.mul_assign(&self.letters[i])?;
            img.mul_assign(&self.images[i])?;
        }
        debug_assert!(orig.same_letters(s));
        let r = (s.phase() + 4 - orig.phase()) % 4;
        img.set_phase((img.phase() + r) % 4);
        Ok(Some(img))
    }
}

fn apply(state: &mut StabilizerState, lattice: &DualLattice, rec: &OperationRecord) -> Result<i8> {
    let op = lattice.operator(rec.kind, rec.position - 1)?;
    // Forced outcomes never draw randomness.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    state.measure_pauli(&op, rec.outcome, &mut rng)
}

/// Runs the original and dual circuits step-locked, checking after every
/// operation that the image of each original stabilizer generator stabilizes
/// the dual state with the predicted sign. `log` must carry every outcome.
pub fn verify_lemma(log: &[OperationRecord], alpha: usize, n: usize) -> Result<LemmaReport> {
    let lattice = DualLattice::original(alpha, n)?;
    let dual_log = dualize(log, &lattice)?;
    verify_pair(log, &dual_log, &lattice)
}

fn verify_pair(log: &[OperationRecord], dual_log: &[OperationRecord], lattice: &DualLattice) -> Result<LemmaReport> {
    let (lattice, n) = (*lattice, lattice.n);
    let dual = lattice.dual();
    let span = Spanning::new(&lattice)?;
    let mut original = lattice.initial_state()?;
    let mut mirrored = dual.initial_state()?;
    let mut report = LemmaReport { steps: 0, checks: 0, membership_passed: 0, sign_passed: 0, witness: None };
    for step in 0..=log.len() {
        if step > 0 {
            let rec = &log[step - 1];
            if rec.outcome.is_none() {
                return Err(Error::InvalidSpec(format!("record {step} has no outcome to replay")));
            }
            apply(&mut original, &lattice, rec)?;
            match apply(&mut mirrored, &dual, &dual_log[step - 1]) {
                Ok(_) => {}
                Err(Error::ForcedOutcomeConflict { .. }) => {
                    report.witness =
                        Some(LemmaWitness { step, generator: 0, reason: "dual outcome contradicts the original".into() });
                    return Ok(report);
                }
                Err(e) => return Err(e),
            }
            report.steps = step;
        }
        for g in 0..n {
            let s = original.stabilizer(g);
            report.checks += 1;
            let Some(img) = span.image(&s)? else {
                return Err(Error::TableauInvariant(format!("step {step}: generator {g} ({s}) outside the span")));
            };
            let fail = |reason: String| Some(LemmaWitness { step, generator: g, reason });
            if !img.is_hermitian() {
                report.witness = fail(format!("image {img} of {s} is not Hermitian"));
                return Ok(report);
            }
            match mirrored.expectation(&img)? {
                1 => {
                    report.membership_passed += 1;
                    report.sign_passed += 1;
                }
                -1 => {
                    report.membership_passed += 1;
                    report.witness = fail(format!("image {img} of {s} has the opposite sign"));
                    return Ok(report);
                }
                _ => {
                    report.witness = fail(format!("image {img} of {s} does not stabilize the dual state"));
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyBoundReport {
    pub regions_checked: u64,
    /// Largest `S_dual(Ã) − S(A)` seen.
    pub max_difference: i64,
    pub bound: i64,
}

impl EntropyBoundReport {
    pub fn passed(&self) -> bool {
        self.max_difference <= self.bound
    }
}

fn arc_mask(n: usize, start: usize, len: usize) -> Vec<u64> {
    let mut mask = vec![0u64; words_for(n)];
    for q in (start..start + len).map(|q| q % n) {
        mask[q / 64] |= 1 << (q % 64);
    }
    mask
}

/// After every operation, compares entropies of all arcs `A` of the ring with
/// those of their images `Ã` (same qubit labels on the dual lattice).
pub fn verify_entropy_bound(log: &[OperationRecord], alpha: usize, n: usize) -> Result<EntropyBoundReport> {
    let lattice = DualLattice::original(alpha, n)?;
    let dual = lattice.dual();
    let dual_log = dualize(log, &lattice)?;
    let mut original = lattice.initial_state()?;
    let mut mirrored = dual.initial_state()?;
    let masks: Vec<Vec<u64>> =
        (0..n).flat_map(|start| (1..n).map(move |len| (start, len))).map(|(s, l)| arc_mask(n, s, l)).collect();
    let mut report = EntropyBoundReport { regions_checked: 0, max_difference: i64::MIN, bound: 2 * alpha as i64 };
    for step in 0..=log.len() {
        if step > 0 {
            apply(&mut original, &lattice, &log[step - 1])?;
            apply(&mut mirrored, &dual, &dual_log[step - 1])?;
        }
        for m in &masks {
            let d = mirrored.entropy_of_mask(m)? as i64 - original.entropy_of_mask(m)? as i64;
            report.max_difference = report.max_difference.max(d);
            report.regions_checked += 1;
        }
    }
    Ok(report)
}

/// Batch verification over chain lengths and random realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualitySuiteConfig {
    pub alphas: Vec<usize>,
    /// Candidate lengths; those that are not multiples of `α` (or too short)
    /// are skipped for that `α`.
    pub sizes: Vec<usize>,
    pub seeds: u64,
    /// Measurements per realization.
    pub steps: usize,
    /// `p_s` values, cycled over seeds.
    pub p_s: Vec<f64>,
    pub master_seed: u64,
}

impl Default for DualitySuiteConfig {
    fn default() -> Self {
        Self {
            alphas: vec![1, 2, 3],
            sizes: (8..=16).collect(),
            seeds: 50,
            steps: 200,
            p_s: vec![0.5, 0.25, 0.75],
            master_seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityCase {
    pub alpha: usize,
    pub n: usize,
    pub seed: u64,
    pub p_s: f64,
    pub lemma: LemmaReport,
    pub entropy: EntropyBoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityAlphaSummary {
    pub alpha: usize,
    pub sizes: Vec<usize>,
    pub realizations: u64,
    pub lemma_checks: u64,
    pub lemma_passed: u64,
    pub max_entropy_difference: i64,
    pub entropy_bound: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualitySuiteReport {
    pub passed: bool,
    pub summaries: Vec<DualityAlphaSummary>,
    /// Cases with a failed check.
    pub failures: Vec<DualityCase>,
}

/// Measurement-only realization on a periodic chain with every outcome
/// recorded.
pub fn sample_realization(alpha: usize, n: usize, p_s: f64, steps: usize, master_seed: u64, seed: u64) -> Result<Vec<OperationRecord>> {
    let mut spec = CircuitSpec::new(alpha, n, p_s, 0.0).with_boundary(Boundary::Periodic).with_seed(master_seed);
    spec.initial_sign = 1;
    spec.burn_in_steps = 0;
    spec.sample_steps = steps.div_ceil(n);
    let mut engine = StabilizerEngine::new(&spec)?;
    let mut log = run_trajectory(&spec, seed, &mut engine, &mut NoObserver, true)?.log.unwrap_or_default();
    log.truncate(steps);
    Ok(log)
}

pub fn run_duality_suite(config: &DualitySuiteConfig) -> Result<DualitySuiteReport> {
    if config.p_s.is_empty() {
        return Err(Error::InvalidSpec("duality suite needs at least one p_s".into()));
    }
    let mut jobs = Vec::new();
    for &alpha in &config.alphas {
        for &n in &config.sizes {
            if DualLattice::original(alpha, n).is_ok() {
                for seed in 0..config.seeds {
                    jobs.push((alpha, n, seed, config.p_s[seed as usize % config.p_s.len()]));
                }
            }
        }
    }
    let cases: Vec<DualityCase> = jobs
        .into_par_iter()
        .map(|(alpha, n, seed, p_s)| {
            let log = sample_realization(alpha, n, p_s, config.steps, config.master_seed, seed)?;
            Ok(DualityCase {
                alpha,
                n,
                seed,
                p_s,
                lemma: verify_lemma(&log, alpha, n)?,
                entropy: verify_entropy_bound(&log, alpha, n)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut summaries = Vec::new();
    for &alpha in &config.alphas {
        let mine: Vec<&DualityCase> = cases.iter().filter(|c| c.alpha == alpha).collect();
        let mut sizes: Vec<usize> = mine.iter().map(|c| c.n).collect();
        sizes.dedup();
        summaries.push(DualityAlphaSummary {
            alpha,
            sizes,
            realizations: mine.len() as u64,
            lemma_checks: mine.iter().map(|c| c.lemma.checks).sum(),
            lemma_passed: mine.iter().filter(|c| c.lemma.passed()).map(|c| c.lemma.checks).sum(),
            max_entropy_difference: mine.iter().map(|c| c.entropy.max_difference).max().unwrap_or(0),
            entropy_bound: 2 * alpha as i64,
        });
    }
    let failures: Vec<DualityCase> =
        cases.into_iter().filter(|c| !c.lemma.passed() || !c.entropy.passed()).collect();
    let passed = failures.is_empty() && summaries.iter().all(|s| s.realizations > 0);
    Ok(DualitySuiteReport { passed, summaries, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn realization(alpha: usize, n: usize, p_s: f64, steps: usize, seed: u64) -> Vec<OperationRecord> {
        sample_realization(alpha, n, p_s, steps, seed, 0).unwrap()
    }

    #[test]
    fn lattice_coordinates() {
        let l = DualLattice::original(1, 8).unwrap();
        let d = l.dual();
        assert_eq!((l.site_coord(3), d.site_coord(3)), (6, 7));
        assert_eq!(d.qubit_at(-1), Some(7));
        assert_eq!(l.qubit_at(3), None);
        assert_eq!(d.dual(), l);
        let e = DualLattice::original(2, 8).unwrap();
        assert_eq!(e.dual().parity, e.parity);
        assert!(e.dual().is_dual);
        assert!(DualLattice::original(3, 10).is_err());
    }

    #[test]
    fn alpha_one_z_maps_to_xx_across_the_site() {
        // Z_i goes to X_{i-1/2} X_{i+1/2}; with dual qubit q at site q + 1/2
        // (0-based), Z on 0-based site 3 becomes X on dual qubits 2 and 3.
        let l = DualLattice::original(1, 8).unwrap();
        let rec = OperationRecord::measurement(OpKind::ZMeas, 4, Some(1));
        let d = dualize_record(&rec, &l).unwrap();
        assert_eq!((d.kind, d.position, d.outcome), (OpKind::ClusterMeas, 3, Some(1)));
        assert_eq!(l.dual().cluster(d.position - 1).unwrap(), PauliString::parse("X3 X4", 8).unwrap());
        let back = dualize_record(&d, &l.dual()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn alpha_two_same_lattice() {
        let l = DualLattice::original(2, 8).unwrap();
        let d = dualize_record(&OperationRecord::measurement(OpKind::ZMeas, 5, None), &l).unwrap();
        // Z_5 ↔ X_4 Z_5 X_6
        assert_eq!(l.cluster(d.position - 1).unwrap(), PauliString::parse("X4 Z5 X6", 8).unwrap());
        let wrap = dualize_record(&OperationRecord::measurement(OpKind::ZMeas, 1, None), &l).unwrap();
        assert_eq!(l.cluster(wrap.position - 1).unwrap(), PauliString::parse("X8 Z1 X2", 8).unwrap());
    }

    #[test]
    fn dualize_is_an_involution() {
        assert!(dualize(&[], &DualLattice::original(2, 8).unwrap()).unwrap().is_empty());
        for alpha in 1..=3 {
            let n = 4 * alpha;
            let l = DualLattice::original(alpha, n).unwrap();
            let log = realization(alpha, n, 0.5, 60, 3);
            let d = dualize(&log, &l).unwrap();
            assert_eq!(dualize(&d, &l.dual()).unwrap(), log);
            for (a, b) in log.iter().zip(&d) {
                assert_ne!(a.kind, b.kind);
            }
        }
        let l = DualLattice::original(2, 8).unwrap();
        assert!(dualize(&[OperationRecord::unitary(1, 0)], &l).is_err());
    }

    #[test]
    fn dual_initial_state() {
        for alpha in 1..=3 {
            let l = DualLattice::original(alpha, 6 * alpha).unwrap();
            let d = l.dual();
            let s = d.initial_state().unwrap();
            for q in 0..l.n {
                assert_eq!(s.expectation(&d.cluster(q).unwrap()).unwrap(), 1);
            }
            let sym = crate::operators::symmetries(alpha, l.n);
            for g in sym.unwrap() {
                assert_eq!(s.expectation(&g).unwrap(), 1);
            }
        }
    }

    #[test]
    fn single_z_base_case() {
        let log = vec![OperationRecord::measurement(OpKind::ZMeas, 1, Some(1))];
        let r = verify_lemma(&log, 2, 8).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.checks, 16);
        let d = dualize(&log, &DualLattice::original(2, 8).unwrap()).unwrap();
        assert_eq!(d[0].kind, OpKind::ClusterMeas);
    }

    #[test]
    fn lemma_on_random_realizations() {
        for (alpha, n) in [(1, 8), (2, 8), (3, 9), (2, 12)] {
            for seed in 0..4 {
                let p_s = [0.2, 0.5, 0.8, 0.5][seed as usize];
                let log = realization(alpha, n, p_s, 200, seed);
                let r = verify_lemma(&log, alpha, n).unwrap();
                assert!(r.passed(), "α={alpha} N={n} seed={seed}: {:?}", r.witness);
                assert_eq!(r.checks, (201 * n) as u64);
            }
        }
    }

    #[test]
    fn wrong_dual_logs_are_caught() {
        let l = DualLattice::original(2, 8).unwrap();
        let log = realization(2, 8, 0.5, 60, 1);
        let good = dualize(&log, &l).unwrap();

        let mut shifted = good.clone();
        for r in &mut shifted {
            r.position = r.position % 8 + 1;
        }
        let r = verify_pair(&log, &shifted, &l).unwrap();
        assert!(!r.passed() && r.witness.is_some());

        // Flip the first random outcome on the dual side only.
        let mut flipped = good.clone();
        let mut probe = l.dual().initial_state().unwrap();
        let i = (0..flipped.len())
            .find(|&i| {
                let op = l.dual().operator(flipped[i].kind, flipped[i].position - 1).unwrap();
                let random = probe.expectation(&op).unwrap() == 0;
                apply(&mut probe, &l.dual(), &good[i]).unwrap();
                random
            })
            .unwrap();
        flipped[i].outcome = flipped[i].outcome.map(|o| -o);
        let r = verify_pair(&log, &flipped, &l).unwrap();
        assert!(!r.passed());
        assert_eq!(r.witness.unwrap().step, i + 1);
    }

    #[test]
    fn entropy_bound() {
        // Before any measurement the original is a product state and the dual
        // a cluster state, so the difference is the dual's largest arc entropy.
        for alpha in 1..=3 {
            let l = DualLattice::original(alpha, 12).unwrap();
            let s = l.dual().initial_state().unwrap();
            let widest = (1..12).map(|len| s.entropy_of_mask(&arc_mask(12, 0, len)).unwrap() as i64).max().unwrap();
            let trivial = verify_entropy_bound(&[], alpha, 12).unwrap();
            assert_eq!(trivial.max_difference, widest);
            assert!(widest > 0 && trivial.passed());
        }
        for (alpha, n) in [(1, 12), (2, 12), (3, 12)] {
            for seed in 0..3 {
                let log = realization(alpha, n, 0.5, 150, seed);
                let r = verify_entropy_bound(&log, alpha, n).unwrap();
                assert!(r.passed(), "{r:?}");
                assert!(r.max_difference <= 2 * alpha as i64);
            }
        }
    }
}
