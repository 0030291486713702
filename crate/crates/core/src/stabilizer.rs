//! Aaronson–Gottesman tableau simulation of pure stabilizer states.
//!
//! Rows `0..n` are destabilizers and rows `n..2n` stabilizers. Storage is
//! word-major: word `k` of every row sits in one contiguous slice, so checking
//! a local operator against all rows is a linear scan over one or two slices.
//! Row phases (powers of `i`, always even for a valid tableau) are kept
//! separately.
//!
//! Qubit indices are 0-based throughout.

use std::fmt::Write as _;
use std::ops::Range;

use rand::Rng;

use crate::clifford::{CliffordGate, LocalPauli};
use crate::error::{Error, Result};
use crate::gf2::rank_of_rows;
use crate::pauli::{mul_phase_word, words_for, PauliString};

/// A Pauli string reduced to its non-identity words, ready for repeated
/// commutation checks against tableau rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledPauli {
    n: usize,
    idx: Vec<usize>,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl CompiledPauli {
    pub fn new(p: &PauliString) -> Self {
        let (mut idx, mut x, mut z) = (Vec::new(), Vec::new(), Vec::new());
        for (w, (&xw, &zw)) in p.x_words().iter().zip(p.z_words()).enumerate() {
            if xw | zw != 0 {
                idx.push(w);
                x.push(xw);
                z.push(zw);
            }
        }
        Self { n: p.num_qubits(), idx, x, z, phase: p.phase() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    pub fn to_pauli(&self) -> PauliString {
        let w = words_for(self.n);
        let (mut x, mut z) = (vec![0; w], vec![0; w]);
        for (k, &i) in self.idx.iter().enumerate() {
            x[i] = self.x[k];
            z[i] = self.z[k];
        }
        PauliString::from_words(self.n, x, z, self.phase).expect("word count matches")
    }
}

impl From<&PauliString> for CompiledPauli {
    fn from(p: &PauliString) -> Self {
        Self::new(p)
    }
}

/// Result of a projective measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    /// `None` only for deterministic outcomes that were not requested.
    pub outcome: Option<i8>,
    pub random: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    w: usize,
    /// `xs[k * 2n + r]` is word `k` of the X part of row `r`.
    xs: Vec<u64>,
    zs: Vec<u64>,
    phases: Vec<u8>,
    hits: Vec<u32>,
    log_i: Vec<i32>,
}

impl StabilizerState {
    /// The product state stabilized by `sign · Z_q` for every qubit.
    pub fn new_product_state(n: usize, sign: i8) -> Self {
        assert!(n >= 1, "need at least one qubit");
        let w = words_for(n);
        let rr = 2 * n;
        let mut xs = vec![0u64; w * rr];
        let mut zs = vec![0u64; w * rr];
        for q in 0..n {
            xs[(q / 64) * rr + q] |= 1 << (q % 64);
            zs[(q / 64) * rr + n + q] |= 1 << (q % 64);
        }
        let mut phases = vec![0u8; rr];
        if sign < 0 {
            phases[n..].fill(2);
        }
        Self { n, w, xs, zs, phases, hits: Vec::new(), log_i: vec![0; rr] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn row_pauli(&self, r: usize) -> PauliString {
        let rr = 2 * self.n;
        let x = (0..self.w).map(|k| self.xs[k * rr + r]).collect();
        let z = (0..self.w).map(|k| self.zs[k * rr + r]).collect();
        PauliString::from_words(self.n, x, z, self.phases[r]).expect("row width matches")
    }

    /// Stabilizer generator `i` (0-based).
    pub fn stabilizer(&self, i: usize) -> PauliString {
        self.row_pauli(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliString {
        self.row_pauli(i)
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    /// Appends to `out` the rows in `rows` that anticommute with `p`.
    fn collect_anticommuting(&self, p: &CompiledPauli, rows: Range<usize>, out: &mut Vec<u32>) {
        let rr = 2 * self.n;
        let (lo, hi) = (rows.start, rows.end);
        if let [i] = p.idx[..] {
            let (px, pz) = (p.x[0], p.z[0]);
            let xs = &self.xs[i * rr + lo..i * rr + hi];
            let zs = &self.zs[i * rr + lo..i * rr + hi];
            for (j, (&x, &z)) in xs.iter().zip(zs).enumerate() {
                if ((x & pz) ^ (z & px)).count_ones() & 1 == 1 {
                    out.push((lo + j) as u32);
                }
            }
            return;
        }
        let mut parity = vec![0u64; hi - lo];
        for (k, &i) in p.idx.iter().enumerate() {
            let (px, pz) = (p.x[k], p.z[k]);
            let xs = &self.xs[i * rr + lo..i * rr + hi];
            let zs = &self.zs[i * rr + lo..i * rr + hi];
            for ((acc, &x), &z) in parity.iter_mut().zip(xs).zip(zs) {
                *acc ^= (x & pz) ^ (z & px);
            }
        }
        for (j, acc) in parity.into_iter().enumerate() {
            if acc.count_ones() & 1 == 1 {
                out.push((lo + j) as u32);
            }
        }
    }

    fn check_operand(&self, p: &CompiledPauli) -> Result<()> {
        if p.n != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: p.n });
        }
        if !p.is_hermitian() {
            return Err(Error::NotHermitian { phase: p.phase });
        }
        Ok(())
    }

    /// Conjugates every row by `gate` acting on qubits `position..position+width`.
    pub fn apply_clifford(&mut self, gate: &CliffordGate, position: usize) -> Result<()> {
        let m = gate.width();
        if position + m > self.n {
            return Err(Error::PositionOutOfRange { position, width: m, n: self.n });
        }
        let rr = 2 * self.n;
        let mask = (1u64 << m) - 1;
        let (wi, bit) = (position / 64, position % 64);
        if bit + m <= 64 {
            let xs = &mut self.xs[wi * rr..(wi + 1) * rr];
            let zs = &mut self.zs[wi * rr..(wi + 1) * rr];
            for ((x, z), ph) in xs.iter_mut().zip(zs.iter_mut()).zip(self.phases.iter_mut()) {
                let xl = (*x >> bit) & mask;
                let zl = (*z >> bit) & mask;
                if xl | zl == 0 {
                    continue;
                }
                let img = gate.conjugate(LocalPauli { x: xl as u16, z: zl as u16, phase: 0 });
                *ph = (*ph + img.phase) & 3;
                *x = (*x & !(mask << bit)) | ((img.x as u64) << bit);
                *z = (*z & !(mask << bit)) | ((img.z as u64) << bit);
            }
            return Ok(());
        }
        let lo_bits = 64 - bit;
        let hi_mask = mask >> lo_bits;
        for r in 0..rr {
            let (a, b) = (wi * rr + r, (wi + 1) * rr + r);
            let xl = ((self.xs[a] >> bit) | (self.xs[b] << lo_bits)) & mask;
            let zl = ((self.zs[a] >> bit) | (self.zs[b] << lo_bits)) & mask;
            if xl | zl == 0 {
                continue;
            }
            let img = gate.conjugate(LocalPauli { x: xl as u16, z: zl as u16, phase: 0 });
            self.phases[r] = (self.phases[r] + img.phase) & 3;
            let (nx, nz) = (img.x as u64, img.z as u64);
            self.xs[a] = (self.xs[a] & !(mask << bit)) | (nx << bit);
            self.zs[a] = (self.zs[a] & !(mask << bit)) | (nz << bit);
            self.xs[b] = (self.xs[b] & !hi_mask) | (nx >> lo_bits);
            self.zs[b] = (self.zs[b] & !hi_mask) | (nz >> lo_bits);
        }
        Ok(())
    }

    /// Measures `p`. A `forced` outcome replaces the coin flip on a random
    /// branch without consuming randomness; on a deterministic branch it must
    /// agree with the actual outcome.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        forced: Option<i8>,
        rng: &mut R,
    ) -> Result<i8> {
        let m = self.measure_compiled(&CompiledPauli::new(p), forced, true, rng)?;
        Ok(m.outcome.expect("outcome requested"))
    }

    /// Hot-path measurement. With `want_outcome == false`, deterministic
    /// outcomes are not computed (the state is unchanged either way).
    pub fn measure_compiled<R: Rng + ?Sized>(
        &mut self,
        p: &CompiledPauli,
        forced: Option<i8>,
        want_outcome: bool,
        rng: &mut R,
    ) -> Result<Measurement> {
        self.check_operand(p)?;
        if let Some(f) = forced {
            if f != 1 && f != -1 {
                return Err(Error::InvalidOperator(format!("forced outcome must be ±1, got {f}")));
            }
        }
        let (n, w, rr) = (self.n, self.w, 2 * self.n);
        let mut hits = std::mem::take(&mut self.hits);
        hits.clear();
        self.collect_anticommuting(p, n..rr, &mut hits);
        if hits.is_empty() {
            self.hits = hits;
            if !want_outcome && forced.is_none() {
                return Ok(Measurement { outcome: None, random: false });
            }
            let actual = self.deterministic_sign(p);
            if let Some(f) = forced {
                if f != actual {
                    return Err(Error::ForcedOutcomeConflict { forced: f, actual });
                }
            }
            return Ok(Measurement { outcome: Some(actual), random: false });
        }

        let outcome = forced.unwrap_or_else(|| if rng.random::<bool>() { 1 } else { -1 });
        let pivot = hits[0] as usize;
        let paired = pivot - n;
        let n_stab_hits = hits.len();
        self.collect_anticommuting(p, 0..n, &mut hits);
        // Rows to update: other anticommuting stabilizers and destabilizers,
        // except the destabilizer about to be overwritten.
        let targets: &[u32] = &hits[1..];
        for &r in targets {
            self.log_i[r as usize] = self.phases[r as usize] as i32 + self.phases[pivot] as i32;
        }
        for k in 0..w {
            let (px, pz) = (self.xs[k * rr + pivot], self.zs[k * rr + pivot]);
            if px | pz == 0 {
                continue;
            }
            let xs = &mut self.xs[k * rr..(k + 1) * rr];
            let zs = &mut self.zs[k * rr..(k + 1) * rr];
            for &r in targets {
                let r = r as usize;
                if r == paired {
                    continue;
                }
                self.log_i[r] += mul_phase_word(xs[r], zs[r], px, pz);
                xs[r] ^= px;
                zs[r] ^= pz;
            }
        }
        for (idx, &r) in targets.iter().enumerate() {
            let r = r as usize;
            if r != paired {
                self.phases[r] = self.log_i[r].rem_euclid(4) as u8;
            } else {
                debug_assert!(idx + 1 >= n_stab_hits);
            }
        }
        for k in 0..w {
            self.xs[k * rr + paired] = self.xs[k * rr + pivot];
            self.zs[k * rr + paired] = self.zs[k * rr + pivot];
            self.xs[k * rr + pivot] = 0;
            self.zs[k * rr + pivot] = 0;
        }
        self.phases[paired] = self.phases[pivot];
        for (k, &i) in p.idx.iter().enumerate() {
            self.xs[i * rr + pivot] = p.x[k];
            self.zs[i * rr + pivot] = p.z[k];
        }
        self.phases[pivot] = (p.phase + if outcome < 0 { 2 } else { 0 }) & 3;
        self.hits = hits;
        Ok(Measurement { outcome: Some(outcome), random: true })
    }

    /// Sign of `p` in the stabilizer group; `p` must commute with all rows.
    fn deterministic_sign(&self, p: &CompiledPauli) -> i8 {
        let (n, w, rr) = (self.n, self.w, 2 * self.n);
        let mut hits = Vec::new();
        self.collect_anticommuting(p, 0..n, &mut hits);
        // Stabilizers commute, so the product can be accumulated word by word.
        let mut log_i: i32 = hits.iter().map(|&i| self.phases[n + i as usize] as i32).sum();
        for k in 0..w {
            let (mut ax, mut az) = (0u64, 0u64);
            for &i in &hits {
                let r = k * rr + n + i as usize;
                let (x, z) = (self.xs[r], self.zs[r]);
                log_i += mul_phase_word(ax, az, x, z);
                ax ^= x;
                az ^= z;
            }
        }
        // p = i^(p.phase - log_i) · product, and the product has eigenvalue +1.
        match (p.phase as i32 - log_i).rem_euclid(4) {
            0 => 1,
            2 => -1,
            other => unreachable!("commuting Hermitian operator with phase i^{other}"),
        }
    }

    /// `⟨p⟩ ∈ {−1, 0, +1}`.
    pub fn expectation(&self, p: &PauliString) -> Result<i8> {
        self.expectation_compiled(&CompiledPauli::new(p))
    }

    pub fn expectation_compiled(&self, p: &CompiledPauli) -> Result<i8> {
        self.check_operand(p)?;
        let mut hits = Vec::new();
        self.collect_anticommuting(p, self.n..2 * self.n, &mut hits);
        if !hits.is_empty() {
            return Ok(0);
        }
        Ok(self.deterministic_sign(p))
    }

    /// Entanglement entropy in bits of the qubit set given by `mask`
    /// (one bit per qubit, packed like a Pauli string's words).
    pub fn entropy_of_mask(&self, mask: &[u64]) -> Result<usize> {
        let (n, w) = (self.n, self.w);
        if mask.len() != w {
            return Err(Error::SizeMismatch { expected: w * 64, got: mask.len() * 64 });
        }
        let n_a: usize = mask.iter().map(|m| m.count_ones() as usize).sum();
        if n_a == 0 || n_a == n {
            return Ok(0);
        }
        let rr = 2 * n;
        let mut restricted = vec![0u64; n * 2 * w];
        for i in 0..n {
            let dst = &mut restricted[i * 2 * w..(i + 1) * 2 * w];
            for k in 0..w {
                dst[k] = self.xs[k * rr + n + i] & mask[k];
                dst[w + k] = self.zs[k * rr + n + i] & mask[k];
            }
        }
        let rank = rank_of_rows(2 * w, &restricted);
        Ok(rank - n_a)
    }

    /// Entropy of a contiguous range of qubits.
    pub fn entanglement_entropy(&self, region: Range<usize>) -> Result<usize> {
        if region.end > self.n || region.start > region.end {
            return Err(Error::PositionOutOfRange {
                position: region.start,
                width: region.end.saturating_sub(region.start),
                n: self.n,
            });
        }
        let mask = qubit_mask(self.n, region);
        self.entropy_of_mask(&mask)
    }

    /// Checks the tableau contract: stabilizers and destabilizers commute
    /// among themselves, each destabilizer anticommutes only with its paired
    /// stabilizer, and every row is Hermitian.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        let rows: Vec<PauliString> = (0..2 * n).map(|r| self.row_pauli(r)).collect();
        for (r, p) in rows.iter().enumerate() {
            if !p.is_hermitian() {
                return Err(Error::TableauInvariant(format!("row {r} has phase i^{}", p.phase())));
            }
        }
        for a in 0..2 * n {
            for b in a + 1..2 * n {
                let should_anticommute = b == a + n;
                if rows[a].commutes_unchecked(&rows[b]) == should_anticommute {
                    return Err(Error::TableauInvariant(format!(
                        "rows {a} and {b} break the symplectic pairing"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Text dump: stabilizers, a `--` separator, then destabilizers.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let _ = writeln!(out, "{}", self.stabilizer(i));
        }
        out.push_str("--\n");
        for i in 0..self.n {
            let _ = writeln!(out, "{}", self.destabilizer(i));
        }
        out
    }
}

/// Bit mask selecting the qubits in `region`.
pub fn qubit_mask(n: usize, region: Range<usize>) -> Vec<u64> {
    let mut mask = vec![0u64; words_for(n)];
    for q in region {
        mask[q / 64] |= 1 << (q % 64);
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{make_clifford_gate, Elementary};
    use crate::operators::{build_operator, cluster, symmetries, Boundary, OperatorKind};
    use crate::pauli::Letter;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str, n: usize) -> PauliString {
        PauliString::parse(s, n).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn product_state_rows_and_expectations() {
        let s = StabilizerState::new_product_state(4, -1);
        for q in 0..4 {
            assert_eq!(s.stabilizer(q), PauliString::single(4, q, Letter::Z).negated());
            assert_eq!(s.expectation(&PauliString::single(4, q, Letter::X)).unwrap(), 0);
        }
        assert_eq!(s.expectation(&p("Z1 Z3", 4)).unwrap(), 1);
        assert_eq!(s.expectation(&p("Z1 Z2 Z3", 4)).unwrap(), -1);
        let plus = StabilizerState::new_product_state(1, 1);
        assert_eq!(plus.expectation(&p("Z1", 1)).unwrap(), 1);
        for a in 0..4 {
            for b in a..=4 {
                assert_eq!(s.entanglement_entropy(a..b).unwrap(), 0);
            }
        }
        s.check_invariants().unwrap();
    }

    #[test]
    fn repeated_measurement_is_stable() {
        let mut s = StabilizerState::new_product_state(3, 1);
        let mut r = rng(1);
        let x1 = p("X1", 3);
        let a = s.measure_pauli(&x1, None, &mut r).unwrap();
        let b = s.measure_pauli(&x1, None, &mut r).unwrap();
        assert_eq!(a, b);
        assert_eq!(s.expectation(&x1).unwrap(), a);
        let z = p("Z2", 3);
        assert_eq!(s.measure_pauli(&z, None, &mut r).unwrap(), 1);
        s.check_invariants().unwrap();
    }

    #[test]
    fn forced_outcomes() {
        let mut s = StabilizerState::new_product_state(2, -1);
        let mut r = rng(2);
        let before = r.clone();
        assert_eq!(s.measure_pauli(&p("X1 X2", 2), Some(-1), &mut r).unwrap(), -1);
        // Forced branches leave the RNG untouched.
        assert_eq!(r, before);
        // Z1 Z2 commutes with X1 X2 and is +1 on |11>.
        assert_eq!(s.measure_pauli(&p("Z1 Z2", 2), Some(1), &mut r).unwrap(), 1);
        assert_eq!(
            s.measure_pauli(&p("Z1 Z2", 2), Some(-1), &mut r),
            Err(Error::ForcedOutcomeConflict { forced: -1, actual: 1 })
        );
        assert_eq!(s.expectation(&p("X1 X2", 2)).unwrap(), -1);
        assert_eq!(s.entanglement_entropy(0..1).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_operands() {
        let mut s = StabilizerState::new_product_state(2, 1);
        let mut r = rng(3);
        let mut y = p("X1", 2);
        y.set_phase(1);
        assert!(matches!(s.measure_pauli(&y, None, &mut r), Err(Error::NotHermitian { .. })));
        assert!(matches!(s.expectation(&p("X1", 3)), Err(Error::SizeMismatch { .. })));
        let g = CliffordGate::identity(2);
        assert!(s.apply_clifford(&g, 1).is_err());
    }

    #[test]
    fn cluster_state_strings() {
        let (n, alpha) = (8, 2);
        let mut s = StabilizerState::new_product_state(n, -1);
        let mut r = rng(4);
        for site in 1..=n - alpha {
            s.measure_pauli(&cluster(alpha, site, n).unwrap(), None, &mut r).unwrap();
        }
        for site in 1..=n - alpha {
            let c = cluster(alpha, site, n).unwrap();
            let before = r.clone();
            let out = s.measure_compiled(&CompiledPauli::new(&c), None, true, &mut r).unwrap();
            assert!(!out.random);
            assert_eq!(r, before);
        }
        let spt = build_operator(OperatorKind::string_spt(1, 3), alpha, n, Boundary::Open).unwrap();
        let triv = build_operator(OperatorKind::string_trivial(1, 3), alpha, n, Boundary::Open).unwrap();
        assert_eq!(s.expectation(&spt).unwrap().abs(), 1);
        assert_eq!(s.expectation(&triv).unwrap(), 0);
        s.check_invariants().unwrap();

        let product = StabilizerState::new_product_state(n, -1);
        assert_eq!(product.expectation(&spt).unwrap(), 0);
    }

    #[test]
    fn clifford_application_on_rows() {
        let mut s = StabilizerState::new_product_state(3, 1);
        s.apply_clifford(&CliffordGate::identity(2), 1).unwrap();
        assert_eq!(s, StabilizerState::new_product_state(3, 1));
        let zrot = CliffordGate::from_elementary(1, Elementary::Z(0));
        s.apply_clifford(&zrot, 0).unwrap();
        assert_eq!(s.expectation(&p("Z1", 3)).unwrap(), 1);
        let h = CliffordGate::from_elementary(1, Elementary::H(0));
        s.apply_clifford(&h, 2).unwrap();
        assert_eq!(s.expectation(&p("X3", 3)).unwrap(), 1);
        let cnot = CliffordGate::from_elementary(2, Elementary::Cnot(0, 1));
        s.apply_clifford(&cnot, 1).unwrap();
        assert_eq!(s.expectation(&p("X2 X3", 3)).unwrap(), 0);
        assert_eq!(s.expectation(&p("Z2 Z3", 3)).unwrap(), 0);
        s.check_invariants().unwrap();
    }

    #[test]
    fn gates_straddling_a_word_boundary() {
        let n = 130;
        let mut s = StabilizerState::new_product_state(n, 1);
        let mut r = rng(9);
        for pos in [60, 61, 62, 63, 125] {
            let g = make_clifford_gate(3, &mut r);
            s.apply_clifford(&g, pos).unwrap();
            s.measure_pauli(&cluster(3, pos + 1, n).unwrap(), None, &mut r).unwrap();
        }
        s.check_invariants().unwrap();
    }

    #[test]
    fn text_dump_lists_rows() {
        let s = StabilizerState::new_product_state(2, -1);
        assert_eq!(s.to_text(), "-Z1\n-Z2\n--\n+X1\n+X2\n");
    }

    /// Random symmetric circuit on a product state; returns the state.
    fn random_symmetric_run(n: usize, alpha: usize, ops: usize, seed: u64) -> StabilizerState {
        let mut r = rng(seed);
        let mut s = StabilizerState::new_product_state(n, -1);
        for _ in 0..ops {
            match r.random_range(0..3) {
                0 => {
                    let site = r.random_range(1..=n - alpha);
                    s.measure_pauli(&cluster(alpha, site, n).unwrap(), None, &mut r).unwrap();
                }
                1 => {
                    let q = r.random_range(0..n);
                    s.measure_pauli(&PauliString::single(n, q, Letter::Z), None, &mut r).unwrap();
                }
                _ => {
                    let g = make_clifford_gate(alpha, &mut r);
                    let pos = r.random_range(0..=n - alpha - 1);
                    s.apply_clifford(&g, pos).unwrap();
                }
            }
        }
        s
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn tableau_contract_and_symmetries(seed in any::<u64>(), alpha in 1usize..=3, n in 8usize..=70) {
            let s = random_symmetric_run(n, alpha, 3 * n, seed);
            prop_assert!(s.check_invariants().is_ok());
            // Started in a G_r eigenstate, every operation commutes with G_r.
            for g in symmetries(alpha, n).unwrap() {
                let e = s.expectation(&g).unwrap();
                let expected = if g.weight() % 2 == 0 { 1 } else { -1 };
                prop_assert_eq!(e, expected);
            }
        }

        #[test]
        fn entropy_is_symmetric_and_bounded(seed in any::<u64>(), n in 4usize..=40) {
            let s = random_symmetric_run(n, 2, 4 * n, seed);
            for cut in 0..=n {
                let a = s.entanglement_entropy(0..cut).unwrap();
                let b = s.entanglement_entropy(cut..n).unwrap();
                prop_assert_eq!(a, b);
                prop_assert!(a <= cut.min(n - cut));
            }
        }

        #[test]
        fn expectations_are_ternary(seed in any::<u64>(), letters in prop::collection::vec(0u8..4, 12)) {
            let s = random_symmetric_run(12, 2, 60, seed);
            let ls: Vec<Letter> = letters.iter().map(|&l| [Letter::I, Letter::X, Letter::Y, Letter::Z][l as usize]).collect();
            let q = PauliString::from_letters(&ls);
            let e = s.expectation(&q).unwrap();
            prop_assert!(e == -1 || e == 0 || e == 1);
            prop_assert_eq!(s.expectation(&q.clone().negated()).unwrap(), -e);
        }
    }
}
