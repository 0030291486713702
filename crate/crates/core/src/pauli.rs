//! Signed Pauli strings in symplectic form.
//!
//! A [`PauliString`] stores one X bit and one Z bit per qubit (packed into
//! 64-bit words) plus a global phase `i^phase`. The bits encode Pauli
//! *letters*: `(x, z) = (1, 0)` is X, `(0, 1)` is Z and `(1, 1)` is Y, so a
//! Hermitian string always has `phase ∈ {0, 2}`, i.e. a sign of ±1.
//!
//! Qubit indices on this type are 0-based. The text form (`"+X1 Z2 X3"`) uses
//! 1-based site labels.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of 64-bit words needed for `n` bits.
#[inline]
pub fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Mask of the valid bits in the last word of an `n`-bit vector.
#[inline]
pub(crate) fn tail_mask(n: usize) -> u64 {
    match n % 64 {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

/// Power of `i` picked up when multiplying the letters in `(x1, z1)` by the
/// letters in `(x2, z2)`, summed over all bit positions of one word.
///
/// Returns the number of `+i` positions minus the number of `-i` positions.
#[inline(always)]
pub(crate) fn mul_phase_word(x1: u64, z1: u64, x2: u64, z2: u64) -> i32 {
    // +i : XY, YZ, ZX      -i : YX, ZY, XZ
    let xo1 = x1 & !z1;
    let y1 = x1 & z1;
    let zo1 = !x1 & z1;
    let xo2 = x2 & !z2;
    let y2 = x2 & z2;
    let zo2 = !x2 & z2;
    let plus = (xo1 & y2) | (y1 & zo2) | (zo1 & xo2);
    let minus = (y1 & xo2) | (zo1 & y2) | (xo1 & zo2);
    plus.count_ones() as i32 - minus.count_ones() as i32
}

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn symbol(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// An `n`-qubit Pauli operator `i^phase · L_1 ⊗ … ⊗ L_n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// A single letter on qubit `qubit` (0-based).
    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set_letter(qubit, letter);
        p
    }

    /// Builds a string from letters, qubit 0 first.
    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_letter(q, l);
        }
        p
    }

    /// Builds a string from raw words. Bits beyond `n` are cleared.
    pub fn from_words(n: usize, mut x: Vec<u64>, mut z: Vec<u64>, phase: u8) -> Result<Self> {
        let w = words_for(n);
        if x.len() != w || z.len() != w {
            return Err(Error::InvalidOperator(format!(
                "expected {w} words for {n} qubits, got {} / {}",
                x.len(),
                z.len()
            )));
        }
        if w > 0 {
            let m = tail_mask(n);
            x[w - 1] &= m;
            z[w - 1] &= m;
        }
        Ok(Self { n, x, z, phase: phase & 3 })
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    #[inline]
    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Global phase as a power of `i`.
    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    /// `+1` or `-1` for Hermitian strings, `None` otherwise.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    #[inline]
    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    pub fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian { phase: self.phase })
        }
    }

    /// Multiplies by -1.
    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn negated(mut self) -> Self {
        self.negate();
        self
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set_letter(&mut self, q: usize, letter: Letter) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (xb, zb) = letter.bits();
        let (w, b) = (q / 64, q % 64);
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn is_identity_letters(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    /// Qubits (0-based) carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, (x, z)) in self.x.iter().zip(&self.z).enumerate() {
            let mut bits = x | z;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { expected: self.n, got: other.n });
        }
        Ok(())
    }

    /// Returns `true` iff the two strings commute.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        let mut acc = 0u64;
        for w in 0..self.x.len() {
            acc ^= (self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w]);
        }
        acc.count_ones().is_multiple_of(2)
    }

    /// The product `self · other` with exact phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    /// `self ← self · other`.
    pub fn mul_assign(&mut self, other: &Self) -> Result<()> {
        self.check_size(other)?;
        self.mul_assign_unchecked(other);
        Ok(())
    }

    #[inline]
    pub(crate) fn mul_assign_unchecked(&mut self, other: &Self) {
        let mut log_i = self.phase as i32 + other.phase as i32;
        for w in 0..self.x.len() {
            log_i += mul_phase_word(self.x[w], self.z[w], other.x[w], other.z[w]);
            self.x[w] ^= other.x[w];
            self.z[w] ^= other.z[w];
        }
        self.phase = log_i.rem_euclid(4) as u8;
    }

    /// Letters-only equality (ignores the phase).
    pub fn same_letters(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Symplectic vector `(x | z)` as `2n` bits, x-part first.
    pub fn symplectic_bits(&self) -> Vec<bool> {
        (0..self.n).map(|q| self.x_bit(q)).chain((0..self.n).map(|q| self.z_bit(q))).collect()
    }
}

impl fmt::Display for PauliString {
    /// `"+X1 Z2 X3"`, `"-iY4"`, `"+I"` for the identity. Sites are 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        let support = self.support();
        if support.is_empty() {
            return f.write_str("I");
        }
        for (k, q) in support.into_iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", self.letter(q).symbol(), q + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString[n={}]({self})", self.n)
    }
}

/// Parses the text form with an explicit qubit count, e.g.
/// `PauliString::parse("-X1 Y3", 4)`.
impl PauliString {
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        let mut p = PauliString::identity(n);
        p.phase = phase;
        let rest = rest.trim();
        if rest == "I" || rest.is_empty() {
            return Ok(p);
        }
        for tok in rest.split_whitespace() {
            let mut chars = tok.chars();
            let letter = match chars.next() {
                Some('X') => Letter::X,
                Some('Y') => Letter::Y,
                Some('Z') => Letter::Z,
                Some('I') => Letter::I,
                _ => return Err(Error::Parse(format!("bad Pauli token '{tok}'"))),
            };
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Parse(format!("bad site in token '{tok}'")))?;
            if site == 0 || site > n {
                return Err(Error::Parse(format!("site {site} out of range 1..={n}")));
            }
            if p.letter(site - 1) != Letter::I {
                return Err(Error::Parse(format!("site {site} appears twice")));
            }
            p.set_letter(site - 1, letter);
        }
        Ok(p)
    }
}

/// Parses a string whose qubit count is the largest site mentioned.
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s
            .split_whitespace()
            .filter_map(|t| t.trim_start_matches(['+', '-', 'i']).get(1..)?.parse::<usize>().ok())
            .max()
            .unwrap_or(1);
        Self::parse(s, n)
    }
}
