//! Exact state-vector simulation for small chains.
//!
//! Amplitudes are indexed big-endian: qubit 0 is the most significant bit of
//! the basis index. Qubit indices are 0-based.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::clifford::{CliffordGate, LocalPauli};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 22;

const UNITARITY_TOL: f64 = 1e-10;
const ZERO_BRANCH_TOL: f64 = 1e-12;

/// A Pauli operator as bit masks over basis indices: `P|b⟩ = i^k (−1)^{|z∧b|} |b⊕x⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct IndexPauli {
    x: usize,
    z: usize,
    k: u8,
}

impl IndexPauli {
    fn from_pauli(p: &PauliString) -> Self {
        let n = p.num_qubits();
        let (mut x, mut z, mut ys) = (0usize, 0usize, 0u8);
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            let (xb, zb) = (p.x_bit(q), p.z_bit(q));
            if xb {
                x |= bit;
            }
            if zb {
                z |= bit;
            }
            if xb && zb {
                ys += 1;
            }
        }
        Self { x, z, k: (p.phase() + ys) & 3 }
    }

    fn from_local(p: LocalPauli, m: usize) -> Self {
        let (mut x, mut z) = (0usize, 0usize);
        for q in 0..m {
            let bit = 1usize << (m - 1 - q);
            if (p.x >> q) & 1 == 1 {
                x |= bit;
            }
            if (p.z >> q) & 1 == 1 {
                z |= bit;
            }
        }
        let ys = (p.x & p.z).count_ones() as u8;
        Self { x, z, k: (p.phase + ys) & 3 }
    }

    #[inline]
    fn coeff(&self, b: usize) -> Complex64 {
        let k = (self.k + 2 * ((self.z & b).count_ones() & 1) as u8) & 3;
        match k {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (b, &a) in v.iter().enumerate() {
            out[b ^ self.x] = self.coeff(b) * a;
        }
        out
    }
}

/// Squared Schmidt coefficients across a bipartition, in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    pub cut: usize,
    pub values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.values.iter().filter(|&&v| v > 1e-300).map(|&v| -v * v.log2()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// `|0…0⟩` for `sign = +1`, `|1…1⟩` for `sign = −1`.
    pub fn new_product_state(n: usize, sign: i8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, cap: MAX_QUBITS });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        let idx = if sign < 0 { (1 << n) - 1 } else { 0 };
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps and normalizes an amplitude vector of length `2^n`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidOperator(format!("amplitude count {len} is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, cap: MAX_QUBITS });
        }
        let mut s = Self { n, amps };
        let norm = s.norm();
        if norm < ZERO_BRANCH_TOL {
            return Err(Error::ZeroProbabilityBranch(norm));
        }
        s.scale(1.0 / norm);
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn scale(&mut self, f: f64) {
        for a in self.amps.iter_mut() {
            *a *= f;
        }
    }

    fn check_pauli(&self, p: &PauliString) -> Result<IndexPauli> {
        if p.num_qubits() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: p.num_qubits() });
        }
        p.require_hermitian()?;
        Ok(IndexPauli::from_pauli(p))
    }

    /// `⟨ψ|p|ψ⟩`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        let ip = self.check_pauli(p)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &a) in self.amps.iter().enumerate() {
            acc += self.amps[b ^ ip.x].conj() * ip.coeff(b) * a;
        }
        Ok(acc.re)
    }

    /// Born-rule measurement of `p`.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, p: &PauliString, rng: &mut R) -> Result<i8> {
        let e = self.expectation(p)?;
        let prob_plus = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
        let outcome = if rng.random::<f64>() < prob_plus { 1 } else { -1 };
        self.project(p, outcome)?;
        Ok(outcome)
    }

    /// Projects onto the `outcome` eigenspace of `p` and renormalizes.
    pub fn project(&mut self, p: &PauliString, outcome: i8) -> Result<()> {
        let ip = self.check_pauli(p)?;
        let s = if outcome < 0 { -1.0 } else { 1.0 };
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, &a) in self.amps.iter().enumerate() {
            out[b] += 0.5 * a;
            out[b ^ ip.x] += 0.5 * s * ip.coeff(b) * a;
        }
        let norm = out.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm * norm < ZERO_BRANCH_TOL {
            return Err(Error::ZeroProbabilityBranch(norm * norm));
        }
        self.amps = out;
        self.scale(1.0 / norm);
        Ok(())
    }

    /// Applies `u` (dimension `2^m`) to qubits `position..position+m`.
    pub fn apply_local_unitary(&mut self, u: &DMatrix<Complex64>, position: usize) -> Result<()> {
        let dim = u.nrows();
        if dim != u.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidGate(format!("{}x{} matrix is not a qubit gate", u.nrows(), u.ncols())));
        }
        let m = dim.trailing_zeros() as usize;
        if position + m > self.n {
            return Err(Error::PositionOutOfRange { position, width: m, n: self.n });
        }
        let dev = (u.adjoint() * u - DMatrix::<Complex64>::identity(dim, dim)).camax();
        if dev > UNITARITY_TOL {
            return Err(Error::InvalidGate(format!("matrix is not unitary (deviation {dev:e})")));
        }
        let shift = self.n - position - m;
        let mut local = vec![Complex64::new(0.0, 0.0); dim];
        for hi in 0..1usize << position {
            for lo in 0..1usize << shift {
                let base = (hi << (shift + m)) | lo;
                for (j, l) in local.iter_mut().enumerate() {
                    *l = self.amps[base | (j << shift)];
                }
                for i in 0..dim {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, l) in local.iter().enumerate() {
                        acc += u[(i, j)] * l;
                    }
                    self.amps[base | (i << shift)] = acc;
                }
            }
        }
        Ok(())
    }

    /// Spectrum for the bipartition `{0..cut} | {cut..n}`.
    pub fn schmidt_spectrum(&self, cut: usize) -> Result<SchmidtSpectrum> {
        if cut == 0 || cut >= self.n {
            return Err(Error::PositionOutOfRange { position: cut, width: 0, n: self.n });
        }
        let region: Vec<usize> = (0..cut).collect();
        let values = self.spectrum_of(&region);
        Ok(SchmidtSpectrum { cut, values })
    }

    /// Entanglement entropy (bits) of an arbitrary qubit set.
    pub fn entanglement_entropy(&self, region: &[usize]) -> Result<f64> {
        if let Some(&q) = region.iter().find(|&&q| q >= self.n) {
            return Err(Error::PositionOutOfRange { position: q, width: 1, n: self.n });
        }
        if region.is_empty() || region.len() == self.n {
            return Ok(0.0);
        }
        Ok(SchmidtSpectrum { cut: 0, values: self.spectrum_of(region) }.entropy())
    }

    fn spectrum_of(&self, region: &[usize]) -> Vec<f64> {
        let n = self.n;
        let in_a: Vec<bool> = (0..n).map(|q| region.contains(&q)).collect();
        let n_a = region.len();
        let mut mat = DMatrix::<Complex64>::zeros(1 << n_a, 1 << (n - n_a));
        for (b, &a) in self.amps.iter().enumerate() {
            let (mut r, mut c) = (0usize, 0usize);
            for (q, &inside) in in_a.iter().enumerate() {
                let bit = (b >> (n - 1 - q)) & 1;
                if inside {
                    r = (r << 1) | bit;
                } else {
                    c = (c << 1) | bit;
                }
            }
            mat[(r, c)] = a;
        }
        // Eigenvalues of the reduced density matrix on the smaller side; the
        // complex SVD does not converge reliably on these sparse matrices.
        let rho = if mat.nrows() <= mat.ncols() { &mat * mat.adjoint() } else { mat.adjoint() * &mat };
        let mut values: Vec<f64> = rho.symmetric_eigenvalues().iter().map(|v| v.max(0.0)).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values
    }
}

/// Dense `2^n × 2^n` matrix of a Pauli string (test oracle; small `n` only).
pub fn pauli_matrix(p: &PauliString) -> DMatrix<Complex64> {
    let ip = IndexPauli::from_pauli(p);
    let dim = 1usize << p.num_qubits();
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        m[(b ^ ip.x, b)] = ip.coeff(b);
    }
    m
}

/// Pairs of local basis states `(b, b ⊕ first ⊕ last)` spanning the joint
/// eigenspaces of `Z_0 Z_α` and `Z_1 … Z_{α−1}` on an `α + 1`-site window.
pub fn symmetric_sectors(alpha: usize) -> Vec<[usize; 2]> {
    let m = alpha + 1;
    let flip = (1usize << alpha) | 1;
    (0..1usize << m).filter(|b| b >> alpha == 0).map(|b| [b, b ^ flip]).collect()
}

/// Haar-random 2×2 unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`.
fn haar_2x2<R: Rng + ?Sized>(rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(2, 2, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..2 {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..2 {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random unitary on `α + 1` sites commuting with the window restrictions of
/// all symmetries: block diagonal over [`symmetric_sectors`], one independent
/// Haar 2×2 block per sector.
pub fn sample_symmetric_haar_gate<R: Rng + ?Sized>(alpha: usize, rng: &mut R) -> DMatrix<Complex64> {
    assert!(alpha >= 1, "alpha must be positive");
    let dim = 1usize << (alpha + 1);
    let mut u = DMatrix::zeros(dim, dim);
    for [a, b] in symmetric_sectors(alpha) {
        let block = haar_2x2(rng);
        let idx = [a, b];
        for i in 0..2 {
            for j in 0..2 {
                u[(idx[i], idx[j])] = block[(i, j)];
            }
        }
    }
    u
}

/// Dense matrix of a Clifford gate, fixed up to a global phase.
pub fn clifford_to_dense(gate: &CliffordGate) -> DMatrix<Complex64> {
    let m = gate.width();
    let dim = 1usize << m;
    let images = gate.images();
    // U|0…0⟩ is the +1 joint eigenvector of the images of Z_0 … Z_{m−1}.
    let z_imgs: Vec<IndexPauli> = (0..m).map(|q| IndexPauli::from_local(images[m + q], m)).collect();
    let mut psi0 = None;
    for seed in 0..dim {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[seed] = Complex64::new(1.0, 0.0);
        for zi in &z_imgs {
            let pv = zi.apply(&v);
            for (a, b) in v.iter_mut().zip(pv) {
                *a = 0.5 * (*a + b);
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            psi0 = Some(v.into_iter().map(|a| a / norm).collect::<Vec<_>>());
            break;
        }
    }
    let psi0 = psi0.expect("stabilizer images define a state");
    let x_imgs: Vec<IndexPauli> = (0..m).map(|q| IndexPauli::from_local(images[q], m)).collect();
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut v = psi0.clone();
        for (q, xi) in x_imgs.iter().enumerate() {
            if (col >> (m - 1 - q)) & 1 == 1 {
                v = xi.apply(&v);
            }
        }
        for (row, a) in v.into_iter().enumerate() {
            u[(row, col)] = a;
        }
    }
    u
}
