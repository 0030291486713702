//! Few-qubit Clifford gates given by their conjugation action, and samplers
//! for gates that commute with the protecting symmetries.
//!
//! A gate on a window of `m` sites is stored as the images of the `2m`
//! generators `X_0 … X_{m-1}, Z_0 … Z_{m-1}` under `P ↦ U P U†`.
//!
//! Inside a window of `α + 1` sites the global symmetries restrict to
//! `Z_0 Z_α` (the residue of the first site appears twice) and `Z_1 … Z_{α-1}`.
//! A gate is symmetric iff it fixes each of these exactly, sign included.

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::mul_phase_word;

/// Largest window (in sites) supported by [`CliffordGate`].
pub const MAX_WINDOW: usize = 16;

/// Windows up to this many sites get a precomputed conjugation table.
const TABLE_WINDOW: usize = 4;

/// A Pauli string on at most 16 sites: `i^phase · letters(x, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LocalPauli {
    pub x: u16,
    pub z: u16,
    pub phase: u8,
}

impl LocalPauli {
    pub const IDENTITY: LocalPauli = LocalPauli { x: 0, z: 0, phase: 0 };

    pub fn x(q: usize) -> Self {
        Self { x: 1 << q, z: 0, phase: 0 }
    }

    pub fn z(q: usize) -> Self {
        Self { x: 0, z: 1 << q, phase: 0 }
    }

    #[inline]
    pub fn mul(self, other: Self) -> Self {
        let d = mul_phase_word(self.x as u64, self.z as u64, other.x as u64, other.z as u64);
        Self {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: ((self.phase as i32 + other.phase as i32 + d).rem_euclid(4)) as u8,
        }
    }

    pub fn negated(self) -> Self {
        Self { phase: (self.phase + 2) & 3, ..self }
    }

    #[inline]
    pub fn commutes(self, other: Self) -> bool {
        (((self.x & other.z) ^ (self.z & other.x)).count_ones()).is_multiple_of(2)
    }

    pub fn is_hermitian(self) -> bool {
        self.phase & 1 == 0
    }
}

/// Elementary gates used to build symmetric generating sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementary {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    Cz(usize, usize),
    Cnot(usize, usize),
}

/// Clifford gate on a window of `width` consecutive sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordGate {
    width: usize,
    images: Vec<LocalPauli>,
    table: Option<Vec<LocalPauli>>,
}

impl CliffordGate {
    pub fn identity(width: usize) -> Self {
        assert!((1..=MAX_WINDOW).contains(&width), "window width {width} unsupported");
        let images = (0..width).map(LocalPauli::x).chain((0..width).map(LocalPauli::z)).collect();
        Self::with_table(width, images)
    }

    /// Builds a gate from generator images, checking the symplectic relations.
    pub fn from_images(width: usize, images: Vec<LocalPauli>) -> Result<Self> {
        if !(1..=MAX_WINDOW).contains(&width) {
            return Err(Error::InvalidGate(format!("window width {width} unsupported")));
        }
        if images.len() != 2 * width {
            return Err(Error::InvalidGate(format!("expected {} images, got {}", 2 * width, images.len())));
        }
        let mask = ((1u32 << width) - 1) as u16;
        for (e, img) in images.iter().enumerate() {
            if !img.is_hermitian() {
                return Err(Error::InvalidGate(format!("image {e} is not Hermitian")));
            }
            if img.x & !mask != 0 || img.z & !mask != 0 {
                return Err(Error::InvalidGate(format!("image {e} leaves the window")));
            }
        }
        for a in 0..2 * width {
            for b in a + 1..2 * width {
                let should_anticommute = b == a + width;
                if images[a].commutes(images[b]) == should_anticommute {
                    return Err(Error::InvalidGate(format!(
                        "images {a} and {b} violate the symplectic relations"
                    )));
                }
            }
        }
        Ok(Self::with_table(width, images))
    }

    fn with_table(width: usize, images: Vec<LocalPauli>) -> Self {
        let mut g = Self { width, images, table: None };
        if width <= TABLE_WINDOW {
            // Entry `idx` extends entry `idx & (idx - 1)` by one generator.
            let size = 1usize << (2 * width);
            let mut table = vec![LocalPauli::IDENTITY; size];
            for idx in 1..size {
                let rest = idx & (idx - 1);
                let b = idx.trailing_zeros() as usize;
                // letters(rest) · gen = i^d · letters(idx); only Z_b · X_b = iY
                // contributes, since `rest` has no X bits below `b`.
                let d = (b < width && (idx >> (width + b)) & 1 == 1) as u8;
                let img = table[rest].mul(g.images[b]);
                table[idx] = LocalPauli { phase: (img.phase + 4 - d) & 3, ..img };
            }
            g.table = Some(table);
        }
        g
    }

    pub fn from_elementary(width: usize, gate: Elementary) -> Self {
        let mut images: Vec<LocalPauli> =
            (0..width).map(LocalPauli::x).chain((0..width).map(LocalPauli::z)).collect();
        let w = width;
        match gate {
            Elementary::H(q) => {
                images[q] = LocalPauli::z(q);
                images[w + q] = LocalPauli::x(q);
            }
            Elementary::S(q) => {
                images[q] = LocalPauli { x: 1 << q, z: 1 << q, phase: 0 };
            }
            Elementary::X(q) => {
                images[w + q] = LocalPauli::z(q).negated();
            }
            Elementary::Z(q) => {
                images[q] = LocalPauli::x(q).negated();
            }
            Elementary::Cz(a, b) => {
                images[a] = LocalPauli::x(a).mul(LocalPauli::z(b));
                images[b] = LocalPauli::z(a).mul(LocalPauli::x(b));
            }
            Elementary::Cnot(c, t) => {
                images[c] = LocalPauli::x(c).mul(LocalPauli::x(t));
                images[w + t] = LocalPauli::z(c).mul(LocalPauli::z(t));
            }
        }
        Self::with_table(width, images)
    }

    /// Gate equal to applying `word[0]`, then `word[1]`, and so on.
    pub fn from_word(width: usize, word: &[Elementary]) -> Self {
        word.iter()
            .fold(Self::identity(width), |acc, &g| acc.then(&Self::from_elementary(width, g)))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn images(&self) -> &[LocalPauli] {
        &self.images
    }

    /// `U P U†`.
    #[inline]
    pub fn conjugate(&self, p: LocalPauli) -> LocalPauli {
        match &self.table {
            Some(t) => {
                let idx = (p.x as usize) | ((p.z as usize) << self.width);
                let img = t[idx];
                LocalPauli { phase: (img.phase + p.phase) & 3, ..img }
            }
            None => self.conjugate_slow(p),
        }
    }

    fn conjugate_slow(&self, p: LocalPauli) -> LocalPauli {
        // Y = i X Z on each site, so letters expand into X-image · Z-image.
        let ys = (p.x & p.z).count_ones() as u8;
        let mut acc = LocalPauli { x: 0, z: 0, phase: (p.phase + ys) & 3 };
        for q in 0..self.width {
            if (p.x >> q) & 1 == 1 {
                acc = acc.mul(self.images[q]);
            }
            if (p.z >> q) & 1 == 1 {
                acc = acc.mul(self.images[self.width + q]);
            }
        }
        acc
    }

    /// `self` followed by `next` (as unitaries: `next · self`).
    pub fn then(&self, next: &Self) -> Self {
        assert_eq!(self.width, next.width);
        let images = self.images.iter().map(|&img| next.conjugate(img)).collect();
        Self::with_table(self.width, images)
    }

    /// Whether `U P U† = P` for every given operator.
    pub fn fixes_all(&self, ops: &[LocalPauli]) -> bool {
        ops.iter().all(|&p| self.conjugate(p) == p)
    }

    pub fn is_symmetric(&self, alpha: usize) -> bool {
        self.width == alpha + 1 && self.fixes_all(&window_constraints(alpha))
    }

    fn symplectic_key(&self) -> u128 {
        pack_images(&self.images)
    }
}

/// The symmetry generators restricted to a window of `α + 1` sites:
/// `Z_0 Z_α` followed by `Z_1 … Z_{α-1}`.
pub fn window_constraints(alpha: usize) -> Vec<LocalPauli> {
    let mut out = vec![LocalPauli::z(0).mul(LocalPauli::z(alpha))];
    out.extend((1..alpha).map(LocalPauli::z));
    out
}

/// Symmetric generators on a window of `α + 1` sites.
pub fn symmetric_generators(alpha: usize) -> Vec<CliffordGate> {
    use Elementary::*;
    let m = alpha + 1;
    let (a, b) = (0, alpha);
    let mut gens = Vec::new();
    for q in 0..m {
        gens.push(CliffordGate::from_word(m, &[S(q)]));
        gens.push(CliffordGate::from_word(m, &[Z(q)]));
    }
    for p in 0..m {
        for q in p + 1..m {
            gens.push(CliffordGate::from_word(m, &[Cz(p, q)]));
        }
    }
    gens.push(CliffordGate::from_word(m, &[X(a), X(b)]));
    // exp(-iπ/4 X_a X_b)
    gens.push(CliffordGate::from_word(m, &[H(a), H(b), Cnot(a, b), S(b), Cnot(a, b), H(a), H(b)]));
    // Controlled X_a X_b with a middle site as control.
    for c in 1..alpha {
        gens.push(CliffordGate::from_word(m, &[Cnot(c, a), Cnot(c, b)]));
    }
    debug_assert!(gens.iter().all(|g| g.is_symmetric(alpha)));
    gens
}

/// Order of the symplectic part of the symmetric Clifford group on `α + 1`
/// sites: `|Sp(2m, 2)|` divided by the number of ordered isotropic
/// independent `α`-tuples (the group acts transitively on those).
pub fn symmetric_symplectic_order(alpha: usize) -> u128 {
    let m = (alpha + 1) as u32;
    let mut sp: u128 = 1u128 << (m * m);
    for i in 1..=m {
        sp *= (1u128 << (2 * i)) - 1;
    }
    let mut tuples: u128 = 1;
    for t in 0..alpha as u32 {
        tuples *= (1u128 << (2 * m - t)) - (1u128 << t);
    }
    sp / tuples
}

fn pack_images(images: &[LocalPauli]) -> u128 {
    images
        .iter()
        .enumerate()
        .fold(0u128, |acc, (e, img)| acc | (((img.x as u128) | ((img.z as u128) << 8)) << (16 * e)))
}

fn unpack_images(width: usize, key: u128) -> Vec<LocalPauli> {
    (0..2 * width)
        .map(|e| {
            let v = (key >> (16 * e)) as u16;
            LocalPauli { x: v & 0xff, z: v >> 8, phase: 0 }
        })
        .collect()
}

/// Largest `α` for which the symmetric group is enumerated exactly.
pub const EXACT_SAMPLER_MAX_ALPHA: usize = 3;

/// Word length used by the random-walk sampler for larger windows.
pub const RANDOM_WORD_LENGTH: usize = 24;

/// Uniform sampler over Clifford gates commuting with the window constraints.
#[derive(Debug)]
pub struct SymmetricCliffordSampler {
    alpha: usize,
    /// Symplectic parts of all group elements (letters only), when enumerated.
    elements: Option<Vec<u128>>,
    generators: Vec<CliffordGate>,
}

impl SymmetricCliffordSampler {
    /// Shared sampler for `α`; enumeration happens once per process.
    pub fn get(alpha: usize) -> &'static SymmetricCliffordSampler {
        static CACHE: [OnceLock<SymmetricCliffordSampler>; 8] = [const { OnceLock::new() }; 8];
        assert!((1..MAX_WINDOW).contains(&alpha), "alpha {alpha} unsupported");
        if alpha <= CACHE.len() {
            CACHE[alpha - 1].get_or_init(|| Self::new(alpha))
        } else {
            Box::leak(Box::new(Self::new(alpha)))
        }
    }

    pub fn new(alpha: usize) -> Self {
        let generators = symmetric_generators(alpha);
        let elements = (alpha <= EXACT_SAMPLER_MAX_ALPHA).then(|| enumerate_group(alpha, &generators));
        Self { alpha, elements, generators }
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Number of enumerated symplectic parts (`None` beyond the exact range).
    pub fn group_size(&self) -> Option<usize> {
        self.elements.as_ref().map(|e| e.len())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CliffordGate {
        let m = self.alpha + 1;
        match &self.elements {
            Some(elements) => {
                let key = elements[rng.random_range(0..elements.len())];
                let mut images = unpack_images(m, key);
                for img in images.iter_mut() {
                    if rng.random::<bool>() {
                        *img = img.negated();
                    }
                }
                // Middle constraints Z_j -> +Z_j; outer pair Z_0 Z_α -> +Z_0 Z_α.
                for j in 1..self.alpha {
                    images[m + j].phase = 0;
                }
                let pair = images[m].mul(images[m + self.alpha]);
                debug_assert_eq!((pair.x, pair.z), (0, (1 << 0) | (1 << self.alpha)));
                if pair.phase != 0 {
                    images[m] = images[m].negated();
                }
                CliffordGate::with_table(m, images)
            }
            None => {
                let mut gate = CliffordGate::identity(m);
                for _ in 0..RANDOM_WORD_LENGTH {
                    let g = &self.generators[rng.random_range(0..self.generators.len())];
                    gate = gate.then(g);
                }
                gate
            }
        }
    }
}

/// Breadth-first closure of the generators' symplectic parts.
fn enumerate_group(alpha: usize, generators: &[CliffordGate]) -> Vec<u128> {
    let m = alpha + 1;
    let gens: Vec<Vec<LocalPauli>> = generators.iter().map(|g| unpack_images(m, g.symplectic_key())).collect();
    let identity = CliffordGate::identity(m).symplectic_key();
    let mut seen: HashSet<u128> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(identity);
    queue.push_back(identity);
    while let Some(key) = queue.pop_front() {
        order.push(key);
        let imgs = unpack_images(m, key);
        for g in &gens {
            // Compose on the symplectic level: images of `key`, then `g`.
            let next: Vec<LocalPauli> = imgs
                .iter()
                .map(|img| {
                    let mut acc = LocalPauli::IDENTITY;
                    for q in 0..m {
                        if (img.x >> q) & 1 == 1 {
                            acc.x ^= g[q].x;
                            acc.z ^= g[q].z;
                        }
                        if (img.z >> q) & 1 == 1 {
                            acc.x ^= g[m + q].x;
                            acc.z ^= g[m + q].z;
                        }
                    }
                    acc
                })
                .collect();
            let k = pack_images(&next);
            if seen.insert(k) {
                queue.push_back(k);
            }
        }
    }
    order.sort_unstable();
    order
}

/// Uniformly random symmetric Clifford gate on `α + 1` sites.
pub fn make_clifford_gate<R: Rng + ?Sized>(alpha: usize, rng: &mut R) -> CliffordGate {
    SymmetricCliffordSampler::get(alpha).sample(rng)
}
