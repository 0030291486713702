//! Bit-packed linear algebra over GF(2).

use crate::pauli::words_for;

/// Dense GF(2) matrix with rows packed into 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self { rows, cols, stride, data: vec![0; rows * stride] }
    }

    /// Builds a matrix from word rows of equal length `stride`.
    pub fn from_word_rows<'a>(cols: usize, rows: impl IntoIterator<Item = &'a [u64]>) -> Self {
        let stride = words_for(cols);
        let mut data = Vec::new();
        let mut count = 0;
        for r in rows {
            assert_eq!(r.len(), stride, "row width mismatch");
            data.extend_from_slice(r);
            count += 1;
        }
        Self { rows: count, cols, stride, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.stride + c / 64];
        let b = 1u64 << (c % 64);
        if v {
            *w |= b;
        } else {
            *w &= !b;
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    /// Rank by forward elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce()
    }

    /// Row-reduces in place to echelon form and returns the rank.
    pub fn row_reduce(&mut self) -> usize {
        let stride = self.stride;
        let mut rank = 0;
        for w in 0..stride {
            if rank == self.rows {
                break;
            }
            loop {
                // Lowest column in word `w` that still has a pivot candidate.
                let mut cand = 0u64;
                for r in rank..self.rows {
                    cand |= self.data[r * stride + w];
                }
                if cand == 0 {
                    break;
                }
                let bit = cand.trailing_zeros();
                let mask = 1u64 << bit;
                let pivot = (rank..self.rows).find(|&r| self.data[r * stride + w] & mask != 0).unwrap();
                if pivot != rank {
                    for k in 0..stride {
                        self.data.swap(pivot * stride + k, rank * stride + k);
                    }
                }
                for r in 0..self.rows {
                    if r != rank && self.data[r * stride + w] & mask != 0 {
                        for k in w..stride {
                            let v = self.data[rank * stride + k];
                            self.data[r * stride + k] ^= v;
                        }
                    }
                }
                rank += 1;
                if rank == self.rows {
                    break;
                }
            }
        }
        rank
    }
}

/// Rank of the given word rows, each of length `stride` words.
///
/// Consumes a scratch copy; rows are eliminated greedily against a pivot
/// table, which is cheap when the rank is small relative to the width.
pub fn rank_of_rows(stride: usize, rows: &[u64]) -> usize {
    let n_rows = rows.len() / stride.max(1);
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut scratch = vec![0u64; stride];
    for r in 0..n_rows {
        scratch.copy_from_slice(&rows[r * stride..(r + 1) * stride]);
        for (pcol, prow) in &basis {
            if (scratch[pcol / 64] >> (pcol % 64)) & 1 == 1 {
                for k in pcol / 64..stride {
                    scratch[k] ^= prow[k];
                }
            }
        }
        if let Some(w) = scratch.iter().position(|&v| v != 0) {
            let pcol = w * 64 + scratch[w].trailing_zeros() as usize;
            // Keep the basis reduced on this column so later lookups stay valid.
            for (_, prow) in basis.iter_mut() {
                if (prow[pcol / 64] >> (pcol % 64)) & 1 == 1 {
                    for k in 0..stride {
                        prow[k] ^= scratch[k];
                    }
                }
            }
            basis.push((pcol, scratch.clone()));
        }
    }
    basis.len()
}

/// Incremental XOR basis that remembers which inserted vectors combine into
/// each basis row, so targets can be decomposed over the original set.
#[derive(Clone, Debug)]
pub struct XorBasis {
    width: usize,
    tag_width: usize,
    rows: Vec<BasisRow>,
}

#[derive(Clone, Debug)]
struct BasisRow {
    pivot: usize,
    bits: Vec<u64>,
    tag: Vec<u64>,
}

impl XorBasis {
    /// `width` bits per vector; up to `max_vectors` insertions.
    pub fn new(width: usize, max_vectors: usize) -> Self {
        Self { width: words_for(width), tag_width: words_for(max_vectors), rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Inserts vector number `index`. Returns `false` if it was dependent.
    pub fn insert(&mut self, index: usize, bits: &[u64]) -> bool {
        assert_eq!(bits.len(), self.width);
        let mut v = bits.to_vec();
        let mut tag = vec![0u64; self.tag_width];
        tag[index / 64] |= 1 << (index % 64);
        self.reduce_in_place(&mut v, &mut tag);
        match v.iter().position(|&w| w != 0) {
            None => false,
            Some(w) => {
                let pivot = w * 64 + v[w].trailing_zeros() as usize;
                for row in self.rows.iter_mut() {
                    if (row.bits[pivot / 64] >> (pivot % 64)) & 1 == 1 {
                        for k in 0..self.width {
                            row.bits[k] ^= v[k];
                        }
                        for k in 0..self.tag_width {
                            row.tag[k] ^= tag[k];
                        }
                    }
                }
                self.rows.push(BasisRow { pivot, bits: v, tag });
                true
            }
        }
    }

    fn reduce_in_place(&self, v: &mut [u64], tag: &mut [u64]) {
        for row in &self.rows {
            if (v[row.pivot / 64] >> (row.pivot % 64)) & 1 == 1 {
                for k in 0..self.width {
                    v[k] ^= row.bits[k];
                }
                for k in 0..self.tag_width {
                    tag[k] ^= row.tag[k];
                }
            }
        }
    }

    /// Indices of inserted vectors whose XOR equals `target`, if any.
    pub fn decompose(&self, target: &[u64]) -> Option<Vec<usize>> {
        assert_eq!(target.len(), self.width);
        let mut v = target.to_vec();
        let mut tag = vec![0u64; self.tag_width];
        self.reduce_in_place(&mut v, &mut tag);
        if v.iter().any(|&w| w != 0) {
            return None;
        }
        let mut out = Vec::new();
        for (w, &word) in tag.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_rank(rows: &[Vec<bool>]) -> usize {
        let mut m: Vec<Vec<bool>> = rows.to_vec();
        let cols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..m.len()).find(|&r| m[r][c]) {
                m.swap(p, rank);
                for r in 0..m.len() {
                    if r != rank && m[r][c] {
                        for k in 0..cols {
                            let v = m[rank][k];
                            m[r][k] ^= v;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    fn pack(rows: &[Vec<bool>], cols: usize) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b);
            }
        }
        m
    }

    #[test]
    fn identity_and_zero_rank() {
        let mut m = BitMatrix::zeros(5, 70);
        assert_eq!(m.rank(), 0);
        for i in 0..5 {
            m.set(i, 13 * i, true);
        }
        assert_eq!(m.rank(), 5);
    }

    proptest! {
        #[test]
        fn rank_matches_naive(rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 130), 1..40)) {
            let m = pack(&rows, 130);
            let expected = naive_rank(&rows);
            prop_assert_eq!(m.rank(), expected);
            let flat: Vec<u64> = (0..m.rows()).flat_map(|r| m.row(r).to_vec()).collect();
            prop_assert_eq!(rank_of_rows(3, &flat), expected);
        }

        #[test]
        fn decomposition_reconstructs_target(
            rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 70), 1..30),
            pick in prop::collection::vec(any::<bool>(), 30),
        ) {
            let m = pack(&rows, 70);
            let mut basis = XorBasis::new(70, rows.len());
            for r in 0..rows.len() {
                basis.insert(r, m.row(r));
            }
            let mut target = vec![0u64; 2];
            for r in 0..rows.len() {
                if pick[r] {
                    for k in 0..2 { target[k] ^= m.row(r)[k]; }
                }
            }
            let idx = basis.decompose(&target).expect("target lies in the span");
            let mut recon = vec![0u64; 2];
            for r in idx {
                for k in 0..2 { recon[k] ^= m.row(r)[k]; }
            }
            prop_assert_eq!(recon, target);
        }
    }

    #[test]
    fn decompose_rejects_outside_span() {
        let mut basis = XorBasis::new(8, 2);
        basis.insert(0, &[0b0011]);
        basis.insert(1, &[0b0110]);
        assert_eq!(basis.decompose(&[0b0101]), Some(vec![0, 1]));
        assert_eq!(basis.decompose(&[0b1000]), None);
        assert!(!basis.clone().insert(1, &[0b0101]));
    }
}
