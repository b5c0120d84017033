//! Dense bit matrices over GF(2).

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = BitVec::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        if b {
            self.words[i >> 6] |= 1 << (i & 63);
        } else {
            self.words[i >> 6] &= !(1 << (i & 63));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i >> 6] ^= 1 << (i & 63);
    }

    #[inline]
    pub fn xor_with(&mut self, o: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= b;
        }
    }

    pub fn and_parity(&self, o: &BitVec) -> bool {
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&o.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "{s}")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    pub rows: Vec<BitVec>,
    pub ncols: usize,
}

/// Row echelon data: pivot column per pivot row, plus the reduced rows.
pub struct Echelon {
    pub reduced: BitMatrix,
    pub pivots: Vec<usize>,
    /// Row operations applied: `transform · original = reduced`.
    pub transform: BitMatrix,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        BitMatrix { rows: vec![BitVec::zeros(ncols); nrows], ncols }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix { rows: (0..n).map(|i| BitVec::unit(n, i)).collect(), ncols: n }
    }

    pub fn from_rows(ncols: usize, rows: Vec<BitVec>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == ncols));
        BitMatrix { rows, ncols }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.rows[r].set(c, b)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.ncols, self.nrows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.nrows());
        for (r, row) in self.rows.iter().enumerate() {
            if row.and_parity(v) {
                out.set(r, true);
            }
        }
        out
    }

    pub fn mul(&self, o: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.nrows(), o.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            for k in row.ones() {
                out.rows[r].xor_with(&o.rows[k]);
            }
        }
        out
    }

    /// Gauss-Jordan elimination with lowest-index pivots, scanning columns
    /// left to right and taking the first available row.
    pub fn echelon(&self) -> Echelon {
        let mut a = self.clone();
        let mut t = BitMatrix::identity(self.nrows());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.ncols {
            if r == a.nrows() {
                break;
            }
            let Some(p) = (r..a.nrows()).find(|&i| a.rows[i].get(c)) else { continue };
            a.rows.swap(r, p);
            t.rows.swap(r, p);
            for i in 0..a.nrows() {
                if i != r && a.rows[i].get(c) {
                    let (pr, tr) = (a.rows[r].clone(), t.rows[r].clone());
                    a.rows[i].xor_with(&pr);
                    t.rows[i].xor_with(&tr);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { reduced: a, pivots, transform: t }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Basis of `{x : M x = 0}`, one vector per free column in increasing order.
    pub fn null_space(&self) -> Vec<BitVec> {
        let e = self.echelon();
        let mut is_pivot = vec![false; self.ncols];
        for &c in &e.pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for f in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut k = BitVec::unit(self.ncols, f);
            for (i, &c) in e.pivots.iter().enumerate() {
                if e.reduced.rows[i].get(f) {
                    k.set(c, true);
                }
            }
            basis.push(k);
        }
        basis
    }

    /// Basis of `{y : yᵀ M = 0}`, read off the zero rows of the echelon
    /// transform. Deterministic given the pivot rule.
    pub fn left_null_space(&self) -> Vec<BitVec> {
        let e = self.echelon();
        let rank = e.pivots.len();
        e.transform.rows[rank..].to_vec()
    }

    /// One solution of `M x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &BitVec) -> Option<BitVec> {
        let e = self.echelon();
        let tb = e.transform.mul_vec(b);
        let rank = e.pivots.len();
        if (rank..self.nrows()).any(|i| tb.get(i)) {
            return None;
        }
        let mut x = BitVec::zeros(self.ncols);
        for (i, &c) in e.pivots.iter().enumerate() {
            if tb.get(i) {
                x.set(c, true);
            }
        }
        Some(x)
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        if self.nrows() != self.ncols {
            return None;
        }
        let e = self.echelon();
        if e.pivots.len() < self.ncols {
            return None;
        }
        Some(e.transform)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&str]) -> BitMatrix {
        let n = rows[0].len();
        BitMatrix::from_rows(
            n,
            rows.iter()
                .map(|r| BitVec::from_indices(n, r.chars().enumerate().filter(|(_, c)| *c == '1').map(|(i, _)| i)))
                .collect(),
        )
    }

    #[test]
    fn triangle_incidence() {
        let m = mat(&["110", "011", "101"]);
        assert_eq!(m.rank(), 2);
        let left = m.left_null_space();
        assert_eq!(left.len(), 1);
        assert_eq!(format!("{:?}", left[0]), "111");
    }

    #[test]
    fn null_space_vectors_annihilate() {
        let m = mat(&["1101", "0110", "1011"]);
        for k in m.null_space() {
            assert!(m.mul_vec(&k).is_zero());
        }
        assert_eq!(m.null_space().len(), 4 - m.rank());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = mat(&["110", "011", "001"]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), BitMatrix::identity(3));
        assert!(mat(&["11", "11"]).inverse().is_none());
    }

    #[test]
    fn solve_consistency() {
        let m = mat(&["11", "11"]);
        assert!(m.solve(&BitVec::from_indices(2, [0])).is_none());
        let x = m.solve(&BitVec::from_indices(2, [0, 1])).unwrap();
        assert_eq!(m.mul_vec(&x), BitVec::from_indices(2, [0, 1]));
    }
}
