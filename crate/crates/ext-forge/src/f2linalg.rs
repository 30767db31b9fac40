//! Dense bit-packed linear algebra over F2.
//!
//! Matrices act on column vectors: `m.mul_vec(v)` has length `m.rows()` and
//! requires `v.len() == m.cols()`.

use std::fmt;

use crate::error::{Error, Result};

const W: usize = 64;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(W)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; words_for(len)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Parses a string of `0`/`1` characters, coordinate 0 first.
    pub fn parse(bits: &str) -> Self {
        let chars: Vec<char> = bits.chars().filter(|c| !c.is_whitespace()).collect();
        let mut v = Self::zeros(chars.len());
        for (i, c) in chars.iter().enumerate() {
            if *c == '1' {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
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
        debug_assert!(i < self.len);
        (self.words[i / W] >> (i % W)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % W);
        if b {
            self.words[i / W] |= mask;
        } else {
            self.words[i / W] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / W] ^= 1u64 << (i % W);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(k * W + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * W + b)
                }
            })
        })
    }

    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut v = BitVector::zeros(self.len + other.len);
        for i in self.iter_ones() {
            v.set(i, true);
        }
        for i in other.iter_ones() {
            v.set(self.len + i, true);
        }
        v
    }

    /// Coordinates `[start, start+len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.len);
        let mut v = BitVector::zeros(len);
        for i in self.iter_ones() {
            if i >= start && i < start + len {
                v.set(i - start, true);
            }
        }
        v
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        BitVector { len, words }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        write!(f, ")")
    }
}

/// Row-major packed matrix. Row `r` occupies `data[r*stride .. (r+1)*stride]`.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, v) in rows.iter().enumerate() {
            assert_eq!(v.len(), cols, "row {r} has wrong length");
            m.row_words_mut(r).copy_from_slice(v.words());
        }
        m
    }

    /// Rows given as `0`/`1` strings of equal length.
    pub fn parse(rows: &[&str]) -> Self {
        let vs: Vec<BitVector> = rows.iter().map(|s| BitVector::parse(s)).collect();
        let cols = vs.first().map_or(0, BitVector::len);
        Self::from_rows(cols, &vs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / W] >> (c % W)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        assert!(r < self.rows && c < self.cols, "cell ({r},{c}) out of range");
        let w = &mut self.data[r * self.stride + c / W];
        let mask = 1u64 << (c % W);
        if b {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "cell ({r},{c}) out of range");
        self.data[r * self.stride + c / W] ^= 1u64 << (c % W);
    }

    #[inline]
    pub(crate) fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|w| *w == 0)
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|w| *w == 0)
    }

    /// `rows[dst] ^= rows[src]`, touching only words from `from_word` on.
    #[inline]
    fn xor_row_into(&mut self, src: usize, dst: usize, from_word: usize) {
        let s = self.stride;
        if src == dst {
            self.row_words_mut(dst).fill(0);
            return;
        }
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..src * s + s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s] as &[u64], &mut lo[dst * s..dst * s + s])
        };
        for k in from_word..s {
            b[k] ^= a[k];
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        for k in 0..s {
            self.data.swap(a * s + k, b * s + k);
        }
    }

    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = 0u32;
            for (a, b) in self.row_words(r).iter().zip(v.words()) {
                acc ^= (a & b).count_ones();
            }
            if acc & 1 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Row vector times matrix: `sum_{r : v[r]=1} row(r)`.
    pub fn vec_mul(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.rows, "vector length must equal row count");
        let mut words = vec![0u64; self.stride];
        for r in v.iter_ones() {
            for (a, b) in words.iter_mut().zip(self.row_words(r)) {
                *a ^= b;
            }
        }
        BitVector::from_words(self.cols, words)
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            let prod = other.vec_mul(&row);
            out.row_words_mut(r).copy_from_slice(prod.words());
        }
        out
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// In-place reduction to reduced row-echelon form; returns pivot columns.
    pub fn reduce_in_place(&mut self) -> Vec<usize> {
        self.reduce_columns(self.cols, true)
    }

    /// Gaussian elimination with pivots searched only in columns `< limit`.
    /// Leftmost pivot column first; among candidate rows the first one wins.
    fn reduce_columns(&mut self, limit: usize, full: bool) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..limit {
            if rank == self.rows {
                break;
            }
            let word = c / W;
            let mask = 1u64 << (c % W);
            let s = self.stride;
            let found = (rank..self.rows).find(|&r| self.data[r * s + word] & mask != 0);
            let Some(p) = found else { continue };
            self.swap_rows(rank, p);
            let start = if full { 0 } else { rank + 1 };
            for r in start..self.rows {
                if r != rank && self.data[r * s + word] & mask != 0 {
                    self.xor_row_into(rank, r, word);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        pivots
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hconcat(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                out.set(r, c, true);
            }
            for c in other.row(r).iter_ones() {
                out.set(r, self.cols + c, true);
            }
        }
        out
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub reduced: BitMatrix,
}

pub fn row_reduce(m: &BitMatrix) -> Reduction {
    let mut reduced = m.clone();
    let pivots = reduced.reduce_in_place();
    Reduction { rank: pivots.len(), pivots, reduced }
}

pub fn rank(m: &BitMatrix) -> usize {
    let mut r = m.clone();
    r.reduce_columns(r.cols, false).len()
}

/// Basis of `{ v : m·v = 0 }`, one vector per free column.
pub fn kernel_basis(m: &BitMatrix) -> Vec<BitVector> {
    let red = row_reduce(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &red.pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..m.cols).filter(|&c| !is_pivot[c]) {
        let mut v = BitVector::unit(m.cols, free);
        for (i, &p) in red.pivots.iter().enumerate() {
            if red.reduced.get(i, free) {
                v.set(p, true);
            }
        }
        out.push(v);
    }
    out
}

/// Some `x` with `m·x = b`, or `None` when `b` is outside the column space.
pub fn solve(m: &BitMatrix, b: &BitVector) -> Result<Option<BitVector>> {
    if b.len() != m.rows {
        return Err(Error::Contract(format!(
            "solve: right-hand side has length {} but matrix has {} rows",
            b.len(),
            m.rows
        )));
    }
    let mut aug = BitMatrix::zeros(m.rows, m.cols + 1);
    for r in 0..m.rows {
        for c in m.row(r).iter_ones() {
            aug.set(r, c, true);
        }
        if b.get(r) {
            aug.set(r, m.cols, true);
        }
    }
    let pivots = aug.reduce_in_place();
    if pivots.last() == Some(&m.cols) {
        return Ok(None);
    }
    let mut x = BitVector::zeros(m.cols);
    for (i, &p) in pivots.iter().enumerate() {
        if aug.get(i, m.cols) {
            x.set(p, true);
        }
    }
    Ok(Some(x))
}

/// Left kernel of `m` (row combinations summing to zero) together with a
/// row-echelon basis of the row space. Used where rows are images of basis
/// vectors, as in the resolution code.
pub struct RowSpace {
    pub image: Vec<BitVector>,
    pub image_pivots: Vec<usize>,
    pub kernel: Vec<BitVector>,
}

pub fn row_space_and_left_kernel(m: &BitMatrix) -> RowSpace {
    let n = m.rows;
    let mut aug = BitMatrix::zeros(n, m.cols + n);
    for r in 0..n {
        let src = m.row_words(r);
        let dst = aug.row_words_mut(r);
        copy_bits(dst, 0, src, m.cols);
        dst[(m.cols + r) / W] |= 1u64 << ((m.cols + r) % W);
    }
    let pivots = aug.reduce_columns(m.cols, true);
    let rank = pivots.len();
    let image = (0..rank).map(|r| aug.row(r).slice(0, m.cols)).collect();
    let kernel = (rank..n).map(|r| aug.row(r).slice(m.cols, n)).collect();
    RowSpace { image, image_pivots: pivots, kernel }
}

/// Copies `nbits` bits from `src` (starting at bit 0) into `dst` at bit `offset`.
pub(crate) fn copy_bits(dst: &mut [u64], offset: usize, src: &[u64], nbits: usize) {
    if nbits == 0 {
        return;
    }
    let shift = offset % W;
    let base = offset / W;
    let nw = words_for(nbits);
    for k in 0..nw {
        let mut w = src[k];
        if k == nw - 1 && !nbits.is_multiple_of(W) {
            w &= (1u64 << (nbits % W)) - 1;
        }
        dst[base + k] |= w << shift;
        if shift != 0 && w >> (W - shift) != 0 {
            dst[base + k + 1] |= w >> (W - shift);
        }
    }
}

/// Incrementally maintained echelon basis of a subspace of F2^n.
#[derive(Clone, Debug)]
pub struct Echelon {
    len: usize,
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(len: usize) -> Self {
        Echelon { len, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn basis(&self) -> &[BitVector] {
        &self.rows
    }

    /// Reduces `v` against the basis; the remainder is zero iff `v` lies in the span.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns false if it was already there.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.len);
        let r = self.reduce(v);
        match r.first_one() {
            None => false,
            Some(p) => {
                for row in &mut self.rows {
                    if row.get(p) {
                        row.xor_assign(&r);
                    }
                }
                self.rows.push(r);
                self.pivots.push(p);
                true
            }
        }
    }
}
