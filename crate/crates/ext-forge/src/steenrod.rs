//! The subalgebras A(n), n <= 2, of the mod 2 Steenrod algebra in the Milnor
//! basis, with the Milnor product and decompositions into words in the
//! generators Sq^1, Sq^2, Sq^4.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2linalg::{BitMatrix, BitVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Profile {
    pub n: usize,
}

impl Profile {
    pub fn new(n: usize) -> Result<Self> {
        if n > 2 {
            return Err(Error::Config(format!("A({n}) is not supported; use n <= 2")));
        }
        Ok(Profile { n })
    }

    /// Exclusive bound for r_i (1-based), i.e. 2^(n+2-i).
    pub fn bound(self, i: usize) -> u32 {
        1 << (self.n + 2 - i)
    }

    pub fn len(self) -> usize {
        self.n + 1
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn dimension(self) -> usize {
        (1..=self.len()).map(|i| self.bound(i) as usize).product()
    }

    pub fn top_degree(self) -> u32 {
        (1..=self.len()).map(|i| (self.bound(i) - 1) * ((1 << i) - 1)).sum()
    }

    /// Number of algebra generators Sq^1, ..., Sq^(2^n).
    pub fn generator_count(self) -> usize {
        self.n + 1
    }

    pub fn name(self) -> String {
        format!("A{}", self.n)
    }

    pub fn contains(self, exps: &[u32]) -> bool {
        exps.iter().enumerate().all(|(k, &r)| {
            let i = k + 1;
            if i <= self.len() {
                r < self.bound(i)
            } else {
                r == 0
            }
        })
    }
}

/// Sq(r_1, ..., r_k); trailing zeros are stripped so equality is canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MilnorElt {
    exps: Vec<u32>,
}

impl MilnorElt {
    pub fn new(exps: &[u32]) -> Self {
        let mut exps = exps.to_vec();
        while exps.last() == Some(&0) {
            exps.pop();
        }
        MilnorElt { exps }
    }

    pub fn unit() -> Self {
        MilnorElt { exps: Vec::new() }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn r(&self, i: usize) -> u32 {
        self.exps.get(i - 1).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().enumerate().map(|(k, &r)| r * ((1 << (k + 1)) - 1)).sum()
    }

    /// Q_k = Sq(0,..,0,1) with the 1 in position k+1.
    pub fn milnor_primitive(k: usize) -> Self {
        let mut e = vec![0; k + 1];
        e[k] = 1;
        MilnorElt::new(&e)
    }
}

impl fmt::Display for MilnorElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "Sq(0)");
        }
        let parts: Vec<String> = self.exps.iter().map(u32::to_string).collect();
        write!(f, "Sq({})", parts.join(","))
    }
}

impl fmt::Debug for MilnorElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Homogeneous F2-linear combination of Milnor basis elements.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraElt {
    pub profile: Profile,
    pub degree: u32,
    pub terms: BTreeSet<MilnorElt>,
}

impl AlgebraElt {
    pub fn zero(profile: Profile, degree: u32) -> Self {
        AlgebraElt { profile, degree, terms: BTreeSet::new() }
    }

    pub fn basis(profile: Profile, b: MilnorElt) -> Self {
        let degree = b.degree();
        let mut terms = BTreeSet::new();
        terms.insert(b);
        AlgebraElt { profile, degree, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, b: MilnorElt) {
        assert_eq!(b.degree(), self.degree, "inhomogeneous term");
        if !self.terms.remove(&b) {
            self.terms.insert(b);
        }
    }

    pub fn add(&mut self, other: &AlgebraElt) {
        for t in &other.terms {
            self.add_term(t.clone());
        }
    }
}

impl fmt::Display for AlgebraElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for AlgebraElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// All profile-admissible Sq(r) of the given degree, lexicographic in (r_1, r_2, ...).
pub fn enumerate_basis(p: Profile, degree: u32) -> Result<Vec<MilnorElt>> {
    Profile::new(p.n)?;
    let mut out = Vec::new();
    let mut exps = vec![0u32; p.len()];
    fn rec(p: Profile, i: usize, remaining: u32, exps: &mut Vec<u32>, out: &mut Vec<MilnorElt>) {
        if i > p.len() {
            if remaining == 0 {
                out.push(MilnorElt::new(exps));
            }
            return;
        }
        let w = (1u32 << i) - 1;
        for r in 0..p.bound(i) {
            if r * w > remaining {
                break;
            }
            exps[i - 1] = r;
            rec(p, i + 1, remaining - r * w, exps, out);
        }
        exps[i - 1] = 0;
    }
    rec(p, 1, degree, &mut exps, &mut out);
    out.sort();
    Ok(out)
}

fn multinomial_odd(parts: &[u32]) -> bool {
    let mut acc = 0u32;
    for &x in parts {
        if acc & x != 0 {
            return false;
        }
        acc |= x;
    }
    true
}

/// Milnor product formula: a sum over matrices X with weighted row sums
/// Σ_j 2^j x_ij = r_i and column sums Σ_i x_ij = s_j, each contributing
/// Sq(t) with t_n = Σ_{i+j=n} x_ij and coefficient Π_n multinomial(x_ij : i+j=n).
pub fn milnor_product(r: &[u32], s: &[u32]) -> Vec<MilnorElt> {
    let rows = r.len();
    let cols = s.len();
    // x[i][j] for 0 <= i <= rows, 0 <= j <= cols; x[0][0] unused.
    let mut x = vec![vec![0u32; cols + 1]; rows + 1];
    let mut out: BTreeSet<MilnorElt> = BTreeSet::new();

    #[allow(clippy::too_many_arguments)]
    fn fill_row(
        i: usize,
        j: usize,
        budget: u32,
        r: &[u32],
        s: &[u32],
        col_used: &mut Vec<u32>,
        x: &mut Vec<Vec<u32>>,
        out: &mut BTreeSet<MilnorElt>,
    ) {
        let rows = r.len();
        let cols = s.len();
        if i > rows {
            for jj in 1..=cols {
                x[0][jj] = s[jj - 1] - col_used[jj];
            }
            let n_max = rows + cols;
            let mut t = vec![0u32; n_max];
            for n in 1..=n_max {
                let mut parts = Vec::new();
                let mut sum = 0u32;
                for ii in 0..=n.min(rows) {
                    let jj = n - ii;
                    if jj > cols {
                        continue;
                    }
                    let v = x[ii][jj];
                    parts.push(v);
                    sum += v;
                }
                if !multinomial_odd(&parts) {
                    return;
                }
                t[n - 1] = sum;
            }
            let e = MilnorElt::new(&t);
            if !out.remove(&e) {
                out.insert(e);
            }
            return;
        }
        if j > cols {
            x[i][0] = budget;
            fill_row(i + 1, 1, if i < rows { r[i] } else { 0 }, r, s, col_used, x, out);
            return;
        }
        let w = 1u32 << j;
        let max = (budget / w).min(s[j - 1] - col_used[j]);
        for v in 0..=max {
            x[i][j] = v;
            col_used[j] += v;
            fill_row(i, j + 1, budget - v * w, r, s, col_used, x, out);
            col_used[j] -= v;
        }
        x[i][j] = 0;
    }

    if rows == 0 {
        return vec![MilnorElt::new(s)];
    }
    let mut col_used = vec![0u32; cols + 1];
    fill_row(1, 1, r[0], r, s, &mut col_used, &mut x, &mut out);
    out.into_iter().collect()
}

pub fn multiply(a: &MilnorElt, b: &MilnorElt, p: Profile) -> Result<AlgebraElt> {
    for e in [a, b] {
        if !p.contains(e.exps()) {
            return Err(Error::Contract(format!("{e} is not in {}", p.name())));
        }
    }
    let degree = a.degree() + b.degree();
    let mut out = AlgebraElt::zero(p, degree);
    for t in milnor_product(a.exps(), b.exps()) {
        if !p.contains(t.exps()) {
            return Err(Error::Internal(format!("{a}*{b} has term {t} outside {}", p.name())));
        }
        out.add_term(t);
    }
    Ok(out)
}

/// A word Sq^(2^w[0]) Sq^(2^w[1]) ...; the rightmost letter acts first.
pub type Word = Vec<u8>;

pub fn word_to_string(w: &Word) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|&g| format!("Sq{}", 1u32 << g)).collect::<Vec<_>>().join(" ")
}

/// One step of a decomposition: Sq^(2^gen) times basis element `rest`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub gen: u8,
    pub rest: usize,
}

/// Multiplication tables and generator decompositions of A(n), built once.
pub struct Algebra {
    pub profile: Profile,
    basis: Vec<MilnorElt>,
    degrees: Vec<u32>,
    by_degree: Vec<Range<usize>>,
    index: HashMap<MilnorElt, usize>,
    /// products[i * dim + j]: bitmask of global indices in basis[i] * basis[j].
    products: Vec<u64>,
    /// Primary decomposition of each basis element as Σ Sq^(2^g) * basis[rest].
    recipes: Vec<Vec<Step>>,
    /// Decomposition found with the generators scanned in reverse order.
    alt_recipes: Vec<Vec<Step>>,
    words: Vec<Vec<Word>>,
}

impl Algebra {
    /// The shared table for A(n).
    pub fn get(n: usize) -> Result<&'static Algebra> {
        static TABLES: [OnceLock<Algebra>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let p = Profile::new(n)?;
        Ok(TABLES[n].get_or_init(|| Algebra::build(p).expect("A(n) tables are consistent")))
    }

    fn build(profile: Profile) -> Result<Algebra> {
        let top = profile.top_degree();
        let mut basis = Vec::new();
        let mut by_degree = Vec::new();
        for d in 0..=top {
            let start = basis.len();
            basis.extend(enumerate_basis(profile, d)?);
            by_degree.push(start..basis.len());
        }
        let dim = basis.len();
        assert!(dim <= 64, "product masks hold at most 64 basis elements");
        let degrees: Vec<u32> = basis.iter().map(MilnorElt::degree).collect();
        let index: HashMap<MilnorElt, usize> =
            basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        let mut products = vec![0u64; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                if degrees[i] + degrees[j] > top {
                    continue;
                }
                let prod = multiply(&basis[i], &basis[j], profile)?;
                let mut mask = 0u64;
                for t in &prod.terms {
                    mask |= 1u64 << index[t];
                }
                products[i * dim + j] = mask;
            }
        }
        let mut alg = Algebra {
            profile,
            basis,
            degrees,
            by_degree,
            index,
            products,
            recipes: Vec::new(),
            alt_recipes: Vec::new(),
            words: Vec::new(),
        };
        alg.recipes = alg.decompose(false)?;
        alg.alt_recipes = alg.decompose(true)?;
        let mut words: Vec<Vec<Word>> = vec![Vec::new(); dim];
        words[0] = vec![Vec::new()];
        for idx in 1..dim {
            let mut set: BTreeSet<Word> = BTreeSet::new();
            for step in &alg.recipes[idx] {
                for w in &words[step.rest] {
                    let mut nw = vec![step.gen];
                    nw.extend_from_slice(w);
                    if !set.remove(&nw) {
                        set.insert(nw);
                    }
                }
            }
            words[idx] = set.into_iter().collect();
        }
        alg.words = words;
        for idx in 0..dim {
            let expanded = alg.expand_word_sum(&alg.words[idx]);
            if expanded != 1u64 << idx {
                return Err(Error::Internal(format!(
                    "generator words for {} re-expand incorrectly",
                    alg.basis[idx]
                )));
            }
        }
        Ok(alg)
    }

    /// Gaussian elimination in each degree over the candidates Sq^(2^g) * b.
    fn decompose(&self, reverse: bool) -> Result<Vec<Vec<Step>>> {
        let dim = self.basis.len();
        let mut recipes = vec![Vec::new(); dim];
        let gens: Vec<u8> = if reverse {
            (0..self.profile.generator_count() as u8).rev().collect()
        } else {
            (0..self.profile.generator_count() as u8).collect()
        };
        for d in 1..self.by_degree.len() as u32 {
            let range = self.by_degree[d as usize].clone();
            let local = range.len();
            let mut cands: Vec<Step> = Vec::new();
            let mut rows: Vec<BitVector> = Vec::new();
            for &g in &gens {
                let gd = 1u32 << g;
                if gd > d {
                    continue;
                }
                let g_idx = self.index[&MilnorElt::new(&[gd])];
                let rest_range = self.by_degree[(d - gd) as usize].clone();
                let rest_iter: Vec<usize> =
                    if reverse { rest_range.rev().collect() } else { rest_range.collect() };
                for rest in rest_iter {
                    let mask = self.products[g_idx * dim + rest];
                    let v = BitVector::from_indices(local, (0..64).filter(|b| mask >> b & 1 == 1).map(|b| b - range.start));
                    cands.push(Step { gen: g, rest });
                    rows.push(v);
                }
            }
            // Express each basis element as a combination of candidate rows.
            let m = BitMatrix::from_rows(local, &rows).transpose();
            for (k, idx) in range.clone().enumerate() {
                let target = BitVector::unit(local, k);
                let x = crate::f2linalg::solve(&m, &target)?.ok_or_else(|| {
                    Error::Internal(format!("{} is not generated by Sq^(2^i)", self.basis[idx]))
                })?;
                recipes[idx] = x.iter_ones().map(|c| cands[c]).collect();
            }
        }
        Ok(recipes)
    }

    fn expand_word_sum(&self, words: &[Word]) -> u64 {
        let dim = self.basis.len();
        let mut total = 0u64;
        for w in words {
            let mut acc: u64 = 1; // Sq(0)
            for &g in w.iter().rev() {
                let g_idx = self.index[&MilnorElt::new(&[1 << g])];
                let mut next = 0u64;
                for b in 0..dim {
                    if acc >> b & 1 == 1 {
                        next ^= self.products[g_idx * dim + b];
                    }
                }
                acc = next;
            }
            total ^= acc;
        }
        total
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[MilnorElt] {
        &self.basis
    }

    pub fn element(&self, idx: usize) -> &MilnorElt {
        &self.basis[idx]
    }

    pub fn index_of(&self, b: &MilnorElt) -> Option<usize> {
        self.index.get(b).copied()
    }

    #[inline]
    pub fn degree(&self, idx: usize) -> u32 {
        self.degrees[idx]
    }

    pub fn top_degree(&self) -> u32 {
        self.profile.top_degree()
    }

    /// Global indices of basis elements in degree `d` (empty outside [0, top]).
    pub fn degree_range(&self, d: i64) -> Range<usize> {
        if d < 0 || d as usize >= self.by_degree.len() {
            0..0
        } else {
            self.by_degree[d as usize].clone()
        }
    }

    pub fn dim_in_degree(&self, d: i64) -> usize {
        self.degree_range(d).len()
    }

    /// Bitmask of global indices of basis[i] * basis[j].
    #[inline]
    pub fn product_mask(&self, i: usize, j: usize) -> u64 {
        self.products[i * self.basis.len() + j]
    }

    pub fn product(&self, i: usize, j: usize) -> AlgebraElt {
        let mut out = AlgebraElt::zero(self.profile, self.degrees[i] + self.degrees[j]);
        let mask = self.product_mask(i, j);
        for b in 0..64 {
            if mask >> b & 1 == 1 {
                out.add_term(self.basis[b].clone());
            }
        }
        out
    }

    pub fn recipe(&self, idx: usize) -> &[Step] {
        &self.recipes[idx]
    }

    pub fn alt_recipe(&self, idx: usize) -> &[Step] {
        &self.alt_recipes[idx]
    }

    /// Index of Sq^(2^g).
    pub fn generator_index(&self, g: u8) -> usize {
        self.index[&MilnorElt::new(&[1 << g])]
    }

    pub fn words(&self, idx: usize) -> &[Word] {
        &self.words[idx]
    }
}

/// An F2-sum of generator words whose Milnor expansion is `b`.
pub fn milnor_to_generator_word(b: &MilnorElt, p: Profile) -> Result<Vec<Word>> {
    let alg = Algebra::get(p.n)?;
    let idx = alg
        .index_of(b)
        .ok_or_else(|| Error::Contract(format!("{b} is not in {}", p.name())))?;
    Ok(alg.words(idx).to_vec())
}
