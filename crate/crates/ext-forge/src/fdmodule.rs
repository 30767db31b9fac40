//! Finite-dimensional graded modules over A(n), given by the action matrices
//! of the generators Sq^1, Sq^2, Sq^4 in each degree.
//!
//! Matrices use the row convention: row `i` of the degree-`d` matrix for
//! Sq^(2^g) is the image of basis element `i` of degree `d`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::arith2::binom_mod2;
use crate::error::{Error, Result};
use crate::f2linalg::{BitMatrix, BitVector, Echelon};
use crate::steenrod::{Algebra, MilnorElt, Profile};

#[derive(Clone)]
pub struct FDModule {
    profile: Profile,
    name: String,
    min_degree: i64,
    labels: Vec<Vec<String>>,
    /// actions[g][d - min_degree] : dim(d) x dim(d + 2^g).
    actions: Vec<Vec<BitMatrix>>,
}

impl fmt::Debug for FDModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FDModule({} over {}, dims {:?})", self.name, self.profile.name(), self.dims_by_degree())
    }
}

/// A homogeneous element: degree plus coordinates in that degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub degree: i64,
    pub vector: BitVector,
}

/// A subspace in each degree, stored as echelon bases keyed by degree.
#[derive(Clone, Debug, Default)]
pub struct GradedSubspace {
    pub parts: BTreeMap<i64, Echelon>,
}

impl GradedSubspace {
    pub fn dim(&self, d: i64) -> usize {
        self.parts.get(&d).map_or(0, Echelon::dim)
    }

    pub fn total_dim(&self) -> usize {
        self.parts.values().map(Echelon::dim).sum()
    }

    pub fn contains(&self, e: &Element) -> bool {
        e.vector.is_zero() || self.parts.get(&e.degree).is_some_and(|p| p.contains(&e.vector))
    }
}

/// Degree-preserving (up to `shift`) linear map between modules.
#[derive(Clone, Debug)]
pub struct ModuleMap {
    pub shift: i64,
    /// Row convention: matrices[d] maps source degree d to target degree d + shift.
    pub matrices: BTreeMap<i64, BitMatrix>,
}

impl ModuleMap {
    pub fn apply(&self, target: &FDModule, e: &Element) -> Element {
        let out_deg = e.degree + self.shift;
        let vector = match self.matrices.get(&e.degree) {
            Some(m) => m.vec_mul(&e.vector),
            None => BitVector::zeros(target.dim(out_deg)),
        };
        Element { degree: out_deg, vector }
    }

    /// Checks f(Sq^(2^g) x) = Sq^(2^g) f(x) on every basis element; returns the first failure.
    pub fn commutes(&self, source: &FDModule, target: &FDModule) -> Option<(u8, i64, usize)> {
        for g in 0..source.profile.generator_count() as u8 {
            for d in source.degrees() {
                for i in 0..source.dim(d) {
                    let x = Element { degree: d, vector: BitVector::unit(source.dim(d), i) };
                    let lhs = self.apply(target, &source.act_gen(g, &x));
                    let rhs = target.act_gen(g, &self.apply(target, &x));
                    if lhs != rhs {
                        return Some((g, d, i));
                    }
                }
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub operation: String,
    pub degree: i64,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionReport {
    pub module: String,
    pub checked_elements: usize,
    pub checked_relations: usize,
    pub first_discrepancy: Option<Discrepancy>,
}

impl ActionReport {
    pub fn passed(&self) -> bool {
        self.first_discrepancy.is_none()
    }
}

/// Incremental module constructor.
pub struct ModuleBuilder {
    profile: Profile,
    name: String,
    basis: BTreeMap<i64, Vec<String>>,
    actions: BTreeMap<(u8, i64, usize), BitVector>,
}

impl ModuleBuilder {
    pub fn new(profile: Profile, name: impl Into<String>) -> Self {
        ModuleBuilder { profile, name: name.into(), basis: BTreeMap::new(), actions: BTreeMap::new() }
    }

    /// Adds a basis element; returns its index within its degree.
    pub fn add_basis(&mut self, degree: i64, label: impl Into<String>) -> usize {
        let v = self.basis.entry(degree).or_default();
        v.push(label.into());
        v.len() - 1
    }

    pub fn dim(&self, degree: i64) -> usize {
        self.basis.get(&degree).map_or(0, Vec::len)
    }

    /// Sq^(2^g) of basis element `i` in `degree` is `image` (in degree + 2^g).
    pub fn set_action(&mut self, g: u8, degree: i64, i: usize, image: BitVector) {
        self.actions.insert((g, degree, i), image);
    }

    pub fn build(self) -> Result<FDModule> {
        let Some((&lo, _)) = self.basis.iter().next() else {
            return Ok(FDModule::zero(self.profile, &self.name));
        };
        let hi = *self.basis.keys().next_back().unwrap();
        let labels: Vec<Vec<String>> =
            (lo..=hi).map(|d| self.basis.get(&d).cloned().unwrap_or_default()).collect();
        let dim = |d: i64| -> usize {
            if d < lo || d > hi {
                0
            } else {
                labels[(d - lo) as usize].len()
            }
        };
        let mut actions = Vec::new();
        for g in 0..self.profile.generator_count() as u8 {
            let step = 1i64 << g;
            let mut per = Vec::new();
            for d in lo..=hi {
                let mut m = BitMatrix::zeros(dim(d), dim(d + step));
                for i in 0..dim(d) {
                    if let Some(img) = self.actions.get(&(g, d, i)) {
                        if img.len() != dim(d + step) {
                            return Err(Error::Contract(format!(
                                "action image of Sq^{} on ({d},{i}) has length {} (expected {})",
                                1 << g,
                                img.len(),
                                dim(d + step)
                            )));
                        }
                        for c in img.iter_ones() {
                            m.set(i, c, true);
                        }
                    }
                }
                per.push(m);
            }
            actions.push(per);
        }
        Ok(FDModule { profile: self.profile, name: self.name, min_degree: lo, labels, actions }.trimmed())
    }
}

impl FDModule {
    pub fn zero(profile: Profile, name: &str) -> Self {
        FDModule {
            profile,
            name: name.to_string(),
            min_degree: 0,
            labels: Vec::new(),
            actions: vec![Vec::new(); profile.generator_count()],
        }
    }

    /// Z/2 in degree 0.
    pub fn trivial(profile: Profile) -> Self {
        let mut b = ModuleBuilder::new(profile, "S0");
        b.add_basis(0, "1");
        b.build().expect("trivial module")
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_zero(&self) -> bool {
        self.labels.iter().all(Vec::is_empty)
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.degrees().next()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.degrees().last()
    }

    /// Degrees carrying a nonzero part, ascending.
    pub fn degrees(&self) -> impl DoubleEndedIterator<Item = i64> + '_ {
        let lo = self.min_degree;
        self.labels.iter().enumerate().filter(|(_, l)| !l.is_empty()).map(move |(k, _)| lo + k as i64)
    }

    pub fn dim(&self, d: i64) -> usize {
        let k = d - self.min_degree;
        if k < 0 || k as usize >= self.labels.len() {
            0
        } else {
            self.labels[k as usize].len()
        }
    }

    pub fn total_dim(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    pub fn dims_by_degree(&self) -> Vec<(i64, usize)> {
        self.degrees().map(|d| (d, self.dim(d))).collect()
    }

    /// Basis degrees with multiplicity.
    pub fn degree_multiset(&self) -> Vec<i64> {
        self.degrees().flat_map(|d| std::iter::repeat_n(d, self.dim(d))).collect()
    }

    pub fn label(&self, d: i64, i: usize) -> &str {
        &self.labels[(d - self.min_degree) as usize][i]
    }

    pub fn labels_in(&self, d: i64) -> &[String] {
        let k = d - self.min_degree;
        if k < 0 || k as usize >= self.labels.len() {
            &[]
        } else {
            &self.labels[k as usize]
        }
    }

    /// Index of the basis element with this label in degree `d`.
    pub fn find(&self, d: i64, label: &str) -> Option<usize> {
        self.labels_in(d).iter().position(|l| l == label)
    }

    pub fn basis_element(&self, d: i64, i: usize) -> Element {
        Element { degree: d, vector: BitVector::unit(self.dim(d), i) }
    }

    pub fn zero_element(&self, d: i64) -> Element {
        Element { degree: d, vector: BitVector::zeros(self.dim(d)) }
    }

    /// Matrix of Sq^(2^g) from degree d (dim(d) x dim(d+2^g)).
    pub fn gen_matrix(&self, g: u8, d: i64) -> BitMatrix {
        let k = d - self.min_degree;
        if k < 0 || k as usize >= self.labels.len() {
            return BitMatrix::zeros(0, self.dim(d + (1 << g)));
        }
        self.actions[g as usize][k as usize].clone()
    }

    #[inline]
    fn gen_matrix_ref(&self, g: u8, d: i64) -> Option<&BitMatrix> {
        let k = d - self.min_degree;
        if k < 0 || k as usize >= self.labels.len() {
            None
        } else {
            Some(&self.actions[g as usize][k as usize])
        }
    }

    pub fn act_gen(&self, g: u8, e: &Element) -> Element {
        let out = e.degree + (1i64 << g);
        let vector = match self.gen_matrix_ref(g, e.degree) {
            Some(m) if m.rows() == e.vector.len() && m.rows() > 0 => m.vec_mul(&e.vector),
            _ => BitVector::zeros(self.dim(out)),
        };
        Element { degree: out, vector }
    }

    /// The images b * v for every Milnor basis element b of A(n), computed
    /// from the primary decompositions. Entry `idx` lives in degree v.degree + |b|.
    pub fn milnor_orbit(&self, v: &Element) -> Vec<BitVector> {
        let alg = Algebra::get(self.profile.n).expect("supported profile");
        let mut out: Vec<BitVector> = Vec::with_capacity(alg.dim());
        for idx in 0..alg.dim() {
            let d = v.degree + alg.degree(idx) as i64;
            if idx == 0 {
                out.push(v.vector.clone());
                continue;
            }
            let mut acc = BitVector::zeros(self.dim(d));
            for step in alg.recipe(idx) {
                let rest_deg = v.degree + alg.degree(step.rest) as i64;
                let img = self.act_gen(step.gen, &Element { degree: rest_deg, vector: out[step.rest].clone() });
                acc.xor_assign(&img.vector);
            }
            out.push(acc);
        }
        out
    }

    /// Action of a Milnor basis element on an element.
    pub fn act_milnor(&self, b: &MilnorElt, e: &Element) -> Result<Element> {
        let alg = Algebra::get(self.profile.n)?;
        let idx = alg
            .index_of(b)
            .ok_or_else(|| Error::Contract(format!("{b} is not in {}", self.profile.name())))?;
        let orbit = self.milnor_orbit(e);
        Ok(Element { degree: e.degree + b.degree() as i64, vector: orbit[idx].clone() })
    }

    /// Matrices of every Milnor basis element from degree d, via `recipes`.
    fn milnor_matrices_with(&self, d: i64, alt: bool) -> Vec<BitMatrix> {
        let alg = Algebra::get(self.profile.n).expect("supported profile");
        let n = self.dim(d);
        let mut out: Vec<BitMatrix> = Vec::with_capacity(alg.dim());
        for idx in 0..alg.dim() {
            let target = d + alg.degree(idx) as i64;
            if idx == 0 {
                out.push(BitMatrix::identity(n));
                continue;
            }
            let steps = if alt { alg.alt_recipe(idx) } else { alg.recipe(idx) };
            let mut acc = BitMatrix::zeros(n, self.dim(target));
            for step in steps {
                let rest_deg = d + alg.degree(step.rest) as i64;
                let prod = self.compose_gen(&out[step.rest], step.gen, rest_deg);
                xor_matrix(&mut acc, &prod);
            }
            out.push(acc);
        }
        out
    }

    /// Row-convention product `m * Sq^(2^g)` where `m` lands in degree `d`.
    fn compose_gen(&self, m: &BitMatrix, g: u8, d: i64) -> BitMatrix {
        match self.gen_matrix_ref(g, d) {
            Some(a) if a.rows() == m.cols() && m.cols() > 0 => m.mul(a),
            _ => BitMatrix::zeros(m.rows(), self.dim(d + (1 << g))),
        }
    }

    /// Matrices of all Milnor basis elements from degree d.
    pub fn milnor_matrices(&self, d: i64) -> Vec<BitMatrix> {
        self.milnor_matrices_with(d, false)
    }

    /// Matrix of the total square Sq^k = Sq(k) from degree d.
    pub fn total_square_matrix(&self, k: u32, d: i64) -> Result<BitMatrix> {
        if k == 0 {
            return Ok(BitMatrix::identity(self.dim(d)));
        }
        let alg = Algebra::get(self.profile.n)?;
        let idx = alg.index_of(&MilnorElt::new(&[k])).ok_or_else(|| {
            Error::Contract(format!("Sq^{k} is not in {}", self.profile.name()))
        })?;
        Ok(self.milnor_matrices(d).swap_remove(idx))
    }

    /// Drops empty leading and trailing degrees.
    fn trimmed(mut self) -> Self {
        let first = self.labels.iter().position(|l| !l.is_empty());
        let Some(first) = first else {
            return FDModule::zero(self.profile, &self.name);
        };
        let last = self.labels.iter().rposition(|l| !l.is_empty()).unwrap();
        self.labels = self.labels[first..=last].to_vec();
        for per in &mut self.actions {
            *per = per[first..=last].to_vec();
        }
        self.min_degree += first as i64;
        self
    }

    /// Same basis with only the generators of a smaller subalgebra acting.
    pub fn restrict(&self, profile: Profile) -> Result<FDModule> {
        if profile.n > self.profile.n {
            return Err(Error::Contract(format!(
                "cannot extend a {} module to {}",
                self.profile.name(),
                profile.name()
            )));
        }
        let mut m = self.clone();
        m.profile = profile;
        m.actions.truncate(profile.generator_count());
        Ok(m)
    }
}

fn xor_matrix(acc: &mut BitMatrix, other: &BitMatrix) {
    assert_eq!((acc.rows(), acc.cols()), (other.rows(), other.cols()));
    for r in 0..acc.rows() {
        let src = other.row_words(r).to_vec();
        for (a, b) in acc.row_words_mut(r).iter_mut().zip(src) {
            *a ^= b;
        }
    }
}

fn rp_label(i: i64) -> String {
    format!("x^{i}")
}

/// H*(P_lo^hi): basis x^i, lo <= i <= hi, with Sq^k x^i = C(i,k) x^(i+k).
pub fn stunted_rp(profile: Profile, lo: i64, hi: i64) -> Result<FDModule> {
    if lo > hi {
        return Err(Error::Contract(format!("stunted_rp needs lo <= hi, got [{lo}, {hi}]")));
    }
    let mut b = ModuleBuilder::new(profile, format!("P[{lo}..{hi}]"));
    for i in lo..=hi {
        b.add_basis(i, rp_label(i));
    }
    for g in 0..profile.generator_count() as u8 {
        let k = 1i64 << g;
        for i in lo..=hi {
            if i + k <= hi {
                let mut v = BitVector::zeros(1);
                if binom_mod2(i, k as u64) {
                    v.set(0, true);
                }
                b.set_action(g, i, 0, v);
            }
        }
    }
    b.build()
}

/// H*(CP) window in cohomological degrees: basis x^(2m), lo <= 2m <= hi,
/// Sq^(2k) x^(2m) = C(m,k) x^(2m+2k), odd squares zero.
pub fn stunted_cp(profile: Profile, lo: i64, hi: i64) -> Result<FDModule> {
    if lo % 2 != 0 || hi % 2 != 0 {
        return Err(Error::Contract(format!("stunted_cp needs even bounds, got [{lo}, {hi}]")));
    }
    if lo > hi {
        return Err(Error::Contract(format!("stunted_cp needs lo <= hi, got [{lo}, {hi}]")));
    }
    let mut b = ModuleBuilder::new(profile, format!("CP[{lo}..{hi}]"));
    for i in (lo..=hi).step_by(2) {
        b.add_basis(i, format!("y^{}", i / 2));
    }
    for g in 1..profile.generator_count() as u8 {
        let k = 1i64 << g;
        for i in (lo..=hi).step_by(2) {
            if i + k <= hi {
                let mut v = BitVector::zeros(1);
                if binom_mod2(i / 2, (k / 2) as u64) {
                    v.set(0, true);
                }
                b.set_action(g, i, 0, v);
            }
        }
    }
    b.build()
}

pub fn suspend(m: &FDModule, k: i64) -> FDModule {
    let mut out = m.clone();
    out.min_degree += k;
    out.name = format!("susp({k},{})", m.name);
    out
}

/// Total squares Sq^0..Sq^(2^n) on every degree of a module.
fn total_square_tables(m: &FDModule) -> Result<BTreeMap<i64, Vec<BitMatrix>>> {
    let alg = Algebra::get(m.profile.n)?;
    let top = 1u32 << m.profile.n;
    let idx: Vec<usize> = (1..=top).map(|k| alg.index_of(&MilnorElt::new(&[k])).unwrap()).collect();
    let mut out = BTreeMap::new();
    for d in m.degrees() {
        let all = m.milnor_matrices(d);
        let mut v = vec![BitMatrix::identity(m.dim(d))];
        for &i in &idx {
            v.push(all[i].clone());
        }
        out.insert(d, v);
    }
    Ok(out)
}

pub fn tensor(m: &FDModule, n: &FDModule) -> Result<FDModule> {
    tensor_window(m, n, None, None)
}

/// The subquotient of M ⊗ N in total degrees [lo, hi] (either bound optional).
/// Degrees >= lo form a submodule and degrees > hi a submodule of that, so the
/// window is again a module.
pub fn tensor_window(m: &FDModule, n: &FDModule, lo: Option<i64>, hi: Option<i64>) -> Result<FDModule> {
    if m.profile != n.profile {
        return Err(Error::Contract("tensor factors over different algebras".into()));
    }
    let profile = m.profile;
    let name = match (lo, hi) {
        (None, None) => format!("tensor({},{})", m.name, n.name),
        _ => format!(
            "trunc({},{},tensor({},{}))",
            lo.map_or("-inf".into(), |v| v.to_string()),
            hi.map_or("inf".into(), |v| v.to_string()),
            m.name,
            n.name
        ),
    };
    if m.is_zero() || n.is_zero() {
        return Ok(FDModule::zero(profile, &name));
    }
    let sq_m = total_square_tables(m)?;
    let sq_n = total_square_tables(n)?;
    let (m_lo, m_hi) = (m.min_degree().unwrap(), m.max_degree().unwrap());
    let (n_lo, n_hi) = (n.min_degree().unwrap(), n.max_degree().unwrap());
    let t_lo = lo.map_or(m_lo + n_lo, |l| l.max(m_lo + n_lo));
    let t_hi = hi.map_or(m_hi + n_hi, |h| h.min(m_hi + n_hi));

    // Basis of degree t: pairs (i, a, b), i = deg a ascending.
    let mut offsets: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut b = ModuleBuilder::new(profile, name);
    for t in t_lo..=t_hi {
        for i in m.degrees() {
            let j = t - i;
            if n.dim(j) == 0 {
                continue;
            }
            offsets.insert((t, i), b.dim(t));
            for a in 0..m.dim(i) {
                for c in 0..n.dim(j) {
                    b.add_basis(t, format!("{}*{}", m.label(i, a), n.label(j, c)));
                }
            }
        }
    }
    let empty = BitMatrix::zeros(0, 0);
    for g in 0..profile.generator_count() as u8 {
        let k = 1i64 << g;
        for t in t_lo..=t_hi {
            let target = t + k;
            if target > t_hi {
                continue;
            }
            let tdim = b.dim(target);
            for i in m.degrees() {
                let j = t - i;
                if n.dim(j) == 0 {
                    continue;
                }
                let src_off = offsets[&(t, i)];
                for a in 0..m.dim(i) {
                    for c in 0..n.dim(j) {
                        let mut img = BitVector::zeros(tdim);
                        for l in 0..=k {
                            let (di, dj) = (i + l, j + k - l);
                            let Some(&off) = offsets.get(&(target, di)) else { continue };
                            let sm = sq_m.get(&i).map(|v| &v[l as usize]).unwrap_or(&empty);
                            let sn = sq_n.get(&j).map(|v| &v[(k - l) as usize]).unwrap_or(&empty);
                            if sm.cols() == 0 || sn.cols() == 0 {
                                continue;
                            }
                            let wn = n.dim(dj);
                            for x in sm.row(a).iter_ones() {
                                for y in sn.row(c).iter_ones() {
                                    img.flip(off + x * wn + y);
                                }
                            }
                        }
                        if !img.is_zero() {
                            b.set_action(g, t, src_off + a * n.dim(j) + c, img);
                        }
                    }
                }
            }
        }
    }
    b.build()
}

/// Subquotient in degrees [lo, hi].
pub fn window(m: &FDModule, lo: i64, hi: i64) -> Result<FDModule> {
    let mut b = ModuleBuilder::new(m.profile, format!("trunc({lo},{hi},{})", m.name));
    for d in m.degrees().filter(|&d| d >= lo && d <= hi) {
        for i in 0..m.dim(d) {
            b.add_basis(d, m.label(d, i).to_string());
        }
    }
    for g in 0..m.profile.generator_count() as u8 {
        for d in m.degrees().filter(|&d| d >= lo && d + (1 << g) <= hi) {
            let a = m.gen_matrix(g, d);
            for i in 0..m.dim(d) {
                b.set_action(g, d, i, a.row(i));
            }
        }
    }
    b.build()
}

/// The conjugation χ(Sq^(2^g)) as a set of Milnor basis indices, from
/// Σ_{i=0}^{k} Sq^i χ(Sq^(k-i)) = 0.
fn conjugate_generator(alg: &Algebra, g: u8) -> u64 {
    let k = 1u32 << g;
    let sq = |i: u32| alg.index_of(&MilnorElt::new(&[i])).unwrap();
    let mut chi: Vec<u64> = vec![1]; // χ(Sq^0) = 1
    for mdeg in 1..=k {
        let mut acc = 0u64;
        for i in 1..=mdeg {
            let left = sq(i);
            for b in 0..alg.dim() {
                if chi[(mdeg - i) as usize] >> b & 1 == 1 {
                    acc ^= alg.product_mask(left, b);
                }
            }
        }
        chi.push(acc);
    }
    chi[k as usize]
}

/// The contragredient module: degrees negated, Sq^(2^g) acting by the
/// transpose of χ(Sq^(2^g)).
pub fn dualize(m: &FDModule) -> Result<FDModule> {
    let alg = Algebra::get(m.profile.n)?;
    let mut b = ModuleBuilder::new(m.profile, format!("dual({})", m.name));
    let degs: Vec<i64> = m.degrees().collect();
    for &d in degs.iter().rev() {
        for i in 0..m.dim(d) {
            b.add_basis(-d, format!("{}*", m.label(d, i)));
        }
    }
    for g in 0..m.profile.generator_count() as u8 {
        let chi = conjugate_generator(alg, g);
        let k = 1i64 << g;
        // Dual degree -d receives from dual degree -d - k: transpose of M_d -> M_{d+k}.
        for &d in &degs {
            if m.dim(d + k) == 0 {
                continue;
            }
            let all = m.milnor_matrices(d);
            let mut op = BitMatrix::zeros(m.dim(d), m.dim(d + k));
            for idx in (0..alg.dim()).filter(|&i| chi >> i & 1 == 1) {
                xor_matrix(&mut op, &all[idx]);
            }
            let t = op.transpose();
            for i in 0..m.dim(d + k) {
                b.set_action(g, -d - k, i, t.row(i));
            }
        }
    }
    b.build()
}

/// Closes a set of homogeneous elements under the action, degree by degree.
pub fn closure(m: &FDModule, gens: &[Element]) -> GradedSubspace {
    let mut sub = GradedSubspace::default();
    let mut by_deg: BTreeMap<i64, Vec<BitVector>> = BTreeMap::new();
    for e in gens {
        by_deg.entry(e.degree).or_default().push(e.vector.clone());
    }
    let Some(&start) = by_deg.keys().next() else { return sub };
    let Some(top) = m.max_degree() else { return sub };
    for d in start..=top {
        let mut ech = Echelon::new(m.dim(d));
        if let Some(vs) = by_deg.get(&d) {
            for v in vs {
                ech.insert(v);
            }
        }
        for g in 0..m.profile.generator_count() as u8 {
            let src = d - (1 << g);
            if let Some(prev) = sub.parts.get(&src) {
                for v in prev.basis() {
                    let img = m.act_gen(g, &Element { degree: src, vector: v.clone() });
                    ech.insert(&img.vector);
                }
            }
        }
        if ech.dim() > 0 {
            sub.parts.insert(d, ech);
        }
    }
    sub
}

fn combo_label(m: &FDModule, d: i64, v: &BitVector) -> String {
    let parts: Vec<&str> = v.iter_ones().map(|i| m.label(d, i)).collect();
    parts.join("+")
}

/// Coordinates of `v` in a fully reduced echelon basis.
fn coords(ech: &Echelon, v: &BitVector) -> Option<BitVector> {
    let mut out = BitVector::zeros(ech.dim());
    let mut rem = v.clone();
    for (k, row) in ech.basis().iter().enumerate() {
        let p = row.first_one().unwrap();
        if rem.get(p) {
            rem.xor_assign(row);
            out.set(k, true);
        }
    }
    rem.is_zero().then_some(out)
}

/// Module on a graded subspace assumed invariant, plus its inclusion.
pub fn module_on_subspace(m: &FDModule, sub: &GradedSubspace, name: &str) -> Result<(FDModule, ModuleMap)> {
    let mut b = ModuleBuilder::new(m.profile, name);
    for (&d, ech) in &sub.parts {
        for v in ech.basis() {
            b.add_basis(d, combo_label(m, d, v));
        }
    }
    for g in 0..m.profile.generator_count() as u8 {
        for (&d, ech) in &sub.parts {
            let td = d + (1 << g);
            for (i, v) in ech.basis().iter().enumerate() {
                let img = m.act_gen(g, &Element { degree: d, vector: v.clone() });
                if img.vector.is_zero() {
                    continue;
                }
                let target = sub.parts.get(&td).ok_or_else(|| {
                    Error::Contract(format!("subspace is not invariant under Sq^{} in degree {d}", 1 << g))
                })?;
                let c = coords(target, &img.vector).ok_or_else(|| {
                    Error::Contract(format!("subspace is not invariant under Sq^{} in degree {d}", 1 << g))
                })?;
                b.set_action(g, d, i, c);
            }
        }
    }
    let module = b.build()?;
    let mut matrices = BTreeMap::new();
    for (&d, ech) in &sub.parts {
        matrices.insert(d, BitMatrix::from_rows(m.dim(d), ech.basis()));
    }
    Ok((module, ModuleMap { shift: 0, matrices }))
}

/// The submodule generated by `gens`, with its inclusion into `m`.
pub fn submodule_generated(m: &FDModule, gens: &[Element]) -> Result<(FDModule, ModuleMap)> {
    let sub = closure(m, gens);
    module_on_subspace(m, &sub, &format!("sub({})", m.name))
}

/// Image of an inclusion map as a graded subspace.
pub fn image_subspace(source: &FDModule, map: &ModuleMap, target: &FDModule) -> GradedSubspace {
    let mut out = GradedSubspace::default();
    for d in source.degrees() {
        let td = d + map.shift;
        let mut ech = Echelon::new(target.dim(td));
        if let Some(mat) = map.matrices.get(&d) {
            for r in 0..mat.rows() {
                ech.insert(&mat.row(r));
            }
        }
        if ech.dim() > 0 {
            out.parts.insert(td, ech);
        }
    }
    out
}

/// M / sub with induced action, plus the projection map.
pub fn quotient(m: &FDModule, sub: &GradedSubspace) -> Result<(FDModule, ModuleMap)> {
    for g in 0..m.profile.generator_count() as u8 {
        for (&d, ech) in &sub.parts {
            for v in ech.basis() {
                let img = m.act_gen(g, &Element { degree: d, vector: v.clone() });
                if !sub.contains(&img) {
                    return Err(Error::Contract(format!(
                        "quotient by a non-invariant subspace: Sq^{} leaves it in degree {d}",
                        1 << g
                    )));
                }
            }
        }
    }
    // Complement: basis vectors at non-pivot positions.
    let mut keep: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for d in m.degrees() {
        let mut is_pivot = vec![false; m.dim(d)];
        if let Some(ech) = sub.parts.get(&d) {
            for row in ech.basis() {
                is_pivot[row.first_one().unwrap()] = true;
            }
        }
        let k: Vec<usize> = (0..m.dim(d)).filter(|&i| !is_pivot[i]).collect();
        if !k.is_empty() {
            keep.insert(d, k);
        }
    }
    let project = |d: i64, v: &BitVector| -> BitVector {
        let red = match sub.parts.get(&d) {
            Some(ech) => ech.reduce(v),
            None => v.clone(),
        };
        let cols = keep.get(&d).map_or(&[][..], Vec::as_slice);
        BitVector::from_indices(cols.len(), cols.iter().enumerate().filter(|(_, &c)| red.get(c)).map(|(k, _)| k))
    };
    let mut b = ModuleBuilder::new(m.profile, format!("quot({})", m.name));
    for (&d, cols) in &keep {
        for &c in cols {
            b.add_basis(d, m.label(d, c).to_string());
        }
    }
    for g in 0..m.profile.generator_count() as u8 {
        for (&d, cols) in &keep {
            let td = d + (1 << g);
            for (i, &c) in cols.iter().enumerate() {
                let img = m.act_gen(g, &m.basis_element(d, c));
                if m.dim(td) == 0 {
                    continue;
                }
                let p = project(td, &img.vector);
                if !p.is_zero() {
                    b.set_action(g, d, i, p);
                }
            }
        }
    }
    let q = b.build()?;
    let mut matrices = BTreeMap::new();
    for d in m.degrees() {
        let rows: Vec<BitVector> = (0..m.dim(d)).map(|i| project(d, &BitVector::unit(m.dim(d), i))).collect();
        let cols = keep.get(&d).map_or(0, Vec::len);
        matrices.insert(d, BitMatrix::from_rows(cols, &rows));
    }
    Ok((q, ModuleMap { shift: 0, matrices }))
}

/// Checks that every Milnor basis element acts the same way through the two
/// generator decompositions, and that every product Sq^(2^g) * b acts as its
/// Milnor expansion. The second check is complete: together they certify a
/// well-defined A(n)-action.
pub fn verify_action(m: &FDModule) -> ActionReport {
    let alg = Algebra::get(m.profile.n).expect("supported profile");
    let mut report = ActionReport {
        module: m.name.clone(),
        checked_elements: 0,
        checked_relations: 0,
        first_discrepancy: None,
    };
    let first_diff = |a: &BitMatrix, b: &BitMatrix| -> Option<(usize, usize)> {
        for r in 0..a.rows() {
            if a.row(r) != b.row(r) {
                let mut x = a.row(r);
                x.xor_assign(&b.row(r));
                return Some((r, x.first_one().unwrap()));
            }
        }
        None
    };
    for d in m.degrees() {
        let primary = m.milnor_matrices_with(d, false);
        let alt = m.milnor_matrices_with(d, true);
        for idx in 0..alg.dim() {
            report.checked_elements += 1;
            if let Some((row, col)) = first_diff(&primary[idx], &alt[idx]) {
                report.first_discrepancy = Some(Discrepancy {
                    operation: alg.element(idx).to_string(),
                    degree: d,
                    row,
                    col,
                });
                return report;
            }
        }
        for g in 0..m.profile.generator_count() as u8 {
            let gi = alg.generator_index(g);
            for rest in 0..alg.dim() {
                let deg = alg.degree(gi) + alg.degree(rest);
                if deg > alg.top_degree() {
                    continue;
                }
                report.checked_relations += 1;
                let rest_deg = d + alg.degree(rest) as i64;
                let lhs = m.compose_gen(&primary[rest], g, rest_deg);
                let mut rhs = BitMatrix::zeros(m.dim(d), m.dim(d + deg as i64));
                let mask = alg.product_mask(gi, rest);
                for t in (0..alg.dim()).filter(|&t| mask >> t & 1 == 1) {
                    xor_matrix(&mut rhs, &primary[t]);
                }
                if let Some((row, col)) = first_diff(&lhs, &rhs) {
                    report.first_discrepancy = Some(Discrepancy {
                        operation: format!("Sq{}*{}", 1 << g, alg.element(rest)),
                        degree: d,
                        row,
                        col,
                    });
                    return report;
                }
            }
        }
    }
    report
}

/// Flips one entry of a generator action matrix (fault injection for tests).
pub fn corrupt_action(m: &FDModule, g: u8, d: i64, row: usize, col: usize) -> FDModule {
    let mut out = m.clone();
    let k = (d - out.min_degree) as usize;
    out.actions[g as usize][k].flip(row, col);
    out
}

/// Graded isomorphism with identical action matrices (same basis order).
pub fn identical_action(a: &FDModule, b: &FDModule) -> bool {
    if a.profile != b.profile || a.dims_by_degree() != b.dims_by_degree() {
        return false;
    }
    for g in 0..a.profile.generator_count() as u8 {
        for d in a.degrees() {
            if a.gen_matrix(g, d) != b.gen_matrix(g, d) {
                return false;
            }
        }
    }
    true
}

/// Named A(2)-modules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedModule {
    M10,
    A2modA1,
    A2modE2,
    A2modSq1,
    A2modSq2,
}

impl NamedModule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "M10" => Ok(NamedModule::M10),
            "A2//A1" | "A2modA1" => Ok(NamedModule::A2modA1),
            "A2//E2" | "A2modE2" => Ok(NamedModule::A2modE2),
            "A2/Sq1" => Ok(NamedModule::A2modSq1),
            "A2/Sq2" => Ok(NamedModule::A2modSq2),
            other => Err(Error::Config(format!("unknown module name {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NamedModule::M10 => "M10",
            NamedModule::A2modA1 => "A2//A1",
            NamedModule::A2modE2 => "A2//E2",
            NamedModule::A2modSq1 => "A2/Sq1",
            NamedModule::A2modSq2 => "A2/Sq2",
        }
    }
}

/// A(2) as a left module over itself; basis labels are Milnor names.
pub fn free_a2() -> Result<FDModule> {
    let alg = Algebra::get(2)?;
    let p = alg.profile;
    let mut b = ModuleBuilder::new(p, "A2");
    let mut local = vec![0usize; alg.dim()];
    for idx in 0..alg.dim() {
        local[idx] = b.add_basis(alg.degree(idx) as i64, alg.element(idx).to_string());
    }
    for g in 0..3u8 {
        let gi = alg.generator_index(g);
        for idx in 0..alg.dim() {
            let td = alg.degree(idx) as i64 + (1 << g);
            let mask = alg.product_mask(gi, idx);
            if mask == 0 {
                continue;
            }
            let range = alg.degree_range(td);
            let v = BitVector::from_indices(range.len(), (0..64).filter(|t| mask >> t & 1 == 1).map(|t| t - range.start));
            b.set_action(g, alg.degree(idx) as i64, local[idx], v);
        }
    }
    b.build()
}

/// A(2) / A(2){annihilators}, the cyclic module killed by the given elements.
pub fn cyclic_quotient(annihilators: &[MilnorElt], name: &str) -> Result<FDModule> {
    let alg = Algebra::get(2)?;
    let a2 = free_a2()?;
    let gens: Vec<Element> = annihilators
        .iter()
        .map(|r| {
            let idx = alg.index_of(r).ok_or_else(|| Error::Contract(format!("{r} is not in A2")))?;
            let d = alg.degree(idx) as i64;
            let range = alg.degree_range(d);
            Ok(Element { degree: d, vector: BitVector::unit(range.len(), idx - range.start) })
        })
        .collect::<Result<_>>()?;
    let ideal = closure(&a2, &gens);
    let (q, _) = quotient(&a2, &ideal)?;
    Ok(q.with_name(name))
}

/// Milnor basis elements whose classes form a basis of A(2) / A(2){annihilators},
/// chosen greedily in basis order within each degree.
pub fn cyclic_quotient_reps(annihilators: &[MilnorElt]) -> Result<Vec<MilnorElt>> {
    let alg = Algebra::get(2)?;
    let a2 = free_a2()?;
    let mut gens = Vec::new();
    for r in annihilators {
        let idx = alg.index_of(r).ok_or_else(|| Error::Contract(format!("{r} is not in A2")))?;
        let range = alg.degree_range(alg.degree(idx) as i64);
        gens.push(Element { degree: alg.degree(idx) as i64, vector: BitVector::unit(range.len(), idx - range.start) });
    }
    let ideal = closure(&a2, &gens);
    let mut reps = Vec::new();
    for d in 0..=alg.top_degree() as i64 {
        let range = alg.degree_range(d);
        let mut ech = ideal.parts.get(&d).cloned().unwrap_or_else(|| Echelon::new(range.len()));
        for idx in range.clone() {
            if ech.insert(&BitVector::unit(range.len(), idx - range.start)) {
                reps.push(alg.element(idx).clone());
            }
        }
    }
    Ok(reps)
}

pub fn named_module(name: NamedModule) -> Result<FDModule> {
    let sq = |e: &[u32]| MilnorElt::new(e);
    match name {
        NamedModule::A2modSq1 => cyclic_quotient(&[sq(&[1])], "A2/Sq1"),
        NamedModule::A2modSq2 => cyclic_quotient(&[sq(&[2])], "A2/Sq2"),
        NamedModule::A2modA1 => cyclic_quotient(&[sq(&[1]), sq(&[2])], "A2//A1"),
        NamedModule::A2modE2 => cyclic_quotient(&[sq(&[1]), sq(&[0, 1]), sq(&[0, 0, 1])], "A2//E2"),
        NamedModule::M10 => {
            // A2//A1 modulo the submodule on its degree-7 class.
            let big = named_module(NamedModule::A2modA1)?;
            if big.dim(7) != 1 {
                return Err(Error::Internal(format!("A2//A1 has dimension {} in degree 7", big.dim(7))));
            }
            let sub = closure(&big, &[big.basis_element(7, 0)]);
            let (q, _) = quotient(&big, &sub)?;
            let mut b = ModuleBuilder::new(q.profile, "M10");
            let names = [(0, "1"), (4, "Sq4"), (6, "Sq2Sq4"), (10, "Sq4Sq2Sq4")];
            for (d, l) in names {
                if q.dim(d) != 1 {
                    return Err(Error::Internal(format!("M10 has dimension {} in degree {d}", q.dim(d))));
                }
                b.add_basis(d, l);
            }
            if q.total_dim() != 4 {
                return Err(Error::Internal(format!("M10 has dimension {}", q.total_dim())));
            }
            for g in 0..3u8 {
                for (d, _) in names {
                    if q.dim(d + (1 << g)) == 1 {
                        b.set_action(g, d, 0, q.gen_matrix(g, d).row(0));
                    }
                }
            }
            b.build()
        }
    }
}
