//! Series in p_j = z^j + z^-j with 2-adic coefficients, the fixed point for
//! θ = c4·sqrt(X1 X2), the unit factor of the axial class, and a small model
//! of tmf^*(P × P) with L-classes for checking nonvanishing of powers.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith2::{nu_binom, TwoAdic};
use crate::error::{Error, Result};

/// Truncation index and precision used when none are given.
pub const DEFAULT_J: usize = 16;
pub const DEFAULT_K: u32 = 32;

/// Finite sum Σ c_j p_j with c_j known mod 2^K. Index 0 is the constant term.
#[derive(Clone, PartialEq, Eq)]
pub struct PSeries {
    coeffs: Vec<TwoAdic>,
    prec: u32,
    overflow: bool,
}

impl PSeries {
    pub fn zero(j: usize, k: u32) -> Self {
        assert!(k <= 64, "precision is at most 64 bits");
        PSeries { coeffs: vec![TwoAdic::zero(k); j + 1], prec: k, overflow: false }
    }

    pub fn constant(c: i64, j: usize, k: u32) -> Self {
        let mut s = Self::zero(j, k);
        s.coeffs[0] = TwoAdic::new(c, k);
        s
    }

    /// c·p_i. Indices past J set the overflow flag.
    pub fn monomial(c: i64, i: usize, j: usize, k: u32) -> Self {
        let mut s = Self::zero(j, k);
        s.add_at(i, TwoAdic::new(c, k));
        s
    }

    /// From (index, coefficient) pairs.
    pub fn from_terms(terms: &[(usize, i64)], j: usize, k: u32) -> Self {
        let mut s = Self::zero(j, k);
        for &(i, c) in terms {
            s.add_at(i, TwoAdic::new(c, k));
        }
        s
    }

    pub fn max_index(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Set once any nonzero contribution beyond the max index was discarded.
    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn coeff(&self, i: usize) -> TwoAdic {
        self.coeffs.get(i).copied().unwrap_or_else(|| TwoAdic::zero(self.prec))
    }

    pub fn coeffs(&self) -> &[TwoAdic] {
        &self.coeffs
    }

    pub fn set(&mut self, i: usize, c: TwoAdic) {
        assert!(i <= self.max_index(), "index {i} is past the truncation");
        self.coeffs[i] = self.fit(c);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn fit(&self, c: TwoAdic) -> TwoAdic {
        assert!(c.precision() >= self.prec, "coefficient {c:?} is too coarse for 2^{}", self.prec);
        c.truncate(self.prec)
    }

    fn add_at(&mut self, i: usize, c: TwoAdic) {
        let c = self.fit(c);
        if i > self.max_index() {
            self.overflow |= !c.is_zero();
        } else {
            self.coeffs[i] = self.coeffs[i] + c;
        }
    }

    fn check_shape(&self, o: &PSeries) -> Result<()> {
        if self.max_index() != o.max_index() || self.prec != o.prec {
            return Err(Error::Contract(format!(
                "series shapes differ: (J={}, K={}) vs (J={}, K={})",
                self.max_index(),
                self.prec,
                o.max_index(),
                o.prec
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &PSeries) -> Result<PSeries> {
        self.check_shape(o)?;
        let mut r = self.clone();
        for (i, &c) in o.coeffs.iter().enumerate() {
            r.coeffs[i] = r.coeffs[i] + c;
        }
        r.overflow |= o.overflow;
        Ok(r)
    }

    pub fn sub(&self, o: &PSeries) -> Result<PSeries> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> PSeries {
        let mut r = self.clone();
        for c in &mut r.coeffs {
            *c = -*c;
        }
        r
    }

    pub fn scale(&self, c: TwoAdic) -> PSeries {
        let mut r = self.clone();
        for x in &mut r.coeffs {
            *x = (*x * c).truncate(self.prec);
        }
        r
    }

    /// Same series viewed at another truncation index. Shrinking flags any
    /// nonzero coefficient it drops.
    pub fn resize(&self, j: usize) -> PSeries {
        let mut r = PSeries::zero(j, self.prec);
        r.overflow = self.overflow;
        for (i, &c) in self.coeffs.iter().enumerate() {
            r.add_at(i, c);
        }
        r
    }

    /// The view at index J without flagging: the tail stays part of the
    /// untruncated series, it is just not shown.
    pub fn view(&self, j: usize) -> PSeries {
        let mut r = PSeries::zero(j, self.prec);
        r.overflow = self.overflow;
        for i in 0..=j.min(self.max_index()) {
            r.coeffs[i] = self.coeffs[i];
        }
        r
    }

    /// Coefficients as signed integers, lowest index first.
    pub fn signed_coeffs(&self) -> Vec<i128> {
        self.coeffs.iter().map(|c| c.signed()).collect()
    }
}

impl fmt::Debug for PSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (J={}, K={}", self.max_index(), self.prec)?;
        if self.overflow {
            write!(f, ", overflow")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for PSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}·p{i}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Product under p_i p_j = p_{i+j} + p_{|i-j|}, with p_i p_i = p_{2i} + 2.
pub fn pmul(a: &PSeries, b: &PSeries) -> Result<PSeries> {
    a.check_shape(b)?;
    let mut r = PSeries::zero(a.max_index(), a.prec);
    r.overflow = a.overflow || b.overflow;
    let two = TwoAdic::new(2, a.prec);
    for (i, &x) in a.coeffs.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.coeffs.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let c = (x * y).truncate(a.prec);
            if i == 0 || j == 0 {
                r.add_at(i + j, c);
            } else {
                r.add_at(i + j, c);
                if i == j {
                    r.add_at(0, (c * two).truncate(a.prec));
                } else {
                    r.add_at(i.abs_diff(j), c);
                }
            }
        }
    }
    Ok(r)
}

/// Working index for the θ computations: past it every coefficient of θ and
/// of the axial series vanishes mod 2^K.
pub fn working_index(j: usize, k: u32) -> usize {
    j.max(2 * k as usize + 8)
}

fn check_lead(lead: i64) -> Result<()> {
    if lead == 0 || lead % 16 != 0 {
        return Err(Error::Contract(format!("leading coefficient {lead} is not a nonzero multiple of 16")));
    }
    Ok(())
}

/// lead·p1 + Σ_i 2γ_i θ^i p_{i+1}, evaluated at θ's own truncation.
fn theta_rhs(gammas: &[TwoAdic], lead: i64, theta: &PSeries) -> Result<PSeries> {
    let (w, k) = (theta.max_index(), theta.precision());
    let mut out = PSeries::monomial(lead, 1, w, k);
    let mut power = PSeries::constant(1, w, k);
    for (idx, &g) in gammas.iter().enumerate() {
        power = pmul(&power, theta)?;
        if power.is_zero() {
            break;
        }
        let i = idx + 1;
        let shift = PSeries::monomial(2, i + 1, w, k).scale(g);
        out = out.add(&pmul(&power, &shift)?)?;
    }
    Ok(out)
}

/// θ solved at the working index, with the requested view.
#[derive(Clone, Debug)]
pub struct Theta {
    pub gammas: Vec<TwoAdic>,
    pub lead: i64,
    pub iterations: usize,
    /// θ at the working index.
    pub full: PSeries,
    /// θ at index J.
    pub series: PSeries,
}

/// Fixed point of θ = 16 p1 + Σ 2γ_i θ^i p_{i+1} mod 2^K. `gammas[0]` is γ_1.
pub fn solve_theta(gammas: &[TwoAdic], j: usize, k: u32) -> Result<PSeries> {
    Ok(solve_theta_with_lead(gammas, 16, j, k)?.series)
}

/// Same with the leading coefficient 16 replaced by `lead`, a multiple of 16.
pub fn solve_theta_with_lead(gammas: &[TwoAdic], lead: i64, j: usize, k: u32) -> Result<Theta> {
    check_lead(lead)?;
    let gammas: Vec<TwoAdic> = gammas.iter().map(|g| g.truncate(k)).collect();
    if let Some(g) = gammas.iter().find(|g| g.precision() < k) {
        return Err(Error::Contract(format!("gamma {g:?} is known to less than 2^{k}")));
    }
    let w = working_index(j, k);
    let mut theta = PSeries::zero(w, k);
    // Each round fixes at least one more bit.
    for round in 1..=(k as usize + 2) {
        let next = theta_rhs(&gammas, lead, &theta)?;
        if next == theta {
            if theta.overflowed() {
                return Err(Error::Internal("theta iteration dropped nonzero terms past the working index".into()));
            }
            let series = theta.view(j);
            let out = Theta { gammas, lead, iterations: round, full: theta, series };
            check_theta(&out.full)?;
            return Ok(out);
        }
        theta = next;
    }
    Err(Error::Internal(format!("theta iteration did not converge in {} rounds", k + 2)))
}

/// Parity and valuation shape of θ: nothing at even indices, and 2^{4+i}
/// divides the coefficient of p_{2i+1}.
pub fn check_theta(theta: &PSeries) -> Result<()> {
    for (idx, c) in theta.coeffs().iter().enumerate() {
        if idx % 2 == 0 {
            if !c.is_zero() {
                return Err(Error::Internal(format!("theorem check failed: theta has p{idx} coefficient {c}")));
            }
        } else {
            let bound = 4 + (idx as u32 - 1) / 2;
            if !c.valuation().at_least(bound.min(theta.precision())) {
                return Err(Error::Internal(format!(
                    "theorem check failed: theta coefficient of p{idx} is {c}, valuation {} < {bound}",
                    c.valuation()
                )));
            }
        }
    }
    Ok(())
}

/// θ − RHS(θ) recomputed at a larger index than the solve used, shown up to J.
pub fn theta_residual(t: &Theta, j: usize) -> Result<PSeries> {
    let wider = t.full.resize(t.full.max_index() + 16);
    let rhs = theta_rhs(&t.gammas, t.lead, &wider)?;
    Ok(wider.sub(&rhs)?.view(j))
}

/// Axial class divided by sqrt(X1 X2): p1 + 2 Σ κ_i θ^i p_{i+1}.
pub fn axial_series(kappas: &[TwoAdic], theta: &Theta) -> Result<PSeries> {
    let (w, k) = (theta.full.max_index(), theta.full.precision());
    let mut out = PSeries::monomial(1, 1, w, k);
    let mut power = PSeries::constant(1, w, k);
    for (idx, &kap) in kappas.iter().enumerate() {
        power = pmul(&power, &theta.full)?;
        if power.is_zero() {
            break;
        }
        let shift = PSeries::monomial(2, idx + 2, w, k).scale(kap.truncate(k));
        out = out.add(&pmul(&power, &shift)?)?;
    }
    if out.overflowed() {
        return Err(Error::Internal("axial series dropped nonzero terms past the working index".into()));
    }
    Ok(out)
}

/// The axial class as (X1 + X2)·(u + Σ_j β_j p_{2j}) with β_j = 2^{4+j} α_j.
#[derive(Clone, Debug)]
pub struct UnitDecomposition {
    pub u: TwoAdic,
    /// α_j for j = 1..=J/2.
    pub alphas: Vec<TwoAdic>,
    /// β_j for j = 1..=J/2.
    pub betas: Vec<TwoAdic>,
    /// u + Σ β_j p_{2j} at the working index.
    pub unit: PSeries,
}

impl UnitDecomposition {
    /// p1 times the unit factor, at index J.
    pub fn expand(&self, j: usize) -> Result<PSeries> {
        let p1 = PSeries::monomial(1, 1, self.unit.max_index(), self.unit.precision());
        Ok(pmul(&p1, &self.unit)?.view(j))
    }
}

/// Exact division of an odd-supported series by p1.
fn divide_by_p1(s: &PSeries) -> Result<PSeries> {
    let (w, k) = (s.max_index(), s.precision());
    for idx in (0..=w).step_by(2) {
        if !s.coeff(idx).is_zero() {
            return Err(Error::Internal(format!("theorem check failed: axial series has p{idx} term")));
        }
    }
    // p1·(e0 + Σ e_m p_{2m}) has p1-coefficient e0 + e1 and p_{2m+1}-coefficient e_m + e_{m+1}.
    let top = (w - 1) / 2;
    let mut e = vec![TwoAdic::zero(k); top + 2];
    for m in (1..=top).rev() {
        e[m] = s.coeff(2 * m + 1) - e[m + 1];
    }
    e[0] = s.coeff(1) - e[1];
    let mut out = PSeries::zero(w, k);
    for (m, &c) in e.iter().enumerate().take(top + 1) {
        out.set(2 * m, c);
    }
    Ok(out)
}

/// Shape check for a unit factor u + Σ β_j p_{2j}: u odd, no odd indices,
/// ν(β_j) ≥ 4 + j. Returns (u, α_j for j ≤ J/2).
fn unit_shape(unit: &PSeries, j: usize) -> Result<(TwoAdic, Vec<TwoAdic>, Vec<TwoAdic>)> {
    let k = unit.precision();
    let u = unit.coeff(0);
    if !u.is_odd() {
        return Err(Error::Internal(format!("theorem check failed: unit constant {u} is even")));
    }
    for idx in (1..=unit.max_index()).step_by(2) {
        if !unit.coeff(idx).is_zero() {
            return Err(Error::Internal(format!("theorem check failed: unit factor has p{idx} term")));
        }
    }
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    for m in 1..=unit.max_index() / 2 {
        let b = unit.coeff(2 * m);
        let bound = (4 + m as u32).min(k);
        if !b.valuation().at_least(bound) {
            return Err(Error::Internal(format!(
                "theorem check failed: beta_{m} = {b} has valuation {} < {}",
                b.valuation(),
                4 + m
            )));
        }
        if 2 * m <= j {
            betas.push(b);
            alphas.push(b.shr_exact(bound)?);
        }
    }
    Ok((u, alphas, betas))
}

/// Unit decomposition of the axial class for the given κ and γ (index 0 is κ_1, γ_1).
pub fn axial_decompose(kappas: &[TwoAdic], gammas: &[TwoAdic], j: usize, k: u32) -> Result<UnitDecomposition> {
    axial_decompose_with_lead(kappas, gammas, 16, j, k)
}

pub fn axial_decompose_with_lead(
    kappas: &[TwoAdic],
    gammas: &[TwoAdic],
    lead: i64,
    j: usize,
    k: u32,
) -> Result<UnitDecomposition> {
    let theta = solve_theta_with_lead(gammas, lead, j, k)?;
    let s = axial_series(kappas, &theta)?;
    let unit = divide_by_p1(&s)?;
    let (u, alphas, betas) = unit_shape(&unit, j)?;
    let d = UnitDecomposition { u, alphas, betas, unit };
    if d.expand(s.max_index())? != s.view(s.max_index()) {
        return Err(Error::Internal("p1 times the unit factor does not give back the axial series".into()));
    }
    Ok(d)
}

/// u + Σ 2^{4+i} α_i p_{2i} at index W and precision K.
pub fn unit_series(u: TwoAdic, alphas: &[TwoAdic], w: usize, k: u32) -> PSeries {
    let mut s = PSeries::zero(w, k);
    s.set(0, u.truncate(k));
    for (idx, &a) in alphas.iter().enumerate() {
        let m = idx + 1;
        if 2 * m > w {
            break;
        }
        s.set(2 * m, a.shl(4 + m as u32).truncate(k));
    }
    s
}

/// Inverse of u + Σ 2^{4+i} α_i p_{2i}, as (u', α'_i) with every α'_i that is
/// nonzero mod its precision. The product is checked against 1 up to index J.
pub fn invert_unit(u: TwoAdic, alphas: &[TwoAdic], j: usize, k: u32) -> Result<(TwoAdic, Vec<TwoAdic>)> {
    if !u.is_odd() {
        return Err(Error::Contract(format!("unit constant {u} is even")));
    }
    let w = working_index(j.max(2 * alphas.len()), k);
    let e = unit_series(u, alphas, w, k);
    let mut f = PSeries::zero(w, k);
    f.set(0, u.truncate(k).inverse()?);
    let two = PSeries::constant(2, w, k);
    for _ in 0..=(k as usize + 2) {
        let next = pmul(&f, &two.sub(&pmul(&e, &f)?)?)?;
        if next == f {
            break;
        }
        f = next;
    }
    let one = PSeries::constant(1, w, k);
    if pmul(&e, &f)?.view(j) != one.view(j) || f.overflowed() {
        return Err(Error::Internal("unit inverse does not multiply back to 1".into()));
    }
    let (u2, mut alphas2, _) = unit_shape(&f, w)?;
    while alphas2.last().is_some_and(|a| a.is_zero()) {
        alphas2.pop();
    }
    Ok((u2, alphas2))
}

/// Basis monomial of the per-factor ring Z[X, L]/(L² = 2L, LX = 2X): either
/// X^a or L. `l` with `a > 0` never occurs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub l: bool,
    pub a: u32,
}

impl Factor {
    pub const ONE: Factor = Factor { l: false, a: 0 };
    pub const L: Factor = Factor { l: true, a: 0 };

    pub fn x(a: u32) -> Factor {
        Factor { l: false, a }
    }

    /// Product as (multiplier, basis monomial).
    fn mul(self, o: Factor) -> (i64, Factor) {
        match (self.l, o.l) {
            (false, false) => (1, Factor::x(self.a + o.a)),
            (true, true) => (2, Factor::L),
            (true, false) | (false, true) => {
                let a = self.a + o.a;
                if a == 0 {
                    (1, Factor::L)
                } else {
                    (2, Factor::x(a))
                }
            }
        }
    }
}

/// Integer combination of products of a factor-1 and a factor-2 monomial.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TmfRingElt {
    terms: BTreeMap<(Factor, Factor), BigInt>,
}

impl TmfRingElt {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::term(1, Factor::ONE, Factor::ONE)
    }

    pub fn term(c: i64, f1: Factor, f2: Factor) -> Self {
        let mut e = Self::zero();
        e.add_term(BigInt::from(c), f1, f2);
        e
    }

    pub fn x1(a: u32) -> Self {
        Self::term(1, Factor::x(a), Factor::ONE)
    }

    pub fn x2(a: u32) -> Self {
        Self::term(1, Factor::ONE, Factor::x(a))
    }

    pub fn l1() -> Self {
        Self::term(1, Factor::L, Factor::ONE)
    }

    pub fn l2() -> Self {
        Self::term(1, Factor::ONE, Factor::L)
    }

    fn add_term(&mut self, c: BigInt, f1: Factor, f2: Factor) {
        let key = (f1, f2);
        let entry = self.terms.entry(key).or_default();
        *entry += c;
        if *entry == BigInt::from(0) {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Factor, Factor), &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, f1: Factor, f2: Factor) -> BigInt {
        self.terms.get(&(f1, f2)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &TmfRingElt) -> TmfRingElt {
        let mut r = self.clone();
        for (&(f1, f2), c) in &o.terms {
            r.add_term(c.clone(), f1, f2);
        }
        r
    }

    pub fn sub(&self, o: &TmfRingElt) -> TmfRingElt {
        self.add(&o.scale(-1))
    }

    pub fn scale(&self, c: i64) -> TmfRingElt {
        let mut r = TmfRingElt::zero();
        for (&(f1, f2), x) in &self.terms {
            r.add_term(x * c, f1, f2);
        }
        r
    }

    pub fn mul(&self, o: &TmfRingElt) -> TmfRingElt {
        let mut r = TmfRingElt::zero();
        for (&(a1, a2), x) in &self.terms {
            for (&(b1, b2), y) in &o.terms {
                let (c1, f1) = a1.mul(b1);
                let (c2, f2) = a2.mul(b2);
                r.add_term(x * y * (c1 * c2), f1, f2);
            }
        }
        r
    }

    /// Drop monomials whose X-degree (8 per power of X) exceeds a cap.
    pub fn restrict(&self, caps: (u64, u64)) -> TmfRingElt {
        let mut r = self.clone();
        r.terms.retain(|(f1, f2), _| 8 * f1.a as u64 <= caps.0 && 8 * f2.a as u64 <= caps.1);
        r
    }
}

impl fmt::Display for TmfRingElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let name = |fac: Factor, i: u8| match (fac.l, fac.a) {
            (true, _) => Some(format!("L{i}")),
            (false, 0) => None,
            (false, 1) => Some(format!("X{i}")),
            (false, a) => Some(format!("X{i}^{a}")),
        };
        for (n, (&(f1, f2), c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = [name(f1, 1), name(f2, 2)].into_iter().flatten().collect();
            let neg = c.sign() == num_bigint::Sign::Minus;
            let mag = if neg { -c.clone() } else { c.clone() };
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == BigInt::from(1) {
                write!(f, "{}", mono.join(" "))?;
            } else {
                write!(f, "{mag} {}", mono.join(" "))?;
            }
        }
        Ok(())
    }
}

/// e^n in normal form, dropping monomials past the caps after every step.
pub fn tmfring_pow(e: &TmfRingElt, n: u32, caps: (u64, u64)) -> TmfRingElt {
    let mut r = TmfRingElt::one().restrict(caps);
    let base = e.restrict(caps);
    for _ in 0..n {
        r = r.mul(&base).restrict(caps);
    }
    r
}

/// Where an order exponent came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Computed { chart: String },
    Assumed { note: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderEntry {
    /// The monomial is annihilated by 2^exponent and no smaller power.
    pub exponent: u32,
    pub provenance: Provenance,
}

/// Orders of the monomials X1^i X2^j in a group with fixed dimension caps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrderTable {
    pub caps: (u64, u64),
    pub entries: BTreeMap<(u64, u64), OrderEntry>,
}

impl OrderTable {
    pub fn new(caps: (u64, u64)) -> Self {
        OrderTable { caps, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, i: u64, j: u64, exponent: u32, provenance: Provenance) {
        self.entries.insert((i, j), OrderEntry { exponent, provenance });
    }

    pub fn get(&self, i: u64, j: u64) -> Option<&OrderEntry> {
        self.entries.get(&(i, j))
    }

    pub fn all_computed(&self) -> bool {
        self.entries.values().all(|e| matches!(e.provenance, Provenance::Computed { .. }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub i: u64,
    pub j: u64,
    pub nu: u32,
    pub exponent: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nonvanishing {
    pub nonzero: bool,
    pub witness: Option<Witness>,
    /// Monomials X1^i X2^(ℓ-i) left after the caps.
    pub surviving: Vec<(u64, u64)>,
}

/// Whether (X1 + X2)^ℓ is nonzero: some surviving X1^i X2^(ℓ-i) has
/// ν C(ℓ, i) below the exponent of its order. Witness is the smallest such i.
pub fn certify_nonvanishing(ell: u64, caps: (u64, u64), orders: &OrderTable) -> Result<Nonvanishing> {
    let surviving: Vec<(u64, u64)> =
        (0..=ell).filter(|&i| 8 * i <= caps.0 && 8 * (ell - i) <= caps.1).map(|i| (i, ell - i)).collect();
    let mut witness = None;
    for &(i, j) in &surviving {
        let entry = orders
            .get(i, j)
            .ok_or_else(|| Error::Refused(format!("no order known for X1^{i} X2^{j}")))?;
        let nu = nu_binom(ell, i)?;
        if witness.is_none() && nu < entry.exponent {
            witness = Some(Witness { i, j, nu, exponent: entry.exponent });
        }
    }
    Ok(Nonvanishing { nonzero: witness.is_some(), witness, surviving })
}
