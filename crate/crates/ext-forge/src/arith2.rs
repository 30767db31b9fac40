//! 2-adic arithmetic: digit sums, valuations, Kummer and Lucas rules, and
//! 2-adic integers known modulo a power of two.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of ones in the binary expansion.
pub fn alpha(m: u64) -> u32 {
    m.count_ones()
}

/// Exact 2-adic valuation of a nonzero integer.
pub fn nu(n: i64) -> Result<u32> {
    if n == 0 {
        return Err(Error::Contract("nu(0) is infinite".into()));
    }
    Ok(n.trailing_zeros())
}

/// Valuation of C(a, b) by Kummer's theorem: alpha(b) + alpha(a-b) - alpha(a).
pub fn nu_binom(a: u64, b: u64) -> Result<u32> {
    if b > a {
        return Err(Error::Contract(format!("nu_binom({a}, {b}) needs b <= a")));
    }
    Ok(alpha(b) + alpha(a - b) - alpha(a))
}

/// C(i, k) mod 2, with negative `i` read through its 2-adic expansion
/// (two's complement has exactly the all-ones tail).
pub fn binom_mod2(i: i64, k: u64) -> bool {
    (i as u64) & k == k
}

pub const DEFAULT_PRECISION: u32 = 64;

#[inline]
fn mask(prec: u32) -> u64 {
    if prec >= 64 {
        u64::MAX
    } else {
        (1u64 << prec) - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Exact(u32),
    /// The value is zero modulo 2^K.
    AtLeast(u32),
}

impl Valuation {
    /// Whether the valuation is known to be at least `n`.
    pub fn at_least(self, n: u32) -> bool {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v >= n,
        }
    }

    /// A lower bound for the valuation.
    pub fn lower(self) -> u32 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// A 2-adic integer known modulo 2^prec.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoAdic {
    value: u64,
    prec: u32,
}

impl TwoAdic {
    pub fn new(value: i64, prec: u32) -> Self {
        assert!(prec <= 64, "precision is at most 64 bits");
        TwoAdic { value: (value as u64) & mask(prec), prec }
    }

    pub fn from_u64(value: u64, prec: u32) -> Self {
        assert!(prec <= 64, "precision is at most 64 bits");
        TwoAdic { value: value & mask(prec), prec }
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_u64(0, prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_u64(1, prec)
    }

    /// Residue in [0, 2^prec).
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn precision(self) -> u32 {
        self.prec
    }

    /// Residue as a signed integer in (-2^(prec-1), 2^(prec-1)].
    pub fn signed(self) -> i128 {
        let v = self.value as i128;
        if self.prec == 0 {
            return 0;
        }
        let m = 1i128 << self.prec;
        if v > m / 2 {
            v - m
        } else {
            v
        }
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn is_odd(self) -> bool {
        self.prec > 0 && self.value & 1 == 1
    }

    pub fn valuation(self) -> Valuation {
        if self.value == 0 {
            Valuation::AtLeast(self.prec)
        } else {
            Valuation::Exact(self.value.trailing_zeros())
        }
    }

    fn val_lower(self) -> u32 {
        self.valuation().lower()
    }

    /// Same class at a lower precision.
    pub fn truncate(self, prec: u32) -> Self {
        let p = prec.min(self.prec);
        TwoAdic { value: self.value & mask(p), prec: p }
    }

    /// Multiplication by 2^e; precision grows by e up to 64.
    pub fn shl(self, e: u32) -> Self {
        let p = (self.prec + e).min(64);
        let v = if e >= 64 { 0 } else { self.value << e };
        TwoAdic { value: v & mask(p), prec: p }
    }

    /// Exact division by 2^e; the value must be divisible and precision drops by e.
    pub fn shr_exact(self, e: u32) -> Result<Self> {
        if !self.valuation().at_least(e) {
            return Err(Error::Contract(format!("{self:?} is not divisible by 2^{e}")));
        }
        let p = self.prec.saturating_sub(e);
        let v = if e >= 64 { 0 } else { self.value >> e };
        Ok(TwoAdic { value: v & mask(p), prec: p })
    }

    /// Inverse of an odd element, by Newton iteration.
    pub fn inverse(self) -> Result<Self> {
        if !self.is_odd() {
            return Err(Error::Contract(format!("{self:?} is not a unit")));
        }
        let a = self.value;
        let mut x: u64 = 1;
        for _ in 0..7 {
            x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
        }
        Ok(TwoAdic::from_u64(x, self.prec))
    }
}

impl fmt::Debug for TwoAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod 2^{}", self.signed(), self.prec)
    }
}

impl fmt::Display for TwoAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signed())
    }
}

impl Add for TwoAdic {
    type Output = TwoAdic;
    fn add(self, o: TwoAdic) -> TwoAdic {
        let p = self.prec.min(o.prec);
        TwoAdic { value: self.value.wrapping_add(o.value) & mask(p), prec: p }
    }
}

impl Sub for TwoAdic {
    type Output = TwoAdic;
    fn sub(self, o: TwoAdic) -> TwoAdic {
        let p = self.prec.min(o.prec);
        TwoAdic { value: self.value.wrapping_sub(o.value) & mask(p), prec: p }
    }
}

impl Neg for TwoAdic {
    type Output = TwoAdic;
    fn neg(self) -> TwoAdic {
        TwoAdic { value: self.value.wrapping_neg() & mask(self.prec), prec: self.prec }
    }
}

impl Mul for TwoAdic {
    type Output = TwoAdic;
    /// (a + 2^pa x)(b + 2^pb y) is known modulo 2^min(pa + v(b), pb + v(a)).
    fn mul(self, o: TwoAdic) -> TwoAdic {
        let p = (self.prec + o.val_lower()).min(o.prec + self.val_lower()).min(64);
        TwoAdic { value: self.value.wrapping_mul(o.value) & mask(p), prec: p }
    }
}
