//! Module expressions for the command line.
//!
//! ```text
//! expr := P[a..b] | CP[a..b] | S0 | M10 | A2//A1 | A2//E2 | A2/Sq1 | A2/Sq2
//!       | susp(k, expr) | tensor(expr, expr) | dual(expr) | trunc(lo, hi, expr)
//! ```
//!
//! Either bound of `P[..]` and `CP[..]` may be omitted for a semi-infinite
//! space (`P[-3..]`, `P[..-2]`). Such expressions are instantiated on a
//! finite degree window before resolving.

use std::fmt;

use crate::error::{Error, Result};
use crate::fdmodule::{self, named_module, stunted_cp, stunted_rp, FDModule, NamedModule};
use crate::resolution::{self, Resolution, Window};
use crate::steenrod::Profile;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Rp(Option<i64>, Option<i64>),
    Cp(Option<i64>, Option<i64>),
    Point,
    Named(NamedModule),
    Susp(i64, Box<Expr>),
    Tensor(Box<Expr>, Box<Expr>),
    Dual(Box<Expr>),
    Trunc(i64, i64, Box<Expr>),
}

fn bound(b: Option<i64>) -> String {
    b.map(|v| v.to_string()).unwrap_or_default()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rp(a, b) => write!(f, "P[{}..{}]", bound(*a), bound(*b)),
            Expr::Cp(a, b) => write!(f, "CP[{}..{}]", bound(*a), bound(*b)),
            Expr::Point => write!(f, "S0"),
            Expr::Named(n) => write!(f, "{}", n.as_str()),
            Expr::Susp(k, e) => write!(f, "susp({k},{e})"),
            Expr::Tensor(a, b) => write!(f, "tensor({a},{b})"),
            Expr::Dual(e) => write!(f, "dual({e})"),
            Expr::Trunc(lo, hi, e) => write!(f, "trunc({lo},{hi},{e})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {tok:?}")))
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .take_while(|&(i, c)| c.is_ascii_digit() || (i == 0 && (c == '-' || c == '+')))
            .count();
        let text = &rest[..len];
        let v = text.parse::<i64>().map_err(|_| self.err("expected an integer"))?;
        self.pos += len;
        Ok(v)
    }

    fn opt_int(&mut self) -> Result<Option<i64>> {
        self.skip_ws();
        if self.rest().starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+') {
            Ok(Some(self.int()?))
        } else {
            Ok(None)
        }
    }

    fn range(&mut self) -> Result<(Option<i64>, Option<i64>)> {
        self.expect("[")?;
        let a = self.opt_int()?;
        self.expect("..")?;
        let b = self.opt_int()?;
        self.expect("]")?;
        if let (Some(a), Some(b)) = (a, b) {
            if a > b {
                return Err(self.err("empty range"));
            }
        }
        Ok((a, b))
    }

    fn expr(&mut self) -> Result<Expr> {
        self.skip_ws();
        for name in ["A2//A1", "A2//E2", "A2/Sq1", "A2/Sq2", "M10"] {
            if self.eat(name) {
                return Ok(Expr::Named(NamedModule::parse(name)?));
            }
        }
        if self.eat("S0") {
            return Ok(Expr::Point);
        }
        if self.eat("CP") {
            let (a, b) = self.range()?;
            return Ok(Expr::Cp(a, b));
        }
        if self.eat("P") {
            let (a, b) = self.range()?;
            return Ok(Expr::Rp(a, b));
        }
        if self.eat("susp") {
            self.expect("(")?;
            let k = self.int()?;
            self.expect(",")?;
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(Expr::Susp(k, Box::new(e)));
        }
        if self.eat("tensor") {
            self.expect("(")?;
            let a = self.expr()?;
            self.expect(",")?;
            let b = self.expr()?;
            self.expect(")")?;
            return Ok(Expr::Tensor(Box::new(a), Box::new(b)));
        }
        if self.eat("dual") {
            self.expect("(")?;
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(Expr::Dual(Box::new(e)));
        }
        if self.eat("trunc") {
            self.expect("(")?;
            let lo = self.int()?;
            self.expect(",")?;
            let hi = self.int()?;
            self.expect(",")?;
            let e = self.expr()?;
            self.expect(")")?;
            if lo > hi {
                return Err(self.err("empty truncation"));
            }
            return Ok(Expr::Trunc(lo, hi, Box::new(e)));
        }
        Err(self.err("expected a module expression"))
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    if let Some(bad) = e.find_odd_cp_bound() {
        return Err(Error::Parse(format!("CP bound {bad} is odd")));
    }
    Ok(e)
}

fn add(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(a? + b?)
}

impl Expr {
    fn find_odd_cp_bound(&self) -> Option<i64> {
        match self {
            Expr::Cp(a, b) => [*a, *b].into_iter().flatten().find(|v| v % 2 != 0),
            Expr::Susp(_, e) | Expr::Dual(e) | Expr::Trunc(_, _, e) => e.find_odd_cp_bound(),
            Expr::Tensor(a, b) => a.find_odd_cp_bound().or_else(|| b.find_odd_cp_bound()),
            _ => None,
        }
    }

    /// Lowest degree of the (possibly infinite) module, None if unbounded.
    pub fn bottom(&self) -> Option<i64> {
        self.bounds().0
    }

    /// Highest degree, None if unbounded.
    pub fn top(&self) -> Option<i64> {
        self.bounds().1
    }

    pub fn bounds(&self) -> (Option<i64>, Option<i64>) {
        match self {
            Expr::Rp(a, b) | Expr::Cp(a, b) => (*a, *b),
            Expr::Point => (Some(0), Some(0)),
            Expr::Named(n) => match n {
                NamedModule::M10 => (Some(0), Some(10)),
                NamedModule::A2modA1 => (Some(0), Some(17)),
                NamedModule::A2modE2 => (Some(0), Some(12)),
                NamedModule::A2modSq1 => (Some(0), Some(22)),
                NamedModule::A2modSq2 => (Some(0), Some(20)),
            },
            Expr::Susp(k, e) => {
                let (a, b) = e.bounds();
                (a.map(|v| v + k), b.map(|v| v + k))
            }
            Expr::Tensor(x, y) => {
                let ((a1, b1), (a2, b2)) = (x.bounds(), y.bounds());
                (add(a1, a2), add(b1, b2))
            }
            Expr::Dual(e) => {
                let (a, b) = e.bounds();
                (b.map(|v| -v), a.map(|v| -v))
            }
            Expr::Trunc(lo, hi, e) => {
                let (a, b) = e.bounds();
                (Some(a.map_or(*lo, |v| v.max(*lo))), Some(b.map_or(*hi, |v| v.min(*hi))))
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        let (a, b) = self.bounds();
        a.is_some() && b.is_some()
    }

    /// The part of the module in degrees [lo, hi], as a subquotient.
    pub fn instantiate(&self, profile: Profile, lo: i64, hi: i64) -> Result<FDModule> {
        let (bot, top) = self.bounds();
        let lo = bot.map_or(lo, |b| b.max(lo));
        let hi = top.map_or(hi, |t| t.min(hi));
        if lo > hi {
            return Ok(FDModule::zero(profile, &self.to_string()));
        }
        let m = match self {
            Expr::Rp(..) => stunted_rp(profile, lo, hi)?,
            Expr::Cp(..) => {
                let (l, h) = (lo + lo.rem_euclid(2), hi - hi.rem_euclid(2));
                if l > h {
                    FDModule::zero(profile, &self.to_string())
                } else {
                    stunted_cp(profile, l, h)?
                }
            }
            Expr::Point => FDModule::trivial(profile),
            Expr::Named(n) => {
                let m = named_module(*n)?;
                let m = if profile.n < m.profile().n { m.restrict(profile)? } else { m };
                if profile.n != m.profile().n {
                    return Err(Error::Config(format!("{} is only defined over A2", n.as_str())));
                }
                fdmodule::window(&m, lo, hi)?
            }
            Expr::Susp(k, e) => fdmodule::suspend(&e.instantiate(profile, lo - k, hi - k)?, *k),
            Expr::Dual(e) => fdmodule::dualize(&e.instantiate(profile, -hi, -lo)?)?,
            Expr::Trunc(_, _, e) => e.instantiate(profile, lo, hi)?,
            Expr::Tensor(x, y) => {
                let ((xb, xt), (yb, yt)) = (x.bounds(), y.bounds());
                // Factor degrees that can reach a total degree in [lo, hi].
                let x_lo = side(xb, yt.map(|t| lo - t), i64::max)?;
                let x_hi = side(xt, yb.map(|b| hi - b), i64::min)?;
                let y_lo = side(yb, xt.map(|t| lo - t), i64::max)?;
                let y_hi = side(yt, xb.map(|b| hi - b), i64::min)?;
                let a = x.instantiate(profile, x_lo, x_hi)?;
                let b = y.instantiate(profile, y_lo, y_hi)?;
                fdmodule::tensor_window(&a, &b, Some(lo), Some(hi))?
            }
        };
        Ok(m.with_name(self.to_string()))
    }
}

fn side(own: Option<i64>, derived: Option<i64>, pick: fn(i64, i64) -> i64) -> Result<i64> {
    match (own, derived) {
        (Some(a), Some(b)) => Ok(pick(a, b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::Contract("tensor of modules unbounded on the same side is infinite in each degree".into())),
    }
}

/// Resolves an expression on a window that keeps Ext unchanged in the
/// requested region. A caller-supplied window narrower than the stable one
/// is refused.
pub fn resolve(
    expr: &Expr,
    profile: Profile,
    max_s: i64,
    max_t: i64,
    stems: (i64, i64),
    window: Option<Window>,
) -> Result<Resolution> {
    let need = resolution::stable_window(expr.bottom(), max_s, max_t, stems);
    let w = match window {
        None => need,
        Some(w) if w.lo <= need.lo && w.hi >= need.hi => w,
        Some(w) => {
            return Err(Error::Refused(format!(
                "window [{}, {}] is too small for the region; need lo <= {} and hi >= {}",
                w.lo, w.hi, need.lo, need.hi
            )))
        }
    };
    let m = expr.instantiate(profile, w.lo, w.hi)?;
    resolution::minimal_resolution(&m, max_s, max_t, stems)
}
