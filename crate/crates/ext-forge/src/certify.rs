//! Nonimmersion certificates for real projective spaces: hypothesis checks,
//! the reduction to axial maps, duality regrading into small stunted spaces,
//! orders read off Ext charts, and the nonvanishing test.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::arith2::{alpha, TwoAdic};
use crate::axial::{self, certify_nonvanishing, OrderTable, Provenance};
use crate::charts::ExtChart;
use crate::error::{Error, Result};
use crate::expr;
use crate::par;
use crate::steenrod::Profile;

/// m = 2^L - n - k - 2 and target = m + k for an axial map P^n × P^m → P^target.
pub fn james_axial_dims(n: u64, k: u64, l: u32) -> Result<(u64, u64, u64)> {
    let p = 1u64.checked_shl(l).filter(|&p| l < 64 && p > n + k + 2);
    let Some(p) = p else {
        return Err(Error::Contract(format!("2^{l} must exceed n + k + 2 = {}", n + k + 2)));
    };
    let m = p - n - k - 2;
    Ok((n, m, m + k))
}

/// Stunted projective space P_a^b; `None` is an infinite end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stunted {
    pub bottom: Option<i64>,
    pub top: Option<i64>,
}

impl Stunted {
    pub fn new(bottom: i64, top: i64) -> Self {
        Stunted { bottom: Some(bottom), top: Some(top) }
    }

    pub fn from(bottom: i64) -> Self {
        Stunted { bottom: Some(bottom), top: None }
    }

    fn shifted(self, k: i64) -> Self {
        Stunted { bottom: self.bottom.map(|b| b + k), top: self.top.map(|t| t + k) }
    }
}

impl fmt::Display for Stunted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
        write!(f, "P[{}..{}]", b(self.bottom), b(self.top))
    }
}

/// A homological group tmf_stem(space) with the bottom cell in [-4, 3].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regraded {
    pub stem: i64,
    pub space: Stunted,
}

/// Multiple of 8 moving `x` into [-4, 3].
fn period_shift(x: i64) -> i64 {
    -8 * (x + 4).div_euclid(8)
}

/// tmf^d(P_a^b) as tmf_{-d-1}(P_{-b-1}^{-a-1}), then shifted by a multiple of
/// 8 so the bottom cell (or the top, for a space infinite below) lies in
/// [-4, 3]. A top cell above the stem does not affect the group and is dropped.
pub fn dual_regrade(degree: i64, space: Stunted) -> Result<Regraded> {
    let dual = Stunted { bottom: space.top.map(|b| -b - 1), top: space.bottom.map(|a| -a - 1) };
    let anchor = dual
        .bottom
        .or(dual.top)
        .ok_or_else(|| Error::Contract("space is infinite in both directions".into()))?;
    let k = period_shift(anchor);
    let stem = -degree - 1 + k;
    let mut space = dual.shifted(k);
    if space.bottom.is_some() && space.top.is_some_and(|t| t > stem) {
        space.top = None;
    }
    Ok(Regraded { stem, space })
}

/// tmf^d(P^n ∧ P^m) as tmf_stem(P_{b1} ∧ P_{b2}), each factor shifted by its
/// own multiple of 8. Fails if a top cell could reach the stem.
pub fn dual_regrade_smash(degree: i64, n: i64, m: i64) -> Result<(i64, i64, i64)> {
    // D(P_1^n) = Σ P_{-n-1}^{-2}, so D(P^n ∧ P^m) = Σ^2 P_{-n-1}^{-2} ∧ P_{-m-1}^{-2}.
    let (k1, k2) = (period_shift(-n - 1), period_shift(-m - 1));
    let (b1, b2) = (-n - 1 + k1, -m - 1 + k2);
    let (t1, t2) = (-2 + k1, -2 + k2);
    let stem = -degree - 2 + k1 + k2;
    if t1 + 1 + b2 <= stem || t2 + 1 + b1 <= stem {
        return Err(Error::Contract(format!("top cells of P^{n} ∧ P^{m} reach stem {stem}")));
    }
    Ok((stem, b1, b2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    A,
    B,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Variant::A),
            "b" | "B" => Ok(Variant::B),
            _ => Err(Error::Parse(format!("unknown variant {s:?}; use a or b"))),
        }
    }

    pub fn required_alpha(self) -> u32 {
        match self {
            Variant::A => 3,
            Variant::B => 2,
        }
    }

    /// Dimension of the projective space and codimension k of the
    /// hypothetical immersion.
    fn dims(self, m: u64) -> (u64, u64) {
        match self {
            Variant::A => (8 * m + 10, 8 * m - 8),
            Variant::B => (8 * m + 8, 8 * m - 4),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "a",
            Variant::B => "b",
        })
    }
}

/// Resolution sizes for the charts behind the orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartSettings {
    /// Adams filtration range for single-space charts.
    pub single_max_s: i64,
    /// Adams filtration range for smash-product charts.
    pub product_max_s: i64,
}

impl Default for ChartSettings {
    fn default() -> Self {
        ChartSettings { single_max_s: 12, product_max_s: 10 }
    }
}

/// Ext charts over A(2) keyed by their id, shared across certificates.
#[derive(Default)]
pub struct ChartCache {
    charts: Mutex<HashMap<String, Arc<ExtChart>>>,
}

impl ChartCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Chart of `expr` in one stem, as (id, chart).
    pub fn chart(&self, expr_src: &str, stem: i64, max_s: i64) -> Result<(String, Arc<ExtChart>)> {
        let max_t = stem + max_s;
        let id = format!("A2 {expr_src} stem {stem} s<={max_s} t<={max_t}");
        let mut map = self.charts.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(c) = map.get(&id) {
            return Ok((id, c.clone()));
        }
        let e = expr::parse(expr_src)?;
        let res = expr::resolve(&e, Profile::new(2)?, max_s, max_t, (stem, stem), None)?;
        let chart = Arc::new(res.ext_chart()?);
        map.insert(id.clone(), chart.clone());
        Ok((id, chart))
    }

    pub fn len(&self) -> usize {
        self.charts.lock().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Order bound from a single-space chart: the longest filtration-zero
/// h0-tower in the stem. `None` means a tower runs to the top of the chart.
fn tower_bound(chart: &ExtChart, stem: i64) -> Option<u32> {
    let towers = chart.h0_towers(stem);
    if towers.iter().any(|t| t.reaches_top) {
        return None;
    }
    Some(towers.iter().map(|t| t.length as u32).max().unwrap_or(0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(rename = "M")]
    pub m: u64,
    pub h: u32,
    pub variant: Option<Variant>,
}

/// P^n cannot be immersed in R^b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub n: u64,
    pub b: u64,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P^{} does not immerse in R^{}", self.n, self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxialDims {
    pub n: u64,
    pub m: u64,
    pub k: u64,
    pub target: u64,
    /// The 2-power used is 2^(L+3).
    #[serde(rename = "L")]
    pub l: u32,
    /// Power of X = X1 + X2 that must vanish.
    pub ell: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub i: u64,
    pub j: u64,
    pub exponent: u32,
    pub provenance: Provenance,
    /// Groups the order was read from.
    pub groups: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub i: u64,
    pub j: u64,
    pub nu: u32,
    pub exponent: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    StatementOnly,
}

/// Re-run of the nonvanishing test at a larger 2-power.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LCheck {
    #[serde(rename = "L")]
    pub l: u32,
    pub ell: u64,
    pub nonzero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub inputs: Inputs,
    pub claim: Claim,
    pub axial: Option<AxialDims>,
    pub witnesses: Vec<WitnessRecord>,
    pub orders: Vec<OrderRecord>,
    pub verdict: Verdict,
    pub unit_factor: Option<String>,
    pub l_checks: Vec<LCheck>,
    pub product_group: Option<String>,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Schema and consistency checks on a certificate.
    pub fn validate(&self) -> Result<()> {
        if self.verdict == Verdict::Certified {
            let ax = self.axial.as_ref().ok_or_else(|| Error::Internal("certified without axial data".into()))?;
            if self.orders.is_empty() || self.witnesses.is_empty() {
                return Err(Error::Internal("certified without orders or witness".into()));
            }
            if self.orders.iter().any(|o| !matches!(o.provenance, Provenance::Computed { .. })) {
                return Err(Error::Internal("certified with an assumed order".into()));
            }
            if ax.target + ax.n + 2 != 1 << (ax.l + 3) || ax.m + ax.k != ax.target {
                return Err(Error::Internal("axial dimensions are inconsistent".into()));
            }
            if ax.n + ax.k != self.claim.b || ax.n != self.claim.n {
                return Err(Error::Internal("claim does not match the axial map".into()));
            }
            if self.l_checks.iter().any(|c| !c.nonzero) {
                return Err(Error::Internal("verdict depends on L".into()));
            }
        }
        Ok(())
    }
}

/// Smallest L with 2^(L+3) > 24M + 16.
pub fn default_l(m: u64) -> u32 {
    let mut l = 0;
    while (1u64 << (l + 3)) <= 24 * m + 16 {
        l += 1;
    }
    l
}

/// Fixed (κ, γ) instances checked for the unit factor of the axial class.
fn unit_factor_citation() -> Result<String> {
    let p = axial::DEFAULT_K;
    let t = |v: i64| TwoAdic::new(v, p);
    let cases: [(&[i64], &[i64]); 4] =
        [(&[1], &[]), (&[1, 3], &[1]), (&[-5, 2, 7], &[3, -1, 5]), (&[9, 11, -13, 1], &[7, 7, 1, -3])];
    for (k, g) in cases {
        let kap: Vec<TwoAdic> = k.iter().map(|&v| t(v)).collect();
        let gam: Vec<TwoAdic> = g.iter().map(|&v| t(v)).collect();
        let d = axial::axial_decompose(&kap, &gam, axial::DEFAULT_J, p)?;
        axial::invert_unit(d.u, &d.alphas, axial::DEFAULT_J, p)?;
    }
    Ok(format!(
        "axial class = (X1+X2)·u with u = odd + Σ 2^(4+j) α_j p_(2j) invertible; \
         decomposition and inverse verified for {} (κ, γ) instances at J={}, K={}",
        cases.len(),
        axial::DEFAULT_J,
        p
    ))
}

struct FactorGroup {
    stem: i64,
    bottom: i64,
}

fn factor_group(degree: u64, dim: u64) -> Result<FactorGroup> {
    let r = dual_regrade(degree as i64, Stunted::new(1, dim as i64))?;
    if r.space.top.is_some() {
        return Err(Error::Internal(format!("single-space group for degree {degree} of P^{dim} is not stable")));
    }
    Ok(FactorGroup { stem: r.stem, bottom: r.space.bottom.unwrap_or_default() })
}

struct Orders {
    dims: AxialDims,
    table: OrderTable,
    records: Vec<OrderRecord>,
    product_group: String,
}

/// Orders of the monomials of (X1 + X2)^ℓ that survive the caps, for 2^(L+3).
fn derive_orders(variant: Variant, mm: u64, l: u32, cache: &ChartCache, settings: ChartSettings) -> Result<Orders> {
    let (n, k) = variant.dims(mm);
    let (_, m, target) = james_axial_dims(n, k, l + 3)?;
    let ell = target / 8 + 1;
    let dims = AxialDims { n, m, k, target, l, ell };
    let surviving: Vec<(u64, u64)> =
        (0..=ell).filter(|&i| 8 * i <= n && 8 * (ell - i) <= m).map(|i| (i, ell - i)).collect();

    // Per-monomial upper bounds from the two factors.
    let mut bounds = Vec::new();
    for &(i, j) in &surviving {
        let mut best: Option<u32> = None;
        let mut groups = Vec::new();
        for (deg, dim) in [(8 * i, n), (8 * j, m)] {
            let g = factor_group(deg, dim)?;
            let (id, chart) = cache.chart(&format!("P[{}..]", g.bottom), g.stem, settings.single_max_s)?;
            if let Some(b) = tower_bound(&chart, g.stem) {
                best = Some(best.map_or(b, |x| x.min(b)));
            }
            groups.push(format!("tmf_{}(P_{}) from chart {id}", g.stem, g.bottom));
        }
        let exp = best.ok_or_else(|| {
            Error::Internal(format!("no finite order bound for X1^{i} X2^{j}; both factors have towers to the top"))
        })?;
        bounds.push((i, j, exp, groups));
    }

    // The product group must have one filtration-zero tower per monomial,
    // with total order equal to the product of the bounds.
    let (stem, b1, b2) = dual_regrade_smash(8 * ell as i64, n as i64, m as i64)?;
    let (pid, product) = cache.chart(&format!("tensor(P[{b1}..],P[{b2}..])"), stem, settings.product_max_s)?;
    let towers = product.h0_towers(stem);
    if towers.len() != surviving.len() {
        return Err(Error::Internal(format!(
            "product group has {} filtration-zero classes, expected {}",
            towers.len(),
            surviving.len()
        )));
    }
    if towers.iter().any(|t| t.reaches_top) {
        return Err(Error::Internal("product group has a tower to the top of its chart".into()));
    }
    let total: u32 = towers.iter().map(|t| t.length as u32).sum();
    let expected: u32 = bounds.iter().map(|b| b.2).sum();
    if total != expected {
        return Err(Error::Internal(format!(
            "product group has total filtration-zero order 2^{total}, factor bounds give 2^{expected}"
        )));
    }

    let product_group = format!("tmf_{stem}(P_{b1} ∧ P_{b2})");
    let mut table = OrderTable::new((n, m));
    let mut records = Vec::new();
    for (i, j, exp, mut groups) in bounds {
        let provenance = Provenance::Computed { chart: pid.clone() };
        table.insert(i, j, exp, provenance.clone());
        groups.push(format!("{product_group} from chart {pid}"));
        records.push(OrderRecord { i, j, exponent: exp, provenance, groups });
    }
    Ok(Orders { dims, table, records, product_group })
}

/// Full pipeline for the h = 1 statements.
pub fn certify_h1(mm: u64, variant: Variant, cache: &ChartCache, settings: ChartSettings) -> Result<Certificate> {
    let need = variant.required_alpha();
    if alpha(mm) != need {
        return Err(Error::Hypothesis(format!(
            "variant {variant} needs alpha(M) = {need}, but alpha({mm}) = {}",
            alpha(mm)
        )));
    }
    let l = default_l(mm);
    let o = derive_orders(variant, mm, l, cache, settings)?;
    let nv = certify_nonvanishing(o.dims.ell, o.table.caps, &o.table)?;
    let Some(w) = nv.witness else {
        return Err(Error::Internal(format!("(X1+X2)^{} vanishes in the computed group; no obstruction", o.dims.ell)));
    };
    let o2 = derive_orders(variant, mm, l + 1, cache, settings)?;
    let nv2 = certify_nonvanishing(o2.dims.ell, o2.table.caps, &o2.table)?;
    let l_checks = vec![LCheck { l: l + 1, ell: o2.dims.ell, nonzero: nv2.nonzero }];

    let claim = Claim { n: o.dims.n, b: o.dims.n + o.dims.k };
    let cert = Certificate {
        inputs: Inputs { m: mm, h: 1, variant: Some(variant) },
        claim,
        axial: Some(o.dims),
        witnesses: vec![WitnessRecord { i: w.i, j: w.j, nu: w.nu, exponent: w.exponent }],
        orders: o.records,
        verdict: Verdict::Certified,
        unit_factor: Some(unit_factor_citation()?),
        l_checks,
        product_group: Some(o.product_group),
    };
    cert.validate()?;
    Ok(cert)
}

/// Smallest power of 2 that is at least h.
fn two_power_at_least(h: u32) -> u64 {
    (h.max(1) as u64).next_power_of_two()
}

/// The nonimmersion statement for (M, h), certified when h = 1.
pub fn emit_statement(mm: u64, h: u32, cache: &ChartCache, settings: ChartSettings) -> Result<Certificate> {
    if h == 0 {
        return Err(Error::Contract("h must be at least 1".into()));
    }
    let q = two_power_at_least(h);
    if !mm.is_multiple_of(q) {
        return Err(Error::Hypothesis(format!("divisibility hypothesis: M = {mm} is not divisible by {q}")));
    }
    let a = alpha(mm);
    let h = h as u64;
    let (variant, n, b) = if a as u64 == 4 * h - 1 {
        (Variant::A, 8 * mm + 8 * h + 2, (16 * mm + 10).checked_sub(8 * h))
    } else if a as u64 == 4 * h - 2 {
        (Variant::B, 8 * mm + 8 * h, (16 * mm + 12).checked_sub(8 * h))
    } else {
        return Err(Error::Hypothesis(format!("alpha hypothesis: alpha({mm}) = {a}, need {} or {}", 4 * h - 1, 4 * h - 2)));
    };
    let b = b.ok_or_else(|| Error::Hypothesis(format!("M = {mm} is too small for h = {h}")))?;
    let claim = Claim { n, b };
    if h == 1 {
        return certify_h1(mm, variant, cache, settings);
    }
    Ok(Certificate {
        inputs: Inputs { m: mm, h: h as u32, variant: Some(variant) },
        claim,
        axial: None,
        witnesses: vec![],
        orders: vec![],
        verdict: Verdict::StatementOnly,
        unit_factor: None,
        l_checks: vec![],
        product_group: None,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "M")]
    pub m: u64,
    pub variant: Variant,
    pub claim: Claim,
    pub verdict: Verdict,
}

/// Every M < max_m meeting the hypotheses for h, in parallel over M.
pub fn table(h: u32, max_m: u64, cache: &ChartCache, settings: ChartSettings) -> Result<Vec<TableRow>> {
    let rows = par::map_collect((0..max_m).collect(), |mm| match emit_statement(mm, h, cache, settings) {
        Ok(c) => Some(Ok(TableRow { m: mm, variant: c.inputs.variant.unwrap_or(Variant::A), claim: c.claim, verdict: c.verdict })),
        Err(Error::Hypothesis(_)) => None,
        Err(e) => Some(Err(e)),
    });
    rows.into_iter().flatten().collect()
}
