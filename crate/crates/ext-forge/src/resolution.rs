//! Minimal free resolutions over A(n) and Ext charts with h0/h1/h2 lines.
//!
//! Work is organised in cells (s, t): the generators of P_s in internal
//! degree t, and the kernel of d_s in degree t. Cell (s, t) needs the kernel
//! from (s-1, t) and the generators of P_s below degree t, so the cells on one
//! anti-diagonal s + t = c are independent and run together.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::charts::{ExtChart, GenName, HKind, Region};
use crate::error::{Error, Result};
use crate::f2linalg::{self, BitMatrix, BitVector, Echelon};
use crate::fdmodule::{Element, FDModule};
use crate::par;
use crate::steenrod::Algebra;

/// One homological degree of the resolution.
#[derive(Clone, Debug, Default)]
struct Level {
    /// Generator degrees, nondecreasing.
    degrees: Vec<i64>,
    /// d(g_k) in the previous level (or the module) at degree degrees[k].
    images: Vec<BitVector>,
    /// d(g_k) decoded as (generator, Milnor basis index) terms; empty for level 0.
    terms: Vec<Vec<(usize, usize)>>,
    /// Milnor orbits b * d(g_k) in the module, level 0 only.
    orbits: Vec<Vec<BitVector>>,
}

impl Level {
    /// Generators with degree in [lo, hi].
    fn gens_between(&self, lo: i64, hi: i64) -> Range<usize> {
        let a = self.degrees.partition_point(|&d| d < lo);
        let b = self.degrees.partition_point(|&d| d <= hi);
        a..b
    }

    fn count_in_degree(&self, t: i64) -> usize {
        self.gens_between(t, t).len()
    }
}

/// Basis layout of a free module in one degree: (generator, offset) blocks.
#[derive(Clone, Debug)]
struct Layout {
    blocks: Vec<(usize, usize)>,
    dim: usize,
    t: i64,
}

impl Layout {
    fn offset_of(&self, k: usize) -> Option<usize> {
        self.blocks.binary_search_by_key(&k, |b| b.0).ok().map(|i| self.blocks[i].1)
    }
}

fn layout(alg: &Algebra, level: &Level, t: i64, below: bool) -> Layout {
    let top = alg.top_degree() as i64;
    let hi = if below { t - 1 } else { t };
    let mut blocks = Vec::new();
    let mut dim = 0;
    for k in level.gens_between(t - top, hi) {
        blocks.push((k, dim));
        dim += alg.dim_in_degree(t - level.degrees[k]);
    }
    Layout { blocks, dim, t }
}

/// Output of one cell.
struct CellResult {
    new_images: Vec<BitVector>,
    kernel: Option<Vec<BitVector>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionRegion {
    pub max_s: i64,
    pub max_t: i64,
    /// Chart stems trusted for this module window.
    pub stems: (i64, i64),
}

pub struct Resolution {
    algebra: &'static Algebra,
    module: FDModule,
    region: ResolutionRegion,
    /// levels[s] for s = 0 ..= max_s + 1.
    levels: Vec<Level>,
    bottom: i64,
}

impl Resolution {
    pub fn module(&self) -> &FDModule {
        &self.module
    }

    pub fn region(&self) -> ResolutionRegion {
        self.region
    }

    pub fn algebra(&self) -> &'static Algebra {
        self.algebra
    }

    /// Highest homological degree computed (one past the chart region).
    pub fn depth(&self) -> i64 {
        self.levels.len() as i64 - 1
    }

    /// Number of generators of P_s in degree t.
    pub fn rank(&self, s: i64, t: i64) -> usize {
        if s < 0 || s as usize >= self.levels.len() {
            return 0;
        }
        self.levels[s as usize].count_in_degree(t)
    }

    /// (s, t, ordinal) names of the generators of P_s in degree t.
    pub fn generators(&self, s: i64, t: i64) -> Vec<GenName> {
        (0..self.rank(s, t)).map(|i| GenName(s, t, i)).collect()
    }

    fn gen_index(&self, g: GenName) -> Option<usize> {
        let level = self.levels.get(g.0 as usize)?;
        let r = level.gens_between(g.1, g.1);
        (g.2 < r.len()).then(|| r.start + g.2)
    }

    /// The element of A(n) multiplying generator `src` (level s) in d(tgt) (level s+1).
    pub fn coefficient(&self, src: GenName, tgt: GenName) -> Option<Vec<usize>> {
        if tgt.0 != src.0 + 1 || tgt.0 < 1 {
            return None;
        }
        let k = self.gen_index(src)?;
        let k2 = self.gen_index(tgt)?;
        let terms = &self.levels[tgt.0 as usize].terms[k2];
        Some(terms.iter().filter(|(g, _)| *g == k).map(|(_, b)| *b).collect())
    }

    /// d(g) written as (source generator name, Milnor element) pairs.
    pub fn differential(&self, g: GenName) -> Vec<(GenName, usize)> {
        let Some(k) = self.gen_index(g) else { return Vec::new() };
        if g.0 == 0 {
            return Vec::new();
        }
        let prev = &self.levels[g.0 as usize - 1];
        self.levels[g.0 as usize].terms[k]
            .iter()
            .map(|&(src, b)| {
                let t = prev.degrees[src];
                let first = prev.gens_between(t, t).start;
                (GenName(g.0 - 1, t, src - first), b)
            })
            .collect()
    }

    /// Image of the degree-0 generator in the module.
    pub fn augmentation(&self, g: GenName) -> Option<Element> {
        if g.0 != 0 {
            return None;
        }
        let k = self.gen_index(g)?;
        Some(Element { degree: g.1, vector: self.levels[0].images[k].clone() })
    }

    /// Checks d∘d = 0 on every generator of levels >= 2 and ε∘d = 0 on level 1.
    pub fn check_d_squared(&self) -> Result<()> {
        let alg = self.algebra;
        for s in 1..self.levels.len() {
            let level = &self.levels[s];
            for k in 0..level.degrees.len() {
                let t = level.degrees[k];
                if s == 1 {
                    let mut acc = BitVector::zeros(self.module.dim(t));
                    for &(src, b) in &level.terms[k] {
                        acc.xor_assign(&self.levels[0].orbits[src][b]);
                    }
                    if !acc.is_zero() {
                        return Err(Error::Internal(format!("ε∘d ≠ 0 on generator ({s},{t})")));
                    }
                    continue;
                }
                let prev = &self.levels[s - 1];
                let prev2 = &self.levels[s - 2];
                let lay = layout(alg, prev2, t, false);
                let mut acc = BitVector::zeros(lay.dim);
                for &(src, b) in &level.terms[k] {
                    for &(src2, b2) in &prev.terms[src] {
                        let mask = alg.product_mask(b, b2);
                        if mask == 0 {
                            continue;
                        }
                        let off = lay.offset_of(src2).unwrap();
                        let base = alg.degree_range(t - prev2.degrees[src2]).start;
                        for bit in (0..64).filter(|x| mask >> x & 1 == 1) {
                            acc.flip(off + bit - base);
                        }
                    }
                }
                if !acc.is_zero() {
                    return Err(Error::Internal(format!("d∘d ≠ 0 on generator ({s},{t})")));
                }
            }
        }
        Ok(())
    }

    /// Checks minimality: no d(g) has a Sq(0) component.
    pub fn check_minimal(&self) -> Result<()> {
        for s in 1..self.levels.len() {
            for (k, terms) in self.levels[s].terms.iter().enumerate() {
                if terms.iter().any(|&(_, b)| b == 0) {
                    return Err(Error::Internal(format!(
                        "generator {k} of level {s} has an identity component in its differential"
                    )));
                }
            }
        }
        Ok(())
    }

    /// h_i products: lines from (s,t,a) to (s+1, t+2^i, b) where the lifted cocycle is nonzero.
    pub fn structure_lines(&self, kind: HKind) -> Result<Vec<(GenName, GenName)>> {
        let i = kind.index();
        if i as usize >= self.algebra.profile.generator_count() {
            return Ok(Vec::new());
        }
        let lifter = Lifter::new(self.algebra, i)?;
        let step = 1i64 << i;
        let mut out = Vec::new();
        for s in 1..self.levels.len() as i64 {
            let level = &self.levels[s as usize];
            let prev = &self.levels[s as usize - 1];
            for k2 in 0..level.degrees.len() {
                let t2 = level.degrees[k2];
                let t = t2 - step;
                let src_range = prev.gens_between(t, t);
                if src_range.is_empty() {
                    continue;
                }
                let first2 = level.gens_between(t2, t2).start;
                for k in src_range.clone() {
                    let a: Vec<usize> =
                        level.terms[k2].iter().filter(|(g, _)| *g == k).map(|(_, b)| *b).collect();
                    if a.is_empty() {
                        continue;
                    }
                    if lifter.lift(&a)? {
                        out.push((GenName(s - 1, t, k - src_range.start), GenName(s, t2, k2 - first2)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn ext_chart(&self) -> Result<ExtChart> {
        let reg = self.region;
        let mut entries = Vec::new();
        for s in 0..=reg.max_s.min(self.depth()) {
            let level = &self.levels[s as usize];
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for &t in &level.degrees {
                *counts.entry(t).or_default() += 1;
            }
            for (t, n) in counts {
                if t <= reg.max_t && (reg.stems.0..=reg.stems.1).contains(&(t - s)) {
                    entries.push((s, t, n));
                }
            }
        }
        let in_region = |g: &GenName| {
            g.0 <= reg.max_s && g.1 <= reg.max_t && (reg.stems.0..=reg.stems.1).contains(&(g.1 - g.0))
        };
        let mut lines = Vec::new();
        for kind in [HKind::H0, HKind::H1, HKind::H2] {
            for (a, b) in self.structure_lines(kind)? {
                if in_region(&a) && in_region(&b) {
                    lines.push((kind, a, b));
                }
            }
        }
        Ok(ExtChart {
            algebra: self.algebra.profile.name(),
            module: self.module.name().to_string(),
            region: Region { max_s: reg.max_s, max_t: reg.max_t, stems: [reg.stems.0, reg.stems.1] },
            entries,
            lines,
        })
    }

    pub fn bottom_degree(&self) -> i64 {
        self.bottom
    }
}

/// Solves a = Σ_j y_j Sq^(2^j) for the one-step lift of a cocycle against the
/// resolution of F2; the h_i coefficient is ε(y_i).
struct Lifter {
    alg: &'static Algebra,
    i: u8,
    matrix: BitMatrix,
    /// Column index of the unknown y_i ∈ A_0.
    yi_col: usize,
}

impl Lifter {
    fn new(alg: &'static Algebra, i: u8) -> Result<Self> {
        let d = 1i64 << i;
        let target = alg.degree_range(d);
        let mut cols: Vec<BitVector> = Vec::new();
        let mut yi_col = usize::MAX;
        for j in 0..=i {
            let gj = alg.generator_index(j);
            for y in alg.degree_range(d - (1 << j)) {
                let mask = alg.product_mask(y, gj);
                if j == i {
                    yi_col = cols.len();
                }
                cols.push(BitVector::from_indices(
                    target.len(),
                    (0..64).filter(|b| mask >> b & 1 == 1).map(|b| b - target.start),
                ));
            }
        }
        let matrix = BitMatrix::from_rows(target.len(), &cols).transpose();
        Ok(Lifter { alg, i, matrix, yi_col })
    }

    fn lift(&self, a: &[usize]) -> Result<bool> {
        let target = self.alg.degree_range(1 << self.i);
        if a.iter().any(|&b| !target.contains(&b)) {
            return Ok(false);
        }
        let rhs = BitVector::from_indices(target.len(), a.iter().map(|b| b - target.start));
        let x = f2linalg::solve(&self.matrix, &rhs)?.ok_or_else(|| {
            Error::Internal("cocycle lift failed: element outside the augmentation ideal".into())
        })?;
        Ok(x.get(self.yi_col))
    }
}

/// Builds the rows of d_s in degree t over generators below t (or all if `below` is false).
fn build_rows(alg: &Algebra, levels: &[Level], module: &FDModule, s: usize, lay: &Layout) -> BitMatrix {
    let t = lay.t;
    let level = &levels[s];
    if s == 0 {
        let cols = module.dim(t);
        let mut m = BitMatrix::zeros(lay.dim, cols);
        for &(k, off) in &lay.blocks {
            let range = alg.degree_range(t - level.degrees[k]);
            for (j, b) in range.enumerate() {
                let row = &level.orbits[k][b];
                for c in row.iter_ones() {
                    m.set(off + j, c, true);
                }
            }
        }
        return m;
    }
    let prev = &levels[s - 1];
    let tgt = layout(alg, prev, t, false);
    let mut m = BitMatrix::zeros(lay.dim, tgt.dim);
    for &(k, off) in &lay.blocks {
        let range = alg.degree_range(t - level.degrees[k]);
        for (j, b) in range.enumerate() {
            let r = off + j;
            for &(src, b2) in &level.terms[k] {
                let mask = alg.product_mask(b, b2);
                if mask == 0 {
                    continue;
                }
                let o = tgt.offset_of(src).expect("source generator within reach");
                let base = alg.degree_range(t - prev.degrees[src]).start;
                let mut mm = mask;
                while mm != 0 {
                    let bit = mm.trailing_zeros() as usize;
                    mm &= mm - 1;
                    m.flip(r, o + bit - base);
                }
            }
        }
    }
    m
}

fn run_cell(
    alg: &Algebra,
    levels: &[Level],
    kernels: &BTreeMap<(usize, i64), Vec<BitVector>>,
    module: &FDModule,
    s: usize,
    t: i64,
    need_kernel: bool,
) -> CellResult {
    // Cycles to cover: ker d_{s-1} in degree t, or the module itself.
    let cycles: Vec<BitVector> = if s == 0 {
        (0..module.dim(t)).map(|i| BitVector::unit(module.dim(t), i)).collect()
    } else {
        kernels.get(&(s - 1, t)).cloned().unwrap_or_default()
    };
    let lay = layout(alg, &levels[s], t, true);
    let target_dim = if s == 0 { module.dim(t) } else { layout(alg, &levels[s - 1], t, false).dim };
    let rows = build_rows(alg, levels, module, s, &lay);
    let (mut image, kernel_old) = if need_kernel {
        let rs = f2linalg::row_space_and_left_kernel(&rows);
        let mut ech = Echelon::new(target_dim);
        for v in &rs.image {
            ech.insert(v);
        }
        (ech, Some(rs.kernel))
    } else {
        let mut red = rows.clone();
        let pivots = red.reduce_in_place();
        let mut ech = Echelon::new(target_dim);
        for r in 0..pivots.len() {
            ech.insert(&red.row(r));
        }
        (ech, None)
    };
    let mut new_images = Vec::new();
    for c in &cycles {
        let r = image.reduce(c);
        if !r.is_zero() {
            image.insert(&r);
            new_images.push(r);
        }
    }
    let kernel = kernel_old.map(|ks| {
        let full = lay.dim + new_images.len();
        ks.into_iter()
            .map(|v| {
                let mut out = BitVector::zeros(full);
                for i in v.iter_ones() {
                    out.set(i, true);
                }
                out
            })
            .collect()
    });
    CellResult { new_images, kernel }
}

fn decode_terms(alg: &Algebra, prev: &Level, t: i64, v: &BitVector) -> Vec<(usize, usize)> {
    let lay = layout(alg, prev, t, false);
    let mut out = Vec::new();
    for i in v.iter_ones() {
        let pos = lay.blocks.partition_point(|&(_, off)| off <= i) - 1;
        let (k, off) = lay.blocks[pos];
        let base = alg.degree_range(t - prev.degrees[k]).start;
        out.push((k, base + i - off));
    }
    out
}

/// Minimal resolution of `module` through homological degree `max_s + 1` and
/// internal degree `max_t`. `stems` is the stem range the caller trusts.
pub fn minimal_resolution(
    module: &FDModule,
    max_s: i64,
    max_t: i64,
    stems: (i64, i64),
) -> Result<Resolution> {
    let alg = Algebra::get(module.profile().n)?;
    if max_s < 0 {
        return Err(Error::Contract("max_s must be nonnegative".into()));
    }
    let region = ResolutionRegion { max_s, max_t, stems };
    let depth = (max_s + 1) as usize;
    let mut levels: Vec<Level> = vec![Level::default(); depth + 1];
    let Some(bottom) = module.min_degree() else {
        return Ok(Resolution { algebra: alg, module: module.clone(), region, levels, bottom: 0 });
    };
    let t_span = (max_t - bottom).max(-1);
    let mut kernels: BTreeMap<(usize, i64), Vec<BitVector>> = BTreeMap::new();
    // Cell (s, t) sits on diagonal s + (t - bottom). Cells below t = bottom + s are empty.
    for diag in 0..=(depth as i64 + t_span) {
        let cells: Vec<(usize, i64)> = (0..=depth)
            .filter_map(|s| {
                let t = bottom + diag - s as i64;
                (t >= bottom + s as i64 && t <= max_t).then_some((s, t))
            })
            .collect();
        if cells.is_empty() {
            continue;
        }
        let results = {
            let levels_ref = &levels;
            let kernels_ref = &kernels;
            par::map_collect(cells.clone(), |(s, t)| {
                run_cell(alg, levels_ref, kernels_ref, module, s, t, s < depth)
            })
        };
        for ((s, t), res) in cells.into_iter().zip(results) {
            if s > 0 {
                kernels.remove(&(s - 1, t));
            }
            for img in res.new_images {
                let (terms, orbit) = if s == 0 {
                    (Vec::new(), module.milnor_orbit(&Element { degree: t, vector: img.clone() }))
                } else {
                    (decode_terms(alg, &levels[s - 1], t, &img), Vec::new())
                };
                let level = &mut levels[s];
                level.degrees.push(t);
                level.images.push(img);
                level.terms.push(terms);
                if s == 0 {
                    level.orbits.push(orbit);
                }
            }
            if let Some(k) = res.kernel {
                kernels.insert((s, t), k);
            }
        }
    }
    Ok(Resolution { algebra: alg, module: module.clone(), region, levels, bottom })
}

/// Truncation window for a module with possibly semi-infinite pieces, so
/// that Ext in the trusted region is unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

/// hi = max_t + 1; lo = lowest trusted stem - 24 (max_s + 1) unless the
/// module is bounded below, in which case lo is its bottom degree.
pub fn stable_window(bottom: Option<i64>, max_s: i64, max_t: i64, stems: (i64, i64)) -> Window {
    let hi = max_t + 1;
    let lo = match bottom {
        Some(b) => b,
        None => stems.0 - 24 * (max_s + 1),
    };
    Window { lo, hi }
}

/// Filtration-zero h0-chains: for each s = 0 generator in `stem`, the
/// number of nonzero classes g, h0 g, h0^2 g, ... in the chart.
pub fn filtration_zero_towers(chart: &ExtChart, stem: i64) -> Vec<usize> {
    chart.h0_towers(stem).into_iter().map(|t| t.length).collect()
}
