//! Module-level suites shared by the fdmodule tests and the acceptance target.
//! Each returns a one-line summary on success or the first failure.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ext_forge::f2linalg::{row_space_and_left_kernel, BitVector, Echelon};
use ext_forge::fdmodule::*;
use ext_forge::steenrod::{Algebra, MilnorElt, Profile};

pub type Outcome = Result<String, String>;

pub fn a2() -> Profile {
    Profile::new(2).unwrap()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn sq(e: &[u32]) -> MilnorElt {
    MilnorElt::new(e)
}

/// Sum of basis elements of `m` in degree `d`, by label. Missing labels are an error.
fn combo(m: &FDModule, d: i64, labels: &[String]) -> Result<Element, String> {
    let mut v = BitVector::zeros(m.dim(d));
    for l in labels {
        let i = m.find(d, l).ok_or_else(|| format!("{} has no basis element {l} in degree {d}", m.name()))?;
        v.flip(i);
    }
    Ok(Element { degree: d, vector: v })
}

fn rp_mono(i: i64, j: i64) -> String {
    format!("x^{i}*x^{j}")
}

/// Labels of x1^i x2^j in a product of CP windows, exponents being degrees.
fn cp_mono(i: i64, j: i64) -> String {
    format!("y^{}*y^{}", i / 2, j / 2)
}

/// Per-degree spans of `theta * g` over the given generators, seeded with `seed`.
fn orbit_spans(
    m: &FDModule,
    gens: &[Element],
    thetas: &[MilnorElt],
    seed: &GradedSubspace,
) -> (BTreeMap<i64, Echelon>, BTreeMap<i64, usize>) {
    let alg = Algebra::get(2).unwrap();
    let idx: Vec<usize> = thetas.iter().map(|t| alg.index_of(t).unwrap()).collect();
    let mut spans: BTreeMap<i64, Echelon> = seed.parts.clone();
    let mut pairs: BTreeMap<i64, usize> = BTreeMap::new();
    for g in gens {
        let orbit = m.milnor_orbit(g);
        for (t, &k) in thetas.iter().zip(&idx) {
            let d = g.degree + t.degree() as i64;
            *pairs.entry(d).or_default() += 1;
            if m.dim(d) == 0 {
                continue;
            }
            spans.entry(d).or_insert_with(|| Echelon::new(m.dim(d))).insert(&orbit[k]);
        }
    }
    (spans, pairs)
}

/// The C/B decomposition of (P/Z2) ⊗ P on a window: C is generated by
/// x1^1 x2^(8p-1), its filtration quotients are suspended copies of A2/Sq2,
/// and the quotient Q by C and the A2/Sq1-orbits of x1^(8i-1) x2^(8j-1),
/// x1^(8i-1) x2^(8j+3) vanishes away from the edges.
pub fn prop35_suite() -> Outcome {
    let (a1, b1, d0, d1) = (-40i64, 48i64, -16i64, 56i64);
    let (lo2, hi2) = (d0 - b1, d1 - a1);
    let p1 = stunted_rp(a2(), a1, b1).map_err(err)?;
    let zero = closure(&p1, &[p1.basis_element(0, 0)]);
    let (p1q, _) = quotient(&p1, &zero).map_err(err)?;
    let p2 = stunted_rp(a2(), lo2, hi2).map_err(err)?;
    let n = tensor_window(&p1q, &p2, Some(d0), Some(d1)).map_err(err)?;
    let mono = |i: i64, j: i64| combo(&n, i + j, &[rp_mono(i, j)]);
    let sum = |d: i64, terms: &[i64]| {
        let labels: Vec<String> = terms.iter().filter(|&&i| i != 0).map(|&i| rp_mono(i, d - i)).collect();
        combo(&n, d, &labels)
    };

    // C and its F2-basis.
    let ps: Vec<i64> = (d0.div_euclid(8)..=d1.div_euclid(8)).filter(|p| 8 * p >= d0).collect();
    let gen_p = |p: i64| mono(1, 8 * p - 1);
    let gens: Vec<Element> = ps.iter().map(|&p| gen_p(p)).collect::<Result<_, _>>()?;
    let c = closure(&n, &gens);
    let trusted = (d0 + 23)..=d1;
    for d in trusted.clone() {
        let mut basis = vec![sum(d, &[2, 4])?, sum(d, &[4, 8])?];
        basis.push(if d.rem_euclid(8) == 0 { sum(d, &[1])? } else { sum(d, &[1, 2])? });
        if c.dim(d) != basis.len() {
            return Err(format!("C has dimension {} in degree {d}, expected {}", c.dim(d), basis.len()));
        }
        if let Some(b) = basis.iter().find(|b| !c.contains(b)) {
            return Err(format!("basis element {:?} of C missing in degree {d}", b.vector));
        }
    }

    // Filtration quotients F_p / F_(p-1) against A2/Sq2.
    let a2sq2 = named_module(NamedModule::A2modSq2).map_err(err)?;
    let mut checked_p = Vec::new();
    for &p in &ps {
        if 8 * p < d0 + 23 || 8 * p + 23 > d1 {
            continue;
        }
        let upto = |q: i64| -> Result<GradedSubspace, String> {
            let g: Vec<Element> = ps.iter().filter(|&&r| r <= q).map(|&r| gen_p(r)).collect::<Result<_, _>>()?;
            Ok(closure(&n, &g))
        };
        let (fp, fq) = (upto(p)?, upto(p - 1)?);
        for d in 8 * p..=8 * p + 23 {
            let got = fp.dim(d) - fq.dim(d);
            if got != a2sq2.dim(d - 8 * p) {
                return Err(format!("F_{p}/F_{} has dimension {got} in degree {d}, A2/Sq2 has {}", p - 1, a2sq2.dim(d - 8 * p)));
            }
        }
        checked_p.push(p);
    }
    if checked_p.is_empty() {
        return Err("window too small for a filtration check".into());
    }

    // Sq2 g_p = Sq4 Sq6 g_(p-1).
    for &p in ps.iter().filter(|&&p| ps.contains(&(p - 1)) && 8 * p + 2 <= d1) {
        let lhs = n.act_milnor(&sq(&[2]), &gen_p(p)?).map_err(err)?;
        let six = n.act_milnor(&sq(&[6]), &gen_p(p - 1)?).map_err(err)?;
        let rhs = n.act_milnor(&sq(&[4]), &six).map_err(err)?;
        if lhs != rhs {
            return Err(format!("Sq2 g_{p} differs from Sq4 Sq6 g_{}", p - 1));
        }
    }

    // Q = 0 away from the edges.
    let thetas = cyclic_quotient_reps(&[sq(&[1])]).map_err(err)?;
    if thetas.len() != 32 {
        return Err(format!("A2/Sq1 has {} representatives", thetas.len()));
    }
    let mut bgens = Vec::new();
    for i in (a1..=b1).filter(|i| (i + 1).rem_euclid(8) == 0) {
        for j in lo2..=hi2 {
            let r = j.rem_euclid(8);
            if (r == 7 || r == 3) && (d0..=d1).contains(&(i + j)) {
                bgens.push(mono(i, j)?);
            }
        }
    }
    let none = GradedSubspace::default();
    let (orbits, _) = orbit_spans(&n, &bgens, &thetas, &none);
    let (spans, _) = orbit_spans(&n, &bgens, &thetas, &c);

    // The relations R1..R8 (first components, base degree) translated by multiples of 8.
    let rels: [(&str, i64, &[i64]); 8] = [
        ("R1", 0, &[-1, 0, 1]),
        ("R2", 8, &[2, 6]),
        ("R3", 8, &[-1, 3, 4, 5, 9]),
        ("R4", 16, &[4, 12]),
        ("R5", 8, &[2, 3, 4, 5]),
        ("R6", 8, &[-1, 2, 5]),
        ("R7", 16, &[4, 6, 10, 12]),
        ("R8", 24, &[8, 16]),
    ];
    let mid_x1 = (a1 + 24)..=(b1 - 24);
    let mid_deg = (d0 + 24)..=(d1 - 24);
    let mut rel_count = 0;
    for (name, base, terms) in rels {
        for si in -2..=2i64 {
            for sj in -2..=2i64 {
                let d = base + 8 * (si + sj);
                if !mid_deg.contains(&d) {
                    continue;
                }
                let shifted: Vec<i64> = terms.iter().map(|t| t + 8 * si).collect();
                if !shifted.iter().all(|t| mid_x1.contains(t)) {
                    continue;
                }
                let e = sum(d, &shifted)?;
                if !orbits.get(&d).is_some_and(|o| o.contains(&e.vector)) {
                    return Err(format!("{name} shifted by ({}, {}) is not a theta-image", 8 * si, 8 * sj));
                }
                rel_count += 1;
            }
        }
    }

    let mut residues = BTreeSet::new();
    for d in mid_deg.clone() {
        for i in mid_x1.clone().filter(|&i| i != 0) {
            let e = mono(i, d - i)?;
            if !spans.get(&d).is_some_and(|s| s.contains(&e.vector)) {
                return Err(format!("x1^{i} x2^{} survives in Q", d - i));
            }
        }
        residues.insert(d.rem_euclid(8));
    }
    if residues.len() != 8 {
        return Err(format!("only residues {residues:?} were checked"));
    }
    Ok(format!(
        "C basis in degrees {}..{}, filtration quotients for p in {checked_p:?}, {rel_count} relation instances, Q = 0 in degrees {}..{}",
        trusted.start(),
        trusted.end(),
        mid_deg.start(),
        mid_deg.end()
    ))
}

/// Kernel of 1 ⊗ ρ on CP_{-∞}^{-2} ⊗ CP_{-∞}^{-2}, modeled on the window with
/// cohomological degrees lo..-4 in each factor: dimension counts against a
/// free A2//E2-module on S with one relation, and the 11-class basis in
/// grading -28.
pub fn kernel_free_suite() -> Outcome {
    let mut lines = Vec::new();
    for lo in [-48i64, -64] {
        lines.push(kernel_free_window(lo)?);
    }
    lines.push(eleven_classes()?);
    Ok(lines.join("; "))
}

fn cp_square(lo: i64) -> Result<FDModule, String> {
    let c = stunted_cp(a2(), lo, -4).map_err(err)?;
    tensor(&c, &c).map_err(err)
}

/// The generator set S, as (x1 degree, x2 degree) pairs inside the window.
fn s_generators(lo: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for i in (lo / 8 - 1)..=-1 {
        for j in (lo / 8 - 1)..=-1 {
            let a = 8 * i - 2;
            if a < lo {
                continue;
            }
            if j <= -2 && 8 * j - 2 >= lo {
                out.push((a, 8 * j - 2));
            }
            if 8 * j + 2 >= lo {
                out.push((a, 8 * j + 2));
            }
        }
    }
    out
}

fn e2_annihilators() -> [MilnorElt; 3] {
    [sq(&[1]), sq(&[0, 1]), sq(&[0, 0, 1])]
}

fn kernel_free_window(lo: i64) -> Result<String, String> {
    let t = cp_square(lo)?;
    let thetas = cyclic_quotient_reps(&e2_annihilators()).map_err(err)?;
    let degs: Vec<u32> = thetas.iter().map(|t| t.degree()).collect();
    if degs != [0, 2, 4, 6, 6, 8, 10, 12] {
        return Err(format!("A2//E2 representatives in degrees {degs:?}"));
    }
    let gens: Vec<Element> =
        s_generators(lo).into_iter().map(|(a, b)| combo(&t, a + b, &[cp_mono(a, b)])).collect::<Result<_, _>>()?;
    let (spans, pairs) = orbit_spans(&t, &gens, &thetas, &GradedSubspace::default());

    // The relation Sq4 Sq2 Sq4 on x1^-10 x2^-6 generates a cyclic submodule of
    // A2//E2 shifted to degree -16.
    let e2 = named_module(NamedModule::A2modE2).map_err(err)?;
    let one = e2.basis_element(0, 0);
    let r = e2.act_gen(2, &e2.act_gen(1, &e2.act_gen(2, &one)));
    if r.vector.is_zero() {
        return Err("Sq4 Sq2 Sq4 vanishes in A2//E2".into());
    }
    let rel = closure(&e2, &[r]);
    let g0 = combo(&t, -16, &[cp_mono(-10, -6)])?;
    let lhs = t.act_gen(2, &t.act_gen(1, &t.act_gen(2, &g0)));
    if !lhs.vector.is_zero() {
        return Err("Sq4 Sq2 Sq4 (x1^-10 x2^-6) is nonzero".into());
    }

    // K is spanned by the basis elements whose second factor is not x^-10.
    let rho_label = format!("*y^{}", -5);
    let mut deficits = Vec::new();
    for d in ((lo + 10)..=-4).filter(|d| d % 2 == 0) {
        let kdim = t.labels_in(d).iter().filter(|l| !l.ends_with(&rho_label)).count();
        let rank = spans.get(&d).map_or(0, Echelon::dim);
        let p = pairs.get(&d).copied().unwrap_or(0);
        let expected_deficit = rel.dim(d + 16);
        if rank != kdim {
            return Err(format!("window {lo}: theta-span has rank {rank} in degree {d}, K has dimension {kdim}"));
        }
        if p - rank != expected_deficit {
            return Err(format!("window {lo}: {} relations in degree {d}, expected {expected_deficit}", p - rank));
        }
        if let Some(s) = spans.get(&d) {
            if s.basis().iter().any(|v| v.iter_ones().any(|i| t.label(d, i).ends_with(&rho_label))) {
                return Err(format!("window {lo}: theta-images leave K in degree {d}"));
            }
        }
        if p > rank {
            deficits.push(d);
        }
    }
    Ok(format!("window {lo}: free counts in degrees {}..-4, relation in {deficits:?}", lo + 10))
}

fn eleven_classes() -> Result<String, String> {
    let lo = -64;
    let t = cp_square(lo)?;
    let thetas = cyclic_quotient_reps(&e2_annihilators()).map_err(err)?;
    let x = |terms: &[i64]| {
        let labels: Vec<String> = terms.iter().map(|&i| cp_mono(i, -28 - i)).collect();
        combo(&t, -28, &labels)
    };
    let groups: [(i64, Vec<&[i64]>); 4] = [
        (-28, vec![&[-10]]),
        (-32, vec![&[-8, -6], &[-16, -14], &[-24, -22]]),
        (-36, vec![&[-8, -4], &[-16, -12]]),
        (-40, vec![&[-4], &[-12, -8], &[-20, -16], &[-24]]),
    ];
    let mut all = Echelon::new(t.dim(-28));
    for (gdeg, classes) in &groups {
        let gens: Vec<Element> = s_generators(lo)
            .into_iter()
            .filter(|(a, b)| a + b == *gdeg)
            .map(|(a, b)| combo(&t, a + b, &[cp_mono(a, b)]))
            .collect::<Result<_, _>>()?;
        let (spans, _) = orbit_spans(&t, &gens, &thetas, &GradedSubspace::default());
        for cl in classes {
            let e = x(cl)?;
            if !spans.get(&-28).is_some_and(|s| s.contains(&e.vector)) {
                return Err(format!("class {cl:?} is not obtained from generators in {gdeg}"));
            }
            if !all.insert(&e.vector) {
                return Err(format!("class {cl:?} is dependent on the earlier ones"));
            }
        }
    }
    let cokernel = x(&[-18])?;
    if !t.label(-28, cokernel.vector.first_one().unwrap()).ends_with("*y^-5") {
        return Err("X_-18 does not map to the bottom of the cokernel".into());
    }
    if !all.insert(&cokernel.vector) {
        return Err("X_-18 is dependent on the classes from K".into());
    }
    let width = (-24..=-4).step_by(2).count();
    if all.dim() != width || t.dim(-28) != width {
        return Err(format!("{} classes for a {}-dimensional grading", all.dim(), t.dim(-28)));
    }
    Ok(format!("{} classes form a basis of grading -28", all.dim()))
}

/// Elements of CP_1^∞ ⊗ CP_1^∞ (windows 2..n) annihilated by Sq2 and Sq4,
/// against the basis x1^(8i) x2^(8j) (i, j >= 1) and y x1^(8i) x2^(8j)
/// (i, j >= 0), y = x1^8 x2^4 + x1^4 x2^8, exponents being degrees.
pub fn annihilated_suite() -> Outcome {
    let top = 64i64;
    let c = stunted_cp(a2(), 2, top + 2).map_err(err)?;
    let t = tensor_window(&c, &c, None, Some(top + 4)).map_err(err)?;
    let y: Poly = [(8, 4), (4, 8)].into_iter().collect();
    let mut checked = 0;
    for d in (4..=top).step_by(2) {
        let m = t.gen_matrix(1, d).hconcat(&t.gen_matrix(2, d));
        let kernel = row_space_and_left_kernel(&m).kernel;
        let mut expected: Vec<Poly> = Vec::new();
        if d % 8 == 0 {
            for i in 1..d / 8 {
                expected.push([(8 * i, d - 8 * i)].into_iter().collect());
            }
        }
        if d % 8 == 4 && d >= 12 {
            for i in 0..=(d - 12) / 8 {
                let x: Poly = [(8 * i, d - 12 - 8 * i)].into_iter().collect();
                expected.push(poly_mul(&x, &y));
            }
        }
        if kernel.len() != expected.len() {
            return Err(format!("annihilated subspace has dimension {} in degree {d}, basis has {}", kernel.len(), expected.len()));
        }
        let mut ech = Echelon::new(t.dim(d));
        for p in &expected {
            let e = poly_element(&t, d, p)?;
            if !t.act_gen(1, &e).vector.is_zero() || !t.act_gen(2, &e).vector.is_zero() {
                return Err(format!("{p:?} is not annihilated"));
            }
            if !ech.insert(&e.vector) {
                return Err(format!("{p:?} is dependent in degree {d}"));
            }
        }
        checked += 1;
    }
    let y2 = poly_mul(&y, &y);
    let x1 = [(8, 0)].into_iter().collect::<Poly>();
    let x2 = [(0, 8)].into_iter().collect::<Poly>();
    let rhs = poly_add(&poly_mul(&poly_mul(&x1, &x1), &x2), &poly_mul(&x1, &poly_mul(&x2, &x2)));
    if y2 != rhs {
        return Err(format!("y^2 = {y2:?}"));
    }
    let e = poly_element(&t, 24, &y2)?;
    if !t.act_gen(1, &e).vector.is_zero() || !t.act_gen(2, &e).vector.is_zero() {
        return Err("y^2 is not annihilated".into());
    }
    Ok(format!("annihilated subspace matches in {checked} degrees 4..{top}; y^2 = X1^2 X2 + X1 X2^2"))
}

/// Mod 2 polynomials in x1, x2 as sets of exponent pairs (degrees).
type Poly = BTreeSet<(i64, i64)>;

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    a.symmetric_difference(b).copied().collect()
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for &(i, j) in a {
        for &(k, l) in b {
            let m = (i + k, j + l);
            if !out.remove(&m) {
                out.insert(m);
            }
        }
    }
    out
}

fn poly_element(t: &FDModule, d: i64, p: &Poly) -> Result<Element, String> {
    if let Some(m) = p.iter().find(|(i, j)| i + j != d) {
        return Err(format!("monomial {m:?} is not in degree {d}"));
    }
    let labels: Vec<String> = p.iter().map(|&(i, j)| cp_mono(i, j)).collect();
    combo(t, d, &labels)
}
