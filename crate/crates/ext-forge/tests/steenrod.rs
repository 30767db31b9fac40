//! Milnor products checked against an independent model: the faithful action
//! of the Steenrod algebra on polynomials in degree-one classes, with Adem
//! relations for admissible monomials.

use std::collections::{BTreeMap, BTreeSet};

use ext_forge::steenrod::{multiply, Algebra, MilnorElt, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARS: usize = 11;
type Mono = [u16; VARS];
type Poly = BTreeSet<Mono>;

fn add_mono(p: &mut Poly, m: Mono) {
    if !p.remove(&m) {
        p.insert(m);
    }
}

fn multinomial_odd(parts: &[u32]) -> bool {
    let mut acc = 0;
    for &x in parts {
        if acc & x != 0 {
            return false;
        }
        acc |= x;
    }
    true
}

/// Sq(r) on a monomial, by the Cartan formula over the variables and
/// Sq(r) x^n = multinomial(n; n - Σr, r_1, r_2, ...) x^(n + |r|).
fn act_mono(r: &[u32], m: &Mono, out: &mut Poly) {
    fn rec(j: usize, rem: &mut Vec<u32>, m: &Mono, cur: &mut Mono, out: &mut Poly) {
        if j == VARS {
            if rem.iter().all(|&x| x == 0) {
                add_mono(out, *cur);
            }
            return;
        }
        let n = m[j] as u32;
        let mut part = vec![0u32; rem.len()];
        choose(0, n, rem, &mut part, j, m, cur, out);
    }
    #[allow(clippy::too_many_arguments)]
    fn choose(
        i: usize,
        left: u32,
        rem: &mut Vec<u32>,
        part: &mut Vec<u32>,
        j: usize,
        m: &Mono,
        cur: &mut Mono,
        out: &mut Poly,
    ) {
        if i == rem.len() {
            let n = m[j] as u32;
            let mut parts = vec![left];
            parts.extend_from_slice(part);
            if !multinomial_odd(&parts) {
                return;
            }
            let deg: u32 = part.iter().enumerate().map(|(k, &x)| x * ((1 << (k + 1)) - 1)).sum();
            let old = cur[j];
            cur[j] = (n + deg) as u16;
            rec(j + 1, rem, m, cur, out);
            cur[j] = old;
            return;
        }
        for x in 0..=rem[i].min(left) {
            part[i] = x;
            rem[i] -= x;
            choose(i + 1, left - x, rem, part, j, m, cur, out);
            rem[i] += x;
        }
        part[i] = 0;
    }
    let mut rem = r.to_vec();
    let mut cur = *m;
    rec(0, &mut rem, m, &mut cur, out);
}

fn act(r: &[u32], p: &Poly) -> Poly {
    let mut out = Poly::new();
    for m in p {
        act_mono(r, m, &mut out);
    }
    out
}

/// x_1 x_2 ... x_k; the action is faithful on operations Sq(r) with Σr <= k.
fn top_class(k: usize) -> Poly {
    let mut m = [0; VARS];
    m[..k].fill(1);
    let mut p = Poly::new();
    p.insert(m);
    p
}

/// Reads off the Milnor basis expansion of an operation from its value on x_1 ... x_11.
fn decode(p: &Poly) -> BTreeSet<MilnorElt> {
    let mut counts: BTreeMap<MilnorElt, usize> = BTreeMap::new();
    for m in p {
        let mut r = vec![0u32; 4];
        for &e in m.iter().filter(|&&e| e > 0) {
            assert!(e.is_power_of_two(), "exponent {e} is not a power of two");
            let k = e.trailing_zeros() as usize;
            if k > 0 {
                r[k - 1] += 1;
            }
        }
        *counts.entry(MilnorElt::new(&r)).or_default() += 1;
    }
    counts.into_keys().collect()
}

/// Adem relation for a < 2b: Sq^a Sq^b = Σ_j C(b-1-j, a-2j) Sq^(a+b-j) Sq^j.
fn adem(a: u32, b: u32) -> Vec<(u32, u32)> {
    assert!(a < 2 * b);
    let binom_odd = |n: i64, k: i64| k >= 0 && n >= k && (n & k) == k;
    (0..=a / 2)
        .filter(|&j| binom_odd(b as i64 - 1 - j as i64, a as i64 - 2 * j as i64))
        .map(|j| (a + b - j, j))
        .collect()
}

fn total_squares(seq: &[u32], p: &Poly) -> Poly {
    let mut cur = p.clone();
    for &k in seq.iter().rev() {
        cur = act(&[k], &cur);
    }
    cur
}

#[test]
fn adem_oracle_matches_polynomial_action() {
    let x = top_class(VARS);
    for (a, b) in [(1, 1), (2, 2), (3, 2), (1, 2), (2, 3), (3, 3), (4, 4)] {
        if a >= 2 * b {
            continue;
        }
        let lhs = total_squares(&[a, b], &x);
        let mut rhs = Poly::new();
        for (c, d) in adem(a, b) {
            let seq: Vec<u32> = [c, d].into_iter().filter(|&k| k > 0).collect();
            for m in total_squares(&seq, &x) {
                add_mono(&mut rhs, m);
            }
        }
        assert_eq!(lhs, rhs, "Adem relation for Sq^{a} Sq^{b}");
    }
}

#[test]
fn sq2_sq2_is_the_milnor_expansion_of_sq3_sq1() {
    assert_eq!(adem(2, 2), vec![(3, 1)]);
    let expected = decode(&total_squares(&[3, 1], &top_class(VARS)));
    let p = Profile::new(2).unwrap();
    let got = multiply(&MilnorElt::new(&[2]), &MilnorElt::new(&[2]), p).unwrap();
    assert_eq!(got.terms, expected);
    assert_eq!(expected, [MilnorElt::new(&[1, 1])].into_iter().collect());
}

fn check_pair(alg: &Algebra, i: usize, j: usize) {
    let (a, b) = (alg.element(i), alg.element(j));
    let k: u32 = a.exps().iter().chain(b.exps()).sum();
    let x = top_class((k as usize).min(VARS));
    let composite = act(a.exps(), &act(b.exps(), &x));
    let expected = decode(&composite);
    let got = alg.product(i, j);
    assert_eq!(got.terms, expected, "{a} * {b}");
}

#[test]
fn a1_products_match_faithful_action() {
    let alg = Algebra::get(1).unwrap();
    for i in 0..alg.dim() {
        for j in 0..alg.dim() {
            check_pair(alg, i, j);
        }
    }
}

#[test]
fn a2_products_match_faithful_action_on_samples() {
    let alg = Algebra::get(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..alg.dim() {
        for j in 0..alg.dim() {
            if alg.degree(i) + alg.degree(j) <= 8 {
                check_pair(alg, i, j);
            }
        }
    }
    for _ in 0..40 {
        let i = rng.gen_range(0..alg.dim());
        let j = rng.gen_range(0..alg.dim());
        if alg.degree(i) + alg.degree(j) <= 23 {
            check_pair(alg, i, j);
        }
    }
}

#[test]
fn a2_associativity_on_random_triples() {
    let alg = Algebra::get(2).unwrap();
    let dim = alg.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let left_mul = |mask: u64, j: usize| -> u64 {
        (0..dim).filter(|&b| mask >> b & 1 == 1).fold(0, |acc, b| acc ^ alg.product_mask(b, j))
    };
    let right_mul = |i: usize, mask: u64| -> u64 {
        (0..dim).filter(|&b| mask >> b & 1 == 1).fold(0, |acc, b| acc ^ alg.product_mask(i, b))
    };
    for _ in 0..1000 {
        let (a, b, c) = (rng.gen_range(0..dim), rng.gen_range(0..dim), rng.gen_range(0..dim));
        let ab_c = left_mul(alg.product_mask(a, b), c);
        let a_bc = right_mul(a, alg.product_mask(b, c));
        assert_eq!(ab_c, a_bc);
        // Degree additivity: every term sits in degree |a| + |b| + |c|.
        for t in (0..dim).filter(|&t| ab_c >> t & 1 == 1) {
            assert_eq!(alg.degree(t), alg.degree(a) + alg.degree(b) + alg.degree(c));
        }
    }
}
