use proptest::prelude::*;

use ext_forge::arith2::{alpha, binom_mod2, nu_binom, TwoAdic};
use ext_forge::axial::{axial_decompose, axial_decompose_with_lead, pmul, solve_theta, solve_theta_with_lead, PSeries};
use ext_forge::certify::{emit_statement, ChartCache, ChartSettings, Variant, Verdict};
use ext_forge::error::Error;
use ext_forge::f2linalg::{kernel_basis, rank, row_space_and_left_kernel, BitMatrix, BitVector, Echelon};

const J: usize = 12;
const K: u32 = 32;

fn matrix() -> impl Strategy<Value = BitMatrix> {
    (1usize..40, 1usize..90).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r).prop_map(move |rows| {
            let rows: Vec<BitVector> =
                rows.iter().map(|bits| BitVector::from_indices(c, bits.iter().enumerate().filter(|b| *b.1).map(|b| b.0))).collect();
            BitMatrix::from_rows(c, &rows)
        })
    })
}

/// Series with support in p_0..p_4, so triple products stay inside index J.
fn small_series() -> impl Strategy<Value = PSeries> {
    proptest::collection::vec(any::<i64>(), 5).prop_map(|cs| {
        let terms: Vec<(usize, i64)> = cs.into_iter().enumerate().collect();
        PSeries::from_terms(&terms, J, K)
    })
}

/// Binomial coefficient parity by Pascal's rule.
fn pascal_parity(n: usize) -> Vec<Vec<bool>> {
    let mut rows = vec![vec![true]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let row = (0..=i).map(|k| (k > 0 && prev[k - 1]) ^ (k < i && prev[k])).collect();
        rows.push(row);
    }
    rows
}

/// Carries when adding b and a - b in base 2.
fn carries(x: u64, y: u64) -> u32 {
    let (mut carry, mut count) = (0u64, 0);
    for i in 0..64 {
        let s = ((x >> i) & 1) + ((y >> i) & 1) + carry;
        carry = s >> 1;
        count += carry as u32;
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_plus_nullity(m in matrix()) {
        let ker = kernel_basis(&m);
        prop_assert_eq!(rank(&m) + ker.len(), m.cols());
        for v in &ker {
            prop_assert!(m.mul_vec(v).is_zero());
        }
        let left = row_space_and_left_kernel(&m);
        prop_assert_eq!(left.image.len() + left.kernel.len(), m.rows());
        prop_assert_eq!(left.image.len(), rank(&m));
        for v in &left.kernel {
            prop_assert!(m.vec_mul(v).is_zero());
        }
        let mut ech = Echelon::new(m.cols());
        let inserted = (0..m.rows()).filter(|&r| ech.insert(&m.row(r))).count();
        prop_assert_eq!(inserted, rank(&m));
        prop_assert_eq!(rank(&m.transpose()), rank(&m));
    }

    #[test]
    fn pseries_ring_axioms(a in small_series(), b in small_series(), c in small_series()) {
        let one = PSeries::constant(1, J, K);
        prop_assert_eq!(pmul(&a, &one).unwrap(), a.clone());
        prop_assert_eq!(pmul(&a, &b).unwrap(), pmul(&b, &a).unwrap());
        prop_assert_eq!(
            pmul(&pmul(&a, &b).unwrap(), &c).unwrap(),
            pmul(&a, &pmul(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            pmul(&a, &b.add(&c).unwrap()).unwrap(),
            pmul(&a, &b).unwrap().add(&pmul(&a, &c).unwrap()).unwrap()
        );
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn binom_mod2_has_period(i in -5000i64..5000, k in 0u64..256, e in 8u32..20) {
        prop_assert_eq!(binom_mod2(i, k), binom_mod2(i + (1i64 << e), k));
    }

    #[test]
    fn nu_binom_counts_carries(a in 0u64..(1 << 40), f in 0.0f64..=1.0) {
        let b = (a as f64 * f) as u64;
        prop_assert_eq!(nu_binom(a, b).unwrap(), carries(b, a - b));
        prop_assert_eq!(binom_mod2(a as i64, b), nu_binom(a, b).unwrap() == 0);
    }

    #[test]
    fn zero_kappa_gives_trivial_unit(gs in proptest::collection::vec(any::<u32>(), 0..6)) {
        let gammas: Vec<TwoAdic> = gs.iter().map(|&g| TwoAdic::from_u64(g as u64, K)).collect();
        let kappas = vec![TwoAdic::zero(K); 6];
        let d = axial_decompose(&kappas, &gammas, J, K).unwrap();
        prop_assert_eq!(d.u, TwoAdic::one(K));
        prop_assert!(d.betas.iter().all(|b| b.is_zero()));
        prop_assert_eq!(d.expand(J).unwrap(), PSeries::monomial(1, 1, J, K));
    }

    #[test]
    fn lead_choice_keeps_the_bounds(
        odd in (0i64..1000).prop_map(|v| 2 * v + 1),
        double in any::<bool>(),
        gs in proptest::collection::vec(any::<u32>(), 1..6),
        ks in proptest::collection::vec(any::<u32>(), 1..6),
    ) {
        let lead = 16 * odd * if double { 2 } else { 1 };
        let gammas: Vec<TwoAdic> = gs.iter().map(|&g| TwoAdic::from_u64(g as u64, K)).collect();
        let kappas: Vec<TwoAdic> = ks.iter().map(|&g| TwoAdic::from_u64(g as u64, K)).collect();
        let t = solve_theta_with_lead(&gammas, lead, J, K).unwrap();
        for (idx, c) in t.series.signed_coeffs().into_iter().enumerate() {
            let c = c.rem_euclid(1i128 << K);
            if idx % 2 == 0 {
                prop_assert_eq!(c, 0);
            } else if c != 0 {
                prop_assert!(c.trailing_zeros() >= 4 + (idx as u32 - 1) / 2, "p{} coefficient {}", idx, c);
            }
        }
        let d = axial_decompose_with_lead(&kappas, &gammas, lead, J, K).unwrap();
        prop_assert!(d.u.is_odd());
        for (m, b) in d.betas.iter().enumerate() {
            let v = b.value() as i128;
            prop_assert!(v == 0 || v.trailing_zeros() >= (m as u32 + 5).min(K));
        }
    }
}

#[test]
fn binom_mod2_matches_pascal() {
    let rows = pascal_parity(200);
    for (n, row) in rows.iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            assert_eq!(binom_mod2(n as i64, k as u64), p, "C({n},{k})");
        }
    }
    // C(-1, k) = (-1)^k, C(-2, k) = (-1)^k (k+1).
    for k in 0..100u64 {
        assert!(binom_mod2(-1, k));
        assert_eq!(binom_mod2(-2, k), k % 2 == 0);
    }
}

#[test]
fn theta_without_gammas_is_the_lead() {
    assert_eq!(solve_theta(&[], J, K).unwrap(), PSeries::monomial(16, 1, J, K));
    let zeros = vec![TwoAdic::zero(K); 8];
    assert_eq!(solve_theta(&zeros, J, K).unwrap(), PSeries::monomial(16, 1, J, K));
}

#[test]
fn statements_follow_the_formulas() {
    let cache = ChartCache::new();
    let s = ChartSettings::default();
    for h in 2..=4u32 {
        let q = (h as u64).next_power_of_two();
        for m in 0..1024u64 {
            let a = alpha(m) as u64;
            let h64 = h as u64;
            let expected = if m % q != 0 {
                None
            } else if a == 4 * h64 - 1 {
                Some((Variant::A, 8 * m + 8 * h64 + 2, (16 * m + 10).checked_sub(8 * h64)))
            } else if a == 4 * h64 - 2 {
                Some((Variant::B, 8 * m + 8 * h64, (16 * m + 12).checked_sub(8 * h64)))
            } else {
                None
            };
            match (emit_statement(m, h, &cache, s), expected) {
                (Ok(c), Some((v, n, Some(b)))) => {
                    assert_eq!(c.inputs.variant, Some(v), "M={m} h={h}");
                    assert_eq!((c.claim.n, c.claim.b), (n, b), "M={m} h={h}");
                    assert_eq!(c.verdict, Verdict::StatementOnly);
                }
                (Err(Error::Hypothesis(_)), None) | (Err(Error::Hypothesis(_)), Some((_, _, None))) => {}
                (got, want) => panic!("M={m} h={h}: got {got:?}, expected {want:?}"),
            }
        }
    }
    assert_eq!(cache.len(), 0);
}

#[test]
fn verdicts_survive_larger_charts() {
    let cache = ChartCache::new();
    let small = ChartSettings::default();
    let large = ChartSettings { single_max_s: small.single_max_s + 2, product_max_s: small.product_max_s + 2 };
    for m in [3u64, 6, 7, 11] {
        let a = emit_statement(m, 1, &cache, small).unwrap();
        let b = emit_statement(m, 1, &cache, large).unwrap();
        assert_eq!(a.verdict, Verdict::Certified, "M={m}");
        assert_eq!(a.verdict, b.verdict, "M={m}");
        assert_eq!(a.claim, b.claim);
        let key = |c: &ext_forge::certify::Certificate| c.orders.iter().map(|o| (o.i, o.j, o.exponent)).collect::<Vec<_>>();
        assert_eq!(key(&a), key(&b), "M={m}");
    }
}
