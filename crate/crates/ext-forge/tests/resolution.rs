use ext_forge::charts::HKind;
use ext_forge::fdmodule::{named_module, FDModule, NamedModule};
use ext_forge::resolution::minimal_resolution;
use ext_forge::steenrod::Profile;

fn ranks_by_stem(r: &ext_forge::resolution::Resolution, stem: i64, max_s: i64) -> Vec<usize> {
    (0..=max_s).map(|s| r.rank(s, stem + s)).collect()
}

#[test]
fn ext_over_a1_of_a_point() {
    let m = FDModule::trivial(Profile::new(1).unwrap());
    let r = minimal_resolution(&m, 7, 18, (0, 11)).unwrap();
    r.check_d_squared().unwrap();
    r.check_minimal().unwrap();
    assert_eq!(ranks_by_stem(&r, 0, 7), vec![1; 8]);
    assert_eq!(ranks_by_stem(&r, 1, 7), vec![0, 1, 0, 0, 0, 0, 0, 0]);
    assert_eq!(ranks_by_stem(&r, 2, 7), vec![0, 0, 1, 0, 0, 0, 0, 0]);
    assert_eq!(ranks_by_stem(&r, 3, 7), vec![0; 8]);
    assert_eq!(ranks_by_stem(&r, 4, 7), vec![0, 0, 0, 1, 1, 1, 1, 1]);
    for stem in [5, 6, 7] {
        assert_eq!(ranks_by_stem(&r, stem, 7), vec![0; 8], "stem {stem}");
    }
    assert_eq!(ranks_by_stem(&r, 8, 7), vec![0, 0, 0, 0, 1, 1, 1, 1]);
    assert_eq!(ranks_by_stem(&r, 9, 7), vec![0, 0, 0, 0, 0, 1, 0, 0]);
    let c = r.ext_chart().unwrap();
    let h0: Vec<_> = c.lines_of(HKind::H0).collect();
    let h1: Vec<_> = c.lines_of(HKind::H1).collect();
    use ext_forge::charts::GenName as G;
    assert!(h0.contains(&(G(0, 0, 0), G(1, 1, 0))));
    assert!(h0.contains(&(G(3, 7, 0), G(4, 8, 0))));
    assert!(!h0.iter().any(|(a, _)| a.stem() == 1 || a.stem() == 2));
    assert!(h1.contains(&(G(0, 0, 0), G(1, 2, 0))));
    assert!(h1.contains(&(G(1, 2, 0), G(2, 4, 0))));
    assert!(h1.contains(&(G(4, 12, 0), G(5, 14, 0))));
    assert!(!h1.iter().any(|(a, _)| a.stem() == 2));
    assert!(c.lines_of(HKind::H2).next().is_none());
}

#[test]
fn ext_over_a2_of_a_point_low_stems() {
    let m = FDModule::trivial(Profile::new(2).unwrap());
    let r = minimal_resolution(&m, 6, 16, (0, 9)).unwrap();
    r.check_d_squared().unwrap();
    r.check_minimal().unwrap();
    assert_eq!(ranks_by_stem(&r, 0, 6), vec![1; 7]);
    assert_eq!(ranks_by_stem(&r, 1, 6), vec![0, 1, 0, 0, 0, 0, 0]);
    assert_eq!(ranks_by_stem(&r, 2, 6), vec![0, 0, 1, 0, 0, 0, 0]);
    assert_eq!(ranks_by_stem(&r, 3, 6), vec![0, 1, 1, 1, 0, 0, 0]);
    assert_eq!(ranks_by_stem(&r, 4, 6), vec![0; 7]);
    assert_eq!(ranks_by_stem(&r, 5, 6), vec![0; 7]);
    assert_eq!(ranks_by_stem(&r, 6, 6), vec![0, 0, 1, 0, 0, 0, 0]);
    assert_eq!(ranks_by_stem(&r, 7, 6), vec![0; 7]);
    assert_eq!(ranks_by_stem(&r, 8, 6), vec![0, 0, 0, 1, 1, 1, 1]);
    let c = r.ext_chart().unwrap();
    use ext_forge::charts::GenName as G;
    let h2: Vec<_> = c.lines_of(HKind::H2).collect();
    assert!(h2.contains(&(G(0, 0, 0), G(1, 4, 0))));
    assert!(h2.contains(&(G(1, 4, 0), G(2, 8, 0))));
    // h1 h2 = 0.
    assert!(!c.lines_of(HKind::H1).any(|(a, _)| a == G(1, 4, 0)));
}

#[test]
fn named_module_resolutions_are_consistent() {
    for n in [NamedModule::A2modA1, NamedModule::M10, NamedModule::A2modSq2] {
        let m = named_module(n).unwrap();
        let r = minimal_resolution(&m, 4, 20, (0, 16)).unwrap();
        r.check_d_squared().unwrap();
        r.check_minimal().unwrap();
    }
}

#[test]
fn change_of_rings_for_a2_mod_a1() {
    let m = named_module(NamedModule::A2modA1).unwrap();
    // A(2)//A(1) over A(2): Ext is Ext over A(1) of a point (change of rings).
    let r = minimal_resolution(&m, 5, 14, (0, 9)).unwrap();
    let p = FDModule::trivial(Profile::new(1).unwrap());
    let r1 = minimal_resolution(&p, 5, 14, (0, 9)).unwrap();
    for s in 0..=5 {
        for stem in 0..=9 {
            assert_eq!(r.rank(s, stem + s), r1.rank(s, stem + s), "({stem},{s})");
        }
    }
}

/// The lift-based h_i lines agree with reading off the Sq(2^i) coefficient of
/// the minimal differential, since Sq(2^i) never occurs in a decomposable.
#[test]
fn lifted_lines_match_indecomposable_coefficients() {
    use ext_forge::steenrod::{Algebra, MilnorElt};
    let alg = Algebra::get(2).unwrap();
    for m in [FDModule::trivial(Profile::new(2).unwrap()), named_module(NamedModule::M10).unwrap()] {
        let r = minimal_resolution(&m, 5, 22, (0, 16)).unwrap();
        for kind in [HKind::H0, HKind::H1, HKind::H2] {
            let sq = alg.index_of(&MilnorElt::new(&[1 << kind.index()])).unwrap();
            let mut expected = Vec::new();
            for s in 1..=r.depth() {
                for t in 0..=22 {
                    for g in r.generators(s, t) {
                        for (src, b) in r.differential(g) {
                            if b == sq {
                                expected.push((src, g));
                            }
                        }
                    }
                }
            }
            expected.sort();
            let mut got = r.structure_lines(kind).unwrap();
            got.sort();
            assert_eq!(got, expected, "{} {:?}", m.name(), kind);
        }
    }
}

fn chart_on(src: &str, max_s: i64, max_t: i64, stems: (i64, i64), grow: i64) -> ext_forge::charts::ExtChart {
    use ext_forge::expr;
    use ext_forge::resolution::stable_window;
    let e = expr::parse(src).unwrap();
    let mut w = stable_window(e.bottom(), max_s, max_t, stems);
    if e.bottom().is_none() {
        w.lo -= grow;
    }
    w.hi += grow;
    expr::resolve(&e, Profile::new(2).unwrap(), max_s, max_t, stems, Some(w)).unwrap().ext_chart().unwrap()
}

#[test]
fn enlarging_the_window_keeps_the_chart() {
    for (src, max_s, max_t, stems) in
        [("P[-3..]", 6, 12, (-1, 7)), ("P[..-2]", 5, -4, (-20, -8)), ("tensor(P[-1..],P[-3..])", 5, 12, (2, 8))]
    {
        let a = chart_on(src, max_s, max_t, stems, 0);
        let b = chart_on(src, max_s, max_t, stems, 8);
        assert!(!a.entries.is_empty(), "{src}");
        assert_eq!(a.entries, b.entries, "{src}");
        assert_eq!(a.lines.len(), b.lines.len(), "{src}");
    }
}
