use alglab_core::groupoid::*;
use proptest::prelude::*;

fn library() -> Vec<(&'static str, FiniteGroupoid)> {
    vec![
        ("pt", FiniteGroupoid::point()),
        ("Z2", FiniteGroupoid::z2()),
        ("Z3", FiniteGroupoid::cyclic(3)),
        ("pair2", FiniteGroupoid::pair(2)),
        ("pair3", FiniteGroupoid::pair(3)),
        ("Z2xpair2", FiniteGroupoid::z2().direct_product(&FiniteGroupoid::pair(2))),
    ]
}

fn iso(g: &FiniteGroupoid, h: &FiniteGroupoid, a: &Bibundle, b: &Bibundle) -> bool {
    two_morphism_search(g, h, a, b, DEFAULT_SEARCH_BUDGET).unwrap().is_some()
}

#[test]
fn identity_bibundle_is_a_unit_for_composition() {
    for (_, g) in library() {
        let id = Bibundle::identity(&g);
        assert!(morita_check(&g, &g, &id).pass);
        let idid = bibundle_compose(&g, &g, &g, &id, &id).unwrap();
        assert!(iso(&g, &g, &idid, &id));
    }
}

#[test]
fn homomorphism_bibundles_compose_like_functors() {
    let (z2, z4) = (FiniteGroupoid::z2(), FiniteGroupoid::cyclic(4));
    let fs = all_homomorphisms(&z4, &z2, DEFAULT_SEARCH_BUDGET).unwrap();
    let gs = all_homomorphisms(&z2, &z4, DEFAULT_SEARCH_BUDGET).unwrap();
    assert_eq!((fs.len(), gs.len()), (2, 2));
    for f in &fs {
        for g in &gs {
            let ef = Bibundle::of_homomorphism(&z4, &z2, f);
            let eg = Bibundle::of_homomorphism(&z2, &z4, g);
            assert!(ef.hs_check(&z4, &z2).is_ok());
            let comp = bibundle_compose(&z4, &z2, &z4, &ef, &eg).unwrap();
            let direct = Bibundle::of_homomorphism(&z4, &z4, &f.then(g));
            assert!(iso(&z4, &z4, &comp, &direct));
        }
    }
    // distinct homomorphisms into an abelian target give distinct bibundles
    let e0 = Bibundle::of_homomorphism(&z2, &z4, &gs[0]);
    let e1 = Bibundle::of_homomorphism(&z2, &z4, &gs[1]);
    assert!(!iso(&z2, &z4, &e0, &e1));
}

#[test]
fn pair_groupoid_is_morita_equivalent_to_the_point() {
    let (p, pt) = (FiniteGroupoid::pair(3), FiniteGroupoid::point());
    let to_pt = Homomorphism { objects: vec![0; 3], arrows: vec![0; 9] };
    let e = Bibundle::of_homomorphism(&p, &pt, &to_pt);
    assert!(morita_check(&p, &pt, &e).pass);
    assert!(morita_check(&pt, &p, &e.flip(&p, &pt)).pass);
}

#[test]
fn z2_is_not_morita_equivalent_to_the_point() {
    let (z2, pt) = (FiniteGroupoid::z2(), FiniteGroupoid::point());
    assert!(morita_bibundle_search(&z2, &pt, 4, DEFAULT_SEARCH_BUDGET).unwrap().is_none());
    // the point maps to Z2, but that bibundle is not principal on the left
    let e = Bibundle::of_homomorphism(&pt, &z2, &Homomorphism { objects: vec![0], arrows: vec![0] });
    assert!(e.hs_check(&pt, &z2).is_ok());
    assert!(!morita_check(&pt, &z2, &e).pass);
    assert!(morita_bibundle_search(&FiniteGroupoid::pair(2), &pt, 4, DEFAULT_SEARCH_BUDGET).unwrap().is_some());
}

/// Morita witnesses among homomorphism bibundles, closed under flips and
/// composition.
#[test]
fn morita_is_an_equivalence_relation_on_the_library() {
    let lib = library();
    let n = lib.len();
    let mut rel: Vec<Vec<Option<Bibundle>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (g, h) = (&lib[i].1, &lib[j].1);
            for f in all_homomorphisms(g, h, DEFAULT_SEARCH_BUDGET).unwrap() {
                let e = Bibundle::of_homomorphism(g, h, &f);
                if morita_check(g, h, &e).pass {
                    rel[i][j] = Some(e.clone());
                    rel[j][i] = Some(e.flip(g, h));
                    assert!(morita_check(h, g, rel[j][i].as_ref().unwrap()).pass);
                    break;
                }
            }
        }
    }
    // close under composition, checking every composite is Morita
    loop {
        let mut grew = false;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if rel[i][k].is_some() {
                        continue;
                    }
                    if let (Some(a), Some(b)) = (&rel[i][j], &rel[j][k]) {
                        let c = bibundle_compose(&lib[i].1, &lib[j].1, &lib[k].1, a, b).unwrap();
                        assert!(morita_check(&lib[i].1, &lib[k].1, &c).pass);
                        rel[i][k] = Some(c);
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    for i in 0..n {
        assert!(rel[i][i].is_some(), "{} not related to itself", lib[i].0);
        let id = Bibundle::identity(&lib[i].1);
        assert!(morita_check(&lib[i].1, &lib[i].1, &id).pass);
        for j in 0..n {
            assert_eq!(rel[i][j].is_some(), rel[j][i].is_some());
        }
    }
    // classes {pt, pair2, pair3}, {Z2, Z2xpair2}, {Z3}
    let class = |i: usize, j: usize| rel[i][j].is_some();
    assert!(class(0, 3) && class(0, 4) && class(3, 4) && class(1, 5));
    assert!(!class(0, 1) && !class(1, 2) && !class(0, 2) && !class(2, 5));
    // the missing links have no small witness either
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert!(morita_bibundle_search(&lib[i].1, &lib[j].1, 3, DEFAULT_SEARCH_BUDGET).unwrap().is_none());
    }
}

#[test]
fn search_budget_is_reported() {
    let g = FiniteGroupoid::cyclic(3).direct_product(&FiniteGroupoid::pair(2));
    let id = Bibundle::identity(&g);
    assert!(matches!(two_morphism_search(&g, &g, &id, &id, 0), Err(GroupoidError::Budget(0))));
    assert!(matches!(morita_bibundle_search(&g, &g, 6, 10), Err(GroupoidError::Budget(10))));
}

#[test]
fn corrupted_json_groupoid_fails_its_axioms() {
    let mut v = FiniteGroupoid::cyclic(3).to_json();
    // replace 1 * 1 = 2 with 1 * 1 = 0
    let mult = v["mult"].as_array_mut().unwrap();
    for e in mult.iter_mut() {
        if e[0] == "1" && e[1] == "1" {
            e[2] = "0".into();
        }
    }
    let g = FiniteGroupoid::from_json(&v.to_string()).unwrap();
    let rep = g.axiom_check();
    assert!(!rep.pass);
    assert!(rep.violations.contains(&Violation::Associativity(1, 1, 2)));
}

/// HS bibundles from homomorphisms between small library members.
fn hs_pool() -> Vec<(usize, usize, Bibundle)> {
    let lib: Vec<FiniteGroupoid> = library().into_iter().map(|(_, g)| g).collect();
    let mut out = vec![];
    for i in 0..lib.len() {
        for j in 0..lib.len() {
            if lib[i].n_arrows() * lib[j].n_arrows() > 64 {
                continue;
            }
            for f in all_homomorphisms(&lib[i], &lib[j], DEFAULT_SEARCH_BUDGET).unwrap().into_iter().take(3) {
                out.push((i, j, Bibundle::of_homomorphism(&lib[i], &lib[j], &f)));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn composition_is_associative_up_to_two_isomorphism(seed in any::<u64>()) {
        let lib: Vec<FiniteGroupoid> = library().into_iter().map(|(_, g)| g).collect();
        let pool = hs_pool();
        // walk a composable triple out of the pool
        let mut s = seed;
        let mut next = |n: usize| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 33) as usize % n };
        let (a, b, e1) = pool[next(pool.len())].clone();
        let from_b: Vec<_> = pool.iter().filter(|p| p.0 == b).collect();
        let (_, c, e2) = from_b[next(from_b.len())].clone();
        let from_c: Vec<_> = pool.iter().filter(|p| p.0 == c).collect();
        let (_, d, e3) = from_c[next(from_c.len())].clone();
        let (ga, gb, gc, gd) = (&lib[a], &lib[b], &lib[c], &lib[d]);
        let left = bibundle_compose(ga, gc, gd, &bibundle_compose(ga, gb, gc, &e1, &e2).unwrap(), &e3).unwrap();
        let right = bibundle_compose(ga, gb, gd, &e1, &bibundle_compose(gb, gc, gd, &e2, &e3).unwrap()).unwrap();
        prop_assert!(left.hs_check(ga, gd).is_ok());
        prop_assert!(iso(ga, gd, &left, &right));
    }
}
