use std::collections::BTreeSet;

use proptest::prelude::*;
use tensorfree::pairing::{
    delta, enumerate_pairings, factorize, join_block_count, pairing_from_perm, perm_from_pairing, recompose, Pairing,
};
use tensorfree::perm::{
    catalan, enumerate_snc, is_geodesic, join_snc, meet_snc, mobius, noncrossing_partitions, snc_size, CATALAN,
};
use tensorfree::{Partition, PermTuple, Permutation};

// cycle count by walking the images, independent of the library's cycle code
fn cycles_of(img: &[usize]) -> usize {
    let mut seen = vec![false; img.len()];
    let mut n = 0;
    for s in 0..img.len() {
        if !seen[s] {
            n += 1;
            let mut k = s;
            while !seen[k] {
                seen[k] = true;
                k = img[k];
            }
        }
    }
    n
}

fn length(img: &[usize]) -> usize {
    img.len() - cycles_of(img)
}

fn compose_inv_left(a: &[usize], b: &[usize]) -> Vec<usize> {
    // a⁻¹ ∘ b
    let mut inv = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x] = i;
    }
    b.iter().map(|&x| inv[x]).collect()
}

#[test]
fn catalan_table() {
    assert_eq!(&CATALAN[..8], &[1, 1, 2, 5, 14, 42, 132, 429]);
    assert_eq!(catalan(30).unwrap(), 3814986502092304);
    assert!(catalan(31).is_err());
}

#[test]
fn snc_of_full_cycle_is_geodesic_filter() {
    for p in 1..=6 {
        let gamma = Permutation::full_cycle(p);
        let g = gamma.images().to_vec();
        let brute: BTreeSet<Vec<usize>> = Permutation::all(p)
            .filter(|a| {
                let a = a.images();
                length(a) + length(&compose_inv_left(a, &g)) == length(&g)
            })
            .map(|a| a.images().to_vec())
            .collect();
        let snc: BTreeSet<Vec<usize>> = enumerate_snc(&gamma).unwrap().iter().map(|a| a.images().to_vec()).collect();
        assert_eq!(brute.len() as u64, CATALAN[p]);
        assert_eq!(snc, brute, "p = {p}");
        assert_eq!(snc_size(&gamma).unwrap(), CATALAN[p]);
    }
}

#[test]
fn snc_size_is_product_over_cycles() {
    let beta = Permutation::parse("(1 3 5)(2 4)(6)", Some(6)).unwrap();
    assert_eq!(snc_size(&beta).unwrap(), 5 * 2);
    let all = enumerate_snc(&beta).unwrap();
    assert_eq!(all.len(), 10);
    for a in &all {
        assert!(is_geodesic(a, &beta).unwrap());
    }
}

#[test]
fn noncrossing_partitions_are_counted_by_catalan() {
    for n in 0..=7 {
        let parts = noncrossing_partitions(n);
        assert_eq!(parts.len() as u64, CATALAN[n]);
        for blocks in parts.into_iter().filter(|_| n > 0) {
            assert!(Partition::from_blocks(n, blocks).unwrap().is_noncrossing());
        }
    }
    let crossing = Partition::from_blocks(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
    assert!(!crossing.is_noncrossing());
}

#[test]
fn mobius_inverts_zeta() {
    // Σ_{π ≤ σ} Möb(π⁻¹σ) vanishes unless σ = id
    for p in 1..=6 {
        let gamma = Permutation::full_cycle(p);
        let s: i64 = enumerate_snc(&gamma).unwrap().iter().map(|pi| mobius(&pi.inverse().compose(&gamma))).sum();
        assert_eq!(s, if p == 1 { 1 } else { 0 });
        let id = Permutation::identity(p);
        assert_eq!(mobius(&id), 1);
    }
    assert_eq!(mobius(&Permutation::full_cycle(4)), -5);
    assert_eq!(mobius(&Permutation::parse("(1 2)(3 4 5)", Some(5)).unwrap()), -2);
}

#[test]
fn lattice_operations_stay_below() {
    let gamma = Permutation::full_cycle(5);
    let snc = enumerate_snc(&gamma).unwrap();
    for a in snc.iter().step_by(3) {
        for b in snc.iter().step_by(5) {
            let m = meet_snc(a, b).unwrap();
            let j = join_snc(a, b, &gamma).unwrap();
            assert!(is_geodesic(&m, a).unwrap() && is_geodesic(&m, b).unwrap());
            assert!(is_geodesic(a, &j).unwrap() && is_geodesic(b, &j).unwrap());
            assert!(is_geodesic(&j, &gamma).unwrap());
        }
    }
}

#[test]
fn pairing_counts_and_join_identity() {
    for p in 1..=4 {
        let all = enumerate_pairings(p).unwrap();
        let expected: usize = (1..=p).map(|k| 2 * k - 1).product();
        assert_eq!(all.len(), expected);
        for pi in &all {
            for rho in &all {
                let prod: Vec<usize> = {
                    let a = pi.as_perm();
                    let b = rho.as_perm();
                    a.compose(&b).images().to_vec()
                };
                assert_eq!(2 * join_block_count(pi, rho).unwrap(), cycles_of(&prod), "{pi} {rho}");
            }
        }
    }
}

#[test]
fn factorize_round_trips_every_pairing() {
    for p in 1..=5 {
        for pi in enumerate_pairings(p).unwrap() {
            let (sigma, eps) = factorize(&pi);
            assert_eq!(recompose(&sigma, &eps), pi);
            // |πδ| = 2|σ|
            let pd = pi.as_perm().compose(&delta(p).as_perm());
            assert_eq!(length(pd.images()), 2 * sigma.length());
        }
    }
}

#[test]
fn delta_type_pairings_are_permutations() {
    for sigma in Permutation::all(4) {
        let pi = pairing_from_perm(&sigma);
        assert!(pi.is_delta_type());
        assert_eq!(perm_from_pairing(&pi).unwrap(), sigma);
    }
    let bad = Pairing::parse("(1 2)(-1 -2)", Some(2)).unwrap();
    assert!(perm_from_pairing(&bad).is_err());
}

#[test]
fn text_formats() {
    let s = Permutation::parse("(1 7 3)(2 5 6 4)", None).unwrap();
    assert_eq!(s.to_string(), "(1 7 3)(2 5 6 4)");
    let t = Permutation::parse("(2 3)", Some(4)).unwrap();
    assert_eq!(t.to_string(), "(1)(2 3)(4)");
    assert!(Permutation::parse("(1 2)(2 3)", None).is_err());
    assert!(Permutation::parse("(1 x)", None).is_err());
    let tuple = PermTuple::parse("(1 2);(1)(2)", Some(2)).unwrap();
    assert_eq!(tuple.to_string(), "(1 2);(1)(2)");
    let pi = Pairing::parse("(1 2)(-2 3)(-3 4)(-1 -4)", None).unwrap();
    assert_eq!(Pairing::parse(&pi.to_string(), None).unwrap(), pi);
}

fn arb_perm(p: usize) -> impl Strategy<Value = Permutation> {
    Just((0..p).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

proptest! {
    #[test]
    fn display_parse_round_trip(s in (1usize..9).prop_flat_map(arb_perm)) {
        prop_assert_eq!(Permutation::parse(&s.to_string(), Some(s.p())).unwrap(), s);
    }

    #[test]
    fn inverse_is_two_sided(s in arb_perm(7)) {
        prop_assert!(s.compose(&s.inverse()).is_identity());
        prop_assert!(s.inverse().compose(&s).is_identity());
    }

    #[test]
    fn triangle_inequality(a in arb_perm(6), b in arb_perm(6)) {
        prop_assert!(a.compose(&b).length() <= a.length() + b.length());
    }

    #[test]
    fn geodesic_ends(a in arb_perm(6)) {
        prop_assert!(is_geodesic(&Permutation::identity(6), &a).unwrap());
        prop_assert!(is_geodesic(&a, &a).unwrap());
    }

    #[test]
    fn conjugation_preserves_cycle_type(a in arb_perm(6), s in arb_perm(6)) {
        prop_assert_eq!(a.conjugate_by(&s).cycle_type(), a.cycle_type());
    }

    #[test]
    fn rank_is_a_bijection_index(a in arb_perm(5)) {
        let r = a.rank();
        prop_assert!(r < 120);
        prop_assert_eq!(Permutation::all(5).nth(r).unwrap(), a);
    }

    #[test]
    fn factorize_on_random_pairings(sigma in arb_perm(6), signs in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 6)) {
        let eps = tensorfree::pairing::SignedInvolution::new(signs).unwrap();
        let pi = recompose(&sigma, &eps);
        let (s2, e2) = factorize(&pi);
        prop_assert_eq!(recompose(&s2, &e2), pi);
    }
}
