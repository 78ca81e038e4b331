mod common;

use common::{naive_trace_invariant, random_hermitian, random_matrix, rel_err};
use proptest::prelude::*;
use tensorfree::embedding::EmbeddingGraph;
use tensorfree::pairing::{enumerate_pairings, factorize, Pairing};
use tensorfree::rmt::{local_unitary_conjugate, rng_for, haar_unitary};
use tensorfree::tensors::{
    flat_trace_invariant, normalized_trace_invariant, orthogonal_trace_invariant, substitute, trace_invariant,
    verify_tensor_space_axioms, InvariantCache,
};
use tensorfree::{MultipartiteMatrix, PermTuple, Permutation, C64};

fn refs(xs: &[MultipartiteMatrix]) -> Vec<&MultipartiteMatrix> {
    xs.iter().collect()
}

#[test]
fn contraction_matches_index_loop() {
    let dims = [2, 3];
    let xs: Vec<MultipartiteMatrix> = (0..4).map(|s| random_matrix(&dims, s)).collect();
    for p in 1..=4 {
        for alpha in PermTuple::all(p, 2).into_iter().step_by(7) {
            let m = refs(&xs[..p]);
            let fast = trace_invariant(&alpha, &m).unwrap();
            let slow = naive_trace_invariant(&alpha, &m);
            assert!(rel_err(fast, slow) < 1e-12, "{alpha}: {fast} vs {slow}");
        }
    }
}

#[test]
fn three_legs_match_index_loop() {
    let dims = [2, 2, 3];
    let xs: Vec<MultipartiteMatrix> = (0..3).map(|s| random_matrix(&dims, 10 + s)).collect();
    for alpha in PermTuple::all(3, 3).into_iter().step_by(5) {
        let m = refs(&xs);
        let fast = trace_invariant(&alpha, &m).unwrap();
        assert!(rel_err(fast, naive_trace_invariant(&alpha, &m)) < 1e-12);
    }
}

#[test]
fn worked_bipartite_example() {
    // α = (1 2)(3), β = (1)(2 3): Σ X1_{a1b1,a2b1} X2_{a2b2,a1b3} X3_{a3b3,a3b2}
    let d = 2;
    let xs: Vec<MultipartiteMatrix> = (0..3).map(|s| random_matrix(&[d, d], 20 + s)).collect();
    let ix = |a: usize, b: usize| a * d + b;
    let mut direct = C64::new(0.0, 0.0);
    for a1 in 0..d {
        for a2 in 0..d {
            for a3 in 0..d {
                for b1 in 0..d {
                    for b2 in 0..d {
                        for b3 in 0..d {
                            direct += xs[0].get(ix(a1, b1), ix(a2, b1))
                                * xs[1].get(ix(a2, b2), ix(a1, b3))
                                * xs[2].get(ix(a3, b3), ix(a3, b2));
                        }
                    }
                }
            }
        }
    }
    let alpha = PermTuple::parse("(1 2)(3);(1)(2 3)", Some(3)).unwrap();
    assert!(rel_err(trace_invariant(&alpha, &refs(&xs)).unwrap(), direct) < 1e-12);
}

#[test]
fn full_cycle_on_both_legs_is_trace_of_product() {
    let xs: Vec<MultipartiteMatrix> = (0..4).map(|s| random_matrix(&[3, 2], s)).collect();
    let gamma = Permutation::full_cycle(4);
    let v = trace_invariant(&PermTuple::constant(&gamma, 2), &refs(&xs)).unwrap();
    let prod = xs[0].mul(&xs[1]).unwrap().mul(&xs[2]).unwrap().mul(&xs[3]).unwrap();
    assert!(rel_err(v, prod.trace()) < 1e-12);
}

#[test]
fn partial_transpose_inverts_the_transposed_leg() {
    let xs: Vec<MultipartiteMatrix> = (0..4).map(|s| random_matrix(&[2, 3], 30 + s)).collect();
    let pt: Vec<MultipartiteMatrix> = xs.iter().map(|x| x.partial_transpose(&[1, -1]).unwrap()).collect();
    for alpha in PermTuple::all(4, 2).into_iter().step_by(11) {
        let flipped = PermTuple::new(vec![alpha.get(0).clone(), alpha.get(1).inverse()]).unwrap();
        let a = trace_invariant(&alpha, &refs(&pt)).unwrap();
        let b = trace_invariant(&flipped, &refs(&xs)).unwrap();
        assert!(rel_err(a, b) < 1e-12, "{alpha}");
    }
}

#[test]
fn adjoint_conjugates_and_inverts() {
    let xs: Vec<MultipartiteMatrix> = (0..3).map(|s| random_matrix(&[2, 2], 40 + s)).collect();
    let adj: Vec<MultipartiteMatrix> = xs.iter().map(|x| x.adjoint()).collect();
    for alpha in PermTuple::all(3, 2) {
        let a = trace_invariant(&alpha, &refs(&xs)).unwrap().conj();
        let b = trace_invariant(&alpha.inverse(), &refs(&adj)).unwrap();
        assert!(rel_err(a, b) < 1e-12);
    }
}

#[test]
fn invariant_under_local_unitaries() {
    let xs: Vec<MultipartiteMatrix> = (0..3).map(|s| random_matrix(&[3, 2], 50 + s)).collect();
    let mut rng = rng_for(5, 0);
    let u = [haar_unitary(3, &mut rng, true), haar_unitary(2, &mut rng, true)];
    let ys: Vec<MultipartiteMatrix> = xs.iter().map(|x| x.local_conjugate(&u).unwrap()).collect();
    let zs: Vec<MultipartiteMatrix> = xs.iter().map(|x| local_unitary_conjugate(x, 9, 3).unwrap()).collect();
    let alpha = PermTuple::parse("(1 2 3);(1 3)", Some(3)).unwrap();
    let base = trace_invariant(&alpha, &refs(&xs)).unwrap();
    assert!(rel_err(trace_invariant(&alpha, &refs(&ys)).unwrap(), base) < 1e-12);
    // a shared (seed, trial) gives the same local unitary for every matrix
    assert!(rel_err(trace_invariant(&alpha, &refs(&zs)).unwrap(), base) < 1e-12);
}

#[test]
fn not_invariant_under_global_unitaries() {
    let xs: Vec<MultipartiteMatrix> = (0..2).map(|s| random_matrix(&[2, 2], 60 + s)).collect();
    let mut rng = rng_for(6, 0);
    let u = haar_unitary(4, &mut rng, true);
    let ys: Vec<MultipartiteMatrix> = xs.iter().map(|x| x.conjugate_by(&u).unwrap()).collect();
    let alpha = PermTuple::parse("(1 2);(1)(2)", Some(2)).unwrap();
    let a = trace_invariant(&alpha, &refs(&xs)).unwrap();
    let b = trace_invariant(&alpha, &refs(&ys)).unwrap();
    assert!(rel_err(a, b) > 1e-6);
    // constant tuples are plain traces and survive
    let c = PermTuple::constant(&Permutation::full_cycle(2), 2);
    assert!(rel_err(trace_invariant(&c, &refs(&xs)).unwrap(), trace_invariant(&c, &refs(&ys)).unwrap()) < 1e-12);
}

#[test]
fn orthogonal_worked_example() {
    let xs: Vec<MultipartiteMatrix> = (0..5).map(|s| random_matrix(&[4], 70 + s)).collect();
    let pi = Pairing::parse("(1 2)(-1 -2)(-3 -5)(5 4)(-4 3)", Some(5)).unwrap();
    let v = orthogonal_trace_invariant(&[pi], &refs(&xs)).unwrap();
    let a = xs[0].mul(&xs[1].transpose()).unwrap().trace();
    let b = xs[2].mul(&xs[4].transpose()).unwrap().mul(&xs[3]).unwrap().trace();
    assert!(rel_err(v, a * b) < 1e-12);
}

#[test]
fn orthogonal_invariant_through_factorization() {
    // π = εσδσ⁻¹ε gives Tr_{π∨δ}(X) = Tr_σ(X^f) with X_k transposed when ε flips k
    let xs: Vec<MultipartiteMatrix> = (0..4).map(|s| random_matrix(&[3], 80 + s)).collect();
    for p in 1..=4 {
        for pi in enumerate_pairings(p).unwrap() {
            let (sigma, eps) = factorize(&pi);
            let xf: Vec<MultipartiteMatrix> = (0..p)
                .map(|k| if eps.signs()[k] < 0 { xs[k].transpose() } else { xs[k].clone() })
                .collect();
            let lhs = orthogonal_trace_invariant(std::slice::from_ref(&pi), &refs(&xs[..p])).unwrap();
            let datas: Vec<&tensorfree::linalg::CMat> = xf.iter().map(|x| x.data()).collect();
            let rhs = flat_trace_invariant(&sigma, &datas).unwrap();
            assert!(rel_err(lhs, rhs) < 1e-12, "{pi}: σ = {sigma}");
        }
    }
}

#[test]
fn axioms_hold_on_random_inputs() {
    let xs: Vec<MultipartiteMatrix> = (0..6).map(|s| random_matrix(&[3, 4], 90 + s)).collect();
    let report = verify_tensor_space_axioms(&xs, 20, 7, 1e-10).unwrap();
    assert!(report.all_pass(), "{:?}", report.violations());
}

#[test]
fn substitution_multiplies_in_wiring_order() {
    let xs: Vec<MultipartiteMatrix> = (0..4).map(|s| random_matrix(&[3, 4], 100 + s)).collect();
    let alpha = PermTuple::parse("(1 4 2 3);(1 3 4 2)", Some(4)).unwrap();
    let merged = PermTuple::parse("(1 3 2);(1 2 3)", Some(3)).unwrap();
    let lhs = normalized_trace_invariant(&alpha, &refs(&xs)).unwrap();
    let x4x2 = xs[3].mul(&xs[1]).unwrap();
    let x2x4 = xs[1].mul(&xs[3]).unwrap();
    let good = normalized_trace_invariant(&merged, &[&xs[0], &xs[2], &x4x2]).unwrap();
    let other = normalized_trace_invariant(&merged, &[&xs[0], &xs[2], &x2x4]).unwrap();
    assert!(rel_err(lhs, good) < 1e-12);
    assert!(rel_err(lhs, other) > 1e-3);
    let (t, sub) = substitute(&alpha, &refs(&xs), 3, 1).unwrap();
    assert_eq!(t, merged);
    assert!(rel_err(normalized_trace_invariant(&t, &refs(&sub)).unwrap(), lhs) < 1e-12);
}

#[test]
fn cache_agrees_with_direct_evaluation() {
    let xs: Vec<MultipartiteMatrix> = (0..2).map(|s| random_hermitian(&[2, 3], 110 + s)).collect();
    let cache = InvariantCache::new(refs(&xs), true).unwrap();
    let words = [vec![0, 1, 0], vec![1, 1, 0], vec![0, 0, 0]];
    for alpha in PermTuple::all(3, 2) {
        for w in &words {
            let m: Vec<&MultipartiteMatrix> = w.iter().map(|&i| &xs[i]).collect();
            let direct = trace_invariant(&alpha, &m).unwrap();
            assert!(rel_err(cache.trace(&alpha, w).unwrap(), direct) < 1e-10, "{alpha} {w:?}");
        }
    }
    assert!(cache.evaluations() < 3 * 36);
}

#[test]
fn embedding_reduction_matches_dense_embedding() {
    for g in [EmbeddingGraph::star(3).unwrap(), EmbeddingGraph::grid()] {
        let xs: Vec<MultipartiteMatrix> = (0..g.k()).map(|s| random_matrix(&[2, 2], 120 + s as u64)).collect();
        let ys = g.embed(&xs).unwrap();
        let words = [vec![0, 1], vec![0, 1, 2], vec![2, 0, 2], vec![1, 2, 0]];
        for w in &words {
            let p = w.len();
            for alpha in PermTuple::all(p, g.legs()).into_iter().step_by(13) {
                let ym: Vec<&MultipartiteMatrix> = w.iter().map(|&i| &ys[i]).collect();
                let xm: Vec<&MultipartiteMatrix> = w.iter().map(|&i| &xs[i]).collect();
                let beta = g.reduce_tuple(&alpha, w).unwrap();
                let big = normalized_trace_invariant(&alpha, &ym).unwrap();
                let small = normalized_trace_invariant(&beta, &xm).unwrap();
                assert!(rel_err(big, small) < 1e-12, "{alpha} {w:?}");
            }
        }
    }
}

#[test]
fn disjoint_embeddings_commute() {
    let g = EmbeddingGraph::new(2, 2, vec![(0, 0), (1, 1)]).unwrap();
    assert!(g.legs_disjoint(&[0, 1]));
    let xs: Vec<MultipartiteMatrix> = (0..2).map(|s| random_matrix(&[2, 3], 130 + s)).collect();
    let ys = g.embed(&xs).unwrap();
    let ab = ys[0].mul(&ys[1]).unwrap();
    let ba = ys[1].mul(&ys[0]).unwrap();
    assert!(tensorfree::linalg::max_abs_diff(ab.data(), ba.data()) < 1e-12);
    // exact independence: tr(Y1 Y2) = tr(Y1) tr(Y2)
    let lhs = ab.normalized_trace();
    assert!(rel_err(lhs, ys[0].normalized_trace() * ys[1].normalized_trace()) < 1e-12);
}

fn arb_perm(p: usize) -> impl Strategy<Value = Permutation> {
    Just((0..p).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn arb_tuple(p: usize, r: usize) -> impl Strategy<Value = PermTuple> {
    proptest::collection::vec(arb_perm(p), r).prop_map(|v| PermTuple::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relabelling_conjugates_the_tuple(alpha in arb_tuple(4, 2), sigma in arb_perm(4), seed in 0u64..1000) {
        let xs: Vec<MultipartiteMatrix> = (0..4).map(|s| random_matrix(&[2, 2], seed + s)).collect();
        // Tr_α̲(X_{σ(1)}, …, X_{σ(p)}) = Tr_{σα̲σ⁻¹}(X_1, …, X_p)
        let permuted: Vec<&MultipartiteMatrix> = (0..4).map(|k| &xs[sigma.apply(k)]).collect();
        let lhs = trace_invariant(&alpha, &permuted).unwrap();
        let rhs = trace_invariant(&alpha.conjugate_by(&sigma), &refs(&xs)).unwrap();
        prop_assert!(rel_err(lhs, rhs) < 1e-10);
    }

    #[test]
    fn identity_matrices_have_unit_moments(alpha in arb_tuple(4, 3)) {
        let id = MultipartiteMatrix::identity(vec![2, 3, 2]);
        let v = normalized_trace_invariant(&alpha, &[&id, &id, &id, &id]).unwrap();
        prop_assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn multiplicative_over_disjoint_unions(a in arb_tuple(2, 2), b in arb_tuple(3, 2), seed in 0u64..1000) {
        let xs: Vec<MultipartiteMatrix> = (0..5).map(|s| random_matrix(&[2, 3], seed + s)).collect();
        let joint = trace_invariant(&a.disjoint_union(&b), &refs(&xs)).unwrap();
        let l = trace_invariant(&a, &refs(&xs[..2])).unwrap();
        let r = trace_invariant(&b, &refs(&xs[2..])).unwrap();
        prop_assert!(rel_err(joint, l * r) < 1e-10);
    }
}
