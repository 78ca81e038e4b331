mod common;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use tensorfree::exec::Exec;
use tensorfree::linalg::{max_abs_diff, CMat};
use tensorfree::pairing::{enumerate_pairings, join_block_count};
use tensorfree::rmt::{haar_unitary, rng_for};
use tensorfree::weingarten::*;
use tensorfree::{MultipartiteMatrix, Permutation, C64};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn unitary_p2_closed_form() {
    for d in 2..=64usize {
        let df = d as f64;
        let t = unitary_wg(2, d).unwrap();
        let id = t.get(&Permutation::identity(2));
        let sw = t.get(&Permutation::full_cycle(2));
        assert!(rel(id, 1.0 / (df * df - 1.0)) < 1e-12, "d = {d}");
        assert!(rel(sw, -1.0 / (df * (df * df - 1.0))) < 1e-12, "d = {d}");
    }
}

#[test]
fn orthogonal_p2_closed_form() {
    for d in 2..=64usize {
        let df = d as f64;
        let t = orthogonal_wg(2, d).unwrap();
        for pi in &t.pairings {
            for rho in &t.pairings {
                let expect = if pi == rho {
                    (df + 1.0) / (df * (df + 2.0) * (df - 1.0))
                } else {
                    -1.0 / (df * (df + 2.0) * (df - 1.0))
                };
                assert!(rel(t.get(pi, rho), expect) < 1e-12, "d = {d}");
            }
        }
    }
}

#[test]
fn goldens_at_d10() {
    let u = unitary_wg_exact(2, 10).unwrap();
    assert_eq!(u[0], BigRational::new(1.into(), 99.into()));
    assert_eq!(u[1], BigRational::new((-1).into(), 990.into()));
    let o = orthogonal_wg_exact(2, 10).unwrap();
    assert_eq!(o[0][0], BigRational::new(11.into(), 1080.into()));
    assert_eq!(o[0][1], BigRational::new((-1).into(), 1080.into()));
}

#[test]
fn p3_unitary_class_values() {
    // Wg(1³) = (d²-2)/(d(d²-1)(d²-4)), Wg(21) = -1/((d²-1)(d²-4)), Wg(3) = 2/(d(d²-1)(d²-4))
    let d = 7.0f64;
    let den = (d * d - 1.0) * (d * d - 4.0);
    let t = unitary_wg(3, 7).unwrap();
    assert!(rel(t.get(&Permutation::identity(3)), (d * d - 2.0) / (d * den)) < 1e-12);
    assert!(rel(t.get(&Permutation::parse("(1 2)", Some(3)).unwrap()), -1.0 / den) < 1e-12);
    assert!(rel(t.get(&Permutation::full_cycle(3)), 2.0 / (d * den)) < 1e-12);
}

#[test]
fn float_tables_agree_with_exact() {
    for p in 1..=4 {
        let d = p + 3;
        let t = unitary_wg(p, d).unwrap();
        let e = unitary_wg_exact(p, d).unwrap();
        for (a, b) in t.values.iter().zip(&e) {
            assert!((a - b.to_f64().unwrap()).abs() < 1e-12 * b.to_f64().unwrap().abs().max(1e-6));
        }
    }
    for p in 1..=3 {
        let d = p + 2;
        let t = orthogonal_wg(p, d).unwrap();
        let e = orthogonal_wg_exact(p, d).unwrap();
        for i in 0..e.len() {
            for j in 0..e.len() {
                let b = e[i][j].to_f64().unwrap();
                assert!((t.values[(i, j)] - b).abs() < 1e-10 * b.abs().max(1e-6));
            }
        }
    }
}

#[test]
fn tables_invert_their_gram_matrices() {
    for p in 1..=5 {
        assert!(unitary_wg(p, 2 * p).unwrap().convolution_residual() < 1e-9);
    }
    for p in 1..=4 {
        assert!(orthogonal_wg(p, 2 * p).unwrap().inverse_residual() < 1e-9);
    }
}

#[test]
fn capped_and_refused_orders() {
    assert!(unitary_wg(MAX_UNITARY_P + 1, 20).is_err());
    assert!(orthogonal_wg(MAX_ORTHOGONAL_P + 1, 20).is_err());
    assert!(unitary_wg_exact(MAX_EXACT_P + 1, 20).is_err());
    assert!(unitary_wg(3, 2).is_err());
}

#[test]
fn unitary_asymptotics_are_second_order() {
    let a = unitary_asymptotic_check(&unitary_wg(3, 32).unwrap());
    let b = unitary_asymptotic_check(&unitary_wg(3, 64).unwrap());
    for (x, y) in a.entries.iter().zip(&b.entries) {
        assert_eq!(x.key, y.key);
        assert!(x.deviation / y.deviation >= 3.0, "{}: {} vs {}", x.key, x.deviation, y.deviation);
    }
}

#[test]
fn orthogonal_asymptotics_are_first_order() {
    let a = orthogonal_asymptotic_check(&orthogonal_wg(3, 32).unwrap());
    let b = orthogonal_asymptotic_check(&orthogonal_wg(3, 64).unwrap());
    assert!(a.max_deviation / b.max_deviation >= 1.7);
    assert!(b.max_deviation < 0.2);
}

#[test]
fn orthogonal_scaling_exponent() {
    // d^{2p - #(π∨ρ)} Wg stays bounded for every pair, including the off-geodesic ones
    let t = orthogonal_wg(3, 40).unwrap();
    let pairings = enumerate_pairings(3).unwrap();
    for pi in &pairings {
        for rho in &pairings {
            let b = join_block_count(pi, rho).unwrap();
            let scaled = t.get(pi, rho) * 40f64.powi((6 - b) as i32);
            assert!(scaled.abs() < 10.0);
        }
    }
}

#[test]
fn haar_moment_second_order() {
    // ∫ |U_11|² |U_22|² = Wg(id) = 1/(d²-1)
    let t = unitary_wg(2, 5).unwrap();
    let v = unitary_haar_moment(&t, &[0, 1], &[0, 1], &[0, 1], &[0, 1]);
    assert!(rel(v, 1.0 / 24.0) < 1e-12);
    // ∫ |U_11|⁴ = 2/(d(d+1))
    let v = unitary_haar_moment(&t, &[0, 0], &[0, 0], &[0, 0], &[0, 0]);
    assert!(rel(v, 2.0 / 30.0) < 1e-12);
}

fn random_two_copy(d: usize, seed: u64) -> MultipartiteMatrix {
    common::random_matrix(&[d, d], seed)
}

#[test]
fn twirl_of_identity_is_identity() {
    let id = MultipartiteMatrix::identity(vec![4, 4]);
    assert!(max_abs_diff(twirl2_unitary(&id).unwrap().data(), id.data()) < 1e-14);
    assert!(max_abs_diff(twirl2_orthogonal(&id).unwrap().data(), id.data()) < 1e-14);
}

#[test]
fn omega_is_an_orthogonal_fixed_point() {
    let d = 4;
    let w = omega_operator(d).scale(C64::new(d as f64, 0.0));
    assert!(max_abs_diff(twirl2_orthogonal(&w).unwrap().data(), w.data()) < 1e-13);
    let f = swap_operator(d);
    assert!(max_abs_diff(twirl2_unitary(&f).unwrap().data(), f.data()) < 1e-13);
}

#[test]
fn twirl_commutes_with_exact_conjugation() {
    // the twirl is invariant under X ↦ (V⊗V) X (V⊗V)* for any fixed unitary V
    let d = 3;
    let x = random_two_copy(d, 1);
    let mut rng = rng_for(3, 3);
    let v = haar_unitary(d, &mut rng, true);
    let vv = tensorfree::linalg::kron(&v, &v);
    let y = x.conjugate_by(&vv).unwrap();
    assert!(max_abs_diff(twirl2_unitary(&x).unwrap().data(), twirl2_unitary(&y).unwrap().data()) < 1e-13);
}

#[test]
fn twirl_monte_carlo_matches_closed_forms() {
    let d = 3;
    let x = random_two_copy(d, 2);
    let mc = twirl2_monte_carlo(&x, WgKind::Unitary, 1500, 11, Exec::default()).unwrap();
    assert!(mc.max_z(twirl2_unitary(&x).unwrap().data(), 1e-12) < 5.0);
    let mc = twirl2_monte_carlo(&x, WgKind::Orthogonal, 1500, 12, Exec::default()).unwrap();
    let exact = twirl2_orthogonal(&x).unwrap();
    assert!(mc.max_z(exact.data(), 1e-12) < 5.0);
    // the unitary closed form is not the orthogonal one
    assert!(mc.max_z(twirl2_unitary(&x).unwrap().data(), 1e-12) > 5.0);
}

#[test]
fn twirl_of_identity_has_no_spread() {
    let id = MultipartiteMatrix::identity(vec![2, 2]);
    let mc = twirl2_monte_carlo(&id, WgKind::Unitary, 10, 0, Exec::Sequential).unwrap();
    assert!(max_abs_diff(&mc.mean, &CMat::identity(4, 4)) < 1e-13);
    assert!(mc.max_z(id.data(), 1e-12) < 1.0);
}

#[test]
fn twirl_requires_square_two_copy_dims() {
    assert!(twirl2_unitary(&MultipartiteMatrix::identity(vec![2, 3])).is_err());
    assert!(twirl2_orthogonal(&MultipartiteMatrix::identity(vec![1, 1])).is_err());
}
