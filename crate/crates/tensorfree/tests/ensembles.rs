use tensorfree::exec::Exec;
use tensorfree::linalg::max_abs_diff;
use tensorfree::rmt::*;
use tensorfree::stats::{ComplexEstimate, Estimate};
use tensorfree::{MultipartiteMatrix, C64};

fn spec(kind: EnsembleKind, dims: Vec<usize>, seed: u64) -> EnsembleSpec {
    EnsembleSpec::new(kind, dims, seed).unwrap()
}

fn moment_estimate(s: &EnsembleSpec, p: i32, trials: usize) -> Estimate {
    let xs: Vec<f64> = Exec::default()
        .map(trials, |t| {
            let x = sample(s, t as u64).unwrap();
            let mut acc = x.clone();
            for _ in 1..p {
                acc = acc.mul(&x).unwrap();
            }
            acc.normalized_trace().re
        });
    Estimate::from_samples(&xs)
}

#[test]
fn gue_second_and_fourth_moments() {
    // E tr X² = 1 and E tr X⁴ = 2 + 1/D² exactly
    let s = spec(EnsembleKind::Gue, vec![4, 4], 1);
    let m2 = moment_estimate(&s, 2, 400);
    assert!(m2.within(1.0, 5.0, 0.0), "{m2:?}");
    let m4 = moment_estimate(&s, 4, 400);
    assert!(m4.within(2.0 + 1.0 / 256.0, 5.0, 0.0), "{m4:?}");
}

#[test]
fn goe_second_moment() {
    // E tr X² = 1 + 1/D for the real symmetric ensemble
    let s = spec(EnsembleKind::Goe, vec![12], 2);
    let m2 = moment_estimate(&s, 2, 400);
    assert!(m2.within(1.0 + 1.0 / 12.0, 5.0, 0.0), "{m2:?}");
}

#[test]
fn wishart_moments() {
    // E tr W = 1, E tr W² = 1 + D/N
    let s = spec(EnsembleKind::Wishart { n: 32 }, vec![4, 4], 3);
    let m1 = moment_estimate(&s, 1, 300);
    assert!(m1.within(1.0, 5.0, 0.0));
    let m2 = moment_estimate(&s, 2, 300);
    assert!(m2.within(1.5, 5.0, 0.0), "{m2:?}");
}

#[test]
fn ginibre_normalization() {
    // E tr(G G*) = 1
    let s = spec(EnsembleKind::GinibreComplex, vec![10], 4);
    let xs: Vec<f64> = (0..200)
        .map(|t| {
            let g = sample(&s, t).unwrap();
            g.mul(&g.adjoint()).unwrap().normalized_trace().re
        })
        .collect();
    assert!(Estimate::from_samples(&xs).within(1.0, 5.0, 0.0));
}

#[test]
fn haar_samplers_are_unitary() {
    for kind in [
        EnsembleKind::HaarUnitary,
        EnsembleKind::HaarUnitaryUncorrected,
        EnsembleKind::HaarOrthogonal,
        EnsembleKind::LocalHaarUnitary,
        EnsembleKind::LocalHaarOrthogonal,
    ] {
        let u = sample(&spec(kind.clone(), vec![3, 4], 5), 0).unwrap();
        let uu = u.mul(&u.adjoint()).unwrap();
        assert!(max_abs_diff(uu.data(), MultipartiteMatrix::identity(vec![3, 4]).data()) < 1e-12, "{kind:?}");
    }
}

#[test]
fn corrected_qr_is_haar_and_raw_qr_is_not() {
    // Haar measure is invariant under column phases, so E U_11 = 0
    let d = 4;
    let mean_u11 = |correct: bool| {
        let z: Vec<C64> = (0..3000)
            .map(|t| {
                let mut rng = rng_for(6, t);
                haar_unitary(d, &mut rng, correct)[(0, 0)]
            })
            .collect();
        ComplexEstimate::from_samples(&z)
    };
    let good = mean_u11(true);
    assert!(good.re.within(0.0, 5.0, 0.0) && good.im.within(0.0, 5.0, 0.0), "{good:?}");
    let bad = mean_u11(false);
    assert!(bad.re.z(0.0) > 20.0, "{bad:?}");
    // the diagonal test alone cannot tell them apart: E |U_11|² = 1/d for both
    for correct in [true, false] {
        let xs: Vec<f64> = (0..3000)
            .map(|t| {
                let mut rng = rng_for(7, t);
                haar_unitary(d, &mut rng, correct)[(0, 0)].norm_sqr()
            })
            .collect();
        assert!(Estimate::from_samples(&xs).within(0.25, 5.0, 0.0));
    }
}

#[test]
fn tensor_gue_is_identity_off_its_legs() {
    let s = spec(EnsembleKind::TensorGue { legs: vec![2] }, vec![3, 2], 8);
    let x = sample(&s, 0).unwrap();
    assert!(x.hermitian_defect() < 1e-14);
    // Tr over leg 2 of G^{(2)} ⊗ I on leg 1: the leg-1 block is proportional to I_3
    let kept = x.partial_trace(&[0]).unwrap();
    let c = kept.get(0, 0);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { c } else { C64::new(0.0, 0.0) };
            assert!((kept.get(i, j) - want).norm() < 1e-13);
        }
    }
}

#[test]
fn embed_on_legs_places_the_block() {
    let a = tensorfree::linalg::CMat::from_fn(2, 2, |i, j| C64::new((2 * i + j) as f64, 0.0));
    let x = embed_on_legs(&a, &[1], &[3, 2]).unwrap();
    let id = tensorfree::linalg::CMat::identity(3, 3);
    assert!(max_abs_diff(x.data(), &tensorfree::linalg::kron(&id, &a)) < 1e-15);
    let y = embed_on_legs(&a, &[0], &[2, 3]).unwrap();
    assert!(max_abs_diff(y.data(), &tensorfree::linalg::kron(&a, &id)) < 1e-15);
}

#[test]
fn draws_depend_only_on_seed_and_trial() {
    let s = spec(EnsembleKind::Wishart { n: 5 }, vec![2, 2], 9);
    let a: Vec<MultipartiteMatrix> = Exec::Parallel.map(6, |t| sample(&s, t as u64).unwrap());
    let b: Vec<MultipartiteMatrix> = Exec::Sequential.map(6, |t| sample(&s, t as u64).unwrap());
    assert_eq!(a, b);
    assert_ne!(a[0], a[1]);
    let other = spec(EnsembleKind::Wishart { n: 5 }, vec![2, 2], 10);
    assert_ne!(sample(&other, 0).unwrap(), a[0]);
}

#[test]
fn specs_round_trip_through_json() {
    let s = spec(EnsembleKind::TensorGue { legs: vec![1, 3] }, vec![2, 3, 4], 11);
    let j = serde_json::to_string(&s).unwrap();
    assert_eq!(EnsembleSpec::from_json(&j).unwrap(), s);
    let w = EnsembleSpec::from_json(r#"{"kind":"wishart","n":8,"dims":[4,4]}"#).unwrap();
    assert_eq!(w.kind, EnsembleKind::Wishart { n: 8 });
    assert_eq!(w.seed, 0);
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(EnsembleSpec::new(EnsembleKind::Gue, vec![], 0).is_err());
    assert!(EnsembleSpec::new(EnsembleKind::Gue, vec![3, 0], 0).is_err());
    assert!(EnsembleSpec::new(EnsembleKind::Wishart { n: 0 }, vec![3], 0).is_err());
    assert!(EnsembleSpec::new(EnsembleKind::TensorGue { legs: vec![3] }, vec![2, 2], 0).is_err());
    assert!(EnsembleSpec::new(EnsembleKind::TensorGue { legs: vec![1, 1] }, vec![2, 2], 0).is_err());
    assert!(EnsembleSpec::from_json(r#"{"kind":"nope","dims":[2]}"#).is_err());
}

#[test]
fn family_members_must_share_dimension() {
    let a = spec(EnsembleKind::Gue, vec![4], 0);
    let b = spec(EnsembleKind::Gue, vec![2, 2], 1);
    assert!(sample_family(&[a.clone(), b], 0).is_ok());
    let c = spec(EnsembleKind::Gue, vec![3], 1);
    assert!(sample_family(&[a, c], 0).is_err());
}
