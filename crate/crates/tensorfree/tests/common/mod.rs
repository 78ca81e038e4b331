#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensorfree::linalg::CMat;
use tensorfree::{MultipartiteMatrix, PermTuple, C64};

pub fn random_matrix(dims: &[usize], seed: u64) -> MultipartiteMatrix {
    let d: usize = dims.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = CMat::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    MultipartiteMatrix::new(dims.to_vec(), data).unwrap()
}

pub fn random_hermitian(dims: &[usize], seed: u64) -> MultipartiteMatrix {
    let x = random_matrix(dims, seed);
    x.add(&x.adjoint()).unwrap()
}

fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for s in (0..dims.len()).rev() {
        out[s] = idx % dims[s];
        idx /= dims[s];
    }
    out
}

fn undigits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Direct sum over all row indices: the column index of `X_k` on leg `s` is
/// the row index of `X_{α_s(k)}` on leg `s`.
pub fn naive_trace_invariant(alpha: &PermTuple, xs: &[&MultipartiteMatrix]) -> C64 {
    let dims = xs[0].dims().to_vec();
    let p = alpha.p();
    let d = xs[0].dim();
    let mut total = C64::new(0.0, 0.0);
    let n = d.pow(p as u32);
    for idx in 0..n {
        let mut rows = Vec::with_capacity(p);
        let mut rem = idx;
        for _ in 0..p {
            rows.push(rem % d);
            rem /= d;
        }
        let rd: Vec<Vec<usize>> = rows.iter().map(|&i| digits(i, &dims)).collect();
        let mut prod = C64::new(1.0, 0.0);
        for k in 0..p {
            let col: Vec<usize> = (0..dims.len()).map(|s| rd[alpha.get(s).apply(k)][s]).collect();
            prod *= xs[k].get(rows[k], undigits(&col, &dims));
        }
        total += prod;
    }
    total
}

pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
