//! Dense complex linear algebra helpers.
//!
//! Storage is `nalgebra::DMatrix<C64>` (column-major). Products go through
//! `matrixmultiply::zgemm`, which is several times faster than the generic
//! nalgebra kernel for complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;

/// `C = A B` for column-major matrices.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMat::zeros(m, n);
    if m == 0 || n == 0 {
        return c;
    }
    unsafe {
        gemm_raw(
            m,
            k,
            n,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            1,
            k as isize,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
    c
}

/// `C = A B*` for column-major matrices.
pub fn matmul_adjoint_right(a: &CMat, b: &CMat) -> CMat {
    let bt = b.adjoint();
    matmul(a, &bt)
}

/// Row-major `C (m×n) = A (m×k) · B (k×n)` on contiguous slices.
pub fn matmul_rowmajor(m: usize, k: usize, n: usize, a: &[C64], b: &[C64], c: &mut [C64]) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        return;
    }
    unsafe {
        gemm_raw(
            m,
            k,
            n,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[allow(clippy::too_many_arguments)]
unsafe fn gemm_raw(
    m: usize,
    k: usize,
    n: usize,
    a: *const C64,
    rsa: isize,
    csa: isize,
    b: *const C64,
    rsb: isize,
    csb: isize,
    c: *mut C64,
    rsc: isize,
    csc: isize,
) {
    // num_complex::Complex64 is repr(C) { re, im }, matching [f64; 2]
    matrixmultiply::zgemm(
        matrixmultiply::CGemmOption::Standard,
        matrixmultiply::CGemmOption::Standard,
        m,
        k,
        n,
        [1.0, 0.0],
        a as *const [f64; 2],
        rsa,
        csa,
        b as *const [f64; 2],
        rsb,
        csb,
        [0.0, 0.0],
        c as *mut [f64; 2],
        rsc,
        csc,
    );
}

/// `Tr(A B) = Σ_ij A_ij B_ji`.
pub fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    assert_eq!(a.nrows(), b.ncols());
    assert_eq!(a.ncols(), b.nrows());
    let (m, n) = (a.nrows(), a.ncols());
    let mut s = C64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..m {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    ev
}

/// Largest entrywise modulus of `A - B`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Kronecker product `A ⊗ B` (with `A` on the slow index).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zgemm_matches_nalgebra() {
        let a = CMat::from_fn(5, 3, |i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        let b = CMat::from_fn(3, 4, |i, j| C64::new((i * j) as f64, 1.0 + i as f64));
        let c = matmul(&a, &b);
        assert!(max_abs_diff(&c, &(&a * &b)) < 1e-12);
    }

    #[test]
    fn rowmajor_product() {
        let a = [C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)];
        let b = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let mut c = [C64::new(0.0, 0.0); 4];
        matmul_rowmajor(2, 2, 2, &a, &b, &mut c);
        assert_eq!(c[0], C64::new(3.0, 0.0));
        assert_eq!(c[1], C64::new(2.0, 0.0));
        assert_eq!(c[2], C64::new(1.0, 1.0));
        assert_eq!(c[3], C64::new(1.0, 0.0));
    }
}
