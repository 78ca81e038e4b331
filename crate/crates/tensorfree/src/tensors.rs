//! Multipartite matrices and their tensor trace invariants.
//!
//! A [`MultipartiteMatrix`] acts on `C^{d_1} ⊗ ⋯ ⊗ C^{d_r}`. Row and column
//! indices are mixed-radix tuples `(i_1, …, i_r)` in big-endian order: leg 1
//! varies slowest, so `index = ((i_1 d_2 + i_2) d_3 + i_3) ⋯`.
//!
//! The invariant `Tr_α̲(X_1, …, X_p)` contracts, on every leg `s`, the column
//! index of `X_k` with the row index of `X_{α_s(k)}`. With `α_s = γ_p` on all
//! legs this is `Tr(X_1 ⋯ X_p)`.

use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::pairing::{signed_to_index, Pairing};
use crate::perm::{PermTuple, Permutation};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct MultipartiteMatrix {
    dims: Vec<usize>,
    data: CMat,
}

impl MultipartiteMatrix {
    pub fn new(dims: Vec<usize>, data: CMat) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("dims {dims:?} must be a nonempty list of positive integers")));
        }
        let d: usize = dims.iter().product();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::Dimension(format!(
                "data is {}×{}, dims {dims:?} need {d}×{d}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(MultipartiteMatrix { dims, data })
    }

    /// Build from a row-major buffer of length `D²`.
    pub fn from_row_major(dims: Vec<usize>, entries: &[C64]) -> Result<Self> {
        let d: usize = dims.iter().product();
        if entries.len() != d * d {
            return Err(Error::Dimension(format!("expected {} entries, got {}", d * d, entries.len())));
        }
        Self::new(dims, CMat::from_row_slice(d, d, entries))
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        MultipartiteMatrix { dims, data: CMat::identity(d, d) }
    }

    /// `A_1 ⊗ ⋯ ⊗ A_r`, leg 1 first.
    pub fn kron(factors: &[CMat]) -> Result<Self> {
        let mut dims = Vec::with_capacity(factors.len());
        let mut acc = CMat::from_element(1, 1, ONE);
        for f in factors {
            if f.nrows() != f.ncols() {
                return Err(Error::Dimension("tensor factors must be square".into()));
            }
            dims.push(f.nrows());
            acc = linalg::kron(&acc, f);
        }
        Self::new(dims, acc)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn r(&self) -> usize {
        self.dims.len()
    }

    /// `D = ∏ d_s`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.data)
    }

    /// `D⁻¹ Tr X`.
    pub fn normalized_trace(&self) -> C64 {
        self.trace() / self.dim() as f64
    }

    pub fn adjoint(&self) -> Self {
        MultipartiteMatrix { dims: self.dims.clone(), data: self.data.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        MultipartiteMatrix { dims: self.dims.clone(), data: self.data.transpose() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(MultipartiteMatrix { dims: self.dims.clone(), data: linalg::matmul(&self.data, &other.data) })
    }

    pub fn scale(&self, c: C64) -> Self {
        MultipartiteMatrix { dims: self.dims.clone(), data: &self.data * c }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(MultipartiteMatrix { dims: self.dims.clone(), data: &self.data + &other.data })
    }

    /// `U X U*`.
    pub fn conjugate_by(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::Dimension("conjugating unitary has the wrong size".into()));
        }
        let ux = linalg::matmul(u, &self.data);
        Ok(MultipartiteMatrix { dims: self.dims.clone(), data: linalg::matmul_adjoint_right(&ux, u) })
    }

    /// `(U_1 ⊗ ⋯ ⊗ U_r) X (U_1 ⊗ ⋯ ⊗ U_r)*`, applied leg by leg in
    /// `O(D² Σ d_s)` instead of forming the `D × D` product.
    pub fn local_conjugate(&self, factors: &[CMat]) -> Result<Self> {
        if factors.len() != self.r() {
            return Err(Error::Dimension(format!("{} factors for {} legs", factors.len(), self.r())));
        }
        for (f, &d) in factors.iter().zip(&self.dims) {
            if f.nrows() != d || f.ncols() != d {
                return Err(Error::Dimension("local factor does not match its leg".into()));
            }
        }
        let r = self.r();
        // storage is the row-major tensor [c_1..c_r, r_1..r_r]
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&self.dims);
        let mut data = self.data.as_slice().to_vec();
        for (s, u) in factors.iter().enumerate() {
            data = apply_on_axis(&data, &dims, r + s, u, false);
            data = apply_on_axis(&data, &dims, s, u, true);
        }
        let d = self.dim();
        Ok(MultipartiteMatrix { dims: self.dims.clone(), data: CMat::from_vec(d, d, data) })
    }

    /// `max |X - X*|`.
    pub fn hermitian_defect(&self) -> f64 {
        linalg::max_abs_diff(&self.data, &self.data.adjoint())
    }

    pub(crate) fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!("dims {:?} and {:?} differ", self.dims, other.dims)));
        }
        Ok(())
    }

    /// Transpose the legs with `t_s = -1`.
    pub fn partial_transpose(&self, t: &[i8]) -> Result<Self> {
        if t.len() != self.r() {
            return Err(Error::Dimension(format!("{} signs for {} legs", t.len(), self.r())));
        }
        if t.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::Invalid("partial transpose signs must be ±1".into()));
        }
        if t.iter().all(|&x| x == 1) {
            return Ok(self.clone());
        }
        if t.iter().all(|&x| x == -1) {
            return Ok(self.transpose());
        }
        let d = self.dim();
        // split every index into the digits on transposed legs and the rest
        let strides = strides(&self.dims);
        let mut hi = vec![0usize; d];
        let mut lo = vec![0usize; d];
        for idx in 0..d {
            for (s, (&st, &ds)) in strides.iter().zip(&self.dims).enumerate() {
                let digit = (idx / st) % ds * st;
                if t[s] < 0 {
                    hi[idx] += digit;
                } else {
                    lo[idx] += digit;
                }
            }
        }
        let out = CMat::from_fn(d, d, |i, j| self.data[(lo[i] + hi[j], lo[j] + hi[i])]);
        Ok(MultipartiteMatrix { dims: self.dims.clone(), data: out })
    }

    /// `Tr` over the legs not in `keep` (0-based, any order; the result keeps
    /// the original leg order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Invalid("partial trace must keep at least one leg".into()));
        }
        let r = self.r();
        let mut kept = vec![false; r];
        for &s in keep {
            if s >= r {
                return Err(Error::Dimension(format!("leg {s} out of range for r = {r}")));
            }
            kept[s] = true;
        }
        let strides = strides(&self.dims);
        let keep_legs: Vec<usize> = (0..r).filter(|&s| kept[s]).collect();
        let trace_legs: Vec<usize> = (0..r).filter(|&s| !kept[s]).collect();
        let offsets = |legs: &[usize]| -> Vec<usize> {
            let n: usize = legs.iter().map(|&s| self.dims[s]).product();
            let mut out = vec![0usize; n];
            for (idx, o) in out.iter_mut().enumerate() {
                let mut rem = idx;
                for &s in legs.iter().rev() {
                    *o += (rem % self.dims[s]) * strides[s];
                    rem /= self.dims[s];
                }
            }
            out
        };
        let ko = offsets(&keep_legs);
        let to = offsets(&trace_legs);
        let n = ko.len();
        let out = CMat::from_fn(n, n, |i, j| to.iter().map(|&t| self.data[(ko[i] + t, ko[j] + t)]).sum());
        let dims = keep_legs.iter().map(|&s| self.dims[s]).collect();
        Ok(MultipartiteMatrix { dims, data: out })
    }
}

/// `T'[…, i', …] = Σ_i M[i', i] T[…, i, …]` on one axis of a row-major
/// tensor (with `conj(M)` when `conj` is set).
fn apply_on_axis(t: &[C64], dims: &[usize], axis: usize, m: &CMat, conj: bool) -> Vec<C64> {
    let n = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    // row-major copy of M (or its conjugate)
    let mut mrow = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            mrow.push(if conj { v.conj() } else { v });
        }
    }
    let mut out = vec![ZERO; t.len()];
    for o in 0..outer {
        let base = o * n * inner;
        linalg::matmul_rowmajor(n, n, inner, &mrow, &t[base..base + n * inner], &mut out[base..base + n * inner]);
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = vec![1usize; dims.len()];
    for s in (0..dims.len().saturating_sub(1)).rev() {
        st[s] = st[s + 1] * dims[s + 1];
    }
    st
}

// ---------------------------------------------------------------------------
// contraction engine

/// A dense tensor in row-major order with one label per axis. Input
/// matrices are borrowed, intermediates owned.
#[derive(Clone, Debug)]
struct Tensor<'a> {
    labels: Vec<usize>,
    dims: Vec<usize>,
    data: Cow<'a, [C64]>,
}

impl<'a> Tensor<'a> {
    fn size(&self) -> usize {
        self.dims.iter().product()
    }

    /// Reorder axes so that `labels` comes out in the given order.
    fn permuted(&self, order: &[usize]) -> Tensor<'_> {
        if self.labels == order {
            return Tensor { labels: self.labels.clone(), dims: self.dims.clone(), data: Cow::Borrowed(&self.data) };
        }
        let mut data = vec![ZERO; self.size()];
        let dims = self.visit_permuted(order, |i, z| data[i] = z);
        Tensor { labels: order.to_vec(), dims, data: Cow::Owned(data) }
    }

    /// Call `f(i, x)` for every entry, `i` being its offset in the layout
    /// that lists `order` first to last. Returns the permuted dims.
    fn visit_permuted(&self, order: &[usize], mut f: impl FnMut(usize, C64)) -> Vec<usize> {
        let axes: Vec<usize> = order
            .iter()
            .map(|l| self.labels.iter().position(|x| x == l).expect("label present"))
            .collect();
        let st = strides(&self.dims);
        let new_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let nd = new_dims.len();
        if nd == 0 {
            f(0, self.data[0]);
            return new_dims;
        }
        let src_st: Vec<usize> = axes.iter().map(|&a| st[a]).collect();
        let dst_st = strides(&new_dims);
        // the source-contiguous axis `q` and the destination-contiguous axis
        // `j` are walked in square tiles (or as runs when they coincide);
        // every other axis by odometer
        let q = axes.iter().position(|&a| a == nd - 1).expect("last axis present");
        let j = nd - 1;
        let others: Vec<usize> = (0..nd).filter(|&a| a != q && a != j).collect();
        let (dq, dj) = (new_dims[q], new_dims[j]);
        const TILE: usize = 32;
        let mut idx = vec![0usize; others.len()];
        let (mut src_off, mut dst_off) = (0usize, 0usize);
        loop {
            if q == j {
                for (i, &z) in self.data[src_off..src_off + dj].iter().enumerate() {
                    f(dst_off + i, z);
                }
            } else {
                for q0 in (0..dq).step_by(TILE) {
                    for j0 in (0..dj).step_by(TILE) {
                        for qi in q0..(q0 + TILE).min(dq) {
                            for ji in j0..(j0 + TILE).min(dj) {
                                f(dst_off + qi * dst_st[q] + ji, self.data[src_off + qi * src_st[q] + ji * src_st[j]]);
                            }
                        }
                    }
                }
            }
            let mut a = others.len();
            let mut done = true;
            while a > 0 {
                a -= 1;
                let ax = others[a];
                idx[a] += 1;
                src_off += src_st[ax];
                dst_off += dst_st[ax];
                if idx[a] < new_dims[ax] {
                    done = false;
                    break;
                }
                src_off -= src_st[ax] * new_dims[ax];
                dst_off -= dst_st[ax] * new_dims[ax];
                idx[a] = 0;
            }
            if done {
                return new_dims;
            }
        }
    }

    /// Contract every label that occurs twice on this tensor.
    fn self_trace(self) -> Tensor<'a> {
        let mut repeated = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            if self.labels[i + 1..].contains(l) && !repeated.contains(l) {
                repeated.push(*l);
            }
        }
        if repeated.is_empty() {
            return self;
        }
        let st = strides(&self.dims);
        let free: Vec<usize> = (0..self.labels.len()).filter(|&a| !repeated.contains(&self.labels[a])).collect();
        let mut pair_stride = Vec::new();
        let mut pair_dim = Vec::new();
        for l in &repeated {
            let axes: Vec<usize> = (0..self.labels.len()).filter(|&a| self.labels[a] == *l).collect();
            assert_eq!(axes.len(), 2, "a label may occur at most twice");
            assert_eq!(self.dims[axes[0]], self.dims[axes[1]], "traced axes differ in size");
            pair_stride.push(st[axes[0]] + st[axes[1]]);
            pair_dim.push(self.dims[axes[0]]);
        }
        let free_dims: Vec<usize> = free.iter().map(|&a| self.dims[a]).collect();
        let free_st: Vec<usize> = free.iter().map(|&a| st[a]).collect();
        let diag_offsets = odometer_offsets(&pair_dim, &pair_stride);
        let free_offsets = odometer_offsets(&free_dims, &free_st);
        let data = free_offsets
            .iter()
            .map(|&f| diag_offsets.iter().map(|&g| self.data[f + g]).sum())
            .collect();
        Tensor { labels: free.iter().map(|&a| self.labels[a]).collect(), dims: free_dims, data: Cow::Owned(data) }
    }
}

fn odometer_offsets(dims: &[usize], st: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (&d, &s) in dims.iter().zip(st) {
        let mut next = Vec::with_capacity(out.len() * d);
        for &o in &out {
            for i in 0..d {
                next.push(o + i * s);
            }
        }
        out = next;
    }
    out
}

fn contract_pair<'a>(a: &Tensor<'_>, b: &Tensor<'_>) -> Tensor<'a> {
    let shared: Vec<usize> = a.labels.iter().copied().filter(|l| b.labels.contains(l)).collect();
    let free_a: Vec<usize> = a.labels.iter().copied().filter(|l| !shared.contains(l)).collect();
    let free_b: Vec<usize> = b.labels.iter().copied().filter(|l| !shared.contains(l)).collect();
    let dim_of = |t: &Tensor<'_>, l: usize| t.dims[t.labels.iter().position(|&x| x == l).unwrap()];
    let m: usize = free_a.iter().map(|&l| dim_of(a, l)).product();
    let k: usize = shared.iter().map(|&l| dim_of(a, l)).product();
    let n: usize = free_b.iter().map(|&l| dim_of(b, l)).product();
    let mut order_a = free_a.clone();
    order_a.extend(&shared);
    let mut order_b = shared.clone();
    order_b.extend(&free_b);
    let mut data = vec![ZERO; m * n];
    if free_a.is_empty() && free_b.is_empty() {
        // full contraction: a dot product, with b read in a's layout
        let mut acc = ZERO;
        b.visit_permuted(&a.labels, |i, z| acc += a.data[i] * z);
        data[0] = acc;
    } else {
        let pa = a.permuted(&order_a);
        let pb = b.permuted(&order_b);
        linalg::matmul_rowmajor(m, k, n, &pa.data, &pb.data, &mut data);
    }
    let mut labels = free_a.clone();
    labels.extend(&free_b);
    let mut dims: Vec<usize> = free_a.iter().map(|&l| dim_of(a, l)).collect();
    dims.extend(free_b.iter().map(|&l| dim_of(b, l)));
    Tensor { labels, dims, data: Cow::Owned(data) }
}

/// Full contraction of a closed network (every label occurs exactly twice).
fn contract_network(tensors: Vec<Tensor>) -> C64 {
    let mut scalar = ONE;
    let mut live: Vec<Tensor> = Vec::new();
    for t in tensors {
        let t = t.self_trace();
        if t.labels.is_empty() {
            scalar *= t.data[0];
        } else {
            live.push(t);
        }
    }
    while !live.is_empty() {
        let mut best: Option<(usize, usize, usize, usize)> = None;
        for i in 0..live.len() {
            for j in i + 1..live.len() {
                let (a, b) = (&live[i], &live[j]);
                if !a.labels.iter().any(|l| b.labels.contains(l)) {
                    continue;
                }
                let mut cost = 1usize;
                let mut out = 1usize;
                for (l, &d) in a.labels.iter().zip(&a.dims) {
                    cost = cost.saturating_mul(d);
                    if !b.labels.contains(l) {
                        out = out.saturating_mul(d);
                    }
                }
                for (l, &d) in b.labels.iter().zip(&b.dims) {
                    if !a.labels.contains(l) {
                        cost = cost.saturating_mul(d);
                        out = out.saturating_mul(d);
                    }
                }
                let cand = (cost, out, i, j);
                if best.is_none_or(|b| (cand.0, cand.1) < (b.0, b.1)) {
                    best = Some(cand);
                }
            }
        }
        let (_, _, i, j) = best.expect("every open label is shared with another tensor");
        let b = live.swap_remove(j);
        let a = live.swap_remove(i);
        let c = contract_pair(&a, &b).self_trace();
        if c.labels.is_empty() {
            scalar *= c.data[0];
        } else {
            live.push(c);
        }
    }
    scalar
}

/// View a matrix as a tensor with axes `[col legs…, row legs…]` (nalgebra
/// storage is column-major, so this needs no reordering).
fn matrix_tensor<'a>(x: &'a MultipartiteMatrix, row_labels: &[usize], col_labels: &[usize]) -> Tensor<'a> {
    let mut labels = col_labels.to_vec();
    labels.extend_from_slice(row_labels);
    let mut dims = x.dims.clone();
    dims.extend_from_slice(&x.dims);
    Tensor { labels, dims, data: Cow::Borrowed(x.data.as_slice()) }
}

fn check_inputs(p: usize, r: usize, xs: &[&MultipartiteMatrix]) -> Result<()> {
    if xs.len() != p {
        return Err(Error::Dimension(format!("{} matrices for an invariant of order {p}", xs.len())));
    }
    let dims = xs[0].dims();
    if dims.len() != r {
        return Err(Error::Dimension(format!("tuple has {r} legs, matrices have {}", dims.len())));
    }
    if xs.iter().any(|x| x.dims() != dims) {
        return Err(Error::Dimension("matrices do not share dims".into()));
    }
    Ok(())
}

/// `Tr_α̲(X_1, …, X_p)`.
pub fn trace_invariant(alpha: &PermTuple, xs: &[&MultipartiteMatrix]) -> Result<C64> {
    let (p, r) = (alpha.p(), alpha.r());
    if p == 0 {
        return Ok(ONE);
    }
    check_inputs(p, r, xs)?;
    // label of the row index of X_k on leg s
    let label = |k: usize, s: usize| k * r + s;
    let tensors = (0..p)
        .map(|k| {
            let rows: Vec<usize> = (0..r).map(|s| label(k, s)).collect();
            let cols: Vec<usize> = (0..r).map(|s| label(alpha.get(s).apply(k), s)).collect();
            matrix_tensor(xs[k], &rows, &cols)
        })
        .collect();
    Ok(contract_network(tensors))
}

/// `tr_α̲ = Tr_α̲ / ∏ d_s^{#α_s}`.
pub fn normalized_trace_invariant(alpha: &PermTuple, xs: &[&MultipartiteMatrix]) -> Result<C64> {
    let t = trace_invariant(alpha, xs)?;
    Ok(t / invariant_normalization(alpha, xs.first().map(|x| x.dims()).unwrap_or(&[])))
}

pub fn invariant_normalization(alpha: &PermTuple, dims: &[usize]) -> f64 {
    alpha.perms().iter().zip(dims).map(|(a, &d)| (d as f64).powi(a.num_cycles() as i32)).product()
}

/// `Tr_{π̲∨δ}(X_1, …, X_p)`: on leg `s` the row of `X_k` sits at the point
/// `k` and its column at `-k`; paired points share an index.
pub fn orthogonal_trace_invariant(pis: &[Pairing], xs: &[&MultipartiteMatrix]) -> Result<C64> {
    let r = pis.len();
    if r == 0 {
        return Err(Error::Dimension("need one pairing per leg".into()));
    }
    let p = pis[0].p();
    if pis.iter().any(|q| q.p() != p) {
        return Err(Error::Dimension("pairings of different order".into()));
    }
    if p == 0 {
        return Ok(ONE);
    }
    check_inputs(p, r, xs)?;
    let label = |s: usize, point: usize| {
        let q = pis[s].partner(point);
        2 * p * s + point.min(q)
    };
    let tensors = (0..p)
        .map(|k| {
            let kk = k as i64 + 1;
            let rows: Vec<usize> = (0..r).map(|s| label(s, signed_to_index(p, kk))).collect();
            let cols: Vec<usize> = (0..r).map(|s| label(s, signed_to_index(p, -kk))).collect();
            matrix_tensor(xs[k], &rows, &cols)
        })
        .collect();
    Ok(contract_network(tensors))
}

/// `tr_{π̲∨δ} = Tr_{π̲∨δ} / ∏ d_s^{#(π_s∨δ)}`.
pub fn normalized_orthogonal_trace_invariant(pis: &[Pairing], xs: &[&MultipartiteMatrix]) -> Result<C64> {
    let t = orthogonal_trace_invariant(pis, xs)?;
    let dims = xs.first().map(|x| x.dims()).unwrap_or(&[]);
    let delta = crate::pairing::delta(pis[0].p());
    let norm: f64 = pis
        .iter()
        .zip(dims)
        .map(|(q, &d)| (d as f64).powi(crate::pairing::join_block_count(q, &delta).unwrap() as i32))
        .product();
    Ok(t / norm)
}

/// `Tr_σ(X_1, …, X_p) = ∏_{(c_1 ⋯ c_l) ∈ σ} Tr(X_{c_1} ⋯ X_{c_l})` on `M_D`.
pub fn flat_trace_invariant(sigma: &Permutation, xs: &[&CMat]) -> Result<C64> {
    if xs.len() != sigma.p() {
        return Err(Error::Dimension("one matrix per point required".into()));
    }
    let mut total = ONE;
    for c in sigma.cycles() {
        if c.len() == 1 {
            total *= linalg::trace(xs[c[0]]);
            continue;
        }
        let mut acc = xs[c[0]].clone();
        for &k in &c[1..c.len() - 1] {
            acc = linalg::matmul(&acc, xs[k]);
        }
        total *= linalg::trace_of_product(&acc, xs[c[c.len() - 1]]);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// memoised evaluation over families of matrices

/// Canonical form of `(α̲, w)` under `(α̲, w) ~ (σ⁻¹α̲σ, w∘σ)`.
fn canonical(alpha: &PermTuple, word: &[usize]) -> BlockKey {
    let p = alpha.p();
    let key = |t: &PermTuple, w: &[usize]| -> (Vec<usize>, Vec<Vec<usize>>) {
        (w.to_vec(), t.perms().iter().map(|a| a.images().to_vec()).collect())
    };
    if p > 6 {
        let (w, a) = key(alpha, word);
        return (a, w);
    }
    let mut best: Option<(Vec<usize>, Vec<Vec<usize>>)> = None;
    for sigma in Permutation::all(p) {
        // σ⁻¹ α σ with the word read through σ
        let t = alpha.conjugate_by(&sigma.inverse());
        let w: Vec<usize> = (0..p).map(|k| word[sigma.apply(k)]).collect();
        let cand = key(&t, &w);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    let (w, a) = best.expect("S_p is nonempty");
    (a, w)
}

/// Evaluates `Tr_α̲(X_{w(1)}, …, X_{w(p)})` for a fixed family `X_0, X_1, …`,
/// splitting reducible tuples into irreducible blocks and caching blocks up
/// to simultaneous relabelling.
pub struct InvariantCache<'a> {
    family: Vec<&'a MultipartiteMatrix>,
    hermitian: bool,
    memo: Mutex<HashMap<BlockKey, C64>>,
}

/// A block tuple up to relabelling (cycle images per leg) and its word.
type BlockKey = (Vec<Vec<usize>>, Vec<usize>);

impl<'a> InvariantCache<'a> {
    /// Set `hermitian` when every member is self-adjoint; then
    /// `Tr_{α̲⁻¹} = conj Tr_α̲` is used as an extra symmetry.
    pub fn new(family: Vec<&'a MultipartiteMatrix>, hermitian: bool) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::Invalid("empty matrix family".into()));
        }
        if family.iter().any(|x| x.dims() != family[0].dims()) {
            return Err(Error::Dimension("family members do not share dims".into()));
        }
        Ok(InvariantCache { family, hermitian, memo: Mutex::new(HashMap::new()) })
    }

    pub fn dims(&self) -> &[usize] {
        self.family[0].dims()
    }

    pub fn evaluations(&self) -> usize {
        self.memo.lock().expect("cache lock").len()
    }

    pub fn trace(&self, alpha: &PermTuple, word: &[usize]) -> Result<C64> {
        if word.len() != alpha.p() {
            return Err(Error::Dimension("word length differs from p".into()));
        }
        if let Some(&w) = word.iter().find(|&&w| w >= self.family.len()) {
            return Err(Error::Invalid(format!("word symbol {w} outside the family")));
        }
        if alpha.r() != self.dims().len() {
            return Err(Error::Dimension("tuple arity differs from the number of legs".into()));
        }
        let mut total = ONE;
        for block in alpha.join_partition().blocks() {
            let sub = alpha.restrict(block);
            let w: Vec<usize> = block.iter().map(|&k| word[k]).collect();
            total *= self.block(&sub, &w)?;
        }
        Ok(total)
    }

    pub fn normalized(&self, alpha: &PermTuple, word: &[usize]) -> Result<C64> {
        Ok(self.trace(alpha, word)? / invariant_normalization(alpha, self.dims()))
    }

    fn block(&self, alpha: &PermTuple, word: &[usize]) -> Result<C64> {
        let key = canonical(alpha, word);
        if let Some(v) = self.memo.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        if self.hermitian {
            let inv = canonical(&alpha.inverse(), word);
            if let Some(v) = self.memo.lock().expect("cache lock").get(&inv) {
                return Ok(v.conj());
            }
        }
        let xs: Vec<&MultipartiteMatrix> = word.iter().map(|&w| self.family[w]).collect();
        let v = trace_invariant(alpha, &xs)?;
        self.memo.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// axioms

#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub instance: String,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub tolerance: f64,
    pub checks: Vec<AxiomCheck>,
    pub max_rel_error: f64,
}

impl AxiomReport {
    pub fn violations(&self) -> Vec<&AxiomCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn random_perm(p: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut img: Vec<usize> = (0..p).collect();
    for i in (1..p).rev() {
        let j = rng.random_range(0..=i);
        img.swap(i, j);
    }
    Permutation::from_images(img).expect("shuffle is a bijection")
}

fn random_tuple(p: usize, r: usize, rng: &mut ChaCha8Rng) -> PermTuple {
    PermTuple::new((0..r).map(|_| random_perm(p, rng)).collect()).expect("same order")
}

/// Check the axioms of an `r`-partite tensor probability space on the matrix
/// algebra instance `φ_α̲ = tr_α̲`, using the supplied matrices as test
/// inputs. `samples` random tuples are drawn per axiom (orders `p ≤ 5`).
pub fn verify_tensor_space_axioms(
    xs: &[MultipartiteMatrix],
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<AxiomReport> {
    if xs.len() < 5 {
        return Err(Error::Invalid("need at least five test matrices".into()));
    }
    let dims = xs[0].dims().to_vec();
    if xs.iter().any(|x| x.dims() != dims.as_slice()) {
        return Err(Error::Dimension("test matrices do not share dims".into()));
    }
    let r = dims.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut push = |axiom: &str, instance: String, lhs: C64, rhs: C64| {
        let e = rel_err(lhs, rhs);
        checks.push(AxiomCheck {
            axiom: axiom.into(),
            instance,
            lhs_re: lhs.re,
            lhs_im: lhs.im,
            rhs_re: rhs.re,
            rhs_im: rhs.im,
            rel_error: e,
            pass: e <= tolerance,
        });
    };
    let pick = |rng: &mut ChaCha8Rng, p: usize| -> Vec<&MultipartiteMatrix> {
        (0..p).map(|_| &xs[rng.random_range(0..xs.len())]).collect()
    };

    for _ in 0..samples {
        // consistency: a constant tuple is the flat invariant on M_D
        let p = rng.random_range(1..=5);
        let sigma = random_perm(p, &mut rng);
        let m = pick(&mut rng, p);
        let lhs = normalized_trace_invariant(&PermTuple::constant(&sigma, r), &m)?;
        let flat: Vec<&CMat> = m.iter().map(|x| x.data()).collect();
        let rhs = flat_trace_invariant(&sigma, &flat)? / (xs[0].dim() as f64).powi(sigma.num_cycles() as i32);
        push("consistency", format!("σ = {sigma}"), lhs, rhs);

        // permutation invariance
        let p = rng.random_range(1..=5);
        let alpha = random_tuple(p, r, &mut rng);
        let sigma = random_perm(p, &mut rng);
        let m = pick(&mut rng, p);
        let permuted: Vec<&MultipartiteMatrix> = (0..p).map(|k| m[sigma.apply(k)]).collect();
        let lhs = normalized_trace_invariant(&alpha, &permuted)?;
        let rhs = normalized_trace_invariant(&alpha.conjugate_by(&sigma), &m)?;
        push("permutation invariance", format!("α̲ = {alpha}, σ = {sigma}"), lhs, rhs);

        // multiplicativity over disjoint products
        let (p1, p2) = (rng.random_range(1..=3), rng.random_range(1..=2));
        let a = random_tuple(p1, r, &mut rng);
        let b = random_tuple(p2, r, &mut rng);
        let m1 = pick(&mut rng, p1);
        let m2 = pick(&mut rng, p2);
        let mut both = m1.clone();
        both.extend(&m2);
        let lhs = normalized_trace_invariant(&a.disjoint_union(&b), &both)?;
        let rhs = normalized_trace_invariant(&a, &m1)? * normalized_trace_invariant(&b, &m2)?;
        push("multiplicativity", format!("α̲ = {a}, β̲ = {b}"), lhs, rhs);

        // unitality: inserting the identity at a random slot
        let p = rng.random_range(2..=5);
        let alpha = random_tuple(p, r, &mut rng);
        let j = rng.random_range(0..p);
        let mut m = pick(&mut rng, p);
        let id = MultipartiteMatrix::identity(dims.clone());
        m[j] = &id;
        let lhs = normalized_trace_invariant(&alpha, &m)?;
        let mut rest = m.clone();
        rest.remove(j);
        let rhs = normalized_trace_invariant(&alpha.erase(j), &rest)?;
        push("unitality", format!("α̲ = {alpha}, identity at {}", j + 1), lhs, rhs);
    }

    if r == 2 {
        let id = MultipartiteMatrix::identity(dims.clone());
        // the six-point example with an identity in slot 2
        let alpha = PermTuple::parse("(1 2 5 3)(4 6);(1)(3 4 5)(2 6)", Some(6))?;
        let erased = PermTuple::parse("(1 4 2)(3 5);(1)(2 3 4)(5)", Some(5))?;
        let m: Vec<&MultipartiteMatrix> = vec![&xs[0], &id, &xs[1], &xs[2], &xs[3], &xs[4]];
        let rest: Vec<&MultipartiteMatrix> = vec![&xs[0], &xs[1], &xs[2], &xs[3], &xs[4]];
        let lhs = normalized_trace_invariant(&alpha, &m)?;
        let rhs = normalized_trace_invariant(&erased, &rest)?;
        push("unitality", format!("{alpha} with x2 = 1 vs {erased}"), lhs, rhs);

        // substitution: points 2 and 4 are adjacent on both legs
        let alpha = PermTuple::parse("(1 4 2 3);(1 3 4 2)", Some(4))?;
        let merged = PermTuple::parse("(1 3 2);(1 2 3)", Some(3))?;
        let m: Vec<&MultipartiteMatrix> = vec![&xs[0], &xs[1], &xs[2], &xs[3]];
        let prod = xs[3].mul(&xs[1])?;
        let sub: Vec<&MultipartiteMatrix> = vec![&xs[0], &xs[2], &prod];
        let lhs = normalized_trace_invariant(&alpha, &m)?;
        let rhs = normalized_trace_invariant(&merged, &sub)?
            * invariant_normalization(&merged, &dims)
            / invariant_normalization(&alpha, &dims);
        push("substitution", format!("{alpha} vs {merged} with x4·x2 in slot 3"), lhs, rhs);
    }

    // substitution on random instances: merge j into i whenever α_s(i) = j on every leg
    for _ in 0..samples {
        let p = rng.random_range(2..=5);
        let mut alpha = random_tuple(p, r, &mut rng);
        let i = rng.random_range(0..p);
        let mut j = rng.random_range(0..p - 1);
        if j >= i {
            j += 1;
        }
        // force α_s(i) = j on each leg by a transposition of images
        let mut perms = alpha.perms().to_vec();
        for a in perms.iter_mut() {
            let mut img = a.images().to_vec();
            let pre = img.iter().position(|&v| v == j).expect("bijection");
            img.swap(i, pre);
            *a = Permutation::from_images(img)?;
        }
        alpha = PermTuple::new(perms)?;
        let m = pick(&mut rng, p);
        let lhs = trace_invariant(&alpha, &m)?;
        let (merged, sub) = substitute(&alpha, &m, i, j)?;
        let refs: Vec<&MultipartiteMatrix> = sub.iter().collect();
        let rhs = trace_invariant(&merged, &refs)?;
        push("substitution", format!("α̲ = {alpha}, merge {} into {}", j + 1, i + 1), lhs, rhs);
    }

    let max_rel_error = checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    Ok(AxiomReport { tolerance, checks, max_rel_error })
}

/// When `α_s(i) = j` on every leg, replace `X_i` by `X_i X_j`, drop slot `j`
/// and send `i` to `α_s(j)`. The unnormalized invariant is unchanged.
pub fn substitute(
    alpha: &PermTuple,
    xs: &[&MultipartiteMatrix],
    i: usize,
    j: usize,
) -> Result<(PermTuple, Vec<MultipartiteMatrix>)> {
    let p = alpha.p();
    if i == j || i >= p || j >= p {
        return Err(Error::Invalid("substitution needs two distinct points".into()));
    }
    if alpha.perms().iter().any(|a| a.apply(i) != j) {
        return Err(Error::Invalid(format!("α_s({}) ≠ {} on some leg", i + 1, j + 1)));
    }
    let perms = alpha
        .perms()
        .iter()
        .map(|a| {
            let mut img = a.images().to_vec();
            img[i] = a.apply(j);
            img[j] = j;
            Permutation::from_images(img).map(|q| q.erase(j))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut mats: Vec<MultipartiteMatrix> = Vec::with_capacity(p - 1);
    for (k, x) in xs.iter().enumerate() {
        if k == i {
            mats.push(x.mul(xs[j])?);
        } else if k != j {
            mats.push((*x).clone());
        }
    }
    Ok((PermTuple::new(perms)?, mats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(dims: Vec<usize>, seed: u64) -> MultipartiteMatrix {
        let d: usize = dims.iter().product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = CMat::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        MultipartiteMatrix::new(dims, data).unwrap()
    }

    #[test]
    fn full_cycle_is_trace_of_product() {
        let xs: Vec<MultipartiteMatrix> = (0..3).map(|s| mat(vec![2, 3], s)).collect();
        let refs: Vec<&MultipartiteMatrix> = xs.iter().collect();
        let g = Permutation::full_cycle(3);
        let t = trace_invariant(&PermTuple::constant(&g, 2), &refs).unwrap();
        let direct = linalg::trace(&linalg::matmul(&linalg::matmul(xs[0].data(), xs[1].data()), xs[2].data()));
        assert!((t - direct).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involutive() {
        let x = mat(vec![2, 3, 2], 4);
        let y = x.partial_transpose(&[1, -1, -1]).unwrap().partial_transpose(&[1, -1, -1]).unwrap();
        assert!(linalg::max_abs_diff(x.data(), y.data()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_identity() {
        let id = MultipartiteMatrix::identity(vec![2, 3]);
        let t = id.partial_trace(&[0]).unwrap();
        assert_eq!(t.dims(), &[2]);
        assert!((t.get(0, 0) - C64::new(3.0, 0.0)).norm() < 1e-15);
    }
}
