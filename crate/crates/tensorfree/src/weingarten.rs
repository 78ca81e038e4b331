//! Unitary and orthogonal Weingarten functions at finite dimension, their
//! large-`d` asymptotics, and the closed-form twirls over two copies.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::pairing::{enumerate_pairings, join_block_count, pairing_mobius, Pairing};
use crate::perm::{mobius, Permutation};
use crate::tensors::MultipartiteMatrix;

/// Largest `p` accepted by [`unitary_wg`] (a `p! × p!` Gram matrix).
pub const MAX_UNITARY_P: usize = 7;
/// Largest `p` accepted by [`orthogonal_wg`] (a `(2p-1)!!`-square Gram matrix).
pub const MAX_ORTHOGONAL_P: usize = 5;
/// Largest `p` for the exact rational solver.
pub const MAX_EXACT_P: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WgKind {
    Unitary,
    Orthogonal,
}

/// `Wg^{(U)}_d(σ)` for all `σ ∈ S_p`, indexed by [`Permutation::rank`].
#[derive(Clone, Debug)]
pub struct UnitaryWgTable {
    pub p: usize,
    pub d: usize,
    pub perms: Vec<Permutation>,
    pub values: Vec<f64>,
}

impl UnitaryWgTable {
    pub fn get(&self, sigma: &Permutation) -> f64 {
        self.values[sigma.rank()]
    }

    /// Values grouped by cycle type.
    pub fn by_class(&self) -> Vec<(Vec<usize>, f64)> {
        let mut seen: Vec<(Vec<usize>, f64)> = Vec::new();
        for (s, &v) in self.perms.iter().zip(&self.values) {
            let t = s.cycle_type();
            if !seen.iter().any(|(u, _)| *u == t) {
                seen.push((t, v));
            }
        }
        seen
    }

    /// `max_τ |Σ_σ Wg(σ) d^{#(σ⁻¹τ)} - [τ = id]|`.
    pub fn convolution_residual(&self) -> f64 {
        let d = self.d as f64;
        self.perms
            .iter()
            .map(|tau| {
                let s: f64 = self
                    .perms
                    .iter()
                    .zip(&self.values)
                    .map(|(sigma, &w)| w * d.powi(sigma.inverse().compose(tau).num_cycles() as i32))
                    .sum();
                let target = if tau.is_identity() { 1.0 } else { 0.0 };
                (s - target).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `Wg^{(O)}_d(π, ρ)` for all pairs of pairings of `[±p]`.
#[derive(Clone, Debug)]
pub struct OrthogonalWgTable {
    pub p: usize,
    pub d: usize,
    pub pairings: Vec<Pairing>,
    pub values: DMatrix<f64>,
    index: HashMap<Pairing, usize>,
}

impl OrthogonalWgTable {
    pub fn index_of(&self, pi: &Pairing) -> usize {
        self.index[pi]
    }

    pub fn get(&self, pi: &Pairing, rho: &Pairing) -> f64 {
        self.values[(self.index[pi], self.index[rho])]
    }

    /// `max |Ψ·Wg - I|` entrywise.
    pub fn inverse_residual(&self) -> f64 {
        let psi = orthogonal_gram(&self.pairings, self.d as f64);
        let prod = psi * &self.values;
        let n = self.pairings.len();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let t = if i == j { 1.0 } else { 0.0 };
                m = m.max((prod[(i, j)] - t).abs());
            }
        }
        m
    }
}

fn check_dims(p: usize, d: usize, max_p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::Invalid("p must be at least 1".into()));
    }
    if p > max_p {
        return Err(Error::Resource(format!("p = {p} exceeds the supported maximum {max_p}")));
    }
    if d < p {
        return Err(Error::Refused(format!(
            "d = {d} < p = {p}: the Gram matrix is singular and pseudo-inverses are not provided"
        )));
    }
    Ok(())
}

fn unitary_gram(perms: &[Permutation], d: f64) -> DMatrix<f64> {
    let n = perms.len();
    let inv: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
    DMatrix::from_fn(n, n, |i, j| d.powi(inv[i].compose(&perms[j]).num_cycles() as i32))
}

fn orthogonal_gram(pairings: &[Pairing], d: f64) -> DMatrix<f64> {
    let n = pairings.len();
    DMatrix::from_fn(n, n, |i, j| {
        d.powi(join_block_count(&pairings[i], &pairings[j]).expect("same order") as i32)
    })
}

/// Exact inverse of the Gram matrix `G[σ,τ] = d^{#(σ⁻¹τ)}`, row `id`.
pub fn unitary_wg(p: usize, d: usize) -> Result<UnitaryWgTable> {
    check_dims(p, d, MAX_UNITARY_P)?;
    let perms: Vec<Permutation> = Permutation::all(p).collect();
    let g = unitary_gram(&perms, d as f64);
    let n = perms.len();
    let mut e = DVector::<f64>::zeros(n);
    e[0] = 1.0; // rank 0 is the identity
    let x = g
        .clone()
        .lu()
        .solve(&e)
        .ok_or_else(|| Error::Numerical(format!("unitary Gram matrix singular at p = {p}, d = {d}")))?;
    let table = UnitaryWgTable { p, d, perms, values: x.iter().copied().collect() };
    let scale = table.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) * (d as f64).powi(p as i32);
    if table.convolution_residual() > 1e-8 * scale.max(1.0) {
        return Err(Error::Numerical(format!("unitary Weingarten solve inaccurate at p = {p}, d = {d}")));
    }
    Ok(table)
}

/// Inverse of `Ψ[π,ρ] = d^{#(π∨ρ)}`.
pub fn orthogonal_wg(p: usize, d: usize) -> Result<OrthogonalWgTable> {
    check_dims(p, d, MAX_ORTHOGONAL_P)?;
    let pairings = enumerate_pairings(p)?;
    let psi = orthogonal_gram(&pairings, d as f64);
    let values = psi
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("orthogonal Gram matrix singular at p = {p}, d = {d}")))?;
    let index = pairings.iter().cloned().enumerate().map(|(i, q)| (q, i)).collect();
    let table = OrthogonalWgTable { p, d, pairings, values, index };
    if table.inverse_residual() > 1e-8 {
        return Err(Error::Numerical(format!("orthogonal Weingarten solve inaccurate at p = {p}, d = {d}")));
    }
    Ok(table)
}

fn rational_solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<Vec<BigRational>>) -> Result<Vec<Vec<BigRational>>> {
    // Gauss-Jordan on [A | B]
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Numerical("singular rational system".into()))?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = BigRational::one() / a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        for v in b[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
            for c in 0..b[r].len() {
                let t = &f * &b[col][c];
                b[r][c] -= t;
            }
        }
    }
    Ok(b)
}

fn rational_pow(d: usize, k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(d).pow(k as u32))
}

/// Exact rational unitary Weingarten values, indexed like [`unitary_wg`].
pub fn unitary_wg_exact(p: usize, d: usize) -> Result<Vec<BigRational>> {
    check_dims(p, d, MAX_EXACT_P)?;
    let perms: Vec<Permutation> = Permutation::all(p).collect();
    let a: Vec<Vec<BigRational>> = perms
        .iter()
        .map(|s| perms.iter().map(|t| rational_pow(d, s.inverse().compose(t).num_cycles())).collect())
        .collect();
    let b: Vec<Vec<BigRational>> = (0..perms.len())
        .map(|i| vec![if i == 0 { BigRational::one() } else { BigRational::zero() }])
        .collect();
    Ok(rational_solve(a, b)?.into_iter().map(|mut r| r.remove(0)).collect())
}

/// Exact rational orthogonal Weingarten matrix, indexed by [`enumerate_pairings`].
pub fn orthogonal_wg_exact(p: usize, d: usize) -> Result<Vec<Vec<BigRational>>> {
    check_dims(p, d, MAX_EXACT_P)?;
    let pairings = enumerate_pairings(p)?;
    let n = pairings.len();
    let a: Vec<Vec<BigRational>> = pairings
        .iter()
        .map(|x| pairings.iter().map(|y| rational_pow(d, join_block_count(x, y).unwrap())).collect())
        .collect();
    let b: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    rational_solve(a, b)
}

/// One entry of an asymptotic comparison.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticEntry {
    pub key: String,
    pub scaled: f64,
    pub mobius: i64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub kind: WgKind,
    pub p: usize,
    pub d: usize,
    pub entries: Vec<AsymptoticEntry>,
    pub max_deviation: f64,
}

/// `Wg_d(σ)·d^{2p-#σ} - Möb(σ)` for every `σ`; expected `O(d⁻²)`.
pub fn unitary_asymptotic_check(t: &UnitaryWgTable) -> AsymptoticReport {
    let d = t.d as f64;
    let entries: Vec<AsymptoticEntry> = t
        .perms
        .iter()
        .zip(&t.values)
        .map(|(s, &w)| {
            let scaled = w * d.powi((2 * t.p - s.num_cycles()) as i32);
            let m = mobius(s);
            AsymptoticEntry { key: s.to_string(), scaled, mobius: m, deviation: (scaled - m as f64).abs() }
        })
        .collect();
    let max_deviation = entries.iter().map(|e| e.deviation).fold(0.0, f64::max);
    AsymptoticReport { kind: WgKind::Unitary, p: t.p, d: t.d, entries, max_deviation }
}

/// `Wg_d(π,ρ)·d^{2p-#(π∨ρ)} - Möb(π∨ρ)` for every pair; expected `O(d⁻¹)`.
pub fn orthogonal_asymptotic_check(t: &OrthogonalWgTable) -> AsymptoticReport {
    let d = t.d as f64;
    let mut entries = Vec::new();
    for (i, pi) in t.pairings.iter().enumerate() {
        for (j, rho) in t.pairings.iter().enumerate() {
            let blocks = join_block_count(pi, rho).unwrap();
            let scaled = t.values[(i, j)] * d.powi((2 * t.p - blocks) as i32);
            let m = pairing_mobius(pi, rho);
            entries.push(AsymptoticEntry {
                key: format!("{pi};{rho}"),
                scaled,
                mobius: m,
                deviation: (scaled - m as f64).abs(),
            });
        }
    }
    let max_deviation = entries.iter().map(|e| e.deviation).fold(0.0, f64::max);
    AsymptoticReport { kind: WgKind::Orthogonal, p: t.p, d: t.d, entries, max_deviation }
}

/// `∫ U_{i₁j₁}⋯U_{i_pj_p} Ū_{i'₁j'₁}⋯Ū_{i'_pj'_p} dU` by the Weingarten formula.
pub fn unitary_haar_moment(t: &UnitaryWgTable, i: &[usize], j: &[usize], ip: &[usize], jp: &[usize]) -> f64 {
    let p = t.p;
    assert!(i.len() == p && j.len() == p && ip.len() == p && jp.len() == p);
    let matches = |x: &[usize], y: &[usize], s: &Permutation| (0..p).all(|k| y[k] == x[s.apply(k)]);
    let sig: Vec<&Permutation> = t.perms.iter().filter(|s| matches(i, ip, s)).collect();
    let tau: Vec<&Permutation> = t.perms.iter().filter(|s| matches(j, jp, s)).collect();
    let mut total = 0.0;
    for s in &sig {
        for u in &tau {
            total += t.get(&u.inverse().compose(s));
        }
    }
    total
}

/// The swap `F_d = Σ E_ij ⊗ E_ji` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> MultipartiteMatrix {
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
        }
    }
    MultipartiteMatrix::new(vec![d, d], m).expect("square")
}

/// `dω_d = Σ E_ij ⊗ E_ij`, the unnormalized maximally entangled projector.
pub fn omega_operator(d: usize) -> MultipartiteMatrix {
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = C64::new(1.0, 0.0);
        }
    }
    MultipartiteMatrix::new(vec![d, d], m).expect("square")
}

fn two_copy_dim(x: &MultipartiteMatrix) -> Result<usize> {
    match x.dims() {
        [a, b] if a == b && *a >= 2 => Ok(*a),
        dims => Err(Error::Dimension(format!("twirl needs dims (d, d) with d ≥ 2, got {dims:?}"))),
    }
}

/// `E[(U⊗U) X (U⊗U)*]` for Haar unitary `U`.
pub fn twirl2_unitary(x: &MultipartiteMatrix) -> Result<MultipartiteMatrix> {
    let d = two_copy_dim(x)?;
    let df = d as f64;
    let f = swap_operator(d);
    let tr = x.trace();
    let trf = crate::linalg::trace_of_product(f.data(), x.data());
    let den = df * (df * df - 1.0);
    let a = (tr * df - trf) / den;
    let b = (trf * df - tr) / den;
    let id = CMat::identity(d * d, d * d);
    MultipartiteMatrix::new(vec![d, d], id * a + f.data() * b)
}

/// `E[(O⊗O) X (O⊗O)ᵀ]` for Haar orthogonal `O`.
pub fn twirl2_orthogonal(x: &MultipartiteMatrix) -> Result<MultipartiteMatrix> {
    let d = two_copy_dim(x)?;
    let df = d as f64;
    let f = swap_operator(d);
    let w = omega_operator(d);
    let tr = x.trace();
    let trf = crate::linalg::trace_of_product(f.data(), x.data());
    let trw = crate::linalg::trace_of_product(w.data(), x.data());
    let den = df * (df + 2.0) * (df - 1.0);
    let a = (tr * (df + 1.0) - trf - trw) / den;
    let b = (-tr + trf * (df + 1.0) - trw) / den;
    let c = (-tr - trf + trw * (df + 1.0)) / den;
    let id = CMat::identity(d * d, d * d);
    MultipartiteMatrix::new(vec![d, d], id * a + f.data() * b + w.data() * c)
}

/// Entrywise Monte Carlo estimate of a two-copy twirl.
#[derive(Clone, Debug)]
pub struct TwirlEstimate {
    pub mean: CMat,
    /// `sqrt(se_re² + se_im²)` per entry.
    pub stderr: DMatrix<f64>,
    pub trials: usize,
}

impl TwirlEstimate {
    /// Largest `|mean - exact|` in units of the entry's standard error
    /// (`floor` replaces a vanishing standard error).
    pub fn max_z(&self, exact: &CMat, floor: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..exact.ncols() {
            for i in 0..exact.nrows() {
                let dev = (self.mean[(i, j)] - exact[(i, j)]).norm();
                worst = worst.max(dev / self.stderr[(i, j)].max(floor));
            }
        }
        worst
    }
}

/// `E[(U⊗U) X (U⊗U)*]` by sampling `U` (unitary, or orthogonal with `U* = Uᵀ`).
pub fn twirl2_monte_carlo(
    x: &MultipartiteMatrix,
    kind: WgKind,
    trials: usize,
    seed: u64,
    exec: crate::exec::Exec,
) -> Result<TwirlEstimate> {
    let d = two_copy_dim(x)?;
    if trials < 2 {
        return Err(Error::Invalid("at least two trials are needed for a standard error".into()));
    }
    let draws: Vec<CMat> = exec.map(trials, |t| {
        let mut rng = crate::rmt::rng_for(seed, t as u64);
        let u = match kind {
            WgKind::Unitary => crate::rmt::haar_unitary(d, &mut rng, true),
            WgKind::Orthogonal => crate::rmt::haar_orthogonal(d, &mut rng),
        };
        let v = crate::linalg::kron(&u, &u);
        crate::linalg::matmul_adjoint_right(&crate::linalg::matmul(&v, x.data()), &v)
    });
    let n = d * d;
    let nf = trials as f64;
    let mut mean = CMat::zeros(n, n);
    for m in &draws {
        mean += m;
    }
    mean /= C64::new(nf, 0.0);
    let mut var = DMatrix::<f64>::zeros(n, n);
    for m in &draws {
        for j in 0..n {
            for i in 0..n {
                var[(i, j)] += (m[(i, j)] - mean[(i, j)]).norm_sqr();
            }
        }
    }
    let stderr = var.map(|v| (v / (nf - 1.0) / nf).sqrt());
    Ok(TwirlEstimate { mean, stderr, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_is_inverse_dimension() {
        let t = unitary_wg(1, 7).unwrap();
        assert!((t.values[0] - 1.0 / 7.0).abs() < 1e-15);
        let o = orthogonal_wg(1, 7).unwrap();
        assert!((o.values[(0, 0)] - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn refuses_small_dimension() {
        assert!(matches!(unitary_wg(3, 2), Err(Error::Refused(_))));
        assert!(matches!(orthogonal_wg(2, 1), Err(Error::Refused(_))));
    }

    #[test]
    fn exact_p2() {
        let v = unitary_wg_exact(2, 10).unwrap();
        assert_eq!(v[0], BigRational::new(1.into(), 99.into()));
        assert_eq!(v[1], BigRational::new((-1).into(), 990.into()));
    }
}
