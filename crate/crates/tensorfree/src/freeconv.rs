//! Semicircle moments, moment/free-cumulant conversion for a single
//! variable, free convolution by Haar rotation, and the bipartite tensor
//! free central limit law
//!
//! `μ∞ = (D_{√a}[μ_SC] * D_{√b}[μ_SC]) ⊞ D_{√c}[μ_SC]`,
//!
//! with `(a, b, c) = (κ_{γ₂,id₂}, κ_{id₂,γ₂}, κ_{γ₂,γ₂})`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{self, CMat};
use crate::perm::{join_all_snc, lift_partition, Partition, Permutation, CATALAN};
use crate::rmt::{self, rng_for};
use crate::stats::Estimate;
use crate::tensors::MultipartiteMatrix;

/// Largest `p` for the `NC_{1,2}(p)` enumeration.
pub const MAX_NC12_P: usize = 12;
/// Smallest leg dimension accepted by the matrix-model samplers.
pub const MIN_MODEL_DIM: usize = 8;

/// Moments `m_1, …, m_{p_max}` (`m_0 = 1` implicit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub moments: Vec<f64>,
}

impl MomentSequence {
    pub fn p_max(&self) -> usize {
        self.moments.len()
    }

    /// `m_p`, with `m_0 = 1`.
    pub fn get(&self, p: usize) -> f64 {
        if p == 0 {
            1.0
        } else {
            self.moments[p - 1]
        }
    }

    /// Moments of `t·x`.
    pub fn dilate(&self, t: f64) -> Self {
        MomentSequence { moments: self.moments.iter().enumerate().map(|(i, m)| m * t.powi(i as i32 + 1)).collect() }
    }

    /// Moments of `x + y` for classically independent `x`, `y`.
    pub fn classical_convolve(&self, other: &Self) -> Self {
        let n = self.p_max().min(other.p_max());
        let moments = (1..=n)
            .map(|p| (0..=p).map(|k| binomial(p, k) * self.get(k) * other.get(p - k)).sum())
            .collect();
        MomentSequence { moments }
    }

    /// Moments of `x + y` for freely independent `x`, `y`.
    pub fn free_convolve(&self, other: &Self) -> Self {
        let a = moments_to_free_cumulants(self);
        let b = moments_to_free_cumulants(other);
        let k: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        free_cumulants_to_moments(&k)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Moments of `λ + σ s` with `s` standard semicircular.
pub fn semicircle_moments(p_max: usize, mean: f64, variance: f64) -> Result<MomentSequence> {
    if variance < 0.0 || !variance.is_finite() {
        return Err(Error::Invalid(format!("variance {variance} must be finite and nonnegative")));
    }
    if p_max > 2 * (CATALAN.len() - 1) {
        return Err(Error::Resource(format!("p_max = {p_max} exceeds the Catalan table")));
    }
    let sigma = variance.sqrt();
    let central = |k: usize| if k % 2 == 1 { 0.0 } else { CATALAN[k / 2] as f64 * sigma.powi(k as i32) };
    let moments = (1..=p_max)
        .map(|p| (0..=p).map(|k| binomial(p, k) * mean.powi((p - k) as i32) * central(k)).sum())
        .collect();
    Ok(MomentSequence { moments })
}

/// `m_n = Σ_{s=1}^{n} κ_s Σ_{i_1+⋯+i_s = n-s} m_{i_1} ⋯ m_{i_s}`
/// (first-block decomposition of non-crossing partitions).
pub fn free_cumulants_to_moments(kappa: &[f64]) -> MomentSequence {
    let n = kappa.len();
    let mut m = vec![1.0; n + 1];
    for order in 1..=n {
        let mut total = 0.0;
        for s in 1..=order {
            total += kappa[s - 1] * composition_sum(&m[..order], s, order - s);
        }
        m[order] = total;
    }
    MomentSequence { moments: m[1..].to_vec() }
}

fn composition_sum(m: &[f64], s: usize, j: usize) -> f64 {
    // coefficient of z^j in (Σ_i m_i z^i)^s, using m_0..m_{len-1}
    let mut poly = vec![0.0; j + 1];
    poly[0] = 1.0;
    for _ in 0..s {
        let mut next = vec![0.0; j + 1];
        for (a, &pa) in poly.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for b in 0..=(j - a) {
                if b < m.len() {
                    next[a + b] += pa * m[b];
                }
            }
        }
        poly = next;
    }
    poly[j]
}

/// Inverse of [`free_cumulants_to_moments`].
pub fn moments_to_free_cumulants(m: &MomentSequence) -> Vec<f64> {
    let n = m.p_max();
    let mut kappa = vec![0.0; n];
    for order in 1..=n {
        kappa[order - 1] = 0.0;
        let partial = free_cumulants_to_moments(&kappa[..order]);
        kappa[order - 1] = m.get(order) - partial.get(order);
    }
    kappa
}

/// Non-crossing partitions of `0..p` with blocks of size 1 or 2.
pub fn nc12(p: usize) -> Result<Vec<Partition>> {
    if p > MAX_NC12_P {
        return Err(Error::Resource(format!("NC_(1,2)({p}) enumeration is capped at p = {MAX_NC12_P}")));
    }
    fn rec(lo: usize, hi: usize) -> Vec<Vec<Vec<usize>>> {
        if lo >= hi {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for mut rest in rec(lo + 1, hi) {
            rest.push(vec![lo]);
            out.push(rest);
        }
        for j in lo + 1..hi {
            let inner = rec(lo + 1, j);
            let outer = rec(j + 1, hi);
            for a in &inner {
                for b in &outer {
                    let mut blocks = a.clone();
                    blocks.extend(b.iter().cloned());
                    blocks.push(vec![lo, j]);
                    out.push(blocks);
                }
            }
        }
        out
    }
    rec(0, p).into_iter().map(|b| Partition::from_blocks(p, b)).collect()
}

/// The limit free cumulant `κ̃_p` as a polynomial in `(a, b, c)`:
/// exponent triple `(i, j, k)` ↦ number of contributing tuples.
pub fn clt_free_cumulant_polynomial(p: usize) -> Result<BTreeMap<(usize, usize, usize), u64>> {
    let mut poly = BTreeMap::new();
    if p % 2 == 1 {
        return Ok(poly);
    }
    let gamma = Permutation::full_cycle(p);
    let parts = nc12(p)?;
    let lifted: Vec<Permutation> = parts
        .iter()
        .map(|q| lift_partition(q, &gamma))
        .collect::<Result<Vec<_>>>()?;
    let partners: Vec<Vec<Option<usize>>> = parts
        .iter()
        .map(|q| {
            let mut v = vec![None; p];
            for b in q.blocks() {
                if let [x, y] = b[..] {
                    v[x] = Some(y);
                    v[y] = Some(x);
                }
            }
            v
        })
        .collect();
    for (x, a1) in parts.iter().enumerate() {
        for (y, a2) in parts.iter().enumerate() {
            // the join is a pair partition iff every point is paired by some
            // α_s and both legs agree wherever both pair it
            let pair_join = (0..p).all(|i| match (partners[x][i], partners[y][i]) {
                (None, None) => false,
                (Some(u), Some(v)) => u == v,
                _ => true,
            });
            if !pair_join {
                continue;
            }
            let join = a1.join(a2);
            if join_all_snc(&[lifted[x].clone(), lifted[y].clone()], &gamma)? != gamma {
                continue;
            }
            let (mut i, mut j, mut k) = (0, 0, 0);
            for block in join.blocks() {
                let on1 = a1.blocks().iter().any(|b| b == block);
                let on2 = a2.blocks().iter().any(|b| b == block);
                match (on1, on2) {
                    (true, false) => i += 1,
                    (false, true) => j += 1,
                    (true, true) => k += 1,
                    (false, false) => unreachable!("a pair block of the join is a block of some α_s"),
                }
            }
            *poly.entry((i, j, k)).or_insert(0) += 1;
        }
    }
    Ok(poly)
}

/// The order-2 tensor cumulants `(κ_{γ₂,id₂}, κ_{id₂,γ₂}, κ_{γ₂,γ₂})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl KappaTriple {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if [a, b, c].iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::Invalid(format!("cumulants ({a}, {b}, {c}) must be finite and nonnegative")));
        }
        Ok(KappaTriple { a, b, c })
    }
}

/// Limit free cumulants `κ̃_1, …, κ̃_{p_max}` of the bipartite CLT.
pub fn clt_limit_free_cumulants(k: KappaTriple, p_max: usize) -> Result<Vec<f64>> {
    (1..=p_max)
        .map(|p| {
            let poly = clt_free_cumulant_polynomial(p)?;
            Ok(poly
                .iter()
                .map(|(&(i, j, l), &n)| n as f64 * k.a.powi(i as i32) * k.b.powi(j as i32) * k.c.powi(l as i32))
                .sum())
        })
        .collect()
}

/// Moments of `μ∞` from the combinatorial free cumulants.
pub fn clt_limit_moments_bipartite(k: KappaTriple, p_max: usize) -> Result<MomentSequence> {
    Ok(free_cumulants_to_moments(&clt_limit_free_cumulants(k, p_max)?))
}

/// Eigenvalue samples with provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub values: Vec<f64>,
    pub meta: SpectralMeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeta {
    pub source: String,
    pub seed: u64,
    pub draws: usize,
    pub matrix_dim: usize,
}

impl SpectralSample {
    pub fn new(values: Vec<f64>, meta: SpectralMeta) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite spectral sample".into()));
        }
        Ok(SpectralSample { values, meta })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Empirical moment `n⁻¹ Σ λ^p`.
    pub fn moment(&self, p: usize) -> f64 {
        self.values.iter().map(|v| v.powi(p as i32)).sum::<f64>() / self.values.len() as f64
    }

    /// One eigenvalue per line, then `<path>.json` with the metadata.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "eigenvalue")?;
        for v in &self.values {
            writeln!(f, "{v:.17e}")?;
        }
        f.flush()?;
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        std::fs::write(side, serde_json::to_string_pretty(&self.meta).expect("metadata serializes"))?;
        Ok(())
    }
}

/// `√a (G₁⊗I) + √b (I⊗G₂) + √c G₁₂` for one trial.
pub fn mu_infinity_model(k: KappaTriple, d: usize, seed: u64, trial: u64) -> Result<MultipartiteMatrix> {
    if d < MIN_MODEL_DIM {
        return Err(Error::Refused(format!("d = {d} per leg is below the minimum {MIN_MODEL_DIM}")));
    }
    let mut rng = rng_for(seed, trial);
    let dims = [d, d];
    let g1 = rmt::embed_on_legs(&rmt::gue(d, &mut rng), &[0], &dims)?;
    let g2 = rmt::embed_on_legs(&rmt::gue(d, &mut rng), &[1], &dims)?;
    let g12 = rmt::gue(d * d, &mut rng);
    let s = |v: f64| C64::new(v.sqrt(), 0.0);
    let data = g1.data() * s(k.a) + g2.data() * s(k.b) + g12 * s(k.c);
    MultipartiteMatrix::new(dims.to_vec(), data)
}

/// Pooled eigenvalues of [`mu_infinity_model`] over `draws` trials.
pub fn sample_mu_infinity(k: KappaTriple, d: usize, draws: usize, seed: u64, exec: Exec) -> Result<SpectralSample> {
    let per: Vec<Result<Vec<f64>>> = exec.map(draws, |t| {
        let x = mu_infinity_model(k, d, seed, t as u64)?;
        Ok(linalg::hermitian_eigenvalues(x.data()))
    });
    let mut values = Vec::with_capacity(draws * d * d);
    for v in per {
        values.extend(v?);
    }
    SpectralSample::new(
        values,
        SpectralMeta {
            source: format!("mu_infinity(a={}, b={}, c={}), d={d} per leg", k.a, k.b, k.c),
            seed,
            draws,
            matrix_dim: d * d,
        },
    )
}

/// `tr X^p` for `p = 1..=p_max` (`p_max ≤ 6`) of a Hermitian matrix, using
/// `X²` and `X³` only.
pub fn normalized_power_traces(x: &CMat, p_max: usize) -> Result<Vec<f64>> {
    if p_max > 6 {
        return Err(Error::Invalid("power traces are provided up to p = 6".into()));
    }
    let n = x.nrows() as f64;
    let mut out = Vec::with_capacity(p_max);
    if p_max >= 1 {
        out.push(linalg::trace(x).re / n);
    }
    if p_max >= 2 {
        out.push(x.iter().map(|z| z.norm_sqr()).sum::<f64>() / n);
    }
    if p_max >= 3 {
        let x2 = linalg::matmul(x, x);
        out.push(linalg::trace_of_product(x, &x2).re / n);
        if p_max >= 4 {
            out.push(x2.iter().map(|z| z.norm_sqr()).sum::<f64>() / n);
        }
        if p_max >= 5 {
            let x3 = linalg::matmul(x, &x2);
            // X², X³ Hermitian: tr(X²X³) = Σ X²_ij conj(X³_ij)
            out.push(x2.iter().zip(x3.iter()).map(|(a, b)| (a * b.conj()).re).sum::<f64>() / n);
            if p_max >= 6 {
                out.push(x3.iter().map(|z| z.norm_sqr()).sum::<f64>() / n);
            }
        }
    }
    Ok(out)
}

/// Monte Carlo `E tr X^p`, `p ≤ p_max`, for the `μ∞` matrix model.
pub fn mu_infinity_moments(
    k: KappaTriple,
    d: usize,
    draws: usize,
    p_max: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<Estimate>> {
    let per: Vec<Result<Vec<f64>>> = exec.map(draws, |t| {
        let x = mu_infinity_model(k, d, seed, t as u64)?;
        normalized_power_traces(x.data(), p_max)
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(crate::stats::columnwise(&per))
}

/// Eigenvalues of `A + U B U*` with `A`, `B` diagonal resamples of `a`, `b`
/// and `U` Haar unitary of size `d`, repeated until every sample of the
/// larger input has been matched in count.
pub fn free_convolve_samples(a: &SpectralSample, b: &SpectralSample, d: usize, seed: u64, exec: Exec) -> Result<SpectralSample> {
    if d == 0 || a.len() < d || b.len() < d {
        return Err(Error::Invalid(format!(
            "need at least d = {d} samples on each side, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let draws = a.len().max(b.len()).div_ceil(d);
    let per: Vec<Vec<f64>> = exec.map(draws, |t| {
        let mut rng = rng_for(seed, t as u64);
        let ia = sample_indices(&mut rng, a.len(), d);
        let ib = sample_indices(&mut rng, b.len(), d);
        let u = rmt::haar_unitary(d, &mut rng, true);
        let mut bm = CMat::zeros(d, d);
        for (k, i) in ib.iter().enumerate() {
            bm[(k, k)] = C64::new(b.values[i], 0.0);
        }
        let ub = linalg::matmul(&u, &bm);
        let mut m = linalg::matmul_adjoint_right(&ub, &u);
        for (k, i) in ia.iter().enumerate() {
            m[(k, k)] += C64::new(a.values[i], 0.0);
        }
        linalg::hermitian_eigenvalues(&m)
    });
    SpectralSample::new(
        per.concat(),
        SpectralMeta { source: format!("({}) ⊞ ({}), d={d}", a.meta.source, b.meta.source), seed, draws, matrix_dim: d },
    )
}

/// Statistics of the centered partial sums at one `N`.
#[derive(Clone, Debug, Serialize)]
pub struct PartialSumStats {
    pub n: usize,
    /// `E tr x̄_N^p`, `p = 1..=p_max`.
    pub moments: Vec<Estimate>,
}

/// `x̄_N = (Σ_{i≤N} U_i z U_i* - N tr(z) I) / √N` with independent local
/// Haar unitaries `U_i`, for each `N` in `n_list`.
pub fn clt_partial_sums(
    z: &MultipartiteMatrix,
    n_list: &[usize],
    trials: usize,
    p_max: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<PartialSumStats>> {
    if z.hermitian_defect() > 1e-10 {
        return Err(Error::Invalid("the base matrix must be Hermitian".into()));
    }
    if n_list.contains(&0) {
        return Err(Error::Invalid("partial sums need N ≥ 1".into()));
    }
    let mean = z.normalized_trace().re;
    let dims = z.dims().to_vec();
    let dmat = z.dim();
    n_list
        .iter()
        .map(|&n| {
            let per: Vec<Result<Vec<f64>>> = exec.map(trials, |t| {
                let mut rng = rng_for(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), t as u64);
                let mut acc = CMat::zeros(dmat, dmat);
                for _ in 0..n {
                    let f: Vec<CMat> = dims.iter().map(|&ds| rmt::haar_unitary(ds, &mut rng, true)).collect();
                    acc += z.local_conjugate(&f)?.into_data();
                }
                for k in 0..dmat {
                    acc[(k, k)] -= C64::new(n as f64 * mean, 0.0);
                }
                acc /= C64::new((n as f64).sqrt(), 0.0);
                normalized_power_traces(&acc, p_max)
            });
            let per = per.into_iter().collect::<Result<Vec<_>>>()?;
            Ok(PartialSumStats { n, moments: crate::stats::columnwise(&per) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_semicircle() {
        let m = semicircle_moments(6, 0.0, 1.0).unwrap();
        assert_eq!(m.moments, vec![0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);
        let k = moments_to_free_cumulants(&m);
        for (i, v) in k.iter().enumerate() {
            let want = if i == 1 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn motzkin_counts() {
        let counts: Vec<usize> = (0..=8).map(|p| nc12(p).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 21, 51, 127, 323]);
    }

    #[test]
    fn second_cumulant_is_sum() {
        let k = clt_limit_free_cumulants(KappaTriple::new(1.0, 2.0, 3.0).unwrap(), 3).unwrap();
        assert_eq!(k, vec![0.0, 6.0, 0.0]);
    }
}
