//! Seeded random matrix ensembles.
//!
//! Every draw is a pure function of `(spec, trial)`: the generator is
//! ChaCha8 seeded with `spec.seed` on stream `trial`, so results do not
//! depend on how trials are scheduled across threads.
//!
//! Normalisations:
//!
//! * `gue`, `goe`: `E tr X² → 1` (off-diagonal entries of variance `1/D`).
//! * `ginibre_complex`, `ginibre_real`: iid standard (complex) Gaussian
//!   entries divided by `√D`.
//! * `wishart`: `W = G G* / N` with `G` a `D × N` standard complex Gaussian
//!   matrix, so `E tr W = 1`.
//! * `haar_unitary`: QR of a complex Ginibre matrix with `Q ↦ Q Λ`,
//!   `Λ = diag(R_ii / |R_ii|)`. `haar_unitary_uncorrected` returns the raw
//!   `Q` of a Householder QR with the LAPACK sign convention (real `R_ii` of
//!   sign `-sgn Re`), which is not Haar distributed.
//! * `haar_orthogonal`: the real analogue with `Λ = diag(sign R_ii)`.
//! * `local_*`: `U_1 ⊗ ⋯ ⊗ U_r` with independent per-leg draws.
//! * `tensor_gue`: a GUE of dimension `∏_{s∈I} d_s` on the legs `I` and the
//!   identity on the others.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::tensors::MultipartiteMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    Gue,
    Goe,
    GinibreComplex,
    GinibreReal,
    /// `n` is the number of columns of `G`.
    Wishart {
        n: usize,
    },
    HaarUnitary,
    HaarUnitaryUncorrected,
    HaarOrthogonal,
    LocalHaarUnitary,
    LocalHaarOrthogonal,
    /// `legs` are 1-based.
    TensorGue {
        legs: Vec<usize>,
    },
    /// `diag(2k/(D-1))`, `k = 0..D`, so that `tr = 1`.
    DiagonalGrid,
    /// `D |ψ⟩⟨ψ|` with `ψ` the normalized all-ones vector, so that `tr = 1`.
    RankOneProjector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, dims: Vec<usize>, seed: u64) -> Result<Self> {
        let s = EnsembleSpec { kind, dims, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: EnsembleSpec = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Invalid(format!("dims {:?} must be nonempty and positive", self.dims)));
        }
        match &self.kind {
            EnsembleKind::Wishart { n } if *n == 0 => Err(Error::Invalid("Wishart needs n ≥ 1".into())),
            EnsembleKind::TensorGue { legs } => {
                if legs.is_empty() {
                    return Err(Error::Invalid("tensor_gue needs a nonempty leg subset".into()));
                }
                let r = self.dims.len();
                let mut seen = vec![false; r];
                for &l in legs {
                    if l == 0 || l > r {
                        return Err(Error::Invalid(format!("leg {l} outside 1..={r}")));
                    }
                    if seen[l - 1] {
                        return Err(Error::Invalid(format!("leg {l} listed twice")));
                    }
                    seen[l - 1] = true;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether draws are self-adjoint.
    pub fn is_hermitian(&self) -> bool {
        matches!(
            self.kind,
            EnsembleKind::Gue
                | EnsembleKind::Goe
                | EnsembleKind::Wishart { .. }
                | EnsembleKind::TensorGue { .. }
                | EnsembleKind::DiagonalGrid
                | EnsembleKind::RankOneProjector
        )
    }
}

/// The generator for `(seed, trial)`.
pub fn rng_for(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn std_complex<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn std_real<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// `m × n` matrix of iid standard complex Gaussians (`E|z|² = 1`).
pub fn complex_gaussian<R: Rng>(m: usize, n: usize, rng: &mut R) -> CMat {
    // fill column by column so the stream layout is independent of storage
    let mut a = CMat::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            a[(i, j)] = std_complex(rng);
        }
    }
    a
}

pub fn real_gaussian<R: Rng>(m: usize, n: usize, rng: &mut R) -> CMat {
    let mut a = CMat::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            a[(i, j)] = C64::new(std_real(rng), 0.0);
        }
    }
    a
}

/// `E|x_ij|² = 1/d`; only the upper triangle is drawn, column by column.
pub fn gue<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let s = 1.0 / (d as f64).sqrt();
    let mut a = CMat::zeros(d, d);
    for j in 0..d {
        for i in 0..j {
            let z = std_complex(rng) * s;
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
        a[(j, j)] = C64::new(std_real(rng) * s, 0.0);
    }
    a
}

/// Off-diagonal variance `1/d`, diagonal `2/d`.
pub fn goe<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let s = 1.0 / (d as f64).sqrt();
    let mut a = CMat::zeros(d, d);
    for j in 0..d {
        for i in 0..j {
            let x = C64::new(std_real(rng) * s, 0.0);
            a[(i, j)] = x;
            a[(j, i)] = x;
        }
        a[(j, j)] = C64::new(std_real(rng) * s * std::f64::consts::SQRT_2, 0.0);
    }
    a
}

pub fn wishart<R: Rng>(d: usize, n: usize, rng: &mut R) -> CMat {
    let g = complex_gaussian(d, n, rng);
    crate::linalg::matmul_adjoint_right(&g, &g) / C64::new(n as f64, 0.0)
}

/// Haar unitary by QR with the phase correction; `correct = false` gives
/// the raw `Q` factor of a LAPACK-style Householder QR (real diagonal of
/// sign `-sgn Re`), which is not Haar distributed.
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R, correct: bool) -> CMat {
    let g = complex_gaussian(d, d, rng);
    if !correct {
        return householder_q(g);
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

// Q of A = QR with the zgeqrf reflector convention: beta = -sgn(Re alpha)·‖x‖.
fn householder_q(mut a: CMat) -> CMat {
    let n = a.nrows();
    let mut q = CMat::identity(n, n);
    for j in 0..n {
        let alpha = a[(j, j)];
        let xnorm2: f64 = (j + 1..n).map(|i| a[(i, j)].norm_sqr()).sum();
        if xnorm2 == 0.0 && alpha.im == 0.0 {
            continue;
        }
        let norm = (alpha.norm_sqr() + xnorm2).sqrt();
        let beta = if alpha.re >= 0.0 { -norm } else { norm };
        let tau = (C64::new(beta, 0.0) - alpha) / beta;
        let scale = C64::new(1.0, 0.0) / (alpha - beta);
        let mut v = vec![C64::new(1.0, 0.0); n - j];
        for i in j + 1..n {
            v[i - j] = a[(i, j)] * scale;
        }
        // A <- (I - conj(tau) v v*) A on rows j..
        for c in j..n {
            let mut w = C64::new(0.0, 0.0);
            for i in j..n {
                w += v[i - j].conj() * a[(i, c)];
            }
            w *= tau.conj();
            for i in j..n {
                a[(i, c)] -= v[i - j] * w;
            }
        }
        // Q <- Q (I - tau v v*)
        for rr in 0..n {
            let mut w = C64::new(0.0, 0.0);
            for i in j..n {
                w += q[(rr, i)] * v[i - j];
            }
            w *= tau;
            for i in j..n {
                q[(rr, i)] -= w * v[i - j].conj();
            }
        }
    }
    q
}

pub fn haar_orthogonal<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let mut a = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            a[(i, j)] = std_real(rng);
        }
    }
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q.map(|x| C64::new(x, 0.0))
}

/// Place `a` (acting on the legs `legs`, 0-based, in increasing order) into
/// the full space, with the identity on the remaining legs.
pub fn embed_on_legs(a: &CMat, legs: &[usize], dims: &[usize]) -> Result<MultipartiteMatrix> {
    let sub: usize = legs.iter().map(|&s| dims[s]).product();
    if a.nrows() != sub || a.ncols() != sub {
        return Err(Error::Dimension("embedded block has the wrong size".into()));
    }
    let r = dims.len();
    let rest: Vec<usize> = (0..r).filter(|s| !legs.contains(s)).collect();
    if rest.is_empty() {
        return MultipartiteMatrix::new(dims.to_vec(), a.clone());
    }
    let mut st = vec![1usize; r];
    for s in (0..r - 1).rev() {
        st[s] = st[s + 1] * dims[s + 1];
    }
    let offsets = |ls: &[usize]| -> Vec<usize> {
        let n: usize = ls.iter().map(|&s| dims[s]).product();
        (0..n)
            .map(|idx| {
                let mut rem = idx;
                let mut o = 0;
                for &s in ls.iter().rev() {
                    o += (rem % dims[s]) * st[s];
                    rem /= dims[s];
                }
                o
            })
            .collect()
    };
    let a_off = offsets(legs);
    let e_off = offsets(&rest);
    let d: usize = dims.iter().product();
    let mut m = CMat::zeros(d, d);
    for &e in &e_off {
        for (j, &cj) in a_off.iter().enumerate() {
            for (i, &ci) in a_off.iter().enumerate() {
                m[(ci + e, cj + e)] = a[(i, j)];
            }
        }
    }
    MultipartiteMatrix::new(dims.to_vec(), m)
}

/// One draw of `spec` for trial `trial`.
pub fn sample(spec: &EnsembleSpec, trial: u64) -> Result<MultipartiteMatrix> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, trial);
    let dims = spec.dims.clone();
    let d = spec.total_dim();
    let one = C64::new(1.0, 0.0);
    let m = match &spec.kind {
        EnsembleKind::Gue => gue(d, &mut rng),
        EnsembleKind::Goe => goe(d, &mut rng),
        EnsembleKind::GinibreComplex => complex_gaussian(d, d, &mut rng) / C64::new((d as f64).sqrt(), 0.0),
        EnsembleKind::GinibreReal => real_gaussian(d, d, &mut rng) / C64::new((d as f64).sqrt(), 0.0),
        EnsembleKind::Wishart { n } => wishart(d, *n, &mut rng),
        EnsembleKind::HaarUnitary => haar_unitary(d, &mut rng, true),
        EnsembleKind::HaarUnitaryUncorrected => haar_unitary(d, &mut rng, false),
        EnsembleKind::HaarOrthogonal => haar_orthogonal(d, &mut rng),
        EnsembleKind::LocalHaarUnitary => {
            let f: Vec<CMat> = dims.iter().map(|&ds| haar_unitary(ds, &mut rng, true)).collect();
            return MultipartiteMatrix::kron(&f);
        }
        EnsembleKind::LocalHaarOrthogonal => {
            let f: Vec<CMat> = dims.iter().map(|&ds| haar_orthogonal(ds, &mut rng)).collect();
            return MultipartiteMatrix::kron(&f);
        }
        EnsembleKind::TensorGue { legs } => {
            let mut ls: Vec<usize> = legs.iter().map(|l| l - 1).collect();
            ls.sort_unstable();
            let sub: usize = ls.iter().map(|&s| dims[s]).product();
            return embed_on_legs(&gue(sub, &mut rng), &ls, &dims);
        }
        EnsembleKind::DiagonalGrid => {
            let mut m = CMat::zeros(d, d);
            for k in 0..d {
                m[(k, k)] = if d == 1 { one } else { C64::new(2.0 * k as f64 / (d - 1) as f64, 0.0) };
            }
            m
        }
        EnsembleKind::RankOneProjector => CMat::from_element(d, d, one),
    };
    MultipartiteMatrix::new(dims, m)
}

/// Independent draws of several ensembles for the same trial.
pub fn sample_family(specs: &[EnsembleSpec], trial: u64) -> Result<Vec<MultipartiteMatrix>> {
    if let Some(first) = specs.first() {
        let d = first.total_dim();
        if specs.iter().any(|s| s.total_dim() != d) {
            return Err(Error::Dimension("family members have different total dimension".into()));
        }
    }
    specs.iter().map(|s| sample(s, trial)).collect()
}

/// `U X U*` with `U` a local Haar unitary drawn from `(seed, trial)`.
pub fn local_unitary_conjugate(x: &MultipartiteMatrix, seed: u64, trial: u64) -> Result<MultipartiteMatrix> {
    let spec = EnsembleSpec::new(EnsembleKind::LocalHaarUnitary, x.dims().to_vec(), seed)?;
    let u = sample(&spec, trial)?;
    x.conjugate_by(u.data())
}

/// `U X Uᵀ` with `U` a local Haar orthogonal drawn from `(seed, trial)`.
pub fn local_orthogonal_conjugate(x: &MultipartiteMatrix, seed: u64, trial: u64) -> Result<MultipartiteMatrix> {
    let spec = EnsembleSpec::new(EnsembleKind::LocalHaarOrthogonal, x.dims().to_vec(), seed)?;
    let u = sample(&spec, trial)?;
    x.conjugate_by(u.data())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let s = EnsembleSpec::from_json(r#"{"kind":"tensor_gue","dims":[16,16],"legs":[1],"seed":7}"#).unwrap();
        assert_eq!(s.kind, EnsembleKind::TensorGue { legs: vec![1] });
        let back: EnsembleSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(EnsembleSpec::from_json(r#"{"kind":"tensor_gue","dims":[4],"legs":[],"seed":1}"#).is_err());
    }

    #[test]
    fn deterministic_in_seed_and_trial() {
        let s = EnsembleSpec::new(EnsembleKind::Gue, vec![3, 2], 11).unwrap();
        assert_eq!(sample(&s, 4).unwrap(), sample(&s, 4).unwrap());
        assert_ne!(sample(&s, 4).unwrap(), sample(&s, 5).unwrap());
    }

    #[test]
    fn haar_is_unitary() {
        let s = EnsembleSpec::new(EnsembleKind::HaarUnitary, vec![12], 3).unwrap();
        let u = sample(&s, 0).unwrap();
        let e = crate::linalg::max_abs_diff(&(u.data().adjoint() * u.data()), &CMat::identity(12, 12));
        assert!(e < 1e-12);
    }
}
