//! Moment and cumulant tables indexed by permutation tuples.
//!
//! `φ_α̲ = Σ_{β̲ ≤ α̲} κ_β̲` and `κ_β̲ = Σ_{α̲ ≤ β̲} Möb(α̲⁻¹β̲) φ_α̲`, the order
//! being componentwise geodesic order. On random matrices `φ_α̲` is realised
//! as `E tr_α̲`. Since the transform is linear in `φ`, Monte Carlo
//! cumulants are estimated by transforming each trial and averaging, which
//! gives an unbiased estimate with an exact standard error.

use std::collections::BTreeMap;
use std::ops::{AddAssign, Mul};

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::perm::{alpha_over_pi, enumerate_snc, join_all_snc, kernel_partition, mobius, PermTuple, Permutation};
use crate::stats::ComplexEstimate;
use crate::tensors::{InvariantCache, MultipartiteMatrix};

/// Coefficient rings the transforms run over.
pub trait Coefficient: Clone + Zero + AddAssign + for<'a> Mul<&'a Self, Output = Self> {
    fn from_int(k: i64) -> Self;
}

impl Coefficient for C64 {
    fn from_int(k: i64) -> Self {
        C64::new(k as f64, 0.0)
    }
}

impl Coefficient for f64 {
    fn from_int(k: i64) -> Self {
        k as f64
    }
}

impl Coefficient for BigRational {
    fn from_int(k: i64) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
}

/// `Möb(α̲⁻¹β̲) = ∏_s Möb(α_s⁻¹β_s)`.
pub fn interval_mobius(alpha: &PermTuple, beta: &PermTuple) -> i64 {
    alpha.left_divide(beta).mobius()
}

/// `Σ_{α̲ ≤ β̲} Möb(α̲⁻¹β̲) φ(α̲)`.
pub fn mobius_sum<T: Coefficient>(beta: &PermTuple, phi: impl Fn(&PermTuple) -> Option<T>) -> Result<T> {
    let mut acc = T::zero();
    for alpha in beta.below()? {
        let v = phi(&alpha).ok_or_else(|| Error::Incomplete(format!("missing entry {alpha}")))?;
        acc += T::from_int(interval_mobius(&alpha, beta)) * &v;
    }
    Ok(acc)
}

/// `Σ_{β̲ ≤ α̲} κ(β̲)`.
pub fn zeta_sum<T: Coefficient>(alpha: &PermTuple, kappa: impl Fn(&PermTuple) -> Option<T>) -> Result<T> {
    let mut acc = T::zero();
    for beta in alpha.below()? {
        acc += kappa(&beta).ok_or_else(|| Error::Incomplete(format!("missing entry {beta}")))?;
    }
    Ok(acc)
}

/// Möbius inversion of a map `α̲ ↦ φ_α̲`, evaluated at every key.
pub fn moments_to_cumulants_map<T: Coefficient>(m: &BTreeMap<PermTuple, T>) -> Result<BTreeMap<PermTuple, T>> {
    m.keys().map(|b| Ok((b.clone(), mobius_sum(b, |a| m.get(a).cloned())?))).collect()
}

pub fn cumulants_to_moments_map<T: Coefficient>(k: &BTreeMap<PermTuple, T>) -> Result<BTreeMap<PermTuple, T>> {
    k.keys().map(|a| Ok((a.clone(), zeta_sum(a, |b| k.get(b).cloned())?))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub value: C64,
    pub stderr: Option<f64>,
    /// Per-trial values, kept so that linear transforms propagate errors exactly.
    pub samples: Option<Vec<C64>>,
}

impl Entry {
    pub fn exact(value: C64) -> Self {
        Entry { value, stderr: None, samples: None }
    }

    pub fn from_samples(samples: Vec<C64>) -> Self {
        let e = ComplexEstimate::from_samples(&samples);
        Entry { value: e.mean(), stderr: Some(e.stderr()), samples: Some(samples) }
    }
}

/// Entries over a set of tuples of common order `p` and arity `r`, for one
/// fixed input word.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleTable {
    pub p: usize,
    pub r: usize,
    pub provenance: Provenance,
    pub entries: BTreeMap<PermTuple, Entry>,
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    tuple: String,
    re: f64,
    im: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    stderr: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    p: usize,
    r: usize,
    mode: Provenance,
    entries: Vec<JsonEntry>,
}

impl TupleTable {
    pub fn new(p: usize, r: usize, provenance: Provenance) -> Self {
        TupleTable { p, r, provenance, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, t: PermTuple, e: Entry) -> Result<()> {
        if t.p() != self.p || t.r() != self.r {
            return Err(Error::Dimension(format!("tuple {t} does not have order {} and arity {}", self.p, self.r)));
        }
        self.entries.insert(t, e);
        Ok(())
    }

    pub fn value(&self, t: &PermTuple) -> Option<C64> {
        self.entries.get(t).map(|e| e.value)
    }

    pub fn get(&self, t: &PermTuple) -> Option<&Entry> {
        self.entries.get(t)
    }

    pub fn to_json(&self) -> String {
        let t = JsonTable {
            p: self.p,
            r: self.r,
            mode: self.provenance,
            entries: self
                .entries
                .iter()
                .map(|(k, e)| JsonEntry { tuple: k.to_string(), re: e.value.re, im: e.value.im, stderr: e.stderr })
                .collect(),
        };
        serde_json::to_string_pretty(&t).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: JsonTable = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let mut out = TupleTable::new(t.p, t.r, t.mode);
        for e in t.entries {
            let key = PermTuple::parse(&e.tuple, Some(t.p))?;
            out.insert(key, Entry { value: C64::new(e.re, e.im), stderr: e.stderr, samples: None })?;
        }
        Ok(out)
    }

    fn transform(&self, f: impl Fn(&PermTuple, &dyn Fn(&PermTuple) -> Option<C64>) -> Result<C64>) -> Result<TupleTable> {
        let mut out = TupleTable::new(self.p, self.r, self.provenance);
        let trials = self.entries.values().next().and_then(|e| e.samples.as_ref().map(Vec::len));
        let with_samples = trials.is_some() && self.entries.values().all(|e| e.samples.as_ref().map(Vec::len) == trials);
        for key in self.entries.keys() {
            let value = f(key, &|t| self.value(t))?;
            let entry = if with_samples {
                let n = trials.unwrap_or(0);
                let samples = (0..n)
                    .map(|i| f(key, &|t| self.entries.get(t).and_then(|e| e.samples.as_ref()).map(|s| s[i])))
                    .collect::<Result<Vec<_>>>()?;
                let mut e = Entry::from_samples(samples);
                e.value = value;
                e
            } else {
                Entry { value, stderr: None, samples: None }
            };
            out.entries.insert(key.clone(), entry);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable(pub TupleTable);

#[derive(Clone, Debug, PartialEq)]
pub struct CumulantTable(pub TupleTable);

impl std::ops::Deref for MomentTable {
    type Target = TupleTable;
    fn deref(&self) -> &TupleTable {
        &self.0
    }
}

impl std::ops::Deref for CumulantTable {
    type Target = TupleTable;
    fn deref(&self) -> &TupleTable {
        &self.0
    }
}

/// `κ_β̲ = Σ_{α̲ ≤ β̲} φ_α̲ Möb(α̲⁻¹β̲)` for every tuple of the table.
pub fn moments_to_cumulants(m: &MomentTable) -> Result<CumulantTable> {
    m.0.transform(|b, phi| mobius_sum(b, phi)).map(CumulantTable)
}

/// `φ_α̲ = Σ_{β̲ ≤ α̲} κ_β̲` for every tuple of the table.
pub fn cumulants_to_moments(k: &CumulantTable) -> Result<MomentTable> {
    k.0.transform(|a, kap| zeta_sum(a, kap)).map(MomentTable)
}

/// `⋁_s Π(α_s) = 1_p`.
pub fn is_irreducible(alpha: &PermTuple) -> bool {
    alpha.is_irreducible()
}

/// The tuples `β̲ ∈ S_NC(α)^r` whose join inside `S_NC(α)` is `α`.
pub fn free_cumulant_support(alpha: &Permutation, r: usize) -> Result<Vec<PermTuple>> {
    let tuple = PermTuple::constant(alpha, r);
    let mut out = Vec::new();
    for b in tuple.below()? {
        if join_all_snc(b.perms(), alpha)? == *alpha {
            out.push(b);
        }
    }
    Ok(out)
}

/// `κ̃_α = Σ_{β̲ ∈ S_NC(α)^r, β_1 ∨ ⋯ ∨ β_r = α} κ_β̲`.
pub fn free_cumulant_from_tensor<T: Coefficient>(
    alpha: &Permutation,
    r: usize,
    kappa: impl Fn(&PermTuple) -> Option<T>,
) -> Result<T> {
    let mut acc = T::zero();
    for b in free_cumulant_support(alpha, r)? {
        acc += kappa(&b).ok_or_else(|| Error::Incomplete(format!("missing cumulant {b}")))?;
    }
    Ok(acc)
}

pub fn free_cumulants_from_tensor(k: &CumulantTable, alpha: &Permutation) -> Result<C64> {
    if alpha.p() != k.p {
        return Err(Error::Dimension("permutation order differs from the table".into()));
    }
    free_cumulant_from_tensor(alpha, k.r, |b| k.value(b))
}

/// `S_{α̲,f}`: all `β̲` with `α̲^{ker f} ≤ β̲ ≤ α̲` and `⋁ Π(β_s) ≤ ker f`.
pub fn vanishing_condition_set(alpha: &PermTuple, f: &[usize]) -> Result<Vec<PermTuple>> {
    if f.len() != alpha.p() {
        return Err(Error::Dimension("label function length differs from p".into()));
    }
    let ker = kernel_partition(f);
    let mut legs = Vec::with_capacity(alpha.r());
    for a in alpha.perms() {
        let low = alpha_over_pi(a, &ker)?;
        let interval: Vec<Permutation> = enumerate_snc(a)?
            .into_iter()
            .filter(|b| crate::perm::is_geodesic(&low, b).unwrap_or(false))
            .collect();
        legs.push(interval);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; legs.len()];
    if legs.iter().any(Vec::is_empty) {
        return Ok(out);
    }
    loop {
        let t = PermTuple::new(idx.iter().zip(&legs).map(|(&i, l)| l[i].clone()).collect())?;
        if t.join_partition().leq(&ker) {
            out.push(t);
        }
        let mut s = legs.len();
        loop {
            if s == 0 {
                return Ok(out);
            }
            s -= 1;
            idx[s] += 1;
            if idx[s] < legs[s].len() {
                break;
            }
            idx[s] = 0;
        }
    }
}

/// Joint moment of tensor free variables from their marginal cumulants:
/// `φ_α̲ = Σ_{β̲ ≤ α̲, ⋁Π(β_s) ≤ ker f} ∏_i κ_{β̲|f⁻¹(i)}`. The callback gets
/// the restricted tuple and the label `i`.
pub fn tensor_free_moment<T: Coefficient>(
    alpha: &PermTuple,
    f: &[usize],
    marginal: impl Fn(&PermTuple, usize) -> T,
) -> Result<T> {
    if f.len() != alpha.p() {
        return Err(Error::Dimension("label function length differs from p".into()));
    }
    let ker = kernel_partition(f);
    let mut acc = T::zero();
    for b in alpha.below()? {
        if !b.join_partition().leq(&ker) {
            continue;
        }
        let mut term = T::from_int(1);
        for block in ker.blocks() {
            term = term * &marginal(&b.restrict(block), f[block[0]]);
        }
        acc += term;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// `Σ_i c_i tr_{α̲_i}(X_{w(1)}, …, X_{w(p)})` for one word `w`.
#[derive(Clone, Debug)]
pub struct LinearStatistic {
    pub terms: Vec<(PermTuple, f64)>,
    pub word: Vec<usize>,
}

impl LinearStatistic {
    pub fn moment(tuple: PermTuple, word: Vec<usize>) -> Self {
        LinearStatistic { terms: vec![(tuple, 1.0)], word }
    }

    /// `κ_β̲` expanded through the Möbius formula.
    pub fn cumulant(beta: &PermTuple, word: Vec<usize>) -> Result<Self> {
        let terms = beta
            .below()?
            .into_iter()
            .filter_map(|a| {
                let m = interval_mobius(&a, beta);
                (m != 0).then_some((a, m as f64))
            })
            .collect();
        Ok(LinearStatistic { terms, word })
    }

    /// The plain free cumulant `κ_σ` of `r`-partite matrices, built from the
    /// constant tuples `(π, …, π)` with `π ≤ σ`.
    pub fn free_cumulant(sigma: &Permutation, r: usize, word: Vec<usize>) -> Result<Self> {
        let terms = enumerate_snc(sigma)?
            .into_iter()
            .filter_map(|pi| {
                let m = mobius(&pi.inverse().compose(sigma));
                (m != 0).then(|| (PermTuple::constant(&pi, r), m as f64))
            })
            .collect();
        Ok(LinearStatistic { terms, word })
    }

    pub fn eval(&self, cache: &InvariantCache<'_>) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (t, c) in &self.terms {
            acc += cache.normalized(t, &self.word)? * *c;
        }
        Ok(acc)
    }
}

/// Per-trial values of several linear statistics. `sampler(trial)` returns
/// the matrix family the words index into.
pub fn sample_statistics<F>(
    sampler: F,
    stats: &[LinearStatistic],
    trials: usize,
    exec: Exec,
    hermitian: bool,
) -> Result<Vec<Vec<C64>>>
where
    F: Fn(u64) -> Result<Vec<MultipartiteMatrix>> + Sync + Send,
{
    if trials < 2 {
        return Err(Error::Invalid("at least two trials are needed for a standard error".into()));
    }
    let per_trial: Vec<Result<Vec<C64>>> = exec.map(trials, |t| {
        let family = sampler(t as u64)?;
        let cache = InvariantCache::new(family.iter().collect(), hermitian)?;
        stats.iter().map(|s| s.eval(&cache)).collect()
    });
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    // transpose to one sample vector per statistic
    Ok((0..stats.len()).map(|i| per_trial.iter().map(|v| v[i]).collect()).collect())
}

pub fn estimate_statistics<F>(
    sampler: F,
    stats: &[LinearStatistic],
    trials: usize,
    exec: Exec,
    hermitian: bool,
) -> Result<Vec<ComplexEstimate>>
where
    F: Fn(u64) -> Result<Vec<MultipartiteMatrix>> + Sync + Send,
{
    Ok(sample_statistics(sampler, stats, trials, exec, hermitian)?
        .iter()
        .map(|s| ComplexEstimate::from_samples(s))
        .collect())
}

/// Monte Carlo `E tr_α̲(X_{w(1)}, …)` for the given tuples.
pub fn estimate_tensor_moments<F>(
    sampler: F,
    tuples: &[PermTuple],
    word: &[usize],
    trials: usize,
    exec: Exec,
) -> Result<MomentTable>
where
    F: Fn(u64) -> Result<Vec<MultipartiteMatrix>> + Sync + Send,
{
    let first = tuples.first().ok_or_else(|| Error::Invalid("no tuples requested".into()))?;
    let stats: Vec<LinearStatistic> =
        tuples.iter().map(|t| LinearStatistic::moment(t.clone(), word.to_vec())).collect();
    let samples = sample_statistics(sampler, &stats, trials, exec, false)?;
    let mut table = TupleTable::new(first.p(), first.r(), Provenance::MonteCarlo);
    for (t, s) in tuples.iter().zip(samples) {
        table.insert(t.clone(), Entry::from_samples(s))?;
    }
    Ok(MomentTable(table))
}

/// Monte Carlo `κ_β̲` by per-trial Möbius inversion.
pub fn estimate_tensor_cumulants<F>(
    sampler: F,
    betas: &[PermTuple],
    word: &[usize],
    trials: usize,
    exec: Exec,
    hermitian: bool,
) -> Result<CumulantTable>
where
    F: Fn(u64) -> Result<Vec<MultipartiteMatrix>> + Sync + Send,
{
    let first = betas.first().ok_or_else(|| Error::Invalid("no tuples requested".into()))?;
    let stats = betas
        .iter()
        .map(|b| LinearStatistic::cumulant(b, word.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let samples = sample_statistics(sampler, &stats, trials, exec, hermitian)?;
    let mut table = TupleTable::new(first.p(), first.r(), Provenance::MonteCarlo);
    for (b, s) in betas.iter().zip(samples) {
        table.insert(b.clone(), Entry::from_samples(s))?;
    }
    Ok(CumulantTable(table))
}

/// Exact tensor moments of a fixed family: `tr_α̲(X_{w(1)}, …)` for every tuple.
pub fn exact_tensor_moments(family: &[MultipartiteMatrix], tuples: &[PermTuple], word: &[usize]) -> Result<MomentTable> {
    let first = tuples.first().ok_or_else(|| Error::Invalid("no tuples requested".into()))?;
    let cache = InvariantCache::new(family.iter().collect(), false)?;
    let mut table = TupleTable::new(first.p(), first.r(), Provenance::Exact);
    for t in tuples {
        table.insert(t.clone(), Entry::exact(cache.normalized(t, word)?))?;
    }
    Ok(MomentTable(table))
}

/// The full down-set of the given tuples (everything the Möbius formula needs).
pub fn down_closure(tuples: &[PermTuple]) -> Result<Vec<PermTuple>> {
    let mut seen = std::collections::BTreeSet::new();
    for t in tuples {
        seen.extend(t.below()?);
    }
    Ok(seen.into_iter().collect())
}

/// One mixed cumulant found by [`mixed_cumulant_scan`].
#[derive(Clone, Debug, Serialize)]
pub struct MixedCumulant {
    pub tuple: String,
    pub word: Vec<usize>,
    pub abs: f64,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub scanned: usize,
    pub max: Option<MixedCumulant>,
}

impl ScanResult {
    pub fn max_abs(&self) -> f64 {
        self.max.as_ref().map_or(0.0, |m| m.abs)
    }
}

/// Largest `|κ_α̲|` over irreducible tuples in tables whose word is not
/// constant. Tables with a constant word are skipped.
pub fn mixed_cumulant_scan(tables: &[(Vec<usize>, CumulantTable)]) -> ScanResult {
    let mut scanned = 0;
    let mut best: Option<MixedCumulant> = None;
    for (word, table) in tables {
        if word.windows(2).all(|w| w[0] == w[1]) {
            continue;
        }
        for (t, e) in &table.entries {
            if !t.is_irreducible() {
                continue;
            }
            scanned += 1;
            let abs = e.value.norm();
            if best.as_ref().is_none_or(|b| abs > b.abs) {
                best = Some(MixedCumulant { tuple: t.to_string(), word: word.clone(), abs, stderr: e.stderr });
            }
        }
    }
    ScanResult { scanned, max: best }
}

/// All words `[p] → [labels]` up to relabelling of the symbols, i.e. one per
/// set partition, in restricted-growth form.
pub fn restricted_growth_words(p: usize, labels: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(p);
    fn rec(p: usize, labels: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        let top = if cur.is_empty() { 0 } else { max + 1 };
        for v in 0..=top.min(labels - 1) {
            cur.push(v);
            rec(p, labels, cur, max.max(v), out);
            cur.pop();
        }
    }
    if labels > 0 {
        rec(p, labels, &mut cur, 0, &mut out);
    }
    out
}
