//! The experiment scenarios behind the subcommands.
//!
//! Every scenario takes an [`ExperimentConfig`], fills in its defaults,
//! and returns a report whose `config` echoes the values actually used.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tensorfree::cumulant::{
    exact_tensor_moments, moments_to_cumulants, mixed_cumulant_scan, restricted_growth_words, sample_statistics,
    CumulantTable, Entry, LinearStatistic, Provenance, TupleTable,
};
use tensorfree::embedding::EmbeddingGraph;
use tensorfree::exec::Exec;
use tensorfree::freeconv::{self, KappaTriple};
use tensorfree::linalg::CMat;
use tensorfree::pairing::enumerate_pairings;
use tensorfree::rmt::{self, EnsembleKind, EnsembleSpec};
use tensorfree::stats::{ComplexEstimate, Estimate};
use tensorfree::tensors::{normalized_trace_invariant, verify_tensor_space_axioms};
use tensorfree::weingarten::{self as wg, WgKind};
use tensorfree::{MultipartiteMatrix, PermTuple, Permutation, C64};

use crate::model::{Conjugation, FamilySampler, Member, Model};
use crate::report::{DecayFit, ExperimentConfig, ExperimentReport, Stat};

pub const SCENARIOS: [&str; 8] =
    ["wg-table", "twirl-check", "lui-freeness", "pt-semicircle", "pt-freeness", "embedding", "clt", "axioms-check"];

/// Dispatch on `cfg.scenario`.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    let start = Instant::now();
    let report = match cfg.scenario.as_str() {
        "wg-table" => run_wg_table(cfg)?,
        "twirl-check" => run_twirl_check(cfg, exec)?,
        "lui-freeness" => run_lui_freeness(cfg, exec)?,
        "pt-semicircle" => run_pt_semicircle(cfg, exec)?,
        "pt-freeness" => run_pt_freeness(cfg, exec)?,
        "embedding" => run_embedding(cfg, exec)?,
        "clt" => run_clt(cfg, exec)?,
        "axioms-check" => run_axioms_check(cfg)?,
        other => bail!("unknown scenario {other:?}; expected one of {}", SCENARIOS.join(", ")),
    };
    let mut report = report.finish();
    report.wall_time_s = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

fn resolved(cfg: &ExperimentConfig, trials: usize, tol_mult: f64, dims: &[&[usize]]) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.trials.get_or_insert(trials);
    c.tol_mult.get_or_insert(tol_mult);
    if c.dims.is_empty() {
        c.dims = dims.iter().map(|d| d.to_vec()).collect();
    }
    c
}

fn estimate_of(samples: &[C64]) -> (C64, f64) {
    let e = ComplexEstimate::from_samples(samples);
    (e.mean(), e.stderr())
}

fn table_from(word: &[usize], p: usize, r: usize, items: Vec<(PermTuple, Vec<C64>)>) -> (Vec<usize>, CumulantTable) {
    let mut t = TupleTable::new(p, r, Provenance::MonteCarlo);
    for (beta, s) in items {
        t.insert(beta, Entry::from_samples(s)).expect("matching order and arity");
    }
    (word.to_vec(), CumulantTable(t))
}

/// Mixed words over `k` symbols of length `p`, one per set partition.
fn mixed_words(p: usize, k: usize) -> Vec<Vec<usize>> {
    restricted_growth_words(p, k).into_iter().filter(|w| w.iter().any(|&s| s != w[0])).collect()
}

#[derive(Clone, Debug, Serialize)]
struct ScanPoint {
    dims: Vec<usize>,
    scanned: usize,
    max_abs: f64,
    stderr: Option<f64>,
    tuple: Option<String>,
    word: Option<Vec<usize>>,
}

/// Largest mixed irreducible tensor cumulant of orders `2..=p_max`. `legs` is
/// the arity of the tuples; `pull` rewrites each statistic before it is
/// evaluated on the sampled family.
fn tensor_cumulant_scan<F>(
    sampler: F,
    k: usize,
    legs: usize,
    p_max: usize,
    trials: usize,
    exec: Exec,
    hermitian: bool,
    pull: &dyn Fn(LinearStatistic) -> Result<LinearStatistic>,
) -> Result<tensorfree::cumulant::ScanResult>
where
    F: Fn(u64) -> tensorfree::Result<Vec<MultipartiteMatrix>> + Sync + Send,
{
    let mut keys = Vec::new();
    let mut stats = Vec::new();
    for p in 2..=p_max {
        let betas: Vec<PermTuple> = PermTuple::all(p, legs).into_iter().filter(|t| t.is_irreducible()).collect();
        for w in mixed_words(p, k) {
            for b in &betas {
                keys.push((p, w.clone(), b.clone()));
                stats.push(pull(LinearStatistic::cumulant(b, w.clone())?)?);
            }
        }
    }
    let samples = sample_statistics(sampler, &stats, trials, exec, hermitian)?;
    let mut tables: Vec<(Vec<usize>, CumulantTable)> = Vec::new();
    // (p, word, per-tuple samples) of the table being filled
    type Pending = (usize, Vec<usize>, Vec<(PermTuple, Vec<C64>)>);
    let mut cur: Option<Pending> = None;
    for ((p, w, b), s) in keys.into_iter().zip(samples) {
        match &mut cur {
            Some((cp, cw, items)) if *cp == p && *cw == w => items.push((b, s)),
            _ => {
                if let Some((cp, cw, items)) = cur.take() {
                    tables.push(table_from(&cw, cp, legs, items));
                }
                cur = Some((p, w, vec![(b, s)]));
            }
        }
    }
    if let Some((cp, cw, items)) = cur {
        tables.push(table_from(&cw, cp, legs, items));
    }
    Ok(mixed_cumulant_scan(&tables))
}

fn scan_point(dims: &[usize], s: &tensorfree::cumulant::ScanResult) -> ScanPoint {
    ScanPoint {
        dims: dims.to_vec(),
        scanned: s.scanned,
        max_abs: s.max_abs(),
        stderr: s.max.as_ref().and_then(|m| m.stderr),
        tuple: s.max.as_ref().map(|m| m.tuple.clone()),
        word: s.max.as_ref().map(|m| m.word.clone()),
    }
}

/// Decay between the first and last schedule points, and with `zero_test`
/// also `|value| ≤ k · stderr` at the last point.
fn push_scan_verdict(report: &mut ExperimentReport, name: &str, points: &[ScanPoint], ratio: f64, k: f64, zero_test: bool) {
    if points.len() >= 2 {
        let (a, b) = (&points[0], &points[points.len() - 1]);
        report.push_decay(DecayFit::new(
            name,
            [min_dim(&a.dims), min_dim(&b.dims)],
            [a.max_abs, b.max_abs],
            [a.stderr, b.stderr],
            ratio,
        ));
    }
    if let Some(last) = points.last().filter(|_| zero_test) {
        report.push(Stat::statistical(
            format!("{name} at dims {:?}", last.dims),
            last.max_abs,
            last.stderr.unwrap_or(0.0),
            0.0,
            k,
            0.0,
        ));
    }
}

fn min_dim(d: &[usize]) -> usize {
    *d.iter().min().expect("nonempty dims")
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WgChoice {
    Unitary,
    Orthogonal,
    Both,
}

/// Weingarten tables with their closed-form, exact and asymptotic checks.
pub fn run_wg_table(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = resolved(cfg, 0, 0.0, &[&[10]]);
    let p: usize = cfg.param("p")?.unwrap_or(2);
    let kind: WgChoice = cfg.param("kind")?.unwrap_or(WgChoice::Both);
    let d = cfg.dims[0][0];
    let mut report = ExperimentReport::new(cfg);
    let df = d as f64;
    if matches!(kind, WgChoice::Unitary | WgChoice::Both) {
        let t = wg::unitary_wg(p, d)?;
        let entries: Vec<Value> =
            t.perms.iter().zip(&t.values).map(|(s, v)| json!({"key": s.to_string(), "value": v})).collect();
        report.detail("unitary", json!({"p": p, "d": d, "kind": "unitary", "entries": entries}));
        report.push(Stat::at_most("unitary convolution residual", t.convolution_residual(), None, 1e-9));
        match p {
            1 => report.push(Stat::exact("unitary Wg(id), p = 1", t.values[0], 1.0 / df, 1e-12)),
            2 => {
                let id = t.get(&Permutation::identity(2));
                let sw = t.get(&Permutation::full_cycle(2));
                report.push(Stat::exact("unitary Wg(id) / (1/(d²-1))", id * (df * df - 1.0), 1.0, 1e-12));
                report.push(Stat::exact("unitary Wg((1 2)) / (-1/(d(d²-1)))", -sw * df * (df * df - 1.0), 1.0, 1e-12));
            }
            _ => {}
        }
        if p <= wg::MAX_EXACT_P {
            let exact = wg::unitary_wg_exact(p, d)?;
            report.detail("unitary_exact", exact.iter().map(|q| q.to_string()).collect::<Vec<_>>());
            let worst = t
                .values
                .iter()
                .zip(&exact)
                .map(|(a, b)| {
                    let b = num_traits::ToPrimitive::to_f64(b).unwrap_or(f64::NAN);
                    (a - b).abs() / b.abs()
                })
                .fold(0.0, f64::max);
            report.push(Stat::at_most("unitary float vs exact, max relative error", worst, None, 1e-10));
        }
        report.detail("unitary_asymptotics", wg::unitary_asymptotic_check(&t));
    }
    if matches!(kind, WgChoice::Orthogonal | WgChoice::Both) {
        let t = wg::orthogonal_wg(p, d)?;
        // keyed by the pairing pair, written `π;ρ`
        let mut entries = Vec::new();
        for (i, a) in t.pairings.iter().enumerate() {
            for (j, b) in t.pairings.iter().enumerate() {
                entries.push(json!({"key": format!("{a};{b}"), "value": t.values[(i, j)]}));
            }
        }
        report.detail("orthogonal", json!({"p": p, "d": d, "kind": "orthogonal", "entries": entries}));
        report.push(Stat::at_most("orthogonal inverse residual", t.inverse_residual(), None, 1e-9));
        match p {
            1 => report.push(Stat::exact("orthogonal Wg, p = 1", t.values[(0, 0)], 1.0 / df, 1e-12)),
            2 => {
                let den = df * (df + 2.0) * (df - 1.0);
                let ps = enumerate_pairings(2)?;
                let mut worst: f64 = 0.0;
                for a in &ps {
                    for b in &ps {
                        let want = if a == b { (df + 1.0) / den } else { -1.0 / den };
                        worst = worst.max((t.get(a, b) - want).abs() / want.abs());
                    }
                }
                report.push(Stat::exact("orthogonal Wg vs closed form, max relative error", worst, 0.0, 1e-12));
            }
            _ => {}
        }
        if p <= wg::MAX_EXACT_P {
            let exact = wg::orthogonal_wg_exact(p, d)?;
            report.detail(
                "orthogonal_exact",
                exact.iter().map(|r| r.iter().map(|q| q.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            );
        }
        report.detail("orthogonal_asymptotics", wg::orthogonal_asymptotic_check(&t));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------

/// Monte Carlo two-copy twirls against the closed forms.
pub fn run_twirl_check(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    let cfg = resolved(cfg, 2000, 4.0, &[&[6]]);
    let d = cfg.dims[0][0];
    let trials = cfg.trials.expect("resolved");
    let k = cfg.tol_mult.expect("resolved");
    let seed = cfg.seed;
    let mut report = ExperimentReport::new(cfg);
    let spec = EnsembleSpec::new(EnsembleKind::GinibreComplex, vec![d, d], seed)?;
    let x = rmt::sample(&spec, 0)?;
    for (kind, name) in [(WgKind::Unitary, "unitary"), (WgKind::Orthogonal, "orthogonal")] {
        let exact = match kind {
            WgKind::Unitary => wg::twirl2_unitary(&x)?,
            WgKind::Orthogonal => wg::twirl2_orthogonal(&x)?,
        };
        let mc = wg::twirl2_monte_carlo(&x, kind, trials, seed.wrapping_add(1 + kind as u64), exec)?;
        let (mut worst, mut at) = (-1.0, (0, 0));
        for j in 0..exact.dim() {
            for i in 0..exact.dim() {
                let z = (mc.mean[(i, j)] - exact.get(i, j)).norm() / mc.stderr[(i, j)].max(1e-300);
                if z > worst {
                    worst = z;
                    at = (i, j);
                }
            }
        }
        let (i, j) = at;
        report.push(Stat::statistical(
            format!("{name} twirl, worst entry ({}, {}): |mean - closed form|", i + 1, j + 1),
            (mc.mean[(i, j)] - exact.get(i, j)).norm(),
            mc.stderr[(i, j)],
            0.0,
            k,
            1e-12,
        ));
        report.detail(&format!("{name}_max_z"), worst);
    }
    let id = MultipartiteMatrix::identity(vec![d, d]);
    let dev = |a: &MultipartiteMatrix, b: &MultipartiteMatrix| tensorfree::linalg::max_abs_diff(a.data(), b.data());
    report.push(Stat::exact("unitary twirl of the identity, max deviation", dev(&wg::twirl2_unitary(&id)?, &id), 0.0, 1e-12));
    report.push(Stat::exact(
        "orthogonal twirl of the identity, max deviation",
        dev(&wg::twirl2_orthogonal(&id)?, &id),
        0.0,
        1e-12,
    ));
    let w = wg::omega_operator(d).scale(C64::new(d as f64, 0.0));
    report.push(Stat::exact("orthogonal twirl of dω, max deviation", dev(&wg::twirl2_orthogonal(&w)?, &w), 0.0, 1e-12));
    let f = wg::swap_operator(d);
    report.push(Stat::exact("unitary twirl of the swap, max deviation", dev(&wg::twirl2_unitary(&f)?, &f), 0.0, 1e-12));
    Ok(report)
}

// ---------------------------------------------------------------------------

fn default_lui_members() -> Vec<Member> {
    vec![
        Member { model: Model::TensorGue { legs: vec![1] }, conjugate: Conjugation::None },
        Member { model: Model::Wishart { c: 1.0 }, conjugate: Conjugation::LocalUnitary },
    ]
}

/// Mixed tensor cumulants of independent locally invariant ensembles
/// across a dims schedule. With `exact: true` the family is instead the
/// deterministic tensor-product pair `A ⊗ I`, `I ⊗ B`.
pub fn run_lui_freeness(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    let cfg = resolved(cfg, 20, 5.0, &[&[16, 16], &[32, 32]]);
    let trials = cfg.trials.expect("resolved");
    let k = cfg.tol_mult.expect("resolved");
    let p_max: usize = cfg.param("p_max")?.unwrap_or(3);
    let ratio: f64 = cfg.param("required_ratio")?.unwrap_or(1.5);
    let exact: bool = cfg.param("exact")?.unwrap_or(false);
    let members: Vec<Member> = cfg.param("members")?.unwrap_or_else(default_lui_members);
    if members.len() < 2 {
        bail!("a freeness scan needs at least two family members (a single member has no mixed tuples)");
    }
    if !exact {
        cfg.check_schedule(1)?;
    }
    let mut report = ExperimentReport::new(cfg.clone());
    if exact {
        let dims = &cfg.dims[0];
        if dims.len() != 2 {
            bail!("the exact tensor-product check is bipartite");
        }
        let a = rmt::sample(&EnsembleSpec::new(EnsembleKind::Gue, vec![dims[0]], cfg.seed)?, 0)?;
        let b = rmt::sample(&EnsembleSpec::new(EnsembleKind::Gue, vec![dims[1]], cfg.seed)?, 1)?;
        let x = MultipartiteMatrix::kron(&[a.data().clone(), CMat::identity(dims[1], dims[1])])?;
        let y = MultipartiteMatrix::kron(&[CMat::identity(dims[0], dims[0]), b.data().clone()])?;
        let family = vec![x, y];
        let mut tables = Vec::new();
        for p in 2..=p_max {
            let tuples = PermTuple::all(p, 2);
            for w in mixed_words(p, 2) {
                tables.push((w.clone(), moments_to_cumulants(&exact_tensor_moments(&family, &tuples, &w)?)?));
            }
        }
        let s = mixed_cumulant_scan(&tables);
        report.detail("scan", scan_point(dims, &s));
        report.push(Stat::at_most("exact tensor-product family: max |mixed κ|", s.max_abs(), None, 1e-10));
        return Ok(report);
    }
    let hermitian = members.iter().all(|m| m.model.is_hermitian());
    let mut points = Vec::new();
    for dims in &cfg.dims {
        let fam = FamilySampler::new(&members, dims, cfg.seed)?;
        let s = tensor_cumulant_scan(|t| fam.sample(t), members.len(), dims.len(), p_max, trials, exec, hermitian, &Ok)?;
        points.push(scan_point(dims, &s));
    }
    push_scan_verdict(&mut report, "max |mixed irreducible κ|", &points, ratio, k, true);
    report.detail("scan", points);
    Ok(report)
}

// ---------------------------------------------------------------------------

fn check_signs(t: &[i8], r: usize) -> Result<()> {
    if t.len() != r {
        bail!("t has {} signs for {r} legs", t.len());
    }
    if t.iter().any(|&s| s != 1 && s != -1) {
        bail!("t must consist of ±1");
    }
    if t.iter().all(|&s| s == t[0]) {
        bail!("t = {t:?} is degenerate: X^t is X or its full transpose");
    }
    Ok(())
}

fn centered(x: &MultipartiteMatrix) -> CMat {
    let mut m = x.data().clone();
    let c = x.normalized_trace();
    for i in 0..m.nrows() {
        m[(i, i)] -= c;
    }
    m
}

/// Moments of the partial transpose of a unitarily invariant ensemble
/// against the semicircle with the ensemble's own mean and variance.
pub fn run_pt_semicircle(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    let cfg = resolved(cfg, 12, 5.0, &[&[48, 48]]);
    let trials = cfg.trials.expect("resolved");
    let k = cfg.tol_mult.expect("resolved");
    let model: Model = cfg.param("model")?.unwrap_or(Model::Wishart { c: 1.0 });
    let t: Vec<i8> = cfg.param("t")?.unwrap_or_else(|| vec![1, -1]);
    let mut report = ExperimentReport::new(cfg.clone());
    let mut rows = Vec::new();
    for dims in &cfg.dims {
        check_signs(&t, dims.len())?;
        let spec = model.spec(dims, cfg.seed)?;
        // per trial: tr X, tr X², and tr Y^p of Y = X^t - tr(X)
        let per: Vec<Result<[f64; 6]>> = exec.map(trials, |trial| {
            let x = rmt::sample(&spec, trial as u64)?;
            let m1 = x.normalized_trace().re;
            let y = x.partial_transpose(&t)?;
            let p = freeconv::normalized_power_traces(&centered(&y), 4)?;
            let k2 = x.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / x.dim() as f64 - m1 * m1;
            Ok([m1, y.normalized_trace().re, p[1], p[2], p[3], k2])
        });
        let per = per.into_iter().collect::<Result<Vec<_>>>()?;
        let col = |j: usize| Estimate::from_samples(&per.iter().map(|v| v[j]).collect::<Vec<_>>());
        let (mean_x, mean_y, m2, m3, m4, k2) = (col(0), col(1), col(2), col(3), col(4), col(5));
        let paired = Estimate::from_samples(&per.iter().map(|v| v[4] - 2.0 * v[5] * v[5]).collect::<Vec<_>>());
        let tag = format!("dims {dims:?}");
        report.push(Stat::exact(format!("{tag}: mean of X^t vs mean of X"), mean_y.mean, mean_x.mean, 1e-12));
        report.push(Stat::exact(format!("{tag}: centered m₂ of X^t vs κ₂"), m2.mean, k2.mean, 1e-10));
        report.push(Stat::statistical(format!("{tag}: centered m₃ of X^t"), m3.mean, m3.stderr, 0.0, k, 0.0));
        report.push(Stat::statistical(
            format!("{tag}: centered m₄ of X^t vs 2κ₂²"),
            m4.mean,
            paired.stderr,
            2.0 * k2.mean * k2.mean,
            k,
            0.0,
        ));
        let mut row = json!({
            "dims": dims, "mean": mean_x, "kappa2": k2, "m3": m3, "m4": m4, "m4_minus_2kappa2sq": paired,
        });
        if model == (Model::Wishart { c: 1.0 }) {
            // exact E tr Y³ at N = D; the asymptotic target is 0
            row["finite_dim_m3"] = (2.0 / spec.dims.iter().product::<usize>() as f64).into();
        }
        rows.push(row);
    }
    report.detail("moments", rows);
    Ok(report)
}

// ---------------------------------------------------------------------------

/// Asymptotic freeness of `{X^t}` for a unitarily (or orthogonally)
/// invariant ensemble: mixed free and tensor cumulants decay.
pub fn run_pt_freeness(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    let cfg = resolved(cfg, 40, 5.0, &[&[8, 8], &[16, 16]]);
    cfg.check_schedule(1)?;
    let trials = cfg.trials.expect("resolved");
    let k = cfg.tol_mult.expect("resolved");
    let ratio: f64 = cfg.param("required_ratio")?.unwrap_or(1.5);
    let model: Model = cfg.param("model")?.unwrap_or(Model::Wishart { c: 1.0 });
    let p_max: usize = cfg.param("p_max")?.unwrap_or(3);
    let r = cfg.dims[0].len();
    if r != 2 {
        bail!("pt-freeness runs on bipartite dims");
    }
    let orthogonal = model.is_orthogonal_invariant();
    let ts: Vec<Vec<i8>> = cfg.param("ts")?.unwrap_or_else(|| {
        if orthogonal {
            vec![vec![1, 1], vec![-1, 1]]
        } else {
            vec![vec![1, 1], vec![1, -1]]
        }
    });
    for (i, t) in ts.iter().enumerate() {
        if t.len() != r || t.iter().any(|&s| s != 1 && s != -1) {
            bail!("bad sign vector {t:?}");
        }
        let neg: Vec<i8> = t.iter().map(|s| -s).collect();
        if orthogonal && ts[..i].contains(&neg) {
            bail!("for an orthogonally invariant ensemble t and -t cannot both appear; fix the last leg to +1");
        }
    }
    let mut report = ExperimentReport::new(cfg.clone());
    let mut free_points = Vec::new();
    let mut tensor_points = Vec::new();
    for dims in &cfg.dims {
        let spec = model.spec(dims, cfg.seed)?;
        let sampler = |trial: u64| -> tensorfree::Result<Vec<MultipartiteMatrix>> {
            let x = rmt::sample(&spec, trial)?;
            let xc = MultipartiteMatrix::new(x.dims().to_vec(), centered(&x))?;
            ts.iter().map(|t| xc.partial_transpose(t)).collect()
        };
        let mut labels = Vec::new();
        let mut stats = Vec::new();
        for p in 2..=p_max {
            for w in mixed_words(p, ts.len()) {
                labels.push(format!("κ̃_{p}{w:?}"));
                stats.push(LinearStatistic::free_cumulant(&Permutation::full_cycle(p), r, w)?);
            }
        }
        let samples = sample_statistics(sampler, &stats, trials, exec, model.is_hermitian())?;
        let (mut best, mut best_se, mut best_label) = (-1.0, 0.0, String::new());
        for (l, s) in labels.iter().zip(&samples) {
            let (m, se) = estimate_of(s);
            if m.norm() > best {
                best = m.norm();
                best_se = se;
                best_label = l.clone();
            }
        }
        free_points.push(ScanPoint {
            dims: dims.clone(),
            scanned: labels.len(),
            max_abs: best,
            stderr: Some(best_se),
            tuple: Some(best_label),
            word: None,
        });
        let s = tensor_cumulant_scan(sampler, ts.len(), r, 2, trials, exec, model.is_hermitian(), &Ok)?;
        tensor_points.push(scan_point(dims, &s));
    }
    // the mixed cumulants are O(1/d), so a zero test at finite d is opt-in
    let zero_test: bool = cfg.param("zero_test")?.unwrap_or(false);
    push_scan_verdict(&mut report, "max |mixed free cumulant| of {X^t}", &free_points, ratio, k, zero_test);
    push_scan_verdict(&mut report, "max |mixed order-2 tensor cumulant| of {X^t}", &tensor_points, ratio, k, zero_test);
    report.detail("free_scan", free_points);
    report.detail("tensor_scan", tensor_points);

    // Tr_{α,β}(X^Γ) = Tr_{α,β⁻¹}(X) on one draw at the smallest dims
    let x = rmt::sample(&model.spec(&cfg.dims[0], cfg.seed)?, 0)?;
    let xg = x.partial_transpose(&[1, -1])?;
    let mut worst: f64 = 0.0;
    for a in Permutation::all(3) {
        for b in Permutation::all(3) {
            let lhs = normalized_trace_invariant(&PermTuple::new(vec![a.clone(), b.clone()])?, &[&xg, &xg, &xg])?;
            let rhs = normalized_trace_invariant(&PermTuple::new(vec![a.clone(), b.inverse()])?, &[&x, &x, &x])?;
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1e-300));
        }
    }
    report.push(Stat::at_most("Tr_(α,β)(X^Γ) vs Tr_(α,β⁻¹)(X), max relative error over S₃²", worst, None, 1e-10));
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphChoice {
    Star {
        #[serde(default = "three")]
        r: usize,
    },
    Grid,
    Custom {
        q: usize,
        r: usize,
        edges: Vec<(usize, usize)>,
    },
}

fn three() -> usize {
    3
}

impl GraphChoice {
    pub fn build(&self) -> Result<EmbeddingGraph> {
        Ok(match self {
            GraphChoice::Star { r } => EmbeddingGraph::star(*r)?,
            GraphChoice::Grid => EmbeddingGraph::grid(),
            GraphChoice::Custom { q, r, edges } => EmbeddingGraph::new(*q, *r, edges.clone())?,
        })
    }
}

/// Graph embeddings `Y_i = X_i` on the legs `(t(i), b(i))`. Dims tuples
/// are `(d_t, d_b)`.
pub fn run_embedding(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    let cfg = resolved(cfg, 40, 5.0, &[&[12, 12], &[24, 24]]);
    cfg.check_schedule(1)?;
    let trials = cfg.trials.expect("resolved");
    let k = cfg.tol_mult.expect("resolved");
    let ratio: f64 = cfg.param("required_ratio")?.unwrap_or(1.5);
    let graph = cfg.param::<GraphChoice>("graph")?.unwrap_or(GraphChoice::Star { r: 3 }).build()?;
    let identical: bool = cfg.param("identical")?.unwrap_or(true);
    let tensor_scan: bool = cfg.param("tensor_scan")?.unwrap_or(true);
    let model: Model = cfg.param("model")?.unwrap_or(Model::Wishart { c: 1.0 });
    if cfg.dims.iter().any(|d| d.len() != 2) {
        bail!("embedding dims are (d_t, d_b) pairs");
    }
    let mut report = ExperimentReport::new(cfg.clone());
    report.detail("graph", &graph);
    let ke = graph.k();
    let pull = |s: LinearStatistic| -> Result<LinearStatistic> { Ok(graph.pull_back(&s)?) };
    let mut free_points = Vec::new();
    let mut tensor_points = Vec::new();
    for dims in &cfg.dims {
        let members: Vec<Member> = (0..if identical { 1 } else { ke })
            .map(|_| Member { model: model.clone(), conjugate: Conjugation::None })
            .collect();
        let fam = FamilySampler::new(&members, dims, cfg.seed)?;
        let sampler = |t: u64| -> tensorfree::Result<Vec<MultipartiteMatrix>> {
            let xs = fam.sample(t)?;
            Ok(if identical { vec![xs[0].clone(); ke] } else { xs })
        };
        // mixed κ̃₂(Y_i, Y_j) for every pair of edges
        let mut labels = Vec::new();
        let mut stats = Vec::new();
        for i in 0..ke {
            for j in i + 1..ke {
                labels.push(format!("κ̃₂(Y{}, Y{})", i + 1, j + 1));
                stats.push(pull(LinearStatistic::free_cumulant(&Permutation::full_cycle(2), graph.legs(), vec![i, j])?)?);
            }
        }
        let samples = sample_statistics(sampler, &stats, trials, exec, model.is_hermitian())?;
        let (mut best, mut best_se, mut best_label) = (-1.0, 0.0, String::new());
        for (l, s) in labels.iter().zip(&samples) {
            let (m, se) = estimate_of(s);
            if m.norm() > best {
                best = m.norm();
                best_se = se;
                best_label = l.clone();
            }
        }
        free_points.push(ScanPoint {
            dims: dims.clone(),
            scanned: labels.len(),
            max_abs: best,
            stderr: Some(best_se),
            tuple: Some(best_label),
            word: None,
        });
        if tensor_scan {
            let s = tensor_cumulant_scan(sampler, ke, graph.legs(), 2, trials, exec, model.is_hermitian(), &pull)?;
            tensor_points.push(scan_point(dims, &s));
        }
    }
    // at finite d the embedded copies of one X have a deterministic overlap,
    // so these are decay claims only
    push_scan_verdict(&mut report, "max |mixed κ̃₂| of the embedded family", &free_points, ratio, k, false);
    push_scan_verdict(
        &mut report,
        "max |mixed order-2 tensor cumulant| of the embedded family",
        &tensor_points,
        ratio,
        k,
        false,
    );
    report.detail("free_scan", free_points);
    report.detail("tensor_scan", tensor_points);

    // leg-disjoint edges: exact factorization on one draw
    let dims = &cfg.dims[0];
    let members: Vec<Member> = (0..ke).map(|_| Member { model: model.clone(), conjugate: Conjugation::None }).collect();
    let xs = FamilySampler::new(&members, dims, cfg.seed)?.sample(0)?;
    let cache = tensorfree::tensors::InvariantCache::new(xs.iter().collect(), false)?;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..ke {
        for j in i + 1..ke {
            if !graph.legs_disjoint(&[i, j]) {
                continue;
            }
            for beta in PermTuple::all(2, graph.legs()).into_iter().filter(|t| t.is_irreducible()) {
                let s = pull(LinearStatistic::cumulant(&beta, vec![i, j])?)?;
                worst = worst.max(s.eval(&cache)?.norm());
                checked += 1;
            }
        }
    }
    if checked > 0 {
        report.push(Stat::at_most("leg-disjoint edges: max |mixed κ| on one draw", worst, None, 1e-10));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------

fn default_triples() -> Vec<[f64; 3]> {
    vec![[1.0, 1.0, 1.0], [1.0, 1.0, 4.0], [1.0, 4.0, 1.0], [1.0, 4.0, 4.0]]
}

fn artifact_dir(cfg: &ExperimentConfig) -> Result<Option<PathBuf>> {
    if let Some(d) = cfg.param::<PathBuf>("artifact_dir")? {
        return Ok(Some(d));
    }
    Ok(cfg.out.as_ref().map(|o| o.parent().map(Path::to_path_buf).unwrap_or_default()))
}

/// The bipartite central limit law: matrix-model moments against the
/// combinatorial limit, figure-style histograms, and partial sums of local
/// Haar conjugates of a product matrix.
pub fn run_clt(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    let cfg = resolved(cfg, 2000, 5.0, &[&[16, 16]]);
    let trials = cfg.trials.expect("resolved");
    let k = cfg.tol_mult.expect("resolved");
    let d = cfg.dims[0][0];
    let p_max: usize = cfg.param("p_max")?.unwrap_or(6);
    let check: Vec<[f64; 3]> = cfg.param("moment_triples")?.unwrap_or_else(|| vec![[1.0, 1.0, 1.0], [1.0, 4.0, 4.0]]);
    let hist: Vec<[f64; 3]> = cfg.param("histogram_triples")?.unwrap_or_else(default_triples);
    let hist_samples: usize = cfg.param("histogram_samples")?.unwrap_or(2000);
    let n_list: Vec<usize> = cfg.param("n_list")?.unwrap_or_else(|| vec![1, 4, 16, 64]);
    let ps_trials: usize = cfg.param("partial_sum_trials")?.unwrap_or(100);
    let ps_d: usize = cfg.param("partial_sum_d")?.unwrap_or(8);
    let (lambda, sigma): (f64, f64) = cfg.param("product_model")?.unwrap_or((1.0, 0.5));
    let dir = artifact_dir(&cfg)?;
    let mut report = ExperimentReport::new(cfg.clone());

    let mut rows = Vec::new();
    for (n, tr) in check.iter().enumerate() {
        let kt = KappaTriple::new(tr[0], tr[1], tr[2])?;
        let target = freeconv::clt_limit_moments_bipartite(kt, p_max)?;
        let est = freeconv::mu_infinity_moments(kt, d, trials, p_max, cfg.seed.wrapping_add(n as u64), exec)?;
        for (p, e) in est.iter().enumerate() {
            report.push(Stat::statistical(
                format!("κ = {tr:?}: m_{} of the matrix model", p + 1),
                e.mean,
                e.stderr,
                target.get(p + 1),
                k,
                1e-12,
            ));
        }
        rows.push(json!({"kappa": tr, "target": target.moments, "estimate": est}));
    }
    report.detail("matrix_model_moments", rows);

    if let Some(dir) = dir {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let draws = hist_samples.div_ceil(d * d).max(1);
        for (n, tr) in hist.iter().enumerate() {
            let kt = KappaTriple::new(tr[0], tr[1], tr[2])?;
            let s = freeconv::sample_mu_infinity(kt, d, draws, cfg.seed.wrapping_add(100 + n as u64), exec)?;
            let path = dir.join(format!("mu_infinity_{}_{}_{}.csv", tr[0], tr[1], tr[2]));
            s.write_csv(&path)?;
            report.artifacts.push(path);
        }
    }

    if !n_list.is_empty() {
        // z = a ⊗ a, a = λ + σ·diag(±1): κ = (σ²λ², λ²σ², σ⁴)
        if ps_d % 2 == 1 {
            bail!("partial_sum_d must be even");
        }
        let a = CMat::from_fn(ps_d, ps_d, |i, j| {
            if i == j {
                C64::new(lambda + if i % 2 == 0 { sigma } else { -sigma }, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let z = MultipartiteMatrix::kron(&[a.clone(), a])?;
        let g = Permutation::full_cycle(2);
        let e = Permutation::identity(2);
        let tuples = PermTuple::all(2, 2);
        let kz = moments_to_cumulants(&exact_tensor_moments(std::slice::from_ref(&z), &tuples, &[0, 0])?)?;
        let kv = |t: PermTuple| kz.value(&t).expect("full table").re;
        let kt = KappaTriple::new(
            kv(PermTuple::new(vec![g.clone(), e.clone()])?),
            kv(PermTuple::new(vec![e.clone(), g.clone()])?),
            kv(PermTuple::new(vec![g.clone(), g.clone()])?),
        )?;
        let (s2, l2) = (sigma * sigma, lambda * lambda);
        report.push(Stat::exact("product model κ_(γ,id)", kt.a, s2 * l2, 1e-12));
        report.push(Stat::exact("product model κ_(γ,γ)", kt.c, s2 * s2, 1e-12));
        let pm = p_max.min(4);
        let limit = freeconv::clt_limit_moments_bipartite(kt, pm)?;
        let stats = freeconv::clt_partial_sums(&z, &n_list, ps_trials, pm, cfg.seed ^ 0x5eed, exec)?;
        for s in &stats {
            report.push(Stat::statistical(format!("N = {}: mean of the centered sum", s.n), s.moments[0].mean, s.moments[0].stderr, 0.0, k, 1e-10));
        }
        let last = stats.last().expect("nonempty");
        let allowance = 1.0 / (last.n as f64).sqrt();
        for p in 2..=pm {
            let e = &last.moments[p - 1];
            let t = limit.get(p);
            // two-sided Monte Carlo plus an O(N^{-1/2}) allowance
            let pass = (e.mean - t).abs() <= k * e.stderr + allowance * t.abs().max(1.0);
            report.push(Stat {
                name: format!("N = {}: m_{p} of the centered sum vs the limit law", last.n),
                estimate: e.mean,
                stderr: Some(e.stderr),
                target: t,
                rule: format!("|estimate - target| <= {k} stderr + N^(-1/2) max(|target|, 1)"),
                pass,
            });
        }
        report.detail("partial_sums", stats);
        report.detail("product_model_kappa", kt);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------

/// The tensor probability space axioms on random complex inputs.
pub fn run_axioms_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = resolved(cfg, 20, 0.0, &[&[3, 4]]);
    let samples = cfg.trials.expect("resolved");
    let tol: f64 = cfg.param("tolerance")?.unwrap_or(1e-10);
    let dims = cfg.dims[0].clone();
    let spec = EnsembleSpec::new(EnsembleKind::GinibreComplex, dims, cfg.seed)?;
    let xs = (0..5).map(|t| rmt::sample(&spec, t)).collect::<tensorfree::Result<Vec<_>>>()?;
    let ax = verify_tensor_space_axioms(&xs, samples, cfg.seed, tol)?;
    let mut report = ExperimentReport::new(cfg);
    let mut names: Vec<&str> = ax.checks.iter().map(|c| c.axiom.as_str()).collect();
    names.dedup();
    names.sort_unstable();
    names.dedup();
    for name in names {
        let worst = ax.checks.iter().filter(|c| c.axiom == name).map(|c| c.rel_error).fold(0.0, f64::max);
        report.push(Stat::at_most(format!("{name}: max relative error"), worst, None, tol));
    }
    report.detail("checks", &ax.checks);
    Ok(report)
}
