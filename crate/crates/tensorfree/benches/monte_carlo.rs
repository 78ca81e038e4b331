use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tensorfree::cumulant::estimate_tensor_moments;
use tensorfree::exec::Exec;
use tensorfree::freeconv::{mu_infinity_moments, KappaTriple};
use tensorfree::rmt::{sample, EnsembleKind, EnsembleSpec};
use tensorfree::weingarten::{twirl2_monte_carlo, WgKind};
use tensorfree::{MultipartiteMatrix, PermTuple};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn tensor_moments(c: &mut Criterion) {
    let mut g = c.benchmark_group("tensor_moments");
    g.sample_size(10);
    let tuples = PermTuple::all(3, 2);
    for d in [4usize, 8] {
        let spec = EnsembleSpec::new(EnsembleKind::Gue, vec![d, d], 1).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, d), &d, |b, _| {
                b.iter(|| estimate_tensor_moments(|t| Ok(vec![sample(&spec, t)?]), &tuples, &[0, 0, 0], 32, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn clt_model(c: &mut Criterion) {
    let mut g = c.benchmark_group("mu_infinity_moments");
    g.sample_size(10);
    let k = KappaTriple::new(1.0, 1.0, 1.0).unwrap();
    for d in [8usize, 16] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, d), &d, |b, &d| {
                b.iter(|| mu_infinity_moments(k, d, 16, 4, 2, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn twirl(c: &mut Criterion) {
    let mut g = c.benchmark_group("twirl2_monte_carlo");
    g.sample_size(10);
    let x = MultipartiteMatrix::identity(vec![4, 4]);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| twirl2_monte_carlo(&x, WgKind::Unitary, 200, 3, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, tensor_moments, clt_model, twirl);
criterion_main!(benches);
