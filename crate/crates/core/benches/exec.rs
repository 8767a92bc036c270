use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use weylab::endomatrix::{exp_lambda_with, rho_bf, DenomSeq};
use weylab::ladder::{expand_endo_with, BasisMat, CoeffRole, CoeffSeq};
use weylab::parser::parse_normal_form;
use weylab::stirling::stirling_tables;
use weylab::{Exec, OpMatrix, Q};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn compose(c: &mut Criterion) {
    let mut group = c.benchmark_group("compose");
    for dim in [24, 48] {
        let f = rho_bf(&parse_normal_form("a+ a a+ + 1/2 a^2").unwrap(), dim, DenomSeq::Factorial).unwrap();
        let g = rho_bf(&parse_normal_form("(a+)^2 a - 3 a").unwrap(), dim, DenomSeq::Factorial).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, dim), &dim, |b, _| {
                b.iter(|| black_box(f.compose_with(&g, exec).unwrap()))
            });
        }
    }
    group.finish();
}

fn exponential(c: &mut Criterion) {
    let mut group = c.benchmark_group("exp_lambda");
    group.sample_size(10);
    let f = parse_normal_form("a+ a a+").unwrap();
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| black_box(exp_lambda_with(&f, 16, 8, DenomSeq::Ones, exec).unwrap()))
        });
    }
    group.finish();
}

fn tabulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("stirling_batch");
    let omegas: Vec<_> = ["a+ a", "a+ a a+", "a+ a a a+ a+", "(a+)^2 a a+ + a+ a (a+)^2", "a+ a^2 a+ + a+", "(a+)^3 a^2"]
        .iter()
        .map(|s| parse_normal_form(s).unwrap())
        .collect();
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| black_box(stirling_tables(&omegas, 10, exec))));
    }
    group.finish();
}

fn expansion(c: &mut Criterion) {
    let mut group = c.benchmark_group("expand_endo");
    let (top, w) = (16, 33);
    let mut phi = OpMatrix::zero(w - 1, DenomSeq::Ones).unwrap();
    for k in 0..w {
        phi.set(0, k, Q::from_integer(1.into()));
    }
    let a = BasisMat::monomial(w);
    let b = BasisMat::divided_powers(w);
    let alpha = CoeffSeq::ones(w, CoeffRole::Alpha);
    let beta = CoeffSeq::naturals(w);
    for (name, exec) in MODES {
        group.bench_function(name, |bch| {
            bch.iter(|| black_box(expand_endo_with(&phi, &a, &alpha, &b, &beta, top, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, compose, exponential, tabulate, expansion);
criterion_main!(benches);
