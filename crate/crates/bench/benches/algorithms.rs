use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use multiseq::corpus;
use multiseq::{
    check_btp, decompose_k, dw_explore, equiv_up_to, falsify_lipschitz, kseq_to_cra, positivize, BtpResult, Budget,
};
use multiseq_bench::btp_inputs;

fn btp(c: &mut Criterion) {
    let mut group = c.benchmark_group("check_btp");
    for (name, w, k) in btp_inputs() {
        group.bench_function(format!("{name}/k={k}"), |b| b.iter(|| check_btp(black_box(&w), k, &Budget::default())));
    }
    group.finish();
}

fn constructions(c: &mut Criterion) {
    let w0 = corpus::w0();
    c.bench_function("dw_explore/w0/cap=16", |b| b.iter(|| dw_explore(black_box(&w0), 16, 100_000)));
    c.bench_function("decompose_k/w0/k=2", |b| b.iter(|| decompose_k(black_box(&w0), 2, &Budget::default())));
    let parts = decompose_k(&w0, 2, &Budget::default()).unwrap();
    c.bench_function("kseq_to_cra/w0", |b| b.iter(|| kseq_to_cra(black_box(&parts))));
    let cra = corpus::phased_cra();
    c.bench_function("positivize/phased", |b| b.iter(|| positivize(black_box(&cra), &Budget::default())));
    let union = multiseq::WeightedAutomaton::union_all(&parts).unwrap();
    c.bench_function("equiv_up_to/w0/len=8", |b| b.iter(|| equiv_up_to(black_box(&union), &w0, 8)));
}

fn lipschitz(c: &mut Criterion) {
    let w0 = corpus::w0();
    let BtpResult::Fails(cex) = check_btp(&w0, 1, &Budget::default()).unwrap() else { unreachable!() };
    c.bench_function("falsify_lipschitz/w0/L=100", |b| b.iter(|| falsify_lipschitz(black_box(&w0), &cex, 100)));
}

criterion_group!(benches, btp, constructions, lipschitz);
criterion_main!(benches);
