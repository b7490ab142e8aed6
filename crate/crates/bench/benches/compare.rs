use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wordsig_core::perf::random_signature;
use wordsig_core::relevance::{tfidf, top_k_words, BowVector, DfVector};
use wordsig_core::signature::Signature;
use wordsig_core::transport::wmd_distance;

fn compare(c: &mut Criterion) {
    let mut group = c.benchmark_group("wmd");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [10, 50, 100, 200] {
        let a = random_signature("a", k, 100, &mut rng);
        let b = random_signature("b", k, 100, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(k), &(a, b), |bench, (a, b)| {
            bench.iter(|| wmd_distance(a, b).unwrap())
        });
    }
    group.finish();
}

fn relevance(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let num_users = 500;
    let bow =
        BowVector::from_counts((0..2000).map(|i| (format!("w{i}"), rng.random_range(1..100u64))));
    let df = DfVector {
        df: bow
            .counts
            .keys()
            .map(|w| (w.clone(), rng.random_range(1..=num_users)))
            .collect(),
        num_users,
    };
    c.bench_function("tfidf_top50_of_2000", |bench| {
        bench.iter(|| top_k_words(&tfidf(&bow, &df, 0.05).unwrap(), 50).unwrap())
    });
}

fn wire(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sig = random_signature("user", 50, 100, &mut rng);
    let bytes = sig.to_bytes().unwrap();
    c.bench_function("encode_k50_d100", |bench| {
        bench.iter(|| sig.to_bytes().unwrap())
    });
    c.bench_function("decode_k50_d100", |bench| {
        bench.iter(|| Signature::from_bytes(&bytes).unwrap())
    });
}

criterion_group!(benches, compare, relevance, wire);
criterion_main!(benches);
