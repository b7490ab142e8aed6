//! Timing of signature comparison as a function of k.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::TransportError;
use crate::signature::Signature;
use crate::transport::wmd_distance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub k: usize,
    pub mean_seconds: f64,
    pub repeats: usize,
}

/// Signature with `k` random unit rows and random integer counts.
pub fn random_signature(id: &str, k: usize, dim: usize, rng: &mut ChaCha8Rng) -> Signature {
    let rows = (0..k)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let n = crate::embedding::l2_norm(&v);
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();
    let counts: Vec<u64> = (0..k).map(|_| rng.random_range(1..=50)).collect();
    Signature::from_counts(id, rows, &counts).expect("random rows are valid")
}

/// Mean wall-clock time of one comparison for each `k`, over `repeats`
/// fresh random pairs, on the calling thread.
pub fn bench_compare(
    k_values: &[usize],
    dim: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<BenchRow>, TransportError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let repeats = repeats.max(1);
    let mut out = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let pairs: Vec<(Signature, Signature)> = (0..repeats)
            .map(|_| {
                (
                    random_signature("a", k, dim, &mut rng),
                    random_signature("b", k, dim, &mut rng),
                )
            })
            .collect();
        let start = Instant::now();
        for (a, b) in &pairs {
            std::hint::black_box(wmd_distance(a, b)?);
        }
        out.push(BenchRow {
            k,
            mean_seconds: start.elapsed().as_secs_f64() / repeats as f64,
            repeats,
        });
    }
    Ok(out)
}

pub fn bench_to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("k,mean_seconds,repeats\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.k, r.mean_seconds, r.repeats));
    }
    s
}
