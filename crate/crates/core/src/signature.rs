//! User signatures: a `k x D` matrix of latent word vectors plus a length-`k`
//! weight vector summing to one. Words never enter a signature.
//!
//! Wire layout (`.afsg`, all integers little-endian):
//!
//! ```text
//! "AFSG"  version:u8  k:u16  dim:u16  id_len:u16  id:[u8; id_len]
//! vectors: k*dim x f16 (row-major)
//! weights: k x f16
//! ```
//!
//! Weights are stored relative to the largest weight and renormalised to sum
//! to one when read, which keeps `serialize(deserialize(bytes))` byte-stable.

use half::f16;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::embedding::EmbeddingModel;
use crate::error::SignatureError;

pub const MAGIC: &[u8; 4] = b"AFSG";
pub const FORMAT_VERSION: u8 = 1;
pub const FILE_EXTENSION: &str = "afsg";
const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    user_id: String,
    dim: usize,
    /// Row-major `k x dim`.
    vectors: Vec<f64>,
    weights: Vec<f64>,
}

impl Signature {
    /// Validates and assembles a signature from flat row-major vectors.
    pub fn new(
        user_id: impl Into<String>,
        dim: usize,
        vectors: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, SignatureError> {
        let k = weights.len();
        if k == 0 {
            return Err(SignatureError::EmptySelection);
        }
        if dim == 0 {
            return Err(SignatureError::Invalid(
                "dimension must be at least 1".into(),
            ));
        }
        if vectors.len() != k * dim {
            return Err(SignatureError::Invalid(format!(
                "expected {} vector components for k={k}, dim={dim}, got {}",
                k * dim,
                vectors.len()
            )));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(SignatureError::Invalid(
                "non-finite vector component".into(),
            ));
        }
        if let Some(j) = vectors
            .chunks(dim)
            .position(|row| row.iter().all(|&x| x == 0.0))
        {
            return Err(SignatureError::Invalid(format!("row {j} is a zero vector")));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(SignatureError::Invalid(
                "weights must be finite and positive".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(SignatureError::Invalid(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            user_id: user_id.into(),
            dim,
            vectors,
            weights,
        })
    }

    /// Rows plus raw counts; weights become `counts / sum(counts)`.
    pub fn from_counts(
        user_id: impl Into<String>,
        rows: Vec<Vec<f64>>,
        counts: &[u64],
    ) -> Result<Self, SignatureError> {
        if counts.is_empty() {
            return Err(SignatureError::EmptySelection);
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(SignatureError::ZeroCount(i));
        }
        if rows.len() != counts.len() {
            return Err(SignatureError::Invalid(format!(
                "{} rows for {} counts",
                rows.len(),
                counts.len()
            )));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(SignatureError::Invalid("rows differ in length".into()));
        }
        let total: u64 = counts.iter().sum();
        let weights = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(user_id, dim, rows.concat(), weights)
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks(self.dim)
    }

    pub fn with_user_id(mut self, user_id: impl Into<String>) -> Self {
        self.user_id = user_id.into();
        self
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, SignatureError> {
        let k = u16::try_from(self.k())
            .map_err(|_| SignatureError::Invalid(format!("k={} exceeds u16", self.k())))?;
        let dim = u16::try_from(self.dim)
            .map_err(|_| SignatureError::Invalid(format!("dim={} exceeds u16", self.dim)))?;
        let id = self.user_id.as_bytes();
        let id_len = u16::try_from(id.len())
            .map_err(|_| SignatureError::Invalid("user id longer than 65535 bytes".into()))?;

        let mut out = Vec::with_capacity(encoded_len(self.k(), self.dim, id.len()));
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&k.to_le_bytes());
        out.extend_from_slice(&dim.to_le_bytes());
        out.extend_from_slice(&id_len.to_le_bytes());
        out.extend_from_slice(id);
        for (j, row) in self.rows().enumerate() {
            let mut all_zero = true;
            for &x in row {
                let h = f16::from_f64(x);
                if !h.is_finite() {
                    return Err(SignatureError::NotRepresentable(x));
                }
                all_zero &= h.to_f64() == 0.0;
                out.extend_from_slice(&h.to_le_bytes());
            }
            if all_zero {
                return Err(SignatureError::Invalid(format!(
                    "row {j} underflows to zero at 16-bit precision"
                )));
            }
        }
        for h in quantize_weights(&self.weights) {
            out.extend_from_slice(&h.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SignatureError> {
        let corrupt = |msg: &str| SignatureError::Corrupt(msg.to_string());
        if bytes.len() < 11 {
            return Err(corrupt("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(SignatureError::Corrupt(format!(
                "unsupported version {}",
                bytes[4]
            )));
        }
        let k = u16::from_le_bytes([bytes[5], bytes[6]]) as usize;
        let dim = u16::from_le_bytes([bytes[7], bytes[8]]) as usize;
        let id_len = u16::from_le_bytes([bytes[9], bytes[10]]) as usize;
        let expected = encoded_len(k, dim, id_len);
        if bytes.len() < expected {
            return Err(corrupt("truncated body"));
        }
        if bytes.len() > expected {
            return Err(corrupt("trailing bytes"));
        }
        let id = std::str::from_utf8(&bytes[11..11 + id_len])
            .map_err(|_| corrupt("user id is not UTF-8"))?
            .to_string();
        let mut halves = bytes[11 + id_len..]
            .chunks_exact(2)
            .map(|c| f16::from_le_bytes([c[0], c[1]]).to_f64());
        let vectors: Vec<f64> = halves.by_ref().take(k * dim).collect();
        let raw_weights: Vec<f64> = halves.collect();
        let total: f64 = raw_weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(corrupt("weights do not sum to a positive value"));
        }
        let weights = raw_weights.iter().map(|w| w / total).collect();
        Self::new(id, dim, vectors, weights).map_err(|e| match e {
            SignatureError::Corrupt(m) => SignatureError::Corrupt(m),
            other => SignatureError::Corrupt(other.to_string()),
        })
    }

    pub fn summary(&self) -> SignatureSummary {
        let k = self.k() as f64;
        SignatureSummary {
            user_id: self.user_id.clone(),
            k: self.k(),
            dim: self.dim,
            weight_min: self.weights.iter().copied().fold(f64::INFINITY, f64::min),
            weight_max: self
                .weights
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
            weight_mean: self.weights.iter().sum::<f64>() / k,
            weight_sum: self.weights.iter().sum(),
            vectors: None,
            weights: None,
        }
    }

    pub fn full_summary(&self) -> SignatureSummary {
        SignatureSummary {
            vectors: Some(self.rows().map(<[f64]>::to_vec).collect()),
            weights: Some(self.weights.clone()),
            ..self.summary()
        }
    }
}

/// JSON view printed by the CLI; vectors only in the full form.
#[derive(Debug, Clone, Serialize)]
pub struct SignatureSummary {
    pub user_id: String,
    pub k: usize,
    pub dim: usize,
    pub weight_min: f64,
    pub weight_max: f64,
    pub weight_mean: f64,
    pub weight_sum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

pub fn encoded_len(k: usize, dim: usize, id_len: usize) -> usize {
    4 + 1 + 2 + 2 + 2 + id_len + 2 * k * dim + 2 * k
}

/// Weights go on the wire divided by the largest weight, so the maximum is
/// stored as exactly 1.0. Re-encoding a decoded signature reproduces the same
/// 16-bit values because the rescaled weights land within a few f64 ulps of
/// them. Entries too small for f16 are kept at the smallest subnormal.
pub(crate) fn quantize_weights(weights: &[f64]) -> Vec<f16> {
    let max = weights.iter().copied().fold(0.0, f64::max);
    weights
        .iter()
        .map(|&w| {
            let h = f16::from_f64(w / max);
            if h.to_bits() == 0 {
                f16::from_bits(1)
            } else {
                h
            }
        })
        .collect()
}

/// Signature rows are the model vectors of the selected words; weights are
/// their counts normalised by the total.
pub fn build_signature(
    user_id: impl Into<String>,
    top_words: &[(String, u64)],
    model: &EmbeddingModel,
) -> Result<Signature, SignatureError> {
    if top_words.is_empty() {
        return Err(SignatureError::EmptySelection);
    }
    let rows = top_words.iter().map(|(w, _)| model.vector(w)).collect();
    let counts: Vec<u64> = top_words.iter().map(|(_, c)| *c).collect();
    Signature::from_counts(user_id, rows, &counts)
}

/// Appends `decoy_count` words drawn without replacement from `pool` (minus
/// words already selected), each with count 1.
pub fn pad_selection(
    top_words: &[(String, u64)],
    decoy_count: usize,
    pool: &[String],
    seed: u64,
) -> Result<Vec<(String, u64)>, SignatureError> {
    let mut out = top_words.to_vec();
    if decoy_count == 0 {
        return Ok(out);
    }
    let taken: std::collections::HashSet<&str> =
        top_words.iter().map(|(w, _)| w.as_str()).collect();
    let mut eligible: Vec<&String> = pool
        .iter()
        .filter(|w| !taken.contains(w.as_str()))
        .collect();
    eligible.sort();
    eligible.dedup();
    if eligible.len() < decoy_count {
        return Err(SignatureError::PoolTooSmall {
            available: eligible.len(),
            requested: decoy_count,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in index::sample(&mut rng, eligible.len(), decoy_count) {
        out.push((eligible[i].clone(), 1));
    }
    Ok(out)
}

/// Adds seeded Gaussian noise with standard deviation `sigma` to every vector
/// component. Weights are untouched.
pub fn jitter_vectors(sig: &Signature, sigma: f64, seed: u64) -> Result<Signature, SignatureError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(SignatureError::InvalidSigma);
    }
    if sigma == 0.0 {
        return Ok(sig.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|_| SignatureError::InvalidSigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = sig
        .vectors
        .iter()
        .map(|x| x + normal.sample(&mut rng))
        .collect();
    Signature::new(sig.user_id.clone(), sig.dim, vectors, sig.weights.clone())
}

/// Relative f16 error bound for normal numbers.
pub const F16_RELATIVE_EPS: f64 = 1.0 / 1024.0;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn toy_model() -> EmbeddingModel {
        EmbeddingModel::parse("2 3\ncountry -0.25 0.5 0.75\nnation -0.23 0.51 0.6", 0).unwrap()
    }

    fn toy_signature() -> Signature {
        build_signature(
            "A",
            &[("country".into(), 5), ("nation".into(), 6)],
            &toy_model(),
        )
        .unwrap()
    }

    fn random_signature(k: usize, dim: usize, seed: u64) -> Signature {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..k)
            .map(|_| {
                (0..dim)
                    .map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0))
                    .collect()
            })
            .collect();
        let counts: Vec<u64> = (0..k)
            .map(|_| rand::Rng::random_range(&mut rng, 1..40))
            .collect();
        Signature::from_counts("user-7", rows, &counts).unwrap()
    }

    #[test]
    fn worked_example() {
        let sig = toy_signature();
        assert_eq!(sig.k(), 2);
        assert_eq!(sig.dim(), 3);
        assert_eq!(sig.row(0), &[-0.25, 0.5, 0.75]);
        assert_eq!(sig.row(1), &[-0.23, 0.51, 0.6]);
        assert_eq!(sig.weights(), &[5.0 / 11.0, 6.0 / 11.0]);
    }

    #[test]
    fn single_word_weight_is_one() {
        let sig = build_signature("x", &[("x".into(), 7)], &toy_model()).unwrap();
        assert_eq!(sig.weights(), &[1.0]);
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            build_signature("x", &[], &toy_model()),
            Err(SignatureError::EmptySelection)
        );
        assert_eq!(
            build_signature("x", &[("a".into(), 0)], &toy_model()),
            Err(SignatureError::ZeroCount(0))
        );
    }

    #[test]
    fn new_rejects_invalid() {
        assert!(Signature::new("u", 2, vec![1.0, 0.0], vec![0.5]).is_err());
        assert!(Signature::new("u", 2, vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(Signature::new("u", 2, vec![1.0, 0.0, 1.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(Signature::new("u", 2, vec![f64::NAN, 0.0], vec![1.0]).is_err());
        assert!(Signature::new("u", 2, vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn default_sized_signature_is_about_ten_kilobytes() {
        let sig = random_signature(50, 100, 1);
        let bytes = sig.to_bytes().unwrap();
        assert_eq!(bytes.len(), encoded_len(50, 100, "user-7".len()));
        assert!((10_000..=12_288).contains(&bytes.len()), "{}", bytes.len());
    }

    #[test]
    fn worked_example_round_trip() {
        let sig = toy_signature();
        let back = Signature::from_bytes(&sig.to_bytes().unwrap()).unwrap();
        assert_eq!(back.user_id(), "A");
        for (a, b) in sig.vectors().iter().zip(back.vectors()) {
            assert!((a - b).abs() <= a.abs() * F16_RELATIVE_EPS, "{a} vs {b}");
        }
        for (a, b) in sig.weights().iter().zip(back.weights()) {
            assert!((a - b).abs() <= a.abs() * F16_RELATIVE_EPS, "{a} vs {b}");
        }
        assert_abs_diff_eq!(back.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn corrupt_inputs() {
        let bytes = toy_signature().to_bytes().unwrap();
        for cut in [0, 3, 10, 11, bytes.len() - 1] {
            assert!(matches!(
                Signature::from_bytes(&bytes[..cut]),
                Err(SignatureError::Corrupt(_))
            ));
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            Signature::from_bytes(&bad),
            Err(SignatureError::Corrupt(_))
        ));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(
            Signature::from_bytes(&long),
            Err(SignatureError::Corrupt(_))
        ));
        let mut nan = bytes.clone();
        let at = 11 + 1;
        nan[at..at + 2].copy_from_slice(&f16::NAN.to_le_bytes());
        assert!(matches!(
            Signature::from_bytes(&nan),
            Err(SignatureError::Corrupt(_))
        ));
        let mut zero_w = bytes;
        let n = zero_w.len();
        zero_w[n - 2..].copy_from_slice(&f16::ZERO.to_le_bytes());
        assert!(matches!(
            Signature::from_bytes(&zero_w),
            Err(SignatureError::Corrupt(_))
        ));
    }

    #[test]
    fn out_of_range_components_rejected() {
        let sig = Signature::new("u", 1, vec![1e6], vec![1.0]).unwrap();
        assert_eq!(sig.to_bytes(), Err(SignatureError::NotRepresentable(1e6)));
        let tiny = Signature::new("u", 1, vec![1e-12], vec![1.0]).unwrap();
        assert!(matches!(tiny.to_bytes(), Err(SignatureError::Invalid(_))));
    }

    #[test]
    fn words_do_not_appear_in_bytes() {
        let bytes = toy_signature().to_bytes().unwrap();
        for w in ["country", "nation"] {
            assert!(!bytes.windows(w.len()).any(|win| win == w.as_bytes()));
        }
    }

    #[test]
    fn quantized_weights_are_relative_to_max() {
        let q = quantize_weights(&[0.25, 0.5, 0.25]);
        assert_eq!(q, vec![f16::from_f64(0.5), f16::ONE, f16::from_f64(0.5)]);
        // Far below the f16 range relative to the max: lifted, never zeroed.
        let q = quantize_weights(&[1e-12, 1.0 - 1e-12]);
        assert!(q[0].to_f64() > 0.0);
    }

    #[test]
    fn pad_selection_contract() {
        let top: Vec<(String, u64)> = vec![("a".into(), 3), ("b".into(), 2)];
        let pool: Vec<String> = ["a", "c", "d", "e", "f", "c"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(pad_selection(&top, 0, &pool, 1).unwrap(), top);
        let padded = pad_selection(&top, 3, &pool, 1).unwrap();
        assert_eq!(padded.len(), 5);
        assert_eq!(&padded[..2], &top[..]);
        assert!(padded[2..]
            .iter()
            .all(|(w, c)| *c == 1 && w != "a" && w != "b"));
        let mut decoys: Vec<&String> = padded[2..].iter().map(|p| &p.0).collect();
        decoys.sort();
        decoys.dedup();
        assert_eq!(decoys.len(), 3);
        assert_eq!(pad_selection(&top, 3, &pool, 1).unwrap(), padded);
        assert_eq!(
            pad_selection(&top, 5, &pool, 1),
            Err(SignatureError::PoolTooSmall {
                available: 4,
                requested: 5
            })
        );
        // Decoys never feed the signature itself.
        let model = EmbeddingModel::synthetic(4, ["a", "b", "c", "d", "e", "f"], 2);
        let sig = build_signature("u", &padded[..top.len()], &model).unwrap();
        assert_eq!(sig.k(), 2);
    }

    #[test]
    fn jitter_contract() {
        let sig = random_signature(50, 100, 4);
        assert_eq!(jitter_vectors(&sig, 0.0, 1).unwrap(), sig);
        let a = jitter_vectors(&sig, 0.01, 9).unwrap();
        assert_eq!(a, jitter_vectors(&sig, 0.01, 9).unwrap());
        assert_ne!(a, jitter_vectors(&sig, 0.01, 10).unwrap());
        assert_eq!(a.weights(), sig.weights());
        // Sample mean of |N(0, 0.01)| over 5000 draws; expectation 0.01*sqrt(2/pi).
        let mean_abs = a
            .vectors()
            .iter()
            .zip(sig.vectors())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            / 5000.0;
        let expected = 0.01 * (2.0 / std::f64::consts::PI).sqrt();
        assert!(
            (mean_abs - expected).abs() < 0.0005,
            "{mean_abs} vs {expected}"
        );
        assert_eq!(
            jitter_vectors(&sig, -1.0, 1),
            Err(SignatureError::InvalidSigma)
        );
    }

    #[test]
    fn summary_json_omits_vectors_by_default() {
        let s = serde_json::to_value(toy_signature().summary()).unwrap();
        assert!(s.get("vectors").is_none());
        assert_eq!(s["k"], 2);
        let full = serde_json::to_value(toy_signature().full_summary()).unwrap();
        assert_eq!(full["vectors"].as_array().unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn serialization_is_canonical(k in 1usize..40, dim in 1usize..12, seed in any::<u64>()) {
            let sig = random_signature(k, dim, seed);
            let once = sig.to_bytes().unwrap();
            let back = Signature::from_bytes(&once).unwrap();
            prop_assert_eq!(back.k(), k);
            prop_assert_eq!(back.dim(), dim);
            prop_assert!((back.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (a, b) in sig.weights().iter().zip(back.weights()) {
                prop_assert!((a - b).abs() <= a * F16_RELATIVE_EPS, "{} vs {}", a, b);
            }
            for (a, b) in sig.vectors().iter().zip(back.vectors()) {
                prop_assert!((a - b).abs() <= a.abs() * F16_RELATIVE_EPS + 1e-7);
            }
            prop_assert_eq!(back.to_bytes().unwrap(), once);
        }
    }
}
