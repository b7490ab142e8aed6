//! Exact Word Mover's Distance between signatures and the derived `[0, 1]`
//! similarity score.

pub mod oracle;
mod simplex;

pub use oracle::oracle_emd;
pub use simplex::{solve, TransportPlan};

use crate::embedding::{dot, l2_norm};
use crate::error::TransportError;
use crate::signature::Signature;

/// Row-major `a.k() x b.k()` matrix of cosine distances between signature
/// rows.
pub fn ground_costs(a: &Signature, b: &Signature) -> Result<Vec<f64>, TransportError> {
    if a.dim() != b.dim() {
        return Err(TransportError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let b_norms: Vec<f64> = b.rows().map(l2_norm).collect();
    let mut cost = Vec::with_capacity(a.k() * b.k());
    for x in a.rows() {
        let nx = l2_norm(x);
        for (y, ny) in b.rows().zip(&b_norms) {
            cost.push((1.0 - dot(x, y) / (nx * ny)).clamp(0.0, 2.0));
        }
    }
    Ok(cost)
}

/// Word Mover's Distance with cosine ground distance, solved exactly.
pub fn wmd(a: &Signature, b: &Signature) -> Result<(f64, TransportPlan), TransportError> {
    let cost = ground_costs(a, b)?;
    let plan = solve(a.weights(), b.weights(), &cost)?;
    Ok((plan.cost.clamp(0.0, 2.0), plan))
}

pub fn wmd_distance(a: &Signature, b: &Signature) -> Result<f64, TransportError> {
    wmd(a, b).map(|(d, _)| d)
}

/// `1 - wmd / 2`: one for identical signatures, zero for antipodal ones.
pub fn similarity(a: &Signature, b: &Signature) -> Result<f64, TransportError> {
    Ok(similarity_from_distance(wmd_distance(a, b)?))
}

pub fn similarity_from_distance(distance: f64) -> f64 {
    (1.0 - distance / 2.0).clamp(0.0, 1.0)
}

/// CSV dump of a plan's flow matrix, one row per source entry.
pub fn plan_to_csv(plan: &TransportPlan) -> String {
    let mut out = String::new();
    for row in plan.flow.chunks(plan.cols) {
        let line: Vec<String> = row.iter().map(|f| f.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
