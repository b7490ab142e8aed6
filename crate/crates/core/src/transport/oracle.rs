//! Exhaustive exact-arithmetic reference for small transportation problems.
//!
//! Every basic feasible solution of a balanced `m x n` transportation
//! polytope is supported on a spanning tree of the complete bipartite graph
//! `K_{m,n}`. For `m, n <= 4` there are at most `C(16, 7) = 11440` candidate
//! edge sets, so the optimum can be found by trying them all with rational
//! arithmetic.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::TransportError;

pub const MAX_SIDE: usize = 4;

fn rational(x: f64) -> Result<BigRational, TransportError> {
    BigRational::from_float(x)
        .ok_or_else(|| TransportError::InvalidProblem(format!("non-finite input {x}")))
}

fn normalized(weights: &[f64]) -> Result<Vec<BigRational>, TransportError> {
    let exact = weights
        .iter()
        .map(|&w| rational(w))
        .collect::<Result<Vec<_>, _>>()?;
    let total = exact.iter().fold(BigRational::zero(), |acc, w| acc + w);
    if total <= BigRational::zero() || exact.iter().any(|w| *w < BigRational::zero()) {
        return Err(TransportError::InvalidProblem(
            "weights must be non-negative with positive sum".into(),
        ));
    }
    Ok(exact.into_iter().map(|w| w / &total).collect())
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut x = x;
    while parent[x] != root {
        let next = parent[x];
        parent[x] = root;
        x = next;
    }
    root
}

/// Unique flow on a spanning tree, or `None` when some flow is negative.
fn tree_flow(
    edges: &[usize],
    cols: usize,
    supply: &[BigRational],
    demand: &[BigRational],
) -> Option<Vec<BigRational>> {
    let rows = supply.len();
    let nodes = rows + cols;
    let mut remaining: Vec<BigRational> = supply.iter().chain(demand).cloned().collect();
    let mut degree = vec![0usize; nodes];
    let ends = |e: usize| (e / cols, rows + e % cols);
    for &e in edges {
        let (r, c) = ends(e);
        degree[r] += 1;
        degree[c] += 1;
    }
    let mut alive = vec![true; edges.len()];
    let mut flow = vec![BigRational::zero(); edges.len()];
    for _ in 0..edges.len() {
        let leaf = (0..nodes).find(|&v| degree[v] == 1)?;
        let idx = (0..edges.len()).find(|&i| {
            alive[i] && {
                let (r, c) = ends(edges[i]);
                r == leaf || c == leaf
            }
        })?;
        let (r, c) = ends(edges[idx]);
        let other = if r == leaf { c } else { r };
        let f = remaining[leaf].clone();
        if f < BigRational::zero() {
            return None;
        }
        remaining[other] = &remaining[other] - &f;
        remaining[leaf] = BigRational::zero();
        flow[idx] = f;
        alive[idx] = false;
        degree[leaf] -= 1;
        degree[other] -= 1;
    }
    Some(flow)
}

/// Optimal transport cost found by enumerating all basic feasible solutions.
/// Inputs are converted to exact rationals and each side is rescaled by its
/// exact total, so marginals that sum to one up to rounding are accepted.
pub fn oracle_emd(
    weights_a: &[f64],
    weights_b: &[f64],
    cost: &[f64],
) -> Result<f64, TransportError> {
    let (rows, cols) = (weights_a.len(), weights_b.len());
    if rows > MAX_SIDE || cols > MAX_SIDE {
        return Err(TransportError::TooLarge { rows, cols });
    }
    if rows == 0 || cols == 0 || cost.len() != rows * cols {
        return Err(TransportError::InvalidProblem("shape mismatch".into()));
    }
    let supply = normalized(weights_a)?;
    let demand = normalized(weights_b)?;
    let cost: Vec<BigRational> = cost
        .iter()
        .map(|&c| rational(c))
        .collect::<Result<_, _>>()?;

    let cells = rows * cols;
    let basis_size = rows + cols - 1;
    let mut best: Option<BigRational> = None;
    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() as usize != basis_size {
            continue;
        }
        let edges: Vec<usize> = (0..cells).filter(|&e| mask & (1 << e) != 0).collect();
        let mut parent: Vec<usize> = (0..rows + cols).collect();
        let acyclic = edges.iter().all(|&e| {
            let a = find(&mut parent, e / cols);
            let b = find(&mut parent, rows + e % cols);
            if a == b {
                false
            } else {
                parent[a] = b;
                true
            }
        });
        if !acyclic {
            continue;
        }
        let Some(flow) = tree_flow(&edges, cols, &supply, &demand) else {
            continue;
        };
        let total = edges
            .iter()
            .zip(&flow)
            .fold(BigRational::zero(), |acc, (&e, f)| acc + f * &cost[e]);
        if best.as_ref().is_none_or(|b| total < *b) {
            best = Some(total);
        }
    }
    let best = best.ok_or_else(|| TransportError::InvalidProblem("no feasible basis".into()))?;
    best.to_f64()
        .ok_or_else(|| TransportError::InvalidProblem("optimum not representable".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_by_one() {
        assert_abs_diff_eq!(oracle_emd(&[1.0], &[1.0], &[0.37]).unwrap(), 0.37);
    }

    #[test]
    fn identity_matching() {
        assert_eq!(
            oracle_emd(&[0.5, 0.5], &[0.5, 0.5], &[0.0, 1.0, 1.0, 0.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn two_basic_solutions() {
        // Both vertices of this polytope, (0.3, 0, 0.3, 0.4) and (0, 0.3, 0.6, 0.1),
        // cost 2.8; the cost is constant along the edge between them.
        let v = oracle_emd(&[0.3, 0.7], &[0.6, 0.4], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(v, 2.8, epsilon = 1e-15);
    }

    #[test]
    fn too_large() {
        assert_eq!(
            oracle_emd(&[0.2; 5], &[1.0], &[0.0; 5]),
            Err(TransportError::TooLarge { rows: 5, cols: 1 })
        );
    }

    #[test]
    fn uneven_rectangular() {
        // Hand-solved: send 0.2 to col 0 (cost 0), 0.05 + 0.25 to col 1 (cost 1),
        // 0.5 to col 2 (cost 0).
        let v = oracle_emd(
            &[0.25, 0.75],
            &[0.2, 0.3, 0.5],
            &[0.0, 1.0, 2.0, 2.0, 1.0, 0.0],
        )
        .unwrap();
        assert_abs_diff_eq!(v, 0.3, epsilon = 1e-15);
    }
}
