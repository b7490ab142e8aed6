//! Primal network simplex specialised to the dense transportation problem.
//!
//! The basis is a spanning tree over `rows + cols` nodes whose edges are
//! basic cells. Pricing uses block search over the cell list; after a long
//! run of degenerate pivots the solver switches to Bland's rule (smallest
//! eligible entering index, smallest blocking leaving index) until it makes
//! progress again.

use std::collections::VecDeque;

use crate::error::TransportError;

/// Reduced costs above `-PRICE_EPS` count as non-negative.
const PRICE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub flow: Vec<f64>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.flow[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.flow
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.flow(i, j)).sum())
            .collect()
    }
}

struct Tree {
    rows: usize,
    cols: usize,
    basic: Vec<bool>,
    /// Basic cells incident to each node; rows are `0..rows`, columns follow.
    adj: Vec<Vec<usize>>,
    flow: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Tree {
    fn cell_nodes(&self, cell: usize) -> (usize, usize) {
        (cell / self.cols, self.rows + cell % self.cols)
    }

    fn insert(&mut self, cell: usize, flow: f64) {
        let (r, c) = self.cell_nodes(cell);
        self.basic[cell] = true;
        self.flow[cell] = flow;
        self.adj[r].push(cell);
        self.adj[c].push(cell);
    }

    fn remove(&mut self, cell: usize) {
        let (r, c) = self.cell_nodes(cell);
        self.basic[cell] = false;
        self.flow[cell] = 0.0;
        self.adj[r].retain(|&e| e != cell);
        self.adj[c].retain(|&e| e != cell);
    }

    /// Potentials with `u[0] = 0` and `u_i + v_j = c_ij` on basic cells.
    fn update_potentials(&mut self, cost: &[f64]) {
        let n = self.rows + self.cols;
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        self.u[0] = 0.0;
        while let Some(node) = queue.pop_front() {
            for &cell in &self.adj[node] {
                let (r, c) = self.cell_nodes(cell);
                if node == r && !seen[c] {
                    self.v[c - self.rows] = cost[cell] - self.u[r];
                    seen[c] = true;
                    queue.push_back(c);
                } else if node == c && !seen[r] {
                    self.u[r] = cost[cell] - self.v[c - self.rows];
                    seen[r] = true;
                    queue.push_back(r);
                }
            }
        }
    }

    fn reduced_cost(&self, cost: &[f64], cell: usize) -> f64 {
        cost[cell] - self.u[cell / self.cols] - self.v[cell % self.cols]
    }

    /// Basic cells on the tree path from column node `from` to row node `to`,
    /// in path order.
    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let n = self.rows + self.cols;
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for &cell in &self.adj[node] {
                let (r, c) = self.cell_nodes(cell);
                let next = if node == r { c } else { r };
                if !seen[next] {
                    seen[next] = true;
                    via[next] = Some(cell);
                    queue.push_back(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = to;
        while node != from {
            let cell = via[node].expect("basis is a spanning tree");
            cells.push(cell);
            let (r, c) = self.cell_nodes(cell);
            node = if node == r { c } else { r };
        }
        cells.reverse();
        cells
    }
}

/// North-west corner start: exactly `rows + cols - 1` basic cells forming a
/// spanning tree, degenerate cells included with zero flow.
fn initial_tree(supply: &[f64], demand: &[f64]) -> Tree {
    let (rows, cols) = (supply.len(), demand.len());
    let mut tree = Tree {
        rows,
        cols,
        basic: vec![false; rows * cols],
        adj: vec![Vec::new(); rows + cols],
        flow: vec![0.0; rows * cols],
        u: vec![0.0; rows],
        v: vec![0.0; cols],
    };
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let x = s[i].min(d[j]).max(0.0);
        tree.insert(i * cols + j, x);
        s[i] -= x;
        d[j] -= x;
        if i == rows - 1 && j == cols - 1 {
            break;
        }
        if i == rows - 1 {
            j += 1;
        } else if j == cols - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    tree
}

/// Minimum-cost flow from `supply` to `demand` over a dense `rows x cols`
/// cost matrix (row-major). Totals must agree to within rounding.
pub fn solve(
    supply: &[f64],
    demand: &[f64],
    cost: &[f64],
) -> Result<TransportPlan, TransportError> {
    let (rows, cols) = (supply.len(), demand.len());
    if rows == 0 || cols == 0 {
        return Err(TransportError::InvalidProblem("empty marginal".into()));
    }
    if cost.len() != rows * cols {
        return Err(TransportError::InvalidProblem(format!(
            "cost matrix has {} entries, expected {}",
            cost.len(),
            rows * cols
        )));
    }
    if supply
        .iter()
        .chain(demand)
        .any(|x| !x.is_finite() || *x < 0.0)
    {
        return Err(TransportError::InvalidProblem(
            "marginals must be finite and non-negative".into(),
        ));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(TransportError::InvalidProblem("non-finite cost".into()));
    }
    let (ts, td): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (ts - td).abs() > 1e-9 * ts.max(td).max(1.0) {
        return Err(TransportError::InvalidProblem(format!(
            "unbalanced marginals: {ts} vs {td}"
        )));
    }

    let cells = rows * cols;
    let mut tree = initial_tree(supply, demand);
    tree.update_potentials(cost);

    let block = ((cells as f64).sqrt().ceil() as usize).max(cols).min(cells);
    let max_pivots = 50 * cells + 1000;
    let degenerate_limit = 2 * (rows + cols);
    let mut cursor = 0usize;
    let mut degenerate_run = 0usize;

    for _ in 0..max_pivots {
        let bland = degenerate_run > degenerate_limit;
        let entering = if bland {
            (0..cells).find(|&e| !tree.basic[e] && tree.reduced_cost(cost, e) < -PRICE_EPS)
        } else {
            block_search(&tree, cost, &mut cursor, block)
        };
        let Some(enter) = entering else {
            return Ok(finish(tree, cost));
        };

        let (r, c) = tree.cell_nodes(enter);
        // Cycle: enter (+), then alternating -,+,... along the path c -> r.
        let path = tree.path(c, r);
        let mut theta = f64::INFINITY;
        for &cell in path.iter().step_by(2) {
            theta = theta.min(tree.flow[cell]);
        }
        let mut blocking = path
            .iter()
            .step_by(2)
            .copied()
            .filter(|&cell| tree.flow[cell] <= theta);
        // Bland: smallest index; otherwise the first blocking cell on the path.
        let leave = if bland {
            blocking.min()
        } else {
            blocking.next()
        }
        .expect("cycle has a minus cell");

        for (pos, &cell) in path.iter().enumerate() {
            if pos % 2 == 0 {
                tree.flow[cell] = (tree.flow[cell] - theta).max(0.0);
            } else {
                tree.flow[cell] += theta;
            }
        }
        tree.remove(leave);
        tree.insert(enter, theta);
        tree.update_potentials(cost);

        if theta > 0.0 {
            degenerate_run = 0;
        } else {
            degenerate_run += 1;
        }
    }
    Err(TransportError::NotConverged(max_pivots))
}

/// Most negative reduced cost within the first block (scanning cyclically
/// from `cursor`) that contains any eligible cell.
fn block_search(tree: &Tree, cost: &[f64], cursor: &mut usize, block: usize) -> Option<usize> {
    let cells = tree.basic.len();
    let mut best: Option<(usize, f64)> = None;
    let mut scanned_in_block = 0;
    for step in 0..cells {
        let e = (*cursor + step) % cells;
        if !tree.basic[e] {
            let rc = tree.reduced_cost(cost, e);
            if rc < -PRICE_EPS && best.is_none_or(|(_, b)| rc < b) {
                best = Some((e, rc));
            }
        }
        scanned_in_block += 1;
        if scanned_in_block == block {
            if let Some((e, _)) = best {
                *cursor = (*cursor + step + 1) % cells;
                return Some(e);
            }
            scanned_in_block = 0;
        }
    }
    best.map(|(e, _)| {
        *cursor = (e + 1) % cells;
        e
    })
}

fn finish(tree: Tree, cost: &[f64]) -> TransportPlan {
    let total = tree.flow.iter().zip(cost).map(|(f, c)| f * c).sum();
    TransportPlan {
        rows: tree.rows,
        cols: tree.cols,
        flow: tree.flow,
        cost: total,
    }
}
