//! Similarity networks over users: pairwise matrices, n-nearest-neighbour
//! majority vote, and classical MDS layouts.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::NetgraphError;
use crate::signature::Signature;
use crate::transport::similarity;

/// Symmetric `N x N` similarity matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    sim: Vec<f64>,
}

impl SimilarityMatrix {
    /// Validates shape, symmetry (within 1e-9) and finiteness. Values are
    /// clamped to `[0, 1]`, the diagonal is forced to one and the matrix is
    /// symmetrised from its upper triangle.
    pub fn new(ids: Vec<String>, sim: Vec<f64>) -> Result<Self, NetgraphError> {
        let n = ids.len();
        if sim.len() != n * n {
            return Err(NetgraphError::Format(format!(
                "{} ids but {} entries",
                n,
                sim.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(NetgraphError::Format(format!("duplicate id `{dup}`")));
        }
        if sim.iter().any(|v| !v.is_finite()) {
            return Err(NetgraphError::Format("non-finite similarity".into()));
        }
        let mut out = sim;
        for i in 0..n {
            out[i * n + i] = 1.0;
            for j in i + 1..n {
                let (a, b) = (out[i * n + j], out[j * n + i]);
                if (a - b).abs() > 1e-9 {
                    return Err(NetgraphError::Format(format!("asymmetric at ({i}, {j})")));
                }
                let v = a.clamp(0.0, 1.0);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(Self { ids, sim: out })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sim[i * self.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.sim
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Applies `f` to every off-diagonal entry.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self, NetgraphError> {
        let n = self.len();
        let sim = (0..n * n)
            .map(|idx| {
                if idx / n == idx % n {
                    1.0
                } else {
                    f(self.sim[idx])
                }
            })
            .collect();
        Self::new(self.ids.clone(), sim)
    }

    /// Header `id,<id_1>,...,<id_n>`, then one row per id.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (i, id) in self.ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend((0..self.len()).map(|j| self.get(i, j).to_string()));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn from_csv(text: &str) -> Result<Self, NetgraphError> {
        let fmt = |e: csv::Error| NetgraphError::Format(e.to_string());
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = r.headers().map_err(fmt)?.clone();
        let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut sim = Vec::with_capacity(ids.len() * ids.len());
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(fmt)?;
            if rec.get(0) != ids.get(i).map(String::as_str) {
                return Err(NetgraphError::Format(format!(
                    "row {i} id does not match header"
                )));
            }
            for cell in rec.iter().skip(1) {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| NetgraphError::Format(format!("bad number `{cell}`")))?;
                sim.push(v);
            }
        }
        Self::new(ids, sim)
    }
}

/// Similarity of every unordered pair of signatures, computed once each.
/// `workers = None` uses the global rayon pool.
pub fn pairwise_matrix(
    signatures: &[Signature],
    workers: Option<usize>,
) -> Result<SimilarityMatrix, NetgraphError> {
    let n = signatures.len();
    if n < 2 {
        return Err(NetgraphError::TooFew { needed: 2, got: n });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let compute = || -> Result<Vec<f64>, NetgraphError> {
        pairs
            .par_iter()
            .map(|&(i, j)| similarity(&signatures[i], &signatures[j]).map_err(NetgraphError::from))
            .collect()
    };
    let values = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| NetgraphError::Format(e.to_string()))?
            .install(compute)?,
        None => compute()?,
    };
    let mut sim = vec![1.0; n * n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        sim[i * n + j] = v;
        sim[j * n + i] = v;
    }
    let ids = signatures.iter().map(|s| s.user_id().to_string()).collect();
    SimilarityMatrix::new(ids, sim)
}

/// A similarity matrix with a class label on every node.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledNetwork {
    matrix: SimilarityMatrix,
    labels: BTreeMap<String, String>,
}

impl LabeledNetwork {
    pub fn new(
        matrix: SimilarityMatrix,
        labels: BTreeMap<String, String>,
    ) -> Result<Self, NetgraphError> {
        if let Some(id) = matrix.ids().iter().find(|id| !labels.contains_key(*id)) {
            return Err(NetgraphError::MissingLabel(id.clone()));
        }
        Ok(Self { matrix, labels })
    }

    pub fn matrix(&self) -> &SimilarityMatrix {
        &self.matrix
    }

    pub fn label(&self, id: &str) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    pub fn labels(&self) -> &BTreeMap<String, String> {
        &self.labels
    }

    /// Same matrix with a different labelling.
    pub fn with_labels(&self, labels: BTreeMap<String, String>) -> Result<Self, NetgraphError> {
        Self::new(self.matrix.clone(), labels)
    }
}

/// Majority label among the `n` most similar other nodes. Neighbours tied at
/// the cutoff are taken in id order; a tied vote goes to the label of the
/// most similar neighbour among the tied labels.
pub fn knn_predict(net: &LabeledNetwork, id: &str, n: usize) -> Result<String, NetgraphError> {
    let m = &net.matrix;
    let me = m
        .index_of(id)
        .ok_or_else(|| NetgraphError::UnknownId(id.to_string()))?;
    if n == 0 || n >= m.len() {
        return Err(NetgraphError::InvalidNeighbours { n, nodes: m.len() });
    }
    let mut others: Vec<usize> = (0..m.len()).filter(|&j| j != me).collect();
    others.sort_by(|&a, &b| {
        m.get(me, b)
            .total_cmp(&m.get(me, a))
            .then_with(|| m.ids[a].cmp(&m.ids[b]))
    });
    let neighbours = &others[..n];

    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for &j in neighbours {
        *votes.entry(net.labels[&m.ids[j]].as_str()).or_insert(0) += 1;
    }
    let top = *votes.values().max().expect("n >= 1");
    let winner = neighbours
        .iter()
        .map(|&j| net.labels[&m.ids[j]].as_str())
        .find(|l| votes[l] == top)
        .expect("some label reaches the maximum");
    Ok(winner.to_string())
}

/// Leave-one-out accuracy of [`knn_predict`] over all nodes.
pub fn knn_accuracy(net: &LabeledNetwork, n: usize) -> Result<f64, NetgraphError> {
    let ids = net.matrix.ids();
    if ids.is_empty() {
        return Err(NetgraphError::TooFew { needed: 2, got: 0 });
    }
    let mut correct = 0usize;
    for id in ids {
        if knn_predict(net, id, n)? == net.labels[id] {
            correct += 1;
        }
    }
    Ok(correct as f64 / ids.len() as f64)
}

/// Classical MDS of a similarity matrix via dissimilarities `1 - sim`.
pub fn mds_layout(matrix: &SimilarityMatrix) -> Result<Vec<[f64; 2]>, NetgraphError> {
    let d: Vec<f64> = matrix.values().iter().map(|s| 1.0 - s).collect();
    classical_mds(&d, matrix.len())
}

/// Torgerson scaling of a row-major `n x n` dissimilarity matrix into the
/// plane. Each output column is centred; its sign is fixed so that the entry
/// of largest magnitude (first on ties) is positive.
pub fn classical_mds(dissimilarities: &[f64], n: usize) -> Result<Vec<[f64; 2]>, NetgraphError> {
    if n < 3 {
        return Err(NetgraphError::TooFew { needed: 3, got: n });
    }
    if dissimilarities.len() != n * n {
        return Err(NetgraphError::Format(format!(
            "expected {} dissimilarities, got {}",
            n * n,
            dissimilarities.len()
        )));
    }
    let d2 = DMatrix::from_row_slice(n, n, dissimilarities).map(|x| x * x);
    let j = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let b = (&j * d2 * &j) * -0.5;
    let b = (&b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::new(b);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    if eig.eigenvalues[order[0]] <= 0.0 {
        return Err(NetgraphError::DegenerateSpectrum);
    }

    let mut coords = vec![[0.0; 2]; n];
    for (c, &e) in order.iter().take(2).enumerate() {
        let scale = eig.eigenvalues[e].max(0.0).sqrt();
        let v = eig.eigenvectors.column(e);
        let pivot = (0..n).fold(
            0,
            |best, i| if v[i].abs() > v[best].abs() { i } else { best },
        );
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, row) in coords.iter_mut().enumerate() {
            row[c] = sign * scale * v[i];
        }
    }
    Ok(coords)
}

/// `id,x,y,label` rows; the label column is empty for unlabelled ids.
pub fn layout_to_csv(
    ids: &[String],
    coords: &[[f64; 2]],
    labels: Option<&BTreeMap<String, String>>,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "x", "y", "label"])
        .expect("in-memory write");
    for (id, [x, y]) in ids.iter().zip(coords) {
        let label = labels
            .and_then(|l| l.get(id))
            .map(String::as_str)
            .unwrap_or("");
        w.write_record([id.as_str(), &x.to_string(), &y.to_string(), label])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Reads `id,label` rows (header required).
pub fn labels_from_csv(text: &str) -> Result<BTreeMap<String, String>, NetgraphError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| NetgraphError::Format(e.to_string()))?;
        match (rec.get(0), rec.get(1)) {
            (Some(id), Some(label)) => {
                out.insert(id.to_string(), label.to_string());
            }
            _ => return Err(NetgraphError::Format("label rows need id,label".into())),
        }
    }
    Ok(out)
}

pub fn labels_to_csv(labels: &BTreeMap<String, String>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "label"]).expect("in-memory write");
    for (id, label) in labels {
        w.write_record([id, label]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}
