//! Post-training analysis of the embedding table.

mod kmeans;
mod pca;
mod stats;

use serde::Serialize;

pub use kmeans::{elbow_curve, kmeans, kmeans_best_of, ElbowPoint, KMeansResult, DEFAULT_RESTARTS};
pub use pca::{pca, symmetric_eigen, PcaResult};
pub use stats::{
    metric_correlations, metric_correlations_from_columns, pearson, per_minute_metrics, t_p_value,
    t_statistic, CorrelationRow, DEFAULT_ALPHA,
};

use crate::error::{Error, Result};
use crate::ingest::PlayerRegistry;
use crate::model::EmbeddingModel;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::value(format!(
                "{rows}×{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::value("ragged rows"));
        }
        Ok(Matrix { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn embeddings(model: &EmbeddingModel) -> Self {
        let c = model.config();
        Matrix {
            rows: c.vocab,
            cols: c.embed_dim,
            data: model.params().embeddings.clone(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for row in self.iter_rows() {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= self.rows as f64);
        means
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Column-wise z-scores (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardizedEmbeddings {
    pub scores: Matrix,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

pub fn standardize(x: &Matrix) -> Result<StandardizedEmbeddings> {
    if x.rows() < 2 {
        return Err(Error::SampleSize { required: 2, got: x.rows() });
    }
    if !x.is_finite() {
        return Err(Error::value("non-finite embedding entry"));
    }
    let means = x.column_means();
    let n = x.rows() as f64;
    let mut stds = vec![0.0; x.cols()];
    for row in x.iter_rows() {
        for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for (column, s) in stds.iter_mut().enumerate() {
        *s = (*s / n).sqrt();
        if !(*s > 1e-12 * (1.0 + means[column].abs())) {
            return Err(Error::DegenerateDimension { column });
        }
    }
    let mut scores = x.clone();
    for i in 0..scores.rows() {
        for ((v, m), s) in scores.row_mut(i).iter_mut().zip(&means).zip(&stds) {
            *v = (*v - m) / s;
        }
    }
    Ok(StandardizedEmbeddings { scores, means, stds })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: u32,
    pub distance: f64,
}

/// The `count` players closest to `player` in Euclidean distance, excluding
/// the player itself; ties go to the lower id.
pub fn nearest_neighbors(table: &Matrix, player: u32, count: usize) -> Result<Vec<Neighbor>> {
    let query = player as usize;
    if query >= table.rows() {
        return Err(Error::UnknownPlayer(player));
    }
    if count >= table.rows() {
        return Err(Error::arg(format!(
            "neighbor count must be below the number of players ({})",
            table.rows()
        )));
    }
    let origin = table.row(query);
    let mut all: Vec<(f64, u32)> = (0..table.rows())
        .filter(|&i| i != query)
        .map(|i| (squared_distance(origin, table.row(i)), i as u32))
        .collect();
    let by_distance = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if count < all.len() {
        all.select_nth_unstable_by(count, by_distance);
        all.truncate(count);
    }
    all.sort_by(by_distance);
    Ok(all
        .into_iter()
        .map(|(d2, id)| Neighbor { id, distance: d2.sqrt() })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub centroids: Matrix,
    pub wcss: f64,
}

/// Everything the `analyze` command reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    /// Which matrix PCA and clustering ran on.
    pub input: &'static str,
    pub standardized: StandardizedEmbeddings,
    pub pca: PcaResult,
    pub clusters: ClusterSummary,
    pub elbow: Vec<ElbowPoint>,
    pub correlations: Vec<CorrelationRow>,
}

pub const DEFAULT_CLUSTERS: usize = 3;
pub const ELBOW_MAX_K: usize = 10;

/// Standardizes the embedding table, then runs PCA, k-means (with an elbow
/// table for `k = 1..=10`) and the per-minute metric correlations on it.
pub fn analyze(model: &EmbeddingModel, registry: &PlayerRegistry, k: usize, seed: u64) -> Result<AnalysisReport> {
    if registry.len() != model.config().vocab {
        return Err(Error::value(format!(
            "registry has {} players but the model has {}",
            registry.len(),
            model.config().vocab
        )));
    }
    let standardized = standardize(&Matrix::embeddings(model))?;
    let x = &standardized.scores;
    let pca = pca(x)?;
    let best = kmeans_best_of(x, k, seed, kmeans::DEFAULT_MAX_ITER, DEFAULT_RESTARTS)?;
    let elbow = elbow_curve(x, 1..=ELBOW_MAX_K.min(x.rows()), seed)?;
    let correlations = metric_correlations(&pca.projections, registry, DEFAULT_ALPHA)?;
    Ok(AnalysisReport {
        input: "standardized embeddings",
        clusters: ClusterSummary {
            k,
            assignment: best.assignment,
            centroids: best.centroids,
            wcss: best.wcss,
        },
        standardized,
        pca,
        elbow,
        correlations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardize_two_points() {
        let x = Matrix::new(2, 1, vec![1.0, 3.0]).unwrap();
        let s = standardize(&x).unwrap();
        assert_eq!(s.scores.data(), &[-1.0, 1.0]);
        assert_eq!((s.means[0], s.stds[0]), (2.0, 1.0));
    }

    #[test]
    fn standardize_is_idempotent() {
        let x = Matrix::new(4, 2, vec![1.0, 0.5, 2.0, -1.0, 7.0, 3.0, 0.0, 2.5]).unwrap();
        let once = standardize(&x).unwrap().scores;
        let twice = standardize(&once).unwrap().scores;
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        for j in 0..2 {
            let col = once.column(j);
            let mean = col.iter().sum::<f64>() / 4.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-9 && (var.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_column_is_degenerate() {
        let x = Matrix::new(3, 2, vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0]).unwrap();
        assert!(matches!(standardize(&x), Err(Error::DegenerateDimension { column: 1 })));
    }

    #[test]
    fn neighbors_on_a_line() {
        let table = Matrix::new(3, 1, vec![0.0, 1.0, 5.0]).unwrap();
        let n = nearest_neighbors(&table, 0, 1).unwrap();
        assert_eq!(n[0].id, 1);
        assert_eq!(nearest_neighbors(&table, 2, 2).unwrap().iter().map(|n| n.id).collect::<Vec<_>>(), [1, 0]);
        assert!(nearest_neighbors(&table, 0, 0).unwrap().is_empty());
        assert!(matches!(nearest_neighbors(&table, 0, 3), Err(Error::Argument(_))));
        assert!(matches!(nearest_neighbors(&table, 3, 1), Err(Error::UnknownPlayer(3))));
    }

    #[test]
    fn duplicate_row_is_first_neighbor() {
        let table = Matrix::new(4, 2, vec![0.0, 0.0, 3.0, 3.0, 1.0, 1.0, 3.0, 3.0]).unwrap();
        let n = nearest_neighbors(&table, 3, 2).unwrap();
        assert_eq!((n[0].id, n[0].distance), (1, 0.0));
        assert_eq!(n[1].id, 2);
    }
}
