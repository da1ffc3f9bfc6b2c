use serde::Serialize;

use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaResult {
    /// `d × d`; row `r` is the r-th principal axis.
    pub components: Matrix,
    /// Eigenvalues of the population covariance, descending.
    pub explained_variance: Vec<f64>,
    /// `v × d` scores of the centered data on each axis.
    pub projections: Matrix,
    pub mean: Vec<f64>,
}

impl PcaResult {
    pub fn total_variance(&self) -> f64 {
        self.explained_variance.iter().sum()
    }

    /// Maps scores back to the original coordinates.
    pub fn reconstruct(&self) -> Matrix {
        let (v, d) = (self.projections.rows(), self.components.cols());
        let mut out = Matrix::zeros(v, d);
        for i in 0..v {
            let scores = self.projections.row(i);
            let row = out.row_mut(i);
            row.copy_from_slice(&self.mean);
            for (r, s) in scores.iter().enumerate() {
                for (x, c) in row.iter_mut().zip(self.components.row(r)) {
                    *x += s * c;
                }
            }
        }
        out
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and a matrix whose columns are the
/// corresponding unit eigenvectors.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::value("matrix is not square"));
    }
    let mut m = a.clone();
    let mut vecs = Matrix::zeros(n, n);
    for i in 0..n {
        vecs.set(i, i, 1.0);
    }
    let scale: f64 = m.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).powi(2))
            .sum();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let (mpk, mqk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let (vkp, vkq) = (vecs.get(k, p), vecs.get(k, q));
                    vecs.set(k, p, c * vkp - s * vkq);
                    vecs.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    Ok(((0..n).map(|i| m.get(i, i)).collect(), vecs))
}

/// Principal axes of `x` (centered internally), sorted by explained variance.
/// Each axis is signed so that its largest-magnitude coordinate is positive.
pub fn pca(x: &Matrix) -> Result<PcaResult> {
    if !x.is_finite() {
        return Err(Error::value("non-finite input to pca"));
    }
    let (v, d) = (x.rows(), x.cols());
    if v == 0 || d == 0 {
        return Err(Error::value("empty input to pca"));
    }
    let mean = x.column_means();
    let mut cov = Matrix::zeros(d, d);
    for row in x.iter_rows() {
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                let value = cov.get(a, b) + da * (row[b] - mean[b]);
                cov.set(a, b, value);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let value = cov.get(a, b) / v as f64;
            cov.set(a, b, value);
            cov.set(b, a, value);
        }
    }

    let (values, vecs) = symmetric_eigen(&cov)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut components = Matrix::zeros(d, d);
    let mut explained_variance = Vec::with_capacity(d);
    for (r, &col) in order.iter().enumerate() {
        let mut axis: Vec<f64> = (0..d).map(|k| vecs.get(k, col)).collect();
        let mut pivot = 0;
        for k in 1..d {
            if axis[k].abs() > axis[pivot].abs() {
                pivot = k;
            }
        }
        if axis[pivot] < 0.0 {
            axis.iter_mut().for_each(|a| *a = -*a);
        }
        components.row_mut(r).copy_from_slice(&axis);
        explained_variance.push(values[col].max(0.0));
    }

    let mut projections = Matrix::zeros(v, d);
    for i in 0..v {
        let row = x.row(i);
        for r in 0..d {
            let score = components
                .row(r)
                .iter()
                .zip(row.iter().zip(&mean))
                .map(|(c, (xv, m))| c * (xv - m))
                .sum();
            projections.set(i, r, score);
        }
    }
    Ok(PcaResult { components, explained_variance, projections, mean })
}
