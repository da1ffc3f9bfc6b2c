use std::ops::RangeInclusive;

use rand::Rng;
use serde::Serialize;

use super::{squared_distance, Matrix};
use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansResult {
    pub k: usize,
    pub centroids: Matrix,
    pub assignment: Vec<usize>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    pub iterations: usize,
    /// WCSS after each centroid update.
    pub wcss_history: Vec<f64>,
}

fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.rows() {
        let d = squared_distance(point, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(x: &Matrix, k: usize, rng: &mut StreamRng) -> Matrix {
    let v = x.rows();
    let mut chosen = vec![rng.random_range(0..v)];
    let mut d2: Vec<f64> = (0..v).map(|i| squared_distance(x.row(i), x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = v - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&w| w > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // every point coincides with a centroid already
            let free: Vec<usize> = (0..v).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(x.row(i), x.row(next)));
        }
    }
    let mut centroids = Matrix::zeros(k, x.cols());
    for (c, &i) in chosen.iter().enumerate() {
        centroids.row_mut(c).copy_from_slice(x.row(i));
    }
    centroids
}

/// Assigns every point to its nearest centroid, then gives each empty
/// cluster the point farthest from its own centroid.
fn assign(x: &Matrix, centroids: &mut Matrix) -> Vec<usize> {
    let k = centroids.rows();
    let mut labels = Vec::with_capacity(x.rows());
    let mut dist = Vec::with_capacity(x.rows());
    let mut sizes = vec![0usize; k];
    for i in 0..x.rows() {
        let (c, d) = nearest(x.row(i), centroids);
        labels.push(c);
        dist.push(d);
        sizes[c] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..x.rows())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
            .expect("k <= number of points");
        sizes[labels[donor]] -= 1;
        labels[donor] = empty;
        sizes[empty] = 1;
        dist[donor] = 0.0;
        centroids.row_mut(empty).copy_from_slice(x.row(donor));
    }
    labels
}

fn update_centroids(x: &Matrix, labels: &[usize], k: usize) -> Matrix {
    let mut sums = Matrix::zeros(k, x.cols());
    let mut counts = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        for (s, v) in sums.row_mut(c).iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        sums.row_mut(c).iter_mut().for_each(|s| *s /= n as f64);
    }
    sums
}

fn wcss(x: &Matrix, labels: &[usize], centroids: &Matrix) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| squared_distance(x.row(i), centroids.row(c)))
        .sum()
}

/// One k-means run: k-means++ seeding followed by Lloyd iterations until the
/// assignment stops changing or `max_iter` updates have run.
pub fn kmeans(x: &Matrix, k: usize, seed: u64, max_iter: usize) -> Result<KMeansResult> {
    if k == 0 || k > x.rows() {
        return Err(Error::arg(format!("k must be in 1..={}, got {k}", x.rows())));
    }
    if !x.is_finite() {
        return Err(Error::value("non-finite input to kmeans"));
    }
    let mut rng = substream(seed, &[0x4b, k as u64]);
    let mut centroids = plus_plus_init(x, k, &mut rng);
    let mut labels = assign(x, &mut centroids);
    let mut history = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        centroids = update_centroids(x, &labels, k);
        history.push(wcss(x, &labels, &centroids));
        let next = assign(x, &mut centroids);
        if next == labels {
            break;
        }
        labels = next;
    }
    let centroids = update_centroids(x, &labels, k);
    Ok(KMeansResult {
        k,
        wcss: wcss(x, &labels, &centroids),
        centroids,
        assignment: labels,
        iterations,
        wcss_history: history,
    })
}

/// Best (lowest WCSS) of `restarts` independent runs.
pub fn kmeans_best_of(x: &Matrix, k: usize, seed: u64, max_iter: usize, restarts: usize) -> Result<KMeansResult> {
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts.max(1) {
        let run = kmeans(x, k, crate::rng::derive_seed(seed, &[r as u64]), max_iter)?;
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElbowPoint {
    pub k: usize,
    pub wcss: f64,
}

/// WCSS of the best-of-10 k-means solution for each `k` in `ks`.
pub fn elbow_curve(x: &Matrix, ks: RangeInclusive<usize>, seed: u64) -> Result<Vec<ElbowPoint>> {
    let ks: Vec<usize> = ks.collect();
    let run = |&k: &usize| {
        kmeans_best_of(x, k, seed, DEFAULT_MAX_ITER, DEFAULT_RESTARTS).map(|r| ElbowPoint { k, wcss: r.wcss })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ks.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ks.iter().map(run).collect()
    }
}
