//! Clustering, label-aligned error rates, a ridge classifier, neighborhood
//! preservation, and a seeded Monte Carlo runner.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use pathfinding::prelude::{kuhn_munkres, Matrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::rng;
use crate::error::{Error, Result};
use crate::lneg::euclidean_knn;
use crate::par;

const MAX_LLOYD_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    /// Cluster index in `0..K` per sample.
    pub assignments: Vec<usize>,
    /// `d×K`, one centroid per column.
    #[serde(skip)]
    pub centroids: DMatrix<f64>,
    pub inertia: f64,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
    /// Final inertia of every restart.
    pub restart_inertias: Vec<f64>,
}

/// `Σ_i ‖x_i − c_{a(i)}‖²`.
pub fn inertia(x: &DMatrix<f64>, centroids: &DMatrix<f64>, assignments: &[usize]) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &a)| (x.column(i) - centroids.column(a)).norm_squared())
        .sum()
}

fn nearest(x: &DMatrix<f64>, centroids: &DMatrix<f64>, i: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.ncols() {
        let dist = (x.column(i) - centroids.column(c)).norm_squared();
        if dist < best.1 {
            best = (c, dist);
        }
    }
    best
}

fn kmeans_pp<R: Rng>(x: &DMatrix<f64>, k: usize, r: &mut R) -> DMatrix<f64> {
    let n = x.ncols();
    let mut centroids = DMatrix::zeros(x.nrows(), k);
    centroids.set_column(0, &x.column(r.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| (x.column(i) - centroids.column(0)).norm_squared())
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = r.random_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &v) in d2.iter().enumerate() {
                acc += v;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            r.random_range(0..n)
        };
        centroids.set_column(c, &x.column(pick));
        for (i, v) in d2.iter_mut().enumerate() {
            *v = v.min((x.column(i) - centroids.column(c)).norm_squared());
        }
    }
    centroids
}

struct Run {
    assignments: Vec<usize>,
    centroids: DMatrix<f64>,
    history: Vec<f64>,
}

fn lloyd(x: &DMatrix<f64>, mut centroids: DMatrix<f64>) -> Run {
    let (n, k) = (x.ncols(), centroids.ncols());
    let mut assignments = vec![usize::MAX; n];
    let mut history = Vec::new();
    for _ in 0..MAX_LLOYD_ITER {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (c, dist) = nearest(x, &centroids, i);
            dists[i] = dist;
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        history.push(dists.iter().sum());
        if !changed {
            break;
        }
        let mut sums = DMatrix::zeros(x.nrows(), k);
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            let mut col = sums.column_mut(a);
            col += x.column(i);
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                centroids.set_column(c, &(sums.column(c) / count as f64));
            }
        }
        // Empty clusters move onto the point farthest from its centroid.
        for c in (0..k).filter(|&c| counts[c] == 0) {
            let far = (0..n)
                .map(|i| (i, (x.column(i) - centroids.column(assignments[i])).norm_squared()))
                .fold((0, -1.0), |b, v| if v.1 > b.1 { v } else { b })
                .0;
            centroids.set_column(c, &x.column(far));
            assignments[far] = c;
        }
    }
    Run {
        assignments,
        centroids,
        history,
    }
}

/// K-means on the columns of `x` (`d×N`): k-means++ seeding followed by Lloyd
/// iterations, best of `restarts` by inertia. Empty clusters are reseeded at
/// the point farthest from its current centroid.
pub fn kmeans(x: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<ClusteringResult> {
    let n = x.ncols();
    if k == 0 || k > n {
        return Err(Error::param(format!("K must satisfy 1 <= K <= N = {n}, got {k}")));
    }
    if restarts == 0 {
        return Err(Error::param("restarts must be >= 1"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entries in clustering input".into()));
    }
    let mut r = rng(seed);
    let mut best: Option<(f64, Run)> = None;
    let mut restart_inertias = Vec::with_capacity(restarts);
    for _ in 0..restarts {
        let run = lloyd(x, kmeans_pp(x, k, &mut r));
        let value = inertia(x, &run.centroids, &run.assignments);
        restart_inertias.push(value);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, run));
        }
    }
    let (value, run) = best.expect("restarts >= 1");
    Ok(ClusteringResult {
        assignments: run.assignments,
        centroids: run.centroids,
        inertia: value,
        inertia_history: run.history,
        restart_inertias,
    })
}

/// Fraction of samples misassigned under the best one-to-one matching of
/// cluster ids to labels.
pub fn clustering_error(assignments: &[usize], labels: &[usize]) -> Result<f64> {
    if assignments.len() != labels.len() {
        return Err(Error::dim(format!(
            "{} assignments vs {} labels",
            assignments.len(),
            labels.len()
        )));
    }
    let n = labels.len();
    if n == 0 {
        return Ok(0.0);
    }
    let index = |v: &[usize]| {
        let mut ids: Vec<usize> = v.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    let (ca, cl) = (index(assignments), index(labels));
    let size = ca.len().max(cl.len());
    let mut counts = Matrix::new(size, size, 0i64);
    for (&a, &l) in assignments.iter().zip(labels) {
        let ia = ca.binary_search(&a).unwrap();
        let il = cl.binary_search(&l).unwrap();
        counts[(ia, il)] += 1;
    }
    let (matched, _) = kuhn_munkres(&counts);
    Ok(1.0 - matched as f64 / n as f64)
}

/// One-vs-rest ridge regression on `±1` targets with an unpenalized bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub classes: Vec<usize>,
    /// `(d+1)×C`; the last row is the bias.
    pub weights: DMatrix<f64>,
}

impl LinearClassifier {
    /// `x` is `d×n`, one training sample per column.
    pub fn fit(x: &DMatrix<f64>, labels: &[usize], ridge: f64) -> Result<Self> {
        if !(ridge > 0.0) {
            return Err(Error::param(format!("ridge must be > 0, got {ridge}")));
        }
        if x.ncols() != labels.len() || labels.is_empty() {
            return Err(Error::dim(format!(
                "{} samples vs {} labels",
                x.ncols(),
                labels.len()
            )));
        }
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let (d, n) = (x.nrows(), x.ncols());
        let mut aug = DMatrix::from_element(d + 1, n, 1.0);
        aug.rows_mut(0, d).copy_from(x);
        let mut a = &aug * aug.transpose();
        for m in 0..d {
            a[(m, m)] += ridge;
        }
        let targets = DMatrix::from_fn(n, classes.len(), |i, c| {
            if labels[i] == classes[c] {
                1.0
            } else {
                -1.0
            }
        });
        let rhs = &aug * targets;
        let weights = match a.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => {
                a[(d, d)] += ridge;
                a.lu().solve(&rhs).ok_or_else(|| Error::InvalidMatrix("singular classifier system".into()))?
            }
        };
        Ok(LinearClassifier { classes, weights })
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        let d = self.weights.nrows() - 1;
        if x.nrows() != d {
            return Err(Error::dim(format!("classifier expects {d} features, got {}", x.nrows())));
        }
        if self.classes.len() == 1 {
            return Ok(vec![self.classes[0]; x.ncols()]);
        }
        let w = self.weights.rows(0, d);
        let bias = self.weights.row(d);
        Ok(x
            .column_iter()
            .map(|col| {
                let scores = w.transpose() * col + bias.transpose();
                let mut best = 0;
                for c in 1..scores.len() {
                    if scores[c] > scores[best] {
                        best = c;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}

/// Misclassification rate of predictions against labels.
pub fn error_rate(predicted: &[usize], labels: &[usize]) -> f64 {
    let wrong = predicted.iter().zip(labels).filter(|(p, l)| p != l).count();
    wrong as f64 / labels.len().max(1) as f64
}

/// Mean fraction of each sample's `k` nearest neighbors in `y_high` that are
/// also among its `k` nearest neighbors in `psi`.
pub fn knn_preservation(y_high: &DMatrix<f64>, psi: &DMatrix<f64>, k: usize) -> Result<f64> {
    if y_high.ncols() != psi.ncols() {
        return Err(Error::dim(format!(
            "{} high-dimensional samples vs {} embedded",
            y_high.ncols(),
            psi.ncols()
        )));
    }
    let high = euclidean_knn(y_high, k)?;
    let low = euclidean_knn(psi, k)?;
    let total: usize = high
        .iter()
        .zip(&low)
        .map(|(a, b)| a.iter().filter(|i| b.contains(i)).count())
        .sum();
    Ok(total as f64 / (k * high.len()) as f64)
}

pub type Metrics = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub per_trial: Vec<TrialRecord>,
    pub mean: Metrics,
    /// Sample standard deviation (zero for a single trial).
    pub std: Metrics,
    pub failures: usize,
}

impl MonteCarloSummary {
    pub fn mean_of(&self, key: &str) -> f64 {
        self.mean.get(key).copied().unwrap_or(f64::NAN)
    }

    pub fn std_of(&self, key: &str) -> f64 {
        self.std.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// Runs `trials` independent trials, trial `t` seeded with `base_seed + t`.
/// Failed trials are recorded and left out of the aggregates.
pub fn monte_carlo<F>(trials: usize, base_seed: u64, run: F) -> Result<MonteCarloSummary>
where
    F: Fn(u64) -> Result<Metrics> + Sync + Send,
{
    if trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }
    let per_trial: Vec<TrialRecord> = par::map_indices(trials, |t| {
        let seed = base_seed.wrapping_add(t as u64);
        match run(seed) {
            Ok(m) => TrialRecord {
                trial: t,
                seed,
                metrics: Some(m),
                error: None,
            },
            Err(e) => TrialRecord {
                trial: t,
                seed,
                metrics: None,
                error: Some(format!("{}: {e}", e.name())),
            },
        }
    });
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for rec in &per_trial {
        if let Some(m) = &rec.metrics {
            for (k, &v) in m {
                values.entry(k.clone()).or_default().push(v);
            }
        }
    }
    let mut mean = Metrics::new();
    let mut std = Metrics::new();
    for (k, v) in values {
        let (m, s) = mean_std(&v);
        mean.insert(k.clone(), m);
        std.insert(k, s);
    }
    Ok(MonteCarloSummary {
        failures: per_trial.iter().filter(|r| r.error.is_some()).count(),
        per_trial,
        mean,
        std,
    })
}

/// Arithmetic mean and sample standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn two_clouds() -> (DMatrix<f64>, Vec<usize>) {
        let x = dmatrix![0.0, 0.2, -0.2, 10.0, 10.2, 9.8; 0.0, 0.1, -0.1, 5.0, 5.1, 4.9];
        (x, vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn separated_clusters() {
        let (x, labels) = two_clouds();
        let r = kmeans(&x, 2, 5, 1).unwrap();
        assert_eq!(clustering_error(&r.assignments, &labels).unwrap(), 0.0);
        let within = 2.0 * (0.04 + 0.01) * 2.0;
        assert!((r.inertia - within).abs() < 1e-12);
        assert!((inertia(&x, &r.centroids, &r.assignments) - r.inertia).abs() < 1e-15);
    }

    #[test]
    fn kmeans_extremes() {
        let (x, _) = two_clouds();
        let all = kmeans(&x, 6, 3, 2).unwrap();
        assert_eq!(all.inertia, 0.0);
        let one = kmeans(&x, 1, 1, 2).unwrap();
        let mean = x.column_mean();
        assert!((one.centroids.column(0) - &mean).norm() < 1e-12);
        let total: f64 = x.column_iter().map(|c| (c - &mean).norm_squared()).sum();
        assert!((one.inertia - total).abs() < 1e-10);
    }

    #[test]
    fn kmeans_best_restart() {
        let x = DMatrix::from_fn(2, 40, |m, j| ((j * 7 + m * 3) as f64 * 1.3).sin());
        let r = kmeans(&x, 4, 10, 3).unwrap();
        let min = r.restart_inertias.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(r.inertia, min);
        assert!(r.inertia_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn error_examples() {
        assert_eq!(clustering_error(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 0.0);
        assert_eq!(clustering_error(&[5, 5, 2, 2], &[0, 0, 1, 1]).unwrap(), 0.0);
        assert_eq!(clustering_error(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap(), 0.5);
        assert!(clustering_error(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn error_with_unequal_alphabets() {
        // Three clusters against two labels: one cluster must go unmatched.
        let e = clustering_error(&[0, 1, 2, 2], &[0, 0, 1, 1]).unwrap();
        assert!((e - 0.25).abs() < 1e-15);
    }

    #[test]
    fn classifier_examples() {
        let (x, labels) = two_clouds();
        let model = LinearClassifier::fit(&x, &labels, 1e-3).unwrap();
        assert_eq!(model.predict(&x).unwrap(), labels);

        let same = LinearClassifier::fit(&x, &[4; 6], 1.0).unwrap();
        assert_eq!(same.predict(&x).unwrap(), vec![4; 6]);
        assert_eq!(model, LinearClassifier::fit(&x, &labels, 1e-3).unwrap());
        assert!(LinearClassifier::fit(&x, &labels, 0.0).is_err());
    }

    #[test]
    fn preservation_examples() {
        let y = DMatrix::from_fn(3, 15, |m, j| ((j * (m + 1)) as f64 * 0.77).cos() * (m + 1) as f64);
        let rot = dmatrix![0.0, 1.0, 0.0; -1.0, 0.0, 0.0; 0.0, 0.0, 1.0];
        assert_eq!(knn_preservation(&y, &(rot * &y), 4).unwrap(), 1.0);
        let other = DMatrix::from_fn(2, 15, |m, j| ((j + m) as f64).sqrt());
        assert_eq!(knn_preservation(&y, &other, 14).unwrap(), 1.0);
    }

    #[test]
    fn monte_carlo_aggregation() {
        let s = monte_carlo(4, 10, |_| Ok(Metrics::from([("x".into(), 2.0)]))).unwrap();
        assert_eq!((s.mean_of("x"), s.std_of("x")), (2.0, 0.0));
        let one = monte_carlo(1, 7, |seed| Ok(Metrics::from([("s".into(), seed as f64)]))).unwrap();
        assert_eq!(one.mean_of("s"), 7.0);
        let mixed = monte_carlo(3, 0, |seed| {
            if seed == 1 {
                Err(Error::DegenerateMixture)
            } else {
                Ok(Metrics::from([("s".into(), seed as f64)]))
            }
        })
        .unwrap();
        assert_eq!(mixed.failures, 1);
        assert_eq!(mixed.mean_of("s"), 1.0);
        assert!(mixed.per_trial[1].error.as_ref().unwrap().starts_with("DegenerateMixture"));
    }
}
