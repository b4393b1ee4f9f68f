//! k-means (Lloyd's algorithm, k-means++ seeding) and nearest-centroid
//! assignment. Assignment is what routes an unseen sample to the peer model
//! trained on its sub-population, so ties and determinism matter here.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;

const TAG_KMEANS: u64 = 0x4B4D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub max_iter: usize,
    /// Convergence threshold on the largest centroid movement (L2) in one
    /// update step.
    pub tol: f64,
    /// Independent restarts; the run with the lowest inertia wins.
    pub n_init: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams { max_iter: 300, tol: 1e-4, n_init: 10 }
    }
}

/// Fitted model. `inertia` is the sum of squared distances from each training
/// point to its assigned centroid, consistent with `centroids` (recomputing
/// it from the final assignment reproduces the stored value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    pub k: usize,
    pub inertia: f64,
    pub iterations_run: usize,
    pub seed: u64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the closest centroid and the squared distance to it. Strict
/// comparison keeps ties at the lowest index.
fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = sq_dist(&centroids[0], x);
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(c, x);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    (best, best_d)
}

fn assign_all(centroids: &[Vec<f64>], features: &[Vec<f64>], assignment: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, x) in features.iter().enumerate() {
        let (c, d) = nearest(centroids, x);
        assignment[i] = c;
        inertia += d;
    }
    inertia
}

/// k-means++: first center uniform over points, each later center drawn with
/// probability proportional to squared distance from the nearest chosen
/// center. Only points with positive weight can be drawn; if every distance
/// is zero (mass of duplicates) the draw falls back to uniform.
fn kmeanspp_init(features: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = features.len();
    let first = rng.random_range(0..n);
    let mut centers = vec![features[first].clone()];
    let mut d2: Vec<f64> = features.iter().map(|x| sq_dist(x, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total <= 0.0 {
            rng.random_range(0..n)
        } else {
            let target = rng.random_range(0.0..total);
            let mut cum = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                cum += w;
                if target < cum {
                    chosen = Some(i);
                    break;
                }
            }
            // cumulative rounding can leave target just past the final sum
            chosen.unwrap_or(n - 1)
        };
        let center = features[idx].clone();
        for (i, x) in features.iter().enumerate() {
            let d = sq_dist(x, &center);
            if d < d2[i] {
                d2[i] = d;
            }
        }
        centers.push(center);
    }
    centers
}

/// One Lloyd run from a given initialization. Returns centroids, the final
/// assignment (consistent with them), the inertia, iterations used, and the
/// inertia recorded after every assignment step. The trace is non-increasing:
/// mean updates cannot raise the objective for a fixed assignment, reseeding
/// an empty centroid touches no assigned point, and reassignment only moves
/// points closer.
fn lloyd(
    features: &[Vec<f64>],
    mut centroids: Vec<Vec<f64>>,
    params: &KMeansParams,
) -> (Vec<Vec<f64>>, Vec<usize>, f64, usize, Vec<f64>) {
    let n = features.len();
    let k = centroids.len();
    let dim = features[0].len();
    let mut assignment = vec![0usize; n];
    let mut trace = Vec::new();
    let mut inertia = assign_all(&centroids, features, &mut assignment);
    trace.push(inertia);
    let mut iterations_run = 0;

    for _ in 0..params.max_iter {
        iterations_run += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &c) in features.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut new_centroids: Vec<Vec<f64>> = (0..k)
            .map(|c| {
                if counts[c] == 0 {
                    centroids[c].clone() // placeholder, repaired below
                } else {
                    sums[c].iter().map(|s| s / counts[c] as f64).collect()
                }
            })
            .collect();

        // Empty-cluster repair: move each empty centroid onto the point
        // currently farthest from its own (updated) centroid, one point per
        // empty cluster.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut dist: Vec<f64> = features
                .iter()
                .zip(&assignment)
                .map(|(x, &c)| sq_dist(x, &new_centroids[c]))
                .collect();
            for e in empties {
                let farthest = dist
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite distances"))
                    .map(|(i, _)| i)
                    .expect("nonempty data");
                new_centroids[e] = features[farthest].clone();
                dist[farthest] = -1.0;
            }
        }

        let shift = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0_f64, f64::max);
        centroids = new_centroids;
        inertia = assign_all(&centroids, features, &mut assignment);
        trace.push(inertia);
        if shift < params.tol {
            break;
        }
    }
    (centroids, assignment, inertia, iterations_run, trace)
}

fn validate_features(features: &[Vec<f64>], k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if features.is_empty() {
        return Err(Error::InvalidData("cannot cluster an empty matrix".into()));
    }
    if k > features.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {} exceeds the number of points ({})",
            k,
            features.len()
        )));
    }
    let dim = features[0].len();
    if dim == 0 {
        return Err(Error::InvalidData("points must have at least one dimension".into()));
    }
    for row in features {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("clustering input must be finite".into()));
        }
    }
    Ok(())
}

pub fn kmeans_fit(features: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansModel> {
    kmeans_fit_with(features, k, seed, &KMeansParams::default())
}

pub fn kmeans_fit_with(
    features: &[Vec<f64>],
    k: usize,
    seed: u64,
    params: &KMeansParams,
) -> Result<KMeansModel> {
    kmeans_fit_traced(features, k, seed, params).map(|(model, _, _)| model)
}

/// Like `kmeans_fit_with` but also returns the winning restart's final
/// assignment and its per-assignment inertia trace (for validating the
/// descent property).
#[allow(clippy::type_complexity)]
pub fn kmeans_fit_traced(
    features: &[Vec<f64>],
    k: usize,
    seed: u64,
    params: &KMeansParams,
) -> Result<(KMeansModel, Vec<usize>, Vec<f64>)> {
    validate_features(features, k)?;
    if params.n_init < 1 || params.max_iter < 1 {
        return Err(Error::InvalidConfig("n_init and max_iter must be at least 1".into()));
    }
    let mut best: Option<(Vec<Vec<f64>>, Vec<usize>, f64, usize, Vec<f64>)> = None;
    for restart in 0..params.n_init {
        let mut rng = stream(seed, &[TAG_KMEANS, restart as u64]);
        let init = kmeanspp_init(features, k, &mut rng);
        let run = lloyd(features, init, params);
        let better = match &best {
            None => true,
            Some(b) => run.2 < b.2,
        };
        if better {
            best = Some(run);
        }
    }
    let (centroids, assignment, inertia, iterations_run, trace) = best.expect("n_init >= 1");
    let model = KMeansModel { centroids, k, inertia, iterations_run, seed };
    Ok((model, assignment, trace))
}

impl KMeansModel {
    /// Nearest centroid by squared L2 distance; ties go to the lowest id.
    pub fn assign(&self, x: &[f64]) -> Result<usize> {
        let dim = self.centroids[0].len();
        if x.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
        }
        Ok(nearest(&self.centroids, x).0)
    }

    pub fn assign_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.iter().map(|x| self.assign(x)).collect()
    }
}
