//! Population-split regression. A global model trains one regressor on all
//! rows; the fleet model partitions the training rows (k-means on
//! standardized features, or caller-provided group labels), trains one
//! regressor per sub-population, and routes each test row to the model of
//! its nearest sub-population.
//!
//! Per-cluster fit seeds are derived from (seed, cluster key), with the
//! global model using key 0. A single-cluster fleet model therefore trains
//! bit-identically to the global model, and in label mode removing one group
//! leaves every other group's seed and training rows untouched.

use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans_fit_traced, KMeansModel, KMeansParams};
use crate::error::{Error, Result};
use crate::regressors::{FittedRegressor, RegressorSpec};
use crate::rng::mix;
use crate::tabular::{kfold_split, Dataset, FoldMetrics, MetricsReport, Scaler};

const TAG_FIT: u64 = 0xF175;
const TAG_CV: u64 = 0xCF01;

pub(crate) fn fit_seed(seed: u64, cluster_key: u64) -> u64 {
    mix(mix(seed, TAG_FIT), cluster_key)
}

pub(crate) fn fold_seed(seed: u64, fold: usize) -> u64 {
    mix(mix(seed, TAG_CV), fold as u64)
}

/// How to evaluate a dataset: one regressor for everything, or one per
/// sub-population with the stated partitioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Global,
    FbrKmeans { k: usize },
    FbrLabels,
}

/// Partitioning rule handed to `train_fbr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Partition {
    Kmeans { k: usize },
    ProvidedLabels,
}

/// Test-time routing in standardized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Router {
    Kmeans(KMeansModel),
    /// Nearest group mean, for partitions that came with labels instead of
    /// fitted centroids.
    GroupMeans { means: Vec<Vec<f64>> },
}

impl Router {
    pub fn route(&self, z: &[f64]) -> Result<usize> {
        match self {
            Router::Kmeans(model) => model.assign(z),
            Router::GroupMeans { means } => {
                let dim = means[0].len();
                if z.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: z.len() });
                }
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, m) in means.iter().enumerate() {
                    let d: f64 = m.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best_d {
                        best = i;
                        best_d = d;
                    }
                }
                Ok(best)
            }
        }
    }

    pub fn n_outputs(&self) -> usize {
        match self {
            Router::Kmeans(model) => model.k,
            Router::GroupMeans { means } => means.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalModel {
    pub model: FittedRegressor,
    pub scaler: Scaler,
}

impl GlobalModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.model.predict(&self.scaler.transform_row(x)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbrModel {
    pub router: Router,
    /// Redirects each router output to its local model, absorbing merged
    /// small clusters; indexed by raw router output.
    pub cluster_to_model: Vec<usize>,
    pub local_models: Vec<FittedRegressor>,
    pub spec: RegressorSpec,
    pub scaler: Scaler,
    pub warnings: Vec<String>,
}

impl FbrModel {
    /// Prediction plus the id of the local model that produced it.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, usize)> {
        let z = self.scaler.transform_row(x)?;
        let raw = self.router.route(&z)?;
        let m = self.cluster_to_model[raw];
        Ok((self.local_models[m].predict(&z)?, m))
    }
}

pub fn train_global(train: &Dataset, spec: &RegressorSpec, seed: u64) -> Result<GlobalModel> {
    let scaler = Scaler::fit(&train.features)?;
    let z = scaler.transform(&train.features)?;
    let model = spec.fit(&z, &train.target, fit_seed(seed, 0))?;
    Ok(GlobalModel { model, scaler })
}

struct Group {
    /// Stable key for seed derivation: k-means cluster id, or the original
    /// label value in label mode.
    key: u64,
    rows: Vec<usize>,
    center: Vec<f64>,
    merged_into: Option<usize>,
}

/// Fold clusters smaller than `min_size` into their nearest surviving
/// neighbor (centroid L2), recording one warning per merge. Stops when all
/// survivors are large enough or only one remains.
fn merge_small_groups(groups: &mut [Group], min_size: usize, warnings: &mut Vec<String>) {
    loop {
        let survivors: Vec<usize> =
            (0..groups.len()).filter(|&g| groups[g].merged_into.is_none()).collect();
        if survivors.len() <= 1 {
            return;
        }
        let Some(&small) = survivors
            .iter()
            .filter(|&&g| groups[g].rows.len() < min_size)
            .min_by_key(|&&g| (groups[g].rows.len(), g))
        else {
            return;
        };
        let target = survivors
            .iter()
            .copied()
            .filter(|&g| g != small)
            .min_by(|&a, &b| {
                let da: f64 = groups[a]
                    .center
                    .iter()
                    .zip(&groups[small].center)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                let db: f64 = groups[b]
                    .center
                    .iter()
                    .zip(&groups[small].center)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                da.partial_cmp(&db).expect("finite centers").then(a.cmp(&b))
            })
            .expect("at least two survivors");
        warnings.push(format!(
            "cluster {} ({} rows) merged into cluster {}",
            groups[small].key,
            groups[small].rows.len(),
            groups[target].key
        ));
        let moved = std::mem::take(&mut groups[small].rows);
        groups[target].rows.extend(moved);
        groups[small].merged_into = Some(target);
    }
}

pub fn train_fbr(
    train: &Dataset,
    spec: &RegressorSpec,
    partition: Partition,
    seed: u64,
) -> Result<FbrModel> {
    let scaler = Scaler::fit(&train.features)?;
    let z = scaler.transform(&train.features)?;

    let (router, mut groups) = match partition {
        Partition::Kmeans { k } => {
            let (model, assignment, _) =
                kmeans_fit_traced(&z, k, seed, &KMeansParams::default())?;
            let mut groups: Vec<Group> = model
                .centroids
                .iter()
                .enumerate()
                .map(|(g, c)| Group {
                    key: g as u64,
                    rows: Vec::new(),
                    center: c.clone(),
                    merged_into: None,
                })
                .collect();
            for (row, &g) in assignment.iter().enumerate() {
                groups[g].rows.push(row);
            }
            (Router::Kmeans(model), groups)
        }
        Partition::ProvidedLabels => {
            let labels = train.cluster_labels.as_ref().ok_or_else(|| {
                Error::InvalidData("label partitioning needs a dataset with cluster labels".into())
            })?;
            let mut distinct: Vec<usize> = labels.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            let mut groups: Vec<Group> = distinct
                .iter()
                .map(|&label| Group {
                    key: label as u64,
                    rows: Vec::new(),
                    center: vec![0.0; train.k()],
                    merged_into: None,
                })
                .collect();
            for (row, &label) in labels.iter().enumerate() {
                let g = distinct.binary_search(&label).expect("built from labels");
                groups[g].rows.push(row);
            }
            for group in &mut groups {
                for &row in &group.rows {
                    for (c, v) in group.center.iter_mut().zip(&z[row]) {
                        *c += v;
                    }
                }
                for c in &mut group.center {
                    *c /= group.rows.len() as f64;
                }
            }
            let means = groups.iter().map(|g| g.center.clone()).collect();
            (Router::GroupMeans { means }, groups)
        }
    };

    let min_size = spec.min_rows().max(5);
    let mut warnings = Vec::new();
    merge_small_groups(&mut groups, min_size, &mut warnings);

    let survivors: Vec<usize> =
        (0..groups.len()).filter(|&g| groups[g].merged_into.is_none()).collect();
    let mut local_models = Vec::with_capacity(survivors.len());
    for &g in &survivors {
        let group = &groups[g];
        if group.rows.len() < spec.min_rows() {
            return Err(Error::ClusterTooSmall {
                cluster: group.key as usize,
                size: group.rows.len(),
                minimum: spec.min_rows(),
            });
        }
        let mut rows = group.rows.clone();
        rows.sort_unstable();
        let gx: Vec<Vec<f64>> = rows.iter().map(|&r| z[r].clone()).collect();
        let gy: Vec<f64> = rows.iter().map(|&r| train.target[r]).collect();
        local_models.push(spec.fit(&gx, &gy, fit_seed(seed, group.key))?);
    }

    // raw router output -> surviving model index, following merge chains
    let cluster_to_model: Vec<usize> = (0..groups.len())
        .map(|mut g| {
            while let Some(next) = groups[g].merged_into {
                g = next;
            }
            survivors.iter().position(|&s| s == g).expect("chains end at survivors")
        })
        .collect();

    Ok(FbrModel {
        router,
        cluster_to_model,
        local_models,
        spec: spec.clone(),
        scaler,
        warnings,
    })
}

/// One held-out prediction from cross-validation. `cluster` is the local
/// model id for fleet modes, absent for the global mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPrediction {
    pub row_id: usize,
    pub fold: usize,
    pub cluster: Option<usize>,
    pub y_true: f64,
    pub y_pred: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub report: MetricsReport,
    pub predictions: Vec<FoldPrediction>,
}

/// Shuffled k-fold evaluation of one (spec, mode) pair. Every fold refits
/// the scaler and model(s) on its own training rows; metrics are computed on
/// the raw held-out targets and aggregated as mean and sample std.
pub fn cross_validate(
    data: &Dataset,
    spec: &RegressorSpec,
    mode: &Mode,
    folds: usize,
    seed: u64,
) -> Result<CvOutcome> {
    let plan = kfold_split(data.n(), folds, seed)?;
    let mut per_fold = Vec::with_capacity(folds);
    let mut predictions = Vec::new();
    let mut mape_excluded = 0;
    let mut warnings = Vec::new();

    for fold in 0..folds {
        let train_idx = plan.train_indices(fold);
        let test_idx = plan.test_indices(fold);
        let train = data.subset(&train_idx);
        let seed_f = fold_seed(seed, fold);

        let mut y_pred = Vec::with_capacity(test_idx.len());
        let mut clusters = Vec::with_capacity(test_idx.len());
        match mode {
            Mode::Global => {
                let model = train_global(&train, spec, seed_f)?;
                for &row in &test_idx {
                    y_pred.push(model.predict(&data.features[row])?);
                    clusters.push(None);
                }
            }
            Mode::FbrKmeans { k } => {
                let model = train_fbr(&train, spec, Partition::Kmeans { k: *k }, seed_f)?;
                for w in &model.warnings {
                    warnings.push(format!("fold {fold}: {w}"));
                }
                for &row in &test_idx {
                    let (pred, cluster) = model.predict(&data.features[row])?;
                    y_pred.push(pred);
                    clusters.push(Some(cluster));
                }
            }
            Mode::FbrLabels => {
                let model = train_fbr(&train, spec, Partition::ProvidedLabels, seed_f)?;
                for w in &model.warnings {
                    warnings.push(format!("fold {fold}: {w}"));
                }
                for &row in &test_idx {
                    let (pred, cluster) = model.predict(&data.features[row])?;
                    y_pred.push(pred);
                    clusters.push(Some(cluster));
                }
            }
        }

        let y_true: Vec<f64> = test_idx.iter().map(|&r| data.target[r]).collect();
        let (fm, excluded) = FoldMetrics::compute(&y_true, &y_pred)?;
        per_fold.push(fm);
        mape_excluded += excluded;
        for (j, &row) in test_idx.iter().enumerate() {
            predictions.push(FoldPrediction {
                row_id: row,
                fold,
                cluster: clusters[j],
                y_true: y_true[j],
                y_pred: y_pred[j],
            });
        }
    }

    let report = MetricsReport::from_folds(per_fold, mape_excluded, warnings)?;
    Ok(CvOutcome { report, predictions })
}
