//! Local surrogate explanations. Each prediction is explained by sampling
//! perturbations around the query in standardized feature space, weighting
//! them by proximity, and fitting a weighted linear surrogate to the model's
//! outputs; the surrogate's signed coefficients are the feature importances.
//! Consistency of a model's explanations within a cluster is summarized by
//! pairwise L2 distances between importance vectors.

use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbr::{FbrModel, GlobalModel};
use crate::linalg::solve_spd;
use crate::rng::{mix, stream};

const TAG_LIME: u64 = 0x11AE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    pub n_perturbations: usize,
    pub kernel_width: f64,
    /// Per-feature sampling std around the query, in standardized space.
    pub perturbation_std: Vec<f64>,
    pub seed: u64,
}

impl LimeConfig {
    /// Defaults for a K-feature problem: 1000 perturbations, kernel width
    /// 0.75 * sqrt(K), unit perturbation std.
    pub fn new(k: usize, seed: u64) -> LimeConfig {
        LimeConfig {
            n_perturbations: 1000,
            kernel_width: 0.75 * (k as f64).sqrt(),
            perturbation_std: vec![1.0; k],
            seed,
        }
    }

    // the negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.n_perturbations < k + 2 {
            return Err(Error::InvalidConfig(format!(
                "n_perturbations must be at least K+2 = {}, got {}",
                k + 2,
                self.n_perturbations
            )));
        }
        if !(self.kernel_width > 0.0) {
            return Err(Error::InvalidConfig("kernel_width must be positive".into()));
        }
        if self.perturbation_std.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: self.perturbation_std.len() });
        }
        if self.perturbation_std.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig("perturbation_std must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    /// Signed surrogate coefficients, one per feature.
    pub importances: Vec<f64>,
    pub intercept: f64,
    pub sample_id: Option<usize>,
    pub cluster: Option<usize>,
    /// Weighted R^2 of the linear surrogate against the black-box outputs.
    pub surrogate_r2: f64,
    /// True when the weighted normal equations needed a diagonal jitter.
    pub regularized: bool,
}

/// Explain one standardized query against a black-box prediction function.
#[allow(clippy::needless_range_loop)]
pub fn lime_explain<F>(predict_fn: F, x: &[f64], cfg: &LimeConfig) -> Result<Explanation>
where
    F: Fn(&[f64]) -> f64,
{
    let k = x.len();
    cfg.validate(k)?;
    let mut rng = stream(cfg.seed, &[TAG_LIME]);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let n = cfg.n_perturbations;
    let mut weights = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    let kw2 = cfg.kernel_width * cfg.kernel_width;
    for _ in 0..n {
        let z: Vec<f64> = x
            .iter()
            .zip(&cfg.perturbation_std)
            .map(|(&xi, &s)| xi + s * unit.sample(&mut rng))
            .collect();
        let d2: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        weights.push((-d2 / kw2).exp());
        targets.push(predict_fn(&z));
        rows.push(z);
    }

    // weighted least squares with intercept: solve (A'WA) beta = A'W y for
    // A = [1 | z]
    let dim = k + 1;
    let mut gram = vec![vec![0.0; dim]; dim];
    let mut rhs = vec![0.0; dim];
    let mut arow = vec![0.0; dim];
    for ((z, &w), &y) in rows.iter().zip(&weights).zip(&targets) {
        arow[0] = 1.0;
        arow[1..].copy_from_slice(z);
        for p in 0..dim {
            rhs[p] += w * arow[p] * y;
            for q in p..dim {
                gram[p][q] += w * arow[p] * arow[q];
            }
        }
    }
    for p in 0..dim {
        for q in 0..p {
            gram[p][q] = gram[q][p];
        }
    }

    let (beta, regularized) = match solve_spd(&gram, &rhs) {
        Some(beta) => (beta, false),
        None => {
            let mut jittered = gram.clone();
            for (p, row) in jittered.iter_mut().enumerate() {
                row[p] += 1e-8;
            }
            let beta = solve_spd(&jittered, &rhs).ok_or_else(|| {
                Error::Singular("weighted surrogate system did not factor even with jitter".into())
            })?;
            (beta, true)
        }
    };

    let w_total: f64 = weights.iter().sum();
    let y_bar = weights.iter().zip(&targets).map(|(w, y)| w * y).sum::<f64>() / w_total;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for ((z, &w), &y) in rows.iter().zip(&weights).zip(&targets) {
        let fit = beta[0] + beta[1..].iter().zip(z).map(|(b, v)| b * v).sum::<f64>();
        ss_res += w * (y - fit) * (y - fit);
        ss_tot += w * (y - y_bar) * (y - y_bar);
    }
    let surrogate_r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };

    Ok(Explanation {
        importances: beta[1..].to_vec(),
        intercept: beta[0],
        sample_id: None,
        cluster: None,
        surrogate_r2,
        regularized,
    })
}

/// Explain raw rows against the global model. When `grouping` is given, each
/// explanation's cluster is set by routing the row through that fleet model,
/// so consistency can be compared cluster-by-cluster against the fleet's own
/// explanations. Row seeds derive from (cfg.seed, row id).
pub fn explain_global(
    model: &GlobalModel,
    rows: &[Vec<f64>],
    ids: &[usize],
    cfg: &LimeConfig,
    grouping: Option<&FbrModel>,
) -> Result<Vec<Explanation>> {
    if rows.len() != ids.len() {
        return Err(Error::DimensionMismatch { expected: rows.len(), got: ids.len() });
    }
    rows.iter()
        .zip(ids)
        .map(|(row, &id)| {
            let z = model.scaler.transform_row(row)?;
            let row_cfg = LimeConfig { seed: mix(cfg.seed, id as u64), ..cfg.clone() };
            let mut e = lime_explain(
                |q| model.model.predict(q).expect("dimension fixed by construction"),
                &z,
                &row_cfg,
            )?;
            e.sample_id = Some(id);
            if let Some(fleet) = grouping {
                let zf = fleet.scaler.transform_row(row)?;
                e.cluster = Some(fleet.cluster_to_model[fleet.router.route(&zf)?]);
            }
            Ok(e)
        })
        .collect()
}

/// Explain raw rows against a fleet model: each row is routed first and
/// explained against its own local model. Row seeds derive from
/// (cfg.seed, row id), matching `explain_global`.
pub fn explain_fbr(
    model: &FbrModel,
    rows: &[Vec<f64>],
    ids: &[usize],
    cfg: &LimeConfig,
) -> Result<Vec<Explanation>> {
    if rows.len() != ids.len() {
        return Err(Error::DimensionMismatch { expected: rows.len(), got: ids.len() });
    }
    rows.iter()
        .zip(ids)
        .map(|(row, &id)| {
            let z = model.scaler.transform_row(row)?;
            let local = &model.local_models[model.cluster_to_model[model.router.route(&z)?]];
            let row_cfg = LimeConfig { seed: mix(cfg.seed, id as u64), ..cfg.clone() };
            let mut e = lime_explain(
                |q| local.predict(q).expect("dimension fixed by construction"),
                &z,
                &row_cfg,
            )?;
            e.sample_id = Some(id);
            e.cluster = Some(model.cluster_to_model[model.router.route(&z)?]);
            Ok(e)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConsistency {
    pub mean_pairwise_distance: f64,
    pub std_pairwise_distance: f64,
    pub n_pairs: usize,
}

/// Per-cluster spread of explanations: mean and sample std of L2 distances
/// over all unordered pairs of importance vectors. Clusters contributing
/// fewer than two explanations are skipped with a warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub per_cluster: BTreeMap<usize, ClusterConsistency>,
    pub warnings: Vec<String>,
}

pub fn consistency(explanations: &[Explanation]) -> ConsistencyReport {
    let mut by_cluster: BTreeMap<usize, Vec<&Explanation>> = BTreeMap::new();
    let mut unclustered = 0usize;
    for e in explanations {
        match e.cluster {
            Some(c) => by_cluster.entry(c).or_default().push(e),
            None => unclustered += 1,
        }
    }
    let mut warnings = Vec::new();
    if unclustered > 0 {
        warnings.push(format!("{unclustered} explanations without a cluster were skipped"));
    }
    let mut per_cluster = BTreeMap::new();
    for (cluster, group) in by_cluster {
        if group.len() < 2 {
            warnings.push(format!(
                "cluster {cluster} has {} explanation(s); needs at least 2, skipped",
                group.len()
            ));
            continue;
        }
        let mut distances = Vec::with_capacity(group.len() * (group.len() - 1) / 2);
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                let d2: f64 = group[i]
                    .importances
                    .iter()
                    .zip(&group[j].importances)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                distances.push(d2.sqrt());
            }
        }
        // aggregate in sorted order so the report does not depend on how
        // the explanations were listed
        distances.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let mean = distances.iter().sum::<f64>() / distances.len() as f64;
        let std = if distances.len() < 2 {
            0.0
        } else {
            (distances.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
                / (distances.len() - 1) as f64)
                .sqrt()
        };
        per_cluster.insert(
            cluster,
            ClusterConsistency {
                mean_pairwise_distance: mean,
                std_pairwise_distance: std,
                n_pairs: distances.len(),
            },
        );
    }
    ConsistencyReport { per_cluster, warnings }
}

/// Per-feature mean of absolute importance across explanations.
pub fn mean_abs_importance(explanations: &[Explanation]) -> Result<Vec<f64>> {
    let Some(first) = explanations.first() else {
        return Err(Error::InvalidData("no explanations to aggregate".into()));
    };
    let k = first.importances.len();
    let mut sums = vec![0.0; k];
    for e in explanations {
        if e.importances.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: e.importances.len() });
        }
        for (s, v) in sums.iter_mut().zip(&e.importances) {
            *s += v.abs();
        }
    }
    for s in &mut sums {
        *s /= explanations.len() as f64;
    }
    Ok(sums)
}
