//! Synthetic regression data with planted sub-populations.
//!
//! The construction: draw one global line, place cluster centers on it (with
//! vertical noise), then give each cluster its own local line whose slope is
//! drawn from a distribution with the opposite sign of the global slope.
//! Pooled over clusters the target trends one way; within a cluster it trends
//! the other way. The scalar driver x0 is then wrapped in linearly and
//! quadratically correlated features plus pure-noise features.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::tabular::Dataset;

const TAG_LINE: u64 = 0x11E5;
const TAG_CENTERS: u64 = 0xCE27;
const TAG_CLUSTER: u64 = 0xC105;
const TAG_FEATURE: u64 = 0xFEA7;

fn three() -> usize {
    3
}

fn default_feature_noise() -> f64 {
    0.1
}

/// All knobs for one synthetic dataset. Distribution fields are (mean, std)
/// pairs; range fields are (lo, hi) intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub m_clusters: usize,
    pub samples_per_cluster: usize,
    pub global_slope_dist: (f64, f64),
    pub global_intercept_dist: (f64, f64),
    pub local_slope_dist: (f64, f64),
    pub local_intercept_dist: (f64, f64),
    pub center_x_range: (f64, f64),
    pub center_noise_std: f64,
    pub sample_noise_std: f64,
    pub cluster_spread: f64,
    #[serde(default = "three")]
    pub n_linear: usize,
    #[serde(default = "three")]
    pub n_quadratic: usize,
    #[serde(default = "three")]
    pub n_noise: usize,
    #[serde(default = "default_feature_noise")]
    pub feature_noise_std: f64,
    /// Pinned center x positions. When present they replace the uniform
    /// draw over center_x_range (length must equal m_clusters); center y
    /// values are still drawn. Omitted from JSON when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<f64>>,
    pub seed: u64,
}

/// Seed of the reference config, chosen by the scan in tests/seed_search.rs:
/// the partition is recovered exactly on the full data and every training
/// fold, the pooled-versus-within-cluster slope reversal holds, the global
/// ridge fit lands mid-window, and the fleet ridge fit is near-exact.
pub const CANONICAL_SEED: u64 = 11;

impl GeneratorConfig {
    /// The reference configuration every benchmark threshold in this crate
    /// is calibrated against. Centers are pinned symmetrically so the
    /// sub-populations stay well separated at every difficulty factor.
    pub fn canonical() -> GeneratorConfig {
        GeneratorConfig {
            m_clusters: 5,
            samples_per_cluster: 200,
            global_slope_dist: (2.0, 0.1),
            global_intercept_dist: (0.0, 1.0),
            local_slope_dist: (-1.0, 0.2),
            local_intercept_dist: (0.0, 0.2),
            center_x_range: (-30.0, 30.0),
            center_noise_std: 16.0,
            sample_noise_std: 0.5,
            cluster_spread: 2.0,
            n_linear: 3,
            n_quadratic: 3,
            n_noise: 3,
            feature_noise_std: 0.1,
            centers: Some(vec![-24.0, -16.0, 0.0, 16.0, 24.0]),
            seed: CANONICAL_SEED,
        }
    }

    /// Difficulty scaling: widen each cluster and its sample noise by
    /// `factor`, leaving the global geometry alone.
    pub fn scaled(&self, factor: f64) -> GeneratorConfig {
        let mut cfg = self.clone();
        cfg.cluster_spread *= factor;
        cfg.sample_noise_std *= factor;
        cfg
    }

    /// Total feature count: x0 plus the three expansion groups.
    pub fn k(&self) -> usize {
        1 + self.n_linear + self.n_quadratic + self.n_noise
    }

    pub fn n(&self) -> usize {
        self.m_clusters * self.samples_per_cluster
    }

    // the negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.m_clusters < 1 {
            return bad("m_clusters must be at least 1");
        }
        if self.samples_per_cluster < 2 {
            return bad("samples_per_cluster must be at least 2");
        }
        if !(self.center_x_range.0 < self.center_x_range.1) {
            return bad("center_x_range must satisfy lo < hi");
        }
        if !(self.cluster_spread > 0.0) {
            return bad("cluster_spread must be positive");
        }
        let stds = [
            ("global_slope_dist", self.global_slope_dist.1),
            ("global_intercept_dist", self.global_intercept_dist.1),
            ("local_slope_dist", self.local_slope_dist.1),
            ("local_intercept_dist", self.local_intercept_dist.1),
            ("center_noise_std", self.center_noise_std),
            ("sample_noise_std", self.sample_noise_std),
            ("feature_noise_std", self.feature_noise_std),
        ];
        for (name, std) in stds {
            if !(std >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name}: std must be non-negative")));
            }
        }
        let finite = [
            self.global_slope_dist.0,
            self.global_intercept_dist.0,
            self.local_slope_dist.0,
            self.local_intercept_dist.0,
            self.center_x_range.0,
            self.center_x_range.1,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("config values must be finite");
        }
        if let Some(centers) = &self.centers {
            if centers.len() != self.m_clusters {
                return Err(Error::InvalidConfig(format!(
                    "centers has {} entries but m_clusters is {}",
                    centers.len(),
                    self.m_clusters
                )));
            }
            if centers.iter().any(|c| !c.is_finite()) {
                return bad("centers must be finite");
            }
        }
        Ok(())
    }
}

/// Per-cluster generating parameters, recorded for evaluation against the
/// planted structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTruth {
    pub center_x: f64,
    pub center_y: f64,
    pub local_slope: f64,
    pub local_intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub global_slope: f64,
    pub global_intercept: f64,
    pub clusters: Vec<ClusterTruth>,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub data: Dataset,
    pub ground_truth: GroundTruth,
    pub config: GeneratorConfig,
}

fn normal<R: Rng>(rng: &mut R, mean: f64, std: f64) -> f64 {
    if std == 0.0 {
        mean
    } else {
        Normal::new(mean, std).expect("validated std").sample(rng)
    }
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

pub fn sample_global_line(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let slope = normal(rng, cfg.global_slope_dist.0, cfg.global_slope_dist.1);
    let intercept = normal(rng, cfg.global_intercept_dist.0, cfg.global_intercept_dist.1);
    (slope, intercept)
}

/// Centers sit on the global line plus vertical noise. x positions come from
/// the pinned list when provided, otherwise uniformly from center_x_range.
pub fn generate_centers(
    cfg: &GeneratorConfig,
    line: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    (0..cfg.m_clusters)
        .map(|i| {
            let x = match &cfg.centers {
                Some(pinned) => pinned[i],
                None => uniform(rng, cfg.center_x_range.0, cfg.center_x_range.1),
            };
            let y = line.0 * x + line.1 + normal(rng, 0.0, cfg.center_noise_std);
            (x, y)
        })
        .collect()
}

/// One cluster's (x0, y) points plus the local line that produced them.
/// y deviates from the center along the local line: y = y_c + k_l(x0 - x_c)
/// + b_l + noise, with x0 uniform within cluster_spread of x_c.
pub fn generate_cluster(
    center: (f64, f64),
    cfg: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<(f64, f64)>, (f64, f64)) {
    let k_l = normal(rng, cfg.local_slope_dist.0, cfg.local_slope_dist.1);
    let b_l = normal(rng, cfg.local_intercept_dist.0, cfg.local_intercept_dist.1);
    let points = (0..cfg.samples_per_cluster)
        .map(|_| {
            let x0 = uniform(rng, center.0 - cfg.cluster_spread, center.0 + cfg.cluster_spread);
            let y = center.1 + k_l * (x0 - center.0) + b_l + normal(rng, 0.0, cfg.sample_noise_std);
            (x0, y)
        })
        .collect();
    (points, (k_l, b_l))
}

enum FeatureKind {
    Linear,
    Quadratic,
    Noise,
}

fn derived_column(
    x0: &[f64],
    kind: &FeatureKind,
    a: f64,
    c: f64,
    noise_std: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    x0.iter()
        .map(|&x| match kind {
            FeatureKind::Linear => a * x + c + normal(rng, 0.0, noise_std),
            FeatureKind::Quadratic => a * x * x + c + normal(rng, 0.0, noise_std),
            FeatureKind::Noise => normal(rng, 0.0, 1.0),
        })
        .collect()
}

/// Expand the driver column into K-1 derived columns, ordered linear,
/// quadratic, noise. Linear and quadratic columns get per-feature
/// coefficients a ~ N(1, 0.25) and c ~ N(0, 1) drawn once; noise columns are
/// standard normal, unrelated to x0. Each column owns its RNG stream, so the
/// feature count can change without perturbing other columns.
pub fn expand_features(x0: &[f64], cfg: &GeneratorConfig, seed: u64) -> Vec<Vec<f64>> {
    let total = cfg.n_linear + cfg.n_quadratic + cfg.n_noise;
    let columns: Vec<Vec<f64>> = (0..total)
        .map(|j| {
            let kind = if j < cfg.n_linear {
                FeatureKind::Linear
            } else if j < cfg.n_linear + cfg.n_quadratic {
                FeatureKind::Quadratic
            } else {
                FeatureKind::Noise
            };
            let mut rng = stream(seed, &[TAG_FEATURE, j as u64]);
            let a = normal(&mut rng, 1.0, 0.25);
            let c = normal(&mut rng, 0.0, 1.0);
            derived_column(x0, &kind, a, c, cfg.feature_noise_std, &mut rng)
        })
        .collect();
    (0..x0.len())
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect()
}

/// Full pipeline: global line, centers, per-cluster points, feature
/// expansion. Rows are grouped by cluster (cluster 0 first); features are
/// named x0..x{K-1} in the order [x0, linear.., quadratic.., noise..] and the
/// generating cluster index is attached as labels.
pub fn generate(cfg: &GeneratorConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let line = sample_global_line(cfg, &mut stream(cfg.seed, &[TAG_LINE]));
    let centers = generate_centers(cfg, line, &mut stream(cfg.seed, &[TAG_CENTERS]));

    let mut x0 = Vec::with_capacity(cfg.n());
    let mut target = Vec::with_capacity(cfg.n());
    let mut labels = Vec::with_capacity(cfg.n());
    let mut truths = Vec::with_capacity(cfg.m_clusters);
    for (i, &center) in centers.iter().enumerate() {
        let mut rng = stream(cfg.seed, &[TAG_CLUSTER, i as u64]);
        let (points, (k_l, b_l)) = generate_cluster(center, cfg, &mut rng);
        for (x, y) in points {
            x0.push(x);
            target.push(y);
            labels.push(i);
        }
        truths.push(ClusterTruth {
            center_x: center.0,
            center_y: center.1,
            local_slope: k_l,
            local_intercept: b_l,
        });
    }

    let derived = expand_features(&x0, cfg, cfg.seed);
    let features: Vec<Vec<f64>> = x0
        .iter()
        .zip(&derived)
        .map(|(&x, rest)| {
            let mut row = Vec::with_capacity(cfg.k());
            row.push(x);
            row.extend_from_slice(rest);
            row
        })
        .collect();
    let names = (0..cfg.k()).map(|j| format!("x{j}")).collect();
    let data = Dataset::new(features, target, names, Some(labels))?;
    Ok(SyntheticDataset {
        data,
        ground_truth: GroundTruth {
            global_slope: line.0,
            global_intercept: line.1,
            clusters: truths,
        },
        config: cfg.clone(),
    })
}

impl SyntheticDataset {
    pub fn save_truth(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.ground_truth)?;
        crate::experiment::write_atomic(path, json.as_bytes())
    }
}
