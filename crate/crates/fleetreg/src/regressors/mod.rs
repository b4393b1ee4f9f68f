//! Four regressors behind one fit/predict interface. All of them expect
//! pre-standardized features (the training pipeline owns the scaler) and
//! leave targets in their original units.

pub mod forest;
pub mod knn;
pub mod mlp;
pub mod ridge;

pub use forest::{ForestModel, Tree};
pub use knn::KnnModel;
pub use mlp::{mlp_gradient_check, MlpModel};
pub use ridge::{solve_centered, RidgeModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_alpha() -> f64 {
    1.0
}
fn default_k() -> usize {
    5
}
fn default_n_trees() -> usize {
    100
}
fn default_min_leaf() -> usize {
    1
}
fn default_min_split() -> usize {
    2
}
fn default_bootstrap() -> bool {
    true
}
fn default_layers() -> Vec<usize> {
    vec![10, 10]
}
fn default_lr() -> f64 {
    1e-3
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_epochs() -> usize {
    200
}
fn default_batch() -> usize {
    32
}

/// Which regressor to train, with its hyperparameters. JSON form is
/// internally tagged: `{"kind": "ridge", "alpha": 1.0}`. Every field has a
/// default, so `{"kind": "knn"}` is a complete spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorSpec {
    Ridge {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
    RandomForest {
        #[serde(default = "default_n_trees")]
        n_trees: usize,
        #[serde(default = "default_min_leaf")]
        min_samples_leaf: usize,
        #[serde(default = "default_min_split")]
        min_samples_split: usize,
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "default_bootstrap")]
        bootstrap: bool,
    },
    Mlp {
        #[serde(default = "default_layers")]
        layers: Vec<usize>,
        #[serde(default = "default_lr")]
        learning_rate: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default = "default_epochs")]
        epochs: usize,
        #[serde(default = "default_batch")]
        batch: usize,
    },
}

impl RegressorSpec {
    pub fn ridge() -> Self {
        RegressorSpec::Ridge { alpha: default_alpha() }
    }

    pub fn knn() -> Self {
        RegressorSpec::Knn { k: default_k() }
    }

    pub fn random_forest() -> Self {
        RegressorSpec::RandomForest {
            n_trees: default_n_trees(),
            min_samples_leaf: default_min_leaf(),
            min_samples_split: default_min_split(),
            max_depth: None,
            bootstrap: default_bootstrap(),
        }
    }

    pub fn mlp() -> Self {
        RegressorSpec::Mlp {
            layers: default_layers(),
            learning_rate: default_lr(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
            epochs: default_epochs(),
            batch: default_batch(),
        }
    }

    /// Short display name used in benchmark tables.
    pub fn label(&self) -> &'static str {
        match self {
            RegressorSpec::Ridge { .. } => "Ridge",
            RegressorSpec::Knn { .. } => "kNN",
            RegressorSpec::RandomForest { .. } => "RF",
            RegressorSpec::Mlp { .. } => "MLP",
        }
    }

    // the negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        match self {
            RegressorSpec::Ridge { alpha } => {
                if !(*alpha >= 0.0) || !alpha.is_finite() {
                    return bad(format!("ridge alpha must be non-negative, got {alpha}"));
                }
            }
            RegressorSpec::Knn { k } => {
                if *k < 1 {
                    return bad("knn k must be at least 1".into());
                }
            }
            RegressorSpec::RandomForest { n_trees, min_samples_leaf, min_samples_split, max_depth, .. } => {
                if *n_trees < 1 {
                    return bad("random_forest n_trees must be at least 1".into());
                }
                if *min_samples_leaf < 1 {
                    return bad("min_samples_leaf must be at least 1".into());
                }
                if *min_samples_split < 2 {
                    return bad("min_samples_split must be at least 2".into());
                }
                if let Some(d) = max_depth {
                    if *d < 1 {
                        return bad("max_depth must be at least 1 when set".into());
                    }
                }
            }
            RegressorSpec::Mlp { layers, learning_rate, beta1, beta2, eps, epochs, batch } => {
                if layers.contains(&0) {
                    return bad("mlp layers must all be non-empty".into());
                }
                if !(*learning_rate > 0.0) {
                    return bad("mlp learning_rate must be positive".into());
                }
                if !(0.0..1.0).contains(beta1) || !(0.0..1.0).contains(beta2) {
                    return bad("mlp betas must lie in [0, 1)".into());
                }
                if !(*eps > 0.0) {
                    return bad("mlp eps must be positive".into());
                }
                if *epochs < 1 {
                    return bad("mlp epochs must be at least 1".into());
                }
                if *batch < 1 {
                    return bad("mlp batch must be at least 1".into());
                }
            }
        }
        Ok(())
    }

    /// Smallest training-set size `fit` accepts for this kind.
    pub fn min_rows(&self) -> usize {
        2
    }

    pub fn fit(&self, x: &[Vec<f64>], y: &[f64], seed: u64) -> Result<FittedRegressor> {
        self.validate()?;
        validate_training_data(x, y, self.min_rows())?;
        let params = match self {
            RegressorSpec::Ridge { alpha } => FittedParams::Ridge(ridge::fit(x, y, *alpha)?),
            RegressorSpec::Knn { k } => FittedParams::Knn(knn::fit(x, y, *k)),
            RegressorSpec::RandomForest { n_trees, min_samples_leaf, min_samples_split, max_depth, bootstrap } => {
                FittedParams::Forest(forest::fit(
                    x,
                    y,
                    &forest::ForestParams {
                        n_trees: *n_trees,
                        min_samples_leaf: *min_samples_leaf,
                        min_samples_split: *min_samples_split,
                        max_depth: *max_depth,
                        bootstrap: *bootstrap,
                    },
                    seed,
                ))
            }
            RegressorSpec::Mlp { layers, learning_rate, beta1, beta2, eps, epochs, batch } => {
                FittedParams::Mlp(mlp::fit(
                    x,
                    y,
                    &mlp::MlpParams {
                        layers: layers.clone(),
                        learning_rate: *learning_rate,
                        beta1: *beta1,
                        beta2: *beta2,
                        eps: *eps,
                        epochs: *epochs,
                        batch: *batch,
                    },
                    seed,
                ))
            }
        };
        Ok(FittedRegressor { spec: self.clone(), params })
    }
}

fn validate_training_data(x: &[Vec<f64>], y: &[f64], min_rows: usize) -> Result<()> {
    if x.len() < min_rows {
        return Err(Error::InvalidData(format!(
            "need at least {min_rows} training rows, got {}",
            x.len()
        )));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let dim = x[0].len();
    if dim == 0 {
        return Err(Error::InvalidData("training rows must have at least one feature".into()));
    }
    for row in x {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("training features must be finite".into()));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("training targets must be finite".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FittedParams {
    Ridge(RidgeModel),
    Knn(KnnModel),
    Forest(ForestModel),
    Mlp(MlpModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedRegressor {
    pub spec: RegressorSpec,
    pub params: FittedParams,
}

impl FittedRegressor {
    pub fn input_dim(&self) -> usize {
        match &self.params {
            FittedParams::Ridge(m) => m.weights.len(),
            FittedParams::Knn(m) => m.x[0].len(),
            FittedParams::Forest(m) => m.n_features,
            FittedParams::Mlp(m) => m.input_dim(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let dim = self.input_dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
        }
        Ok(match &self.params {
            FittedParams::Ridge(m) => m.predict(x),
            FittedParams::Knn(m) => m.predict(x),
            FittedParams::Forest(m) => m.predict(x),
            FittedParams::Mlp(m) => m.predict(x),
        })
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|x| self.predict(x)).collect()
    }
}
