//! Dataset container, CSV I/O, standardization, k-fold planning, and
//! regression metrics.

mod dataset;
mod folds;
mod metrics;
mod scaler;

pub use dataset::Dataset;
pub use folds::{kfold_split, FoldPlan};
pub use metrics::{
    mae, mape, mape_counting, mse, r2, FoldMetrics, MeanStd, MetricsReport, MAPE_ZERO_THRESHOLD,
};
pub use scaler::Scaler;
