use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Targets with |y| below this are left out of the MAPE average (their
/// relative error is unbounded); the count of such rows is reported.
pub const MAPE_ZERO_THRESHOLD: f64 = 1e-12;

fn check_lengths(y_true: &[f64], y_pred: &[f64]) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::InvalidData("metrics on empty vectors".into()));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    Ok(())
}

pub fn mae(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    Ok(y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p).abs())
        .sum::<f64>()
        / y_true.len() as f64)
}

pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    Ok(y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum::<f64>()
        / y_true.len() as f64)
}

/// R^2 = 1 - SS_res/SS_tot with SS_tot about the test-set target mean.
/// A constant target (SS_tot = 0) yields 1.0 for an exact fit and 0.0
/// otherwise, keeping the value finite and <= 1.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(t, p)| (t - p) * (t - p)).sum();
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Ok(if ss_res == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// MAPE over rows with |y_true| >= MAPE_ZERO_THRESHOLD, plus the number of
/// excluded rows. All rows excluded yields MAPE 0 with the count telling why.
pub fn mape_counting(y_true: &[f64], y_pred: &[f64]) -> Result<(f64, usize)> {
    check_lengths(y_true, y_pred)?;
    let mut sum = 0.0;
    let mut kept = 0usize;
    for (t, p) in y_true.iter().zip(y_pred) {
        if t.abs() >= MAPE_ZERO_THRESHOLD {
            sum += ((t - p) / t).abs();
            kept += 1;
        }
    }
    let excluded = y_true.len() - kept;
    Ok((if kept == 0 { 0.0 } else { sum / kept as f64 }, excluded))
}

pub fn mape(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    Ok(mape_counting(y_true, y_pred)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub mae: f64,
    pub mse: f64,
    pub r2: f64,
    pub mape: f64,
}

impl FoldMetrics {
    pub fn compute(y_true: &[f64], y_pred: &[f64]) -> Result<(FoldMetrics, usize)> {
        let (mape, excluded) = mape_counting(y_true, y_pred)?;
        Ok((
            FoldMetrics {
                mae: mae(y_true, y_pred)?,
                mse: mse(y_true, y_pred)?,
                r2: r2(y_true, y_pred)?,
                mape,
            },
            excluded,
        ))
    }
}

/// Cross-validation summary: per-fold metric quadruples plus their mean and
/// sample standard deviation (divide by folds - 1). `mape_excluded` counts
/// near-zero targets dropped from MAPE across all folds; `warnings` carries
/// non-fatal events such as small-cluster merges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: MeanStd,
    pub mse: MeanStd,
    pub r2: MeanStd,
    pub mape: MeanStd,
    pub per_fold: Vec<FoldMetrics>,
    pub mape_excluded: usize,
    pub warnings: Vec<String>,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64)
            .sqrt()
    };
    MeanStd { mean, std }
}

impl MetricsReport {
    pub fn from_folds(per_fold: Vec<FoldMetrics>, mape_excluded: usize, warnings: Vec<String>) -> Result<MetricsReport> {
        if per_fold.is_empty() {
            return Err(Error::InvalidData("report needs at least one fold".into()));
        }
        let collect = |f: fn(&FoldMetrics) -> f64| per_fold.iter().map(f).collect::<Vec<_>>();
        Ok(MetricsReport {
            mae: mean_std(&collect(|m| m.mae)),
            mse: mean_std(&collect(|m| m.mse)),
            r2: mean_std(&collect(|m| m.r2)),
            mape: mean_std(&collect(|m| m.mape)),
            per_fold,
            mape_excluded,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_values() {
        let y = [1.0, 2.0, 5.0];
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        assert_eq!(mape(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_values() {
        let y = [1.0, 3.0];
        let p = [2.0, 4.0];
        assert_eq!(mae(&y, &p).unwrap(), 1.0);
        assert_eq!(mse(&y, &p).unwrap(), 1.0);
        // mape of true [2,4] pred [1,3]: mean(1/2, 1/4)
        assert_eq!(mape(&[2.0, 4.0], &[1.0, 3.0]).unwrap(), 0.375);
    }

    #[test]
    fn r2_of_constant_mean_prediction_is_zero() {
        let y = [1.0, 2.0, 3.0, 6.0];
        let mean = 3.0;
        let p = [mean; 4];
        assert!((r2(&y, &p).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn r2_constant_target_convention() {
        let y = [2.0, 2.0];
        assert_eq!(r2(&y, &[2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(r2(&y, &[2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn mape_excludes_near_zero_targets() {
        let (m, excluded) = mape_counting(&[0.0, 2.0], &[1.0, 3.0]).unwrap();
        assert_eq!(excluded, 1);
        assert_eq!(m, 0.5);
        let (m, excluded) = mape_counting(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(excluded, 2);
        assert_eq!(m, 0.0);
    }

    #[test]
    fn errors_on_empty_and_mismatched() {
        assert!(mae(&[], &[]).is_err());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn report_aggregates_with_sample_std() {
        let folds = vec![
            FoldMetrics { mae: 1.0, mse: 1.0, r2: 0.5, mape: 0.1 },
            FoldMetrics { mae: 3.0, mse: 9.0, r2: 0.7, mape: 0.3 },
        ];
        let report = MetricsReport::from_folds(folds, 0, vec![]).unwrap();
        assert_eq!(report.mae.mean, 2.0);
        // sample std of [1,3] = sqrt(2)
        assert!((report.mae.std - 2.0f64.sqrt()).abs() < 1e-15);
        // mean/std recomputable from per_fold to 1e-12
        let maes: Vec<f64> = report.per_fold.iter().map(|f| f.mae).collect();
        let mean = maes.iter().sum::<f64>() / maes.len() as f64;
        assert!((mean - report.mae.mean).abs() < 1e-12);
    }

    #[test]
    fn report_json_round_trips() {
        let report = MetricsReport::from_folds(
            vec![FoldMetrics { mae: 1.5, mse: 2.25, r2: 0.9, mape: 0.05 }],
            2,
            vec!["cluster 3 (4 rows) merged into cluster 1".into()],
        )
        .unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"mae\":{\"mean\":1.5"));
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
