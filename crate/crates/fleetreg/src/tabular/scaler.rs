use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column standardization fitted on training rows only. Uses the
/// population standard deviation (divide by N). Constant columns are flagged
/// and transform to zero instead of erroring, since real fleet extracts
/// contain constant configuration columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Scaler {
    pub fn fit(features: &[Vec<f64>]) -> Result<Scaler> {
        let n = features.len();
        if n == 0 {
            return Err(Error::InvalidData("scaler needs at least one row".into()));
        }
        let k = features[0].len();
        let mut means = vec![0.0; k];
        for row in features {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut vars = vec![0.0; k];
        for row in features {
            for j in 0..k {
                let d = row[j] - means[j];
                vars[j] += d * d;
            }
        }
        let mut std_devs = vec![0.0; k];
        let mut constant = vec![false; k];
        for j in 0..k {
            let sd = (vars[j] / n as f64).sqrt();
            if sd == 0.0 {
                constant[j] = true;
                std_devs[j] = 1.0; // unused for constant columns; keeps invert finite
            } else {
                std_devs[j] = sd;
            }
        }
        Ok(Scaler { means, std_devs, constant })
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.k() {
            return Err(Error::DimensionMismatch { expected: self.k(), got: row.len() });
        }
        Ok((0..row.len())
            .map(|j| {
                if self.constant[j] {
                    0.0
                } else {
                    (row[j] - self.means[j]) / self.std_devs[j]
                }
            })
            .collect())
    }

    pub fn transform(&self, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        features.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Inverse of transform_row. Constant columns map back to their mean,
    /// which equals every original value of such a column.
    pub fn invert_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.k() {
            return Err(Error::DimensionMismatch { expected: self.k(), got: row.len() });
        }
        Ok((0..row.len())
            .map(|j| {
                if self.constant[j] {
                    self.means[j]
                } else {
                    row[j] * self.std_devs[j] + self.means[j]
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_1_2_3_standardizes_by_population_formula() {
        let scaler = Scaler::fit(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(scaler.means[0], 2.0);
        let expected_sd = (2.0f64 / 3.0).sqrt();
        assert!((scaler.std_devs[0] - expected_sd).abs() < 1e-15);
        let t: Vec<f64> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&v| scaler.transform_row(&[v]).unwrap()[0])
            .collect();
        let mean = t.iter().sum::<f64>() / 3.0;
        let var = t.iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_column_transforms_to_zero_and_is_flagged() {
        let scaler = Scaler::fit(&[vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0]]).unwrap();
        assert!(scaler.constant[0]);
        assert!(!scaler.constant[1]);
        let t = scaler.transform_row(&[5.0, 2.0]).unwrap();
        assert_eq!(t[0], 0.0);
        // invert maps the constant column back to its (only) value
        let back = scaler.invert_row(&t).unwrap();
        assert_eq!(back[0], 5.0);
        assert!((back[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_on_one_fold_apply_to_another_leaves_nonzero_mean() {
        // Frozen 10-row table; first five rows are the fit fold, the rest are
        // systematically larger so their transformed mean must be positive.
        let rows: Vec<Vec<f64>> = vec![
            vec![0.31, 4.7],
            vec![1.22, 3.1],
            vec![0.87, 5.0],
            vec![1.95, 2.6],
            vec![0.44, 4.2],
            vec![3.31, 8.7],
            vec![4.22, 7.1],
            vec![3.87, 9.0],
            vec![4.95, 6.6],
            vec![3.44, 8.2],
        ];
        let scaler = Scaler::fit(&rows[..5]).unwrap();
        let transformed = scaler.transform(&rows[5..]).unwrap();
        let mean0 = transformed.iter().map(|r| r[0]).sum::<f64>() / 5.0;
        assert!(mean0 > 1.0, "fold-B mean should be far from 0, got {mean0}");
    }

    #[test]
    fn single_row_fit_marks_every_column_constant() {
        let scaler = Scaler::fit(&[vec![3.0, -1.0]]).unwrap();
        assert!(scaler.constant.iter().all(|&c| c));
        assert_eq!(scaler.transform_row(&[3.0, -1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(Scaler::fit(&[]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let scaler = Scaler::fit(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(scaler.transform_row(&[1.0, 2.0]).is_err());
    }
}
