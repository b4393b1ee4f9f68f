//! L2-regularized linear regression via the normal equations on centered
//! data. Centering keeps the intercept out of the penalty: the weights solve
//! (Xc'Xc + alpha I) w = Xc'yc and the intercept is mean(y) - w . mean(X).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_spd;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl RidgeModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercept
    }
}

/// Solve (X'X + alpha I) w = X'y for data that is already centered (no
/// intercept column). Exposed separately so the closed-form scalar case can
/// be checked on its own.
#[allow(clippy::needless_range_loop)]
pub fn solve_centered(xc: &[Vec<f64>], yc: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let k = xc[0].len();
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for (row, &target) in xc.iter().zip(yc) {
        for i in 0..k {
            rhs[i] += row[i] * target;
            for j in i..k {
                gram[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
        gram[i][i] += alpha;
    }
    solve_spd(&gram, &rhs)
        .ok_or_else(|| Error::Singular("penalized normal equations did not factor".into()))
}

pub fn fit(x: &[Vec<f64>], y: &[f64], alpha: f64) -> Result<RidgeModel> {
    let n = x.len();
    let k = x[0].len();
    let mut x_mean = vec![0.0; k];
    for row in x {
        for (m, v) in x_mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut x_mean {
        *m /= n as f64;
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let xc: Vec<Vec<f64>> = x
        .iter()
        .map(|row| row.iter().zip(&x_mean).map(|(v, m)| v - m).collect())
        .collect();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let weights = solve_centered(&xc, &yc, alpha)?;
    let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(RidgeModel { weights, intercept })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_zero_interpolates_a_line() {
        let model = fit(&[vec![1.0], vec![2.0]], &[1.0, 2.0], 0.0).unwrap();
        assert!((model.weights[0] - 1.0).abs() < 1e-12);
        assert!(model.intercept.abs() < 1e-12);
        assert!((model.predict(&[3.0]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_closed_form() {
        // centered scalar case: w = sum(x y) / (sum(x^2) + alpha) = 28/15
        let xc = vec![vec![1.0], vec![2.0], vec![3.0]];
        let yc = vec![2.0, 4.0, 6.0];
        let w = solve_centered(&xc, &yc, 1.0).unwrap();
        assert!((w[0] - 28.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn larger_alpha_shrinks_the_weights() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let t = i as f64 / 4.0;
                vec![t, (t * 1.3 + 0.5).sin(), t * t * 0.1]
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| 3.0 * r[0] - 2.0 * r[1] + r[2] + 0.5).collect();
        let norm = |alpha: f64| {
            let m = fit(&x, &y, alpha).unwrap();
            m.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
        };
        let n0 = norm(0.1);
        let n1 = norm(1.0);
        let n2 = norm(10.0);
        assert!(n1 <= n0 + 1e-12, "{n1} > {n0}");
        assert!(n2 <= n1 + 1e-12, "{n2} > {n1}");
    }

    #[test]
    fn constant_feature_stays_solvable_with_alpha() {
        // centered constant column is all zeros: singular at alpha 0,
        // regularized otherwise
        let x = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]];
        let y = vec![1.0, 2.0, 3.0];
        assert!(fit(&x, &y, 0.0).is_err());
        let model = fit(&x, &y, 1.0).unwrap();
        assert!(model.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn mean_point_is_on_the_fitted_plane() {
        let x = vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![4.0, 3.0], vec![6.0, 0.0]];
        let y = vec![1.0, 3.0, 9.0, 11.0];
        let model = fit(&x, &y, 2.5).unwrap();
        let x_mean = [3.0, 0.75];
        let y_mean = 6.0;
        assert!((model.predict(&x_mean) - y_mean).abs() < 1e-10);
    }
}
