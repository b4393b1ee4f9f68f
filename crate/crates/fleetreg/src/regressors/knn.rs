//! k-nearest-neighbors regression: the prediction is the mean target of the
//! k closest training rows by L2 distance. Equal distances resolve toward
//! lower row indices; a training set smaller than k uses every row.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

pub fn fit(x: &[Vec<f64>], y: &[f64], k: usize) -> KnnModel {
    KnnModel { k, x: x.to_vec(), y: y.to_vec() }
}

impl KnnModel {
    pub fn predict(&self, query: &[f64]) -> f64 {
        let mut by_distance: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d2: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        by_distance.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let take = self.k.min(self.x.len());
        by_distance[..take].iter().map(|&(_, i)| self.y[i]).sum::<f64>() / take as f64
    }
}
