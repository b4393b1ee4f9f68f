use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

const TAG_FOLDS: u64 = 0xF01D;

/// A shuffled k-fold partition of row indices. Deterministic in
/// (n, fold_count, seed); fold sizes differ by at most one, with the first
/// n mod k folds getting the extra row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub fold_count: usize,
    /// assignments[i] is the fold of row i.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("fold count must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidConfig(format!("fold count {k} exceeds row count {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, &[TAG_FOLDS]));
    let base = n / k;
    let extra = n % k;
    let mut assignments = vec![0; n];
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[cursor..cursor + size] {
            assignments[row] = fold;
        }
        cursor += size;
    }
    Ok(FoldPlan { fold_count: k, assignments, seed })
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}
