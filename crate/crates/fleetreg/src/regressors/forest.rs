//! Random forest regression. Trees grow on bootstrap resamples and split by
//! exact variance reduction: every midpoint between consecutive distinct
//! values of every feature is a candidate, and the one minimizing the summed
//! child squared error wins (ties keep the first candidate in feature-then-
//! threshold scan order). Forest output is the plain mean over trees.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::stream;

const TAG_TREE: u64 = 0x7EE5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    /// None grows until purity or the size limits stop it.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Nodes in an arena; the root is index 0. A query goes left when
/// x[feature] <= threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
}

impl ForestModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Midpoint between two distinct sorted values, falling back to the lower
/// value if rounding lands on the upper one (so `x <= t` always separates).
fn split_threshold(a: f64, b: f64) -> f64 {
    let t = a + (b - a) / 2.0;
    if t < b {
        t
    } else {
        a
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a ForestParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    sse: f64,
}

impl TreeBuilder<'_> {
    fn leaf(&mut self, indices: &[usize]) -> usize {
        let value = indices.iter().map(|&i| self.y[i]).sum::<f64>() / indices.len() as f64;
        self.nodes.push(Node::Leaf { value });
        self.nodes.len() - 1
    }

    fn best_split(&self, indices: &[usize]) -> Option<BestSplit> {
        let n = indices.len();
        let min_leaf = self.params.min_samples_leaf;
        let total_sy: f64 = indices.iter().map(|&i| self.y[i]).sum();
        let total_sy2: f64 = indices.iter().map(|&i| self.y[i] * self.y[i]).sum();
        if total_sy2 - total_sy * total_sy / n as f64 <= 1e-12 {
            return None; // already pure
        }
        let mut best: Option<BestSplit> = None;
        for feature in 0..self.x[0].len() {
            let mut order: Vec<(f64, usize)> =
                indices.iter().map(|&i| (self.x[i][feature], i)).collect();
            order.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
            let mut sy = 0.0;
            let mut sy2 = 0.0;
            for p in 1..n {
                let yi = self.y[order[p - 1].1];
                sy += yi;
                sy2 += yi * yi;
                if order[p - 1].0 == order[p].0 {
                    continue;
                }
                if p < min_leaf || n - p < min_leaf {
                    continue;
                }
                let (rsy, rsy2) = (total_sy - sy, total_sy2 - sy2);
                let sse = (sy2 - sy * sy / p as f64) + (rsy2 - rsy * rsy / (n - p) as f64);
                if best.as_ref().is_none_or(|b| sse < b.sse - 1e-12) {
                    best = Some(BestSplit {
                        feature,
                        threshold: split_threshold(order[p - 1].0, order[p].0),
                        sse,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let stop = indices.len() < self.params.min_samples_split
            || self.params.max_depth.is_some_and(|d| depth >= d);
        if stop {
            return self.leaf(&indices);
        }
        let Some(split) = self.best_split(&indices) else {
            return self.leaf(&indices);
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.x[i][split.feature] <= split.threshold);
        // reserve the split slot before recursing so the root stays at 0
        self.nodes.push(Node::Leaf { value: 0.0 });
        let at = self.nodes.len() - 1;
        let left = self.build(left_idx, depth + 1);
        let right = self.build(right_idx, depth + 1);
        self.nodes[at] =
            Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        at
    }
}

fn grow_tree(x: &[Vec<f64>], y: &[f64], indices: Vec<usize>, params: &ForestParams) -> Tree {
    let mut builder = TreeBuilder { x, y, params, nodes: Vec::new() };
    builder.build(indices, 0);
    Tree { nodes: builder.nodes }
}

pub fn fit(x: &[Vec<f64>], y: &[f64], params: &ForestParams, seed: u64) -> ForestModel {
    let n = x.len();
    let trees = (0..params.n_trees)
        .map(|t| {
            let indices: Vec<usize> = if params.bootstrap {
                let mut rng = stream(seed, &[TAG_TREE, t as u64]);
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(x, y, indices, params)
        })
        .collect();
    ForestModel { trees, n_features: x[0].len() }
}
