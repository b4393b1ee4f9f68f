//! Feed-forward network with ReLU hidden layers and a single linear output,
//! trained on squared error with ADAM. Weight layout is one out-by-in matrix
//! per layer; an empty hidden list degenerates to a linear model.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::stream;

const TAG_MLP: u64 = 0x317;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<usize>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub epochs: usize,
    pub batch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// weights[l][out][in]
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

type WGrad = Vec<Vec<Vec<f64>>>;
type BGrad = Vec<Vec<f64>>;

impl MlpModel {
    pub fn init(input_dim: usize, hidden: &[usize], rng: &mut rand_chacha::ChaCha8Rng) -> MlpModel {
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let dist = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            weights.push(
                (0..fan_out)
                    .map(|_| (0..fan_in).map(|_| dist.sample(rng)).collect())
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        MlpModel { weights, biases }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0][0].len()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let last = self.weights.len() - 1;
        let mut a = x.to_vec();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z: Vec<f64> = w
                .iter()
                .zip(b)
                .map(|(row, bias)| row.iter().zip(&a).map(|(wi, ai)| wi * ai).sum::<f64>() + bias)
                .collect();
            if l < last {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            a = z;
        }
        a[0]
    }

    pub fn loss(&self, x: &[f64], y: f64) -> f64 {
        let d = self.predict(x) - y;
        d * d
    }

    /// Gradient of (predict(x) - y)^2 over every weight and bias.
    fn grad_single(&self, x: &[f64], y: f64) -> (WGrad, BGrad) {
        let layer_count = self.weights.len();
        // forward, keeping pre-activations and activations
        let mut activations: Vec<Vec<f64>> = vec![x.to_vec()];
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(layer_count);
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let a = activations.last().expect("never empty");
            let z: Vec<f64> = w
                .iter()
                .zip(b)
                .map(|(row, bias)| row.iter().zip(a).map(|(wi, ai)| wi * ai).sum::<f64>() + bias)
                .collect();
            let next = if l < layer_count - 1 {
                z.iter().map(|v| v.max(0.0)).collect()
            } else {
                z.clone()
            };
            zs.push(z);
            activations.push(next);
        }
        let out = activations.last().expect("never empty")[0];

        let mut gw: WGrad = self
            .weights
            .iter()
            .map(|w| w.iter().map(|row| vec![0.0; row.len()]).collect())
            .collect();
        let mut gb: BGrad = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();

        let mut delta = vec![2.0 * (out - y)];
        for l in (0..layer_count).rev() {
            let a_prev = &activations[l];
            for (o, &d) in delta.iter().enumerate() {
                gb[l][o] = d;
                for (i, &ai) in a_prev.iter().enumerate() {
                    gw[l][o][i] = d * ai;
                }
            }
            if l > 0 {
                let prev_z = &zs[l - 1];
                delta = (0..prev_z.len())
                    .map(|i| {
                        if prev_z[i] > 0.0 {
                            delta
                                .iter()
                                .enumerate()
                                .map(|(o, &d)| self.weights[l][o][i] * d)
                                .sum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
        (gw, gb)
    }
}

pub fn fit(x: &[Vec<f64>], y: &[f64], params: &MlpParams, seed: u64) -> MlpModel {
    let mut rng = stream(seed, &[TAG_MLP]);
    let mut model = MlpModel::init(x[0].len(), &params.layers, &mut rng);

    let zero_w: WGrad = model
        .weights
        .iter()
        .map(|w| w.iter().map(|row| vec![0.0; row.len()]).collect())
        .collect();
    let zero_b: BGrad = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let (mut mw, mut vw) = (zero_w.clone(), zero_w.clone());
    let (mut mb, mut vb) = (zero_b.clone(), zero_b.clone());
    let mut step = 0;

    let mut order: Vec<usize> = (0..x.len()).collect();
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(params.batch) {
            step += 1;
            let mut gw = zero_w.clone();
            let mut gb = zero_b.clone();
            for &i in chunk {
                let (dw, db) = model.grad_single(&x[i], y[i]);
                for (acc, d) in gw.iter_mut().flatten().flatten().zip(dw.iter().flatten().flatten()) {
                    *acc += d;
                }
                for (acc, d) in gb.iter_mut().flatten().zip(db.iter().flatten()) {
                    *acc += d;
                }
            }
            let scale = 1.0 / chunk.len() as f64;
            let bias1 = 1.0 - params.beta1.powi(step);
            let bias2 = 1.0 - params.beta2.powi(step);
            let adam = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                let g = g * scale;
                *m = params.beta1 * *m + (1.0 - params.beta1) * g;
                *v = params.beta2 * *v + (1.0 - params.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= params.learning_rate * m_hat / (v_hat.sqrt() + params.eps);
            };
            for (((p, g), m), v) in model
                .weights
                .iter_mut()
                .flatten()
                .flatten()
                .zip(gw.iter().flatten().flatten())
                .zip(mw.iter_mut().flatten().flatten())
                .zip(vw.iter_mut().flatten().flatten())
            {
                adam(p, *g, m, v);
            }
            for (((p, g), m), v) in model
                .biases
                .iter_mut()
                .flatten()
                .zip(gb.iter().flatten())
                .zip(mb.iter_mut().flatten())
                .zip(vb.iter_mut().flatten())
            {
                adam(p, *g, m, v);
            }
        }
    }
    model
}

/// Largest relative disagreement between the analytic gradient and a central
/// finite difference (h = 1e-5) over every parameter, with relative error
/// |a - n| / max(1e-8, |a| + |n|).
#[allow(clippy::needless_range_loop)]
pub fn mlp_gradient_check(model: &MlpModel, x: &[f64], y: f64) -> f64 {
    let (gw, gb) = model.grad_single(x, y);
    let h = 1e-5;
    let rel = |a: f64, n: f64| (a - n).abs() / f64::max(1e-8, a.abs() + n.abs());
    let mut worst = 0.0_f64;
    for l in 0..model.weights.len() {
        for o in 0..model.weights[l].len() {
            for i in 0..model.weights[l][o].len() {
                let mut plus = model.clone();
                plus.weights[l][o][i] += h;
                let mut minus = model.clone();
                minus.weights[l][o][i] -= h;
                let numeric = (plus.loss(x, y) - minus.loss(x, y)) / (2.0 * h);
                worst = worst.max(rel(gw[l][o][i], numeric));
            }
        }
        for o in 0..model.biases[l].len() {
            let mut plus = model.clone();
            plus.biases[l][o] += h;
            let mut minus = model.clone();
            minus.biases[l][o] -= h;
            let numeric = (plus.loss(x, y) - minus.loss(x, y)) / (2.0 * h);
            worst = worst.max(rel(gb[l][o], numeric));
        }
    }
    worst
}
