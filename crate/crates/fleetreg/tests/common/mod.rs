//! Independent oracles for the test suite.
//!
//! Everything here is implemented from first principles with deliberately
//! different algorithms than the library (Gauss-Jordan with full pivoting
//! instead of centering + Cholesky, pair-counting ARI, O(N^2) silhouette),
//! so agreement between the two is evidence of correctness rather than of
//! shared bugs.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

/// Minimal LCG (Numerical Recipes constants) for building random test
/// instances without touching the library's RNG.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Gauss-Jordan solve with full pivoting. Returns None when singular.
pub fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let mut col_of = (0..n).collect::<Vec<_>>();
    for step in 0..n {
        let mut best = (step, step, a[step][step].abs());
        for r in step..n {
            for c in step..n {
                if a[r][c].abs() > best.2 {
                    best = (r, c, a[r][c].abs());
                }
            }
        }
        if best.2 < 1e-12 {
            return None;
        }
        a.swap(step, best.0);
        b.swap(step, best.0);
        for row in a.iter_mut() {
            row.swap(step, best.1);
        }
        col_of.swap(step, best.1);
        let pivot = a[step][step];
        for c in step..n {
            a[step][c] /= pivot;
        }
        b[step] /= pivot;
        for r in 0..n {
            if r != step {
                let factor = a[r][step];
                if factor != 0.0 {
                    for c in step..n {
                        a[r][c] -= factor * a[step][c];
                    }
                    b[r] -= factor * b[step];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in 0..n {
        x[col_of[i]] = b[i];
    }
    Some(x)
}

/// Ridge with unpenalized intercept via the augmented normal equations
/// [[X'X + aI, X'1], [1'X, n]] [w; b] = [X'y; 1'y], no centering involved.
/// Returns (weights, intercept).
pub fn ridge_oracle(x: &[Vec<f64>], y: &[f64], alpha: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let k = x[0].len();
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut rhs = vec![0.0; k + 1];
    for i in 0..n {
        for p in 0..k {
            for q in 0..k {
                a[p][q] += x[i][p] * x[i][q];
            }
            a[p][k] += x[i][p];
            a[k][p] += x[i][p];
            rhs[p] += x[i][p] * y[i];
        }
        rhs[k] += y[i];
    }
    for p in 0..k {
        a[p][p] += alpha;
    }
    a[k][k] = n as f64;
    let sol = gauss_jordan(a, rhs).expect("oracle system must be solvable");
    (sol[..k].to_vec(), sol[k])
}

/// Ordinary least squares (with intercept): ridge oracle at alpha = 0.
pub fn ols_oracle(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    ridge_oracle(x, y, 0.0)
}

/// OLS of y on a single column, returning (slope, intercept).
pub fn ols_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let cols = x.iter().map(|&v| vec![v]).collect::<Vec<_>>();
    let (w, b) = ols_oracle(&cols, y);
    (w[0], b)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n - 1); 0.0 for fewer than two values.
pub fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..a.len() {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Adjusted Rand index by the pair-counting contingency formula.
pub fn ari(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let ka = a.iter().max().map_or(0, |&m| m + 1);
    let kb = b.iter().max().map_or(0, |&m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for i in 0..n {
        table[a[i]][b[i]] += 1;
    }
    let choose2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let sum_ij: f64 = table.iter().flatten().map(|&x| choose2(x)).sum();
    let sum_a: f64 = table.iter().map(|row| choose2(row.iter().sum())).sum();
    let sum_b: f64 = (0..kb)
        .map(|j| choose2(table.iter().map(|row| row[j]).sum()))
        .sum();
    let total = choose2(n as u64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if (max - expected).abs() < 1e-12 {
        return 1.0;
    }
    (sum_ij - expected) / (max - expected)
}

/// Mean silhouette coefficient over all points, plain O(N^2) definition.
/// Points with a singleton cluster get silhouette 0.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = points.len();
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    let dist = |p: &[f64], q: &[f64]| -> f64 {
        p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };
    let mut total = 0.0;
    for i in 0..n {
        if counts[labels[i]] < 2 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[labels[j]] += dist(&points[i], &points[j]);
            }
        }
        let a = sums[labels[i]] / (counts[labels[i]] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != labels[i] && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

/// Kolmogorov-Smirnov statistic of samples against U(lo, hi).
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut stat: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        let hi_side = ((i + 1) as f64 / n - cdf).abs();
        let lo_side = (cdf - i as f64 / n).abs();
        stat = stat.max(hi_side).max(lo_side);
    }
    stat
}

/// Mean and sample std of all pairwise L2 distances between the given vectors.
pub fn pairwise_l2_stats(vectors: &[Vec<f64>]) -> (f64, f64, usize) {
    let mut dists = Vec::new();
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let d = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dists.push(d);
        }
    }
    (mean(&dists), sample_std(&dists), dists.len())
}
