use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::tfidf::SparseVector;
use crate::seed;

/// Primal linear SVM settings (Pegasos-style subgradient descent on the
/// L2-regularized hinge loss, step size 1/(lambda * t)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-4,
            epochs: 10,
            seed: 0,
        }
    }
}

/// Trained hyperplane; `weights.len()` is the feature count.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }
}

/// `w` is stored as `scale * v`, so the per-step shrink is O(1). The bias
/// is the weight of a constant feature of value 1 kept at index `dim`.
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
    norm_sq: f64,
}

impl ScaledWeights {
    fn dot(&self, x: &SparseVector, dim: usize) -> f64 {
        self.scale * (x.dot(&self.v) + self.v[dim])
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.v.iter_mut().for_each(|w| *w = 0.0);
            self.scale = 1.0;
            self.norm_sq = 0.0;
        } else {
            self.scale *= factor;
            self.norm_sq *= factor * factor;
        }
    }

    /// w += step * x (with the constant bias feature).
    fn add(&mut self, x: &SparseVector, dim: usize, step: f64) {
        let c = step / self.scale;
        let mut dot_vx = self.v[dim];
        for &(i, val) in &x.0 {
            dot_vx += self.v[i as usize] * val;
        }
        let x_sq = x.norm_squared() + 1.0;
        for &(i, val) in &x.0 {
            self.v[i as usize] += c * val;
        }
        self.v[dim] += c;
        // ||s(v + c x)||^2 = s^2 (||v||^2 + 2c v.x + c^2 ||x||^2)
        self.norm_sq += self.scale * self.scale * (2.0 * c * dot_vx + c * c * x_sq);
    }

    fn project(&mut self, radius: f64) {
        let norm = self.norm_sq.max(0.0).sqrt();
        if norm > radius {
            self.shrink(radius / norm);
        }
    }

    fn finish(self, dim: usize) -> LinearSvm {
        let weights = self.v[..dim].iter().map(|w| w * self.scale).collect();
        LinearSvm {
            weights,
            bias: self.v[dim] * self.scale,
        }
    }
}

/// Trains on `(x, y)` examples with `y ∈ {-1, +1}`. Deterministic given `config.seed`.
pub fn train(examples: &[(SparseVector, f64)], dim: usize, config: &SvmConfig) -> LinearSvm {
    let lambda = config.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut w = ScaledWeights {
        v: vec![0.0; dim + 1],
        scale: 1.0,
        norm_sq: 0.0,
    };
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = seed::rng(config.seed, "svm/shuffle");
    let mut t = 0u64;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let (x, y) = &examples[i];
            let eta = 1.0 / (lambda * t as f64);
            let margin = y * w.dot(x, dim);
            w.shrink(1.0 - eta * lambda);
            if margin < 1.0 {
                w.add(x, dim, eta * y);
            }
            w.project(radius);
        }
    }
    w.finish(dim)
}
