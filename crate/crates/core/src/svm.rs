//! Binary linear support vector classifier trained on sparse vectors.
//!
//! Minimizes the soft-margin primal
//!
//! ```text
//! (λ/2)·‖w‖² + (1/n)·Σ max(0, 1 − ỹᵢ(w·xᵢ + b)),   ỹᵢ = 2yᵢ − 1
//! ```
//!
//! by epoch-based stochastic subgradient descent with step `η_t = 1/(λt)` and
//! a fresh seeded shuffle per epoch. Each step first shrinks `w` by
//! `(1 − η_t λ)`, then, if the sampled example is inside the margin, moves
//! `(w, b)` toward it by `min(η_t, (1 − margin)/(‖x‖² + 1))`: the full
//! subgradient step, truncated so it never overshoots the margin. The bias is
//! not shrunk. The returned model is the average of all post-step iterates,
//! rescaled by the exact minimizer of the objective along the ray `c·(w̄, b̄)`,
//! `c ≥ 0`. Since `c = 0` is a candidate the result never scores worse than
//! the zero model.
//!
//! Weights are kept as `scale · v` so the shrink is O(1) and an update touches
//! only the example's nonzeros.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Pcg32;
use crate::tfidf::SparseVector;

#[derive(Debug, Error, PartialEq)]
pub enum SvmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("need at least two training examples, got {0}")]
    TooFewExamples(usize),
    #[error("training data contains only class {0}")]
    SingleClassData(u8),
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(u8),
    #[error("every training vector is zero")]
    DegenerateInput,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}

/// Solver hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// L2 regularization strength λ.
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Return the average of all iterates instead of the last one.
    pub average_weights: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-4,
            epochs: 10,
            seed: 42,
            average_weights: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), SvmError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(SvmError::InvalidConfig(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if self.epochs == 0 {
            return Err(SvmError::InvalidConfig("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Separating hyperplane `w·x + b`; class 1 iff the score is strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: TrainConfig,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64, config: TrainConfig) -> Self {
        LinearModel {
            weights,
            bias,
            config,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    fn check_dim(&self, x: &SparseVector) -> Result<(), SvmError> {
        if x.dim() != self.weights.len() {
            return Err(SvmError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    pub fn decision(&self, x: &SparseVector) -> Result<f64, SvmError> {
        self.check_dim(x)?;
        Ok(x.dot(&self.weights) + self.bias)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<u8, SvmError> {
        Ok(label_for_score(self.decision(x)?))
    }

    /// Regularized hinge objective of this model on `(x, y)` at strength `lambda`.
    pub fn objective(&self, x: &[SparseVector], y: &[u8], lambda: f64) -> Result<f64, SvmError> {
        if x.len() != y.len() {
            return Err(SvmError::LengthMismatch {
                features: x.len(),
                labels: y.len(),
            });
        }
        let mut hinge = 0.0;
        for (xi, &yi) in x.iter().zip(y) {
            let s = signed(yi) * self.decision(xi)?;
            hinge += (1.0 - s).max(0.0);
        }
        let reg = 0.5 * lambda * self.weights.iter().map(|w| w * w).sum::<f64>();
        Ok(reg + hinge / x.len().max(1) as f64)
    }
}

/// Score → class with ties going to class 0.
pub fn label_for_score(score: f64) -> u8 {
    u8::from(score > 0.0)
}

fn signed(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

fn check_inputs(x: &[SparseVector], y: &[u8]) -> Result<usize, SvmError> {
    if x.len() != y.len() {
        return Err(SvmError::LengthMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(SvmError::TooFewExamples(x.len()));
    }
    if let Some(&bad) = y.iter().find(|&&l| l > 1) {
        return Err(SvmError::InvalidLabel(bad));
    }
    let dim = x[0].dim();
    if let Some(v) = x.iter().find(|v| v.dim() != dim) {
        return Err(SvmError::DimensionMismatch {
            expected: dim,
            got: v.dim(),
        });
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(SvmError::SingleClassData(y[0]));
    }
    if x.iter().all(SparseVector::is_zero) {
        return Err(SvmError::DegenerateInput);
    }
    Ok(dim)
}

/// Train a linear SVM. Deterministic in `(x, y, cfg)`.
pub fn train(x: &[SparseVector], y: &[u8], cfg: &TrainConfig) -> Result<LinearModel, SvmError> {
    cfg.validate()?;
    let dim = check_inputs(x, y)?;
    let n = x.len();
    let lambda = cfg.lambda;
    let sq_norms: Vec<f64> = x
        .iter()
        .map(|xi| xi.entries().iter().map(|(_, v)| v * v).sum::<f64>() + 1.0)
        .collect();

    let mut v = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;

    // Running sum of the iterates scale·v without touching all of v per step:
    // Σ_t c_t v_t = C_T v_T − Σ_s δ_s C_{s−1}, with δ_s the change to v at step
    // s, c_t the scale after step t and C the prefix sum of c.
    let mut c_sum = 0.0f64;
    let mut correction = vec![0.0f64; dim];
    let mut bias_sum = 0.0f64;

    let mut rng = Pcg32::new(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            // At t = 1 the shrink factor is 0 and w is still 0.
            if t > 1 {
                scale *= 1.0 - eta * lambda;
            }
            let yi = signed(y[i]);
            let margin = yi * (scale * x[i].dot(&v) + bias);
            if margin < 1.0 {
                let step = eta.min((1.0 - margin) / sq_norms[i]);
                let coef = step * yi / scale;
                for &(j, xj) in x[i].entries() {
                    let delta = coef * xj;
                    v[j] += delta;
                    correction[j] += delta * c_sum;
                }
                bias += step * yi;
            }
            c_sum += scale;
            bias_sum += bias;
        }
    }

    let (weights, bias) = if cfg.average_weights {
        let steps = t as f64;
        let w = v
            .iter()
            .zip(&correction)
            .map(|(&vj, &cj)| (c_sum * vj - cj) / steps)
            .collect();
        (w, bias_sum / steps)
    } else {
        (v.iter().map(|&vj| scale * vj).collect(), bias)
    };

    let mut model = LinearModel::new(weights, bias, *cfg);
    let c = best_scale(&model, x, y, lambda);
    if c != 1.0 {
        model.weights.iter_mut().for_each(|w| *w *= c);
        model.bias *= c;
    }
    Ok(model)
}

/// Exact minimizer over `c ≥ 0` of the objective at `(c·w, c·b)`.
///
/// With margins `mᵢ`, the objective along the ray is the convex piecewise
/// quadratic `(λ/2)c²‖w‖² + (1/n)Σ max(0, 1 − c·mᵢ)`; its minimum lies at a
/// breakpoint `1/mᵢ` or at the stationary point of one of the pieces.
fn best_scale(model: &LinearModel, x: &[SparseVector], y: &[u8], lambda: f64) -> f64 {
    let n = x.len() as f64;
    let ww: f64 = model.weights.iter().map(|w| w * w).sum();
    let margins: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| signed(yi) * (xi.dot(&model.weights) + model.bias))
        .collect();
    let along = |c: f64| {
        0.5 * lambda * c * c * ww + margins.iter().map(|m| (1.0 - c * m).max(0.0)).sum::<f64>() / n
    };

    let mut breaks: Vec<f64> = margins
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|m| 1.0 / m)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut candidates = vec![0.0, 1.0];
    candidates.extend(&breaks);
    if ww > 0.0 {
        // Walk the pieces left to right. On (lo, hi) the active set is every
        // example with c·m < 1: all non-positive margins plus positive margins
        // whose breakpoint lies to the right.
        let mut positive: Vec<f64> = margins.iter().copied().filter(|&m| m > 0.0).collect();
        positive.sort_by(|a, b| b.total_cmp(a)); // breakpoints 1/m ascending
        let non_positive: f64 = margins.iter().filter(|&&m| m <= 0.0).sum();
        let mut active_positive: f64 = positive.iter().sum();
        let mut lo = 0.0;
        let mut k = 0;
        loop {
            let hi = positive.get(k).map_or(f64::INFINITY, |m| 1.0 / m);
            let stationary = (non_positive + active_positive) / (n * lambda * ww);
            if stationary >= lo && stationary <= hi {
                candidates.push(stationary);
            }
            if k == positive.len() {
                break;
            }
            active_positive -= positive[k];
            lo = hi;
            k += 1;
        }
    }

    candidates
        .into_iter()
        .filter(|c| c.is_finite())
        .map(|c| (along(c), c))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)))
        .map_or(1.0, |(_, c)| c)
}
