//! Gradient-norm pseudo-probabilities and the KL bias correction.
//!
//! For each candidate `i` the per-sample norm is `‖σ_i'(h)‖₂` over the routed
//! layer's output units; `ḡ_i` is its batch mean. The target
//! `p̃ = softmax(−ḡ / λ)` favors candidates with small gradients, and the
//! penalty `KL(p̃ ‖ p)` pulls the router away from activations that win only
//! because their outputs are large. `p̃` is a constant target: no gradient
//! flows back through `ḡ`.

use serde::{Deserialize, Serialize};

use crate::activations::{Catalog, NUM_CANDIDATES};
use crate::numkit::Matrix;
use crate::routing::{softmax_vjp, Logits, ProbVector};
use crate::{Error, Result};

/// Probabilities are clamped to this floor inside the KL logarithm.
pub const KL_PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientNormStats {
    /// Per-sample norms `g`, one entry per batch row.
    pub per_sample: Vec<[f64; NUM_CANDIDATES]>,
    /// Batch-averaged norms `ḡ`.
    pub mean: [f64; NUM_CANDIDATES],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerConfig {
    /// Pseudo-probability temperature `λ`.
    pub lambda: f64,
    /// KL weight `α`.
    pub alpha: f64,
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        Self { lambda: 0.3, alpha: 0.3 }
    }
}

impl RegularizerConfig {
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        let cfg = Self { lambda, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Task loss, KL term and their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub task: f64,
    pub kl: f64,
    pub total: f64,
}

/// Per-candidate derivative norms over a batch of pre-activations
/// (`batch × d_out`).
pub fn gradient_norms(h_batch: &Matrix, catalog: &Catalog) -> Result<GradientNormStats> {
    if h_batch.rows() == 0 || h_batch.cols() == 0 {
        return Err(Error::EmptyBatch);
    }
    let mut sum = [0.0; NUM_CANDIDATES];
    let mut per_sample = Vec::with_capacity(h_batch.rows());
    for r in 0..h_batch.rows() {
        let mut sq = [0.0; NUM_CANDIDATES];
        for &h in h_batch.row(r) {
            for (s, d) in sq.iter_mut().zip(catalog.derivatives_all(h)) {
                *s += d * d;
            }
        }
        let norms = sq.map(f64::sqrt);
        per_sample.push(norms);
        for (s, n) in sum.iter_mut().zip(norms) {
            *s += n;
        }
    }
    let n = h_batch.rows() as f64;
    Ok(GradientNormStats { per_sample, mean: sum.map(|s| s / n) })
}

/// `softmax(−ḡ / λ)`.
pub fn pseudo_probs(stats: &GradientNormStats, lambda: f64) -> ProbVector {
    let scores = stats.mean.map(|g| -g / lambda);
    crate::routing::tempered_softmax(&scores, 1.0)
}

/// `Σ_k p̃_k ln(p̃_k / p_k)` with `0·ln 0 = 0` and `p_k` floored at
/// [`KL_PROB_FLOOR`].
pub fn kl_divergence(target: &ProbVector, model: &ProbVector) -> f64 {
    let kl: f64 = target
        .as_array()
        .iter()
        .zip(model.as_array())
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, p)| t * (t.ln() - p.max(KL_PROB_FLOOR).ln()))
        .sum();
    // Rounding can leave a tiny negative value when target == model.
    kl.max(0.0)
}

pub fn total_loss(task: f64, kl: f64, alpha: f64) -> LossBreakdown {
    LossBreakdown { task, kl, total: task + alpha * kl }
}

/// Gradient of [`kl_divergence`]`(p̃, softmax(z / τ))` with respect to the
/// logits `z`, holding `p̃` constant.
///
/// Assembled from `∂KL/∂p_k = −p̃_k / p_k` and the tempered-softmax Jacobian.
/// Entries whose probability sits below the log floor contribute nothing,
/// exactly as the clamped loss is flat there. Once a near-discrete sample has
/// driven the losing candidates under the floor the correction switches off
/// instead of dragging their logits back up.
pub fn kl_grad_wrt_logits(target: &ProbVector, p_soft: &ProbVector, tau: f64) -> Logits {
    let t = target.as_array();
    let p = p_soft.as_array();
    let upstream: Logits = std::array::from_fn(|k| if t[k] > 0.0 && p[k] >= KL_PROB_FLOOR { -t[k] / p[k] } else { 0.0 });
    softmax_vjp(p_soft, &upstream, tau)
}

/// The unclamped closed form `(p − p̃) / τ`. Equal to
/// [`kl_grad_wrt_logits`] whenever every `p_k` is at or above the floor.
pub fn kl_grad_unclamped(target: &ProbVector, p_soft: &ProbVector, tau: f64) -> Logits {
    let t = target.as_array();
    let p = p_soft.as_array();
    std::array::from_fn(|l| (p[l] - t[l]) / tau)
}
