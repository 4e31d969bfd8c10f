//! Network assembly and the training loop.
//!
//! The network is one routed layer `R^d_in → R^d_out`. In [`NetworkMode::Routed`]
//! the activation is a Gumbel-Softmax mixture; in [`NetworkMode::Fixed`] the
//! same affine map is followed by a single fixed activation and the logits are
//! never touched.
//!
//! One training step on a batch:
//!
//! 1. draw one Gumbel noise vector and run the forward pass,
//! 2. MSE loss and the layer backward pass give the task gradients,
//! 3. gradient norms of the batch pre-activations give `p̃`, and the
//!    gradient of the floored `KL(p̃ ‖ p)` lands on the logits only,
//! 4. `W`, `b` descend on the task gradient; the logits descend on
//!    `task + α · KL`.

use serde::{Deserialize, Serialize};

use crate::activations::{ActivationKind, Catalog};
use crate::numkit::{Matrix, Rng, Vector};
use crate::regularizer::{
    gradient_norms, kl_divergence, kl_grad_wrt_logits, pseudo_probs, total_loss, LossBreakdown,
    RegularizerConfig,
};
use crate::routing::{gumbel_vector, Logits, ProbVector, RoutedLayer};
use crate::synthdata::Dataset;
use crate::{Error, Result};

/// Losses above this magnitude count as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Half-width of the uniform weight initialization.
pub const INIT_SCALE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetworkMode {
    Routed,
    Fixed(ActivationKind),
}

#[derive(Debug, Clone)]
pub struct Network {
    pub layer: RoutedLayer,
    pub mode: NetworkMode,
}

impl Network {
    /// Weights and bias uniform in `[−0.5, 0.5]` from `seed`, zero logits.
    pub fn new(d_in: usize, d_out: usize, mode: NetworkMode, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        Self {
            layer: RoutedLayer::init_uniform(d_in, d_out, INIT_SCALE, &mut rng),
            mode,
        }
    }

    pub fn with_catalog(mut self, catalog: Catalog) -> Self {
        self.layer = self.layer.with_catalog(catalog);
        self
    }

    /// The activation evaluation commits to.
    pub fn selected(&self) -> ActivationKind {
        match self.mode {
            NetworkMode::Routed => self.layer.hard_select(),
            NetworkMode::Fixed(kind) => kind,
        }
    }

    /// Deterministic prediction with the selected activation.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        let h = self.layer.affine(x)?;
        Ok(self.layer.mix(&h, &ProbVector::one_hot(self.selected())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub tau_start: f64,
    pub tau_end: f64,
    pub straight_through: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: 64,
            learning_rate: 0.05,
            alpha: 0.3,
            // λ = 0.3 and τ_end = 0.01 rather than 1.0 / 0.1: with the softer
            // target and the hotter end temperature the KL barrier keeps
            // samples from ever going near-discrete, so runs stall below 0.9.
            lambda: 0.3,
            tau_start: 1.0,
            tau_end: 0.01,
            straight_through: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be >= 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.tau_end > 0.0 && self.tau_end <= self.tau_start && self.tau_start.is_finite()) {
            return bad(format!(
                "temperatures must satisfy 0 < tau_end <= tau_start, got {} and {}",
                self.tau_end, self.tau_start
            ));
        }
        self.regularizer().validate()
    }

    pub fn regularizer(&self) -> RegularizerConfig {
        RegularizerConfig { lambda: self.lambda, alpha: self.alpha }
    }
}

/// One line of the training trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub task_loss: f64,
    pub kl_loss: f64,
    pub total_loss: f64,
    pub tau: f64,
    /// Mean of the epoch's sampled soft probabilities. One-hot on the fixed
    /// activation for fixed networks.
    pub p_soft: ProbVector,
    /// Hard selection (argmax of the logits) at the end of the epoch.
    pub selected: ActivationKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Epochs whose mean soft probabilities put the maximum on one of `kinds`.
    pub fn epochs_with_argmax_in(&self, kinds: &[ActivationKind]) -> usize {
        self.records.iter().filter(|r| kinds.contains(&r.p_soft.argmax())).count()
    }
}

/// Mean squared error and its gradient `2 (pred − target) / n`.
pub fn mse_loss(pred: &Vector, target: &Vector) -> Result<(f64, Vector)> {
    if pred.len() != target.len() {
        return Err(Error::Dimension { expected: target.len(), found: pred.len() });
    }
    if pred.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = Vector::from_fn(pred.len(), |i| {
        let e = pred[i] - target[i];
        loss += e * e;
        2.0 * e / n
    });
    Ok((loss / n, grad))
}

/// Geometric schedule from `tau_start` at epoch 0 to `tau_end` at the last epoch.
pub fn anneal_tau(epoch: usize, cfg: &TrainConfig) -> f64 {
    if cfg.epochs <= 1 || epoch == 0 {
        return cfg.tau_start;
    }
    if epoch >= cfg.epochs - 1 {
        return cfg.tau_end;
    }
    let frac = epoch as f64 / (cfg.epochs - 1) as f64;
    cfg.tau_start * (cfg.tau_end / cfg.tau_start).powf(frac)
}

/// Loss and parameter gradients for one batch.
#[derive(Debug, Clone)]
pub struct BatchStep {
    pub loss: LossBreakdown,
    pub grad_weights: Matrix,
    pub grad_bias: Vector,
    /// Task plus `α ·` KL gradient on the logits; zero for fixed networks.
    pub grad_logits: Logits,
    pub p_soft: ProbVector,
    /// The pseudo-probability target used for the KL term, if any.
    pub target: Option<ProbVector>,
}

/// Computes one batch step with explicit Gumbel noise.
///
/// `frozen_target` overrides the pseudo-probabilities; finite-difference
/// audits pass the target from the base point so that it stays a constant.
pub fn batch_step(
    net: &Network,
    x: &Matrix,
    y: &Vector,
    noise: &Logits,
    reg: &RegularizerConfig,
    frozen_target: Option<&ProbVector>,
) -> Result<BatchStep> {
    if x.rows() == 0 {
        return Err(Error::EmptyBatch);
    }
    let layer = &net.layer;
    let (pred, tape) = match net.mode {
        NetworkMode::Routed => layer.forward_with_noise(x, noise)?,
        NetworkMode::Fixed(kind) => layer.forward_fixed(x, kind)?,
    };
    let pred_v = Vector::new(pred.as_slice().to_vec());
    let (task, dpred) = mse_loss(&pred_v, y)?;
    let dy = Matrix::new(pred.rows(), pred.cols(), dpred.into_vec())?;
    let grads = layer.backward(&tape, &dy)?;

    let p_soft = *tape.p_soft();
    let (kl, grad_logits, target) = match net.mode {
        NetworkMode::Routed => {
            let target = match frozen_target {
                Some(t) => *t,
                None => pseudo_probs(&gradient_norms(tape.pre_activations(), layer.catalog())?, reg.lambda),
            };
            let kl = kl_divergence(&target, &p_soft);
            let kl_grad = kl_grad_wrt_logits(&target, &p_soft, tape.temperature());
            let g = std::array::from_fn(|l| grads.logits[l] + reg.alpha * kl_grad[l]);
            (kl, g, Some(target))
        }
        NetworkMode::Fixed(_) => (0.0, [0.0; 5], None),
    };

    Ok(BatchStep {
        loss: total_loss(task, kl, reg.alpha),
        grad_weights: grads.weights,
        grad_bias: grads.bias,
        grad_logits,
        p_soft,
        target,
    })
}

/// Mini-batch gradient descent; see the module docs for the step.
///
/// The run seed drives batch shuffling and Gumbel noise. Weight
/// initialization happens in [`Network::new`].
pub fn train(net: &mut Network, data: &Dataset, cfg: &TrainConfig) -> Result<TrainTrace> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if data.d_in() != net.layer.d_in() {
        return Err(Error::Dimension { expected: net.layer.d_in(), found: data.d_in() });
    }
    net.layer.set_straight_through(cfg.straight_through);
    let reg = cfg.regularizer();
    // Separate stream from the initialization stream of the same seed.
    let mut rng = Rng::new(cfg.seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = TrainTrace { records: Vec::with_capacity(cfg.epochs) };

    for epoch in 0..cfg.epochs {
        let tau = anneal_tau(epoch, cfg);
        net.layer.set_temperature(tau)?;
        rng.shuffle(&mut order);

        let (mut task_sum, mut kl_sum, mut seen) = (0.0, 0.0, 0usize);
        let mut p_sum = [0.0; 5];
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = data.select(chunk);
            let noise = match net.mode {
                NetworkMode::Routed => gumbel_vector(&mut rng),
                NetworkMode::Fixed(_) => [0.0; 5],
            };
            let step = batch_step(net, &batch.x, &batch.y, &noise, &reg, None)?;
            if !step.loss.total.is_finite() || step.loss.total.abs() > DIVERGENCE_LIMIT {
                return Err(Error::Diverged { epoch, loss: step.loss.total });
            }
            let logit_grad = match net.mode {
                NetworkMode::Routed => step.grad_logits,
                NetworkMode::Fixed(_) => [0.0; 5],
            };
            net.layer.descend(&step.grad_weights, &step.grad_bias, &logit_grad, cfg.learning_rate);

            let n = chunk.len();
            task_sum += step.loss.task * n as f64;
            kl_sum += step.loss.kl * n as f64;
            seen += n;
            for (a, v) in p_sum.iter_mut().zip(step.p_soft.as_array()) {
                *a += v;
            }
            batches += 1;
        }

        let task = task_sum / seen as f64;
        let kl = kl_sum / seen as f64;
        let loss = total_loss(task, kl, reg.alpha);
        let p_soft = ProbVector::normalized(p_sum.map(|v| v / batches as f64));
        trace.records.push(EpochRecord {
            epoch,
            task_loss: loss.task,
            kl_loss: loss.kl,
            total_loss: loss.total,
            tau,
            p_soft,
            selected: net.selected(),
        });
    }
    Ok(trace)
}

/// Test MSE with sampling disabled.
pub fn evaluate(net: &Network, data: &Dataset) -> Result<f64> {
    let pred = net.predict(&data.x)?;
    let (loss, _) = mse_loss(&Vector::new(pred.as_slice().to_vec()), &data.y)?;
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::{generate, DatasetSpec};

    #[test]
    fn mse_examples() {
        let v = Vector::new(vec![1.0, 2.0]);
        let (l, g) = mse_loss(&v, &v).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.iter().all(|x| *x == 0.0));

        let (l, g) = mse_loss(&Vector::new(vec![1.0]), &Vector::new(vec![0.0])).unwrap();
        assert_eq!((l, g.as_slice()), (1.0, &[2.0][..]));

        let (l, g) = mse_loss(&Vector::new(vec![1.0, 3.0]), &Vector::zeros(2)).unwrap();
        assert_eq!((l, g.as_slice()), (5.0, &[1.0, 3.0][..]));

        assert!(mse_loss(&Vector::zeros(2), &Vector::zeros(3)).is_err());
    }

    #[test]
    fn anneal_boundaries_and_midpoint() {
        let cfg = TrainConfig { epochs: 101, tau_start: 1.0, tau_end: 0.1, ..Default::default() };
        assert_eq!(anneal_tau(0, &cfg), 1.0);
        assert_eq!(anneal_tau(100, &cfg), 0.1);
        assert!((anneal_tau(50, &cfg) - 0.1f64.sqrt()).abs() < 1e-12);
        let taus: Vec<f64> = (0..101).map(|e| anneal_tau(e, &cfg)).collect();
        assert!(taus.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn anneal_single_epoch() {
        let cfg = TrainConfig { epochs: 1, ..Default::default() };
        assert_eq!(anneal_tau(0, &cfg), cfg.tau_start);
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::default();
        assert!(ok.validate().is_ok());
        assert!(TrainConfig { epochs: 0, ..ok }.validate().is_err());
        assert!(TrainConfig { tau_end: 2.0, ..ok }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..ok }.validate().is_err());
        assert!(TrainConfig { alpha: -0.1, ..ok }.validate().is_err());
    }

    #[test]
    fn identity_regression_converges() {
        let data = generate(&DatasetSpec::new(ActivationKind::Identity, 512, 3)).unwrap();
        let mut net = Network::new(4, 1, NetworkMode::Fixed(ActivationKind::Identity), 1);
        let cfg = TrainConfig { epochs: 60, alpha: 0.0, ..Default::default() };
        let trace = train(&mut net, &data, &cfg).unwrap();
        assert!(trace.last().unwrap().task_loss < 1e-6);
        assert!(evaluate(&net, &data).unwrap() < 1e-6);
    }

    #[test]
    fn zero_network_evaluates_finitely() {
        let data = generate(&DatasetSpec::new(ActivationKind::Tanh, 64, 3)).unwrap();
        let net = Network {
            layer: RoutedLayer::new(4, 1),
            mode: NetworkMode::Fixed(ActivationKind::Sigmoid),
        };
        let mse = evaluate(&net, &data).unwrap();
        let expected = data.y.iter().map(|y| (0.5 - y).powi(2)).sum::<f64>() / 64.0;
        assert!((mse - expected).abs() < 1e-12);
    }

    #[test]
    fn trace_bookkeeping() {
        let data = generate(&DatasetSpec::new(ActivationKind::Tanh, 256, 3)).unwrap();
        let mut net = Network::new(4, 1, NetworkMode::Routed, 2);
        let cfg = TrainConfig { epochs: 12, seed: 2, ..Default::default() };
        let trace = train(&mut net, &data, &cfg).unwrap();
        assert_eq!(trace.len(), 12);
        for (i, r) in trace.records.iter().enumerate() {
            assert_eq!(r.epoch, i);
            assert!((r.total_loss - (r.task_loss + cfg.alpha * r.kl_loss)).abs() <= 1e-12);
            assert!(ProbVector::new(*r.p_soft.as_array()).is_ok());
        }
        assert!(trace.records.windows(2).all(|w| w[1].tau <= w[0].tau));
    }

    #[test]
    fn divergence_is_reported() {
        let data = generate(&DatasetSpec::new(ActivationKind::Identity, 128, 3)).unwrap();
        let mut net = Network::new(4, 1, NetworkMode::Fixed(ActivationKind::Identity), 1);
        let cfg = TrainConfig { learning_rate: 50.0, epochs: 50, ..Default::default() };
        let err = train(&mut net, &data, &cfg).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn fixed_mode_leaves_logits_alone() {
        let data = generate(&DatasetSpec::new(ActivationKind::Relu, 128, 3)).unwrap();
        let mut net = Network::new(4, 1, NetworkMode::Fixed(ActivationKind::Tanh), 1);
        train(&mut net, &data, &TrainConfig { epochs: 3, ..Default::default() }).unwrap();
        assert_eq!(net.layer.logits(), &[0.0; 5]);
    }
}
