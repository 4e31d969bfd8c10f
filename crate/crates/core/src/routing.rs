//! Gumbel-Softmax activation routing.
//!
//! A [`RoutedLayer`] holds an affine map `h = W x + b`, five trainable
//! routing logits and a temperature `τ`. Each forward pass draws one Gumbel
//! noise vector `g` (shared by every unit and every row of the batch), forms
//! `p = softmax((logits + g) / τ)` and outputs `y = Σ_j p_j σ_j(h)`.
//!
//! Backward pass, for upstream gradient `δ = ∂L/∂y`:
//!
//! ```text
//! ∂y/∂h      = Σ_j p_fwd_j σ_j'(h)
//! dW         = (δ ⊙ ∂y/∂h) xᵀ            db = δ ⊙ ∂y/∂h
//! dx         = Wᵀ (δ ⊙ ∂y/∂h)
//! u_j        = Σ_k δ_k σ_j(h_k)          (∂L/∂p_j)
//! dlogits_l  = p_l (u_l − Σ_j u_j p_j) / τ
//! ```
//!
//! With straight-through enabled the forward pass mixes with the one-hot
//! `p_fwd = onehot(argmax p)` while `dlogits` still uses the soft `p`.

use serde::{Deserialize, Serialize};

use crate::activations::{ActivationKind, Catalog, NUM_CANDIDATES};
use crate::numkit::{Matrix, Rng, Vector};
use crate::{Error, Result};

pub type Logits = [f64; NUM_CANDIDATES];

/// Tolerance on `Σ p = 1` accepted by [`ProbVector::new`].
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Selection weights over the catalog; non-negative and summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; NUM_CANDIDATES]", into = "[f64; NUM_CANDIDATES]")]
pub struct ProbVector([f64; NUM_CANDIDATES]);

impl ProbVector {
    pub fn new(p: [f64; NUM_CANDIDATES]) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidConfig(format!("not a probability vector: {p:?}")));
        }
        Ok(Self(p))
    }

    /// Normalizes a non-negative vector with a positive sum.
    pub(crate) fn normalized(mut p: [f64; NUM_CANDIDATES]) -> Self {
        let sum: f64 = p.iter().sum();
        for v in &mut p {
            *v /= sum;
        }
        Self(p)
    }

    pub fn uniform() -> Self {
        Self([1.0 / NUM_CANDIDATES as f64; NUM_CANDIDATES])
    }

    pub fn one_hot(kind: ActivationKind) -> Self {
        let mut p = [0.0; NUM_CANDIDATES];
        p[kind.index()] = 1.0;
        Self(p)
    }

    #[inline]
    pub fn as_array(&self) -> &[f64; NUM_CANDIDATES] {
        &self.0
    }

    #[inline]
    pub fn get(&self, kind: ActivationKind) -> f64 {
        self.0[kind.index()]
    }

    /// Largest entry; ties go to the lowest catalog index.
    pub fn argmax(&self) -> ActivationKind {
        ActivationKind::ALL[argmax_index(&self.0)]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_one_hot(&self) -> bool {
        self.0.iter().filter(|&&v| v == 1.0).count() == 1 && self.0.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Entry-wise mean of several probability vectors.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a ProbVector>) -> Option<ProbVector> {
        let mut acc = [0.0; NUM_CANDIDATES];
        let mut n = 0usize;
        for p in items {
            for (a, v) in acc.iter_mut().zip(p.0) {
                *a += v;
            }
            n += 1;
        }
        (n > 0).then(|| ProbVector::normalized(acc))
    }
}

impl TryFrom<[f64; NUM_CANDIDATES]> for ProbVector {
    type Error = Error;
    fn try_from(p: [f64; NUM_CANDIDATES]) -> Result<Self> {
        // Decoding tolerates the rounding a text round trip introduces.
        let sum: f64 = p.iter().sum();
        if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("not a probability vector: {p:?}")));
        }
        Ok(Self(p))
    }
}

impl From<ProbVector> for [f64; NUM_CANDIDATES] {
    fn from(p: ProbVector) -> Self {
        p.0
    }
}

pub(crate) fn argmax_index(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate().skip(1) {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

/// `−ln(−ln u)`: maps a uniform draw to a standard Gumbel draw.
#[inline]
pub fn gumbel_from_uniform(u: f64) -> f64 {
    -(-u.ln()).ln()
}

/// One standard Gumbel draw. Finite because the uniform is clamped away from 0 and 1.
pub fn gumbel_noise(rng: &mut Rng) -> f64 {
    gumbel_from_uniform(rng.uniform_open())
}

/// One Gumbel draw per candidate.
pub fn gumbel_vector(rng: &mut Rng) -> Logits {
    std::array::from_fn(|_| gumbel_noise(rng))
}

/// `softmax(scores / τ)` with the maximum subtracted before scaling.
pub fn tempered_softmax(scores: &Logits, tau: f64) -> ProbVector {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = scores.map(|s| ((s - m) / tau).exp());
    ProbVector::normalized(e)
}

/// Gumbel-Softmax sample with caller-supplied noise.
pub fn gumbel_softmax_with_noise(logits: &Logits, noise: &Logits, tau: f64) -> ProbVector {
    let scores = std::array::from_fn(|j| logits[j] + noise[j]);
    tempered_softmax(&scores, tau)
}

/// Draws fresh Gumbel noise and returns `softmax((logits + g) / τ)`.
pub fn gumbel_softmax_sample(logits: &Logits, tau: f64, rng: &mut Rng) -> ProbVector {
    let noise = gumbel_vector(rng);
    gumbel_softmax_with_noise(logits, &noise, tau)
}

/// Vector-Jacobian product through `p = softmax(z / τ)`:
/// returns `∂L/∂z` given `∂L/∂p`.
pub fn softmax_vjp(p: &ProbVector, upstream: &Logits, tau: f64) -> Logits {
    let p = p.as_array();
    let dot: f64 = p.iter().zip(upstream).map(|(a, b)| a * b).sum();
    std::array::from_fn(|l| p[l] * (upstream[l] - dot) / tau)
}

/// Catalog entry with the largest logit; ties go to the lowest index.
pub fn hard_select_logits(logits: &Logits) -> ActivationKind {
    ActivationKind::ALL[argmax_index(logits)]
}

/// Affine map followed by a Gumbel-Softmax mixture of the catalog.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutedLayer {
    weights: Matrix,
    bias: Vector,
    logits: Logits,
    temperature: f64,
    straight_through: bool,
    catalog: Catalog,
    #[serde(skip)]
    version: u64,
}

/// Parameter gradients from [`RoutedLayer::backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vector,
    pub logits: Logits,
    /// `∂L/∂x`, one row per batch row.
    pub input: Matrix,
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct RouteTape {
    x: Matrix,
    h: Matrix,
    noise: Logits,
    p_soft: ProbVector,
    p_fwd: ProbVector,
    temperature: f64,
    straight_through: bool,
    version: u64,
}

impl RouteTape {
    pub fn pre_activations(&self) -> &Matrix {
        &self.h
    }

    pub fn noise(&self) -> &Logits {
        &self.noise
    }

    pub fn p_soft(&self) -> &ProbVector {
        &self.p_soft
    }

    pub fn p_fwd(&self) -> &ProbVector {
        &self.p_fwd
    }

    pub fn straight_through(&self) -> bool {
        self.straight_through
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// `σ_j(h)` for every candidate at pre-activation `(row, unit)`.
    pub fn candidate_values(&self, catalog: &Catalog, row: usize, unit: usize) -> Logits {
        catalog.values_all(self.h.get(row, unit))
    }
}

impl RoutedLayer {
    /// Zero weights and bias, uniform logits, `τ = 1`.
    pub fn new(d_in: usize, d_out: usize) -> Self {
        Self {
            weights: Matrix::zeros(d_out, d_in),
            bias: Vector::zeros(d_out),
            logits: [0.0; NUM_CANDIDATES],
            temperature: 1.0,
            straight_through: false,
            catalog: Catalog::default(),
            version: 0,
        }
    }

    /// Weights and bias uniform in `[−scale, scale]`, zero logits.
    pub fn init_uniform(d_in: usize, d_out: usize, scale: f64, rng: &mut Rng) -> Self {
        let mut layer = Self::new(d_in, d_out);
        for w in layer.weights.as_mut_slice() {
            *w = rng.uniform_range(-scale, scale);
        }
        for b in layer.bias.as_mut_slice() {
            *b = rng.uniform_range(-scale, scale);
        }
        layer
    }

    pub fn from_params(weights: Matrix, bias: Vector) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Dimension { expected: weights.rows(), found: bias.len() });
        }
        let mut layer = Self::new(weights.cols(), weights.rows());
        layer.weights = weights;
        layer.bias = bias;
        Ok(layer)
    }

    pub fn with_catalog(mut self, catalog: Catalog) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn with_straight_through(mut self, on: bool) -> Self {
        self.straight_through = on;
        self
    }

    pub fn d_in(&self) -> usize {
        self.weights.cols()
    }

    pub fn d_out(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &Vector {
        &self.bias
    }

    pub fn logits(&self) -> &Logits {
        &self.logits
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn straight_through(&self) -> bool {
        self.straight_through
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn set_logits(&mut self, logits: Logits) -> Result<()> {
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("logits must be finite".into()));
        }
        self.logits = logits;
        self.version += 1;
        Ok(())
    }

    pub fn set_temperature(&mut self, tau: f64) -> Result<()> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidConfig(format!("temperature must be > 0, got {tau}")));
        }
        self.temperature = tau;
        self.version += 1;
        Ok(())
    }

    pub fn set_straight_through(&mut self, on: bool) {
        self.straight_through = on;
        self.version += 1;
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        self.version += 1;
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut Vector {
        self.version += 1;
        &mut self.bias
    }

    /// Gradient-descent step on all parameters.
    pub fn descend(&mut self, w: &Matrix, b: &Vector, logits: &Logits, lr: f64) {
        for (p, g) in self.weights.as_mut_slice().iter_mut().zip(w.as_slice()) {
            *p -= lr * g;
        }
        for (p, g) in self.bias.as_mut_slice().iter_mut().zip(b.as_slice()) {
            *p -= lr * g;
        }
        for (p, g) in self.logits.iter_mut().zip(logits) {
            *p -= lr * g;
        }
        self.version += 1;
    }

    /// Catalog entry at the argmax of the logits.
    pub fn hard_select(&self) -> ActivationKind {
        hard_select_logits(&self.logits)
    }

    /// Pre-activations `h = x Wᵀ + b`, one row per input row.
    pub fn affine(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.d_in() {
            return Err(Error::Dimension { expected: self.d_in(), found: x.cols() });
        }
        let (d_in, d_out) = (self.d_in(), self.d_out());
        let mut h = Matrix::zeros(x.rows(), d_out);
        for r in 0..x.rows() {
            let xr = x.row(r);
            for o in 0..d_out {
                let wr = &self.weights.as_slice()[o * d_in..(o + 1) * d_in];
                let dot: f64 = wr.iter().zip(xr).map(|(a, b)| a * b).sum();
                h.set(r, o, dot + self.bias[o]);
            }
        }
        Ok(h)
    }

    /// Forward pass over a batch with the given Gumbel noise.
    pub fn forward_with_noise(&self, x: &Matrix, noise: &Logits) -> Result<(Matrix, RouteTape)> {
        let p_soft = gumbel_softmax_with_noise(&self.logits, noise, self.temperature);
        let p_fwd = if self.straight_through {
            ProbVector::one_hot(p_soft.argmax())
        } else {
            p_soft
        };
        self.forward_with_probs(x, *noise, p_soft, p_fwd)
    }

    /// Forward pass over a batch, drawing one noise vector from `rng`.
    pub fn forward(&self, x: &Matrix, rng: &mut Rng) -> Result<(Matrix, RouteTape)> {
        let noise = gumbel_vector(rng);
        self.forward_with_noise(x, &noise)
    }

    /// Forward pass with a single fixed activation; the logits get zero gradient.
    pub fn forward_fixed(&self, x: &Matrix, kind: ActivationKind) -> Result<(Matrix, RouteTape)> {
        let p = ProbVector::one_hot(kind);
        self.forward_with_probs(x, [0.0; NUM_CANDIDATES], p, p)
    }

    fn forward_with_probs(
        &self,
        x: &Matrix,
        noise: Logits,
        p_soft: ProbVector,
        p_fwd: ProbVector,
    ) -> Result<(Matrix, RouteTape)> {
        let h = self.affine(x)?;
        let y = self.mix(&h, &p_fwd);
        let tape = RouteTape {
            x: x.clone(),
            h,
            noise,
            p_soft,
            p_fwd,
            temperature: self.temperature,
            straight_through: self.straight_through,
            version: self.version,
        };
        Ok((y, tape))
    }

    /// `Σ_j p_j σ_j(h)` element-wise. One-hot weights evaluate only the
    /// selected candidate, so the output is bit-equal to that activation.
    pub fn mix(&self, h: &Matrix, p: &ProbVector) -> Matrix {
        let mut y = h.clone();
        if p.is_one_hot() {
            let kind = p.argmax();
            for v in y.as_mut_slice() {
                *v = self.catalog.value(kind, *v);
            }
            return y;
        }
        let pa = p.as_array();
        for v in y.as_mut_slice() {
            let vals = self.catalog.values_all(*v);
            *v = vals.iter().zip(pa).map(|(s, w)| s * w).sum();
        }
        y
    }

    /// Deterministic evaluation: applies the hard-selected activation, no noise.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        let h = self.affine(x)?;
        Ok(self.mix(&h, &ProbVector::one_hot(self.hard_select())))
    }

    /// Backward pass for a tape produced by this layer's most recent
    /// parameter state. `dy` has one row per batch row.
    pub fn backward(&self, tape: &RouteTape, dy: &Matrix) -> Result<LayerGrads> {
        if tape.version != self.version {
            return Err(Error::StaleTape);
        }
        if dy.rows() != tape.h.rows() || dy.cols() != tape.h.cols() {
            return Err(Error::Dimension {
                expected: tape.h.rows() * tape.h.cols(),
                found: dy.rows() * dy.cols(),
            });
        }
        let (d_in, d_out) = (self.d_in(), self.d_out());
        let p_fwd = tape.p_fwd.as_array();
        let mut dw = Matrix::zeros(d_out, d_in);
        let mut db = Vector::zeros(d_out);
        let mut dx = Matrix::zeros(tape.x.rows(), d_in);
        let mut dp = [0.0; NUM_CANDIDATES];

        for r in 0..tape.x.rows() {
            let xr = tape.x.row(r);
            for o in 0..d_out {
                let h = tape.h.get(r, o);
                let delta = dy.get(r, o);
                if delta == 0.0 {
                    continue;
                }
                let vals = self.catalog.values_all(h);
                let ders = self.catalog.derivatives_all(h);
                let dy_dh: f64 = ders.iter().zip(p_fwd).map(|(d, p)| d * p).sum();
                let dh = delta * dy_dh;
                db[o] += dh;
                for c in 0..d_in {
                    let i = o * d_in + c;
                    dw.as_mut_slice()[i] += dh * xr[c];
                    let cur = dx.get(r, c);
                    dx.set(r, c, cur + dh * self.weights.as_slice()[i]);
                }
                for (acc, v) in dp.iter_mut().zip(vals) {
                    *acc += delta * v;
                }
            }
        }

        let dlogits = softmax_vjp(&tape.p_soft, &dp, tape.temperature);
        Ok(LayerGrads { weights: dw, bias: db, logits: dlogits, input: dx })
    }
}

/// Single-sample forward pass: `x` is one input vector.
pub fn route_forward(layer: &RoutedLayer, x: &Vector, rng: &mut Rng) -> Result<(Vector, RouteTape)> {
    let xm = Matrix::new(1, x.len(), x.as_slice().to_vec())?;
    let (y, tape) = layer.forward(&xm, rng)?;
    Ok((Vector::new(y.as_slice().to_vec()), tape))
}

/// Single-sample backward pass matching [`route_forward`].
pub fn route_backward(
    layer: &RoutedLayer,
    tape: &RouteTape,
    dl_dy: &Vector,
) -> Result<(Matrix, Vector, Logits, Vector)> {
    let dy = Matrix::new(1, dl_dy.len(), dl_dy.as_slice().to_vec())?;
    if tape.x.rows() != 1 {
        return Err(Error::Dimension { expected: 1, found: tape.x.rows() });
    }
    let g = layer.backward(tape, &dy)?;
    Ok((g.weights, g.bias, g.logits, Vector::new(g.input.as_slice().to_vec())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{finite_diff_grad, rel_error};

    #[test]
    fn gumbel_transform_fixed_points() {
        assert!(gumbel_from_uniform((-1.0f64).exp()).abs() < 1e-15);
        let u = (-std::f64::consts::E).exp();
        assert!((gumbel_from_uniform(u) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gumbel_noise_always_finite() {
        assert!(gumbel_from_uniform(crate::numkit::UNIFORM_EPS).is_finite());
        assert!(gumbel_from_uniform(1.0 - crate::numkit::UNIFORM_EPS).is_finite());
        let mut rng = Rng::new(0);
        assert!((0..10_000).all(|_| gumbel_noise(&mut rng).is_finite()));
    }

    #[test]
    fn high_temperature_is_uniform() {
        let mut rng = Rng::new(1);
        let p = gumbel_softmax_sample(&[0.0; 5], 1e6, &mut rng);
        assert!(p.as_array().iter().all(|v| (v - 0.2).abs() < 1e-4));
    }

    #[test]
    fn low_temperature_dominance() {
        let mut rng = Rng::new(2);
        for _ in 0..1000 {
            let p = gumbel_softmax_sample(&[10.0, 0.0, 0.0, 0.0, 0.0], 0.01, &mut rng);
            assert!(p.as_array()[0] > 0.999);
        }
    }

    #[test]
    fn extreme_temperature_stays_on_simplex() {
        let p = tempered_softmax(&[700.0, -700.0, 0.0, 1.0, 2.0], 1e-3);
        assert!(ProbVector::new(*p.as_array()).is_ok());
        assert_eq!(p.argmax(), ActivationKind::Relu);
    }

    #[test]
    fn hard_select_examples() {
        assert_eq!(hard_select_logits(&[0.0, 0.0, 0.0, 0.0, 9.0]), ActivationKind::Identity);
        assert_eq!(hard_select_logits(&[0.0; 5]), ActivationKind::Relu);
        assert_eq!(hard_select_logits(&[1.0, 3.0, 2.0, 0.0, -1.0]), ActivationKind::Sigmoid);
    }

    #[test]
    fn identity_routing_passes_input_through() {
        let mut layer = RoutedLayer::from_params(Matrix::identity(3), Vector::zeros(3)).unwrap();
        layer.set_logits([0.0, 0.0, 0.0, 0.0, 50.0]).unwrap();
        layer.set_temperature(1e-3).unwrap();
        let x = Vector::new(vec![0.3, -1.2, 4.0]);
        let (y, tape) = route_forward(&layer, &x, &mut Rng::new(0)).unwrap();
        assert_eq!(tape.p_soft().argmax(), ActivationKind::Identity);
        for (a, b) in y.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_mixture_at_zero() {
        let layer = RoutedLayer::new(2, 1);
        let x = Matrix::new(1, 2, vec![0.7, -0.4]).unwrap();
        let (y, tape) = layer.forward_with_noise(&x, &[0.0; 5]).unwrap();
        assert_eq!(tape.p_soft(), &ProbVector::uniform());
        assert!((y.get(0, 0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn straight_through_forward_is_exact() {
        let mut layer = RoutedLayer::init_uniform(3, 2, 0.5, &mut Rng::new(4)).with_straight_through(true);
        layer.set_logits([0.0, 0.0, 30.0, 0.0, 0.0]).unwrap();
        let x = Matrix::new(1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let (y, tape) = layer.forward(&x, &mut Rng::new(3)).unwrap();
        assert!(tape.p_fwd().is_one_hot());
        let h = layer.affine(&x).unwrap();
        for (a, b) in y.as_slice().iter().zip(h.as_slice()) {
            assert_eq!(*a, b.tanh());
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let layer = RoutedLayer::init_uniform(4, 1, 0.5, &mut Rng::new(8));
        let x = Vector::new(vec![0.1, 0.2, -0.3, 0.4]);
        let (_, tape) = route_forward(&layer, &x, &mut Rng::new(1)).unwrap();
        let (dw, db, dl, dx) = route_backward(&layer, &tape, &Vector::zeros(1)).unwrap();
        assert!(dw.as_slice().iter().chain(db.iter()).chain(dl.iter()).chain(dx.iter()).all(|v| *v == 0.0));
    }

    #[test]
    fn identity_one_hot_reduces_to_linear_gradient() {
        let mut layer = RoutedLayer::init_uniform(4, 1, 0.5, &mut Rng::new(8)).with_straight_through(true);
        layer.set_logits([0.0, 0.0, 0.0, 0.0, 40.0]).unwrap();
        let x = Vector::new(vec![0.1, 0.2, -0.3, 0.4]);
        let (_, tape) = route_forward(&layer, &x, &mut Rng::new(1)).unwrap();
        let (dw, db, _, _) = route_backward(&layer, &tape, &Vector::new(vec![1.5])).unwrap();
        for (g, xi) in dw.as_slice().iter().zip(x.iter()) {
            assert!((g - 1.5 * xi).abs() < 1e-15);
        }
        assert_eq!(db[0], 1.5);
    }

    #[test]
    fn stale_tape_is_rejected() {
        let mut layer = RoutedLayer::init_uniform(4, 1, 0.5, &mut Rng::new(8));
        let x = Vector::new(vec![0.1, 0.2, -0.3, 0.4]);
        let (_, tape) = route_forward(&layer, &x, &mut Rng::new(1)).unwrap();
        layer.set_temperature(0.5).unwrap();
        let err = route_backward(&layer, &tape, &Vector::new(vec![1.0])).unwrap_err();
        assert!(matches!(err, Error::StaleTape));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let layer = RoutedLayer::new(4, 1);
        assert!(route_forward(&layer, &Vector::zeros(3), &mut Rng::new(0)).is_err());
    }

    #[test]
    fn softmax_vjp_matches_finite_differences() {
        let mut rng = Rng::new(12);
        for _ in 0..50 {
            let z: Logits = std::array::from_fn(|_| rng.uniform_range(-2.0, 2.0));
            let up: Logits = std::array::from_fn(|_| rng.uniform_range(-1.0, 1.0));
            let tau = rng.uniform_range(0.2, 2.0);
            let f = |v: &Vector| {
                let zz: Logits = std::array::from_fn(|i| v[i]);
                let p = tempered_softmax(&zz, tau);
                p.as_array().iter().zip(&up).map(|(a, b)| a * b).sum::<f64>()
            };
            let fd = finite_diff_grad(f, &Vector::new(z.to_vec()), 1e-6).unwrap();
            let an = softmax_vjp(&tempered_softmax(&z, tau), &up, tau);
            for (a, b) in an.iter().zip(fd.iter()) {
                assert!(rel_error(*a, *b, 1e-6) < 1e-5, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new([0.5, 0.5, 0.0, 0.0, 0.0]).is_ok());
        assert!(ProbVector::new([0.5, 0.6, 0.0, 0.0, 0.0]).is_err());
        assert!(ProbVector::new([1.5, -0.5, 0.0, 0.0, 0.0]).is_err());
        assert!(ProbVector::one_hot(ActivationKind::Tanh).is_one_hot());
        assert!(!ProbVector::uniform().is_one_hot());
    }
}
