//! Oracle and property checks shared by the integration tests and the
//! acceptance runner. Each check returns a report instead of panicking so the
//! acceptance runner can print a verdict line.

#![allow(dead_code)]

use actroute::activations::ActivationKind;
use actroute::model::{batch_step, Network, NetworkMode};
use actroute::numkit::{finite_diff_grad_fourth, rel_error, Matrix, Rng, Vector};
use actroute::regularizer::{gradient_norms, kl_divergence, kl_grad_wrt_logits, pseudo_probs};
use actroute::routing::{
    gumbel_noise, gumbel_softmax_sample, gumbel_vector, route_backward, tempered_softmax, Logits, ProbVector,
    RoutedLayer,
};
use actroute::{Catalog, RegularizerConfig};

pub const GRAD_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-3;
const REL_FLOOR: f64 = 1e-6;
/// Pre-activations closer than this to a kink are resampled.
const KINK_MARGIN: f64 = 0.05;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checked: usize,
    pub worst: f64,
    pub failures: Vec<String>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn compare(&mut self, what: &str, analytic: &[f64], numeric: &[f64], tol: f64) {
        for (k, (a, n)) in analytic.iter().zip(numeric).enumerate() {
            let e = rel_error(*a, *n, REL_FLOOR);
            self.worst = self.worst.max(e);
            if !(e < tol) && self.failures.len() < 10 {
                self.failures.push(format!("{what}[{k}]: analytic {a:e} vs numeric {n:e} (rel {e:.2e})"));
            }
        }
    }

    fn require(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        if !cond && self.failures.len() < 10 {
            self.failures.push(msg());
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.worst = self.worst.max(other.worst);
        self.failures.extend(other.failures);
    }
}

fn random_logits(rng: &mut Rng, spread: f64) -> Logits {
    std::array::from_fn(|_| rng.uniform_range(-spread, spread))
}

pub fn random_simplex(rng: &mut Rng) -> ProbVector {
    let raw: Logits = std::array::from_fn(|_| -rng.uniform_open().ln());
    tempered_softmax(&raw.map(f64::ln), 1.0)
}

fn random_matrix(rng: &mut Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.uniform_range(-scale, scale)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Layer parameters flattened as `[W row-major, b, logits]`.
fn pack(layer: &RoutedLayer) -> Vector {
    let mut v = layer.weights().as_slice().to_vec();
    v.extend_from_slice(layer.bias().as_slice());
    v.extend_from_slice(layer.logits());
    Vector::new(v)
}

fn unpack(template: &RoutedLayer, v: &Vector) -> RoutedLayer {
    let (d_out, d_in) = (template.d_out(), template.d_in());
    let s = v.as_slice();
    let w = Matrix::new(d_out, d_in, s[..d_out * d_in].to_vec()).unwrap();
    let b = Vector::new(s[d_out * d_in..d_out * d_in + d_out].to_vec());
    let mut layer = RoutedLayer::from_params(w, b)
        .unwrap()
        .with_catalog(*template.catalog())
        .with_straight_through(template.straight_through());
    layer.set_temperature(template.temperature()).unwrap();
    layer.set_logits(std::array::from_fn(|i| s[d_out * d_in + d_out + i])).unwrap();
    layer
}

fn far_from_kinks(layer: &RoutedLayer, x: &Matrix) -> bool {
    layer.affine(x).unwrap().as_slice().iter().all(|h| h.abs() > KINK_MARGIN)
}

/// A random layer and input whose pre-activations avoid the ReLU kink.
fn random_layer_and_input(rng: &mut Rng, rows: usize) -> (RoutedLayer, Matrix) {
    loop {
        let d_in = 1 + rng.below(5);
        let d_out = 1 + rng.below(3);
        let w = random_matrix(rng, d_out, d_in, 1.5);
        let b = Vector::from_fn(d_out, |_| rng.uniform_range(-1.0, 1.0));
        let mut layer = RoutedLayer::from_params(w, b).unwrap();
        layer.set_logits(random_logits(rng, 2.0)).unwrap();
        layer.set_temperature(rng.uniform_range(0.3, 3.0)).unwrap();
        let x = random_matrix(rng, rows, d_in, 2.0);
        if far_from_kinks(&layer, &x) {
            return (layer, x);
        }
    }
}

/// `route_backward` against central differences of `c · route_forward(x)`
/// with frozen Gumbel noise. Straight-through configurations check `W`, `b`
/// and `x` only: the surrogate logit gradient is not the derivative of the
/// hard forward pass by construction.
pub fn route_backward_oracle(configs: usize, seed: u64) -> Report {
    let mut rng = Rng::new(seed);
    let mut rep = Report::default();
    for cfg in 0..configs {
        let (mut layer, x) = random_layer_and_input(&mut rng, 1);
        let st = cfg % 4 == 3;
        layer.set_straight_through(st);
        let noise = gumbel_vector(&mut rng);
        let c = Vector::from_fn(layer.d_out(), |_| rng.uniform_range(-1.0, 1.0));
        let loss = |l: &RoutedLayer, xx: &Matrix| {
            let (y, _) = l.forward_with_noise(xx, &noise).unwrap();
            y.as_slice().iter().zip(c.iter()).map(|(a, b)| a * b).sum::<f64>()
        };

        let (_, tape) = layer.forward_with_noise(&x, &noise).unwrap();
        let (gw, gb, gl, gx) = route_backward(&layer, &tape, &c).unwrap();

        let theta = pack(&layer);
        let fd = finite_diff_grad_fourth(|v| loss(&unpack(&layer, v), &x), &theta, FD_STEP).unwrap();
        let nw = gw.as_slice().len();
        let nb = gb.len();
        rep.compare("dW", gw.as_slice(), &fd.as_slice()[..nw], GRAD_TOL);
        rep.compare("db", gb.as_slice(), &fd.as_slice()[nw..nw + nb], GRAD_TOL);
        if !st {
            rep.compare("dlogits", &gl, &fd.as_slice()[nw + nb..], GRAD_TOL);
        }
        let xv = Vector::new(x.as_slice().to_vec());
        let fdx = finite_diff_grad_fourth(
            |v| loss(&layer, &Matrix::new(1, v.len(), v.as_slice().to_vec()).unwrap()),
            &xv,
            FD_STEP,
        )
        .unwrap();
        rep.compare("dx", gx.as_slice(), fdx.as_slice(), GRAD_TOL);
        rep.checked += 1;
    }
    rep
}

/// `kl_grad_wrt_logits` against central differences of
/// `kl_divergence(p̃, softmax(z / τ))` with `p̃` held fixed.
pub fn kl_grad_oracle(configs: usize, seed: u64) -> Report {
    let mut rng = Rng::new(seed);
    let mut rep = Report::default();
    for _ in 0..configs {
        let target = random_simplex(&mut rng);
        let z = random_logits(&mut rng, 3.0);
        let tau = rng.uniform_range(0.2, 3.0);
        let p = tempered_softmax(&z, tau);
        let analytic = kl_grad_wrt_logits(&target, &p, tau);
        let f = |v: &Vector| {
            let zz: Logits = std::array::from_fn(|i| v[i]);
            kl_divergence(&target, &tempered_softmax(&zz, tau))
        };
        let fd = finite_diff_grad_fourth(f, &Vector::new(z.to_vec()), FD_STEP).unwrap();
        rep.compare("dKL/dz", &analytic, fd.as_slice(), GRAD_TOL);
        rep.checked += 1;
    }
    rep
}

/// The full training-step gradient (task + α·KL on the logits, task on
/// `W`, `b`) against central differences of the total loss. Noise and the
/// pseudo-probability target are frozen at the base point.
pub fn train_step_oracle(configs: usize, seed: u64) -> Report {
    let mut rng = Rng::new(seed);
    let mut rep = Report::default();
    for cfg in 0..configs {
        let rows = 1 + rng.below(12);
        let (layer, x) = random_layer_and_input(&mut rng, rows);
        let y = Vector::from_fn(rows * layer.d_out(), |_| rng.uniform_range(-2.0, 2.0));
        let mode = if cfg % 5 == 4 {
            NetworkMode::Fixed(ActivationKind::from_index(rng.below(5)).unwrap())
        } else {
            NetworkMode::Routed
        };
        let reg = RegularizerConfig::new(rng.uniform_range(0.1, 2.0), rng.uniform_range(0.0, 1.0)).unwrap();
        let noise = gumbel_vector(&mut rng);
        let net = Network { layer, mode };

        let base = batch_step(&net, &x, &y, &noise, &reg, None).unwrap();
        let target = base.target;
        let theta = pack(&net.layer);
        let f = |v: &Vector| {
            let probe = Network { layer: unpack(&net.layer, v), mode };
            batch_step(&probe, &x, &y, &noise, &reg, target.as_ref()).unwrap().loss.total
        };
        let fd = finite_diff_grad_fourth(f, &theta, FD_STEP).unwrap();
        let mut analytic = base.grad_weights.as_slice().to_vec();
        analytic.extend_from_slice(base.grad_bias.as_slice());
        analytic.extend_from_slice(&base.grad_logits);
        rep.compare("dtotal", &analytic, fd.as_slice(), GRAD_TOL);
        rep.checked += 1;
    }
    rep
}

fn simplex_ok(p: &ProbVector) -> bool {
    let a = p.as_array();
    a.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) && (a.iter().sum::<f64>() - 1.0).abs() < 1e-12
}

/// Argmax frequencies of Gumbel-Softmax samples against `softmax(logits)`.
pub fn argmax_frequency_check(samples: usize, seed: u64) -> Report {
    let mut rng = Rng::new(seed);
    let mut rep = Report::default();
    let cases: [(Logits, f64); 3] = [
        ([0.0; 5], 1.0),
        ([1.0, -0.5, 0.3, 2.0, -1.0], 0.5),
        (random_logits(&mut rng, 2.0), 2.0),
    ];
    for (logits, tau) in cases {
        let expected = tempered_softmax(&logits, 1.0);
        let mut counts = [0usize; 5];
        for _ in 0..samples {
            let p = gumbel_softmax_sample(&logits, tau, &mut rng);
            rep.require(simplex_ok(&p), || format!("sample off the simplex: {:?}", p.as_array()));
            counts[p.argmax().index()] += 1;
        }
        for k in 0..5 {
            let freq = counts[k] as f64 / samples as f64;
            let gap = (freq - expected.as_array()[k]).abs();
            rep.worst = rep.worst.max(gap);
            rep.require(gap <= 0.01, || {
                format!("logits {logits:?}: class {k} frequency {freq:.4} vs {:.4}", expected.as_array()[k])
            });
        }
        rep.checked += samples;
    }
    rep
}

/// Sample mean of standard Gumbel noise against the Euler–Mascheroni constant.
pub fn gumbel_mean_check(draws: usize, seed: u64) -> (f64, bool) {
    let mut rng = Rng::new(seed);
    let mean = (0..draws).map(|_| gumbel_noise(&mut rng)).sum::<f64>() / draws as f64;
    (mean, (mean - EULER_GAMMA).abs() <= 0.01)
}

/// KL non-negativity and identity on random simplex pairs, pseudo-probability
/// shift invariance and flattening, and the gradient-norm bounds.
pub fn regularizer_properties(pairs: usize, seed: u64) -> Report {
    let mut rng = Rng::new(seed);
    let mut rep = Report::default();
    let catalog = Catalog::default();
    for i in 0..pairs {
        let a = random_simplex(&mut rng);
        let b = random_simplex(&mut rng);
        let kl = kl_divergence(&a, &b);
        rep.require(kl >= 0.0, || format!("negative KL {kl}"));
        let kl_self = kl_divergence(&a, &a);
        rep.require(kl_self.abs() < 1e-12, || format!("KL(p, p) = {kl_self}"));
        rep.require(kl > 0.0 || a == b, || format!("KL = 0 for distinct pair {a:?} {b:?}"));

        if i % 10 == 0 {
            let rows = 1 + rng.below(32);
            let cols = 1 + rng.below(3);
            let h = random_matrix(&mut rng, rows, cols, 8.0);
            let stats = gradient_norms(&h, &catalog).unwrap();
            let sig = ActivationKind::Sigmoid.index();
            let id = ActivationKind::Identity.index();
            let bound = 0.25 * (cols as f64).sqrt();
            rep.require(stats.per_sample.iter().all(|s| s[sig] <= bound), || "sigmoid norm above 0.25".into());
            let unit = (cols as f64).sqrt();
            rep.require(stats.per_sample.iter().all(|s| s[id] == unit), || "identity norm not exact".into());

            let lambda = rng.uniform_range(0.1, 3.0);
            let p = pseudo_probs(&stats, lambda);
            let mut shifted = stats.clone();
            let c = rng.uniform_range(-50.0, 50.0);
            shifted.mean = shifted.mean.map(|g| g + c);
            let q = pseudo_probs(&shifted, lambda);
            let gap = p.as_array().iter().zip(q.as_array()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            rep.require(gap < 1e-12, || format!("shift by {c} moved pseudo-probs by {gap:e}"));
            let flat = pseudo_probs(&stats, 1e9);
            let dev = flat.as_array().iter().map(|v| (v - 0.2).abs()).fold(0.0, f64::max);
            rep.require(dev < 1e-6, || format!("λ = 1e9 not flat: {dev:e}"));
        }
        rep.checked += 1;
    }
    rep
}
