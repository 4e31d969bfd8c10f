//! Gumbel-Softmax sampling: argmax frequencies, temperature and the
//! Gumbel-Max equivalence.
//!
//! cargo run --example gumbel_sampling

use actroute::routing::{gumbel_noise, gumbel_softmax_sample, tempered_softmax};
use actroute::{ActivationKind, Rng};

fn main() {
    let mut rng = Rng::new(7);
    let logits = [1.0, -0.5, 0.3, 2.0, -1.0];
    let target = tempered_softmax(&logits, 1.0);

    let n = 100_000;
    let mut counts = [0usize; 5];
    for _ in 0..n {
        counts[gumbel_softmax_sample(&logits, 1.0, &mut rng).argmax().index()] += 1;
    }
    println!("{:<10} {:>9} {:>9}", "candidate", "softmax", "sampled");
    for k in ActivationKind::ALL {
        println!("{:<10} {:>9.4} {:>9.4}", k.label(), target.get(k), counts[k.index()] as f64 / n as f64);
    }

    let mean = (0..1_000_000).map(|_| gumbel_noise(&mut rng)).sum::<f64>() / 1e6;
    println!("\nmean of 1e6 Gumbel draws: {mean:.4} (Euler-Mascheroni 0.5772)");

    println!("\nmean largest entry of a sample vs temperature:");
    for tau in [5.0, 1.0, 0.3, 0.1, 0.01] {
        let m = (0..10_000).map(|_| gumbel_softmax_sample(&logits, tau, &mut rng).max()).sum::<f64>() / 1e4;
        println!("  tau = {tau:<5} -> {m:.3}");
    }
}
