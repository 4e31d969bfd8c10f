//! The gradient-norm correction: per-candidate derivative norms, the
//! pseudo-probability target and the KL term for a few routing states.
//!
//! cargo run --example bias_correction

use actroute::regularizer::{gradient_norms, kl_divergence, kl_grad_wrt_logits, pseudo_probs, total_loss};
use actroute::routing::tempered_softmax;
use actroute::{ActivationKind, Catalog, Matrix, Rng};

fn main() -> actroute::Result<()> {
    let mut rng = Rng::new(5);
    let h = Matrix::new(256, 1, (0..256).map(|_| 2.0 * rng.standard_normal()).collect())?;
    let stats = gradient_norms(&h, &Catalog::default())?;

    println!("{:<10} {:>8}  pseudo-probabilities for lambda =", "", "g_bar");
    println!("{:<10} {:>8} {:>8} {:>8} {:>8}", "", "", "0.3", "1", "10");
    let targets: Vec<_> = [0.3, 1.0, 10.0].iter().map(|&l| pseudo_probs(&stats, l)).collect();
    for k in ActivationKind::ALL {
        print!("{:<10} {:>8.4}", k.label(), stats.mean[k.index()]);
        for t in &targets {
            print!(" {:>8.4}", t.get(k));
        }
        println!();
    }

    let target = &targets[0];
    println!("\nKL(target || p) and its logit gradient, tau = 1:");
    for (name, logits) in [
        ("uniform", [0.0; 5]),
        ("ReLU-heavy", [3.0, 0.0, 0.0, 2.0, 0.0]),
        ("Sigmoid-heavy", [0.0, 3.0, 0.0, 0.0, 0.0]),
    ] {
        let p = tempered_softmax(&logits, 1.0);
        let kl = kl_divergence(target, &p);
        let g = kl_grad_wrt_logits(target, &p, 1.0);
        let l = total_loss(0.05, kl, 0.3);
        println!("  {name:<14} KL {kl:.4}  total(task 0.05, alpha 0.3) {:.4}  grad {:+.3?}", l.total, g);
    }
    Ok(())
}
