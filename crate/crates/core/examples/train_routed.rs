//! Train a routed network on one ground truth and watch the selection
//! probabilities move.
//!
//! cargo run --release --example train_routed -- [truth] [alpha] [seed]

use actroute::synthdata::{generate, split};
use actroute::{evaluate, train, ActivationKind, DatasetSpec, Network, NetworkMode, TrainConfig};

fn main() -> actroute::Result<()> {
    let mut args = std::env::args().skip(1);
    let truth: ActivationKind = args.next().as_deref().unwrap_or("sigmoid").parse()?;
    let alpha: f64 = args.next().map_or(0.3, |a| a.parse().expect("alpha must be a number"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));

    let data = generate(&DatasetSpec::new(truth, 2560, seed))?;
    let (train_set, test_set) = split(&data, 0.8, seed)?;
    let mut net = Network::new(4, 1, NetworkMode::Routed, seed);
    let cfg = TrainConfig { alpha, seed, ..TrainConfig::default() };
    let trace = train(&mut net, &train_set, &cfg)?;

    println!("truth {truth}, alpha {alpha}, seed {seed}");
    println!("{:>6} {:>9} {:>8} {:>7}  p_soft (relu sigmoid tanh lrelu identity)", "epoch", "task", "kl", "tau");
    for r in trace.records.iter().filter(|r| r.epoch % 30 == 0 || r.epoch + 1 == cfg.epochs) {
        let p: Vec<String> = r.p_soft.as_array().iter().map(|v| format!("{v:.3}")).collect();
        println!("{:>6} {:>9.5} {:>8.4} {:>7.4}  {}", r.epoch, r.task_loss, r.kl_loss, r.tau, p.join(" "));
    }
    println!("\nselected: {}   test MSE: {:.6}", net.selected(), evaluate(&net, &test_set)?);
    Ok(())
}
