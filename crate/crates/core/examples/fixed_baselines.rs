//! Every fixed-activation model against every ground truth, one seed.
//!
//! cargo run --release --example fixed_baselines

use actroute::harness::DataConfig;
use actroute::{evaluate, train, ActivationKind, Network, NetworkMode, TrainConfig};

fn main() -> actroute::Result<()> {
    let data = DataConfig::default();
    let cfg = TrainConfig::default();
    print!("{:<16}", "model \\ truth");
    for t in ActivationKind::ALL {
        print!("{:>11}", t.label());
    }
    println!();
    for model in ActivationKind::ALL {
        print!("{:<16}", format!("{} model", model.label()));
        for truth in ActivationKind::ALL {
            let (tr, te) = data.build(truth, 0)?;
            let mut net = Network::new(4, 1, NetworkMode::Fixed(model), 0);
            train(&mut net, &tr, &cfg)?;
            print!("{:>11.4}", evaluate(&net, &te)?);
        }
        println!();
    }
    Ok(())
}
