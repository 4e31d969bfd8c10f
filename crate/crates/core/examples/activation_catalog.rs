//! The five candidate activations, their derivatives and the conventions at
//! the kink.
//!
//! cargo run --example activation_catalog

use actroute::{ActivationKind, Catalog};

fn main() {
    let c = Catalog::default();
    let xs = [-3.0, -1.0, 0.0, 0.5, 2.0];
    println!("leaky slope = {}\n", c.leaky_slope());
    for kind in ActivationKind::ALL {
        let vals: Vec<String> = xs.iter().map(|&x| format!("{:8.4}", c.value(kind, x))).collect();
        let ders: Vec<String> = xs.iter().map(|&x| format!("{:8.4}", c.derivative(kind, x))).collect();
        println!("{:<10} f  {}", kind.label(), vals.join(""));
        println!("{:<10} f' {}", "", ders.join(""));
    }
    println!("\nat x = 0 the left limit is used: ReLU'(0) = {}, LeakyReLU'(0) = {}",
        c.derivative(ActivationKind::Relu, 0.0), c.derivative(ActivationKind::LeakyRelu, 0.0));
}
