//! One routed layer: forward with frozen Gumbel noise, backward, and a
//! finite-difference check of the logit gradient.
//!
//! cargo run --example routed_layer_gradients

use actroute::numkit::{finite_diff_grad_fourth, rel_error};
use actroute::routing::{gumbel_vector, Logits};
use actroute::{Matrix, Rng, RoutedLayer, Vector};

fn main() -> actroute::Result<()> {
    let mut rng = Rng::new(3);
    let mut layer = RoutedLayer::init_uniform(3, 2, 0.8, &mut rng);
    layer.set_logits([0.2, -0.1, 0.4, 0.0, -0.3])?;
    layer.set_temperature(0.7)?;
    let x = Matrix::new(4, 3, (0..12).map(|_| rng.standard_normal()).collect())?;
    let noise = gumbel_vector(&mut rng);

    let (y, tape) = layer.forward_with_noise(&x, &noise)?;
    println!("sample p_soft = {:.4?}", tape.p_soft().as_array());
    // Loss = sum of outputs, so dL/dy is all ones.
    let dy = Matrix::new(y.rows(), y.cols(), vec![1.0; y.rows() * y.cols()])?;
    let grads = layer.backward(&tape, &dy)?;

    let loss = |z: &Vector| {
        let mut probe = layer.clone();
        let logits: Logits = std::array::from_fn(|i| z[i]);
        probe.set_logits(logits).unwrap();
        probe.forward_with_noise(&x, &noise).unwrap().0.as_slice().iter().sum::<f64>()
    };
    let fd = finite_diff_grad_fourth(loss, &Vector::new(layer.logits().to_vec()), 1e-3)?;
    println!("\n{:>12} {:>12} {:>10}", "analytic", "numeric", "rel err");
    for k in 0..5 {
        println!("{:>12.6e} {:>12.6e} {:>10.1e}", grads.logits[k], fd[k], rel_error(grads.logits[k], fd[k], 1e-6));
    }
    println!("\ndL/dW =\n{:?}", grads.weights);
    Ok(())
}
