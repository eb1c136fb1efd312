//! Compares backprop against central differences on a few random networks.

use aime::aime::build_architecture;
use aime::neural_net::gradient_check;
use aime::{Matrix, RngStream};

fn main() -> aime::Result<()> {
    let mut rng = RngStream::new(7, 0);
    for (case, (p, q, d)) in [(12, 9, 2), (30, 25, 3), (55, 40, 4)].into_iter().enumerate() {
        let mut net = build_architecture(p, q, d)?.init_network(case as u64)?;
        // keep pre-activations off the ReLU kink at zero
        for layer in net.layers_mut() {
            for b in layer.bias.iter_mut() {
                *b = 0.1 * rng.normal();
            }
        }
        let x = Matrix::random_normal(6, p, &mut rng);
        let pred = net.predict(&x)?;
        let y = Matrix::from_fn(6, q, |i, j| pred[(i, j)] + 0.1 * rng.normal());
        let err = gradient_check(&net, &x, &y, 1e-5, case as u64)?;
        println!("{p:>3} -> {d} -> {q:<3} {:>5} params  max rel err {err:.2e}", net.parameter_count());
    }
    Ok(())
}
