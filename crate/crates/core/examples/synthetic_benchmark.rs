//! The nonlinear benchmark: on the quadratic design, compare how well the
//! AIME embedding and the CCA variates separate the latent quadrants.
//!
//! ```text
//! cargo run --release --example synthetic_benchmark -- [seeds]
//! ```

use aime::aime::fit;
use aime::cca::{fit_cca, Ridge};
use aime::neural_net::TrainConfig;
use aime::synth::{evaluate_embedding, generate, Design, SynthSpec};

fn main() -> aime::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    println!("design     seed  aime   cca    gap     cca rho1");
    for design in [Design::Quadratic, Design::Linear] {
        for seed in 0..seeds {
            let data = generate(&SynthSpec {
                n: 600,
                p: 40,
                q: 40,
                n_signal: 10,
                noise_sd: 0.3,
                design,
                seed,
            })?;
            let cfg = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            let model = fit(data.x.matrix(), data.y.matrix(), 4, &cfg)?;
            let aime_acc = evaluate_embedding(&model.embed(data.x.matrix())?, &data.labels)?;
            let cca = fit_cca(data.x.matrix(), data.y.matrix(), 4, Ridge::Auto)?;
            let cca_acc = evaluate_embedding(&cca.x_variates, &data.labels)?;
            println!(
                "{:<10} {seed:>4}  {aime_acc:.3}  {cca_acc:.3}  {:+.3}  {:.3}",
                format!("{design:?}"),
                aime_acc - cca_acc,
                cca.correlations[0]
            );
        }
    }
    Ok(())
}
