//! Writes a scatter-matrix SVG of an embedding coloured by class.
//!
//! ```text
//! cargo run --example scatter_plot -- embedding.svg
//! ```

use aime::aime::fit;
use aime::neural_net::TrainConfig;
use aime::plot::scatter_matrix_svg;
use aime::synth::{generate, Design, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "embedding.svg".into());
    let data = generate(&SynthSpec {
        n: 400,
        p: 30,
        q: 30,
        n_signal: 10,
        noise_sd: 0.3,
        design: Design::Quadratic,
        seed: 4,
    })?;
    let model = fit(data.x.matrix(), data.y.matrix(), 3, &TrainConfig::default())?;
    let embedding = model.embed(data.x.matrix())?;
    let names: Vec<String> = (1..=3).map(|k| format!("dim{k}")).collect();
    let svg = scatter_matrix_svg(&embedding, &data.labels, Some(&names))?;
    std::fs::write(&out, svg)?;
    println!("wrote {out}");
    Ok(())
}
