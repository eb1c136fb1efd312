//! Ranks input variables by how far shuffling each one moves the embedding,
//! and checks the ranking against the planted signal features.

use aime::aime::fit;
use aime::importance::{permutation_importance, top_fraction};
use aime::neural_net::TrainConfig;
use aime::synth::{generate, Design, SynthSpec};

fn main() -> aime::Result<()> {
    let data = generate(&SynthSpec {
        n: 600,
        p: 40,
        q: 40,
        n_signal: 10,
        noise_sd: 0.3,
        design: Design::Quadratic,
        seed: 1,
    })?;
    let model = fit(data.x.matrix(), data.y.matrix(), 4, &TrainConfig::default())?;
    let report = permutation_importance(&model, data.x.matrix(), 10, 0)?;

    println!("rank  variable  score     planted");
    for (rank, &j) in report.ranking.iter().take(15).enumerate() {
        let planted = if data.signal_indices.contains(&j) { "*" } else { "" };
        println!("{:>4}  {:>8}  {:<8.4}  {planted}", rank + 1, data.x.feature_ids()[j], report.scores[j]);
    }
    let top = &report.ranking[..data.signal_indices.len()];
    let hits = top.iter().filter(|j| data.signal_indices.contains(j)).count();
    println!("planted features in top {}: {hits}", top.len());
    println!("top 10% -> {} variables", top_fraction(&report, 0.1)?.len());
    Ok(())
}
