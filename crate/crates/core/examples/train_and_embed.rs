//! Trains on a planted quadratic association, then embeds the samples and
//! saves/reloads the model.

use aime::aime::{fit, load_model, save_model};
use aime::neural_net::TrainConfig;
use aime::synth::{evaluate_embedding, generate, Design, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&SynthSpec {
        n: 600,
        p: 40,
        q: 40,
        n_signal: 10,
        noise_sd: 0.3,
        design: Design::Quadratic,
        seed: 0,
    })?;
    let cfg = TrainConfig::default();
    let model = fit(data.x.matrix(), data.y.matrix(), 4, &cfg)?;

    let h = model.loss_history();
    for e in [0, h.len() / 4, h.len() / 2, h.len() - 1] {
        println!("epoch {:>3}  mse {:.4}", e + 1, h[e]);
    }

    let embedding = model.embed(data.x.matrix())?;
    println!("embedding {}x{}", embedding.rows(), embedding.cols());
    println!("quadrant accuracy {:.3}", evaluate_embedding(&embedding, &data.labels)?);

    let dir = std::env::temp_dir().join(format!("aime-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.bin");
    save_model(&model, &path)?;
    let back = load_model(&path)?;
    assert_eq!(back.embed(data.x.matrix())?, embedding);
    println!("reloaded {} bytes from {}", std::fs::metadata(&path)?.len(), path.display());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
