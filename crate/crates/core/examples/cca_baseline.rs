//! Ridge CCA on a linear and a quadratic association. The linear one is
//! found; the quadratic one has zero cross-covariance and is not.

use aime::cca::{fit_cca, project_cca, Ridge};
use aime::synth::{evaluate_embedding, generate, Design, SynthSpec};

fn main() -> aime::Result<()> {
    for design in [Design::Linear, Design::Quadratic] {
        let data = generate(&SynthSpec {
            n: 1000,
            p: 40,
            q: 40,
            n_signal: 10,
            noise_sd: 0.3,
            design,
            seed: 0,
        })?;
        let cca = fit_cca(data.x.matrix(), data.y.matrix(), 4, Ridge::Auto)?;
        let corr: Vec<String> = cca.correlations.iter().map(|c| format!("{c:.3}")).collect();
        println!("{design:?}");
        println!("  correlations [{}]", corr.join(", "));
        println!("  ridge x/y    {:.2e} / {:.2e}", cca.ridge_x, cca.ridge_y);
        println!("  accuracy     {:.3}", evaluate_embedding(&cca.x_variates, &data.labels)?);
        // projecting the training X reproduces the stored variates
        let again = project_cca(&cca, data.x.matrix())?;
        let diff = again.sub(&cca.x_variates)?.frobenius_norm();
        println!("  reprojection |Δ| {diff:.1e}");
    }
    Ok(())
}
