//! The `aime` command line: one subcommand per pipeline stage.
//!
//! Exit codes: 0 on success, 2 for usage, input or validation errors, 3 for
//! numerical failures (non-convergence, non-finite loss).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::aime::{fit, load_model, save_model};
use crate::cca::{fit_cca, Ridge};
use crate::config::RunConfig;
use crate::data_io::{
    align_samples, cv_filter, format_value, read_labeled, sd_filter, write_atomic, write_labeled, Delimiter,
    LabeledMatrix, Orientation,
};
use crate::error::{AimeError, Result};
use crate::importance::{permutation_importance, top_fraction, DEFAULT_REPEATS};
use crate::matrix::Matrix;
use crate::neural_net::TrainConfig;
use crate::plot::scatter_matrix_svg;
use crate::synth::{self, Design, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const DEFAULT_CV_THRESHOLD: f64 = 0.05;
pub const DEFAULT_SD_THRESHOLD: f64 = 1.25;

#[derive(Debug, Parser)]
#[command(
    name = "aime",
    version,
    about = "Nonlinear embedding of one omics table that preserves information about another",
    args_override_self = true
)]
pub struct Cli {
    /// Read flag values from a `key = value` file; flags on the command line take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drop low-variability features by coefficient of variation or standard deviation
    Filter(FilterArgs),
    /// Fit the autoencoder from X to Y and write the model and its loss history
    Train(TrainArgs),
    /// Map samples of X to the bottleneck embedding of a trained model
    Embed(EmbedArgs),
    /// Rank input variables by how far permuting them moves the embedding
    Importance(ImportanceArgs),
    /// Ridge-regularised canonical correlation analysis baseline
    Cca(CcaArgs),
    /// Generate a paired dataset with planted latent structure
    Synth(SynthArgs),
    /// Render an embedding as a scatter-matrix SVG coloured by class
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TableFormat {
    /// Field separator of tables read and written: tab or comma
    #[arg(long, default_value_t = Delimiter::Tab)]
    pub delimiter: Delimiter,
    /// Layout of input tables: samples_in_rows or features_in_rows
    #[arg(long, default_value_t = Orientation::SamplesInRows)]
    pub orientation: Orientation,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("criterion").required(true).args(["cv", "sd"]))]
pub struct FilterArgs {
    /// Input table
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Filtered table to write
    #[arg(long, visible_alias = "out", value_name = "PATH")]
    pub output: PathBuf,
    /// Keep features with sd/|mean| above the threshold
    #[arg(long)]
    pub cv: bool,
    /// Keep features with standard deviation above the threshold
    #[arg(long)]
    pub sd: bool,
    /// Cut-off (exclusive) [default: 0.05 with --cv, 1.25 with --sd]
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Input table (encoder side), samples × features
    #[arg(long, value_name = "PATH")]
    pub x: PathBuf,
    /// Output table (decoder side), samples × features
    #[arg(long, value_name = "PATH")]
    pub y: PathBuf,
    /// Embedding width
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    /// Adam step size
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = TrainConfig::default().beta1)]
    pub beta1: f64,
    #[arg(long, default_value_t = TrainConfig::default().beta2)]
    pub beta2: f64,
    #[arg(long, default_value = "1e-8")]
    pub epsilon: f64,
    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    pub batch_size: usize,
    /// Seed for initialisation, shuffling and dropout
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model file to write
    #[arg(long, visible_alias = "model", value_name = "PATH")]
    pub model_out: PathBuf,
    /// Per-epoch loss table [default: <MODEL_OUT>.loss.tsv]
    #[arg(long, value_name = "PATH")]
    pub loss_out: Option<PathBuf>,
    #[command(flatten)]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Trained model file
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Table with the model's input features
    #[arg(long, value_name = "PATH")]
    pub x: PathBuf,
    /// Embedding table to write (columns dim1..dimD)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    /// Trained model file
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Table to permute; pass the training input to score the fitted data
    #[arg(long, value_name = "PATH")]
    pub x: PathBuf,
    /// Shuffles per variable
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
    /// Share of top-ranked variables to report, in (0, 1]
    #[arg(long, default_value_t = 0.01)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Table of variable_id, score, rank to write
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct CcaArgs {
    #[arg(long, value_name = "PATH")]
    pub x: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub y: PathBuf,
    /// Number of canonical components
    #[arg(long, visible_alias = "dim", default_value_t = 4)]
    pub k: usize,
    /// Ridge added to both covariance blocks: `auto` (1e-3 × mean variance) or a number >= 0
    #[arg(long, default_value_t = Ridge::Auto)]
    pub ridge: Ridge,
    /// Writes <PREFIX>_correlations.tsv, _x_variates, _y_variates, _x_directions, _y_directions
    #[arg(long, visible_alias = "out", value_name = "PREFIX")]
    pub out_prefix: PathBuf,
    #[command(flatten)]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Samples
    #[arg(long, default_value_t = 600)]
    pub n: usize,
    /// X features
    #[arg(long, default_value_t = 40)]
    pub p: usize,
    /// Y features
    #[arg(long, default_value_t = 40)]
    pub q: usize,
    /// X features loading on the latent factors
    #[arg(long, default_value_t = 10)]
    pub n_signal: usize,
    /// Standard deviation of the additive noise
    #[arg(long, default_value_t = 0.3)]
    pub noise_sd: f64,
    /// How Y depends on the latent factors: linear or quadratic
    #[arg(long, default_value_t = Design::Quadratic)]
    pub design: Design,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes <PREFIX>_x.tsv, <PREFIX>_y.tsv, <PREFIX>_labels.tsv
    #[arg(long, visible_alias = "out", value_name = "PREFIX")]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Embedding table (e.g. from `embed` or CCA variates)
    #[arg(long, value_name = "PATH")]
    pub embedding: PathBuf,
    /// Labels file with `sample_id<TAB>label` rows
    #[arg(long, value_name = "PATH")]
    pub labels: PathBuf,
    /// SVG file to write
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub format: TableFormat,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match with_config(args) {
        Ok(a) => a,
        Err(e) => return report(&e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err(e) => report(&e),
    }
}

fn report(e: &AimeError) -> i32 {
    eprintln!("error: {e}");
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Splices config-file values in as flags directly after the subcommand
/// name, so any flag given later on the command line overrides them. Keys
/// the chosen subcommand does not take are ignored.
fn with_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut config_path = None;
    let mut iter = args.iter().enumerate().skip(1);
    while let Some((_, a)) = iter.next() {
        match a.to_str() {
            Some("--config") => config_path = iter.next().map(|(_, p)| PathBuf::from(p)),
            Some(s) if s.starts_with("--config=") => config_path = Some(PathBuf::from(&s[9..])),
            _ => {}
        }
    }
    let Some(path) = config_path else {
        return Ok(args);
    };
    let cfg = RunConfig::read(&path)?;

    let cmd = Cli::command();
    let mut skip_value = false;
    let mut position = None;
    for (i, a) in args.iter().enumerate().skip(1) {
        if skip_value {
            skip_value = false;
            continue;
        }
        match a.to_str() {
            Some("--config") => skip_value = true,
            Some(s) if cmd.find_subcommand(s).is_some() => {
                position = Some(i);
                break;
            }
            _ => {}
        }
    }
    let Some(position) = position else {
        return Ok(args);
    };
    let sub = cmd
        .find_subcommand(args[position].to_str().unwrap_or_default())
        .expect("subcommand located above");

    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in cfg.entries() {
        let flag = key.replace('_', "-");
        let accepted = sub.get_arguments().any(|arg| {
            arg.get_long() == Some(flag.as_str())
                || arg
                    .get_all_aliases()
                    .is_some_and(|aliases| aliases.contains(&flag.as_str()))
        });
        if accepted {
            injected.push(format!("--{flag}").into());
            injected.push(value.into());
        }
    }
    let mut out = args[..=position].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[position + 1..]);
    Ok(out)
}

/// Runs one command and returns the text to print on success.
pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Filter(a) => cmd_filter(a),
        Command::Train(a) => cmd_train(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Importance(a) => cmd_importance(a),
        Command::Cca(a) => cmd_cca(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

fn read_table(path: &Path, format: &TableFormat) -> Result<LabeledMatrix> {
    read_labeled(path, format.delimiter, format.orientation)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn numbered_ids(stem: &str, count: usize) -> Vec<String> {
    (1..=count).map(|k| format!("{stem}{k}")).collect()
}

pub fn cmd_filter(a: &FilterArgs) -> Result<String> {
    let threshold = a
        .threshold
        .unwrap_or(if a.cv { DEFAULT_CV_THRESHOLD } else { DEFAULT_SD_THRESHOLD });
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(AimeError::Validation(format!(
            "threshold must be a finite number >= 0, got {threshold}"
        )));
    }
    let m = read_table(&a.input, &a.format)?;
    let outcome = if a.cv {
        cv_filter(&m, threshold)?
    } else {
        sd_filter(&m, threshold)?
    };
    write_labeled(&outcome.matrix, &a.output, a.format.delimiter)?;
    let mut s = format!("kept {} dropped {}", outcome.kept.len(), outcome.dropped);
    if outcome.undefined > 0 {
        let _ = write!(s, " (undefined cv: {})", outcome.undefined);
    }
    s.push('\n');
    Ok(s)
}

pub fn cmd_train(a: &TrainArgs) -> Result<String> {
    let x = read_table(&a.x, &a.format)?;
    let y = read_table(&a.y, &a.format)?;
    let (x, y) = align_samples(&x, &y)?;
    let cfg = TrainConfig {
        learning_rate: a.learning_rate,
        beta1: a.beta1,
        beta2: a.beta2,
        epsilon: a.epsilon,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed: a.seed,
    };
    let model = fit(x.matrix(), y.matrix(), a.dim, &cfg)?;
    save_model(&model, &a.model_out)?;

    let loss_path = a
        .loss_out
        .clone()
        .unwrap_or_else(|| with_suffix(&a.model_out, ".loss.tsv"));
    let mut loss = String::from("epoch\tmse\n");
    for (e, l) in model.loss_history().iter().enumerate() {
        let _ = writeln!(loss, "{}\t{}", e + 1, format_value(*l));
    }
    write_atomic(&loss_path, loss.as_bytes())?;

    Ok(match model.loss_history().last() {
        Some(l) => format!("samples {} final loss {}\n", x.matrix().rows(), format_value(*l)),
        None => format!("samples {} (no epochs run)\n", x.matrix().rows()),
    })
}

pub fn cmd_embed(a: &EmbedArgs) -> Result<String> {
    let model = load_model(&a.model)?;
    let x = read_table(&a.x, &a.format)?;
    let e = model.embed(x.matrix())?;
    let d = e.cols();
    let out = LabeledMatrix::new(e, x.sample_ids().to_vec(), numbered_ids("dim", d))?;
    write_labeled(&out, &a.out, a.format.delimiter)?;
    Ok(format!("embedded {} samples into {d} dimensions\n", x.matrix().rows()))
}

pub fn cmd_importance(a: &ImportanceArgs) -> Result<String> {
    let model = load_model(&a.model)?;
    let x = read_table(&a.x, &a.format)?;
    let report = permutation_importance(&model, x.matrix(), a.repeats, a.seed)?;
    let top = top_fraction(&report, a.fraction)?;
    let sep = a.format.delimiter.as_char();
    let mut s = format!("variable_id{sep}score{sep}rank\n");
    for (pos, &j) in top.iter().enumerate() {
        let _ = writeln!(
            s,
            "{}{sep}{}{sep}{}",
            x.feature_ids()[j],
            format_value(report.scores[j]),
            pos + 1
        );
    }
    write_atomic(&a.out, s.as_bytes())?;
    Ok(format!("reported {} of {} variables\n", top.len(), report.scores.len()))
}

pub fn cmd_cca(a: &CcaArgs) -> Result<String> {
    let x = read_table(&a.x, &a.format)?;
    let y = read_table(&a.y, &a.format)?;
    let (x, y) = align_samples(&x, &y)?;
    let r = fit_cca(x.matrix(), y.matrix(), a.k, a.ridge)?;
    let k = r.correlations.len();
    let names = numbered_ids("cc", k);
    let sep = a.format.delimiter.as_char();

    let mut corr = format!("component{sep}correlation\n");
    for (name, c) in names.iter().zip(&r.correlations) {
        let _ = writeln!(corr, "{name}{sep}{}", format_value(*c));
    }
    write_atomic(&with_suffix(&a.out_prefix, "_correlations.tsv"), corr.as_bytes())?;

    let tables: [(&str, &Matrix, &[String]); 4] = [
        ("_x_variates.tsv", &r.x_variates, x.sample_ids()),
        ("_y_variates.tsv", &r.y_variates, y.sample_ids()),
        ("_x_directions.tsv", &r.x_directions, x.feature_ids()),
        ("_y_directions.tsv", &r.y_directions, y.feature_ids()),
    ];
    for (suffix, m, rows) in tables {
        let t = LabeledMatrix::new(m.clone(), rows.to_vec(), names.clone())?;
        write_labeled(&t, with_suffix(&a.out_prefix, suffix), a.format.delimiter)?;
    }

    let shown: Vec<String> = r.correlations.iter().map(|c| format!("{c:.4}")).collect();
    Ok(format!("canonical correlations {}\n", shown.join(" ")))
}

pub fn cmd_synth(a: &SynthArgs) -> Result<String> {
    let spec = SynthSpec {
        n: a.n,
        p: a.p,
        q: a.q,
        n_signal: a.n_signal,
        noise_sd: a.noise_sd,
        design: a.design,
        seed: a.seed,
    };
    let data = synth::generate(&spec)?;
    write_labeled(&data.x, with_suffix(&a.out_prefix, "_x.tsv"), Delimiter::Tab)?;
    write_labeled(&data.y, with_suffix(&a.out_prefix, "_y.tsv"), Delimiter::Tab)?;
    let labels = synth::labels_to_string(data.x.sample_ids(), &data.labels, &data.signal_indices);
    write_atomic(&with_suffix(&a.out_prefix, "_labels.tsv"), labels.as_bytes())?;
    Ok(format!(
        "wrote {} samples, {} x {} features, {} design\n",
        a.n, a.p, a.q, a.design
    ))
}

pub fn cmd_plot(a: &PlotArgs) -> Result<String> {
    let e = read_table(&a.embedding, &a.format)?;
    let text = std::fs::read_to_string(&a.labels).map_err(|err| AimeError::io(&a.labels, err))?;
    let file = synth::parse_labels(&text)?;
    let lookup: std::collections::HashMap<&str, usize> = file
        .sample_ids
        .iter()
        .map(String::as_str)
        .zip(file.labels.iter().copied())
        .collect();
    let labels = e
        .sample_ids()
        .iter()
        .map(|id| {
            lookup
                .get(id.as_str())
                .copied()
                .ok_or_else(|| AimeError::Alignment(format!("no label for sample '{id}'")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let svg = scatter_matrix_svg(e.matrix(), &labels, Some(e.feature_ids()))?;
    write_atomic(&a.out, svg.as_bytes())?;
    Ok(format!(
        "plotted {} samples in {} dimensions\n",
        labels.len(),
        e.matrix().cols()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_lists_defaults() {
        let mut cmd = Cli::command();
        let train = cmd.find_subcommand_mut("train").unwrap().render_long_help().to_string();
        for d in ["[default: 200]", "[default: 0.001]", "[default: 32]", "[default: 4]", "[default: 1e-8]"] {
            assert!(train.contains(d), "train help lacks {d}:\n{train}");
        }
        let imp = cmd.find_subcommand_mut("importance").unwrap().render_long_help().to_string();
        assert!(imp.contains("[default: 10]") && imp.contains("[default: 0.01]"), "{imp}");
        let cca = cmd.find_subcommand_mut("cca").unwrap().render_long_help().to_string();
        assert!(cca.contains("[default: auto]"), "{cca}");
    }

    #[test]
    fn config_values_precede_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "dim = 3\nepochs = 7\nrepeats = 2\n").unwrap();
        let args: Vec<OsString> = ["aime", "--config", cfg.to_str().unwrap(), "train", "--epochs", "9"]
            .iter()
            .map(OsString::from)
            .collect();
        let out: Vec<String> = with_config(args)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(out[3..], ["train", "--epochs", "7", "--dim", "3", "--epochs", "9"]);
    }
}
