use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hypercore::data::{
    inject_label_noise, inject_targeted_label_noise, load_csv, load_dataset, save_dataset, synth_gaussian_mixture,
    synth_test_split, FeatureDataset, NoiseMask, NoiseSpec,
};
use hypercore::eval::{emit_report, evaluate, EvalReport, ReportFormat};
use hypercore::hypersphere::TrainConfig;
use hypercore::pipeline::{build_coreset_run, enforce_global_budget, CoresetResult, PruneMode};
use hypercore::{Error, Result};

#[derive(Parser)]
#[command(name = "hypercore", version, about = "Noise-robust coreset selection with per-class hypersphere models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Adaptive,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded Gaussian-mixture dataset.
    Synth {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        sep: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write a disjoint clean test split of the same size.
        #[arg(long)]
        test_out: Option<PathBuf>,
    },
    /// Flip a fraction of labels and record which ones.
    Poison {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        mask_out: PathBuf,
        /// Relabel every victim to this class instead of a uniform wrong class.
        #[arg(long)]
        targeted_class: Option<usize>,
    },
    /// Train per-class models and write the selected coreset.
    Select {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-4)]
        lr: f64,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Cap the coreset at this fraction of the dataset.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 32)]
        emb_dim: usize,
        #[arg(long, default_value_t = 128)]
        hidden: usize,
    },
    /// Score a coreset against the noise mask and a held-out test split.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        coreset: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        knn_k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-emit an evaluation report as JSON or CSV.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Binary datasets by default, CSV (with header) for a `.csv` extension.
fn read_dataset(path: &Path) -> Result<FeatureDataset> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => load_csv(path, true),
        _ => load_dataset(path),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            classes,
            per_class,
            dim,
            sep,
            seed,
            out,
            test_out,
        } => {
            let ds = synth_gaussian_mixture(classes, per_class, dim, sep, seed)?;
            save_dataset(&ds, &out)?;
            if let Some(path) = test_out {
                save_dataset(&synth_test_split(classes, per_class, dim, sep, seed)?, &path)?;
            }
            eprintln!("wrote {} samples to {}", ds.len(), out.display());
        }
        Command::Poison {
            rate,
            seed,
            input,
            out,
            mask_out,
            targeted_class,
        } => {
            let ds = read_dataset(&input)?;
            let spec = NoiseSpec::new(rate, seed)?;
            let (noisy, mask) = match targeted_class {
                Some(t) => inject_targeted_label_noise(&ds, spec, t)?,
                None => inject_label_noise(&ds, spec)?,
            };
            save_dataset(&noisy, &out)?;
            mask.save(&mask_out)?;
            eprintln!("flipped {} of {} labels", mask.flipped.len(), ds.len());
        }
        Command::Select {
            mode,
            alpha,
            input,
            out,
            epochs,
            lr,
            batch,
            seed,
            workers,
            budget,
            emb_dim,
            hidden,
        } => {
            let mode = match (mode, alpha) {
                (ModeArg::Adaptive, None) => PruneMode::Adaptive,
                (ModeArg::Adaptive, Some(_)) => {
                    return Err(Error::Argument("--alpha applies only to --mode fixed".into()))
                }
                (ModeArg::Fixed, Some(alpha)) => PruneMode::Fixed { alpha },
                (ModeArg::Fixed, None) => return Err(Error::Argument("--mode fixed requires --alpha".into())),
            };
            let cfg = TrainConfig {
                epochs,
                batch_size: batch,
                lr,
                seed,
                hidden,
                emb_dim,
                ..TrainConfig::default()
            };
            let ds = read_dataset(&input)?;
            let run = build_coreset_run(&ds, mode, &cfg, workers)?;
            let coreset = match budget {
                Some(fraction) => enforce_global_budget(&run.coreset, &run.distances, fraction)?,
                None => run.coreset,
            };
            for c in &coreset.classes {
                if let Some(w) = &c.warning {
                    eprintln!("warning: class {}: {w}", c.threshold.class_id);
                }
            }
            coreset.save(&out)?;
            eprintln!(
                "kept {} of {} samples (removed {:.2}%)",
                coreset.total_kept(),
                coreset.n_samples,
                100.0 * coreset.alpha_realized()
            );
        }
        Command::Eval {
            input,
            coreset,
            mask,
            test,
            knn_k,
            out,
        } => {
            let ds = read_dataset(&input)?;
            let coreset = CoresetResult::load(&coreset)?;
            let mask = mask.map(NoiseMask::load).transpose()?;
            let test = test.as_deref().map(read_dataset).transpose()?;
            let report = evaluate(&ds, &coreset, mask.as_ref(), test.as_ref(), knn_k)?;
            emit_report(&report, &out, ReportFormat::Json)?;
        }
        Command::Report { input, format, out } => {
            let report = EvalReport::load(&input)?;
            let format = match format {
                FormatArg::Json => ReportFormat::Json,
                FormatArg::Csv => ReportFormat::Csv,
            };
            emit_report(&report, &out, format)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
