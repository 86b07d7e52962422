//! `hifdiff` command line: `generate`, `features`, `train-eval`.
//!
//! Success prints a JSON summary on stdout and exits 0. Failure prints
//! `{"error": {"kind": ..., "message": ...}}` on stderr and exits 1 (2 for
//! usage errors).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hifdiff::pipeline::{cmd_features, cmd_generate, cmd_train_eval, PipelineConfig, WaveformFormat};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hifdiff", version, about = "Synthetic HIF / CT-saturation differential protection benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Pipeline config file (TOML or JSON).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the scenario waveforms and manifest.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Generate a class-stratified subset of this many scenarios.
        #[arg(long)]
        limit: Option<usize>,
        /// Waveform file format.
        #[arg(long, value_parser = ["binary", "csv"])]
        format: Option<String>,
    },
    /// Extract, rank and select features of a generated dataset.
    Features {
        /// Dataset directory written by `generate`.
        dataset: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Number of top-ranked features to select.
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Grid-search and cross-validate every classifier.
    TrainEval {
        /// Directory written by `features`.
        features: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        top_k: Option<usize>,
    },
}

fn base_config(common: &Common) -> hifdiff::Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.global_seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> hifdiff::Result<serde_json::Value> {
    match cli.command {
        Command::Generate { common, limit, format } => {
            let mut cfg = base_config(&common)?;
            if let Some(o) = common.out {
                cfg.out_dir = o;
            }
            if limit.is_some() {
                cfg.limit = limit;
            }
            match format.as_deref() {
                Some("csv") => cfg.waveform_format = WaveformFormat::Csv,
                Some(_) => cfg.waveform_format = WaveformFormat::Binary,
                None => {}
            }
            let cfg = cfg.resolve()?;
            let s = cmd_generate(&cfg)?;
            Ok(serde_json::to_value(s).expect("summary serializes"))
        }
        Command::Features { dataset, common, top_k } => {
            let mut cfg = base_config(&common)?;
            cfg.out_dir = common.out.unwrap_or_else(|| dataset.clone());
            if let Some(k) = top_k {
                cfg.top_k = k;
            }
            let cfg = cfg.resolve()?;
            let s = cmd_features(&dataset, &cfg)?;
            Ok(json!({
                "out_dir": cfg.out_dir,
                "rows": s.rows,
                "features": s.ranking.len(),
                "selected": s.selection.features,
            }))
        }
        Command::TrainEval {
            features,
            common,
            folds,
            top_k,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.out_dir = common.out.unwrap_or_else(|| features.clone());
            if let Some(f) = folds {
                cfg.folds = f;
            }
            if let Some(k) = top_k {
                cfg.top_k = k;
            }
            let cfg = cfg.resolve()?;
            let r = cmd_train_eval(&features, &cfg)?;
            let rows: Vec<_> = r
                .reports
                .iter()
                .map(|e| {
                    json!({
                        "classifier": e.classifier,
                        "balanced_accuracy": e.balanced_accuracy,
                        "dependability": e.dependability,
                        "security": e.security,
                        "hif_dependability": e.hif_dependability,
                    })
                })
                .collect();
            Ok(json!({ "out_dir": cfg.out_dir, "reports": rows }))
        }
    }
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json value serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
