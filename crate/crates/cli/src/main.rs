//! `tagreuse` — analyze tag-reuse behavior and evaluate tag predictors on
//! folksonomy datasets.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod commands;
mod fsio;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::{parse_bin, parse_factor, Settings};
use tagreuse::Error;

#[derive(Parser)]
#[command(name = "tagreuse", version, about = "Tag-reuse analysis and prediction over folksonomies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Config file of key = value lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value overrides (predictor keys like bll.d=0.5, synth.*).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Seed for stochastic components.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Pool reuse probability by frequency, recency and context, and fit
    /// power laws; writes one CSV + JSON per factor.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Dataset TSV: `user<TAB>resource<TAB>timestamp<TAB>tags`.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Factor to analyze.
        #[arg(long, value_parser = ["frequency", "recency", "context", "all"])]
        factor: Option<String>,
        /// Minimum pooled instances for a point to enter the regression.
        #[arg(long)]
        min_support: Option<u64>,
        /// Pooling key binning for the context factor.
        #[arg(long, value_parser = ["raw", "log2"])]
        bin: Option<String>,
        /// Weight regression points by their instance support.
        #[arg(long)]
        weighted: bool,
    },
    /// Fit predictors on the training split and report F1@5 / nDCG@10.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated predictor names
        /// (mp,recency,semcon,girp,bll,bllac,folkrank,pitf).
        #[arg(long)]
        predictors: Option<String>,
        /// Comma-separated cutoffs for precision/recall.
        #[arg(long)]
        ks: Option<String>,
        /// Worker threads for evaluation queries (default 1, reproducible).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Generate a seeded synthetic dataset and write the canonical TSV.
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        /// Output dataset file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        users: Option<usize>,
        #[arg(long)]
        posts_per_user: Option<usize>,
        /// Tag vocabulary size.
        #[arg(long)]
        vocab: Option<usize>,
        #[arg(long)]
        tags_per_post: Option<usize>,
        /// Shared-resource rate in 0..=1; controls narrowness.
        #[arg(long)]
        sharing: Option<f64>,
        /// Context boost for tags already on the resource.
        #[arg(long)]
        context_strength: Option<f64>,
        /// Power-law reuse decay exponent.
        #[arg(long)]
        d_gen: Option<f64>,
        /// Interest drift in 0..=1.
        #[arg(long)]
        drift: Option<f64>,
    },
}

fn merge_common(settings: &mut Settings, common: &CommonArgs) -> tagreuse::Result<()> {
    if let Some(path) = &common.config {
        settings.load_config_file(path)?;
    }
    settings.apply_overrides(&common.set)?;
    if let Some(seed) = common.seed {
        settings.seed = Some(seed);
    }
    Ok(())
}

fn run(cli: Cli) -> tagreuse::Result<()> {
    let mut settings = Settings::default();
    match cli.command {
        Command::Analyze {
            common,
            dataset,
            out,
            factor,
            min_support,
            bin,
            weighted,
        } => {
            merge_common(&mut settings, &common)?;
            if let Some(d) = dataset {
                settings.dataset = Some(d);
            }
            if let Some(o) = out {
                settings.out = Some(o);
            }
            if let Some(f) = factor {
                settings.factor = parse_factor(&f)?;
            }
            if let Some(m) = min_support {
                settings.min_support = m;
            }
            if let Some(b) = bin {
                settings.bin = parse_bin(&b)?;
            }
            if weighted {
                settings.weighting = tagreuse::reuse::Weighting::BySupport;
            }
            commands::cmd_analyze(&settings)
        }
        Command::Evaluate {
            common,
            dataset,
            out,
            predictors,
            ks,
            threads,
        } => {
            merge_common(&mut settings, &common)?;
            if let Some(d) = dataset {
                settings.dataset = Some(d);
            }
            if let Some(o) = out {
                settings.out = Some(o);
            }
            if let Some(p) = predictors {
                settings.apply("predictors", &p)?;
            }
            if let Some(ks) = ks {
                settings.apply("ks", &ks)?;
            }
            if let Some(t) = threads {
                settings.threads = t;
            }
            commands::cmd_evaluate(&settings)
        }
        Command::Synth {
            common,
            out,
            users,
            posts_per_user,
            vocab,
            tags_per_post,
            sharing,
            context_strength,
            d_gen,
            drift,
        } => {
            merge_common(&mut settings, &common)?;
            if let Some(o) = out {
                settings.out = Some(o);
            }
            if let Some(v) = users {
                settings.synth.users = v;
            }
            if let Some(v) = posts_per_user {
                settings.synth.posts_per_user = v;
            }
            if let Some(v) = vocab {
                settings.synth.vocab_size = v;
            }
            if let Some(v) = tags_per_post {
                settings.synth.tags_per_post = v;
            }
            if let Some(v) = sharing {
                settings.synth.resource_sharing = v;
            }
            if let Some(v) = context_strength {
                settings.synth.context_strength = v;
            }
            if let Some(v) = d_gen {
                settings.synth.reuse_decay = v;
            }
            if let Some(v) = drift {
                settings.synth.drift = v;
            }
            commands::cmd_synth(&settings)
        }
    }
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::InvalidParam(_) | Error::UnknownPredictor(_) => 1,
        Error::Parse { .. }
        | Error::EmptyDataset
        | Error::InsufficientData(_)
        | Error::ModelFormat(_)
        | Error::Io(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
