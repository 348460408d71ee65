use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use spoofguard_cli::config::{parse_feature_list, Overrides, PipelineConfig, Preset};
use spoofguard_cli::pipeline::{cmd_eval, cmd_project_lda, cmd_score, cmd_train};
use spoofguard_cli::SystemModels;

/// Voice anti-spoofing: i-vector front-ends, SVM/DBN back-ends, EER evaluation.
#[derive(Parser, Debug)]
#[command(name = "spoofguard", version)]
struct Cli {
    /// `key = value` configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    /// Model directory.
    #[arg(long, global = true, value_name = "DIR")]
    models: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Comma-separated feature types, e.g. MFPC,CosPhasePC,MWPC.
    #[arg(long, global = true, value_name = "LIST")]
    features: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit front-end PCA, UBMs, TV matrices and the classifier.
    Train,
    /// Write one score per manifest utterance (higher = human).
    Score,
    /// Print overall and per-attack EER for one or more score files.
    Eval {
        #[arg(required = true, value_name = "SCORES")]
        scores: Vec<PathBuf>,
    },
    /// Export an LDA projection of normalized i-vectors.
    ProjectLda,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: anyhow::Error| e.to_string())
}

fn required(p: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    p.clone()
        .ok_or_else(|| anyhow!("--{flag} is required (or set `{flag}` in the config file)"))
}

/// Without an explicit preset or feature list, scoring follows the models.
fn adopt_models(cfg: &mut PipelineConfig) -> Result<()> {
    if cfg.explicit_system {
        return Ok(());
    }
    let models = SystemModels::load(&required(&cfg.models, "models")?)?;
    cfg.feature_set = models.features.clone();
    cfg.predetector = models.predetector;
    cfg.classifier = models.classifier.kind();
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let overrides = Overrides {
        preset: cli.preset,
        features: cli
            .features
            .as_deref()
            .map(parse_feature_list)
            .transpose()?,
        seed: cli.seed,
        jobs: cli.jobs,
        manifest: cli.manifest,
        models: cli.models,
        out: cli.out,
    };
    let mut cfg = PipelineConfig::resolve(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Train => {
            let summary = cmd_train(
                &cfg,
                &required(&cfg.manifest, "manifest")?,
                &required(&cfg.models, "models")?,
            )?;
            for (ft, ll) in &summary.ubm_log_likelihoods {
                eprintln!("ubm.{ft}: log-likelihood per iteration {ll:.4?}");
            }
            for (ft, obj) in &summary.tv_objectives {
                eprintln!("tv.{ft}: objective per iteration {obj:.4?}");
            }
        }
        Command::Score => {
            adopt_models(&mut cfg)?;
            cmd_score(
                &cfg,
                &required(&cfg.manifest, "manifest")?,
                &required(&cfg.models, "models")?,
                &required(&cfg.out, "out")?,
            )?;
        }
        Command::Eval { scores } => {
            let report = cmd_eval(
                &scores,
                &required(&cfg.manifest, "manifest")?,
                cfg.out.as_deref(),
            )?;
            print!("{}", report.to_text());
        }
        Command::ProjectLda => {
            cmd_project_lda(
                &cfg,
                &required(&cfg.manifest, "manifest")?,
                &required(&cfg.models, "models")?,
                &required(&cfg.out, "out")?,
            )?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
