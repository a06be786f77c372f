//! `pseudomask` command-line front end.
//!
//! Every subcommand takes one or more run manifests, writes its artifacts to
//! `<out>/<image_id>/` and prints a one-line JSON summary on stdout.
//! Exit codes: 0 success, 2 bad input, 3 stage contract violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pseudomask::ndio::{read_manifest, RunManifest};
use pseudomask::pipeline::{
    for_each_manifest, overlay_manifest, run_manifest_with, run_pipeline, run_selftrain, PipelineConfig, Stage,
    StageOutcome,
};
use pseudomask::Error;

#[derive(Parser)]
#[command(name = "pseudomask", version, about = "Unsupervised instance-segmentation pseudo-label toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Patch affinity map from features.
    Affinity(Common),
    /// Multicut candidate masks from features.
    Multicut(Common),
    /// Corner rule, mask rating and top-Q selection.
    Filter(Common),
    /// Superpixel segmentation (SNIC, or ingest of a given label map).
    Superpixel(Common),
    /// Superpixel-guided mask loss and gradients.
    SgmLoss(Common),
    /// Checkpoint stability scores and boundary weight maps.
    Stability(Common),
    /// Stability-weighted self-training loss and gradients.
    AdaptiveLoss(Common),
    /// Run the configured stages in order.
    Pipeline(Common),
    /// Render the manifest's masks over its image.
    Overlay(Common),
}

#[derive(Args)]
struct Common {
    /// Run manifest (JSON). Repeat for several images.
    #[arg(long = "manifest", required = true)]
    manifests: Vec<PathBuf>,
    /// Output root; artifacts go to <out>/<image_id>/.
    #[arg(long)]
    out: PathBuf,
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Manifests processed concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Common {
    fn load(&self) -> Result<(PipelineConfig, Vec<RunManifest>), Error> {
        let cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::InvalidInput(format!("config {}: {e}", p.display())))?;
                PipelineConfig::from_json(&text)?
            }
            None => PipelineConfig::default(),
        };
        let manifests = self.manifests.iter().map(read_manifest).collect::<Result<Vec<_>, _>>()?;
        Ok((cfg, manifests))
    }
}

fn stages(cfg: PipelineConfig, stages: &[Stage], common: &Common, manifests: &[RunManifest]) -> Result<Vec<Value>, Error> {
    let cfg = cfg.with_stages(stages.to_vec());
    let runs = run_pipeline(&cfg, manifests, &common.out, common.jobs)?;
    Ok(runs.into_iter().map(|r| r.summary).collect())
}

fn stability_only(cfg: PipelineConfig, common: &Common, manifests: &[RunManifest]) -> Result<Vec<Value>, Error> {
    let cfg = cfg.with_stages(vec![Stage::Selftrain]);
    let runs = for_each_manifest(manifests, common.jobs, |m| {
        run_manifest_with(&cfg, m, &common.out, |_, _, m, dir| {
            let mut manifest = m.clone();
            let summary = run_selftrain(&mut manifest, dir, false)?;
            Ok(StageOutcome { manifest, summary })
        })
    })?;
    Ok(runs.into_iter().map(|r| r.summary).collect())
}

fn run(command: &Command) -> Result<(&'static str, Vec<Value>), Error> {
    let (name, common) = match command {
        Command::Affinity(c) => ("affinity", c),
        Command::Multicut(c) => ("multicut", c),
        Command::Filter(c) => ("filter", c),
        Command::Superpixel(c) => ("superpixel", c),
        Command::SgmLoss(c) => ("sgm-loss", c),
        Command::Stability(c) => ("stability", c),
        Command::AdaptiveLoss(c) => ("adaptive-loss", c),
        Command::Pipeline(c) => ("pipeline", c),
        Command::Overlay(c) => ("overlay", c),
    };
    let (cfg, manifests) = common.load()?;
    let results = match command {
        Command::Affinity(_) => stages(cfg, &[Stage::Affinity], common, &manifests)?,
        Command::Multicut(_) => stages(cfg, &[Stage::Multicut], common, &manifests)?,
        Command::Filter(_) => stages(cfg, &[Stage::Filter], common, &manifests)?,
        Command::Superpixel(_) => stages(cfg, &[Stage::Superpixel], common, &manifests)?,
        Command::SgmLoss(_) => stages(cfg, &[Stage::Sgm], common, &manifests)?,
        Command::Stability(_) => stability_only(cfg, common, &manifests)?,
        Command::AdaptiveLoss(_) => stages(cfg, &[Stage::Selftrain], common, &manifests)?,
        Command::Pipeline(_) => {
            let runs = run_pipeline(&cfg, &manifests, &common.out, common.jobs)?;
            runs.into_iter().map(|r| r.summary).collect()
        }
        Command::Overlay(_) => for_each_manifest(&manifests, common.jobs, |m| overlay_manifest(m, &common.out))?,
    };
    Ok((name, results))
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::StageDependencyViolation { .. } | Error::MissingInput { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((name, results)) => {
            println!("{}", json!({ "command": name, "status": "ok", "results": results }));
            ExitCode::SUCCESS
        }
        Err(err) => {
            println!("{}", json!({ "status": "error", "error": err.to_string() }));
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
