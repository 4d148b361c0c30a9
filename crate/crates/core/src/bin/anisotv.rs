use std::path::PathBuf;
use std::process::ExitCode;

use anisotv::config::RunConfig;
use anisotv::pipeline::{load_input, run_pipeline, Command};
use anisotv::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "anisotv",
    version,
    about = "Anisotropic TV denoising and minimality audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the ROF problem and write the minimiser with a JSON sidecar.
    Denoise(Opts),
    /// Compare the minimiser against sampled competitors.
    Audit(Opts),
    /// Solve on nested grids and tabulate the solution norms.
    RefineStudy(Opts),
    /// Check the special cone property at sampled points of a set.
    ConeCheck(Opts),
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// `key = value` file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Vertex values for a `.graph` input.
    #[arg(long)]
    datum: Option<PathBuf>,
    /// Input format when the extension is not enough (csv, pgm, t, pcr, graph, vertices).
    #[arg(long)]
    format: Option<String>,
    /// Clamp and round PGM output instead of writing CSV.
    #[arg(long)]
    quantize: bool,
    /// Scale PGM input to [0, 1].
    #[arg(long)]
    normalize: bool,
    input: PathBuf,
}

fn configure(o: &Opts) -> Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = o.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = o.tol {
        cfg.tol = v;
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.samples {
        cfg.n_samples = v;
    }
    if let Some(v) = o.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = &o.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &o.datum {
        cfg.datum = Some(v.clone());
    }
    cfg.quantize |= o.quantize;
    cfg.normalize |= o.normalize;
    cfg.validate()?;
    Ok(cfg)
}

fn threads() -> Result<()> {
    let Ok(v) = std::env::var("ANISOTV_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "ANISOTV_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    threads()?;
    let (cmd, opts) = match &cli.command {
        Cmd::Denoise(o) => (Command::Denoise, o),
        Cmd::Audit(o) => (Command::Audit, o),
        Cmd::RefineStudy(o) => (Command::RefineStudy, o),
        Cmd::ConeCheck(o) => (Command::ConeCheck, o),
    };
    let cfg = configure(opts)?;
    let input = load_input(cmd, &opts.input, opts.format.as_deref(), &cfg)?;
    let stem = opts
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into());
    for path in run_pipeline(cmd, &cfg, &input, &stem)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("anisotv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
