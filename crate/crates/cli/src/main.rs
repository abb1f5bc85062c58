//! `spinboson <subcommand> --config <path> [--seed S] [--samples N] [--out DIR]`
//!
//! Exit status: 0 success, 1 assertion failure, 2 configuration error,
//! 3 numerical non-convergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinboson::exec::Execution;

use crate::commands::Context;
use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] spinboson::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use spinboson::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidParameter { .. } | E::Rejected { .. } | E::Divergent { .. } | E::ZeroModeUndefined { .. }) => 2,
            CliError::Core(E::Quadrature { .. } | E::Inconsistent(_)) => 3,
            CliError::Io(_) | CliError::Csv(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinboson", version, about = "Spin-boson equilibrium-state laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// INI configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides SPINBOSON_WORKERS and the config).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for cached kernel tables.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Spin-loop sampler against closed-form oracles.
    SpinCheck,
    /// Thermal kernel identities.
    Kernels,
    /// Characteristic-functional sweeps.
    Charfun,
    /// Cluster scan and no-go verdict.
    Cluster,
    /// Variance routes, deviation bound and c-number criterion.
    Variance,
    /// Resolvent expectations, bounds and decay.
    Resolvent,
    /// Direction classification and ideal report.
    Ideals,
    /// Classical-limit scan along a sequence of test functions.
    GpScan,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SpinCheck => "spin-check",
            Command::Kernels => "kernels",
            Command::Charfun => "charfun",
            Command::Cluster => "cluster",
            Command::Variance => "variance",
            Command::Resolvent => "resolvent",
            Command::Ideals => "ideals",
            Command::GpScan => "gp-scan",
        }
    }
}

fn workers(cli: &Cli, cfg: &RunConfig) -> Result<Option<usize>, CliError> {
    if let Some(w) = cli.workers {
        return Ok(Some(w));
    }
    if let Ok(v) = std::env::var("SPINBOSON_WORKERS") {
        let w = v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("SPINBOSON_WORKERS: expected a positive integer, got '{v}'")))?;
        return Ok(Some(w));
    }
    Ok(cfg.numerics.workers)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.numerics.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.numerics.samples = n;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate()?;
    let threads = workers(cli, &cfg)?;
    if threads == Some(0) {
        return Err(CliError::Config("workers: must be positive".into()));
    }
    let out_dir = cfg.output.dir.clone();
    let cache_dir = cli
        .cache_dir
        .clone()
        .or_else(|| cfg.output.cache_dir.clone())
        .or_else(|| Some(out_dir.join("cache")));
    let ctx = Context {
        cfg,
        exec: Execution::default(),
        out_dir,
        cache_dir,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads:?} workers: {e}")))?;
    let command = cli.command;
    let mut outcome = pool.install(|| match command {
        Command::SpinCheck => commands::spin_check(&ctx),
        Command::Kernels => commands::kernels(&ctx),
        Command::Charfun => commands::charfun(&ctx),
        Command::Cluster => commands::cluster(&ctx),
        Command::Variance => commands::variance(&ctx),
        Command::Resolvent => commands::resolvent_cmd(&ctx),
        Command::Ideals => commands::ideals(&ctx),
        Command::GpScan => commands::gp_scan(&ctx),
    })?;
    let mut head = output::Summary::default();
    head.set("subcommand", command.name());
    head.set("seed", ctx.cfg.numerics.seed);
    head.set("samples", ctx.cfg.numerics.samples);
    head.set("config_sha256", ctx.cfg.content_hash());
    head.entries.append(&mut outcome.summary.entries);
    head.assertions = outcome.summary.assertions;
    if ctx.cfg.output.csv {
        for t in &outcome.tables {
            let path = t.write(&ctx.out_dir)?;
            log::info!("wrote {}", path.display());
        }
    }
    let path = head.write(&ctx.out_dir, &command.name().replace('-', "_"))?;
    log::info!("wrote {}", path.display());
    for (name, ok) in &head.assertions {
        if !ok {
            eprintln!("assertion failed: {name}");
        }
    }
    Ok(head.all_pass())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
