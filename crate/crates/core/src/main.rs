use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shocknozzle::io::{self, ResultBundle, SolverConfig};
use shocknozzle::{Error, Result};

/// Steady transonic shocks of the forced 2D Euler system in a flat nozzle.
#[derive(Parser, Debug)]
#[command(name = "shocknozzle", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Grid size as N1xN2 (overrides [grid]).
    #[arg(long, global = true, value_name = "N1xN2", value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Exit perturbation size (overrides exit.epsilon).
    #[arg(long, global = true, value_name = "X")]
    epsilon: Option<f64>,
    /// Only print warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the 1D background and write both branches.
    Background,
    /// Tabulate the exit pressure against the shock position.
    Window {
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Run the fixed-point iteration for the perturbed exit pressure.
    Perturb,
    /// Run the [sweep] ranges of the configuration in parallel.
    Sweep,
    /// Re-check the invariants of a result directory.
    Verify {
        /// Result directory; defaults to --out or output.dir.
        path: Option<PathBuf>,
    },
    /// Dump the linear coefficient profiles.
    Coeffs,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected N1xN2, got {s:?}"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((n(a)?, n(b)?))
}

fn load_config(common: &Common) -> Result<SolverConfig> {
    let path = common.config.as_ref().ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let mut cfg = SolverConfig::load(path)?;
    if let Some(dir) = &common.out {
        cfg.output.dir = dir.clone();
    }
    if let Some((n1, n2)) = common.grid {
        cfg.grid.n1 = n1;
        cfg.grid.n2 = n2;
    }
    if let Some(eps) = common.epsilon {
        cfg.exit.epsilon = eps;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(bundle: &ResultBundle) {
    for line in &bundle.summary {
        log::info!("{line}");
    }
    log::info!("wrote {} files to {}", bundle.files.len(), bundle.dir.display());
}

fn run(cli: &Cli) -> Result<()> {
    let bundle = match &cli.command {
        Command::Background => io::cmd_background(&load_config(&cli.common)?)?,
        Command::Window { samples } => io::cmd_window(&load_config(&cli.common)?, *samples)?,
        Command::Perturb => io::cmd_perturb(&load_config(&cli.common)?)?,
        Command::Sweep => io::cmd_sweep(&load_config(&cli.common)?)?,
        Command::Coeffs => io::cmd_coeffs(&load_config(&cli.common)?)?,
        Command::Verify { path } => {
            let dir = match (path, &cli.common.out) {
                (Some(p), _) | (None, Some(p)) => p.clone(),
                (None, None) => load_config(&cli.common)?.output.dir,
            };
            let r = io::cmd_verify(&dir)?;
            for c in &r.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                log::info!("{tag} {}: {:e} (bound {:e}) {}", c.name, c.value, c.bound, c.detail);
            }
            if !r.passed {
                let first = r.failures().next().map(|c| format!("{}: {}", c.name, c.detail)).unwrap_or_default();
                return Err(Error::Domain(format!("verification failed: {first}")));
            }
            log::info!("all {} checks passed", r.checks.len());
            return Ok(());
        }
    };
    report(&bundle);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.common.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_target(false).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
