//! `hilbert-lab`: command-line experiments on Hilbert geometries.
//!
//! Exit codes: 0 success, 1 a checked bound was violated (the report still
//! carries the witness), 2 invalid input or a failed computation.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "hilbert-lab",
    version,
    about = "Experiments on Hilbert geometries of convex bodies"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Random seed for every sampled computation.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Output format (default: text for scalar commands, csv for tables,
    /// json otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Write an SVG picture of a planar body (ball and john only).
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hilbert distance between two points.
    Distance(commands::DistanceArgs),
    /// Finsler norm of a tangent vector.
    Norm(commands::NormArgs),
    /// Hilbert (Busemann) density at a point.
    Density(commands::DensityArgs),
    /// Metric ball around a point.
    Ball(commands::BallArgs),
    /// John ellipsoid and sandwich check.
    John(commands::JohnArgs),
    /// Bounded-local-geometry certificate at a point.
    Theorem12(commands::Theorem12Args),
    /// Tangent-ball sandwich and vertical facts on the cylinder.
    Cylinder(commands::CylinderArgs),
    /// Minimized Rayleigh quotient over a radial trial family.
    Rayleigh(commands::RayleighArgs),
    /// Cheeger quotient of a metric ball.
    Cheeger(commands::CheegerArgs),
    /// Norm and density convergence along Minkowski smoothings.
    Converge(commands::ConvergeArgs),
    /// Four-point hyperbolicity probe.
    Delta(commands::DeltaArgs),
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("HILBERT_LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("HILBERT_LAB_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err("HILBERT_LAB_THREADS must be positive".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let format = cli
        .common
        .format
        .unwrap_or_else(|| commands::default_format(&cli.command));
    let text = output::render(&report, format, hilbert_core::VERSION, cli.common.seed);
    match &cli.common.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("bound violation: see the report's witnesses");
        ExitCode::from(1)
    }
}
