//! `biharm verify|sweep|identities` — batch verification runs over the
//! submersion catalog, parameter sweeps and structural identity suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use biharm::cli::{
    cmd_identities, cmd_sweep, cmd_verify, resolve, CliError, CmdOutput, RawConfig,
};

#[derive(Parser)]
#[command(
    name = "biharm",
    version,
    about = "Numerical verification of (bi)harmonicity for Riemannian submersions from 3-spaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify one catalog entry (or a custom spec from a config file)
    /// and write the full per-point report.
    Verify(CommonArgs),
    /// One verdict row per grid cell over entry parameters; defaults to the
    /// fiberwise projection over the full (m, l) model grid.
    Sweep(CommonArgs),
    /// Structural identity suites: closed-form table comparisons with
    /// `--bcv M L`, Jacobi/curvature/fiber residuals for an entry.
    Identities(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Catalog entry: pr1 | h2r-exp | nil | flat | bcv-z
    entry: Option<String>,
    /// Flat key-value config file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter m (comma-separated list in `sweep`)
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    /// Parameter l (comma-separated list in `sweep`)
    #[arg(long, allow_hyphen_values = true)]
    l: Option<String>,
    /// Parameter a (comma-separated list in `sweep`)
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Parameter b (comma-separated list in `sweep`)
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Sample points per spec
    #[arg(long)]
    points: Option<usize>,
    /// RNG seed for the sample plan
    #[arg(long)]
    seed: Option<u64>,
    /// Harmonicity threshold on the tension norm
    #[arg(long = "tol-h")]
    tol_h: Option<f64>,
    /// Biharmonicity threshold on the criterion residuals
    #[arg(long = "tol-b")]
    tol_b: Option<f64>,
    /// Pass threshold for `identities`
    #[arg(long)]
    tol: Option<f64>,
    /// Output format: json | csv
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bounded worker count for grid cells / sample points
    #[arg(long)]
    jobs: Option<usize>,
    /// Compare engine connection/curvature against the closed-form tables
    /// of M_{m,l} (identities only)
    #[arg(long, num_args = 2, value_names = ["M", "L"], allow_hyphen_values = true)]
    bcv: Option<Vec<f64>>,
}

impl CommonArgs {
    fn into_raw(self) -> Result<RawConfig, CliError> {
        let from_cli = RawConfig {
            entry: self.entry,
            m: self.m,
            l: self.l,
            a: self.a,
            b: self.b,
            points: self.points,
            seed: self.seed,
            tol_h: self.tol_h,
            tol_b: self.tol_b,
            tol: self.tol,
            format: self.format,
            out: self.out.map(|p| p.display().to_string()),
            jobs: self.jobs,
            bcv: self.bcv.map(|v| (v[0], v[1])),
            ..Default::default()
        };
        Ok(match self.config {
            Some(path) => from_cli.over(RawConfig::from_file(&path)?),
            None => from_cli,
        })
    }
}

fn run() -> Result<CmdOutput, CliError> {
    let cli = Cli::parse();
    let (raw, run): (_, fn(&biharm::cli::Resolved) -> Result<CmdOutput, CliError>) = match cli.cmd
    {
        Cmd::Verify(args) => (args.into_raw()?, cmd_verify),
        Cmd::Sweep(args) => (args.into_raw()?, cmd_sweep),
        Cmd::Identities(args) => (args.into_raw()?, cmd_identities),
    };
    let resolved = resolve(raw)?;
    let out = run(&resolved)?;
    match &resolved.out {
        Some(path) => {
            std::fs::write(path, &out.rendered).map_err(|e| CliError {
                code: 1,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            println!("{}", out.summary);
            eprintln!("report written to {}", path.display());
        }
        None => {
            println!("{}", out.rendered);
            eprintln!("{}", out.summary);
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    match run() {
        Ok(out) => ExitCode::from(out.exit_code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
