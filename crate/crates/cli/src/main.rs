use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use steklov_core::experiments::{self, suites, Outcome, Purpose, RunConfig};
use steklov_core::{Boundary, Error, Profile};

/// Steklov plate laboratory: eigenvalues, linear solves and ground states on
/// the unit disk.
#[derive(Debug, Parser)]
#[command(name = "steklov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory (overrides STEKLOV_OUT_DIR and the config's `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steklov eigenvalues of consecutive angular modes.
    Eig {
        /// Number of grid nodes (at least 8).
        #[arg(long)]
        n: usize,
        /// First angular mode.
        #[arg(long, default_value_t = 0)]
        mode: usize,
        /// Number of consecutive modes.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Also write a manifest to the output directory.
        #[arg(long)]
        save: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve Δ²u = rhs with u(1) = 0 and the chosen boundary condition.
    SolveLinear {
        /// Number of grid nodes (at least 8).
        #[arg(long)]
        n: usize,
        /// steklov, navier or dirichlet.
        #[arg(long, default_value = "steklov")]
        bc: String,
        /// Poisson ratio for the Steklov condition.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        sigma: f64,
        /// Right-hand side: `const c`, `poly c0 c1 …` or `table path`.
        #[arg(long, default_value = "const 1")]
        rhs: String,
        /// Also write a manifest to the output directory.
        #[arg(long)]
        save: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ground state from a key-value config (or a ground manifest).
    Ground {
        /// Config file or a previously written ground manifest.
        config: PathBuf,
        /// Override a config entry, `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// σ sweep from a config or a canned suite.
    Sweep {
        /// Sweep config file.
        #[arg(required_unless_present = "suite", conflicts_with = "suite")]
        config: Option<PathBuf>,
        /// paper-suite-sigma-to-minus-one, paper-suite-sigma-to-one or
        /// paper-suite-sigma-to-infinity.
        #[arg(long)]
        suite: Option<String>,
        /// Override a config entry, `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Recompute residuals and certificates of a ground manifest.
    Verify { manifest: PathBuf },
    /// Determinant, maxpr, quadrature and manufactured-solution checks.
    IdentitySuite {
        /// Number of grid nodes (at least 8).
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
}

fn overrides(set: &[String]) -> Result<Vec<(String, String)>, Error> {
    set.iter()
        .map(|s| match s.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(Error::Config {
                key: s.clone(),
                message: "--set expects key=value".into(),
            }),
        })
        .collect()
}

fn save_dir(save: bool, out: &OutArgs) -> Option<PathBuf> {
    save.then(|| experiments::resolve_out_dir(out.out.as_deref(), None))
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Eig {
            n,
            mode,
            count,
            save,
            out,
        } => experiments::run_eig(n, mode, count, save_dir(save, &out).as_deref()),
        Command::SolveLinear {
            n,
            bc,
            sigma,
            rhs,
            save,
            out,
        } => {
            let boundary = Boundary::from_kind(&bc, sigma)?;
            let rhs: Profile = experiments::config::parse_profile("rhs", &rhs, &|p: &str| PathBuf::from(p))?;
            experiments::run_solve_linear(n, boundary, &rhs, save_dir(save, &out).as_deref())
        }
        Command::Ground { config, set, out } => {
            let cfg = experiments::load_config(&config, Purpose::Ground, &overrides(&set)?)?;
            let dir = experiments::resolve_out_dir(out.out.as_deref(), cfg.out_dir.as_deref());
            experiments::run_ground(&cfg, &dir)
        }
        Command::Sweep {
            config,
            suite,
            set,
            out,
        } => {
            let set = overrides(&set)?;
            let cfg = match (config, suite) {
                (Some(path), _) => experiments::load_config(&path, Purpose::Sweep, &set)?,
                (None, Some(name)) => {
                    let text = suites::canned(&name).ok_or_else(|| Error::Config {
                        key: "suite".into(),
                        message: format!("unknown suite `{name}` (one of {})", suites::NAMES.join(", ")),
                    })?;
                    RunConfig::parse(text, None, Purpose::Sweep, &set)?
                }
                (None, None) => unreachable!("clap requires a config or a suite"),
            };
            let dir = experiments::resolve_out_dir(out.out.as_deref(), cfg.out_dir.as_deref());
            experiments::run_sweep(&cfg, &dir)
        }
        Command::Verify { manifest } => experiments::run_verify(&manifest),
        Command::IdentitySuite { n } => experiments::run_identity_suite(n),
    }
}

fn report(outcome: &Outcome) -> ExitCode {
    for line in &outcome.lines {
        println!("{line}");
    }
    for file in &outcome.files {
        println!("wrote {}", display(file));
    }
    match &outcome.failure {
        None => ExitCode::SUCCESS,
        Some(msg) => {
            eprintln!("steklov: {msg}");
            ExitCode::from(2)
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(outcome) => report(&outcome),
        Err(e) => {
            eprintln!("steklov: error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
