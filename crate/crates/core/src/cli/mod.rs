//! Command-line front end. The binary is a thin wrapper over [`main_with_args`].
//!
//! Exit codes: 0 success, 1 a check failed, 2 parse error, 3 validation
//! error, 4 IO error, 5 equivalence not established.

pub mod commands;
pub mod config;
pub mod output;
pub mod tables;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::oracle::McStatus;
use commands::{cmd_paper_tables, cmd_run, cmd_sweep, cmd_verify, Overrides};
use config::{Format, RunConfig};
use tables::TauStatus;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("equivalence not established for {0}; pass --force-informational to run anyway")]
    Equivalence(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Io(_) => 4,
            CliError::Equivalence(_) => 5,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::EquivalenceNotEstablished(s) => CliError::Equivalence(s),
            other => CliError::Validation(other.to_string()),
        }
    }
}

/// Which concurrence columns to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionChoice {
    C,
    C2,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "dephasing", version, about = "Dephasing channels, entanglement decay and timescale audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve one state and emit trajectories, fits and the audit.
    Run(Flags),
    /// Compare the channel with the Monte Carlo ensemble.
    Verify(Flags),
    /// Regenerate tabulated times, oracle checks and the audit.
    PaperTables(Flags),
    /// Repeat a run over rates and coefficient draws.
    Sweep(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    plots: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    force_informational: bool,
    #[arg(long, value_enum)]
    convention: Option<ConventionChoice>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            format: self.format,
            plots: self.plots,
            seed: self.seed,
            force_informational: self.force_informational,
            convention: self.convention,
        }
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        let path = self.config.as_ref().ok_or_else(|| CliError::Parse("--config is required".into()))?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = RunConfig::parse(&text)?;
        self.overrides().apply(&mut cfg);
        Ok(cfg)
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(flags) => {
            let cfg = flags.load()?;
            let outcome = cmd_run(&cfg, &flags.overrides())?;
            for f in &outcome.files {
                println!("wrote {}", cfg.output_dir.join(f).display());
            }
            if let Some(v) = outcome.audit {
                println!("audit: {v}");
            }
        }
        Command::Verify(flags) => {
            let cfg = flags.load()?;
            let r = cmd_verify(&cfg, &flags.overrides())?;
            println!(
                "distance {:.6e} (bound {:.6e}), max |z| {:.3}, status {:?}",
                r.distance, r.distance_bound, r.max_abs_z, r.status
            );
            for d in &r.divergences {
                println!(
                    "divergence rho[{},{}]: ensemble factor {:.6e}, channel factor {:.6e}",
                    d.row + 1,
                    d.col + 1,
                    d.hamiltonian_factor,
                    d.channel_factor
                );
            }
            if r.status == McStatus::Fail {
                return Err(CliError::Failed("Monte Carlo ensemble disagrees with the channel".into()));
            }
        }
        Command::PaperTables(flags) => {
            let out = flags.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let r = cmd_paper_tables(&out, flags.seed.unwrap_or(0))?;
            for t in &r.tau {
                let fitted = t.fitted.map_or("none".to_string(), |f| format!("{f:.6}"));
                let status = match t.status {
                    TauStatus::Match => "MATCH",
                    TauStatus::Differs => "DIFFERS",
                    TauStatus::NoDecay => "NO_DECAY",
                };
                println!(
                    "tau {} / {} / {} [{}] {} = {:.6}, fitted {fitted}: {status}",
                    t.class, t.scenario, t.kind, t.convention, t.expression, t.tabulated
                );
            }
            for o in &r.oracle {
                let v = if o.pass { "PASS" } else { "FAIL" };
                println!("oracle {} / {}: max deviation {:.3e}: {v}", o.class, o.scenario, o.max_deviation);
            }
            for a in &r.audit {
                let v = if a.fail > 0 { "FAIL" } else if a.pass > 0 { "PASS" } else { "VACUOUS" };
                println!(
                    "audit {} / {}: {} pass, {} vacuous, {} fail: {v}",
                    a.class, a.scenario, a.pass, a.vacuous, a.fail
                );
            }
            println!("wrote {}", out.join("paper_tables.json").display());
            if !r.failures.is_empty() {
                return Err(CliError::Failed(format!("failed checks: {}", r.failures.join("; "))));
            }
        }
        Command::Sweep(flags) => {
            let cfg = flags.load()?;
            let points = cmd_sweep(&cfg, &flags.overrides())?;
            let fails = points.iter().filter(|p| p.audit == crate::timescales::Verdict::Fail).count();
            println!("{} sweep points, {fails} audit failures", points.len());
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
