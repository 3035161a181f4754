//! Command-line surface.

use crate::config::{self, CheckConfig, FluidConfig, RelaxConfig, RunConfig, SweepConfig, TransportConfig};
use crate::emit::{emit, to_json, write_text, Document, Format};
use crate::init::state_snapshot;
use crate::runs::{run_check, run_fluid, run_kinetic, run_relax, run_transport};
use crate::sweep::{run_sweep_with, SweepContext};
use crate::{Error, Result, WORKERS_ENV};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "vpblimit", version, about = "Kinetic/fluid limit studies for the Vlasov–Poisson–Boltzmann system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration; defaults apply to absent keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Result formats of `converge`.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [FormatArg::Csv, FormatArg::Json])]
    pub format: Vec<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl std::fmt::Display for FormatArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Viscosity and heat conductivity against the Sonine reference.
    Transport,
    /// Homogeneous linearized relaxation of an eigenmode of L.
    Relax,
    /// One kinetic simulation.
    Run,
    /// The NSFP limit system alone.
    Fluid,
    /// ε-sweep of kinetic runs against the NSFP reference.
    Converge,
    /// Energy and closure diagnostics of stored snapshots.
    Check,
}

fn load<T: Default + for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io { path: p.to_path_buf(), source: e })?;
            config::parse(&text)
        }
    }
}

fn config_dir(path: Option<&Path>) -> PathBuf {
    path.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default()
}

fn write_doc<C: Serialize, R: Serialize>(out: &Path, stem: &str, config: &C, result: &R) -> Result<()> {
    write_text(&out.join(format!("{stem}.json")), &to_json(&Document::new(stem, config, result))?)
}

/// Worker count from the environment, if set.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidInput(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs one subcommand, writing its outputs into `out`.
pub fn execute(cmd: Command, config: Option<&Path>, out: &Path, formats: &[Format]) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io { path: out.to_path_buf(), source: e })?;
    let base = config_dir(config);
    match cmd {
        Command::Transport => {
            let cfg: TransportConfig = load(config)?;
            let rep = run_transport(&cfg)?;
            for r in &rep.records {
                eprintln!("n = {:>2}: mu = {:.6}, kappa = {:.6}, rel_err = {:.2e}/{:.2e}", r.resolution, r.mu, r.kappa, r.rel_err[0], r.rel_err[1]);
            }
            write_doc(out, "transport", &cfg, &rep)
        }
        Command::Relax => {
            let cfg: RelaxConfig = load(config)?;
            let (rep, table) = run_relax(&cfg)?;
            eprintln!("lambda = {:.6}, max relative error = {:.3e}", rep.lambda, rep.max_rel_err);
            write_text(&out.join("relax.csv"), &table.to_csv()?)?;
            write_doc(out, "relax", &cfg, &rep)
        }
        Command::Run => {
            let cfg: RunConfig = load(config)?;
            let (summary, table) = run_kinetic(&cfg, &base, out)?;
            eprintln!(
                "{} steps of {:.3e}; drifts mass {:.2e} momentum {:.2e} energy {:.2e}",
                summary.steps, summary.dt, summary.max_mass_drift, summary.max_momentum_drift, summary.max_energy_drift
            );
            let csv = cfg.output.csv_path.clone().unwrap_or_else(|| PathBuf::from("run.csv"));
            write_text(&if csv.is_absolute() { csv } else { out.join(csv) }, &table.to_csv()?)?;
            write_doc(out, "run", &cfg, &summary)
        }
        Command::Fluid => {
            let cfg: FluidConfig = load(config)?;
            let (summary, table) = run_fluid(&cfg)?;
            eprintln!("{} steps; max energy-balance residual {:.2e}", summary.steps, summary.max_energy_balance_residual);
            let csv = cfg.output.csv_path.clone().unwrap_or_else(|| PathBuf::from("fluid.csv"));
            write_text(&if csv.is_absolute() { csv } else { out.join(csv) }, &table.to_csv()?)?;
            write_doc(out, "fluid", &cfg, &summary)
        }
        Command::Converge => {
            let cfg: SweepConfig = load(config)?;
            let ctx = SweepContext::build(&cfg)?;
            let outcome = run_sweep_with(&cfg, &ctx)?;
            for r in &outcome.table.rows {
                match (&r.metrics, &r.failure) {
                    (Some(m), _) => eprintln!(
                        "eps = {}: err_u = {:.3e}, err_sigma = {:.3e}, dissipation = {:.3e}",
                        r.epsilon, m.err_u, m.err_sigma, m.dissipation_integral
                    ),
                    (None, Some(f)) => eprintln!("eps = {}: failed: {f}", r.epsilon),
                    (None, None) => {}
                }
            }
            if let Some(dir) = &cfg.snapshot_dir {
                let dir = out.join(dir);
                for (model, state) in &outcome.finals {
                    let path = dir.join(format!("eps_{}.vpbs", model.epsilon));
                    std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
                    state_snapshot(model, state)?.save(&path)?;
                }
            }
            emit(out, "converge", "converge", &cfg, &outcome.table, formats)
        }
        Command::Check => {
            let cfg: CheckConfig = load(config)?;
            let (summary, table) = run_check(&cfg, &base)?;
            write_text(&out.join("check.csv"), &table.to_csv()?)?;
            write_doc(out, "check", &cfg, &summary)
        }
    }
}

pub fn formats(args: &[FormatArg]) -> Vec<Format> {
    let mut v: Vec<Format> = args
        .iter()
        .map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        })
        .collect();
    v.dedup();
    v
}
