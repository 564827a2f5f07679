//! `guarantee`: exact and simulated analyses of confidence bounds,
//! researcher strategies, implementer decisions and performance guarantees.

mod commands;
mod output;
mod reproduce;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use guarantee_core::binom::BoundKind;

use crate::commands::Ctx;
use crate::scenario::{ConfigError, Scenario};

#[derive(Parser)]
#[command(name = "guarantee", version, about)]
struct Cli {
    /// Scenario file; the bundled default is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "GUARANTEE_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcArg {
    #[value(alias = "clopper-pearson")]
    Cp,
    Wald,
}

impl From<ProcArg> for BoundKind {
    fn from(p: ProcArg) -> Self {
        match p {
            ProcArg::Cp => BoundKind::ClopperPearson,
            ProcArg::Wald => BoundKind::Wald,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Coverage and violation curves for a lower-bound procedure.
    Coverage {
        #[arg(long = "proc", value_enum, default_value = "cp")]
        procedure: ProcArg,
        #[arg(long, default_value_t = 300)]
        n: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha_prime: f64,
    },
    /// Fraudulent-mixture α and the implied scale-back table.
    Example1 {
        #[arg(long, default_value_t = 0.01)]
        alpha_prime: f64,
        #[arg(long, default_value_t = 0.25)]
        pi: f64,
    },
    /// Exact false-positive surfaces for selective publication.
    Example2 {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        pi: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        p_c: f64,
        /// Nominal levels; the scenario's α′ grid when omitted.
        #[arg(long, value_delimiter = ',')]
        alpha_prime: Vec<f64>,
    },
    /// Actual versus nominal α curves for a list of p_C values.
    Fig1 {
        #[arg(long, value_delimiter = ',')]
        p_c: Vec<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        pi: Option<f64>,
    },
    /// Implementer decision for the scenario's published bound.
    Decide,
    /// Payoff tables and minimal insurance.
    Contract,
    /// Participation and false-positive / power conditions.
    Researcher,
    /// Expected utility of equal-share pools.
    Pool,
    /// Recomputes every anchor value; exits 0 only if all pass.
    Reproduce,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut scenario = Scenario::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let fig = scenario.figure.clone();
    let ctx = Ctx::new(scenario, &cli.out)?;
    match cli.command {
        Command::Coverage { procedure, n, alpha_prime } => commands::coverage(&ctx, procedure.into(), n, alpha_prime)?,
        Command::Example1 { alpha_prime, pi } => commands::example1(&ctx, alpha_prime, pi)?,
        Command::Example2 { n, pi, p_c, alpha_prime } => {
            let levels = if alpha_prime.is_empty() { fig.alpha_grid.clone() } else { alpha_prime };
            commands::example2(&ctx, n.unwrap_or(fig.n), pi.unwrap_or(fig.pi), p_c, &levels)?
        }
        Command::Fig1 { p_c, n, pi } => {
            let p_cs = if p_c.is_empty() { fig.p_c.clone() } else { p_c };
            commands::fig1(&ctx, &p_cs, n.unwrap_or(fig.n), pi.unwrap_or(fig.pi))?
        }
        Command::Decide => commands::decide(&ctx)?,
        Command::Contract => commands::contract(&ctx)?,
        Command::Researcher => commands::researcher(&ctx)?,
        Command::Pool => commands::pool(&ctx)?,
        Command::Reproduce => return reproduce::run(&ctx),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => match e.downcast_ref::<ConfigError>() {
            Some(c) => {
                eprintln!("config error: {c}");
                ExitCode::from(2)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
    }
}
