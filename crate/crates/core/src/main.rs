use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hcn_comp::harness::{
    checks_csv, coverage_csv, loadbalance_csv, parse_grid, parse_list, scheduling_csv,
    validate_checks, CoverageJob, LoadBalanceJob, McSettings, ScenarioSource, SchedulingJob,
    ValidateJob, TABLE1_NU_RANGE,
};
use hcn_comp::scenario::Preset;
use hcn_comp::Error;

/// Coverage and design metrics for non-coherent joint transmission in
/// multi-tier cellular networks.
///
/// Grids are written `start:step:stop` and include both ends when the step
/// divides the range. Set HCN_COMP_THREADS to cap the worker count.
#[derive(Parser)]
#[command(name = "hcn-comp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Built-in scenario: `table1` or `twotier-fig3`.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for the simulator.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Coverage bounds, linear approximation and simulated coverage over β.
    Coverage {
        #[command(flatten)]
        common: Common,
        /// SIR thresholds in dB.
        #[arg(long, default_value = "-10:2:20", allow_hyphen_values = true)]
        beta_db: String,
        /// Comma-separated 1-based tiers to keep, e.g. `1,2`.
        #[arg(long)]
        tiers: Option<String>,
    },
    /// Mean rate and load increase while sweeping one tier's thresholds.
    Loadbalance {
        #[command(flatten)]
        common: Common,
        /// 1-based tier to sweep.
        #[arg(long, default_value_t = 2)]
        tier: usize,
        /// Cluster threshold relative to the scenario's, dB.
        #[arg(long, default_value = "-10:2:10", allow_hyphen_values = true)]
        delta_rel_db: String,
        /// Activation thresholds relative to the scenario's, dB.
        #[arg(long, default_value = "-3,0,3", allow_hyphen_values = true)]
        t_rel_db: String,
    },
    /// Rate distributions with the tier's silent cluster members muted or reusing.
    Scheduling {
        #[command(flatten)]
        common: Common,
        /// 1-based tier switched between muting and reuse.
        #[arg(long, default_value_t = 2)]
        tier: usize,
        /// Activation thresholds relative to the tier's cluster threshold, dB.
        #[arg(long, default_value = "-3,3,6", allow_hyphen_values = true)]
        t_rel_db: String,
        /// Rate grid in bit/s/Hz.
        #[arg(long, default_value = "0:0.25:10")]
        tau: String,
    },
    /// Analytic-versus-simulation agreement checks; exits 1 if any fails.
    Validate {
        #[command(flatten)]
        common: Common,
        /// SIR thresholds in dB.
        #[arg(long, default_value = "-10:2:20", allow_hyphen_values = true)]
        beta_db: String,
    },
}

enum Failure {
    Config(Error),
    Runtime(Error),
    ChecksFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::Scenario(_)
            | Error::Json(_)
            | Error::WindowTooSmall { .. } => Failure::Config(e),
            other => Failure::Runtime(other),
        }
    }
}

impl Common {
    fn source(&self) -> Result<ScenarioSource, Failure> {
        match (&self.preset, &self.config) {
            (Some(p), None) => Ok(ScenarioSource::Preset(p.parse::<Preset>()?)),
            (None, Some(path)) => Ok(ScenarioSource::File(path.clone())),
            _ => Err(Failure::Config(Error::Scenario(
                "give exactly one of --preset or --config".into(),
            ))),
        }
    }

    fn mc(&self) -> McSettings {
        McSettings {
            trials: self.trials,
            seed: self.seed,
            workers: None,
        }
    }

    fn emit(&self, csv: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => std::fs::write(path, csv).map_err(|e| Failure::Runtime(e.into())),
            None => {
                print!("{csv}");
                Ok(())
            }
        }
    }
}

fn parse_tiers(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|p| {
            p.trim().parse::<usize>().map_err(|_| {
                Failure::Config(Error::Scenario(format!("`{p}` in --tiers is not a tier number")))
            })
        })
        .collect()
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var("HCN_COMP_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Failure::Config(Error::Scenario(format!(
            "HCN_COMP_THREADS must be a positive integer, got `{text}`"
        )))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(Error::Scenario(e.to_string())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Coverage {
            common,
            beta_db,
            tiers,
        } => {
            let tiers = tiers.map(|t| parse_tiers(&t)).transpose()?;
            let job = CoverageJob {
                config: common.source()?.config()?,
                beta_db: parse_grid(&beta_db)?,
                tiers,
                mc: common.mc(),
            };
            common.emit(&coverage_csv(&job)?)
        }
        Command::Loadbalance {
            common,
            tier,
            delta_rel_db,
            t_rel_db,
        } => {
            let job = LoadBalanceJob {
                config: common.source()?.config()?,
                tier,
                delta_rel_db: parse_grid(&delta_rel_db)?,
                t_rel_db: parse_list(&t_rel_db)?,
            };
            common.emit(&loadbalance_csv(&job)?)
        }
        Command::Scheduling {
            common,
            tier,
            t_rel_db,
            tau,
        } => {
            let job = SchedulingJob {
                config: common.source()?.config()?,
                tier,
                t_rel_db: parse_list(&t_rel_db)?,
                taus: parse_grid(&tau)?,
            };
            common.emit(&scheduling_csv(&job)?)
        }
        Command::Validate { common, beta_db } => {
            let source = common.source()?;
            let job = ValidateJob {
                config: source.config()?,
                beta_db: parse_grid(&beta_db)?,
                mc: common.mc(),
                nu_anchor: (source == ScenarioSource::Preset(Preset::Table1))
                    .then_some(TABLE1_NU_RANGE),
            };
            let checks = validate_checks(&job)?;
            common.emit(&checks_csv(&checks))?;
            for c in checks.iter().filter(|c| !c.pass) {
                log::warn!("check {} failed: analytic {} mc {}", c.name, c.analytic, c.mc);
            }
            if checks.iter().all(|c| c.pass) {
                Ok(())
            } else {
                Err(Failure::ChecksFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ChecksFailed) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("hcn-comp: configuration error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("hcn-comp: {e}");
            ExitCode::from(1)
        }
    }
}
