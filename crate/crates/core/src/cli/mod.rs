//! The `setpoint` command line.
//!
//! Settings resolve in three layers: built-in defaults, then the `--config`
//! file, then command-line flags (`--set key=value` reaches any config key).
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod config;

pub use config::RunConfig;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use log::info;

use crate::ddpg::{load_agent, save_agent, train, EpisodeSource};
use crate::eval::{compare, display_pct, fuel_report, load_report, oracle_setpoint};
use crate::scenario::{generate_scenario, load_scenario, save_scenario, WeatherSample};
use crate::{Error, Result};

pub const SCENARIO_FILE: &str = "scenario.csv";
pub const AGENT_FILE: &str = "agent.json";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const EVAL_FILE: &str = "eval.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Parser)]
#[command(
    name = "setpoint",
    version,
    about = "Learn and evaluate thermostat setpoints from outdoor weather"
)]
struct Cli {
    /// Plain-text `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for weather generation and agent training.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for every file a command writes.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override any config key, e.g. `--set reward.c_power=0.08`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Generate a synthetic weather scenario and write scenario.csv.
    GenScenario {
        /// Number of simulated days.
        #[arg(long)]
        days: Option<u32>,
    },
    /// Train a DDPG agent; writes agent.json and train_log.csv.
    Train {
        /// Scenario CSV to train on (default: <out>/scenario.csv).
        #[arg(long, value_name = "PATH")]
        scenario: Option<PathBuf>,
        /// Override the number of training episodes.
        #[arg(long)]
        episodes: Option<u32>,
    },
    /// Compare fixed and agent setpoints; writes eval.csv and report.json.
    Eval {
        /// Scenario CSV to evaluate on (default: <out>/scenario.csv).
        #[arg(long, value_name = "PATH")]
        scenario: Option<PathBuf>,
        /// Agent checkpoint (default: <out>/agent.json).
        #[arg(long, value_name = "PATH")]
        agent: Option<PathBuf>,
    },
    /// Print the reward-optimal setpoint for one day's weather.
    Oracle {
        /// Outdoor temperature, °C.
        #[arg(long, allow_negative_numbers = true)]
        t_out: f64,
        /// Outdoor relative humidity, fraction in [0, 1].
        #[arg(long)]
        rh_out: f64,
    },
    /// Recompute the fuel-savings projection from a report JSON.
    Report {
        /// Report to read (default: <out>/report.json).
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
}

/// A parsed subcommand with its subcommand-specific inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    GenScenario,
    Train,
    Eval,
    Oracle { t_out: f64, rh_out: f64 },
    Report,
}

/// Why argument parsing stopped.
#[derive(Debug)]
pub enum ParseOutcome {
    /// `--help` or `--version`: print and exit 0.
    Info(String),
    /// Unknown flag, missing value and the like: exit 2.
    Usage(String),
    /// Well-formed arguments with an invalid configuration: exit 2.
    Config(Error),
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<(Command, RunConfig), ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ParseOutcome::Info(e.to_string()),
        _ => ParseOutcome::Usage(e.render().to_string()),
    })?;
    build_config(cli).map_err(ParseOutcome::Config)
}

fn build_config(cli: Cli) -> Result<(Command, RunConfig)> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path).map_err(|e| match e {
            Error::Io { path, source } => {
                Error::Config(format!("cannot read config {}: {source}", path.display()))
            }
            other => other,
        })?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.agent.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    let command = match cli.command {
        CommandArgs::GenScenario { days } => {
            if let Some(d) = days {
                cfg.scenario.n_days = d;
            }
            Command::GenScenario
        }
        CommandArgs::Train { scenario, episodes } => {
            if scenario.is_some() {
                cfg.scenario_path = scenario;
            }
            if let Some(e) = episodes {
                cfg.agent.episodes = e;
            }
            Command::Train
        }
        CommandArgs::Eval { scenario, agent } => {
            if scenario.is_some() {
                cfg.scenario_path = scenario;
            }
            if agent.is_some() {
                cfg.agent_path = agent;
            }
            Command::Eval
        }
        CommandArgs::Oracle { t_out, rh_out } => {
            WeatherSample::new(0, t_out, rh_out)
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
            Command::Oracle { t_out, rh_out }
        }
        CommandArgs::Report { report } => {
            if report.is_some() {
                cfg.report_path = report;
            }
            Command::Report
        }
    };
    cfg.validate()?;
    Ok((command, cfg))
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))
}

fn require(path: &std::path::Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::State(format!(
            "{what} not found: {}",
            path.display()
        )))
    }
}

fn write_text(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Executes a parsed command, writing human-readable output to `out`.
pub fn run_command(command: &Command, cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let say = |out: &mut dyn Write, line: String| {
        let _ = writeln!(out, "{line}");
    };
    match command {
        Command::GenScenario => {
            ensure_out_dir(cfg)?;
            let series = generate_scenario(&cfg.scenario, cfg.seed)?;
            let path = cfg.out_dir.join(SCENARIO_FILE);
            save_scenario(&series, &path)?;
            say(
                out,
                format!("wrote {} days to {}", series.len(), path.display()),
            );
        }
        Command::Train => {
            let started = Instant::now();
            let series = if cfg.resample_scenario {
                Vec::new()
            } else {
                let path = cfg.scenario_file();
                require(&path, "scenario")?;
                load_scenario(&path)?
            };
            let source = if cfg.resample_scenario {
                EpisodeSource::Generated {
                    config: &cfg.scenario,
                    seed: cfg.seed,
                }
            } else {
                EpisodeSource::Fixed(&series)
            };
            let (agent, log) = train(source, cfg.comfort, cfg.reward, cfg.norm, cfg.agent.clone())?;
            ensure_out_dir(cfg)?;
            save_agent(&agent, cfg.out_dir.join(AGENT_FILE))?;
            write_text(cfg.out_dir.join(TRAIN_LOG_FILE), &log.to_csv())?;
            info!("training took {:.1?}", started.elapsed());
            if let Some(last) = log.episodes.last() {
                say(
                    out,
                    format!(
                        "trained {} episodes, final mean reward {:.4}",
                        log.episodes.len(),
                        last.mean_reward
                    ),
                );
            } else {
                say(out, "trained 0 episodes".into());
            }
            say(
                out,
                format!("wrote {}", cfg.out_dir.join(AGENT_FILE).display()),
            );
        }
        Command::Eval => {
            let scenario = cfg.scenario_file();
            require(&scenario, "scenario")?;
            let agent_path = cfg.agent_file();
            require(&agent_path, "checkpoint")?;
            let series = load_scenario(&scenario)?;
            let agent = load_agent(&agent_path)?;
            let report = compare(&agent, &series, &cfg.comfort, &cfg.reward, &cfg.fuel)?;
            ensure_out_dir(cfg)?;
            report.write_files(cfg.out_dir.join(EVAL_FILE), cfg.out_dir.join(REPORT_FILE))?;
            say(out, format!("area_fixed: {:.1}", report.area_fixed));
            say(out, format!("area_agent: {:.1}", report.area_agent));
            say(
                out,
                format!("improvement_pct: {}", display_pct(report.improvement_pct)),
            );
            say(
                out,
                format!("policy_oracle_mae: {:.3}", report.policy_oracle_mae),
            );
        }
        Command::Oracle { t_out, rh_out } => {
            let t = oracle_setpoint(
                &WeatherSample::new(0, *t_out, *rh_out),
                &cfg.reward,
                &cfg.comfort,
            );
            say(out, format!("{t:.2}"));
        }
        Command::Report => {
            let path = cfg.report_file();
            require(&path, "report")?;
            let summary = load_report(&path)?;
            let fuel = fuel_report(summary.improvement_pct, &cfg.fuel);
            say(
                out,
                format!("improvement_pct: {}", display_pct(summary.improvement_pct)),
            );
            say(
                out,
                format!("fuel_gallons_daily: {:.0}", fuel.gallons_daily),
            );
            say(out, format!("fuel_daily: {:.2}", fuel.daily));
            say(out, format!("fuel_annual: {:.2}", fuel.annual));
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

/// Full entry point: parse, run, report errors as single `error:` lines.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (command, cfg) = match parse_args(argv) {
        Ok(parsed) => parsed,
        Err(ParseOutcome::Info(text)) => {
            let _ = write!(stdout, "{text}");
            return 0;
        }
        Err(ParseOutcome::Usage(text)) => {
            let _ = write!(stderr, "{text}");
            return 2;
        }
        Err(ParseOutcome::Config(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    match run_command(&command, &cfg, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", flatten(&e));
            exit_code(&e)
        }
    }
}

fn flatten(e: &Error) -> String {
    match e {
        Error::State(m) => m.clone(),
        other => other.to_string().replace('\n', " "),
    }
}
