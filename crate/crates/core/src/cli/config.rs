//! Run configuration and its plain-text file format.
//!
//! One `key = value` pair per line, keys prefixed by section
//! (`reward.c_power = 0.05`). `#` starts a comment. Unknown keys are errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::ddpg::AgentConfig;
use crate::env::{ComfortConfig, RewardWeights, StateNorm};
use crate::eval::FuelConfig;
use crate::scenario::ScenarioConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub comfort: ComfortConfig,
    pub reward: RewardWeights,
    pub agent: AgentConfig,
    pub fuel: FuelConfig,
    pub norm: StateNorm,
    /// Seeds both the weather generator and the agent.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub scenario_path: Option<PathBuf>,
    pub agent_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    /// Train on a freshly generated scenario every episode.
    pub resample_scenario: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let seed = 42;
        Self {
            scenario: ScenarioConfig::default(),
            comfort: ComfortConfig::default(),
            reward: RewardWeights::default(),
            agent: AgentConfig {
                seed,
                ..AgentConfig::default()
            },
            fuel: FuelConfig::default(),
            norm: StateNorm::default(),
            seed,
            out_dir: PathBuf::from("."),
            scenario_path: None,
            agent_path: None,
            report_path: None,
            resample_scenario: false,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for {key}")))
}

fn widths(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|w| num::<usize>(key, w.trim()))
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let s = &mut self.scenario;
        let a = &mut self.agent;
        match key.trim() {
            "seed" => {
                self.seed = num(key, v)?;
                a.seed = self.seed;
            }
            "out" | "paths.out" => self.out_dir = PathBuf::from(v),
            "paths.scenario" => self.scenario_path = Some(PathBuf::from(v)),
            "paths.agent" => self.agent_path = Some(PathBuf::from(v)),
            "paths.report" => self.report_path = Some(PathBuf::from(v)),

            "scenario.n_days" => s.n_days = num(key, v)?,
            "scenario.t_base" => s.t_base = num(key, v)?,
            "scenario.t_amp" => s.t_amp = num(key, v)?,
            "scenario.t_period" => s.t_period = num(key, v)?,
            "scenario.t_noise_sd" => s.t_noise_sd = num(key, v)?,
            "scenario.h_base" => s.h_base = num(key, v)?,
            "scenario.h_amp" => s.h_amp = num(key, v)?,
            "scenario.h_phase" => s.h_phase = num(key, v)?,
            "scenario.h_noise_sd" => s.h_noise_sd = num(key, v)?,
            "scenario.h_clamp_lo" => s.h_clamp.0 = num(key, v)?,
            "scenario.h_clamp_hi" => s.h_clamp.1 = num(key, v)?,
            "scenario.resample" => self.resample_scenario = num(key, v)?,

            "comfort.t_fixed" => self.comfort.t_fixed = num(key, v)?,
            "comfort.band_delta" => self.comfort.band_delta = num(key, v)?,
            "comfort.rh_in_target" => self.comfort.rh_in_target = num(key, v)?,

            "reward.c_power" => self.reward.c_power = num(key, v)?,
            "reward.c_humidity" => self.reward.c_humidity = num(key, v)?,
            "reward.c_comfort" => self.reward.c_comfort = num(key, v)?,
            "reward.p_fixed" => self.reward.p_fixed = num(key, v)?,
            "reward.p_per_deg" => self.reward.p_per_deg = num(key, v)?,

            "agent.actor_hidden" => a.actor_hidden = widths(key, v)?,
            "agent.critic_hidden" => a.critic_hidden = widths(key, v)?,
            "agent.lr_actor" => a.lr_actor = num(key, v)?,
            "agent.lr_critic" => a.lr_critic = num(key, v)?,
            "agent.gamma" => a.gamma = num(key, v)?,
            "agent.tau" => a.tau = num(key, v)?,
            "agent.buffer_capacity" => a.buffer_capacity = num(key, v)?,
            "agent.batch_size" => a.batch_size = num(key, v)?,
            "agent.episodes" => a.episodes = num(key, v)?,
            "agent.warmup_steps" => a.warmup_steps = num(key, v)?,
            "agent.ou_theta" => a.ou_theta = num(key, v)?,
            "agent.ou_mu" => a.ou_mu = num(key, v)?,
            "agent.ou_sigma" => a.ou_sigma = num(key, v)?,
            "agent.sigma_decay" => a.sigma_decay = num(key, v)?,

            "fuel.gallons_per_day" => self.fuel.gallons_per_day = num(key, v)?,
            "fuel.cost_per_day" => self.fuel.cost_per_day = num(key, v)?,
            "fuel.days_per_year" => self.fuel.days_per_year = num(key, v)?,

            "norm.t_lo" => self.norm.t_lo = num(key, v)?,
            "norm.t_hi" => self.norm.t_hi = num(key, v)?,

            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every setting in a config file's text.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {}: expected `key = value`", idx + 1))
            })?;
            self.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("config line {}: {m}", idx + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.comfort.validate()?;
        self.reward.validate()?;
        self.agent.validate()?;
        self.fuel.validate()?;
        self.norm.validate()
    }

    pub fn scenario_file(&self) -> PathBuf {
        self.scenario_path
            .clone()
            .unwrap_or_else(|| self.out_dir.join(super::SCENARIO_FILE))
    }

    pub fn agent_file(&self) -> PathBuf {
        self.agent_path
            .clone()
            .unwrap_or_else(|| self.out_dir.join(super::AGENT_FILE))
    }

    pub fn report_file(&self) -> PathBuf {
        self.report_path
            .clone()
            .unwrap_or_else(|| self.out_dir.join(super::REPORT_FILE))
    }
}
