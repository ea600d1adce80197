use std::fmt::Write as _;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Agent, AgentConfig, ReplayBuffer, Transition};
use crate::env::{normalize_state, ComfortConfig, EnvState, RewardWeights, StateNorm};
use crate::scenario::{generate_scenario, ScenarioConfig, WeatherSample};
use crate::{Error, Result};

pub const TRAIN_LOG_HEADER: &str = "episode,mean_reward,sigma";

/// Where each training episode's weather comes from.
#[derive(Debug, Clone, Copy)]
pub enum EpisodeSource<'a> {
    /// Replay the same series every episode.
    Fixed(&'a [WeatherSample]),
    /// Generate a fresh series per episode with seed `seed + episode`.
    Generated {
        config: &'a ScenarioConfig,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeLog {
    pub episode: u32,
    pub mean_reward: f64,
    /// Exploration scale in effect during the episode.
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeLog>,
}

impl TrainingLog {
    pub fn mean_rewards(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.mean_reward).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAIN_LOG_HEADER);
        out.push('\n');
        for e in &self.episodes {
            let _ = writeln!(out, "{},{:.6},{:.6}", e.episode, e.mean_reward, e.sigma);
        }
        out
    }
}

/// Trains a fresh agent. Warmup steps use uniform random actions across the
/// band; afterwards actions come from the actor plus OU noise, and one
/// gradient step follows every environment step. Noise restarts at its mean
/// each episode and its scale decays after each episode.
///
/// Everything random flows from `config.seed`, so the result is a pure
/// function of the inputs.
pub fn train(
    source: EpisodeSource<'_>,
    comfort: ComfortConfig,
    weights: RewardWeights,
    norm: StateNorm,
    config: AgentConfig,
) -> Result<(Agent, TrainingLog)> {
    weights.validate()?;
    if let EpisodeSource::Fixed(series) = source {
        if series.is_empty() {
            return Err(Error::Config("training needs a non-empty scenario".into()));
        }
    }
    let mut agent = Agent::new(config.clone(), comfort, norm)?;
    let mut buffer = ReplayBuffer::new(config.buffer_capacity)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let mut log = TrainingLog::default();
    let mut steps = 0usize;
    for episode in 0..config.episodes {
        let series = match source {
            EpisodeSource::Fixed(s) => s.to_vec(),
            EpisodeSource::Generated { config: sc, seed } => {
                generate_scenario(sc, seed.wrapping_add(u64::from(episode)))?
            }
        };
        let mut env = EnvState::reset(series, comfort, weights)?;
        agent.noise.reset();
        let sigma = agent.noise.sigma;

        let mut total = 0.0;
        let mut days = 0usize;
        while let Some(sample) = env.observe().copied() {
            let state = normalize_state(&sample, &norm);
            let action = if steps < config.warmup_steps {
                rng.random_range(-1.0..=1.0)
            } else {
                agent.act(state, true, &mut rng)?.applied
            };
            let outcome = env.step(agent.setpoint_for(action))?;
            let next_state = outcome.next.map_or(state, |s| normalize_state(&s, &norm));
            buffer.push(Transition {
                state,
                action,
                reward: outcome.reward.total,
                next_state,
                done: outcome.is_terminal(),
            });
            steps += 1;
            total += outcome.reward.total;
            days += 1;

            if steps > config.warmup_steps && buffer.len() >= config.batch_size {
                let batch = buffer.sample(config.batch_size, &mut rng)?;
                agent.train_step(&batch)?;
            }
        }
        let mean_reward = total / days as f64;
        debug!("episode {episode}: mean reward {mean_reward:.4}, sigma {sigma:.4}");
        log.episodes.push(EpisodeLog {
            episode,
            mean_reward,
            sigma,
        });
        agent.noise.decay();
    }
    Ok((agent, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> Vec<WeatherSample> {
        (0..10)
            .map(|d| WeatherSample::new(d, 30.0 + d as f64 * 0.5, 0.6))
            .collect()
    }

    fn quick() -> AgentConfig {
        AgentConfig {
            actor_hidden: vec![8],
            critic_hidden: vec![8],
            batch_size: 8,
            buffer_capacity: 64,
            episodes: 6,
            warmup_steps: 20,
            ..AgentConfig::default()
        }
    }

    #[test]
    fn zero_episodes_returns_untrained_agent() {
        let cfg = AgentConfig {
            episodes: 0,
            ..quick()
        };
        let s = series();
        let (agent, log) = train(
            EpisodeSource::Fixed(&s),
            Default::default(),
            Default::default(),
            Default::default(),
            cfg.clone(),
        )
        .unwrap();
        assert!(log.episodes.is_empty());
        let fresh = Agent::new(cfg, Default::default(), Default::default()).unwrap();
        assert_eq!(agent.actor, fresh.actor);
        assert_eq!(agent.critic, fresh.critic);
    }

    #[test]
    fn log_tracks_sigma_decay() {
        let s = series();
        let (_, log) = train(
            EpisodeSource::Fixed(&s),
            Default::default(),
            Default::default(),
            Default::default(),
            quick(),
        )
        .unwrap();
        assert_eq!(log.episodes.len(), 6);
        for (k, e) in log.episodes.iter().enumerate() {
            assert_eq!(e.episode as usize, k);
            assert!((e.sigma - 0.2 * 0.995f64.powi(k as i32)).abs() < 1e-12);
            assert!(e.mean_reward <= 0.0);
        }
        assert!(log.to_csv().starts_with("episode,mean_reward,sigma\n0,"));
    }

    #[test]
    fn generated_source_and_empty_series() {
        let sc = ScenarioConfig {
            n_days: 5,
            ..ScenarioConfig::default()
        };
        let src = EpisodeSource::Generated {
            config: &sc,
            seed: 9,
        };
        let (_, log) = train(
            src,
            Default::default(),
            Default::default(),
            Default::default(),
            quick(),
        )
        .unwrap();
        assert_eq!(log.episodes.len(), 6);

        let err = train(
            EpisodeSource::Fixed(&[]),
            Default::default(),
            Default::default(),
            Default::default(),
            quick(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn invalid_config_rejected() {
        let s = series();
        let cfg = AgentConfig {
            tau: 2.0,
            ..quick()
        };
        assert!(matches!(
            train(
                EpisodeSource::Fixed(&s),
                Default::default(),
                Default::default(),
                Default::default(),
                cfg
            ),
            Err(Error::Config(_))
        ));
    }
}
