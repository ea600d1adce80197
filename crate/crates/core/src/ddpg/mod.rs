//! Deep deterministic policy gradient agent for the setpoint problem.
//!
//! The actor maps the normalized `(t_out, rh_out)` pair to `u` in `[-1, 1]`
//! through a tanh output; the requested setpoint is
//! `t_fixed + band_delta * u`. The critic scores `(state, u)`. Both have
//! target copies that trail the online networks by soft updates.

mod checkpoint;
mod noise;
mod replay;
mod train;

pub use checkpoint::{load_agent, save_agent, AGENT_FORMAT_VERSION};
pub use noise::OuNoise;
pub use replay::{ReplayBuffer, Transition};
pub use train::{train, EpisodeLog, EpisodeSource, TrainingLog, TRAIN_LOG_HEADER};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{normalize_state, ComfortConfig, StateNorm};
use crate::nn::{adam_step, init_network, mlp_specs, Activation, AdamState, Network};
use crate::scenario::WeatherSample;
use crate::{Error, Result};

/// Input width of the actor.
pub const STATE_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub lr_actor: f64,
    pub lr_critic: f64,
    /// Discount. Zero by default: the weather does not react to the setpoint,
    /// so every day is an independent decision.
    pub gamma: f64,
    pub tau: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub episodes: u32,
    /// Environment steps with uniform random actions before learning starts.
    pub warmup_steps: usize,
    pub ou_theta: f64,
    pub ou_mu: f64,
    pub ou_sigma: f64,
    pub sigma_decay: f64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            actor_hidden: vec![64, 64],
            critic_hidden: vec![64, 64],
            lr_actor: 1e-3,
            lr_critic: 1e-3,
            gamma: 0.0,
            tau: 0.01,
            buffer_capacity: 10_000,
            batch_size: 64,
            episodes: 200,
            warmup_steps: 500,
            ou_theta: 0.15,
            ou_mu: 0.0,
            ou_sigma: 0.2,
            sigma_decay: 0.995,
            seed: 42,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("agent.gamma must be in [0, 1], got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("agent.tau must be in (0, 1], got {}", self.tau));
        }
        if self.buffer_capacity == 0 || self.batch_size == 0 {
            return bad("agent.buffer_capacity and agent.batch_size must be positive".into());
        }
        if self.batch_size > self.buffer_capacity {
            return bad(format!(
                "agent.batch_size {} exceeds agent.buffer_capacity {}",
                self.batch_size, self.buffer_capacity
            ));
        }
        for (name, v) in [("lr_actor", self.lr_actor), ("lr_critic", self.lr_critic)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("agent.{name} must be > 0, got {v}"));
            }
        }
        if !(self.ou_theta.is_finite() && self.ou_theta >= 0.0) {
            return bad(format!(
                "agent.ou_theta must be >= 0, got {}",
                self.ou_theta
            ));
        }
        if !(self.ou_sigma.is_finite() && self.ou_sigma >= 0.0) {
            return bad(format!(
                "agent.ou_sigma must be >= 0, got {}",
                self.ou_sigma
            ));
        }
        if !self.ou_mu.is_finite() {
            return bad("agent.ou_mu must be finite".into());
        }
        if !(self.sigma_decay.is_finite() && self.sigma_decay >= 0.0) {
            return bad(format!(
                "agent.sigma_decay must be >= 0, got {}",
                self.sigma_decay
            ));
        }
        if self.actor_hidden.contains(&0) || self.critic_hidden.contains(&0) {
            return bad("hidden layer widths must be positive".into());
        }
        Ok(())
    }
}

/// What [`Agent::act`] decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    /// Actor output before exploration noise.
    pub raw: f64,
    /// Action after noise and clamping to `[-1, 1]`; this is what gets stored.
    pub applied: f64,
    /// Requested setpoint, °C.
    pub t_req: f64,
}

/// Diagnostics from one [`Agent::train_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub critic_loss: f64,
    /// Mean critic value of the actor's actions, measured before the actor update.
    pub actor_objective: f64,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub actor: Network,
    pub critic: Network,
    pub actor_target: Network,
    pub critic_target: Network,
    pub actor_opt: AdamState,
    pub critic_opt: AdamState,
    pub noise: OuNoise,
    pub config: AgentConfig,
    pub comfort: ComfortConfig,
    pub norm: StateNorm,
}

impl Agent {
    pub fn new(config: AgentConfig, comfort: ComfortConfig, norm: StateNorm) -> Result<Self> {
        config.validate()?;
        comfort.validate()?;
        norm.validate()?;
        let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
        let actor = init_network(
            &mlp_specs(
                STATE_DIM,
                &config.actor_hidden,
                1,
                Activation::Relu,
                Activation::Tanh,
            ),
            seeds.random(),
        )?;
        let critic = init_network(
            &mlp_specs(
                STATE_DIM + 1,
                &config.critic_hidden,
                1,
                Activation::Relu,
                Activation::Identity,
            ),
            seeds.random(),
        )?;
        Ok(Self::from_networks(actor, critic, config, comfort, norm))
    }

    /// Wraps existing online networks; targets start as exact copies.
    pub fn from_networks(
        actor: Network,
        critic: Network,
        config: AgentConfig,
        comfort: ComfortConfig,
        norm: StateNorm,
    ) -> Self {
        let noise = OuNoise::new(
            config.ou_theta,
            config.ou_mu,
            config.ou_sigma,
            config.sigma_decay,
        );
        Self {
            actor_opt: AdamState::new(&actor, config.lr_actor),
            critic_opt: AdamState::new(&critic, config.lr_critic),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            noise,
            config,
            comfort,
            norm,
        }
    }

    /// Maps a normalized action to a requested setpoint.
    pub fn setpoint_for(&self, u: f64) -> f64 {
        self.comfort.t_fixed + self.comfort.band_delta * u
    }

    pub fn act<R: Rng + ?Sized>(
        &mut self,
        state: [f64; 2],
        explore: bool,
        rng: &mut R,
    ) -> Result<Action> {
        let raw = self.actor.predict(&state)?[0];
        let applied = if explore {
            (raw + self.noise.next(rng)).clamp(-1.0, 1.0)
        } else {
            raw
        };
        Ok(Action {
            raw,
            applied,
            t_req: self.setpoint_for(applied),
        })
    }

    /// Noise-free action for raw weather.
    pub fn greedy_setpoint(&self, sample: &WeatherSample) -> Result<f64> {
        let s = normalize_state(sample, &self.norm);
        Ok(self.setpoint_for(self.actor.predict(&s)?[0]))
    }

    /// One critic regression step, one actor ascent step, then soft target updates.
    pub fn train_step(&mut self, batch: &[Transition]) -> Result<StepStats> {
        if batch.len() != self.config.batch_size {
            return Err(Error::Domain(format!(
                "train_step got {} transitions, configured batch is {}",
                batch.len(),
                self.config.batch_size
            )));
        }
        let n = batch.len() as f64;

        // Critic: minimize mean (Q(s, a) - y)^2.
        let targets = critic_targets(
            batch,
            &self.actor_target,
            &self.critic_target,
            self.config.gamma,
        )?;
        let sa: Vec<Vec<f64>> = batch
            .iter()
            .map(|t| vec![t.state[0], t.state[1], t.action])
            .collect();
        let (q, cache) = self.critic.forward(&sa)?;
        let mut critic_loss = 0.0;
        let d_q: Vec<Vec<f64>> = q
            .iter()
            .zip(&targets)
            .map(|(qi, y)| {
                let err = qi[0] - y;
                critic_loss += err * err;
                vec![2.0 * err / n]
            })
            .collect();
        critic_loss /= n;
        let (critic_grads, _) = self.critic.backward(&cache, &d_q)?;
        adam_step(&mut self.critic, &critic_grads, &mut self.critic_opt)?;

        // Actor: ascend mean Q(s, mu(s)) by descending its negation.
        let states: Vec<Vec<f64>> = batch.iter().map(|t| t.state.to_vec()).collect();
        let (mu, actor_cache) = self.actor.forward(&states)?;
        let s_mu: Vec<Vec<f64>> = states
            .iter()
            .zip(&mu)
            .map(|(s, a)| vec![s[0], s[1], a[0]])
            .collect();
        let (q_mu, q_cache) = self.critic.forward(&s_mu)?;
        let actor_objective = q_mu.iter().map(|v| v[0]).sum::<f64>() / n;
        let (_, d_input) = self
            .critic
            .backward(&q_cache, &vec![vec![-1.0 / n]; batch.len()])?;
        let d_action: Vec<Vec<f64>> = d_input.iter().map(|d| vec![d[STATE_DIM]]).collect();
        let (actor_grads, _) = self.actor.backward(&actor_cache, &d_action)?;
        adam_step(&mut self.actor, &actor_grads, &mut self.actor_opt)?;

        soft_update(&mut self.critic_target, &self.critic, self.config.tau)?;
        soft_update(&mut self.actor_target, &self.actor, self.config.tau)?;

        Ok(StepStats {
            critic_loss,
            actor_objective,
        })
    }
}

/// Bootstrap regression targets `r + gamma * (1 - done) * Q'(s', mu'(s'))`.
/// The target networks are not evaluated when `gamma` is zero.
pub fn critic_targets(
    batch: &[Transition],
    actor_target: &Network,
    critic_target: &Network,
    gamma: f64,
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::Domain(
            "critic_targets needs a non-empty batch".into(),
        ));
    }
    if gamma == 0.0 {
        return Ok(batch.iter().map(|t| t.reward).collect());
    }
    let next: Vec<Vec<f64>> = batch.iter().map(|t| t.next_state.to_vec()).collect();
    let (mu_next, _) = actor_target.forward(&next)?;
    let sa_next: Vec<Vec<f64>> = next
        .iter()
        .zip(&mu_next)
        .map(|(s, a)| vec![s[0], s[1], a[0]])
        .collect();
    let (q_next, _) = critic_target.forward(&sa_next)?;
    Ok(batch
        .iter()
        .zip(&q_next)
        .map(|(t, q)| {
            let cont = if t.done { 0.0 } else { 1.0 };
            t.reward + gamma * cont * q[0]
        })
        .collect())
}

/// `target <- target + tau * (online - target)`, elementwise.
pub fn soft_update(target: &mut Network, online: &Network, tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Domain(format!(
            "soft update rate must be in (0, 1], got {tau}"
        )));
    }
    if !target.same_shape(online) {
        return Err(Error::Domain(
            "soft update between networks of different shapes".into(),
        ));
    }
    if tau == 1.0 {
        *target = online.clone();
        return Ok(());
    }
    for (t, &o) in target.params_mut().zip(online.params()) {
        *t += tau * (o - *t);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Layer, LayerSpec};

    fn small_config() -> AgentConfig {
        AgentConfig {
            actor_hidden: vec![16],
            critic_hidden: vec![16],
            batch_size: 4,
            buffer_capacity: 16,
            ..AgentConfig::default()
        }
    }

    fn agent() -> Agent {
        Agent::new(
            small_config(),
            ComfortConfig::default(),
            StateNorm::default(),
        )
        .unwrap()
    }

    fn zero_actor() -> Network {
        let specs = mlp_specs(2, &[4], 1, Activation::Relu, Activation::Tanh);
        let mut net = init_network(&specs, 0).unwrap();
        net.params_mut().for_each(|p| *p = 0.0);
        net
    }

    fn scalar_net(v: f64) -> Network {
        Network::from_layers(vec![Layer {
            in_dim: 1,
            out_dim: 1,
            activation: Activation::Identity,
            weights: vec![v],
            biases: vec![0.0],
        }])
        .unwrap()
    }

    #[test]
    fn zero_actor_requests_fixed_setpoint() {
        let a = agent();
        let ag = Agent::from_networks(
            zero_actor(),
            a.critic.clone(),
            small_config(),
            Default::default(),
            Default::default(),
        );
        let mut ag = ag;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let act = ag.act([0.3, -0.4], false, &mut rng).unwrap();
        assert_eq!(act.raw, 0.0);
        assert_eq!(act.t_req, 22.0);
        assert_eq!(ag.setpoint_for(1.0), 24.0);
        assert_eq!(ag.setpoint_for(-1.0), 20.0);
    }

    #[test]
    fn zero_sigma_exploration_equals_greedy() {
        let mut a = agent();
        a.noise = OuNoise::new(0.15, 0.0, 0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in [[0.1, 0.2], [-0.9, 0.5], [1.0, 1.0]] {
            let g = a.act(s, false, &mut rng).unwrap();
            let e = a.act(s, true, &mut rng).unwrap();
            assert_eq!(g.applied, e.applied);
        }
    }

    #[test]
    fn targets_start_as_copies() {
        let a = agent();
        assert_eq!(a.actor, a.actor_target);
        assert_eq!(a.critic, a.critic_target);
    }

    #[test]
    fn critic_target_arithmetic() {
        let t = |r: f64, done: bool| Transition {
            state: [0.0, 0.0],
            action: 0.0,
            reward: r,
            next_state: [0.5, -0.5],
            done,
        };
        let a = agent();
        let batch = [t(1.0, false), t(-3.0, true)];
        assert_eq!(
            critic_targets(&batch, &a.actor_target, &a.critic_target, 0.0).unwrap(),
            vec![1.0, -3.0]
        );
        let y = critic_targets(&batch, &a.actor_target, &a.critic_target, 0.9).unwrap();
        assert_eq!(y[1], -3.0);

        // Constant critic Q' = 10 via a zero-weight net with bias 10.
        let mut critic = a.critic_target.clone();
        critic.params_mut().for_each(|p| *p = 0.0);
        let last = critic.param_count() - 1;
        *critic.params_mut().nth(last).unwrap() = 10.0;
        let y = critic_targets(&[t(1.0, false)], &a.actor_target, &critic, 0.99).unwrap();
        assert!((y[0] - 10.9).abs() < 1e-12);
    }

    #[test]
    fn soft_update_cases() {
        let mut target = scalar_net(0.0);
        soft_update(&mut target, &scalar_net(1.0), 0.5).unwrap();
        assert_eq!(target.layers()[0].weights[0], 0.5);

        let mut target = scalar_net(-3.0);
        soft_update(&mut target, &scalar_net(7.25), 1.0).unwrap();
        assert_eq!(target, scalar_net(7.25));

        let mut target = scalar_net(0.0);
        soft_update(&mut target, &scalar_net(1.0), 1e-12).unwrap();
        assert!(target.layers()[0].weights[0].abs() < 1e-11);

        assert!(soft_update(&mut target, &scalar_net(1.0), 0.0).is_err());
        let wide = init_network(&[LayerSpec::new(2, 1, Activation::Identity)], 0).unwrap();
        assert!(matches!(
            soft_update(&mut target, &wide, 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn train_step_rejects_wrong_batch() {
        let mut a = agent();
        let t = Transition {
            state: [0.0, 0.0],
            action: 0.0,
            reward: -1.0,
            next_state: [0.0, 0.0],
            done: true,
        };
        assert!(matches!(a.train_step(&[t; 3]), Err(Error::Domain(_))));
        assert!(a.train_step(&[t; 4]).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut c = AgentConfig::default();
        c.gamma = 1.5;
        assert!(c.validate().is_err());
        let mut c = AgentConfig::default();
        c.tau = 0.0;
        assert!(c.validate().is_err());
        let mut c = AgentConfig::default();
        c.batch_size = c.buffer_capacity + 1;
        assert!(c.validate().is_err());
        assert!(AgentConfig::default().validate().is_ok());
    }
}
