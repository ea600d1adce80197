//! Agent checkpoint: one JSON document holding the config and all four
//! networks in the network checkpoint schema.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Agent, AgentConfig};
use crate::env::{ComfortConfig, StateNorm};
use crate::nn::Network;
use crate::{Error, Result};

pub const AGENT_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct AgentRecord {
    format_version: u32,
    config: AgentConfig,
    comfort: ComfortConfig,
    norm: StateNorm,
    actor: Network,
    critic: Network,
    actor_target: Network,
    critic_target: Network,
}

impl Agent {
    /// Optimizer moments and noise state are not persisted; a loaded agent
    /// is meant for evaluation.
    pub fn to_json(&self) -> Result<String> {
        for net in [
            &self.actor,
            &self.critic,
            &self.actor_target,
            &self.critic_target,
        ] {
            if net.params().any(|p| !p.is_finite()) {
                return Err(Error::Domain(
                    "cannot checkpoint an agent with non-finite parameters".into(),
                ));
            }
        }
        let rec = AgentRecord {
            format_version: AGENT_FORMAT_VERSION,
            config: self.config.clone(),
            comfort: self.comfort,
            norm: self.norm,
            actor: self.actor.clone(),
            critic: self.critic.clone(),
            actor_target: self.actor_target.clone(),
            critic_target: self.critic_target.clone(),
        };
        serde_json::to_string(&rec).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
        {
            Some(v) if v == u64::from(AGENT_FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::Parse(format!(
                    "unsupported agent format_version {v} (expected {AGENT_FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::Parse("agent checkpoint lacks format_version".into())),
        }
        let rec: AgentRecord =
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        if !rec.actor.same_shape(&rec.actor_target) || !rec.critic.same_shape(&rec.critic_target) {
            return Err(Error::Parse(
                "target networks do not match their online networks".into(),
            ));
        }
        if rec.actor.in_dim() != super::STATE_DIM
            || rec.actor.out_dim() != 1
            || rec.critic.in_dim() != super::STATE_DIM + 1
            || rec.critic.out_dim() != 1
        {
            return Err(Error::Parse("actor must be 2->1 and critic 3->1".into()));
        }
        rec.config
            .validate()
            .map_err(|e| Error::Parse(e.to_string()))?;
        let mut agent =
            Agent::from_networks(rec.actor, rec.critic, rec.config, rec.comfort, rec.norm);
        agent.actor_target = rec.actor_target;
        agent.critic_target = rec.critic_target;
        Ok(agent)
    }
}

pub fn save_agent(agent: &Agent, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, agent.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_agent(path: impl AsRef<Path>) -> Result<Agent> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Agent::from_json(&text)
}
