//! Thermostat setpoint optimization for a cooling-only cabin.
//!
//! The environment scores a requested setpoint with a reward assembled from
//! a handful of rules of thumb (keep the setpoint near 22 °C, never leave the
//! 20–24 °C band, and remember that a bigger indoor/outdoor gap and a more
//! humid day both cost the AC more). A DDPG agent built on a small
//! from-scratch dense network library learns to pick the setpoint from the
//! outdoor temperature and humidity, and the evaluation module compares it
//! against the fixed 22 °C thermostat and the closed-form optimum.
//!
//! Module map:
//!
//! * [`scenario`]: seeded synthetic weather and its CSV format.
//! * [`env`]: setpoint clamping, the reward, and the day-by-day environment.
//! * [`nn`]: dense networks, backpropagation, Adam, gradient checks, checkpoints.
//! * [`ddpg`]: replay buffer, Ornstein-Uhlenbeck noise, the agent and its training loop.
//! * [`eval`]: oracle setpoint, rollouts, area metric, improvement and fuel projection.
//! * [`cli`]: the `setpoint` command-line driver and its config file.

pub mod cli;
pub mod ddpg;
pub mod env;
mod error;
pub mod eval;
pub mod nn;
pub mod scenario;

pub use error::{Error, Result};
