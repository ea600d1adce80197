//! The rule-based thermostat environment.
//!
//! The reward encodes three rules of thumb for a cooling-only cabin:
//!
//! * the AC works harder the further the room sits below the outdoor
//!   temperature (quadratic in the gap, zero when it is cooler outside),
//! * humid days make that work more expensive (the gap term is scaled by
//!   `1 + c_humidity * rh_out`),
//! * occupants prefer the usual fixed setpoint (quadratic anchor), and the
//!   setpoint must stay in `[t_fixed - band_delta, t_fixed + band_delta]`.
//!
//! Requests outside the band are clamped before they reach the plant, and the
//! pre-clamp overshoot is charged a fixed penalty plus a per-degree penalty.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::scenario::WeatherSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortConfig {
    /// Conventional fixed setpoint, °C.
    pub t_fixed: f64,
    /// Half-width of the allowed setpoint band, °C.
    pub band_delta: f64,
    /// Indoor relative humidity target. Held constant; not part of the reward.
    pub rh_in_target: f64,
}

impl Default for ComfortConfig {
    fn default() -> Self {
        Self {
            t_fixed: 22.0,
            band_delta: 2.0,
            rh_in_target: 0.30,
        }
    }
}

impl ComfortConfig {
    pub fn band_low(&self) -> f64 {
        self.t_fixed - self.band_delta
    }

    pub fn band_high(&self) -> f64 {
        self.t_fixed + self.band_delta
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_fixed.is_finite() {
            return Err(Error::Config("comfort.t_fixed must be finite".into()));
        }
        if !(self.band_delta.is_finite() && self.band_delta > 0.0) {
            return Err(Error::Config(format!(
                "comfort.band_delta must be > 0, got {}",
                self.band_delta
            )));
        }
        if !(0.0..=1.0).contains(&self.rh_in_target) {
            return Err(Error::Config(format!(
                "comfort.rh_in_target must be in [0, 1], got {}",
                self.rh_in_target
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    /// Scale of the squared outdoor/indoor gap.
    pub c_power: f64,
    /// Extra effort per unit outdoor relative humidity.
    pub c_humidity: f64,
    /// Scale of the squared distance from the fixed setpoint.
    pub c_comfort: f64,
    /// Flat penalty for any out-of-band request.
    pub p_fixed: f64,
    /// Additional penalty per degree outside the band.
    pub p_per_deg: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            c_power: 0.05,
            c_humidity: 1.0,
            c_comfort: 1.0,
            p_fixed: 10.0,
            p_per_deg: 10.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_power", self.c_power),
            ("c_humidity", self.c_humidity),
            ("c_comfort", self.c_comfort),
            ("p_fixed", self.p_fixed),
            ("p_per_deg", self.p_per_deg),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "reward.{name} must be >= 0, got {v}"
                )));
            }
        }
        if self.c_comfort <= 0.0 {
            return Err(Error::Config("reward.c_comfort must be > 0".into()));
        }
        Ok(())
    }

    /// Effective gap coefficient `c_power * (1 + c_humidity * rh_out)`.
    pub fn effort_coeff(&self, rh_out: f64) -> f64 {
        self.c_power * (1.0 + self.c_humidity * rh_out)
    }
}

/// A reward split into its cost terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub total: f64,
    pub effort_cost: f64,
    pub comfort_cost: f64,
    pub violation_cost: f64,
    pub t_applied: f64,
    pub violation_deg: f64,
}

/// Clamps a requested setpoint into the band and reports how far outside it
/// the request was.
pub fn clamp_setpoint(t_req: f64, comfort: &ComfortConfig) -> Result<(f64, f64)> {
    if !t_req.is_finite() {
        return Err(Error::Domain(format!(
            "setpoint request {t_req} is not finite"
        )));
    }
    let (lo, hi) = (comfort.band_low(), comfort.band_high());
    let applied = t_req.max(lo).min(hi);
    let violation = (lo - t_req).max(t_req - hi).max(0.0);
    Ok((applied, violation))
}

pub fn reward(
    sample: &WeatherSample,
    t_req: f64,
    weights: &RewardWeights,
    comfort: &ComfortConfig,
) -> Result<RewardBreakdown> {
    let (t_applied, violation_deg) = clamp_setpoint(t_req, comfort)?;
    let gap = (sample.t_out - t_applied).max(0.0);
    let effort_cost = weights.effort_coeff(sample.rh_out) * gap * gap;
    let comfort_cost = weights.c_comfort * (t_applied - comfort.t_fixed).powi(2);
    let violation_cost = if violation_deg > 0.0 {
        weights.p_fixed + weights.p_per_deg * violation_deg
    } else {
        0.0
    };
    Ok(RewardBreakdown {
        total: -(effort_cost + comfort_cost + violation_cost),
        effort_cost,
        comfort_cost,
        violation_cost,
        t_applied,
        violation_deg,
    })
}

/// Affine map from outdoor conditions to network inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateNorm {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Default for StateNorm {
    fn default() -> Self {
        Self {
            t_lo: 15.0,
            t_hi: 45.0,
        }
    }
}

impl StateNorm {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_lo.is_finite() && self.t_hi.is_finite() && self.t_lo < self.t_hi) {
            return Err(Error::Config(format!(
                "norm.t_lo must be < norm.t_hi, got [{}, {}]",
                self.t_lo, self.t_hi
            )));
        }
        Ok(())
    }
}

/// Maps `(t_out, rh_out)` into `[-1, 1]^2`. Temperatures outside
/// `[t_lo, t_hi]` are clamped and logged.
pub fn normalize_state(sample: &WeatherSample, norm: &StateNorm) -> [f64; 2] {
    let t = if sample.t_out < norm.t_lo || sample.t_out > norm.t_hi {
        warn!(
            "day {}: t_out {} outside normalization range [{}, {}], clamping",
            sample.day, sample.t_out, norm.t_lo, norm.t_hi
        );
        sample.t_out.clamp(norm.t_lo, norm.t_hi)
    } else {
        sample.t_out
    };
    let rh = sample.rh_out.clamp(0.0, 1.0);
    [
        2.0 * (t - norm.t_lo) / (norm.t_hi - norm.t_lo) - 1.0,
        2.0 * rh - 1.0,
    ]
}

/// Result of a single [`EnvState::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: RewardBreakdown,
    /// The next day's weather, or `None` once the series is exhausted.
    pub next: Option<WeatherSample>,
}

impl StepOutcome {
    pub fn is_terminal(&self) -> bool {
        self.next.is_none()
    }
}

/// An episode over a fixed weather series. The weather never depends on the
/// chosen setpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    series: Vec<WeatherSample>,
    cursor: usize,
    pub comfort: ComfortConfig,
    pub weights: RewardWeights,
}

impl EnvState {
    pub fn reset(
        series: Vec<WeatherSample>,
        comfort: ComfortConfig,
        weights: RewardWeights,
    ) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::Config(
                "environment needs a non-empty weather series".into(),
            ));
        }
        Ok(Self {
            series,
            cursor: 0,
            comfort,
            weights,
        })
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn series(&self) -> &[WeatherSample] {
        &self.series
    }

    pub fn is_done(&self) -> bool {
        self.cursor >= self.series.len()
    }

    /// The sample the next action will be scored on.
    pub fn observe(&self) -> Option<&WeatherSample> {
        self.series.get(self.cursor)
    }

    pub fn step(&mut self, t_req: f64) -> Result<StepOutcome> {
        let sample = *self.observe().ok_or_else(|| {
            Error::State(format!(
                "step called on a finished episode ({} days)",
                self.series.len()
            ))
        })?;
        let reward = reward(&sample, t_req, &self.weights, &self.comfort)?;
        self.cursor += 1;
        Ok(StepOutcome {
            reward,
            next: self.observe().copied(),
        })
    }
}
