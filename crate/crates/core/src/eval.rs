//! Fixed-versus-agent evaluation.
//!
//! A policy is rolled out greedily over a weather series next to the fixed
//! thermostat and the closed-form optimum. Each policy is summarized by the
//! area between the outdoor temperature curve and its setpoint curve (the
//! relative AC-power proxy); the improvement is the relative reduction of
//! that area, and the fuel projection scales a daily fuel bill by it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ddpg::Agent;
use crate::env::{clamp_setpoint, reward, ComfortConfig, RewardBreakdown, RewardWeights};
use crate::scenario::WeatherSample;
use crate::{Error, Result};

pub const PLOT_HEADER: &str =
    "day,t_out_c,rh_out,t_fixed_c,t_agent_c,t_oracle_c,reward_fixed,reward_agent";

/// Anything that picks a setpoint from the day's weather.
pub trait Policy {
    fn setpoint(&self, sample: &WeatherSample) -> Result<f64>;
}

impl Policy for Agent {
    fn setpoint(&self, sample: &WeatherSample) -> Result<f64> {
        self.greedy_setpoint(sample)
    }
}

impl<F: Fn(&WeatherSample) -> f64> Policy for F {
    fn setpoint(&self, sample: &WeatherSample) -> Result<f64> {
        Ok(self(sample))
    }
}

/// The conventional thermostat: same setpoint every day.
#[derive(Debug, Clone, Copy)]
pub struct FixedSetpoint(pub f64);

impl Policy for FixedSetpoint {
    fn setpoint(&self, _: &WeatherSample) -> Result<f64> {
        Ok(self.0)
    }
}

/// The reward-maximizing setpoint, used as a reference policy.
#[derive(Debug, Clone, Copy)]
pub struct OraclePolicy {
    pub weights: RewardWeights,
    pub comfort: ComfortConfig,
}

impl Policy for OraclePolicy {
    fn setpoint(&self, sample: &WeatherSample) -> Result<f64> {
        Ok(oracle_setpoint(sample, &self.weights, &self.comfort))
    }
}

/// Closed-form maximizer of the reward over the band.
///
/// On a day warmer than `t_fixed` the in-band reward is
/// `-(a (t_out - t)^2 + c (t - t_fixed)^2)` with `a = c_power (1 + c_humidity rh)`
/// and `c = c_comfort`, maximized at `(a t_out + c t_fixed) / (a + c)`, which
/// lies between `t_fixed` and `t_out`. On cooler days the effort term vanishes
/// and the comfort anchor alone puts the optimum at `t_fixed`.
pub fn oracle_setpoint(
    sample: &WeatherSample,
    weights: &RewardWeights,
    comfort: &ComfortConfig,
) -> f64 {
    if sample.t_out < comfort.t_fixed {
        return comfort.t_fixed;
    }
    let a = weights.effort_coeff(sample.rh_out);
    let c = weights.c_comfort;
    let t = (a * sample.t_out + c * comfort.t_fixed) / (a + c);
    t.clamp(comfort.band_low(), comfort.band_high())
}

/// Brute-force maximizer of the reward on a grid of `step` °C across the
/// band. Ties keep the lowest setpoint.
pub fn grid_search_setpoint(
    sample: &WeatherSample,
    weights: &RewardWeights,
    comfort: &ComfortConfig,
    step: f64,
) -> Result<f64> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain(format!("grid step must be > 0, got {step}")));
    }
    let (lo, hi) = (comfort.band_low(), comfort.band_high());
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, lo);
    for k in 0..=n {
        let t = (lo + k as f64 * step).min(hi);
        let r = reward(sample, t, weights, comfort)?.total;
        if r > best.0 {
            best = (r, t);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyStep {
    pub day: u32,
    /// Requested setpoint, °C.
    pub setpoint: f64,
    pub reward: RewardBreakdown,
}

/// Noise-free rollout of `policy` over `series`.
pub fn run_policy<P: Policy + ?Sized>(
    policy: &P,
    series: &[WeatherSample],
    weights: &RewardWeights,
    comfort: &ComfortConfig,
) -> Result<Vec<PolicyStep>> {
    if series.is_empty() {
        return Err(Error::Domain(
            "cannot roll out a policy over an empty series".into(),
        ));
    }
    series
        .iter()
        .map(|s| {
            let setpoint = policy.setpoint(s)?;
            Ok(PolicyStep {
                day: s.day,
                setpoint,
                reward: reward(s, setpoint, weights, comfort)?,
            })
        })
        .collect()
}

/// `sum_d max(t_out_d - setpoint_d, 0)` in °C·day, one rectangle per day.
pub fn area_between(series: &[WeatherSample], setpoints: &[f64]) -> Result<f64> {
    if series.len() != setpoints.len() {
        return Err(Error::Domain(format!(
            "{} weather samples but {} setpoints",
            series.len(),
            setpoints.len()
        )));
    }
    Ok(series
        .iter()
        .zip(setpoints)
        .map(|(s, t)| (s.t_out - t).max(0.0))
        .sum())
}

/// Relative area reduction, percent. Negative when the agent is worse.
pub fn improvement_pct(area_fixed: f64, area_agent: f64) -> Result<f64> {
    if area_fixed.is_nan() || area_fixed <= 0.0 {
        return Err(Error::Domain(format!(
            "fixed-setpoint area must be positive, got {area_fixed}"
        )));
    }
    Ok(100.0 * (area_fixed - area_agent) / area_fixed)
}

/// One-decimal display form of a percentage.
pub fn display_pct(pct: f64) -> String {
    format!("{pct:.1}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuelConfig {
    pub gallons_per_day: f64,
    /// Fuel bill per day, dollars.
    pub cost_per_day: f64,
    pub days_per_year: u32,
}

impl Default for FuelConfig {
    fn default() -> Self {
        Self {
            gallons_per_day: 60_000.0,
            cost_per_day: 200_000.0,
            days_per_year: 365,
        }
    }
}

impl FuelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gallons_per_day >= 0.0 && self.cost_per_day >= 0.0) {
            return Err(Error::Config("fuel figures must be >= 0".into()));
        }
        if self.days_per_year == 0 {
            return Err(Error::Config("fuel.days_per_year must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelReport {
    pub daily: f64,
    pub annual: f64,
    pub gallons_daily: f64,
}

pub fn fuel_report(improvement_pct: f64, fuel: &FuelConfig) -> FuelReport {
    let daily = fuel.cost_per_day * improvement_pct / 100.0;
    FuelReport {
        daily,
        annual: daily * f64::from(fuel.days_per_year),
        gallons_daily: fuel.gallons_per_day * improvement_pct / 100.0,
    }
}

/// Mean absolute gap between a policy and the oracle, °C.
pub fn policy_oracle_mae<P: Policy + ?Sized>(
    policy: &P,
    samples: &[WeatherSample],
    weights: &RewardWeights,
    comfort: &ComfortConfig,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain(
            "policy_oracle_mae needs at least one sample".into(),
        ));
    }
    let mut total = 0.0;
    for s in samples {
        let (applied, _) = clamp_setpoint(policy.setpoint(s)?, comfort)?;
        total += (applied - oracle_setpoint(s, weights, comfort)).abs();
    }
    Ok(total / samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayResult {
    pub day: u32,
    pub t_out: f64,
    pub rh_out: f64,
    pub t_fixed_set: f64,
    pub t_agent_set: f64,
    pub t_oracle_set: f64,
    pub reward_fixed: f64,
    pub reward_agent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub days: Vec<DayResult>,
    pub area_fixed: f64,
    pub area_agent: f64,
    pub improvement_pct: f64,
    pub policy_oracle_mae: f64,
    pub fuel: FuelReport,
}

/// The summary written to `report.json`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub area_fixed: f64,
    pub area_agent: f64,
    pub improvement_pct: f64,
    pub policy_oracle_mae: f64,
    pub fuel_daily: f64,
    pub fuel_annual: f64,
}

impl EvalReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            area_fixed: self.area_fixed,
            area_agent: self.area_agent,
            improvement_pct: self.improvement_pct,
            policy_oracle_mae: self.policy_oracle_mae,
            fuel_daily: self.fuel.daily,
            fuel_annual: self.fuel.annual,
        }
    }

    pub fn to_plot_csv(&self) -> String {
        let mut out = String::from(PLOT_HEADER);
        out.push('\n');
        for d in &self.days {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                d.day,
                d.t_out,
                d.rh_out,
                d.t_fixed_set,
                d.t_agent_set,
                d.t_oracle_set,
                d.reward_fixed,
                d.reward_agent
            );
        }
        out
    }

    pub fn to_report_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.summary()).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn write_files(
        &self,
        plot_csv: impl AsRef<Path>,
        report_json: impl AsRef<Path>,
    ) -> Result<()> {
        let (p, r) = (plot_csv.as_ref(), report_json.as_ref());
        fs::write(p, self.to_plot_csv()).map_err(|e| Error::io(p, e))?;
        let mut json = self.to_report_json()?;
        json.push('\n');
        fs::write(r, json).map_err(|e| Error::io(r, e))
    }
}

pub fn load_report(path: impl AsRef<Path>) -> Result<ReportSummary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Fixed thermostat vs `policy` (setpoints as applied, i.e. clamped to the
/// band) with the oracle alongside.
pub fn compare<P: Policy + ?Sized>(
    policy: &P,
    series: &[WeatherSample],
    comfort: &ComfortConfig,
    weights: &RewardWeights,
    fuel: &FuelConfig,
) -> Result<EvalReport> {
    let fixed = run_policy(&FixedSetpoint(comfort.t_fixed), series, weights, comfort)?;
    let agent = run_policy(policy, series, weights, comfort)?;
    let oracle = OraclePolicy {
        weights: *weights,
        comfort: *comfort,
    };

    let mut days = Vec::with_capacity(series.len());
    for ((s, f), a) in series.iter().zip(&fixed).zip(&agent) {
        days.push(DayResult {
            day: s.day,
            t_out: s.t_out,
            rh_out: s.rh_out,
            t_fixed_set: f.reward.t_applied,
            t_agent_set: a.reward.t_applied,
            t_oracle_set: oracle.setpoint(s)?,
            reward_fixed: f.reward.total,
            reward_agent: a.reward.total,
        });
    }
    let fixed_sets: Vec<f64> = days.iter().map(|d| d.t_fixed_set).collect();
    let agent_sets: Vec<f64> = days.iter().map(|d| d.t_agent_set).collect();
    let area_fixed = area_between(series, &fixed_sets)?;
    let area_agent = area_between(series, &agent_sets)?;
    let improvement = improvement_pct(area_fixed, area_agent)?;
    Ok(EvalReport {
        area_fixed,
        area_agent,
        improvement_pct: improvement,
        policy_oracle_mae: policy_oracle_mae(policy, series, weights, comfort)?,
        fuel: fuel_report(improvement, fuel),
        days,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(t_out: f64, rh: f64) -> WeatherSample {
        WeatherSample::new(0, t_out, rh)
    }

    fn defaults() -> (RewardWeights, ComfortConfig) {
        (RewardWeights::default(), ComfortConfig::default())
    }

    #[test]
    fn oracle_examples() {
        let (rw, c) = defaults();
        let t = oracle_setpoint(&w(35.0, 0.8), &rw, &c);
        assert!((t - (0.09 * 35.0 + 22.0) / 1.09).abs() < 1e-12);
        assert!((t - 23.073).abs() < 5e-4);
        assert!((oracle_setpoint(&w(30.0, 0.0), &rw, &c) - 22.381).abs() < 5e-4);
        assert_eq!(oracle_setpoint(&w(18.0, 0.9), &rw, &c), 22.0);
        assert_eq!(oracle_setpoint(&w(45.0, 0.95), &rw, &c), 24.0);
    }

    #[test]
    fn oracle_agrees_with_grid() {
        let (rw, c) = defaults();
        for (t, h) in [
            (35.0, 0.8),
            (30.0, 0.0),
            (18.0, 0.5),
            (45.0, 0.95),
            (22.0, 0.3),
            (26.4, 0.61),
        ] {
            let s = w(t, h);
            let grid = grid_search_setpoint(&s, &rw, &c, 0.01).unwrap();
            assert!((grid - oracle_setpoint(&s, &rw, &c)).abs() <= 0.01 + 1e-9);
        }
        assert!(grid_search_setpoint(&w(30.0, 0.5), &rw, &c, 0.0).is_err());
    }

    #[test]
    fn rollouts() {
        let (rw, c) = defaults();
        let series: Vec<_> = (0..5)
            .map(|d| WeatherSample::new(d, 28.0 + d as f64, 0.5))
            .collect();
        let fixed = run_policy(&FixedSetpoint(22.0), &series, &rw, &c).unwrap();
        assert!(fixed.iter().all(|s| s.setpoint == 22.0));
        let oracle = OraclePolicy {
            weights: rw,
            comfort: c,
        };
        let steps = run_policy(&oracle, &series, &rw, &c).unwrap();
        for (st, s) in steps.iter().zip(&series) {
            assert_eq!(st.setpoint, oracle_setpoint(s, &rw, &c));
        }
        assert!(run_policy(&FixedSetpoint(22.0), &[], &rw, &c).is_err());
    }

    #[test]
    fn area_examples() {
        let s: Vec<_> = [30.0, 32.0, 31.0].iter().map(|&t| w(t, 0.5)).collect();
        assert_eq!(area_between(&s, &[22.0; 3]).unwrap(), 27.0);
        assert_eq!(area_between(&s, &[30.0, 32.0, 31.0]).unwrap(), 0.0);
        assert_eq!(area_between(&[w(20.0, 0.5)], &[22.0]).unwrap(), 0.0);
        assert!(matches!(area_between(&s, &[22.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn improvement_examples() {
        let p = improvement_pct(867.5, 808.3).unwrap();
        assert!((p - 6.824207).abs() < 1e-6);
        assert_eq!(display_pct(p), "6.8");
        assert_eq!(improvement_pct(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(improvement_pct(100.0, 110.0).unwrap(), -10.0);
        assert!(improvement_pct(0.0, 1.0).is_err());
        assert!(improvement_pct(-5.0, 1.0).is_err());
    }

    #[test]
    fn fuel_examples() {
        let f = fuel_report(7.0, &FuelConfig::default());
        assert!((f.daily - 14_000.0).abs() < 1e-6);
        assert!((f.annual - 5_110_000.0).abs() < 1e-3);
        assert!((f.gallons_daily - 4_200.0).abs() < 1e-6);
        let z = fuel_report(0.0, &FuelConfig::default());
        assert_eq!((z.daily, z.annual), (0.0, 0.0));
    }

    #[test]
    fn mae_examples() {
        let (rw, c) = defaults();
        let oracle = OraclePolicy {
            weights: rw,
            comfort: c,
        };
        let samples: Vec<_> = (0..20)
            .map(|d| WeatherSample::new(d, 25.0 + d as f64, 0.05 * d as f64))
            .collect();
        assert_eq!(policy_oracle_mae(&oracle, &samples, &rw, &c).unwrap(), 0.0);
        let m = policy_oracle_mae(&FixedSetpoint(22.0), &[w(35.0, 0.8)], &rw, &c).unwrap();
        assert!((m - 1.073).abs() < 5e-4);
        assert!(policy_oracle_mae(&oracle, &[], &rw, &c).is_err());
    }

    #[test]
    fn compare_fixed_against_itself() {
        let (rw, c) = defaults();
        let series: Vec<_> = (0..10)
            .map(|d| WeatherSample::new(d, 30.0 + (d % 3) as f64, 0.7))
            .collect();
        let r = compare(
            &FixedSetpoint(22.0),
            &series,
            &c,
            &rw,
            &FuelConfig::default(),
        )
        .unwrap();
        assert_eq!(r.improvement_pct, 0.0);
        assert_eq!(r.area_fixed, r.area_agent);
        assert_eq!(r.days.len(), 10);
        let csv = r.to_plot_csv();
        assert!(csv.starts_with(PLOT_HEADER));
        assert_eq!(csv.lines().count(), 11);
        let json: serde_json::Value = serde_json::from_str(&r.to_report_json().unwrap()).unwrap();
        for key in [
            "area_fixed",
            "area_agent",
            "improvement_pct",
            "policy_oracle_mae",
            "fuel_daily",
            "fuel_annual",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn closures_are_policies() {
        let (rw, c) = defaults();
        let p = |s: &WeatherSample| if s.t_out > 30.0 { 23.0 } else { 22.0 };
        let steps = run_policy(&p, &[w(31.0, 0.1), w(29.0, 0.1)], &rw, &c).unwrap();
        assert_eq!(steps[0].setpoint, 23.0);
        assert_eq!(steps[1].setpoint, 22.0);
    }
}
