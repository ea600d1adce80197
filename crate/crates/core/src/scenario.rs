//! Synthetic outdoor weather, one sample per simulated day.
//!
//! Temperature and humidity follow a shared-period sinusoid with Gaussian
//! noise. Noise is drawn from ChaCha8 (`rand_chacha::ChaCha8Rng`, seeded with
//! `seed_from_u64`) through the ziggurat standard normal of `rand_distr`, so a
//! given `(config, seed)` produces the same bits on every platform.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Header line of the scenario CSV.
pub const SCENARIO_HEADER: &str = "day,t_out_c,rh_out";

/// Bounds accepted for an ingested outdoor temperature, °C.
pub const T_OUT_SANITY: (f64, f64) = (-20.0, 60.0);

/// One day's outdoor conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherSample {
    pub day: u32,
    /// Outdoor dry-bulb temperature, °C.
    pub t_out: f64,
    /// Outdoor relative humidity as a fraction in `[0, 1]`.
    pub rh_out: f64,
}

impl WeatherSample {
    pub fn new(day: u32, t_out: f64, rh_out: f64) -> Self {
        Self { day, t_out, rh_out }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rh_out.is_finite() || !(0.0..=1.0).contains(&self.rh_out) {
            return Err(Error::Domain(format!(
                "rh_out {} outside [0, 1] on day {}",
                self.rh_out, self.day
            )));
        }
        if !self.t_out.is_finite() || !(T_OUT_SANITY.0..=T_OUT_SANITY.1).contains(&self.t_out) {
            return Err(Error::Domain(format!(
                "t_out {} outside [{}, {}] on day {}",
                self.t_out, T_OUT_SANITY.0, T_OUT_SANITY.1, self.day
            )));
        }
        Ok(())
    }
}

/// Parameters of the synthetic weather generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_days: u32,
    pub t_base: f64,
    pub t_amp: f64,
    /// Period of both sinusoids, in days.
    pub t_period: f64,
    pub t_noise_sd: f64,
    pub h_base: f64,
    pub h_amp: f64,
    /// Phase offset of the humidity sinusoid, radians.
    pub h_phase: f64,
    pub h_noise_sd: f64,
    /// Humidity is clamped into `[lo, hi]` after noise.
    pub h_clamp: (f64, f64),
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_days: 50,
            t_base: 32.0,
            t_amp: 4.0,
            t_period: 30.0,
            t_noise_sd: 1.5,
            h_base: 0.65,
            h_amp: 0.15,
            h_phase: 1.0,
            h_noise_sd: 0.05,
            h_clamp: (0.2, 0.95),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_days < 1 {
            return bad("scenario.n_days must be at least 1".into());
        }
        if !(self.t_period.is_finite() && self.t_period > 0.0) {
            return bad(format!(
                "scenario.t_period must be positive, got {}",
                self.t_period
            ));
        }
        if !(self.t_noise_sd.is_finite() && self.t_noise_sd >= 0.0) {
            return bad(format!(
                "scenario.t_noise_sd must be >= 0, got {}",
                self.t_noise_sd
            ));
        }
        if !(self.h_noise_sd.is_finite() && self.h_noise_sd >= 0.0) {
            return bad(format!(
                "scenario.h_noise_sd must be >= 0, got {}",
                self.h_noise_sd
            ));
        }
        let (lo, hi) = self.h_clamp;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return bad(format!(
                "scenario.h_clamp must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi}]"
            ));
        }
        for (name, v) in [
            ("t_base", self.t_base),
            ("t_amp", self.t_amp),
            ("h_base", self.h_base),
            ("h_amp", self.h_amp),
            ("h_phase", self.h_phase),
        ] {
            if !v.is_finite() {
                return bad(format!("scenario.{name} must be finite"));
            }
        }
        Ok(())
    }
}

/// Generates `cfg.n_days` samples. Two noise draws are consumed per day
/// (temperature first, then humidity) even when a noise level is zero, so
/// changing one standard deviation never shifts the other stream.
pub fn generate_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<Vec<WeatherSample>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = cfg.h_clamp;
    let series = (0..cfg.n_days)
        .map(|day| {
            let phase = 2.0 * PI * f64::from(day) / cfg.t_period;
            let z_t: f64 = rng.sample(StandardNormal);
            let z_h: f64 = rng.sample(StandardNormal);
            let t_out = cfg.t_base + cfg.t_amp * phase.sin() + cfg.t_noise_sd * z_t;
            let rh = cfg.h_base + cfg.h_amp * (phase + cfg.h_phase).sin() + cfg.h_noise_sd * z_h;
            WeatherSample::new(day, t_out, rh.clamp(lo, hi))
        })
        .collect();
    Ok(series)
}

/// Renders a series in the scenario CSV format.
pub fn scenario_to_csv(series: &[WeatherSample]) -> String {
    let mut out = String::with_capacity(32 * (series.len() + 1));
    out.push_str(SCENARIO_HEADER);
    out.push('\n');
    for s in series {
        out.push_str(&format!("{},{:.6},{:.6}\n", s.day, s.t_out, s.rh_out));
    }
    out
}

pub fn save_scenario(series: &[WeatherSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if series.is_empty() {
        return Err(Error::Domain("refusing to save an empty scenario".into()));
    }
    fs::write(path, scenario_to_csv(series)).map_err(|e| Error::io(path, e))
}

/// Parses scenario CSV text. Line numbers in errors are 1-based and count
/// the header.
pub fn parse_scenario(text: &str) -> Result<Vec<WeatherSample>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end_matches('\r') == SCENARIO_HEADER => {}
        Some(h) => {
            return Err(Error::Parse(format!(
                "line 1: expected header `{SCENARIO_HEADER}`, found `{h}`"
            )))
        }
        None => {
            return Err(Error::Parse(format!(
                "line 1: empty file, expected header `{SCENARIO_HEADER}`"
            )))
        }
    }

    let mut series = Vec::new();
    for (idx, raw) in lines.enumerate() {
        let line_no = idx + 2;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "line {line_no}: expected 3 fields, found {}",
                fields.len()
            )));
        }
        let day: u32 = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {line_no}: bad day `{}`", fields[0])))?;
        let t_out: f64 = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("line {line_no}: bad t_out_c `{}`", fields[1])))?;
        let rh_out: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Parse(format!("line {line_no}: bad rh_out `{}`", fields[2])))?;
        let sample = WeatherSample::new(day, t_out, rh_out);
        sample
            .validate()
            .map_err(|e| Error::Parse(format!("line {line_no}: {}", strip_kind(&e))))?;
        series.push(sample);
    }
    Ok(series)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Vec<WeatherSample>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

fn strip_kind(e: &Error) -> String {
    match e {
        Error::Domain(m) | Error::Config(m) | Error::Parse(m) | Error::State(m) => m.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n_days: u32) -> ScenarioConfig {
        ScenarioConfig {
            n_days,
            t_base: 32.0,
            t_amp: 0.0,
            t_noise_sd: 0.0,
            h_base: 0.6,
            h_amp: 0.0,
            h_noise_sd: 0.0,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn flat_config_gives_constant_days() {
        for seed in [0, 1, 42, u64::MAX] {
            let s = generate_scenario(&flat(3), seed).unwrap();
            assert_eq!(s.len(), 3);
            for (d, w) in s.iter().enumerate() {
                assert_eq!(w.day as usize, d);
                assert_eq!(w.t_out, 32.0);
                assert_eq!(w.rh_out, 0.6);
            }
        }
    }

    #[test]
    fn quarter_period_hits_peak() {
        let cfg = ScenarioConfig {
            t_amp: 4.0,
            t_period: 4.0,
            ..flat(3)
        };
        let s = generate_scenario(&cfg, 7).unwrap();
        assert!((s[1].t_out - 36.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.n_days = 0;
        assert!(matches!(generate_scenario(&cfg, 1), Err(Error::Config(_))));
        let mut cfg = ScenarioConfig::default();
        cfg.h_clamp = (0.5, 0.5);
        assert!(matches!(generate_scenario(&cfg, 1), Err(Error::Config(_))));
        let mut cfg = ScenarioConfig::default();
        cfg.t_period = 0.0;
        assert!(matches!(generate_scenario(&cfg, 1), Err(Error::Config(_))));
    }

    #[test]
    fn csv_format_is_exact() {
        let s = [WeatherSample::new(0, 32.0, 0.6)];
        assert_eq!(
            scenario_to_csv(&s),
            "day,t_out_c,rh_out\n0,32.000000,0.600000\n"
        );
    }

    #[test]
    fn parse_minimal_file() {
        let s = parse_scenario("day,t_out_c,rh_out\n0,30.0,0.5\n").unwrap();
        assert_eq!(s, vec![WeatherSample::new(0, 30.0, 0.5)]);
    }

    #[test]
    fn out_of_range_humidity_names_line() {
        let err = parse_scenario("day,t_out_c,rh_out\n0,30.0,0.5\n1,30.0,1.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse(_)));
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("rh_out"), "{msg}");
    }

    #[test]
    fn wrong_header_names_expected() {
        let err = parse_scenario("day,temp,hum\n0,30,0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains(SCENARIO_HEADER));
    }

    #[test]
    fn empty_save_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(save_scenario(&[], dir.path().join("s.csv")).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_scenario("/nonexistent/definitely/not/here.csv").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
