//! Thermal-vibration budget and regime-validity predicates.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::dynamics::PendulumConfig;
use crate::error::{Error, Result};
use crate::interferometer::{required_angle, InterferometerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    /// K
    pub temperature: f64,
    /// ω_m, rad·s⁻¹
    pub mode_frequency: f64,
    /// kg
    pub effective_mass: f64,
    /// m
    pub superposition_scale: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        for (key, value) in [
            ("noise.temperature", self.temperature),
            ("noise.mode_frequency", self.mode_frequency),
            ("noise.effective_mass", self.effective_mass),
            ("noise.superposition_scale", self.superposition_scale),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be finite and > 0 (got {value})")));
            }
        }
        Ok(())
    }
}

/// √(k_B·T / (m_eff·ω_m²)).
pub fn thermal_rms(params: &NoiseParams, constants: &PhysicalConstants) -> f64 {
    (constants.boltzmann * params.temperature / params.effective_mass).sqrt() / params.mode_frequency
}

/// Numerical meaning given to each "≪" in the regime checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeThresholds {
    /// Upper limit on (ω·t)².
    pub free_fall: f64,
    /// t_total must stay below this fraction of the period.
    pub short_time_fraction: f64,
    pub small_angle: f64,
    /// Upper limit on thermal_rms / superposition_scale.
    pub thermal_ratio: f64,
    /// Required factor between t_total and 1/ω_m.
    pub timescale_factor: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            free_fall: 1e-2,
            short_time_fraction: 0.1,
            small_angle: 1e-2,
            thermal_ratio: 1e-3,
            timescale_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
    /// Longest sequence duration with (ωt)² below the free-fall threshold.
    pub free_fall_horizon: f64,
    pub thermal_rms: f64,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `ok`, or the failing predicate names joined by `;`.
    pub fn flags(&self) -> String {
        let failing: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        if failing.is_empty() {
            "ok".to_string()
        } else {
            failing.join(";")
        }
    }
}

fn below(name: &str, value: f64, threshold: f64) -> RegimeCheck {
    RegimeCheck {
        name: name.to_string(),
        value,
        threshold,
        // NaN compares false, so bad inputs fail rather than panic
        pass: value < threshold,
    }
}

/// Evaluates every regime predicate; failures are entries, never errors.
pub fn regime_report(
    pendulum: &PendulumConfig,
    spec: &InterferometerSpec,
    noise: &NoiseParams,
    thresholds: &RegimeThresholds,
) -> RegimeReport {
    let t = spec.total_time;
    let omega = pendulum.angular_frequency();
    let period = pendulum.period();
    let angle = pendulum.initial_angle.abs() + required_angle(spec.max_separation(), pendulum.length).abs();
    let rms = thermal_rms(noise, &pendulum.constants);

    RegimeReport {
        checks: vec![
            below("free_fall", (omega * t).powi(2), thresholds.free_fall),
            below("short_time", t / period, thresholds.short_time_fraction),
            below("small_angle", angle, thresholds.small_angle),
            below("thermal_rms", rms / noise.superposition_scale, thresholds.thermal_ratio),
            below(
                "timescale_separation",
                thresholds.timescale_factor / (noise.mode_frequency * t),
                1.0,
            ),
        ],
        free_fall_horizon: thresholds.free_fall.sqrt() / omega,
        thermal_rms: rms,
    }
}
