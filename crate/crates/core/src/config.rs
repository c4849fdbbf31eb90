//! Run configuration: one TOML document, unknown keys rejected.

use serde::{Deserialize, Serialize};

use crate::constants::{PhysicalConstants, Tolerances};
use crate::dynamics::{PendulumConfig, TrajectoryModel};
use crate::error::{Error, Result};
use crate::gravity_phase::{ExperimentGeometry, DEFAULT_MIN_SEPARATION};
use crate::interferometer::{magnetic_acceleration, InterferometerSpec, SYMMETRIC_SCHEDULE};
use crate::noise::{NoiseParams, RegimeThresholds};
use crate::sweep::{Observable, SweepAxis, SweepSpec, DEFAULT_MAX_POINTS};

/// The bundled parameter set.
pub const REFERENCE_CONFIG: &str = include_str!("../configs/reference.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumSection {
    pub length: f64,
    #[serde(default)]
    pub initial_angle: f64,
    #[serde(default)]
    pub initial_angular_velocity: f64,
    #[serde(default = "default_model")]
    pub model: TrajectoryModel,
}

fn default_model() -> TrajectoryModel {
    TrajectoryModel::SmallAngleClosedForm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticDrive {
    /// J·T⁻¹
    pub moment: f64,
    /// T·m⁻¹
    pub gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerSection {
    pub total_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_acceleration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnetic: Option<MagneticDrive>,
    /// (fraction of total_time, sign) pairs.
    #[serde(default = "default_schedule")]
    pub schedule: Vec<(f64, i8)>,
}

fn default_schedule() -> Vec<(f64, i8)> {
    SYMMETRIC_SCHEDULE.to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub center_separation: f64,
    #[serde(default)]
    pub split_axis_angle: f64,
    pub mass: f64,
    #[serde(default = "default_min_separation")]
    pub min_separation: f64,
}

fn default_min_separation() -> f64 {
    DEFAULT_MIN_SEPARATION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config("output.format", format!("must be csv or json (got {other})"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<SweepAxis>,
    #[serde(default)]
    pub outputs: Vec<Observable>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_max_points() -> usize {
    DEFAULT_MAX_POINTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Γ, s⁻¹
    #[serde(default)]
    pub decoherence_rate: f64,
    #[serde(default)]
    pub constants: PhysicalConstants,
    pub pendulum: PendulumSection,
    pub interferometer: InterferometerSection,
    pub geometry: GeometrySection,
    pub noise: NoiseParams,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub thresholds: RegimeThresholds,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Validated, ready-to-run model objects.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub constants: PhysicalConstants,
    pub pendulum: PendulumConfig,
    pub model: TrajectoryModel,
    pub spec: InterferometerSpec,
    pub geometry: ExperimentGeometry,
    pub noise: NoiseParams,
    pub tolerances: Tolerances,
    pub thresholds: RegimeThresholds,
    pub decoherence_rate: f64,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_CONFIG).expect("bundled config parses")
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Io(format!("cannot serialise config: {e}")))
    }

    fn spin_acceleration(&self, model: TrajectoryModel) -> Result<InterferometerSpec> {
        let section = &self.interferometer;
        let set = [
            section.spin_acceleration.is_some(),
            section.target_separation.is_some(),
            section.magnetic.is_some(),
        ];
        if set.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::config(
                "interferometer.spin_acceleration",
                "exactly one of spin_acceleration, target_separation, magnetic must be set",
            ));
        }
        if let Some(sep) = section.target_separation {
            return InterferometerSpec::with_target_separation(section.total_time, sep, &section.schedule, model);
        }
        let a = match (section.spin_acceleration, section.magnetic) {
            (Some(a), _) => a,
            (None, Some(m)) => magnetic_acceleration(m.moment, m.gradient, self.geometry.mass),
            _ => unreachable!("exactly one drive is set"),
        };
        InterferometerSpec::from_fractions(section.total_time, a, &section.schedule, model)
    }

    /// Validates every section; errors name the offending key.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        self.constants.validate()?;
        self.tolerances.validate()?;
        self.noise.validate()?;
        if !(self.decoherence_rate.is_finite() && self.decoherence_rate >= 0.0) {
            return Err(Error::config("decoherence_rate", "must be finite and >= 0"));
        }
        let p = &self.pendulum;
        let pendulum = PendulumConfig::new(p.length, p.initial_angle, p.initial_angular_velocity, self.constants)?;
        if p.model == TrajectoryModel::SmallAngleClosedForm && p.initial_angular_velocity != 0.0 {
            return Err(Error::config(
                "pendulum.initial_angular_velocity",
                "must be 0 for the small-angle closed form",
            ));
        }
        let g = &self.geometry;
        let geometry = ExperimentGeometry::new(g.center_separation, g.split_axis_angle, g.mass)?
            .with_min_separation(g.min_separation);
        geometry.validate()?;
        let spec = self.spin_acceleration(p.model)?;
        Ok(ResolvedConfig {
            constants: self.constants,
            pendulum,
            model: p.model,
            spec,
            geometry,
            noise: self.noise,
            tolerances: self.tolerances,
            thresholds: self.thresholds,
            decoherence_rate: self.decoherence_rate,
        })
    }

    /// Sweep described by the `[sweep]` section.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let section = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::config("sweep", "section is required for a sweep"))?;
        let mut base = self.clone();
        base.sweep = None;
        Ok(SweepSpec {
            base,
            axes: section.axes.clone(),
            outputs: section.outputs.clone(),
            max_points: section.max_points,
        })
    }

    /// Sets a numeric parameter by dotted path, e.g. `pendulum.length`.
    pub fn set_param(&mut self, path: &str, value: f64) -> Result<()> {
        let slot: &mut f64 = match path {
            "decoherence_rate" => &mut self.decoherence_rate,
            "constants.gravitational_constant" => &mut self.constants.gravitational_constant,
            "constants.reduced_planck" => &mut self.constants.reduced_planck,
            "constants.boltzmann" => &mut self.constants.boltzmann,
            "constants.local_gravity" => &mut self.constants.local_gravity,
            "pendulum.length" => &mut self.pendulum.length,
            "pendulum.initial_angle" => &mut self.pendulum.initial_angle,
            "pendulum.initial_angular_velocity" => &mut self.pendulum.initial_angular_velocity,
            "interferometer.total_time" => &mut self.interferometer.total_time,
            "interferometer.spin_acceleration" => {
                self.interferometer.target_separation = None;
                self.interferometer.magnetic = None;
                self.interferometer.spin_acceleration.insert(value)
            }
            "interferometer.target_separation" => {
                self.interferometer.spin_acceleration = None;
                self.interferometer.magnetic = None;
                self.interferometer.target_separation.insert(value)
            }
            "geometry.center_separation" => &mut self.geometry.center_separation,
            "geometry.split_axis_angle" => &mut self.geometry.split_axis_angle,
            "geometry.mass" => &mut self.geometry.mass,
            "geometry.min_separation" => &mut self.geometry.min_separation,
            "noise.temperature" => &mut self.noise.temperature,
            "noise.mode_frequency" => &mut self.noise.mode_frequency,
            "noise.effective_mass" => &mut self.noise.effective_mass,
            "noise.superposition_scale" => &mut self.noise.superposition_scale,
            other => return Err(Error::config(other, "is not a sweepable parameter")),
        };
        *slot = value;
        Ok(())
    }
}
