//! Parameter sweeps over Cartesian grids, and power-law fitting of results.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::protocol::{simulate, ProtocolResult};

pub const DEFAULT_MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    DeltaPhiFree,
    DeltaPhiPend,
    RelativeCorrection,
    VFree,
    VPend,
    VisibilityBound,
    Negativity,
    ThermalRms,
    RegimeFlags,
    TrajectoryDeviation,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::DeltaPhiFree => "delta_phi_free",
            Observable::DeltaPhiPend => "delta_phi_pend",
            Observable::RelativeCorrection => "relative_correction",
            Observable::VFree => "v_free",
            Observable::VPend => "v_pend",
            Observable::VisibilityBound => "visibility_bound",
            Observable::Negativity => "negativity",
            Observable::ThermalRms => "thermal_rms",
            Observable::RegimeFlags => "regime_flags",
            Observable::TrajectoryDeviation => "trajectory_deviation",
        }
    }

    fn extract(self, r: &ProtocolResult) -> Value {
        let num = |x: Option<f64>| x.map_or(Value::Missing, Value::Number);
        match self {
            Observable::DeltaPhiFree => Value::Number(r.delta_phi_free),
            Observable::DeltaPhiPend => Value::Number(r.delta_phi_pend),
            Observable::RelativeCorrection => num(r.relative_correction),
            Observable::VFree => Value::Number(r.v_free),
            Observable::VPend => Value::Number(r.v_pend),
            Observable::VisibilityBound => Value::Number(r.visibility_bound),
            Observable::Negativity => Value::Number(r.negativity_pend),
            Observable::ThermalRms => Value::Number(r.thermal_rms),
            Observable::RegimeFlags => Value::Text(r.regime.flags()),
            Observable::TrajectoryDeviation => num(r.trajectory_deviation),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
    Missing,
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub axes: Vec<SweepAxis>,
    pub outputs: Vec<Observable>,
    pub max_points: usize,
}

/// One grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub params: Vec<(String, f64)>,
    pub values: Vec<(Observable, Value)>,
    /// Quadrature error on Δφ summed over both dynamics models.
    pub phase_error_estimate: Option<f64>,
    pub relative_correction_error: Option<f64>,
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn param(&self, path: &str) -> Option<f64> {
        self.params.iter().find(|(p, _)| p == path).map(|&(_, v)| v)
    }

    pub fn value(&self, obs: Observable) -> Option<&Value> {
        self.values.iter().find(|(o, _)| *o == obs).map(|(_, v)| v)
    }
}

/// Number of grid points, or `None` on overflow.
pub fn grid_size(axes: &[SweepAxis]) -> Option<usize> {
    axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()))
}

impl SweepSpec {
    pub fn validate(&self) -> Result<usize> {
        if self.axes.is_empty() {
            return Err(Error::config("sweep.axes", "must not be empty"));
        }
        for axis in &self.axes {
            if axis.values.is_empty() {
                return Err(Error::config(format!("sweep.axes.{}", axis.path), "has no values"));
            }
            // reject unknown paths before any work starts
            self.base.clone().set_param(&axis.path, axis.values[0])?;
        }
        let points = grid_size(&self.axes).unwrap_or(usize::MAX);
        if points > self.max_points {
            return Err(Error::GridTooLarge {
                points,
                cap: self.max_points,
            });
        }
        Ok(points)
    }

    /// Parameter values of grid point `index`, last axis fastest.
    fn point(&self, mut index: usize) -> Vec<(String, f64)> {
        let mut out = vec![(String::new(), 0.0); self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            out[k] = (axis.path.clone(), axis.values[index % n]);
            index /= n;
        }
        out
    }

    fn evaluate_point(&self, index: usize) -> ResultRecord {
        let params = self.point(index);
        let mut config = self.base.clone();
        let outcome = params
            .iter()
            .try_for_each(|(path, v)| config.set_param(path, *v))
            .and_then(|_| simulate(&config));
        match outcome {
            Ok(r) => ResultRecord {
                values: self.outputs.iter().map(|&o| (o, o.extract(&r))).collect(),
                phase_error_estimate: Some(r.phase_error_estimate),
                relative_correction_error: r.relative_correction_error,
                error: None,
                params,
            },
            Err(e) => ResultRecord {
                values: self.outputs.iter().map(|&o| (o, Value::Missing)).collect(),
                phase_error_estimate: None,
                relative_correction_error: None,
                error: Some(e.to_string()),
                params,
            },
        }
    }
}

/// Evaluates every grid point in row-major order.
///
/// Points run in parallel on the current rayon pool; results are assembled
/// by grid index, so output does not depend on the thread count. A failing
/// point is recorded in its row and does not stop the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRecord>> {
    let points = spec.validate()?;
    Ok((0..points)
        .into_par_iter()
        .map(|i| spec.evaluate_point(i))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// max |y_fit/y − 1| over the input points.
    pub max_relative_residual: f64,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.coefficient * x.powf(self.exponent)
    }
}

/// Least-squares fit of `log y = log c + p·log x`.
pub fn fit_power_law_points(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::DegenerateFit(format!("non-positive point ({x}, {y})")));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return Err(Error::DegenerateFit("x values are constant".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let coefficient = (my - exponent * mx).exp();
    let fit = PowerLawFit {
        exponent,
        coefficient,
        max_relative_residual: 0.0,
    };
    let max_relative_residual = points
        .iter()
        .map(|&(x, y)| (fit.predict(x) / y - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(PowerLawFit {
        max_relative_residual,
        ..fit
    })
}

/// Fits observable `y` against swept parameter `x`, skipping failed rows.
pub fn fit_power_law(records: &[ResultRecord], x: &str, y: Observable) -> Result<PowerLawFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.error.is_none())
        .filter_map(|r| Some((r.param(x)?, r.value(y)?.as_f64()?)))
        .collect();
    fit_power_law_points(&points)
}
