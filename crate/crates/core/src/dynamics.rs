//! Constrained (pendulum) and free-fall centre-of-mass trajectories.
//!
//! Positions are arc displacements `s = L·θ` in metres. Three models are
//! available: uniform acceleration along the arc, the small-angle closed
//! form `θ₀·cos(ωt)`, and the full `θ̈ = −(g/L)·sin θ` integrated numerically.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::{PhysicalConstants, Tolerances};
use crate::error::{Error, Result};
use crate::interferometer::SpinProfile;
use crate::ode::{self, DenseSolution, OdeOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumConfig {
    pub length: f64,
    pub initial_angle: f64,
    pub initial_angular_velocity: f64,
    pub constants: PhysicalConstants,
}

impl PendulumConfig {
    pub fn new(
        length: f64,
        initial_angle: f64,
        initial_angular_velocity: f64,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        let config = PendulumConfig {
            length,
            initial_angle,
            initial_angular_velocity,
            constants,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::config("pendulum.length", format!("must be > 0 (got {})", self.length)));
        }
        if !(self.initial_angle.abs() < PI / 2.0) {
            return Err(Error::config(
                "pendulum.initial_angle",
                format!("must satisfy |θ₀| < π/2 (got {})", self.initial_angle),
            ));
        }
        if !self.initial_angular_velocity.is_finite() {
            return Err(Error::config("pendulum.initial_angular_velocity", "must be finite"));
        }
        Ok(())
    }

    /// ω = √(g/L).
    pub fn angular_frequency(&self) -> f64 {
        (self.constants.local_gravity / self.length).sqrt()
    }

    pub fn period(&self) -> f64 {
        period(self)
    }

    pub fn initial_displacement(&self) -> f64 {
        self.length * self.initial_angle
    }

    /// Tangential acceleration at release in the small-angle limit, g·θ₀.
    pub fn effective_acceleration(&self) -> f64 {
        self.constants.local_gravity * self.initial_angle
    }

    /// Mechanical energy per unit mass, ½L²θ̇² + gL(1 − cos θ).
    pub fn energy(&self, angle: f64, angular_velocity: f64) -> f64 {
        let l = self.length;
        let half = (0.5 * angle).sin();
        0.5 * l * l * angular_velocity * angular_velocity
            + 2.0 * self.constants.local_gravity * l * half * half
    }
}

/// T = 2π√(L/g).
pub fn period(config: &PendulumConfig) -> f64 {
    2.0 * PI * (config.length / config.constants.local_gravity).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryModel {
    FreeFall,
    #[serde(alias = "small_angle")]
    SmallAngleClosedForm,
    #[serde(alias = "exact")]
    ExactPendulumOde,
}

impl TrajectoryModel {
    pub fn is_pendulum(self) -> bool {
        !matches!(self, TrajectoryModel::FreeFall)
    }
}

/// Numerical solution of the full pendulum equation with dense output.
#[derive(Debug, Clone)]
pub struct PendulumSolution {
    config: PendulumConfig,
    solution: DenseSolution<2>,
}

impl PendulumSolution {
    pub fn config(&self) -> &PendulumConfig {
        &self.config
    }

    pub fn horizon(&self) -> f64 {
        self.solution.t_end()
    }

    pub fn n_steps(&self) -> usize {
        self.solution.n_steps()
    }

    /// (θ, θ̇) at `t`, or `None` outside `[0, horizon]`.
    pub fn state(&self, t: f64) -> Option<[f64; 2]> {
        self.solution.eval(t)
    }

    pub fn energy(&self, t: f64) -> Option<f64> {
        self.state(t).map(|[a, w]| self.config.energy(a, w))
    }

    /// Energy at every accepted step.
    pub fn node_energies(&self) -> Vec<f64> {
        self.solution
            .nodes()
            .map(|(_, [a, w])| self.config.energy(a, w))
            .collect()
    }
}

/// A time → arc-displacement evaluator.
///
/// Evaluation is pure: the same `t` always yields the same bits.
#[derive(Debug, Clone)]
pub enum Trajectory {
    FreeFall {
        initial_position: f64,
        acceleration: f64,
        duration: f64,
    },
    SmallAngle {
        amplitude: f64,
        angular_frequency: f64,
    },
    Exact(Arc<PendulumSolution>),
    /// A base trajectory shifted by a weighted spin-dependent displacement.
    Displaced {
        base: Arc<Trajectory>,
        profile: Arc<SpinProfile>,
        weight: f64,
    },
}

impl Trajectory {
    /// Arc displacement at `t`. Exact solutions return NaN outside their
    /// integrated horizon.
    pub fn position(&self, t: f64) -> f64 {
        match self {
            Trajectory::FreeFall {
                initial_position,
                acceleration,
                ..
            } => initial_position - 0.5 * acceleration * t * t,
            Trajectory::SmallAngle {
                amplitude,
                angular_frequency,
            } => amplitude * (angular_frequency * t).cos(),
            Trajectory::Exact(sol) => sol
                .state(t)
                .map_or(f64::NAN, |[angle, _]| sol.config.length * angle),
            Trajectory::Displaced {
                base,
                profile,
                weight,
            } => base.position(t) + weight * profile.displacement(t),
        }
    }

    pub fn initial_position(&self) -> f64 {
        self.position(0.0)
    }

    /// `n_samples` uniformly spaced `(t, s)` pairs including both end points.
    pub fn sample(&self, t_start: f64, t_end: f64, n_samples: usize) -> Vec<(f64, f64)> {
        match n_samples {
            0 => Vec::new(),
            1 => vec![(t_start, self.position(t_start))],
            n => {
                let dt = (t_end - t_start) / (n - 1) as f64;
                (0..n)
                    .map(|k| {
                        let t = if k == n - 1 { t_end } else { t_start + k as f64 * dt };
                        (t, self.position(t))
                    })
                    .collect()
            }
        }
    }
}

/// Closed-form small-angle motion `s(t) = L·θ₀·cos(ωt)`.
pub fn small_angle_trajectory(config: &PendulumConfig) -> Result<Trajectory> {
    config.validate()?;
    if config.initial_angular_velocity != 0.0 {
        return Err(Error::config(
            "pendulum.initial_angular_velocity",
            "must be 0 for the small-angle closed form",
        ));
    }
    Ok(Trajectory::SmallAngle {
        amplitude: config.initial_displacement(),
        angular_frequency: config.angular_frequency(),
    })
}

/// Integrates the full pendulum equation over `[0, horizon]`.
pub fn exact_solution(config: &PendulumConfig, tolerances: &Tolerances, horizon: f64) -> Result<PendulumSolution> {
    config.validate()?;
    tolerances.validate()?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::config("horizon", "must be finite and >= 0"));
    }
    let w2 = config.constants.local_gravity / config.length;
    let solution = ode::integrate(
        move |_, y: &[f64; 2]| [y[1], -w2 * y[0].sin()],
        0.0,
        [config.initial_angle, config.initial_angular_velocity],
        horizon,
        OdeOptions {
            rel_tol: tolerances.ode_rel_tol,
            abs_tol: tolerances.ode_abs_tol,
        },
    )?;
    Ok(PendulumSolution {
        config: *config,
        solution,
    })
}

pub fn exact_trajectory(config: &PendulumConfig, tolerances: &Tolerances, horizon: f64) -> Result<Trajectory> {
    Ok(Trajectory::Exact(Arc::new(exact_solution(config, tolerances, horizon)?)))
}

/// Uniformly accelerated motion `s(t) = s₀ − ½·a·t²`.
pub fn free_fall_trajectory(s0: f64, a_eff: f64, duration: f64) -> Trajectory {
    Trajectory::FreeFall {
        initial_position: s0,
        acceleration: a_eff,
        duration,
    }
}

/// Base (spin-independent) trajectory of a pendulum under the given model.
pub fn base_trajectory(
    model: TrajectoryModel,
    config: &PendulumConfig,
    tolerances: &Tolerances,
    horizon: f64,
) -> Result<Trajectory> {
    match model {
        TrajectoryModel::FreeFall => Ok(free_fall_trajectory(
            config.initial_displacement(),
            config.effective_acceleration(),
            horizon,
        )),
        TrajectoryModel::SmallAngleClosedForm => small_angle_trajectory(config),
        TrajectoryModel::ExactPendulumOde => exact_trajectory(config, tolerances, horizon),
    }
}

/// `cos x − 1 + x²/2` without cancellation for small `x`.
pub(crate) fn cos_quadratic_remainder(x: f64) -> f64 {
    let x2 = x * x;
    if x2 > 0.25 {
        return x.cos() - 1.0 + 0.5 * x2;
    }
    // x⁴/4! − x⁶/6! + ...
    let mut term = x2 * x2 / 24.0;
    let mut sum: f64 = 0.0;
    let mut k = 4.0;
    while term.abs() > 1e-3 * f64::EPSILON * sum.abs() && k < 40.0 {
        sum += term;
        term *= -x2 / ((k + 1.0) * (k + 2.0));
        k += 2.0;
    }
    sum
}

/// Relative deviation of the small-angle pendulum from uniform acceleration,
/// `|s_pend(t) − s_quad(t)| / |s_quad(t) − s₀|`.
///
/// Both trajectories share `s₀` and the release acceleration `g·θ₀`, so the
/// ratio reduces to `|cos x − 1 + x²/2| / (x²/2)` with `x = ωt` and does not
/// depend on the amplitude.
pub fn trajectory_deviation(config: &PendulumConfig, t: f64) -> Result<f64> {
    config.validate()?;
    let limit = config.period() / 10.0;
    if !(t > 0.0 && t < limit) {
        return Err(Error::OutsideShortTime { t, limit });
    }
    let x = config.angular_frequency() * t;
    Ok(cos_quadratic_remainder(x).abs() / (0.5 * x * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::default_constants;

    fn pendulum(length: f64, angle: f64) -> PendulumConfig {
        PendulumConfig::new(length, angle, 0.0, default_constants()).unwrap()
    }

    #[test]
    fn period_examples() {
        // reference values to four decimals: 1.0031 s and 1.4186 s
        assert!((pendulum(0.25, 0.0).period() - 1.0031).abs() < 1e-4);
        assert!((pendulum(0.5, 0.0).period() - 1.4186).abs() < 1e-4);
        assert!((pendulum(0.25, 0.0).period() - 1.003033340355324).abs() < 1e-14);
        assert!((pendulum(9.81, 0.0).period() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_config() {
        let c = default_constants();
        assert!(PendulumConfig::new(0.0, 0.0, 0.0, c).is_err());
        assert!(PendulumConfig::new(-1.0, 0.0, 0.0, c).is_err());
        let err = PendulumConfig::new(1.0, 1.6, 0.0, c).unwrap_err();
        assert!(err.to_string().contains("initial_angle"));
    }

    #[test]
    fn small_angle_examples() {
        let p = pendulum(0.5, 2e-4);
        let traj = small_angle_trajectory(&p).unwrap();
        assert_eq!(traj.position(0.0), 0.5 * 2e-4);
        assert!(traj.position(p.period() / 4.0).abs() < 1e-19);

        // cos against its quadratic truncation: the gap is the quartic term
        // L·θ₀·(ωt)⁴/24 ≈ 1.6e-15 m
        let t = 1e-3;
        let w = p.angular_frequency();
        let taylor = 0.5 * 2e-4 * (1.0 - 0.5 * w * w * t * t);
        let gap = traj.position(t) - taylor;
        assert!(gap.abs() < 2e-15);
        let quartic = 0.5 * 2e-4 * (w * t).powi(4) / 24.0;
        assert!(((gap - quartic) / quartic).abs() < 1e-3);
    }

    #[test]
    fn small_angle_rejects_initial_velocity() {
        let p = PendulumConfig::new(0.5, 1e-4, 1e-3, default_constants()).unwrap();
        assert!(small_angle_trajectory(&p).is_err());
    }

    #[test]
    fn free_fall_examples() {
        let f = free_fall_trajectory(0.0, 9.81, 1.0);
        assert_eq!(f.position(1.0), -4.905);
        let still = free_fall_trajectory(0.3, 0.0, 1.0);
        assert_eq!(still.position(0.7), 0.3);
        assert_eq!(free_fall_trajectory(0.3, 2.0, 1.0).position(0.0), 0.3);
    }

    #[test]
    fn exact_equilibrium_stays_at_rest() {
        let p = pendulum(0.5, 0.0);
        let traj = exact_trajectory(&p, &Tolerances::default(), p.period()).unwrap();
        for (_, s) in traj.sample(0.0, p.period(), 101) {
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn exact_outside_horizon_is_nan() {
        let p = pendulum(0.5, 1e-3);
        let traj = exact_trajectory(&p, &Tolerances::default(), 0.1).unwrap();
        assert!(traj.position(0.2).is_nan());
        assert_eq!(traj.position(0.0), p.initial_displacement());
    }

    #[test]
    fn deviation_examples() {
        let p = pendulum(9.81 / (2.0 * PI).powi(2), 2e-4);
        assert!((p.period() - 1.0).abs() < 1e-12);
        let d = trajectory_deviation(&p, 1e-3).unwrap();
        let expected = PI * PI / 3.0 * 1e-6;
        assert!(((d - expected) / expected).abs() < 0.01, "d = {d}");

        // quadratic vanishing as t -> 0
        let d1 = trajectory_deviation(&p, 1e-4).unwrap();
        let d2 = trajectory_deviation(&p, 5e-5).unwrap();
        assert!((d1 / d2 - 4.0).abs() < 1e-6);
    }

    #[test]
    fn deviation_rejects_long_times() {
        let p = pendulum(0.5, 2e-4);
        assert!(matches!(
            trajectory_deviation(&p, p.period() / 5.0),
            Err(Error::OutsideShortTime { .. })
        ));
        assert!(trajectory_deviation(&p, 0.0).is_err());
    }

    #[test]
    fn remainder_matches_direct_evaluation_for_large_x() {
        for x in [0.4f64, 0.49, 0.51, 1.0] {
            let direct = x.cos() - 1.0 + 0.5 * x * x;
            assert!(((cos_quadratic_remainder(x) - direct) / direct).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_is_amplitude_consistent() {
        let p = pendulum(0.5, 0.1);
        let e = p.energy(0.1, 0.0);
        let expected = 9.81 * 0.5 * (1.0 - 0.1f64.cos());
        assert!(((e - expected) / expected).abs() < 1e-13);
    }
}
