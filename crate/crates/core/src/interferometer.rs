//! Spin-dependent branch trajectories for a single Stern–Gerlach sequence.
//!
//! The spin force produces a relative acceleration `±a` between the two
//! branches, switched by a piecewise-constant schedule. Each branch sits at
//! `base ± δ/2`, where `δ(t)` is the separation profile.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{PendulumConfig, Trajectory, TrajectoryModel};
use crate::error::{Error, Result};

/// Angles below this are treated as within the small-angle regime.
pub const SMALL_ANGLE_LIMIT: f64 = 1e-2;

const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment {
    pub duration: f64,
    /// +1, −1, or 0 (common-path dwell).
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerSpec {
    pub total_time: f64,
    pub spin_acceleration: f64,
    pub schedule: Vec<ScheduleSegment>,
    pub dynamics_model: TrajectoryModel,
}

/// Split, flip, flip, recombine with equal quarter durations.
pub const SYMMETRIC_SCHEDULE: [(f64, i8); 4] = [(0.25, 1), (0.25, -1), (0.25, -1), (0.25, 1)];

impl InterferometerSpec {
    pub fn new(
        total_time: f64,
        spin_acceleration: f64,
        schedule: Vec<ScheduleSegment>,
        dynamics_model: TrajectoryModel,
    ) -> Result<Self> {
        let spec = InterferometerSpec {
            total_time,
            spin_acceleration,
            schedule,
            dynamics_model,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from schedule fractions of `total_time`.
    pub fn from_fractions(
        total_time: f64,
        spin_acceleration: f64,
        fractions: &[(f64, i8)],
        dynamics_model: TrajectoryModel,
    ) -> Result<Self> {
        let schedule = fractions
            .iter()
            .map(|&(f, sign)| ScheduleSegment {
                duration: f * total_time,
                sign,
            })
            .collect();
        Self::new(total_time, spin_acceleration, schedule, dynamics_model)
    }

    pub fn symmetric(total_time: f64, spin_acceleration: f64, dynamics_model: TrajectoryModel) -> Result<Self> {
        Self::from_fractions(total_time, spin_acceleration, &SYMMETRIC_SCHEDULE, dynamics_model)
    }

    /// Chooses `a` so that the free-particle separation peaks at `separation`.
    pub fn with_target_separation(
        total_time: f64,
        separation: f64,
        fractions: &[(f64, i8)],
        dynamics_model: TrajectoryModel,
    ) -> Result<Self> {
        if !(separation.is_finite() && separation >= 0.0) {
            return Err(Error::config("interferometer.target_separation", "must be finite and >= 0"));
        }
        let unit = Self::from_fractions(total_time, 1.0, fractions, dynamics_model)?;
        let peak = SpinProfile::new(&unit, SpinResponse::FreeParticle).max_abs_displacement();
        if peak == 0.0 {
            return Err(Error::config(
                "interferometer.schedule",
                "has no accelerating segment, so a target separation cannot be reached",
            ));
        }
        Ok(InterferometerSpec {
            spin_acceleration: separation / peak,
            ..unit
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(Error::config("interferometer.total_time", "must be finite and > 0"));
        }
        if !self.spin_acceleration.is_finite() {
            return Err(Error::config("interferometer.spin_acceleration", "must be finite"));
        }
        if self.schedule.is_empty() {
            return Err(Error::config("interferometer.schedule", "must contain at least one segment"));
        }
        for seg in &self.schedule {
            if !(seg.duration.is_finite() && seg.duration > 0.0) {
                return Err(Error::config("interferometer.schedule", "segment durations must be > 0"));
            }
            if !matches!(seg.sign, -1..=1) {
                return Err(Error::config("interferometer.schedule", "segment signs must be -1, 0 or +1"));
            }
        }
        let sum: f64 = self.schedule.iter().map(|s| s.duration).sum();
        if (sum - self.total_time).abs() > 1e-12 * self.total_time {
            return Err(Error::config(
                "interferometer.schedule",
                format!("durations sum to {sum} s, expected total_time {} s", self.total_time),
            ));
        }
        let (dx, dv) = SpinProfile::new(self, SpinResponse::FreeParticle).closure_residual();
        if dx > CLOSURE_TOL || dv > CLOSURE_TOL {
            return Err(Error::NonClosingSchedule(format!(
                "relative position residual {dx:e}, relative velocity residual {dv:e}"
            )));
        }
        Ok(())
    }

    /// Segment boundaries strictly inside `(0, total_time)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.schedule.len());
        for seg in &self.schedule[..self.schedule.len() - 1] {
            t += seg.duration;
            out.push(t);
        }
        out
    }

    /// Peak separation of the free-particle profile.
    pub fn max_separation(&self) -> f64 {
        SpinProfile::new(self, SpinResponse::FreeParticle).max_abs_displacement()
    }
}

/// `a = μ·∂ₓB / m`.
pub fn magnetic_acceleration(magnetic_moment: f64, field_gradient: f64, mass: f64) -> f64 {
    magnetic_moment * field_gradient / mass
}

/// ½·a·t².
pub fn branch_separation(a: f64, t: f64) -> f64 {
    0.5 * a * t * t
}

/// Pendulum angle needed for an arc displacement of `separation`.
pub fn required_angle(separation: f64, length: f64) -> f64 {
    separation / length
}

pub fn is_small_angle(angle: f64) -> bool {
    angle.abs() < SMALL_ANGLE_LIMIT
}

/// How the branch separation responds to the spin force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinResponse {
    /// δ̈ = a(t)
    FreeParticle,
    /// δ̈ = −ω²δ + a(t), the linearised pendulum restoring force.
    Harmonic { angular_frequency: f64 },
}

impl SpinResponse {
    pub fn for_model(model: TrajectoryModel, pendulum: &PendulumConfig) -> Self {
        if model.is_pendulum() {
            SpinResponse::Harmonic {
                angular_frequency: pendulum.angular_frequency(),
            }
        } else {
            SpinResponse::FreeParticle
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Knot {
    t0: f64,
    duration: f64,
    accel: f64,
    x0: f64,
    v0: f64,
}

impl Knot {
    fn state(&self, response: SpinResponse, u: f64) -> (f64, f64) {
        let (x0, v0, c) = (self.x0, self.v0, self.accel);
        match response {
            SpinResponse::FreeParticle => (x0 + u * (v0 + 0.5 * c * u), v0 + c * u),
            SpinResponse::Harmonic { angular_frequency: w } => {
                let (s, co) = (w * u).sin_cos();
                let half = (0.5 * w * u).sin();
                // 1 − cos(wu) written as 2 sin²(wu/2) to avoid cancellation
                let x = x0 * co + v0 * s / w + c * 2.0 * half * half / (w * w);
                let v = -x0 * w * s + v0 * co + c * s / w;
                (x, v)
            }
        }
    }

    /// Times in `(0, duration)` where the velocity vanishes.
    fn stationary_points(&self, response: SpinResponse) -> Vec<f64> {
        match response {
            SpinResponse::FreeParticle => {
                if self.accel == 0.0 {
                    return Vec::new();
                }
                let u = -self.v0 / self.accel;
                if u > 0.0 && u < self.duration {
                    vec![u]
                } else {
                    Vec::new()
                }
            }
            SpinResponse::Harmonic { angular_frequency: w } => {
                // v(u) = v0·cos(wu) + (c/w − x0·w)·sin(wu)
                let b = self.accel / w - self.x0 * w;
                let phase = (-self.v0).atan2(b);
                let mut out = Vec::new();
                let mut theta = phase.rem_euclid(std::f64::consts::PI);
                while theta / w < self.duration {
                    if theta > 0.0 {
                        out.push(theta / w);
                    }
                    theta += std::f64::consts::PI;
                }
                out
            }
        }
    }
}

/// Separation profile δ(t) between the two branches.
#[derive(Debug, Clone)]
pub struct SpinProfile {
    response: SpinResponse,
    knots: Vec<Knot>,
    end: (f64, f64),
    total_time: f64,
}

impl SpinProfile {
    pub fn new(spec: &InterferometerSpec, response: SpinResponse) -> Self {
        let mut knots = Vec::with_capacity(spec.schedule.len());
        let (mut t, mut x, mut v) = (0.0, 0.0, 0.0);
        for seg in &spec.schedule {
            let knot = Knot {
                t0: t,
                duration: seg.duration,
                accel: f64::from(seg.sign) * spec.spin_acceleration,
                x0: x,
                v0: v,
            };
            (x, v) = knot.state(response, seg.duration);
            t += seg.duration;
            knots.push(knot);
        }
        SpinProfile {
            response,
            knots,
            end: (x, v),
            total_time: spec.total_time,
        }
    }

    pub fn response(&self) -> SpinResponse {
        self.response
    }

    fn state(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 || self.knots.is_empty() {
            return (0.0, 0.0);
        }
        if t >= self.total_time {
            return self.end;
        }
        let idx = self.knots.partition_point(|k| k.t0 <= t).saturating_sub(1);
        let knot = &self.knots[idx];
        knot.state(self.response, t - knot.t0)
    }

    /// δ(t); held at the end state after the sequence.
    pub fn displacement(&self, t: f64) -> f64 {
        self.state(t).0
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.state(t).1
    }

    pub fn end_state(&self) -> (f64, f64) {
        self.end
    }

    pub fn max_abs_displacement(&self) -> f64 {
        let mut best: f64 = 0.0;
        for knot in &self.knots {
            best = best.max(knot.x0.abs());
            for u in knot.stationary_points(self.response) {
                best = best.max(knot.state(self.response, u).0.abs());
            }
        }
        best.max(self.end.0.abs())
    }

    pub fn max_abs_velocity(&self) -> f64 {
        // velocity extrema sit at knots for piecewise-constant forcing when
        // the sequence is short compared with the oscillation period
        let mut best: f64 = self.knots.iter().map(|k| k.v0.abs()).fold(0.0, f64::max);
        best = best.max(self.end.1.abs());
        best
    }

    /// End-of-sequence (position, velocity) residuals relative to the peaks.
    pub fn closure_residual(&self) -> (f64, f64) {
        let rel = |value: f64, scale: f64| if scale == 0.0 { value.abs() } else { value.abs() / scale };
        (
            rel(self.end.0, self.max_abs_displacement()),
            rel(self.end.1, self.max_abs_velocity()),
        )
    }
}

#[derive(Debug, Clone)]
pub struct BranchPairTrajectory {
    pub left: Trajectory,
    pub right: Trajectory,
    pub max_separation: f64,
    /// Relative end-of-sequence (position, velocity) mismatch between branches.
    pub closure_residual: (f64, f64),
    profile: Arc<SpinProfile>,
    total_time: f64,
    breakpoints: Vec<f64>,
}

impl BranchPairTrajectory {
    /// Signed separation `left(t) − right(t)`.
    pub fn separation(&self, t: f64) -> f64 {
        self.left.position(t) - self.right.position(t)
    }

    pub fn profile(&self) -> &SpinProfile {
        &self.profile
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// Places the two branches at `base ± δ/2`.
///
/// The separation profile depends only on the schedule and on the response
/// model selected by `spec.dynamics_model`, never on `base`. Under a
/// pendulum model the restoring force leaves an O((ωt)²) closure residual.
pub fn build_branch_pair(
    spec: &InterferometerSpec,
    pendulum: &PendulumConfig,
    base: Trajectory,
) -> Result<BranchPairTrajectory> {
    spec.validate()?;
    let profile = Arc::new(SpinProfile::new(spec, SpinResponse::for_model(spec.dynamics_model, pendulum)));
    let base = Arc::new(base);
    let branch = |weight| Trajectory::Displaced {
        base: Arc::clone(&base),
        profile: Arc::clone(&profile),
        weight,
    };
    Ok(BranchPairTrajectory {
        left: branch(0.5),
        right: branch(-0.5),
        max_separation: profile.max_abs_displacement(),
        closure_residual: profile.closure_residual(),
        total_time: spec.total_time,
        breakpoints: spec.breakpoints(),
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::default_constants;
    use crate::dynamics::{free_fall_trajectory, small_angle_trajectory};

    fn pendulum() -> PendulumConfig {
        PendulumConfig::new(0.5, 2e-4, 0.0, default_constants()).unwrap()
    }

    #[test]
    fn separation_formula() {
        assert_eq!(branch_separation(0.0, 3.0), 0.0);
        assert_eq!(branch_separation(5.0, 0.0), 0.0);
        assert_eq!(branch_separation(2.0, 3.0), 9.0);
    }

    #[test]
    fn opening_segment_reaches_100_microns() {
        let t = 1e-3;
        let spec = InterferometerSpec::with_target_separation(t, 1e-4, &SYMMETRIC_SCHEDULE, TrajectoryModel::FreeFall)
            .unwrap();
        let profile = SpinProfile::new(&spec, SpinResponse::FreeParticle);
        let opening = branch_separation(spec.spin_acceleration, t / 4.0);
        assert!((profile.displacement(t / 4.0) - opening).abs() < 1e-20);
        assert!((profile.displacement(t / 2.0) - 1e-4).abs() < 1e-18);
        assert!((opening - 5e-5).abs() < 1e-18);
    }

    #[test]
    fn angle_examples() {
        assert!((required_angle(1e-4, 0.5) - 2e-4).abs() < 1e-20);
        assert_eq!(required_angle(0.0, 0.5), 0.0);
        let theta = required_angle(0.5, 0.5);
        assert_eq!(theta, 1.0);
        assert!(!is_small_angle(theta));
        assert!(is_small_angle(2e-4));
    }

    #[test]
    fn symmetric_schedule_peak_and_closure() {
        let (t, a) = (1e-3, 1600.0);
        let spec = InterferometerSpec::symmetric(t, a, TrajectoryModel::FreeFall).unwrap();
        let pair = build_branch_pair(&spec, &pendulum(), free_fall_trajectory(0.0, 0.0, t)).unwrap();
        let expected = a * t * t / 16.0;
        assert!((pair.max_separation - expected).abs() < 1e-15 * expected);
        assert!((pair.separation(t / 2.0) - expected).abs() < 1e-15 * expected);
        assert!(pair.separation(t).abs() < 1e-12 * expected);
        assert!(pair.profile().velocity(t).abs() < 1e-12 * a * t / 4.0);
        assert_eq!(pair.left.position(0.0), pair.right.position(0.0));
    }

    #[test]
    fn zero_acceleration_leaves_base_untouched() {
        let t = 1e-3;
        let spec = InterferometerSpec::symmetric(t, 0.0, TrajectoryModel::FreeFall).unwrap();
        let base = free_fall_trajectory(1e-4, 2e-3, t);
        let pair = build_branch_pair(&spec, &pendulum(), base.clone()).unwrap();
        for k in 0..=10 {
            let tk = t * k as f64 / 10.0;
            assert_eq!(pair.left.position(tk), base.position(tk));
            assert_eq!(pair.right.position(tk), base.position(tk));
        }
        assert_eq!(pair.max_separation, 0.0);
    }

    #[test]
    fn separation_is_base_independent() {
        let p = pendulum();
        let t = 1e-3;
        let spec = InterferometerSpec::symmetric(t, 1600.0, TrajectoryModel::SmallAngleClosedForm).unwrap();
        let on_pendulum = build_branch_pair(&spec, &p, small_angle_trajectory(&p).unwrap()).unwrap();
        let on_free = build_branch_pair(
            &spec,
            &p,
            free_fall_trajectory(p.initial_displacement(), p.effective_acceleration(), t),
        )
        .unwrap();
        for k in 0..=100 {
            let tk = t * k as f64 / 100.0;
            let a = on_pendulum.separation(tk);
            let b = on_free.separation(tk);
            assert!((a - b).abs() <= 1e-12 * on_free.max_separation, "t = {tk}");
        }
    }

    #[test]
    fn rejects_non_closing_schedule() {
        let r = InterferometerSpec::from_fractions(1e-3, 10.0, &[(0.5, 1), (0.5, -1)], TrajectoryModel::FreeFall);
        assert!(matches!(r, Err(Error::NonClosingSchedule(_))));
    }

    #[test]
    fn rejects_duration_mismatch() {
        let schedule = vec![
            ScheduleSegment { duration: 0.25e-3, sign: 1 },
            ScheduleSegment { duration: 0.25e-3, sign: -1 },
        ];
        let err = InterferometerSpec::new(1e-3, 1.0, schedule, TrajectoryModel::FreeFall).unwrap_err();
        assert!(err.to_string().contains("schedule"));
    }

    #[test]
    fn dwell_segment_keeps_separation() {
        let fr = [(0.2, 1), (0.2, -1), (0.2, 0), (0.2, -1), (0.2, 1)];
        let spec = InterferometerSpec::from_fractions(1.0, 1.0, &fr, TrajectoryModel::FreeFall).unwrap();
        let profile = SpinProfile::new(&spec, SpinResponse::FreeParticle);
        let held = profile.displacement(0.4);
        assert!((profile.displacement(0.5) - held).abs() < 1e-15);
        assert!((held - 0.04).abs() < 1e-15);
    }

    #[test]
    fn harmonic_response_is_shortened_by_restoring_force() {
        let p = pendulum();
        let t = 1e-3;
        let spec = InterferometerSpec::symmetric(t, 1600.0, TrajectoryModel::FreeFall).unwrap();
        let free = SpinProfile::new(&spec, SpinResponse::FreeParticle);
        let w = p.angular_frequency();
        let harmonic = SpinProfile::new(&spec, SpinResponse::Harmonic { angular_frequency: w });
        // opening segment: δ = a(1 − cos ωt)/ω² = ½at²(1 − (ωt)²/12 + …)
        let u = t / 4.0;
        let ratio = harmonic.displacement(u) / free.displacement(u);
        let x = w * u;
        assert!((ratio - (1.0 - x * x / 12.0 + x.powi(4) / 360.0)).abs() < 1e-15);
        // closure residual is O((ωt)^2), not zero
        let (dx, _) = harmonic.closure_residual();
        assert!(dx > 0.0 && dx < (w * t).powi(2));
        let peak_ratio = harmonic.max_abs_displacement() / free.max_abs_displacement();
        assert!(peak_ratio < 1.0 && peak_ratio > 1.0 - (w * t).powi(2));
    }
}
