//! Gravitational phases accumulated between two interferometers.
//!
//! Particle A sits at the origin and particle B at distance `d` along the
//! x-axis. Branch displacements of both particles are applied along a split
//! axis at `split_axis_angle` to that line.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::constants::{PhysicalConstants, Tolerances};
use crate::dynamics::{base_trajectory, period, PendulumConfig, TrajectoryModel};
use crate::error::{Error, Result};
use crate::interferometer::{build_branch_pair, BranchPairTrajectory, InterferometerSpec};
use crate::quadrature::{self, QuadOptions};

pub const DEFAULT_MIN_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    L,
    R,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::L, Branch::R];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentGeometry {
    pub center_separation: f64,
    pub split_axis_angle: f64,
    pub mass: f64,
    /// Guard against the 1/r blow-up; the point-mass model is meaningless below it.
    pub min_separation: f64,
}

impl ExperimentGeometry {
    pub fn new(center_separation: f64, split_axis_angle: f64, mass: f64) -> Result<Self> {
        let g = ExperimentGeometry {
            center_separation,
            split_axis_angle,
            mass,
            min_separation: DEFAULT_MIN_SEPARATION,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_min_separation(mut self, r_min: f64) -> Self {
        self.min_separation = r_min;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_separation.is_finite() && self.center_separation > 0.0) {
            return Err(Error::config(
                "geometry.center_separation",
                format!("must be > 0 (got {})", self.center_separation),
            ));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::config("geometry.mass", format!("must be > 0 (got {})", self.mass)));
        }
        if !self.split_axis_angle.is_finite() {
            return Err(Error::config("geometry.split_axis_angle", "must be finite"));
        }
        if !(self.min_separation.is_finite() && self.min_separation >= 0.0) {
            return Err(Error::config("geometry.min_separation", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Distance between points displaced by `x_a` and `x_b` along the split axis.
    pub fn distance(&self, x_a: f64, x_b: f64) -> f64 {
        let (s, c) = self.split_axis_angle.sin_cos();
        let rel = x_b - x_a;
        (self.center_separation + rel * c).hypot(rel * s)
    }

    /// Smallest branch-pair separation seen on a uniform grid plus breakpoints.
    /// Returns `(r_min, t_at_min)`.
    pub fn min_branch_distance(
        &self,
        pair_a: &BranchPairTrajectory,
        pair_b: &BranchPairTrajectory,
        t_total: f64,
    ) -> (f64, f64) {
        let n = 2000;
        let times = (0..=n)
            .map(|k| t_total * k as f64 / n as f64)
            .chain(pair_a.breakpoints().iter().copied());
        let mut best = (f64::INFINITY, 0.0);
        for t in times {
            for i in Branch::BOTH {
                for j in Branch::BOTH {
                    let r = self.distance(branch(pair_a, i).position(t), branch(pair_b, j).position(t));
                    if r < best.0 || r.is_nan() {
                        best = (r, t);
                    }
                }
            }
        }
        best
    }

    /// Rejects configurations where any pair of branches gets closer than
    /// `min_separation` during the sequence.
    pub fn check_clearance(&self, pair_a: &BranchPairTrajectory, pair_b: &BranchPairTrajectory, t_total: f64) -> Result<()> {
        self.validate()?;
        let (r, t) = self.min_branch_distance(pair_a, pair_b, t_total);
        if !(r > 0.0 && r >= self.min_separation) {
            return Err(Error::SeparationBelowMinimum {
                r,
                r_min: self.min_separation,
                t,
            });
        }
        Ok(())
    }
}

fn branch(pair: &BranchPairTrajectory, b: Branch) -> &crate::dynamics::Trajectory {
    match b {
        Branch::L => &pair.left,
        Branch::R => &pair.right,
    }
}

/// r_ij(t) between branch `i` of A and branch `j` of B.
pub fn pair_separation(
    geometry: &ExperimentGeometry,
    pair_a: &BranchPairTrajectory,
    pair_b: &BranchPairTrajectory,
    i: Branch,
    j: Branch,
    t: f64,
) -> Result<f64> {
    let r = geometry.distance(branch(pair_a, i).position(t), branch(pair_b, j).position(t));
    if !r.is_finite() {
        return Err(Error::NonFinite(format!("separation r_{i:?}{j:?} at t = {t}")));
    }
    if r < geometry.min_separation || r <= 0.0 {
        return Err(Error::SeparationBelowMinimum {
            r,
            r_min: geometry.min_separation,
            t,
        });
    }
    Ok(r)
}

/// V = −G·m²/r.
pub fn interaction_potential(mass: f64, r: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::config("r", format!("must be > 0 (got {r})")));
    }
    Ok(-(constants.gravitational_constant * mass) * mass / r)
}

/// G·m²/ħ, grouped so the tiny numerator never meets ħ unscaled.
pub fn phase_prefactor(mass: f64, constants: &PhysicalConstants) -> f64 {
    (constants.gravitational_constant * mass) * (mass / constants.reduced_planck)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub value: f64,
    pub error: f64,
}

/// φ_ij = (1/ħ)∫₀ᵗ V_ij dt′ by adaptive quadrature seeded at the schedule breakpoints.
#[allow(clippy::too_many_arguments)]
pub fn branch_phase(
    geometry: &ExperimentGeometry,
    constants: &PhysicalConstants,
    pair_a: &BranchPairTrajectory,
    pair_b: &BranchPairTrajectory,
    i: Branch,
    j: Branch,
    t_total: f64,
    tolerances: &Tolerances,
) -> Result<PhaseEstimate> {
    let k = phase_prefactor(geometry.mass, constants);
    if k == 0.0 {
        return Ok(PhaseEstimate { value: 0.0, error: 0.0 });
    }
    let failure: Cell<Option<Error>> = Cell::new(None);
    let integrand = |t: f64| match pair_separation(geometry, pair_a, pair_b, i, j, t) {
        Ok(r) => 1.0 / r,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let mut breakpoints = pair_a.breakpoints().to_vec();
    breakpoints.extend_from_slice(pair_b.breakpoints());
    let result = quadrature::integrate(
        integrand,
        0.0,
        t_total,
        &breakpoints,
        QuadOptions {
            rel_tol: tolerances.quad_rel_tol,
            abs_tol: 0.0,
            max_subdivisions: tolerances.max_subdivisions,
        },
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let r = result?;
    Ok(PhaseEstimate {
        value: -k * r.value,
        error: k * r.error,
    })
}

/// The four branch-pair phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatrix {
    pub phi_ll: f64,
    pub phi_lr: f64,
    pub phi_rl: f64,
    pub phi_rr: f64,
    /// Sum of the four quadrature error estimates.
    pub error_estimate: f64,
}

impl PhaseMatrix {
    pub fn from_phases(phi_ll: f64, phi_lr: f64, phi_rl: f64, phi_rr: f64) -> Self {
        PhaseMatrix {
            phi_ll,
            phi_lr,
            phi_rl,
            phi_rr,
            error_estimate: 0.0,
        }
    }

    pub fn get(&self, i: Branch, j: Branch) -> f64 {
        match (i, j) {
            (Branch::L, Branch::L) => self.phi_ll,
            (Branch::L, Branch::R) => self.phi_lr,
            (Branch::R, Branch::L) => self.phi_rl,
            (Branch::R, Branch::R) => self.phi_rr,
        }
    }

    /// Δφ = φ_LL + φ_RR − φ_LR − φ_RL.
    pub fn entangling_phase(&self) -> f64 {
        (self.phi_ll + self.phi_rr) - (self.phi_lr + self.phi_rl)
    }

    /// Two-term form (1/ħ)∫(V_LR − V_LL) dt = φ_LR − φ_LL.
    pub fn two_term_phase(&self) -> f64 {
        self.phi_lr - self.phi_ll
    }

    /// Δφ divided by the two-term form; NaN when the latter vanishes.
    pub fn convention_ratio(&self) -> f64 {
        let two = self.two_term_phase();
        if two == 0.0 {
            f64::NAN
        } else {
            self.entangling_phase() / two
        }
    }

    /// The matrix seen with particle labels A and B exchanged.
    pub fn swapped(&self) -> Self {
        PhaseMatrix {
            phi_lr: self.phi_rl,
            phi_rl: self.phi_lr,
            ..*self
        }
    }
}

pub fn phase_matrix(
    geometry: &ExperimentGeometry,
    constants: &PhysicalConstants,
    pair_a: &BranchPairTrajectory,
    pair_b: &BranchPairTrajectory,
    t_total: f64,
    tolerances: &Tolerances,
) -> Result<PhaseMatrix> {
    geometry.check_clearance(pair_a, pair_b, t_total)?;
    let phase = |i, j| branch_phase(geometry, constants, pair_a, pair_b, i, j, t_total, tolerances);
    let ll = phase(Branch::L, Branch::L)?;
    let lr = phase(Branch::L, Branch::R)?;
    let rl = phase(Branch::R, Branch::L)?;
    let rr = phase(Branch::R, Branch::R)?;
    Ok(PhaseMatrix {
        phi_ll: ll.value,
        phi_lr: lr.value,
        phi_rl: rl.value,
        phi_rr: rr.value,
        error_estimate: ll.error + lr.error + rl.error + rr.error,
    })
}

/// Phase matrix for two identical interferometers released together under
/// `model`; the common base motion is shared by both particles.
pub fn protocol_phase_matrix(
    model: TrajectoryModel,
    pendulum: &PendulumConfig,
    spec: &InterferometerSpec,
    geometry: &ExperimentGeometry,
    tolerances: &Tolerances,
) -> Result<PhaseMatrix> {
    let spec = InterferometerSpec {
        dynamics_model: model,
        ..spec.clone()
    };
    let base = base_trajectory(model, pendulum, tolerances, spec.total_time)?;
    let pair = build_branch_pair(&spec, pendulum, base)?;
    phase_matrix(geometry, &pendulum.constants, &pair, &pair, spec.total_time, tolerances)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedPhaseComparison {
    pub free: PhaseMatrix,
    pub pendulum: PhaseMatrix,
    pub delta_phi_free: f64,
    pub delta_phi_pend: f64,
    /// (Δφ_pend − Δφ_free) / Δφ_free.
    pub relative_correction: f64,
    /// Quadrature error bound on `relative_correction`.
    pub relative_correction_error: f64,
}

impl ConstrainedPhaseComparison {
    /// relative_correction / (t/T)².
    pub fn transfer_coefficient(&self, t: f64, period: f64) -> f64 {
        self.relative_correction / (t / period).powi(2)
    }
}

/// Pendulum model used when the spec itself asks for free fall.
fn pendulum_model(spec: &InterferometerSpec) -> TrajectoryModel {
    match spec.dynamics_model {
        TrajectoryModel::FreeFall => TrajectoryModel::SmallAngleClosedForm,
        m => m,
    }
}

/// Both phase matrices without the resolvability check.
pub fn free_and_constrained_phases(
    pendulum: &PendulumConfig,
    spec: &InterferometerSpec,
    geometry: &ExperimentGeometry,
    tolerances: &Tolerances,
) -> Result<(PhaseMatrix, PhaseMatrix)> {
    let free = protocol_phase_matrix(TrajectoryModel::FreeFall, pendulum, spec, geometry, tolerances)?;
    let pend = protocol_phase_matrix(pendulum_model(spec), pendulum, spec, geometry, tolerances)?;
    Ok((free, pend))
}

pub fn entangling_phase_constrained_vs_free(
    pendulum: &PendulumConfig,
    spec: &InterferometerSpec,
    geometry: &ExperimentGeometry,
    tolerances: &Tolerances,
) -> Result<ConstrainedPhaseComparison> {
    pendulum.validate()?;
    geometry.validate()?;
    let limit = period(pendulum) / 10.0;
    if !(spec.total_time < limit) {
        return Err(Error::OutsideShortTime {
            t: spec.total_time,
            limit,
        });
    }
    let (free, pend) = free_and_constrained_phases(pendulum, spec, geometry, tolerances)?;
    compare(free, pend)
}

pub(crate) fn compare(free: PhaseMatrix, pend: PhaseMatrix) -> Result<ConstrainedPhaseComparison> {
    let delta_phi_free = free.entangling_phase();
    let delta_phi_pend = pend.entangling_phase();
    let error = free.error_estimate.max(pend.error_estimate);
    if !(delta_phi_free.abs() > 10.0 * error) {
        return Err(Error::UnresolvablePhase {
            phase: delta_phi_free,
            error,
        });
    }
    Ok(ConstrainedPhaseComparison {
        free,
        pendulum: pend,
        delta_phi_free,
        delta_phi_pend,
        relative_correction: (delta_phi_pend - delta_phi_free) / delta_phi_free,
        relative_correction_error: (free.error_estimate + pend.error_estimate) / delta_phi_free.abs(),
    })
}
