//! End-to-end evaluation of one protocol configuration.

use serde::Serialize;

use crate::config::{ResolvedConfig, RunConfig};
use crate::dynamics::{period, trajectory_deviation};
use crate::entanglement::{build_state, corrected_visibility, negativity, visibility, apply_decoherence, VisibilityResult};
use crate::error::{Error, Result};
use crate::gravity_phase::{compare, free_and_constrained_phases, PhaseMatrix};
use crate::noise::{regime_report, RegimeReport};

#[derive(Debug, Clone, Serialize)]
pub struct PhaseSummary {
    pub phi_ll: f64,
    pub phi_lr: f64,
    pub phi_rl: f64,
    pub phi_rr: f64,
    pub entangling_phase: f64,
    pub two_term_phase: f64,
    pub convention_ratio: Option<f64>,
    pub error_estimate: f64,
}

impl From<&PhaseMatrix> for PhaseSummary {
    fn from(m: &PhaseMatrix) -> Self {
        let ratio = m.convention_ratio();
        PhaseSummary {
            phi_ll: m.phi_ll,
            phi_lr: m.phi_lr,
            phi_rl: m.phi_rl,
            phi_rr: m.phi_rr,
            entangling_phase: m.entangling_phase(),
            two_term_phase: m.two_term_phase(),
            convention_ratio: ratio.is_finite().then_some(ratio),
            error_estimate: m.error_estimate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolResult {
    pub period: f64,
    pub total_time: f64,
    pub spin_acceleration: f64,
    pub max_separation: f64,
    pub phases_free: PhaseSummary,
    pub phases_pend: PhaseSummary,
    pub delta_phi_free: f64,
    pub delta_phi_pend: f64,
    /// Absent when Δφ_free does not clear ten times the quadrature error.
    pub relative_correction: Option<f64>,
    pub relative_correction_error: Option<f64>,
    /// Quadrature error on Δφ, summed over both dynamics models.
    pub phase_error_estimate: f64,
    pub v_free: f64,
    /// cos(Δφ_pend) from the simulated pendulum phase.
    pub v_pend: f64,
    pub v_pend_decohered: f64,
    /// Closed-form (π²/3)(t/T)² correction applied to Δφ_free.
    pub analytic_visibility: VisibilityResult,
    pub visibility_bound: f64,
    pub negativity_free: f64,
    pub negativity_pend: f64,
    pub trajectory_deviation: Option<f64>,
    pub thermal_rms: f64,
    pub regime: RegimeReport,
    pub notes: Vec<String>,
}

pub fn simulate(config: &RunConfig) -> Result<ProtocolResult> {
    evaluate(&config.resolve()?)
}

pub fn evaluate(r: &ResolvedConfig) -> Result<ProtocolResult> {
    let t = r.spec.total_time;
    let t_period = period(&r.pendulum);
    let mut notes = Vec::new();

    let (free, pend) = free_and_constrained_phases(&r.pendulum, &r.spec, &r.geometry, &r.tolerances)?;
    let delta_phi_free = free.entangling_phase();
    let delta_phi_pend = pend.entangling_phase();

    let (relative_correction, relative_correction_error) = match compare(free, pend) {
        Ok(c) => (Some(c.relative_correction), Some(c.relative_correction_error)),
        Err(e @ Error::UnresolvablePhase { .. }) => {
            notes.push(format!("relative correction not reported: {e}"));
            (None, None)
        }
        Err(e) => return Err(e),
    };

    let trajectory_deviation = match trajectory_deviation(&r.pendulum, t) {
        Ok(d) => Some(d),
        Err(e) => {
            notes.push(format!("trajectory deviation not reported: {e}"));
            None
        }
    };

    let analytic_visibility = corrected_visibility(delta_phi_free, t, t_period).with_decoherence(r.decoherence_rate);
    let v_pend = visibility(delta_phi_pend);
    let regime = regime_report(&r.pendulum, &r.spec, &r.noise, &r.thresholds);

    Ok(ProtocolResult {
        period: t_period,
        total_time: t,
        spin_acceleration: r.spec.spin_acceleration,
        max_separation: r.spec.max_separation(),
        phases_free: (&free).into(),
        phases_pend: (&pend).into(),
        delta_phi_free,
        delta_phi_pend,
        relative_correction,
        relative_correction_error,
        phase_error_estimate: free.error_estimate + pend.error_estimate,
        v_free: visibility(delta_phi_free),
        v_pend,
        v_pend_decohered: apply_decoherence(v_pend, r.decoherence_rate, t),
        visibility_bound: analytic_visibility.bound,
        analytic_visibility,
        negativity_free: negativity(&build_state(&free)),
        negativity_pend: negativity(&build_state(&pend)),
        trajectory_deviation,
        thermal_rms: regime.thermal_rms,
        regime,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_runs() {
        let r = simulate(&RunConfig::reference()).unwrap();
        let rc = r.relative_correction.unwrap();
        assert!(rc.abs() <= 3.3e-6, "rc = {rc}");
        assert!(rc < 0.0);
        assert!(r.negativity_pend > 0.0);
        assert!(r.delta_phi_free > 0.0);
        assert!((r.v_pend - r.v_free).abs() <= r.visibility_bound);
        assert!(r.notes.is_empty(), "{:?}", r.notes);
    }

    #[test]
    fn no_split_means_no_entanglement() {
        let mut c = RunConfig::reference();
        c.interferometer.target_separation = None;
        c.interferometer.spin_acceleration = Some(0.0);
        let r = simulate(&c).unwrap();
        assert_eq!(r.delta_phi_free, 0.0);
        assert_eq!(r.delta_phi_pend, 0.0);
        assert!(r.negativity_pend.abs() < 1e-15);
        assert!(r.relative_correction.is_none());
        assert_eq!(r.notes.len(), 1);
    }
}
