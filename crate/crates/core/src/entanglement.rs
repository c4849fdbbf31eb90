//! Two-qubit spin state after recombination, visibility, and the
//! negativity witness.

use std::f64::consts::PI;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gravity_phase::PhaseMatrix;

/// Amplitudes ordered LL, LR, RL, RR (first letter: particle A).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    pub amplitudes: [Complex64; 4],
}

impl TwoQubitState {
    /// Normalises `amplitudes`; `None` for the zero vector.
    pub fn new(amplitudes: [Complex64; 4]) -> Option<Self> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return None;
        }
        Some(TwoQubitState {
            amplitudes: amplitudes.map(|c| c / norm),
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn density_matrix(&self) -> Matrix4<Complex64> {
        Matrix4::from_fn(|r, c| self.amplitudes[r] * self.amplitudes[c].conj())
    }
}

/// c_ij = e^{iφ_ij}/2.
pub fn build_state(phases: &PhaseMatrix) -> TwoQubitState {
    let amp = |phi: f64| Complex64::from_polar(0.5, phi);
    TwoQubitState {
        amplitudes: [
            amp(phases.phi_ll),
            amp(phases.phi_lr),
            amp(phases.phi_rl),
            amp(phases.phi_rr),
        ],
    }
}

/// Transpose of the second qubit's indices.
pub fn partial_transpose(rho: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| {
        let (a, b) = (r / 2, r % 2);
        let (a2, b2) = (c / 2, c % 2);
        rho[(2 * a + b2, 2 * a2 + b)]
    })
}

/// Sum of |λ| over the negative eigenvalues of ρ^{T_B}.
pub fn negativity(state: &TwoQubitState) -> f64 {
    let pt = partial_transpose(&state.density_matrix());
    SymmetricEigen::new(pt)
        .eigenvalues
        .iter()
        .filter(|&&l| l < 0.0)
        .fold(0.0, |acc, l| acc - l)
}

/// V = cos Δφ.
pub fn visibility(delta_phi: f64) -> f64 {
    delta_phi.cos()
}

/// δφ = (π²/3)·Δφ_free·(t/T)².
pub fn phase_correction(delta_phi_free: f64, t: f64, period: f64) -> f64 {
    let ratio = t / period;
    PI * PI / 3.0 * delta_phi_free * ratio * ratio
}

pub fn apply_decoherence(v: f64, gamma: f64, t: f64) -> f64 {
    v * (-gamma * t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    pub delta_phi_free: f64,
    pub phase_correction: f64,
    pub v_free: f64,
    pub v_pend: f64,
    /// V_free − sin(Δφ_free)·δφ.
    pub v_first_order: f64,
    /// (π²/3)|Δφ_free|(t/T)².
    pub bound: f64,
    pub gamma: f64,
    pub v_decohered: f64,
    pub time: f64,
}

impl VisibilityResult {
    /// V_pend − V_free evaluated as −2·sin(Δφ + δφ/2)·sin(δφ/2).
    pub fn shift(&self) -> f64 {
        let dphi = self.phase_correction;
        -2.0 * (self.delta_phi_free + 0.5 * dphi).sin() * (0.5 * dphi).sin()
    }

    /// |V_pend − first-order expansion|.
    pub fn expansion_residual(&self) -> f64 {
        let linear = -self.delta_phi_free.sin() * self.phase_correction;
        (self.shift() - linear).abs()
    }

    pub fn within_bound(&self) -> bool {
        self.shift().abs() <= self.bound
    }

    pub fn with_decoherence(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self.v_decohered = apply_decoherence(self.v_pend, gamma, self.time);
        self
    }
}

pub fn corrected_visibility(delta_phi_free: f64, t: f64, period: f64) -> VisibilityResult {
    let dphi = phase_correction(delta_phi_free, t, period);
    let v_free = visibility(delta_phi_free);
    let v_pend = visibility(delta_phi_free + dphi);
    let ratio = t / period;
    VisibilityResult {
        delta_phi_free,
        phase_correction: dphi,
        v_free,
        v_pend,
        v_first_order: v_free - delta_phi_free.sin() * dphi,
        bound: PI * PI / 3.0 * delta_phi_free.abs() * ratio * ratio,
        gamma: 0.0,
        v_decohered: v_pend,
        time: t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(ll: f64, lr: f64, rl: f64, rr: f64) -> TwoQubitState {
        build_state(&PhaseMatrix::from_phases(ll, lr, rl, rr))
    }

    #[test]
    fn product_state() {
        let s = state(0.0, 0.0, 0.0, 0.0);
        for c in s.amplitudes {
            assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-16);
        }
        assert!(negativity(&s).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_entangled() {
        let s = state(0.0, 0.0, 0.0, PI);
        assert!((negativity(&s) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn global_phase_is_irrelevant() {
        let a = negativity(&state(0.1, 0.7, -0.3, 1.1));
        let b = negativity(&state(2.1, 2.7, 1.7, 3.1));
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let s = TwoQubitState::new([
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.4),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.1, -0.6),
        ])
        .unwrap();
        let rho = s.density_matrix();
        assert_eq!(partial_transpose(&partial_transpose(&rho)), rho);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert!(TwoQubitState::new([Complex64::new(0.0, 0.0); 4]).is_none());
    }

    #[test]
    fn visibility_examples() {
        assert_eq!(visibility(0.0), 1.0);
        assert!(visibility(PI / 2.0).abs() < 1e-16);
        assert_eq!(visibility(PI), -1.0);
    }

    #[test]
    fn phase_correction_examples() {
        assert!((phase_correction(1.0, 1e-3, 1.0) - 3.2899e-6).abs() < 1e-10);
        assert_eq!(phase_correction(1.0, 0.0, 1.0), 0.0);
        assert!((phase_correction(1.0, 1e-4, 1.0) - 3.2899e-8).abs() < 1e-12);
    }

    #[test]
    fn corrected_visibility_examples() {
        let r = corrected_visibility(1.0, 1e-3, 1.0);
        assert!((r.v_pend - r.v_free).abs() <= 3.29e-6);
        assert!(r.within_bound());
        assert!(r.expansion_residual() <= 0.5 * r.phase_correction.powi(2));

        let z = corrected_visibility(0.0, 1e-3, 1.0);
        assert_eq!(z.v_pend, 1.0);
        assert_eq!(z.v_free, 1.0);
        assert_eq!(z.shift(), 0.0);
    }

    #[test]
    fn decoherence_examples() {
        assert_eq!(apply_decoherence(0.8, 0.0, 1.0), 0.8);
        assert!((apply_decoherence(0.8, 2f64.ln(), 1.0) - 0.4).abs() < 1e-15);
        assert!((apply_decoherence(1.0, 1e3, 1e-3) - 0.36787944117144233).abs() < 1e-15);
        let r = corrected_visibility(0.5, 1e-3, 1.0).with_decoherence(1e3);
        assert!((r.v_decohered - r.v_pend * (-1.0f64).exp()).abs() < 1e-15);
    }
}
