//! Physical constants and numerical tolerances shared by every module.
//!
//! All quantities are SI and stored as `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_G: f64 = 6.674e-11;
pub const DEFAULT_HBAR: f64 = 1.055e-34;
pub const DEFAULT_K_B: f64 = 1.381e-23;
pub const DEFAULT_LOCAL_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalConstants {
    /// Newton's constant, m³·kg⁻¹·s⁻².
    pub gravitational_constant: f64,
    /// ħ, J·s.
    pub reduced_planck: f64,
    /// k_B, J·K⁻¹.
    pub boltzmann: f64,
    /// g, m·s⁻².
    pub local_gravity: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        default_constants()
    }
}

/// Standard reference values used unless a configuration overrides them.
pub fn default_constants() -> PhysicalConstants {
    PhysicalConstants {
        gravitational_constant: DEFAULT_G,
        reduced_planck: DEFAULT_HBAR,
        boltzmann: DEFAULT_K_B,
        local_gravity: DEFAULT_LOCAL_GRAVITY,
    }
}

impl PhysicalConstants {
    pub fn with_local_gravity(mut self, g: f64) -> Self {
        self.local_gravity = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (key, value) in [
            ("constants.gravitational_constant", self.gravitational_constant),
            ("constants.reduced_planck", self.reduced_planck),
            ("constants.boltzmann", self.boltzmann),
            ("constants.local_gravity", self.local_gravity),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be finite and > 0 (got {value})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub quad_rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode_rel_tol: 1e-12,
            // Angles in the regime of interest are ~1e-4 rad, so the absolute
            // floor has to sit well below rel_tol * |theta|.
            ode_abs_tol: 1e-16,
            quad_rel_tol: 1e-10,
            max_subdivisions: 60,
        }
    }
}

impl Tolerances {
    pub fn strict() -> Self {
        Tolerances {
            ode_rel_tol: 1e-13,
            ode_abs_tol: 1e-18,
            quad_rel_tol: 1e-12,
            max_subdivisions: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, value) in [
            ("tolerances.ode_rel_tol", self.ode_rel_tol),
            ("tolerances.ode_abs_tol", self.ode_abs_tol),
            ("tolerances.quad_rel_tol", self.quad_rel_tol),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::config(key, format!("must lie in (0, 1) (got {value})")));
            }
        }
        if self.max_subdivisions < 1 {
            return Err(Error::config("tolerances.max_subdivisions", "must be >= 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_values() {
        let c = default_constants();
        assert_eq!(c.gravitational_constant, 6.674e-11);
        assert_eq!(c.reduced_planck, 1.055e-34);
        assert_eq!(c.boltzmann, 1.381e-23);
        assert_eq!(c.local_gravity, 9.81);
        c.validate().unwrap();
    }

    #[test]
    fn override_passes_through() {
        let c = default_constants().with_local_gravity(9.832);
        assert_eq!(c.local_gravity, 9.832);
    }

    #[test]
    fn rejects_non_positive_constant() {
        let mut c = default_constants();
        c.reduced_planck = 0.0;
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("reduced_planck"));
    }

    #[test]
    fn tolerance_bounds() {
        Tolerances::default().validate().unwrap();
        Tolerances::strict().validate().unwrap();
        let t = Tolerances {
            quad_rel_tol: 1.0,
            ..Tolerances::default()
        };
        assert!(t.validate().is_err());
        let t = Tolerances {
            max_subdivisions: 0,
            ..Tolerances::default()
        };
        assert!(t.validate().is_err());
    }
}
