//! Mechanical scale constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Particle mass `m` and reduced Planck constant `ħ`.
///
/// Defaults to natural units `m = ħ = 1`, which every closed-form result in
/// [`crate::families`] assumes unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    mass: f64,
    hbar: f64,
}

impl Units {
    pub fn new(mass: f64, hbar: f64) -> Result<Self, UnitsError> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(UnitsError::NonPositiveMass(mass));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(UnitsError::NonPositiveHbar(hbar));
        }
        Ok(Self { mass, hbar })
    }

    /// Natural units `m = 1`, `ħ = 1`.
    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Planck's constant `h = 2πħ`.
    pub fn planck(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar
    }
}

impl Default for Units {
    fn default() -> Self {
        Self::natural()
    }
}

#[derive(Debug, Error)]
pub enum UnitsError {
    #[error("mass must be positive and finite, got {0}")]
    NonPositiveMass(f64),
    #[error("hbar must be positive and finite, got {0}")]
    NonPositiveHbar(f64),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_units() {
        let u = Units::natural();
        assert_eq!(u.mass(), 1.0);
        assert_eq!(u.hbar(), 1.0);
        assert_eq!(u.planck(), 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn rejects_bad_scales() {
        assert!(Units::new(0.0, 1.0).is_err());
        assert!(Units::new(1.0, -2.0).is_err());
        assert!(Units::new(f64::NAN, 1.0).is_err());
    }
}
