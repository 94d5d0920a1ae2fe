//! Shell-particle model and instantaneous dynamical state.
//!
//! The particle is a quasi-rigid spherical shell of charge radius `sigma > 0`
//! in its instantaneous rest frame. The mass either shares the same support
//! (finite-size particle) or is point-like (Lorentzian particle); both cases
//! obey the same equation of motion, so the distinction is a stored flag
//! used for reporting only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minkowski::FourVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParticleError {
    /// `sigma <= 0`: the point-charge limit has no equation of motion.
    #[error("charge radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("rest mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("charge must be nonzero")]
    ZeroCharge,
}

/// Support of the mass distribution relative to the charge shell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassSupport {
    /// Mass on the same shell as the charge (`sigma_m = sigma`).
    Shell,
    /// Point mass with finite-size charge (`sigma_m = 0`, Lorentzian).
    Point,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellParticle {
    rest_mass: f64,
    charge: f64,
    charge_radius: f64,
    mass_support: MassSupport,
}

impl ShellParticle {
    pub fn new(
        rest_mass: f64,
        charge: f64,
        charge_radius: f64,
        mass_support: MassSupport,
    ) -> Result<Self, ParticleError> {
        if charge_radius <= 0.0 || !charge_radius.is_finite() {
            return Err(ParticleError::NonPositiveRadius(charge_radius));
        }
        if rest_mass <= 0.0 || !rest_mass.is_finite() {
            return Err(ParticleError::NonPositiveMass(rest_mass));
        }
        if charge == 0.0 || !charge.is_finite() {
            return Err(ParticleError::ZeroCharge);
        }
        Ok(ShellParticle {
            rest_mass,
            charge,
            charge_radius,
            mass_support,
        })
    }

    pub fn rest_mass(&self) -> f64 {
        self.rest_mass
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn charge_radius(&self) -> f64 {
        self.charge_radius
    }

    pub fn mass_support(&self) -> MassSupport {
        self.mass_support
    }

    /// `sigma_m`: equal to the charge radius for a shell particle, zero for
    /// a Lorentzian one.
    pub fn mass_radius(&self) -> f64 {
        match self.mass_support {
            MassSupport::Shell => self.charge_radius,
            MassSupport::Point => 0.0,
        }
    }

    pub fn with_charge_radius(&self, sigma: f64) -> Result<Self, ParticleError> {
        ShellParticle::new(self.rest_mass, self.charge, sigma, self.mass_support)
    }
}

/// Proper time, 4-position, and 4-velocity of the shell's center of symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub s: f64,
    pub r: FourVector,
    pub u: FourVector,
}

impl ParticleState {
    pub fn new(s: f64, r: FourVector, u: FourVector) -> Self {
        ParticleState { s, r, u }
    }
}

/// Outcome of checking the 4-velocity constraint `u.u = 1`, `u0 >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateReport {
    pub valid: bool,
    /// `|u.u - 1|`.
    pub norm_residual: f64,
    pub future_pointing: bool,
    pub finite: bool,
}

pub fn validate_state(state: &ParticleState, tol: f64) -> StateReport {
    let finite = state.r.is_finite() && state.u.is_finite() && state.s.is_finite();
    let norm_residual = (state.u.dot(state.u) - 1.0).abs();
    let future_pointing = state.u.ct >= 1.0 - tol;
    StateReport {
        valid: finite && norm_residual <= tol && future_pointing,
        norm_residual,
        future_pointing,
        finite,
    }
}
