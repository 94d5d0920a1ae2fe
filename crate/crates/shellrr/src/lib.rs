//! Dynamics of a classical finite-size (spherical-shell) charged particle
//! including the back-reaction of its own retarded electromagnetic field.
//!
//! The self-interaction turns the equation of motion into a second-order
//! delay differential equation: the force at proper time `s` depends on the
//! worldline at the earlier time `s - s_ret`, where the delay is the positive
//! root of an algebraic retardation condition set by the shell radius. This
//! crate provides:
//!
//! - Minkowski four-vector algebra and Lorentz boosts ([`minkowski`]),
//! - the shell-particle model and state validation ([`particle`]),
//! - a dense, interpolable worldline history with exact inertial prehistory
//!   ([`history`]),
//! - root solvers for the retardation conditions ([`retardation`]),
//! - the exact surface-averaged self-field, self-force, and the retarded
//!   self-potential ([`selffield`]),
//! - prescribed external field models with shell surface averaging and a
//!   smooth turn-on schedule ([`extfield`]),
//! - a fixed-step method-of-steps integrator ([`integrator`]),
//! - the short-delay (LAD) asymptotic force and a comparison harness
//!   ([`asymptotics`]),
//! - scenario configuration, CSV/report writers, and a runtime validation
//!   suite ([`scenario`], [`export`], [`validation`]).
//!
//! Units are natural Gaussian with `c = 1`: positions and proper times are
//! lengths, 4-velocities are dimensionless, and the shell radius `sigma` is
//! simultaneously the length and proper-time scale of the retardation.

pub mod asymptotics;
pub mod export;
pub mod extfield;
pub mod history;
pub mod integrator;
pub mod minkowski;
pub mod particle;
pub mod retardation;
pub mod scenario;
pub mod selffield;
pub mod validation;

pub use minkowski::{FaradayTensor, FourVector, LorentzBoost};
pub use particle::{MassSupport, ParticleState, ShellParticle};
