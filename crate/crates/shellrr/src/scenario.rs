//! Scenario configuration: one TOML document fully determines a run.
//!
//! Parsing is strict: unknown keys are rejected, and `validate` names the
//! violated invariant in its error message. Scenarios are value types that
//! round-trip through serialization unchanged, and runs driven by equal
//! scenarios produce byte-identical artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extfield::{ExternalFieldModel, RampSchedule};
use crate::integrator::{IntegratorConfig, RunSetup};
use crate::minkowski::FourVector;
use crate::particle::{validate_state, MassSupport, ParticleState, ShellParticle};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario does not parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    pub rest_mass: f64,
    pub charge: f64,
    pub charge_radius: f64,
    #[serde(default = "default_mass_support")]
    pub mass_support: MassSupport,
}

fn default_mass_support() -> MassSupport {
    MassSupport::Shell
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSection {
    /// Turn-on proper time `s0`.
    pub s: f64,
    /// `(ct, x, y, z)`.
    pub position: [f64; 4],
    /// Contravariant 4-velocity; must be unit timelike to 1e-10.
    pub velocity: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub step: f64,
    #[serde(default = "default_safety_factor")]
    pub safety_factor: f64,
    pub s_end: f64,
    #[serde(default)]
    pub renormalize_u: bool,
    #[serde(default = "default_drift_tolerance")]
    pub drift_tolerance: f64,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
}

fn default_safety_factor() -> f64 {
    2.0
}

fn default_drift_tolerance() -> f64 {
    1e-8
}

fn default_quad_order() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_true")]
    pub trajectory: bool,
    #[serde(default = "default_true")]
    pub diagnostics: bool,
    #[serde(default = "default_true")]
    pub summary: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputsSection {
    fn default() -> Self {
        OutputsSection {
            trajectory: true,
            diagnostics: true,
            summary: true,
        }
    }
}

/// Sampling axis for the field-map subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.start + i as f64 * step)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMapSection {
    /// Coordinate time of the sampling slice.
    pub ct: f64,
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub z: AxisSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub particle: ParticleSection,
    pub initial_state: InitialStateSection,
    pub field: ExternalFieldModel,
    pub ramp: RampSchedule,
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub field_map: Option<FieldMapSection>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Scenario::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks every cross-field invariant; messages name the violated one.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: String| Err(ScenarioError::Invalid(msg));

        self.particle_domain()?;
        self.field
            .validate()
            .map_err(|msg| ScenarioError::Invalid(format!("field: {msg}")))?;

        let state = self.initial_state_domain();
        let report = validate_state(&state, 1e-10);
        if !report.valid {
            return bad(format!(
                "initial_state.velocity must be unit timelike to 1e-10: |u.u - 1| = {:e}",
                report.norm_residual
            ));
        }

        let sigma = self.particle.charge_radius;
        let kappa = self.integrator.safety_factor;
        if kappa < 2.0 || kappa.is_nan() {
            return bad(format!(
                "integrator.safety_factor must be >= 2, got {kappa}"
            ));
        }
        if self.integrator.step <= 0.0 || self.integrator.step.is_nan() {
            return bad(format!(
                "integrator.step must be positive, got {}",
                self.integrator.step
            ));
        }
        if self.integrator.step > sigma / kappa {
            return bad(format!(
                "integrator.step violates h <= sigma/kappa: {} > {}",
                self.integrator.step,
                sigma / kappa
            ));
        }
        if self.integrator.s_end.is_nan() || self.integrator.s_end <= self.initial_state.s {
            return bad(format!(
                "integrator.s_end = {} must exceed initial_state.s = {}",
                self.integrator.s_end, self.initial_state.s
            ));
        }
        if self.integrator.quad_order < 2 {
            return bad(format!(
                "integrator.quad_order must be >= 2, got {}",
                self.integrator.quad_order
            ));
        }
        if self.integrator.drift_tolerance.is_nan()
            || self.integrator.drift_tolerance <= 0.0
            || self.integrator.drift_tolerance > crate::history::SAMPLE_TOL
        {
            return bad(format!(
                "integrator.drift_tolerance must lie in (0, {:e}], got {}",
                crate::history::SAMPLE_TOL,
                self.integrator.drift_tolerance
            ));
        }
        if self.ramp.s_on < self.initial_state.s {
            return bad(format!(
                "ramp.s_on = {} precedes initial_state.s = {}; the prehistory must stay inertial",
                self.ramp.s_on, self.initial_state.s
            ));
        }
        if self.ramp.width < 0.0 || self.ramp.off_width < 0.0 {
            return bad("ramp widths must be non-negative".into());
        }
        if let Some(s_off) = self.ramp.s_off {
            if s_off < self.ramp.s_on + self.ramp.width {
                return bad(format!(
                    "ramp.s_off = {s_off} precedes the end of the turn-on window"
                ));
            }
        }
        if let Some(map) = &self.field_map {
            for (name, axis) in [("x", &map.x), ("y", &map.y), ("z", &map.z)] {
                if axis.count == 0 {
                    return bad(format!("field_map.{name}.count must be at least 1"));
                }
            }
        }
        Ok(())
    }

    fn particle_domain(&self) -> Result<ShellParticle, ScenarioError> {
        ShellParticle::new(
            self.particle.rest_mass,
            self.particle.charge,
            self.particle.charge_radius,
            self.particle.mass_support,
        )
        .map_err(|e| ScenarioError::Invalid(format!("particle: {e}")))
    }

    fn initial_state_domain(&self) -> ParticleState {
        let p = self.initial_state.position;
        let u = self.initial_state.velocity;
        ParticleState::new(
            self.initial_state.s,
            FourVector::new(p[0], p[1], p[2], p[3]),
            FourVector::new(u[0], u[1], u[2], u[3]),
        )
    }

    /// Builds the domain objects for [`crate::integrator::integrate`].
    pub fn to_setup(&self) -> Result<RunSetup, ScenarioError> {
        self.validate()?;
        Ok(RunSetup {
            particle: self.particle_domain()?,
            initial_state: self.initial_state_domain(),
            field: self.field.clone(),
            ramp: self.ramp,
            config: IntegratorConfig {
                step: self.integrator.step,
                safety_factor: self.integrator.safety_factor,
                s_end: self.integrator.s_end,
                renormalize_u: self.integrator.renormalize_u,
                drift_tolerance: self.integrator.drift_tolerance,
                quad_order: self.integrator.quad_order,
            },
        })
    }
}
