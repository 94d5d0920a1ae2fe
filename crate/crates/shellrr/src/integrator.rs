//! Method-of-steps integration of the radiation-reaction delay equation.
//!
//! The equation of motion
//!
//! ```text
//! m0 du/ds = q ramp(s) F_ext_avg(r, u) . u  +  q F_self[history](s, r) . u
//! ```
//!
//! is explicit: the self-field at proper time `s` reads the worldline only
//! at the retarded time `s - s_ret`, a positive sigma-scale lookback. With
//! the fixed step bounded by `h <= sigma / kappa` (`kappa >= 2`) every
//! Runge-Kutta stage lookup lands strictly inside already-accepted history,
//! so each step is an ordinary local ODE step. Stages evaluate against the
//! history as of the last accepted step; accepted steps append a sample
//! whose acceleration is the right-hand side evaluated at the accepted
//! state, which then serves as the first stage of the next step.

use std::time::Instant;

use thiserror::Error;

use crate::extfield::{
    surface_average_faraday, ExternalFieldModel, RampSchedule, SurfaceQuadrature,
};
use crate::history::{HistoryError, HistorySample, TrajectoryHistory};
use crate::minkowski::{FourVector, MinkowskiError};
use crate::particle::{validate_state, ParticleState, ShellParticle};
use crate::retardation::{DelaySolution, RootError};
use crate::selffield::{self_faraday_at, SelfFieldError};

#[derive(Debug, Error)]
pub enum IntegratorError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    /// A stage's delay lookup ran past the accepted history: the step does
    /// not respect the delay safety bound.
    #[error("step too large at s = {s}: {source}")]
    StepTooLarge { s: f64, source: HistoryError },
    #[error("4-velocity norm drift {residual:e} exceeded tolerance at s = {s}")]
    DriftExceeded { s: f64, residual: f64 },
    #[error(transparent)]
    SelfField(SelfFieldError),
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Minkowski(#[from] MinkowskiError),
}

/// Fixed-step integrator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Proper-time step `h`.
    pub step: f64,
    /// Delay safety factor `kappa`; the step must satisfy
    /// `h <= sigma / kappa`.
    pub safety_factor: f64,
    pub s_end: f64,
    /// Project `u` back to unit norm after each accepted step. Off by
    /// default: norm drift is a correctness diagnostic, not a knob.
    pub renormalize_u: bool,
    /// Abort threshold on `|u.u - 1|`.
    pub drift_tolerance: f64,
    /// Surface-quadrature order for the averaged external field.
    pub quad_order: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 0.0,
            safety_factor: 2.0,
            s_end: 0.0,
            renormalize_u: false,
            drift_tolerance: 1e-8,
            quad_order: 8,
        }
    }
}

/// Everything one deterministic run needs.
#[derive(Clone, Debug)]
pub struct RunSetup {
    pub particle: ShellParticle,
    pub initial_state: ParticleState,
    pub field: ExternalFieldModel,
    pub ramp: RampSchedule,
    pub config: IntegratorConfig,
}

/// Per-step record written to the diagnostics CSV.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics {
    pub s: f64,
    pub u_norm_residual: f64,
    pub s_ret: f64,
    pub delay_residual: f64,
    pub self_force_norm: f64,
    pub ext_force_norm: f64,
}

/// End-of-run report.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub s_end: f64,
    pub final_state: ParticleState,
    pub max_u_norm_residual: f64,
    pub max_delay_residual: f64,
    pub min_s_ret: f64,
    pub max_self_force_norm: f64,
    pub max_ext_force_norm: f64,
    pub gamma_max: f64,
    pub gamma_final: f64,
    pub renormalizations: usize,
    pub hard_ramp: bool,
    pub wall_time_s: f64,
}

#[derive(Debug)]
pub struct IntegrationOutput {
    pub history: TrajectoryHistory,
    pub diagnostics: Vec<StepDiagnostics>,
    pub summary: RunSummary,
}

/// One right-hand-side evaluation `(dr/ds, du/ds)` with its force split and
/// the solved delay.
#[derive(Clone, Copy, Debug)]
pub struct RhsEval {
    pub dr: FourVector,
    pub du: FourVector,
    pub self_force: FourVector,
    pub ext_force: FourVector,
    pub delay: DelaySolution,
}

/// Evaluates the equation of motion at `state` against `history`.
///
/// `dr/ds = u` and `m0 du/ds` is the sum of the ramped, surface-averaged
/// external Lorentz force and the retarded self-force; both tensors are
/// antisymmetric, so `u . du/ds = 0` to roundoff.
pub fn rhs(
    state: &ParticleState,
    history: &TrajectoryHistory,
    particle: &ShellParticle,
    field: &ExternalFieldModel,
    ramp: &RampSchedule,
    quad: &SurfaceQuadrature,
    warm_start: Option<f64>,
) -> Result<RhsEval, IntegratorError> {
    let q = particle.charge();
    let sigma = particle.charge_radius();

    let self_eval = self_faraday_at(history, state.s, state.r, particle, warm_start)
        .map_err(|e| lift_selffield(e, state.s))?;
    let self_force = if self_eval.tensor.is_zero() {
        FourVector::ZERO
    } else {
        self_eval.tensor.contract(state.u) * q
    };

    let ramp_value = ramp.value(state.s);
    let ext_force = if ramp_value == 0.0 || matches!(field, ExternalFieldModel::Zero) {
        FourVector::ZERO
    } else {
        let avg = surface_average_faraday(field, state, sigma, quad)?;
        avg.contract(state.u) * (q * ramp_value)
    };

    let du = (self_force + ext_force) / particle.rest_mass();
    Ok(RhsEval {
        dr: state.u,
        du,
        self_force,
        ext_force,
        delay: self_eval.delay,
    })
}

fn lift_selffield(e: SelfFieldError, s: f64) -> IntegratorError {
    match e {
        SelfFieldError::History(h @ HistoryError::QueryBeyondHistory { .. })
        | SelfFieldError::Root(RootError::History(h @ HistoryError::QueryBeyondHistory { .. })) => {
            IntegratorError::StepTooLarge { s, source: h }
        }
        other => IntegratorError::SelfField(other),
    }
}

/// Runs the method of steps over `[s0, s_end]` and returns the trajectory,
/// per-step diagnostics, and the run summary.
pub fn integrate(setup: &RunSetup) -> Result<IntegrationOutput, IntegratorError> {
    let started = Instant::now();
    let cfg = &setup.config;
    let sigma = setup.particle.charge_radius();
    let h = cfg.step;

    if h <= 0.0 || !h.is_finite() {
        return Err(IntegratorError::ConfigInvalid(format!(
            "integrator.step must be positive and finite, got {h}"
        )));
    }
    if cfg.safety_factor < 2.0 || cfg.safety_factor.is_nan() {
        return Err(IntegratorError::ConfigInvalid(format!(
            "integrator.safety_factor must be at least 2, got {}",
            cfg.safety_factor
        )));
    }
    if h > sigma / cfg.safety_factor {
        return Err(IntegratorError::ConfigInvalid(format!(
            "integrator.step violates the delay bound: h = {h} > sigma / kappa = {}",
            sigma / cfg.safety_factor
        )));
    }
    if cfg.quad_order < 2 {
        return Err(IntegratorError::ConfigInvalid(format!(
            "integrator.quad_order must be at least 2, got {}",
            cfg.quad_order
        )));
    }
    if cfg.drift_tolerance.is_nan()
        || cfg.drift_tolerance <= 0.0
        || cfg.drift_tolerance > crate::history::SAMPLE_TOL
    {
        return Err(IntegratorError::ConfigInvalid(format!(
            "integrator.drift_tolerance must lie in (0, {:e}] so the drift check fires before \
             the history insertion gate, got {:e}",
            crate::history::SAMPLE_TOL,
            cfg.drift_tolerance
        )));
    }
    let s0 = setup.initial_state.s;
    if cfg.s_end.is_nan() || cfg.s_end <= s0 {
        return Err(IntegratorError::ConfigInvalid(format!(
            "integrator.s_end = {} does not lie after the initial proper time {s0}",
            cfg.s_end
        )));
    }
    let report = validate_state(&setup.initial_state, 1e-10);
    if !report.valid {
        return Err(IntegratorError::ConfigInvalid(format!(
            "initial state violates the 4-velocity constraint: |u.u - 1| = {:e}",
            report.norm_residual
        )));
    }
    if setup.ramp.s_on < s0 {
        return Err(IntegratorError::ConfigInvalid(format!(
            "ramp.s_on = {} precedes the turn-on proper time {s0}; the prehistory must be inertial",
            setup.ramp.s_on
        )));
    }
    if let Some(s_off) = setup.ramp.s_off {
        if s_off < setup.ramp.s_on + setup.ramp.width {
            return Err(IntegratorError::ConfigInvalid(
                "ramp.s_off precedes the end of the turn-on window".into(),
            ));
        }
    }

    let quad = SurfaceQuadrature::product_rule(cfg.quad_order);
    let mut history = TrajectoryHistory::new(s0, setup.initial_state.r, setup.initial_state.u)?;
    let n_steps = (((cfg.s_end - s0) / h) - 1e-9).ceil().max(1.0) as usize;

    let rhs_at = |state: &ParticleState,
                  history: &TrajectoryHistory,
                  warm: Option<f64>|
     -> Result<RhsEval, IntegratorError> {
        rhs(
            state,
            history,
            &setup.particle,
            &setup.field,
            &setup.ramp,
            &quad,
            warm,
        )
    };

    let mut diagnostics = Vec::with_capacity(n_steps + 1);
    let mut tracker = Tracker::new(setup.initial_state.u.ct);
    let mut renormalizations = 0usize;

    // first stage of the first step; also the s0 diagnostics row
    let mut current = setup.initial_state;
    let mut accepted = rhs_at(&current, &history, None)?;
    tracker.record(
        &mut diagnostics,
        s0,
        (current.u.dot(current.u) - 1.0).abs(),
        &accepted,
    );

    for step in 1..=n_steps {
        let s_n = current.s;
        let warm = Some(accepted.delay.s_ret);

        // classic RK4; k1 reuses the evaluation accepted at s_n
        let k1 = accepted;
        let mid = ParticleState::new(
            s_n + 0.5 * h,
            current.r + k1.dr * (0.5 * h),
            current.u + k1.du * (0.5 * h),
        );
        let k2 = rhs_at(&mid, &history, warm)?;
        let mid = ParticleState::new(
            s_n + 0.5 * h,
            current.r + k2.dr * (0.5 * h),
            current.u + k2.du * (0.5 * h),
        );
        let k3 = rhs_at(&mid, &history, warm)?;
        let s_next = s0 + step as f64 * h;
        let end = ParticleState::new(s_next, current.r + k3.dr * h, current.u + k3.du * h);
        let k4 = rhs_at(&end, &history, warm)?;

        // (sum k) * h / 6 in this order: integer-valued stage sums then give
        // exact increments (the free-particle trajectory stays clean)
        let r_next = current.r + (k1.dr + (k2.dr + k3.dr) * 2.0 + k4.dr) * h / 6.0;
        let mut u_next = current.u + (k1.du + (k2.du + k3.du) * 2.0 + k4.du) * h / 6.0;

        if cfg.renormalize_u {
            let norm = u_next.dot(u_next).sqrt();
            if norm != 1.0 {
                u_next = u_next / norm;
                renormalizations += 1;
            }
        }

        current = ParticleState::new(s_next, r_next, u_next);
        let residual = (u_next.dot(u_next) - 1.0).abs();
        if residual > cfg.drift_tolerance {
            return Err(IntegratorError::DriftExceeded {
                s: s_next,
                residual,
            });
        }

        // acceleration stored with the sample is the RHS at the accepted
        // state; it becomes k1 of the next step
        accepted = rhs_at(&current, &history, warm)?;
        // the scheme is explicit only while the delay keeps a positive,
        // sigma-scale floor
        debug_assert!(accepted.delay.s_ret > 0.0);
        history.append(HistorySample {
            s: s_next,
            r: r_next,
            u: u_next,
            a: accepted.du,
        })?;
        tracker.record(&mut diagnostics, s_next, residual, &accepted);
        tracker.gamma_max = tracker.gamma_max.max(u_next.ct);
    }

    let summary = RunSummary {
        steps: n_steps,
        s_end: current.s,
        final_state: current,
        max_u_norm_residual: tracker.max_u_residual,
        max_delay_residual: tracker.max_delay_residual,
        min_s_ret: tracker.min_s_ret,
        max_self_force_norm: tracker.max_self,
        max_ext_force_norm: tracker.max_ext,
        gamma_max: tracker.gamma_max,
        gamma_final: current.u.ct,
        renormalizations,
        hard_ramp: setup.ramp.is_hard(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok(IntegrationOutput {
        history,
        diagnostics,
        summary,
    })
}

struct Tracker {
    max_u_residual: f64,
    max_delay_residual: f64,
    min_s_ret: f64,
    max_self: f64,
    max_ext: f64,
    gamma_max: f64,
}

impl Tracker {
    fn new(gamma0: f64) -> Self {
        Tracker {
            max_u_residual: 0.0,
            max_delay_residual: 0.0,
            min_s_ret: f64::INFINITY,
            max_self: 0.0,
            max_ext: 0.0,
            gamma_max: gamma0,
        }
    }

    fn record(&mut self, diag: &mut Vec<StepDiagnostics>, s: f64, residual: f64, eval: &RhsEval) {
        self.max_u_residual = self.max_u_residual.max(residual);
        self.max_delay_residual = self.max_delay_residual.max(eval.delay.residual);
        self.min_s_ret = self.min_s_ret.min(eval.delay.s_ret);
        self.max_self = self.max_self.max(eval.self_force.euclidean_norm());
        self.max_ext = self.max_ext.max(eval.ext_force.euclidean_norm());
        diag.push(StepDiagnostics {
            s,
            u_norm_residual: residual,
            s_ret: eval.delay.s_ret,
            delay_residual: eval.delay.residual,
            self_force_norm: eval.self_force.euclidean_norm(),
            ext_force_norm: eval.ext_force.euclidean_norm(),
        });
    }
}
