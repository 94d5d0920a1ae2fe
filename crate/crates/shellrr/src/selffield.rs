//! The exact retarded self-field of the shell.
//!
//! The surface-averaged self Faraday tensor entering the equation of motion
//! is
//!
//! ```text
//! F_self[mu][k] = -(2 q / |D|) * d/ds' { (u_mu(s') Rt_k - u_k(s') Rt_mu) / D }
//! ```
//!
//! evaluated at the retarded time `s' = s - s_ret`, with `Rt = r(s) - r(s')`
//! and `D = Rt . u(s')`. The `s'`-derivative is expanded analytically here
//! (differencing it at runtime would couple step noise into the force):
//! using `d Rt_k / ds' = -u_k(s')` and `dD/ds' = Rt . a(s') - 1`,
//!
//! ```text
//! F_self = -(2 q / |D|) * [ (a'^Rt)/D - (u'^Rt) (Rt . a' - 1)/D^2 ]
//! ```
//!
//! where `^` is the antisymmetrized (wedge) product. A central-difference
//! version of the bracket is kept as an independent oracle for the
//! validation suite; it plays no part in the force path.
//!
//! The module also evaluates the retarded self 4-potential
//! `A^mu = q u^mu(s') / (Rh . u(s'))` at arbitrary field points, with the
//! internal/external branch classified through the simultaneity displacement
//! `X`: external when `X.X <= -sigma^2`, internal otherwise.

use thiserror::Error;

use crate::history::{HistoryError, Worldline, WorldlineState};
use crate::minkowski::{FaradayTensor, FourVector};
use crate::particle::{ParticleState, ShellParticle};
use crate::retardation::{
    fieldpoint_retarded_root, proper_delay_from, simultaneity_root, DelaySolution, RootError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelfFieldError {
    /// `|Rt . u(s')|` collapsed below the sigma scale; cannot occur for a
    /// timelike worldline and signals corrupted history data.
    #[error("degenerate retardation denominator D = {denominator:e} (floor {floor:e})")]
    DegenerateDenominator { denominator: f64, floor: f64 },
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    History(#[from] HistoryError),
}

/// Self-field tensor at one observation event, with the solved delay and the
/// retarded kinematic data that produced it.
#[derive(Clone, Copy, Debug)]
pub struct SelfFieldEvaluation {
    pub tensor: FaradayTensor,
    pub delay: DelaySolution,
    pub retarded: WorldlineState,
}

/// Internal/external classification of a field point relative to the shell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainBranch {
    External,
    Internal,
}

impl DomainBranch {
    pub fn label(&self) -> &'static str {
        match self {
            DomainBranch::External => "ext",
            DomainBranch::Internal => "int",
        }
    }
}

/// Retarded self 4-potential at a field point.
#[derive(Clone, Copy, Debug)]
pub struct SelfPotential {
    /// Contravariant `A^mu`.
    pub a: FourVector,
    pub branch: DomainBranch,
    /// Simultaneity proper time defining the displacement `X = r - r(s1)`.
    pub s1: f64,
    pub delay: DelaySolution,
}

/// Self Faraday tensor observed from the worldline's own state at `s`.
pub fn self_faraday<W: Worldline>(
    w: &W,
    s: f64,
    particle: &ShellParticle,
) -> Result<SelfFieldEvaluation, SelfFieldError> {
    let obs = w.state_at(s)?;
    self_faraday_at(w, s, obs.r, particle, None)
}

/// Self Faraday tensor for an observer at the event `r_obs` carrying proper
/// time `s`; this is the entry point used by integrator stages, whose
/// predicted events are not yet part of the history.
pub fn self_faraday_at<W: Worldline>(
    w: &W,
    s: f64,
    r_obs: FourVector,
    particle: &ShellParticle,
    warm_start: Option<f64>,
) -> Result<SelfFieldEvaluation, SelfFieldError> {
    let sigma = particle.charge_radius();
    let delay = proper_delay_from(w, s, r_obs, sigma, warm_start)?;
    let retarded = w.state_at(delay.s_emit)?;

    // exactly inertial motion has identically zero self-field; return the
    // literal zero tensor rather than a roundoff-sized one
    if w.is_exactly_inertial() {
        return Ok(SelfFieldEvaluation {
            tensor: FaradayTensor::ZERO,
            delay,
            retarded,
        });
    }

    let rt = r_obs - retarded.r;
    let d = rt.dot(retarded.u);
    let floor = 1e-10 * sigma;
    if d.abs() < floor {
        return Err(SelfFieldError::DegenerateDenominator {
            denominator: d,
            floor,
        });
    }
    let rta = rt.dot(retarded.a);
    let accel_part = FaradayTensor::wedge(retarded.a, rt).scale(1.0 / d);
    let velocity_part = FaradayTensor::wedge(retarded.u, rt).scale((rta - 1.0) / (d * d));
    let tensor = accel_part
        .sub(&velocity_part)
        .scale(-2.0 * particle.charge() / d.abs());
    Ok(SelfFieldEvaluation {
        tensor,
        delay,
        retarded,
    })
}

/// Self 4-force on the state `state`: `q F_self . u`, contravariant.
/// Orthogonal to `u` up to roundoff by antisymmetry of the tensor.
pub fn self_force(
    state: &ParticleState,
    eval: &SelfFieldEvaluation,
    particle: &ShellParticle,
) -> FourVector {
    let force = eval.tensor.contract(state.u) * particle.charge();
    debug_assert!(
        state.u.dot(force).abs() <= 1e-12 * force.euclidean_norm().max(f64::MIN_POSITIVE),
        "self-force lost orthogonality to u"
    );
    force
}

/// `F_self` rebuilt by central-differencing `(u'^Rt)/D` in the retarded
/// time. Validation oracle only: independent of the analytic expansion in
/// [`self_faraday_at`], never used by the force path.
pub fn self_faraday_central_difference<W: Worldline>(
    w: &W,
    s: f64,
    r_obs: FourVector,
    particle: &ShellParticle,
    fd_step: f64,
) -> Result<FaradayTensor, SelfFieldError> {
    let sigma = particle.charge_radius();
    let delay = proper_delay_from(w, s, r_obs, sigma, None)?;
    let retarded = w.state_at(delay.s_emit)?;
    let d0 = (r_obs - retarded.r).dot(retarded.u);

    let bracket = |sp: f64| -> Result<FaradayTensor, SelfFieldError> {
        let st = w.state_at(sp)?;
        let rt = r_obs - st.r;
        let d = rt.dot(st.u);
        Ok(FaradayTensor::wedge(st.u, rt).scale(1.0 / d))
    };
    let plus = bracket(delay.s_emit + fd_step)?;
    let minus = bracket(delay.s_emit - fd_step)?;
    let deriv = plus.sub(&minus).scale(1.0 / (2.0 * fd_step));
    Ok(deriv.scale(-2.0 * particle.charge() / d0.abs()))
}

/// Retarded self 4-potential at the field point `r_field`.
pub fn self_potential<W: Worldline>(
    w: &W,
    r_field: FourVector,
    particle: &ShellParticle,
) -> Result<SelfPotential, SelfFieldError> {
    let sigma = particle.charge_radius();
    let s1 = simultaneity_root(w, r_field)?;
    let st1 = w.state_at(s1)?;
    let x = r_field - st1.r;
    let xx = x.norm_sqr();
    let sigma2 = sigma * sigma;
    let (branch, rho2) = if xx <= -sigma2 {
        (DomainBranch::External, 0.0)
    } else {
        (DomainBranch::Internal, sigma2 + xx)
    };
    let delay = fieldpoint_retarded_root(w, r_field, rho2)?;
    let retarded = w.state_at(delay.s_emit)?;
    let denom = (r_field - retarded.r).dot(retarded.u);
    let floor = 1e-12 * sigma;
    if denom.abs() < floor {
        return Err(SelfFieldError::DegenerateDenominator {
            denominator: denom,
            floor,
        });
    }
    Ok(SelfPotential {
        a: retarded.u * (particle.charge() / denom),
        branch,
        s1,
        delay,
    })
}
