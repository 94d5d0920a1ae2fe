//! Short delay-time (LAD) approximation of the self-force and the
//! exact-vs-asymptotic comparison harness.
//!
//! In the limit of small delay the self-force reduces to an EM-mass term
//! plus the Schott term
//!
//! ```text
//! G = -(q^2 / sigma) a + g,    g = (2/3) q^2 [ da/ds' - u (u . da/ds) ]
//! ```
//!
//! with the EM mass `q^2 / sigma` divergent in the point-charge limit. The
//! comparison harness evaluates the exact retarded force and this asymptotic
//! form along a worldline and reports their relative deviation together with
//! the local delay-ratio parameter.

use crate::history::Worldline;
use crate::minkowski::FourVector;
use crate::particle::{ParticleState, ShellParticle};
use crate::selffield::{self, SelfFieldError};

/// Leading-order EM mass `q^2 / sigma` (`c = 1`).
pub fn em_mass(particle: &ShellParticle) -> f64 {
    let q = particle.charge();
    q * q / particle.charge_radius()
}

/// One evaluation of the asymptotic force.
#[derive(Clone, Copy, Debug)]
pub struct LadEvaluation {
    /// `-(q^2 / sigma) a`.
    pub em_mass_term: FourVector,
    /// Schott term `g`, orthogonal to `u` by construction.
    pub schott_term: FourVector,
    pub total: FourVector,
    /// Local delay-to-curvature ratio `sigma * |a|`, the small parameter of
    /// the approximation.
    pub epsilon: f64,
}

/// Asymptotic self-force from the local kinematics `(u, a, da/ds)`.
pub fn lad_force(
    u: FourVector,
    a: FourVector,
    adot: FourVector,
    particle: &ShellParticle,
) -> LadEvaluation {
    let q2 = particle.charge() * particle.charge();
    let schott = (adot - u * u.dot(adot)) * (2.0 / 3.0 * q2);
    let em_term = a * (-em_mass(particle));
    let a2 = (-a.dot(a)).max(0.0);
    LadEvaluation {
        em_mass_term: em_term,
        schott_term: schott,
        total: em_term + schott,
        epsilon: particle.charge_radius() * a2.sqrt(),
    }
}

/// Exact-vs-LAD deviation at one proper time.
#[derive(Clone, Copy, Debug)]
pub struct ComparisonSample {
    pub s: f64,
    /// Solved delay times local curvature, `s_ret * |a|`.
    pub epsilon: f64,
    pub exact_norm: f64,
    pub lad_norm: f64,
    /// `|exact - lad| / max(|exact|, floor)` in the Euclidean component norm.
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub sigma: f64,
    pub samples: Vec<ComparisonSample>,
}

impl ComparisonReport {
    pub fn max_deviation(&self) -> f64 {
        self.samples.iter().map(|s| s.deviation).fold(0.0, f64::max)
    }

    pub fn mean_deviation(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.deviation).sum::<f64>() / self.samples.len() as f64
    }
}

/// Evaluates the exact self-force and the LAD form at each listed proper
/// time. `da/ds` is estimated by central differences of the worldline's
/// acceleration at spacing `fd_step` (an integrated history supplies its own
/// grid spacing here).
pub fn compare_exact_vs_lad<W: Worldline>(
    w: &W,
    s_samples: &[f64],
    particle: &ShellParticle,
    fd_step: f64,
) -> Result<ComparisonReport, SelfFieldError> {
    let floor = 1e-300;
    let mut samples = Vec::with_capacity(s_samples.len());
    for &s in s_samples {
        let st = w.state_at(s)?;
        let eval = selffield::self_faraday(w, s, particle)?;
        let exact = selffield::self_force(&ParticleState::new(s, st.r, st.u), &eval, particle);
        let adot = (w.state_at(s + fd_step)?.a - w.state_at(s - fd_step)?.a) * (0.5 / fd_step);
        let lad = lad_force(st.u, st.a, adot, particle);
        let exact_norm = exact.euclidean_norm();
        let lad_norm = lad.total.euclidean_norm();
        let deviation = if exact_norm == 0.0 && lad_norm == 0.0 {
            0.0
        } else {
            (exact - lad.total).euclidean_norm() / exact_norm.max(floor)
        };
        let a2 = (-st.a.dot(st.a)).max(0.0);
        samples.push(ComparisonSample {
            s,
            epsilon: eval.delay.s_ret * a2.sqrt(),
            exact_norm,
            lad_norm,
            deviation,
        });
    }
    Ok(ComparisonReport {
        sigma: particle.charge_radius(),
        samples,
    })
}

/// Least-squares fit of `y = prefactor * x^exponent` on log-log axes.
#[derive(Clone, Copy, Debug)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> PowerLawFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "power-law fit needs at least two points");
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let exponent = sxy / sxx;
    PowerLawFit {
        exponent,
        prefactor: (my - exponent * mx).exp(),
    }
}
