//! Root solvers for the two algebraic retardation conditions.
//!
//! Worldline case: the self-force at proper time `s` reads the worldline at
//! `s' = s - s_ret` where `s_ret` is the smallest positive root of
//! `(r(s) - r(s')).(r(s) - r(s')) = sigma^2`. Field-point case: the retarded
//! self-potential at an event `r` reads the worldline at the root of
//! `(r - r(s')).(r - r(s')) = rho^2`. Both are solved by bracketing
//! (doubling from a warm-started guess) followed by Newton steps that fall
//! back to bisection whenever they leave the bracket; only the retarded
//! (positive-delay) root is ever returned.

use thiserror::Error;

use crate::history::{HistoryError, Worldline};
use crate::minkowski::FourVector;

/// Iteration cap for the safeguarded Newton loop.
pub const MAX_ITERATIONS: usize = 200;

/// Acceptance tolerance on the retardation residual.
pub fn root_tolerance(scale_sqr: f64) -> f64 {
    1e-12 * scale_sqr.abs().max(1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("retardation root not bracketed: {detail}")]
    RootNotBracketed { detail: String },
    #[error("root iteration stalled after {iterations} iterations, residual {residual:e}")]
    NumericalStall { iterations: usize, residual: f64 },
    /// The slope `dphi/ddelta` at the accepted root was not positive; for a
    /// timelike worldline this indicates corrupted history data.
    #[error("non-increasing retardation condition at accepted root (slope {slope:e})")]
    NonMonotoneAtRoot { slope: f64 },
    #[error(transparent)]
    History(#[from] HistoryError),
}

/// A solved retardation condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelaySolution {
    /// The delay. Proper-time delay `s - s'` for [`proper_delay`];
    /// coordinate-time delay `ct - ct'` for [`fieldpoint_retarded_root`].
    pub s_ret: f64,
    /// Proper time of the emission point on the worldline.
    pub s_emit: f64,
    /// `|R.R - target|` at the accepted root.
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest positive proper-time delay solving
/// `(r(s) - r(s - delta)).(r(s) - r(s - delta)) = sigma^2`.
///
/// The observation event is taken from the worldline itself; use
/// [`proper_delay_from`] when the observer sits at a predicted event not yet
/// part of the history (integrator stages).
pub fn proper_delay<W: Worldline>(w: &W, s: f64, sigma: f64) -> Result<DelaySolution, RootError> {
    let obs = w.state_at(s)?;
    proper_delay_from(w, s, obs.r, sigma, None)
}

/// As [`proper_delay`] with an explicit observation event `r_obs` at proper
/// time `s`, and an optional warm-start guess for the delay.
pub fn proper_delay_from<W: Worldline>(
    w: &W,
    s: f64,
    r_obs: FourVector,
    sigma: f64,
    warm_start: Option<f64>,
) -> Result<DelaySolution, RootError> {
    let target = sigma * sigma;
    let root = solve_lookback(w, s, r_obs, target, warm_start.unwrap_or(sigma))?;
    Ok(DelaySolution {
        s_ret: root.delta,
        s_emit: s - root.delta,
        residual: root.residual,
        iterations: root.iterations,
    })
}

/// Proper time `s1` at which the worldline is simultaneous with the event
/// `r` in its own instantaneous rest frame: `u(s1).(r - r(s1)) = 0`.
pub fn simultaneity_root<W: Worldline>(w: &W, r: FourVector) -> Result<f64, RootError> {
    let newest = w.newest_s();
    let psi = |s1: f64| -> Result<(f64, f64), RootError> {
        let st = w.state_at(s1)?;
        let x = r - st.r;
        Ok((st.u.dot(x), st.a.dot(x) - st.u.dot(st.u)))
    };

    // psi decreases through the root; expand around the anchor to bracket it
    let anchor = if newest.is_finite() {
        r.ct.min(newest)
    } else {
        r.ct
    };
    let (p0, _) = psi(anchor)?;
    if p0 == 0.0 {
        return Ok(anchor);
    }
    let mut lo;
    let mut hi;
    let mut step = 1.0 + p0.abs();
    if p0 > 0.0 {
        // root above the anchor
        lo = anchor;
        hi = anchor;
        let mut tries = 0;
        loop {
            hi = (hi + step).min(newest);
            let (p, _) = psi(hi)?;
            if p <= 0.0 {
                break;
            }
            if hi >= newest {
                return Err(RootError::RootNotBracketed {
                    detail: format!(
                        "simultaneity root for event {r} lies beyond newest history time {newest}"
                    ),
                });
            }
            lo = hi;
            step *= 2.0;
            tries += 1;
            if tries > 128 {
                return Err(RootError::RootNotBracketed {
                    detail: format!("no future simultaneity bracket for event {r}"),
                });
            }
        }
    } else {
        hi = anchor;
        lo = anchor;
        let mut tries = 0;
        loop {
            lo -= step;
            let (p, _) = psi(lo)?;
            if p >= 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
            tries += 1;
            if tries > 128 {
                return Err(RootError::RootNotBracketed {
                    detail: format!("no past simultaneity bracket for event {r}"),
                });
            }
        }
    }

    // safeguarded Newton on the bracket [lo, hi], psi(lo) >= 0 >= psi(hi)
    let mut x = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let (p, dp) = psi(x)?;
        residual = p.abs();
        if residual <= 1e-13 * (1.0 + r.euclidean_norm()) {
            return Ok(x);
        }
        if p > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - p / dp;
        x = if dp < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    Err(RootError::NumericalStall {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Smallest positive coordinate-time delay solving
/// `(r - r(s')).(r - r(s')) = rho2` for a field point `r` off the worldline.
///
/// `rho2` is zero in the external domain and `sigma^2 + X.X` in the internal
/// one; the caller classifies via the simultaneity displacement `X`.
pub fn fieldpoint_retarded_root<W: Worldline>(
    w: &W,
    r: FourVector,
    rho2: f64,
) -> Result<DelaySolution, RootError> {
    debug_assert!(rho2 >= 0.0);
    let anchor = simultaneity_root(w, r)?;
    let st = w.state_at(anchor)?;
    let chi_anchor = (r - st.r).norm_sqr() - rho2;
    // chi(anchor) = X.X - rho2 < 0 in both domains; its magnitude sets the
    // lookback scale (R for external points, sigma for internal ones)
    let init = (-chi_anchor).max(rho2).sqrt().max(1e-12);
    let root = solve_lookback(w, anchor, r, rho2, init)?;
    let emit = w.state_at(root.delta_s_emit())?;
    let t_ret = r.ct - emit.r.ct;
    if t_ret <= 0.0 {
        return Err(RootError::RootNotBracketed {
            detail: format!("retarded root has non-positive coordinate delay {t_ret}"),
        });
    }
    Ok(DelaySolution {
        s_ret: t_ret,
        s_emit: root.delta_s_emit(),
        residual: root.residual,
        iterations: root.iterations,
    })
}

struct LookbackRoot {
    anchor: f64,
    delta: f64,
    residual: f64,
    iterations: usize,
}

impl LookbackRoot {
    fn delta_s_emit(&self) -> f64 {
        self.anchor - self.delta
    }
}

/// Shared safeguarded-Newton core: finds the smallest `delta > delta_min`
/// with `phi(delta) = (r_obs - r(anchor - delta)).(..) - target = 0`,
/// where `phi' = 2 (r_obs - r(anchor - delta)).u(anchor - delta) > 0` near
/// the root for timelike worldlines.
fn solve_lookback<W: Worldline>(
    w: &W,
    anchor: f64,
    r_obs: FourVector,
    target: f64,
    init: f64,
) -> Result<LookbackRoot, RootError> {
    let tol_accept = root_tolerance(target);
    // resolution floor: the chord is a cancellation between event
    // coordinates, so phi carries roundoff ~ |R| * eps * |r_obs|
    let coord_scale = r_obs.euclidean_norm().max(1.0);
    let tol_target = (1e-15 * target.abs().max(1.0))
        .max(4.0 * f64::EPSILON * coord_scale * target.abs().max(f64::EPSILON).sqrt());

    let phi = |delta: f64| -> Result<(f64, f64), RootError> {
        let st = w.state_at(anchor - delta)?;
        let rt = r_obs - st.r;
        Ok((rt.norm_sqr() - target, 2.0 * rt.dot(st.u)))
    };

    // delay lookups must land at or before the newest sample
    let delta_min = (anchor - w.newest_s()).max(0.0);
    let (phi_min, _) = phi(delta_min)?;
    if phi_min >= 0.0 {
        if phi_min <= tol_accept && delta_min > 0.0 {
            return Ok(LookbackRoot {
                anchor,
                delta: delta_min,
                residual: phi_min.abs(),
                iterations: 0,
            });
        }
        if delta_min > 0.0 {
            // the root lies at a smaller lookback than the history reaches:
            // the observation point ran too far ahead of the accepted samples
            return Err(RootError::History(HistoryError::QueryBeyondHistory {
                s_query: anchor,
                s_last: w.newest_s(),
            }));
        }
        return Err(RootError::RootNotBracketed {
            detail: format!(
                "condition already non-negative ({phi_min:e}) at minimum lookback {delta_min}"
            ),
        });
    }

    let mut lo = delta_min;
    let mut hi = init.max(delta_min * 2.0).max(1e-300);
    let mut doublings = 0;
    loop {
        let (p, _) = phi(hi)?;
        if p >= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(RootError::RootNotBracketed {
                detail: format!("no sign change up to lookback {hi:e}"),
            });
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, x, 0.0);
    let mut iterations = 0;
    for it in 1..=MAX_ITERATIONS {
        iterations = it;
        let (p, dp) = phi(x)?;
        if p.abs() < best.0 {
            best = (p.abs(), x, dp);
        }
        if p.abs() <= tol_target {
            break;
        }
        if p < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - p / dp;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= f64::EPSILON * x.abs() || hi - lo <= f64::EPSILON * hi {
            x = next;
            let (p, dp) = phi(x)?;
            if p.abs() < best.0 {
                best = (p.abs(), x, dp);
            }
            break;
        }
        x = next;
    }

    let (residual, root, slope) = best;
    if residual > tol_accept {
        return Err(RootError::NumericalStall {
            iterations,
            residual,
        });
    }
    if slope <= 0.0 {
        return Err(RootError::NonMonotoneAtRoot { slope });
    }
    Ok(LookbackRoot {
        anchor,
        delta: root,
        residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::analytic::{HyperbolicWorldline, InertialWorldline};
    use crate::history::{TrajectoryHistory, Worldline};
    use crate::minkowski::{FourVector, LorentzBoost};

    fn rest_history() -> TrajectoryHistory {
        TrajectoryHistory::new(0.0, FourVector::ZERO, FourVector::REST).unwrap()
    }

    /// Plain bisection on the same condition, independent of the Newton path.
    fn bisection_oracle<W: Worldline>(w: &W, s: f64, sigma: f64) -> f64 {
        let obs = w.state_at(s).unwrap();
        let phi = |d: f64| {
            let st = w.state_at(s - d).unwrap();
            (obs.r - st.r).norm_sqr() - sigma * sigma
        };
        let mut lo = 0.0;
        let mut hi = sigma;
        while phi(hi) < 0.0 {
            hi *= 2.0;
        }
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn inertial_delay_equals_sigma() {
        let sol = proper_delay(&rest_history(), 0.0, 0.1).unwrap();
        assert!((sol.s_ret - 0.1).abs() < 1e-14);
        assert!(sol.residual <= 1e-15);
        assert_eq!(sol.s_emit, -sol.s_ret);
    }

    #[test]
    fn boosted_inertial_delay_is_frame_invariant() {
        // same shell viewed from a frame where it moves at beta = 0.6
        let u = FourVector::new(1.25, 0.75, 0.0, 0.0);
        let w = InertialWorldline {
            r0: FourVector::new(0.3, -0.2, 0.1, 0.0),
            u0: u,
        };
        let sol = proper_delay(&w, 2.0, 0.1).unwrap();
        assert!((sol.s_ret - 0.1).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_delay_matches_bisection_oracle() {
        let w = HyperbolicWorldline { g: 0.2 };
        for s in [0.0, 0.5, 1.3, -0.7] {
            let sol = proper_delay(&w, s, 0.1).unwrap();
            let oracle = bisection_oracle(&w, s, 0.1);
            assert!(
                (sol.s_ret - oracle).abs() < 1e-10,
                "s = {s}: {} vs oracle {oracle}",
                sol.s_ret
            );
        }
    }

    #[test]
    fn warm_start_converges_to_same_root() {
        let w = HyperbolicWorldline { g: 0.2 };
        let obs = w.state_at(1.0).unwrap();
        let cold = proper_delay_from(&w, 1.0, obs.r, 0.1, None).unwrap();
        let warm = proper_delay_from(&w, 1.0, obs.r, 0.1, Some(0.0999)).unwrap();
        assert!((cold.s_ret - warm.s_ret).abs() < 1e-12);
    }

    #[test]
    fn simultaneity_rest_frame() {
        let mut hist = rest_history();
        for k in 1..=50 {
            let s = 0.1 * k as f64;
            hist.append(crate::history::HistorySample {
                s,
                r: FourVector::new(s, 0.0, 0.0, 0.0),
                u: FourVector::REST,
                a: FourVector::ZERO,
            })
            .unwrap();
        }
        let s1 = simultaneity_root(&hist, FourVector::new(3.0, 2.0, 0.0, 0.0)).unwrap();
        assert!((s1 - 3.0).abs() < 1e-12);
        let st = hist.state_at(s1).unwrap();
        let x = FourVector::new(3.0, 2.0, 0.0, 0.0) - st.r;
        assert!(st.u.dot(x).abs() < 1e-12);
    }

    #[test]
    fn simultaneity_transforms_under_boost() {
        // rest-frame event (3, 2, 0, 0) pushed to a boosted frame
        let u = FourVector::new(1.25, -0.75, 0.0, 0.0);
        let boost_to_rest = LorentzBoost::from_velocity(u).unwrap();
        let lab_from_rest = boost_to_rest.inverse();
        let w = InertialWorldline {
            r0: FourVector::ZERO,
            u0: u,
        };
        let r_lab = lab_from_rest.apply(FourVector::new(3.0, 2.0, 0.0, 0.0));
        let s1 = simultaneity_root(&w, r_lab).unwrap();
        // proper time is a scalar: the rest-frame answer was s1 = 3
        assert!((s1 - 3.0).abs() < 1e-10);
        let st = w.state_at(s1).unwrap();
        assert!(st.u.dot(r_lab - st.r).abs() < 1e-10);
    }

    #[test]
    fn simultaneity_on_the_worldline() {
        let w = HyperbolicWorldline { g: 0.2 };
        let event = w.state_at(0.8).unwrap().r;
        let s1 = simultaneity_root(&w, event).unwrap();
        assert!((s1 - 0.8).abs() < 1e-10);
    }

    #[test]
    fn fieldpoint_roots_external_internal_boundary() {
        let mut hist = rest_history();
        for k in 1..=60 {
            let s = 0.1 * k as f64;
            hist.append(crate::history::HistorySample {
                s,
                r: FourVector::new(s, 0.0, 0.0, 0.0),
                u: FourVector::REST,
                a: FourVector::ZERO,
            })
            .unwrap();
        }
        let sigma: f64 = 0.5;

        // external: rho2 = 0, delay = R
        let r_ext = FourVector::new(3.0, 2.0, 0.0, 0.0);
        let sol = fieldpoint_retarded_root(&hist, r_ext, 0.0).unwrap();
        assert!((sol.s_ret - 2.0).abs() < 1e-12);

        // internal: rho2 = sigma^2 - R^2, delay = sigma
        let r_int = FourVector::new(3.0, 0.2, 0.0, 0.0);
        let rho2 = sigma * sigma - 0.2 * 0.2;
        let sol = fieldpoint_retarded_root(&hist, r_int, rho2).unwrap();
        assert!((sol.s_ret - sigma).abs() < 1e-12);

        // boundary R = sigma: both branches give delay sigma
        let r_bnd = FourVector::new(3.0, sigma, 0.0, 0.0);
        let ext = fieldpoint_retarded_root(&hist, r_bnd, 0.0).unwrap();
        let int = fieldpoint_retarded_root(&hist, r_bnd, 0.0f64.max(sigma * sigma - sigma * sigma))
            .unwrap();
        assert!((ext.s_ret - sigma).abs() < 1e-12);
        assert!((int.s_ret - sigma).abs() < 1e-12);
    }

    #[test]
    fn beyond_history_is_reported() {
        let hist = rest_history(); // newest sample at s = 0
        let err = simultaneity_root(&hist, FourVector::new(5.0, 1.0, 0.0, 0.0));
        assert!(matches!(err, Err(RootError::RootNotBracketed { .. })));
    }
}
