//! Dense, queryable worldline memory.
//!
//! The delay equation reads the worldline at retarded proper times, so the
//! integrator's past must stay available and reproducible: appending a new
//! sample never changes the result of any earlier query. Interpolation is
//! local (cubic Hermite for position and velocity, a backward-stencil cubic
//! for acceleration) and queries before the turn-on time `s0` are served in
//! closed form from the exact inertial prehistory, arbitrarily far back.

use thiserror::Error;

use crate::minkowski::FourVector;

/// Sample-insertion tolerance on `|u.u - 1|` and `|u.a|`.
pub const SAMPLE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HistoryError {
    /// A query ran past the newest accepted sample; in an integration this
    /// means the step exceeded the delay safety bound.
    #[error("query at s = {s_query} beyond newest history sample s = {s_last}")]
    QueryBeyondHistory { s_query: f64, s_last: f64 },
    #[error("sample at s = {s_new} does not advance past s = {s_last}")]
    NonMonotoneTime { s_new: f64, s_last: f64 },
    #[error("invalid sample: {reason}")]
    InvalidSample { reason: String },
}

/// Kinematic state `(r, u, a)` of a worldline at one proper time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorldlineState {
    pub r: FourVector,
    pub u: FourVector,
    pub a: FourVector,
}

/// A source of worldline kinematics for the retardation and self-field
/// evaluators: either an integrated [`TrajectoryHistory`] or a closed-form
/// test worldline from [`analytic`].
pub trait Worldline {
    fn state_at(&self, s: f64) -> Result<WorldlineState, HistoryError>;

    /// Newest proper time at which `state_at` succeeds (`+inf` when the
    /// worldline is defined for all times).
    fn newest_s(&self) -> f64;

    /// True only when every state this worldline can return is exactly the
    /// same inertial motion. The self-field evaluator maps this to the
    /// literal zero tensor.
    fn is_exactly_inertial(&self) -> bool {
        false
    }
}

impl<W: Worldline + ?Sized> Worldline for &W {
    fn state_at(&self, s: f64) -> Result<WorldlineState, HistoryError> {
        (**self).state_at(s)
    }
    fn newest_s(&self) -> f64 {
        (**self).newest_s()
    }
    fn is_exactly_inertial(&self) -> bool {
        (**self).is_exactly_inertial()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistorySample {
    pub s: f64,
    pub r: FourVector,
    pub u: FourVector,
    /// 4-acceleration `du/ds`, taken from the accepted right-hand-side
    /// evaluation rather than re-differenced.
    pub a: FourVector,
}

/// Worldline record: closed-form inertial prehistory up to the turn-on time
/// `s0`, then strictly increasing samples.
#[derive(Clone, Debug)]
pub struct TrajectoryHistory {
    s0: f64,
    r0: FourVector,
    u0: FourVector,
    samples: Vec<HistorySample>,
    exactly_inertial: bool,
}

impl TrajectoryHistory {
    /// Starts a history at turn-on time `s0` with prehistory velocity `u0`.
    /// The first sample `(s0, r0, u0, a = 0)` is seeded implicitly.
    pub fn new(s0: f64, r0: FourVector, u0: FourVector) -> Result<Self, HistoryError> {
        let seed = HistorySample {
            s: s0,
            r: r0,
            u: u0,
            a: FourVector::ZERO,
        };
        check_sample(&seed)?;
        Ok(TrajectoryHistory {
            s0,
            r0,
            u0,
            samples: vec![seed],
            exactly_inertial: true,
        })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn r0(&self) -> FourVector {
        self.r0
    }

    pub fn u0(&self) -> FourVector {
        self.u0
    }

    pub fn samples(&self) -> &[HistorySample] {
        &self.samples
    }

    pub fn s_last(&self) -> f64 {
        self.samples.last().expect("seed sample always present").s
    }

    pub fn last_sample(&self) -> &HistorySample {
        self.samples.last().expect("seed sample always present")
    }

    pub fn append(&mut self, sample: HistorySample) -> Result<(), HistoryError> {
        let s_last = self.s_last();
        if sample.s.is_nan() || sample.s <= s_last {
            return Err(HistoryError::NonMonotoneTime {
                s_new: sample.s,
                s_last,
            });
        }
        check_sample(&sample)?;
        if sample.u != self.u0 || sample.a != FourVector::ZERO {
            self.exactly_inertial = false;
        }
        self.samples.push(sample);
        Ok(())
    }

    /// Whether every accepted sample still carries the prehistory velocity
    /// and zero acceleration, bitwise.
    pub fn is_inertial(&self) -> bool {
        self.exactly_inertial
    }

    /// Kinematics at `s_query <= s_last`.
    ///
    /// Prehistory (`s_query <= s0`) is closed form. Inside the sampled range
    /// `r` and `u` are cubic Hermite (nodal derivatives `u` and `a`), and `a`
    /// is a cubic through the four nodes at and before the enclosing
    /// interval's right edge, so appending later samples never changes the
    /// answer. Evaluation at a stored node reproduces the sample exactly.
    pub fn eval(&self, s_query: f64) -> Result<WorldlineState, HistoryError> {
        if s_query <= self.s0 {
            return Ok(WorldlineState {
                r: self.r0 + self.u0 * (s_query - self.s0),
                u: self.u0,
                a: FourVector::ZERO,
            });
        }
        let s_last = self.s_last();
        if s_query > s_last {
            return Err(HistoryError::QueryBeyondHistory { s_query, s_last });
        }
        // first index with s > s_query, then step back to the interval start
        let idx = self
            .samples
            .partition_point(|smp| smp.s <= s_query)
            .clamp(1, self.samples.len() - 1);
        let i = idx - 1;
        let lo = &self.samples[i];
        let hi = &self.samples[i + 1];
        let dt = hi.s - lo.s;
        let t = (s_query - lo.s) / dt;

        let r = hermite(t, dt, lo.r, lo.u, hi.r, hi.u);
        let u = hermite(t, dt, lo.u, lo.a, hi.u, hi.a);
        let a = self.accel_cubic(i, s_query);
        Ok(WorldlineState { r, u, a })
    }

    /// Cubic Lagrange interpolation of `a` over the backward stencil
    /// `{i-2, i-1, i, i+1}` for the interval `[s_i, s_{i+1}]`. Indices below
    /// zero are virtual prehistory nodes with `a = 0` exactly.
    fn accel_cubic(&self, i: usize, s: f64) -> FourVector {
        let dt = self.samples[i + 1].s - self.samples[i].s;
        let node = |j: isize| -> (f64, FourVector) {
            if j < 0 {
                (self.s0 + j as f64 * dt, FourVector::ZERO)
            } else {
                let smp = &self.samples[j as usize];
                (smp.s, smp.a)
            }
        };
        let idx = [i as isize - 2, i as isize - 1, i as isize, i as isize + 1];
        let nodes = idx.map(node);
        let mut out = FourVector::ZERO;
        for (j, &(sj, aj)) in nodes.iter().enumerate() {
            let mut basis = 1.0;
            for (k, &(sk, _)) in nodes.iter().enumerate() {
                if k != j {
                    basis *= (s - sk) / (sj - sk);
                }
            }
            out = out + aj * basis;
        }
        out
    }
}

impl Worldline for TrajectoryHistory {
    fn state_at(&self, s: f64) -> Result<WorldlineState, HistoryError> {
        self.eval(s)
    }

    fn newest_s(&self) -> f64 {
        self.s_last()
    }

    fn is_exactly_inertial(&self) -> bool {
        self.is_inertial()
    }
}

fn check_sample(sample: &HistorySample) -> Result<(), HistoryError> {
    if !sample.s.is_finite()
        || !sample.r.is_finite()
        || !sample.u.is_finite()
        || !sample.a.is_finite()
    {
        return Err(HistoryError::InvalidSample {
            reason: format!("non-finite component at s = {}", sample.s),
        });
    }
    let norm_residual = (sample.u.dot(sample.u) - 1.0).abs();
    if norm_residual > SAMPLE_TOL {
        return Err(HistoryError::InvalidSample {
            reason: format!("|u.u - 1| = {norm_residual:e} exceeds {SAMPLE_TOL:e}"),
        });
    }
    let ortho = sample.u.dot(sample.a).abs();
    if ortho > SAMPLE_TOL {
        return Err(HistoryError::InvalidSample {
            reason: format!("|u.a| = {ortho:e} exceeds {SAMPLE_TOL:e}"),
        });
    }
    Ok(())
}

/// Cubic Hermite on `[0, 1]` with endpoint values `p0, p1` and endpoint
/// derivatives `m0, m1` (scaled by the interval length `dt`).
fn hermite(
    t: f64,
    dt: f64,
    p0: FourVector,
    m0: FourVector,
    p1: FourVector,
    m1: FourVector,
) -> FourVector {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    p0 * h00 + m0 * (h10 * dt) + p1 * h01 + m1 * (h11 * dt)
}

/// Closed-form worldlines used as oracles by the validation suite and tests.
pub mod analytic {
    use super::{HistoryError, Worldline, WorldlineState};
    use crate::minkowski::FourVector;

    /// Straight worldline `r(s) = r0 + u0 s`.
    #[derive(Clone, Copy, Debug)]
    pub struct InertialWorldline {
        pub r0: FourVector,
        pub u0: FourVector,
    }

    impl Worldline for InertialWorldline {
        fn state_at(&self, s: f64) -> Result<WorldlineState, HistoryError> {
            Ok(WorldlineState {
                r: self.r0 + self.u0 * s,
                u: self.u0,
                a: FourVector::ZERO,
            })
        }
        fn newest_s(&self) -> f64 {
            f64::INFINITY
        }
        fn is_exactly_inertial(&self) -> bool {
            true
        }
    }

    /// Uniform proper acceleration `g` along x:
    /// `r(s) = (sinh(gs)/g, cosh(gs)/g, 0, 0)`.
    #[derive(Clone, Copy, Debug)]
    pub struct HyperbolicWorldline {
        pub g: f64,
    }

    impl HyperbolicWorldline {
        /// Analytic `da/ds = g^2 u(s)`.
        pub fn jerk(&self, s: f64) -> FourVector {
            let (sh, ch) = ((self.g * s).sinh(), (self.g * s).cosh());
            FourVector::new(ch, sh, 0.0, 0.0) * (self.g * self.g)
        }
    }

    impl Worldline for HyperbolicWorldline {
        fn state_at(&self, s: f64) -> Result<WorldlineState, HistoryError> {
            let (sh, ch) = ((self.g * s).sinh(), (self.g * s).cosh());
            Ok(WorldlineState {
                r: FourVector::new(sh / self.g, ch / self.g, 0.0, 0.0),
                u: FourVector::new(ch, sh, 0.0, 0.0),
                a: FourVector::new(sh, ch, 0.0, 0.0) * self.g,
            })
        }
        fn newest_s(&self) -> f64 {
            f64::INFINITY
        }
    }

    /// Circular gyration in the x-y plane at proper angular rate `omega`,
    /// with transverse 4-velocity amplitude `u_perp` and drift `u_par`
    /// along z.
    #[derive(Clone, Copy, Debug)]
    pub struct HelicalWorldline {
        pub u_perp: f64,
        pub u_par: f64,
        pub omega: f64,
    }

    impl HelicalWorldline {
        pub fn gamma(&self) -> f64 {
            (1.0 + self.u_perp * self.u_perp + self.u_par * self.u_par).sqrt()
        }

        /// Analytic `da/ds`.
        pub fn jerk(&self, s: f64) -> FourVector {
            let (sn, cs) = (self.omega * s).sin_cos();
            let k = self.u_perp * self.omega * self.omega;
            FourVector::new(0.0, -cs * k, sn * k, 0.0)
        }
    }

    impl Worldline for HelicalWorldline {
        fn state_at(&self, s: f64) -> Result<WorldlineState, HistoryError> {
            let (sn, cs) = (self.omega * s).sin_cos();
            let g = self.gamma();
            Ok(WorldlineState {
                r: FourVector::new(
                    g * s,
                    self.u_perp / self.omega * sn,
                    self.u_perp / self.omega * cs,
                    self.u_par * s,
                ),
                u: FourVector::new(g, self.u_perp * cs, -self.u_perp * sn, self.u_par),
                a: FourVector::new(
                    0.0,
                    -self.u_perp * self.omega * sn,
                    -self.u_perp * self.omega * cs,
                    0.0,
                ),
            })
        }
        fn newest_s(&self) -> f64 {
            f64::INFINITY
        }
    }

    /// Densely samples an analytic worldline into a `TrajectoryHistory`.
    /// The history's prehistory is inertial with the velocity at `s0`, so it
    /// agrees with `w` below `s0` only for inertial `w`; callers either pick
    /// `s0` early enough or query at `s >= s0` only.
    pub fn sample_into_history<W: Worldline>(
        w: &W,
        s0: f64,
        s_end: f64,
        h: f64,
    ) -> super::TrajectoryHistory {
        let start = w.state_at(s0).expect("analytic worldline evaluates");
        let mut hist = super::TrajectoryHistory::new(s0, start.r, start.u)
            .expect("analytic start state is valid");
        let n = ((s_end - s0) / h).round() as usize;
        for k in 1..=n {
            let s = s0 + k as f64 * h;
            let st = w.state_at(s).expect("analytic worldline evaluates");
            hist.append(super::HistorySample {
                s,
                r: st.r,
                u: st.u,
                a: st.a,
            })
            .expect("analytic samples satisfy the insertion invariants");
        }
        hist
    }
}

#[cfg(test)]
mod tests {
    use super::analytic::HyperbolicWorldline;
    use super::*;

    fn rest_history() -> TrajectoryHistory {
        TrajectoryHistory::new(0.0, FourVector::ZERO, FourVector::REST).unwrap()
    }

    #[test]
    fn prehistory_is_closed_form() {
        let hist = rest_history();
        let st = hist.eval(-5.0).unwrap();
        assert_eq!(st.r, FourVector::new(-5.0, 0.0, 0.0, 0.0));
        assert_eq!(st.u, FourVector::REST);
        assert_eq!(st.a, FourVector::ZERO);
    }

    #[test]
    fn nodal_reproduction_is_exact() {
        let w = HyperbolicWorldline { g: 0.2 };
        let hist = analytic::sample_into_history(&w, 0.0, 2.0, 0.1);
        for smp in hist.samples() {
            let st = hist.eval(smp.s).unwrap();
            assert_eq!(st.r, smp.r);
            assert_eq!(st.u, smp.u);
            assert_eq!(st.a, smp.a);
        }
    }

    #[test]
    fn append_gates() {
        let mut hist = rest_history();
        let good = HistorySample {
            s: 0.1,
            r: FourVector::new(0.1, 0.0, 0.0, 0.0),
            u: FourVector::REST,
            a: FourVector::ZERO,
        };
        hist.append(good).unwrap();
        assert!(matches!(
            hist.append(good),
            Err(HistoryError::NonMonotoneTime { .. })
        ));
        let bad_norm = HistorySample {
            s: 0.2,
            r: FourVector::new(0.2, 0.0, 0.0, 0.0),
            u: FourVector::new(1.0005, 0.0, 0.0, 0.0), // |u.u - 1| = 1e-3
            a: FourVector::ZERO,
        };
        assert!(matches!(
            hist.append(bad_norm),
            Err(HistoryError::InvalidSample { .. })
        ));
    }

    #[test]
    fn query_beyond_history_fails() {
        let hist = rest_history();
        assert!(matches!(
            hist.eval(0.5),
            Err(HistoryError::QueryBeyondHistory { .. })
        ));
    }

    #[test]
    fn inertial_flag_tracks_samples() {
        let mut hist = rest_history();
        hist.append(HistorySample {
            s: 1.0,
            r: FourVector::new(1.0, 0.0, 0.0, 0.0),
            u: FourVector::REST,
            a: FourVector::ZERO,
        })
        .unwrap();
        assert!(hist.is_inertial());
        hist.append(HistorySample {
            s: 2.0,
            r: FourVector::new(2.0, 1e-9, 0.0, 0.0),
            u: FourVector::REST,
            a: FourVector::new(0.0, 1e-9, 0.0, 0.0),
        })
        .unwrap();
        assert!(!hist.is_inertial());
    }

    /// Midpoint error on the hyperbolic worldline must shrink as O(h^4) for
    /// r and at least O(h^3) for u under step halving.
    #[test]
    fn interpolation_convergence_order() {
        let w = HyperbolicWorldline { g: 0.5 };
        let err_at = |h: f64| -> (f64, f64) {
            let hist = analytic::sample_into_history(&w, 0.0, 4.0, h);
            let mut er: f64 = 0.0;
            let mut eu: f64 = 0.0;
            let n = (4.0 / h) as usize;
            // the seed sample carries a(s0) = 0 (inertial turn-on), which the
            // hyperbolic worldline violates: skip the first interval
            for k in 1..n {
                let s = (k as f64 + 0.5) * h;
                let got = hist.eval(s).unwrap();
                let want = w.state_at(s).unwrap();
                er = er.max((got.r - want.r).euclidean_norm());
                eu = eu.max((got.u - want.u).euclidean_norm());
            }
            (er, eu)
        };
        let (r1, u1) = err_at(0.2);
        let (r2, u2) = err_at(0.1);
        let (r4, u4) = err_at(0.05);
        let order_r = ((r1 / r2).log2() + (r2 / r4).log2()) / 2.0;
        let order_u = ((u1 / u2).log2() + (u2 / u4).log2()) / 2.0;
        assert!(order_r >= 3.8, "r interpolation order {order_r}");
        assert!(order_u >= 2.8, "u interpolation order {order_u}");
    }

    /// The acceleration interpolant must not change when later samples are
    /// appended: the delay equation re-reads old history.
    #[test]
    fn append_does_not_perturb_past_queries() {
        let w = HyperbolicWorldline { g: 0.3 };
        let mut hist = analytic::sample_into_history(&w, 0.0, 1.0, 0.1);
        let probes: Vec<f64> = (0..20).map(|k| 0.047 * k as f64).collect();
        let before: Vec<_> = probes.iter().map(|&s| hist.eval(s).unwrap()).collect();
        let st = w.state_at(1.1).unwrap();
        hist.append(HistorySample {
            s: 1.1,
            r: st.r,
            u: st.u,
            a: st.a,
        })
        .unwrap();
        for (p, &s) in before.iter().zip(&probes) {
            assert_eq!(*p, hist.eval(s).unwrap());
        }
    }
}
