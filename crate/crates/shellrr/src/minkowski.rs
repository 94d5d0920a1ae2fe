//! Four-vector algebra on flat space-time with signature (+,-,-,-).
//!
//! Everything downstream stores four-vectors in contravariant components;
//! index lowering is always an explicit application of the metric (see
//! [`FourVector::covariant`]), never implicit. Faraday tensors are stored
//! covariant and antisymmetry is enforced by representation: only the six
//! independent components exist.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `|u.u - 1|` accepted when building a boost from a 4-velocity.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinkowskiError {
    /// The vector handed to [`LorentzBoost::from_velocity`] is not a unit
    /// timelike, future-pointing 4-velocity.
    #[error(
        "not a unit timelike 4-velocity: |u.u - 1| = {norm_residual:e}, u0 = {time_component}"
    )]
    NonTimelikeVelocity {
        norm_residual: f64,
        time_component: f64,
    },
}

/// A contravariant four-vector `(ct, x, y, z)` in units with `c = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourVector {
    pub ct: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub const ZERO: FourVector = FourVector {
        ct: 0.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// The 4-velocity of an observer at rest, `(1, 0, 0, 0)`.
    pub const REST: FourVector = FourVector {
        ct: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(ct: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector { ct, x, y, z }
    }

    pub fn from_spatial(ct: f64, v: [f64; 3]) -> Self {
        FourVector::new(ct, v[0], v[1], v[2])
    }

    /// Minkowski inner product `a0 b0 - a1 b1 - a2 b2 - a3 b3`.
    pub fn dot(self, other: FourVector) -> f64 {
        self.ct * other.ct - self.x * other.x - self.y * other.y - self.z * other.z
    }

    /// `self.dot(self)`.
    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    /// Covariant components `[a0, -a1, -a2, -a3]` (explicit metric lowering).
    pub fn covariant(self) -> [f64; 4] {
        [self.ct, -self.x, -self.y, -self.z]
    }

    pub fn as_array(self) -> [f64; 4] {
        [self.ct, self.x, self.y, self.z]
    }

    pub fn spatial(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Euclidean norm of the four components. Not a Lorentz scalar; used for
    /// residual reporting and relative-error scales only.
    pub fn euclidean_norm(self) -> f64 {
        (self.ct * self.ct + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.ct.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit-timelike 4-velocity with spatial part `gamma * beta`.
    pub fn velocity_from_beta(beta: [f64; 3]) -> Self {
        let b2 = beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2];
        let gamma = 1.0 / (1.0 - b2).sqrt();
        FourVector::new(gamma, gamma * beta[0], gamma * beta[1], gamma * beta[2])
    }
}

impl std::ops::Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector::new(self.ct + o.ct, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector::new(self.ct - o.ct, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, k: f64) -> FourVector {
        FourVector::new(self.ct * k, self.x * k, self.y * k, self.z * k)
    }
}

impl std::ops::Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

impl std::ops::Div<f64> for FourVector {
    type Output = FourVector;
    fn div(self, k: f64) -> FourVector {
        FourVector::new(self.ct / k, self.x / k, self.y / k, self.z / k)
    }
}

impl std::ops::Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector::new(-self.ct, -self.x, -self.y, -self.z)
    }
}

impl std::fmt::Display for FourVector {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.ct, self.x, self.y, self.z)
    }
}

/// Antisymmetric rank-2 tensor, stored as the six independent covariant
/// components `F_{mu nu}` with `mu < nu`. `F[nu][mu] = -F[mu][nu]` holds
/// exactly because the mirror components are never stored.
///
/// Sign conventions (fields from a potential `A^mu = (phi, A)` via
/// `F_{mu nu} = d_mu A_nu - d_nu A_mu`): `F_{0i} = E_i` and
/// `F_{ij} = -eps_{ijk} B_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaradayTensor {
    pub f01: f64,
    pub f02: f64,
    pub f03: f64,
    pub f12: f64,
    pub f13: f64,
    pub f23: f64,
}

impl FaradayTensor {
    pub const ZERO: FaradayTensor = FaradayTensor {
        f01: 0.0,
        f02: 0.0,
        f03: 0.0,
        f12: 0.0,
        f13: 0.0,
        f23: 0.0,
    };

    /// Tensor carrying electric field `e` and magnetic field `b`.
    pub fn from_eb(e: [f64; 3], b: [f64; 3]) -> Self {
        FaradayTensor {
            f01: e[0],
            f02: e[1],
            f03: e[2],
            f12: -b[2],
            f13: b[1],
            f23: -b[0],
        }
    }

    /// Antisymmetrized product `F_{mu nu} = a_mu b_nu - a_nu b_mu` of two
    /// contravariant vectors (lowered internally).
    pub fn wedge(a: FourVector, b: FourVector) -> Self {
        let ac = a.covariant();
        let bc = b.covariant();
        FaradayTensor {
            f01: ac[0] * bc[1] - ac[1] * bc[0],
            f02: ac[0] * bc[2] - ac[2] * bc[0],
            f03: ac[0] * bc[3] - ac[3] * bc[0],
            f12: ac[1] * bc[2] - ac[2] * bc[1],
            f13: ac[1] * bc[3] - ac[3] * bc[1],
            f23: ac[2] * bc[3] - ac[3] * bc[2],
        }
    }

    /// Covariant component `F_{mu nu}` for arbitrary index order.
    pub fn component(&self, mu: usize, nu: usize) -> f64 {
        debug_assert!(mu < 4 && nu < 4);
        match (mu, nu) {
            (0, 1) => self.f01,
            (0, 2) => self.f02,
            (0, 3) => self.f03,
            (1, 2) => self.f12,
            (1, 3) => self.f13,
            (2, 3) => self.f23,
            (a, b) if a == b => 0.0,
            (a, b) => -self.component(b, a),
        }
    }

    pub fn electric(&self) -> [f64; 3] {
        [self.f01, self.f02, self.f03]
    }

    pub fn magnetic(&self) -> [f64; 3] {
        [-self.f23, self.f13, -self.f12]
    }

    /// Lorentz 4-force direction per unit charge: contracts `F_{mu nu} u^nu`
    /// and raises the free index, returning the contravariant vector
    /// `eta^{mu alpha} F_{alpha nu} u^nu`.
    pub fn contract(&self, u: FourVector) -> FourVector {
        let uc = u.as_array();
        let f0 = self.f01 * uc[1] + self.f02 * uc[2] + self.f03 * uc[3];
        let f1 = -self.f01 * uc[0] + self.f12 * uc[2] + self.f13 * uc[3];
        let f2 = -self.f02 * uc[0] - self.f12 * uc[1] + self.f23 * uc[3];
        let f3 = -self.f03 * uc[0] - self.f13 * uc[1] - self.f23 * uc[2];
        // raise: spatial covariant components flip sign
        FourVector::new(f0, -f1, -f2, -f3)
    }

    pub fn scale(&self, k: f64) -> Self {
        FaradayTensor {
            f01: self.f01 * k,
            f02: self.f02 * k,
            f03: self.f03 * k,
            f12: self.f12 * k,
            f13: self.f13 * k,
            f23: self.f23 * k,
        }
    }

    pub fn add(&self, o: &FaradayTensor) -> Self {
        FaradayTensor {
            f01: self.f01 + o.f01,
            f02: self.f02 + o.f02,
            f03: self.f03 + o.f03,
            f12: self.f12 + o.f12,
            f13: self.f13 + o.f13,
            f23: self.f23 + o.f23,
        }
    }

    pub fn sub(&self, o: &FaradayTensor) -> Self {
        self.add(&o.scale(-1.0))
    }

    /// Largest absolute component; the natural scale for relative errors.
    pub fn max_abs(&self) -> f64 {
        self.f01
            .abs()
            .max(self.f02.abs())
            .max(self.f03.abs())
            .max(self.f12.abs())
            .max(self.f13.abs())
            .max(self.f23.abs())
    }

    pub fn is_zero(&self) -> bool {
        *self == FaradayTensor::ZERO
    }
}

/// A Lorentz boost, stored as the full contravariant transformation matrix
/// `v'^mu = L^mu_nu v^nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzBoost {
    m: [[f64; 4]; 4],
}

impl LorentzBoost {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        LorentzBoost { m }
    }

    /// Boost mapping lab-frame vectors into the instantaneous rest frame of
    /// `u`, so that `apply(from_velocity(u)?, u) = (1, 0, 0, 0)`.
    pub fn from_velocity(u: FourVector) -> Result<Self, MinkowskiError> {
        let norm_residual = (u.dot(u) - 1.0).abs();
        if !u.is_finite() || norm_residual > UNIT_NORM_TOL || u.ct < 1.0 - UNIT_NORM_TOL {
            return Err(MinkowskiError::NonTimelikeVelocity {
                norm_residual,
                time_component: u.ct,
            });
        }
        let gamma = u.ct;
        let us = u.spatial();
        // spatial block: delta_ij + u_i u_j / (1 + gamma); the (gamma - 1)/beta^2
        // form is singular at rest, this one is not.
        let mut m = [[0.0; 4]; 4];
        m[0][0] = gamma;
        for i in 0..3 {
            m[0][i + 1] = -us[i];
            m[i + 1][0] = -us[i];
            for j in 0..3 {
                m[i + 1][j + 1] = if i == j { 1.0 } else { 0.0 } + us[i] * us[j] / (1.0 + gamma);
            }
        }
        Ok(LorentzBoost { m })
    }

    pub fn apply(&self, v: FourVector) -> FourVector {
        let a = v.as_array();
        let mut out = [0.0; 4];
        for (mu, row) in self.m.iter().enumerate() {
            out[mu] = row[0] * a[0] + row[1] * a[1] + row[2] * a[2] + row[3] * a[3];
        }
        FourVector::new(out[0], out[1], out[2], out[3])
    }

    /// Exact group inverse `eta L^T eta` (no re-derivation from a velocity).
    pub fn inverse(&self) -> Self {
        let sign = |i: usize| if i == 0 { 1.0 } else { -1.0 };
        let mut m = [[0.0; 4]; 4];
        for (mu, row) in m.iter_mut().enumerate() {
            for (nu, entry) in row.iter_mut().enumerate() {
                *entry = sign(mu) * sign(nu) * self.m[nu][mu];
            }
        }
        LorentzBoost { m }
    }

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    pub fn det(&self) -> f64 {
        det4(&self.m)
    }

    /// Largest absolute entry of `L^T eta L - eta`; zero for an exact
    /// Lorentz transformation.
    pub fn metric_defect(&self) -> f64 {
        let eta = |i: usize, j: usize| {
            if i != j {
                0.0
            } else if i == 0 {
                1.0
            } else {
                -1.0
            }
        };
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for m in 0..4 {
                    s += self.m[m][a] * eta(m, m) * self.m[m][b];
                }
                worst = worst.max((s - eta(a, b)).abs());
            }
        }
        worst
    }
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let det3 = |r: [usize; 3], c: [usize; 3]| -> f64 {
        m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
            - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
            + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
    };
    m[0][0] * det3([1, 2, 3], [1, 2, 3]) - m[0][1] * det3([1, 2, 3], [0, 2, 3])
        + m[0][2] * det3([1, 2, 3], [0, 1, 3])
        - m[0][3] * det3([1, 2, 3], [0, 1, 2])
}
