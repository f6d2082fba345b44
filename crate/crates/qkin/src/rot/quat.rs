use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use super::{AxisAngle, NEAR_ZERO_ANGLE, UNIT_INPUT_TOL};
use crate::{Error, Result, Vec3};

#[cfg(debug_assertions)]
thread_local! {
    static NORMALIZE_CALLS: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Number of [`Quaternion::normalize`] calls made on this thread.
///
/// Only tracked in debug builds; used by tests that assert the exact
/// integrator never renormalizes.
#[cfg(debug_assertions)]
pub fn normalize_call_count() -> u64 {
    NORMALIZE_CALLS.with(|c| c.get())
}

/// Quaternion with scalar-first storage: `w + x*i + y*j + z*k`.
///
/// Unit quaternions represent 3D rotations; `q` and `-q` encode the same
/// rotation (double cover), which every error computation in this crate
/// accounts for via [`Quaternion::aligned_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(c: [f64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl Quaternion {
    #[inline]
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Identity rotation.
    #[inline]
    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Scale to unit length. The caller must ensure the norm is nonzero.
    #[inline]
    pub fn normalize(&self) -> Self {
        #[cfg(debug_assertions)]
        NORMALIZE_CALLS.with(|c| c.set(c.get() + 1));
        let inv = 1.0 / self.norm();
        Self::new(self.w * inv, self.x * inv, self.y * inv, self.z * inv)
    }

    #[inline]
    pub fn dot(&self, rhs: &Self) -> f64 {
        self.w * rhs.w + self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    /// Complex conjugate: negates the vector part only.
    #[inline]
    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Vector (imaginary) part.
    #[inline]
    pub fn vec(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    /// Hamilton product `self ⊗ rhs`:
    /// `(p0 q0 − p·q, p0 q + q0 p + p × q)`. Non-commutative.
    ///
    /// Terms are ordered so the symmetric pairs cancel bit-exactly when
    /// `rhs` is the conjugate of `self`; controller equilibrium errors are
    /// then zero, not merely small.
    #[inline]
    pub fn hamilton(&self, rhs: &Self) -> Self {
        Self::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y + self.y * rhs.w + self.z * rhs.x - self.x * rhs.z,
            self.w * rhs.z + self.z * rhs.w + self.x * rhs.y - self.y * rhs.x,
        )
    }

    /// True if `|norm - 1| <= tol`.
    #[inline]
    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub(crate) fn check_unit(&self, context: &'static str) -> Result<()> {
        let deviation = (self.norm() - 1.0).abs();
        if deviation > UNIT_INPUT_TOL {
            return Err(Error::OffSphere { context, deviation });
        }
        Ok(())
    }

    /// Flip sign if needed so that `dot(self, other) >= 0`.
    ///
    /// Canonicalizes the double cover before forming rotation errors, so a
    /// controller never takes the long way around the sphere.
    #[inline]
    pub fn aligned_with(&self, other: &Self) -> Self {
        if self.dot(other) < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// Rotate a vector: the vector part of `q ⊗ (0, v) ⊗ q*` for unit `q`,
    /// computed with the expanded cross-product form.
    #[inline]
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        let u = self.vec();
        let uv = u.cross(v);
        let uuv = u.cross(&uv);
        v + uv * (2.0 * self.w) + uuv * 2.0
    }

    /// Build from an axis-angle rotation: `(cos(α/2), e·sin(α/2))`.
    ///
    /// The axis must be unit length (see [`AxisAngle::new`]).
    pub fn from_axis_angle(aa: &AxisAngle) -> Self {
        let half = 0.5 * aa.angle;
        let (s, c) = half.sin_cos();
        Self::new(c, aa.axis.x * s, aa.axis.y * s, aa.axis.z * s)
    }

    /// Convert to canonical axis-angle form (angle in `[0, π]`).
    ///
    /// Rotations smaller than [`NEAR_ZERO_ANGLE`] return angle 0 with axis
    /// `(1, 0, 0)` by convention.
    pub fn to_axis_angle(&self) -> AxisAngle {
        // Canonicalize sign so the extracted angle lands in [0, π].
        let q = if self.w < 0.0 { -*self } else { *self };
        let vnorm = q.vec().norm();
        let angle = 2.0 * vnorm.atan2(q.w);
        if angle < NEAR_ZERO_ANGLE {
            AxisAngle {
                axis: Vec3::new(1.0, 0.0, 0.0),
                angle: 0.0,
            }
        } else {
            AxisAngle {
                axis: q.vec() / vnorm,
                angle,
            }
        }
    }

    /// Exponential map: rotation vector (axis times angle, radians) to
    /// quaternion. Inverse of [`Quaternion::to_rotation_vector`].
    pub fn from_rotation_vector(rv: &Vec3) -> Self {
        let angle = rv.norm();
        if angle < NEAR_ZERO_ANGLE {
            // Two-term expansion of (cos(θ/2), v/θ·sin(θ/2)).
            let half = rv * 0.5;
            Self::new(1.0 - angle * angle / 8.0, half.x, half.y, half.z)
        } else {
            let (s, c) = (0.5 * angle).sin_cos();
            let axis = rv / angle;
            Self::new(c, axis.x * s, axis.y * s, axis.z * s)
        }
    }

    /// Logarithmic map: rotation vector `2·atan2(‖v‖, w)·v/‖v‖` of a unit
    /// quaternion, with the sign canonicalized so the angle is in `[0, π]`.
    pub fn to_rotation_vector(&self) -> Vec3 {
        let q = if self.w < 0.0 { -*self } else { *self };
        let vnorm = q.vec().norm();
        if vnorm < NEAR_ZERO_ANGLE {
            // sin(θ/2) ≈ θ/2: first-order inverse of the exponential map.
            q.vec() * (2.0 / q.w)
        } else {
            q.vec() * (2.0 * vnorm.atan2(q.w) / vnorm)
        }
    }

    /// 3×3 rotation matrix of a unit quaternion.
    pub fn to_rotation_matrix(&self) -> nalgebra::Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        nalgebra::Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }
}

/// Angle between two unit quaternions as rotations, in `[0, π]`.
/// Sign-insensitive, so `p` and `-p` are at distance zero.
///
/// Equals `2·acos(|⟨p, q⟩|)` but is evaluated as
/// `4·atan2(‖p − q‖, ‖p + q‖)` after sign alignment; the acos form loses
/// half the significand near zero, which would drown the errors these
/// comparisons measure.
pub fn geodesic_angle(p: &Quaternion, q: &Quaternion) -> Result<f64> {
    p.check_unit("geodesic_angle")?;
    q.check_unit("geodesic_angle")?;
    let q = q.aligned_with(p);
    let diff = ((p.w - q.w).powi(2)
        + (p.x - q.x).powi(2)
        + (p.y - q.y).powi(2)
        + (p.z - q.z).powi(2))
    .sqrt();
    let sum = ((p.w + q.w).powi(2)
        + (p.x + q.x).powi(2)
        + (p.y + q.y).powi(2)
        + (p.z + q.z).powi(2))
    .sqrt();
    Ok(4.0 * diff.atan2(sum))
}

impl Mul for Quaternion {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.hamilton(&rhs)
    }
}

impl Neg for Quaternion {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}
