//! Rotation algebra: quaternions, axis-angle, Euler angles, and the
//! skew-structured generator matrix of the quaternion differential equation.
//!
//! Quaternions are stored scalar-first `(w, x, y, z)` everywhere. The
//! generator matrix returned by [`omega_matrix`] acts on vector-first
//! components; [`OmegaMatrix::apply`] performs the permutation so callers
//! never handle it by hand.

mod axis_angle;
mod euler;
mod omega;
mod quat;

pub use axis_angle::AxisAngle;
pub use euler::{EulerAngles, EulerExtraction, EulerSeq};
pub use omega::{omega_matrix, OmegaMatrix};
#[cfg(debug_assertions)]
pub use quat::normalize_call_count;
pub use quat::{geodesic_angle, Quaternion};

/// Inputs further off the sphere than this are rejected by operations that
/// require unit quaternions.
pub const UNIT_INPUT_TOL: f64 = 1e-6;

/// Rotations smaller than this are treated as identity when extracting an
/// axis; below it the axis direction is not numerically reliable.
pub const NEAR_ZERO_ANGLE: f64 = 1e-8;
