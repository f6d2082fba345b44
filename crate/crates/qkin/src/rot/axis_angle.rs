use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Rotation about a unit axis by an angle in radians.
///
/// The canonical form produced by `Quaternion::to_axis_angle` has the angle
/// in `[0, π]`; constructors accept any angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    pub axis: Vec3,
    pub angle: f64,
}

impl AxisAngle {
    /// Build from an axis and angle, normalizing the axis.
    ///
    /// A zero axis is only accepted with a zero angle, in which case the
    /// conventional axis `(1, 0, 0)` is substituted.
    pub fn new(axis: Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n < 1e-12 {
            assert!(
                angle.abs() < 1e-12,
                "axis-angle with zero axis and nonzero angle"
            );
            return Self {
                axis: Vec3::new(1.0, 0.0, 0.0),
                angle: 0.0,
            };
        }
        Self {
            axis: axis / n,
            angle,
        }
    }

    /// Rotation vector form: axis scaled by angle.
    #[inline]
    pub fn to_vector(&self) -> Vec3 {
        self.axis * self.angle
    }
}
