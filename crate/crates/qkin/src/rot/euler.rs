use serde::{Deserialize, Serialize};

use super::{AxisAngle, Quaternion};
use crate::Vec3;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Middle-angle sine magnitude beyond which extraction is declared locked.
const GIMBAL_LOCK_SIN: f64 = 1.0 - 1e-9;

/// Intrinsic rotation sequences used by the Euler-angle baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EulerSeq {
    Xyz,
    Zxy,
}

impl EulerSeq {
    fn axes(&self) -> [Vec3; 3] {
        match self {
            EulerSeq::Xyz => [Vec3::x(), Vec3::y(), Vec3::z()],
            EulerSeq::Zxy => [Vec3::z(), Vec3::x(), Vec3::y()],
        }
    }
}

/// Three intrinsic rotation angles in sequence order, each wrapped to
/// `[0, 2π)`.
///
/// The wrap is what makes this representation discontinuous: a rotation
/// crossing a full turn jumps by 2π in one component even though the
/// underlying rotation moves smoothly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub seq: EulerSeq,
    pub angles: [f64; 3],
}

/// Wrap an angle into `[0, 2π)`.
#[inline]
pub(crate) fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(TWO_PI)
}

impl EulerAngles {
    pub fn new(seq: EulerSeq, angles: [f64; 3]) -> Self {
        Self {
            seq,
            angles: [
                wrap_angle(angles[0]),
                wrap_angle(angles[1]),
                wrap_angle(angles[2]),
            ],
        }
    }
}

/// Result of extracting Euler angles; `gimbal_lock` marks configurations
/// where the middle angle hit ±π/2 and the first angle was set to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerExtraction {
    pub angles: EulerAngles,
    pub gimbal_lock: bool,
}

impl Quaternion {
    /// Compose three elementary intrinsic rotations in sequence order.
    pub fn from_euler(e: &EulerAngles) -> Self {
        let [a1, a2, a3] = e.seq.axes();
        let q1 = Quaternion::from_axis_angle(&AxisAngle::new(a1, e.angles[0]));
        let q2 = Quaternion::from_axis_angle(&AxisAngle::new(a2, e.angles[1]));
        let q3 = Quaternion::from_axis_angle(&AxisAngle::new(a3, e.angles[2]));
        q1 * q2 * q3
    }

    /// Extract intrinsic Euler angles for the given sequence.
    ///
    /// The output triple represents the same rotation as the input but is not
    /// required to reproduce the triple that built it. At gimbal lock the
    /// first angle is zeroed, the remaining rotation folded into the third,
    /// and the result flagged.
    pub fn to_euler(&self, seq: EulerSeq) -> EulerExtraction {
        let m = self.to_rotation_matrix();
        let (s_mid, a1, a3, locked_a3) = match seq {
            // R = Rx(a) Ry(b) Rz(c): R02 = sin b.
            EulerSeq::Xyz => (
                m[(0, 2)],
                f64::atan2(-m[(1, 2)], m[(2, 2)]),
                f64::atan2(-m[(0, 1)], m[(0, 0)]),
                f64::atan2(m[(1, 0)], m[(1, 1)]),
            ),
            // R = Rz(a) Rx(b) Ry(c): R21 = sin b.
            EulerSeq::Zxy => (
                m[(2, 1)],
                f64::atan2(-m[(0, 1)], m[(1, 1)]),
                f64::atan2(-m[(2, 0)], m[(2, 2)]),
                f64::atan2(m[(0, 2)], m[(0, 0)]),
            ),
        };
        let s = s_mid.clamp(-1.0, 1.0);
        if s.abs() >= GIMBAL_LOCK_SIN {
            EulerExtraction {
                angles: EulerAngles::new(seq, [0.0, s.asin(), locked_a3]),
                gimbal_lock: true,
            }
        } else {
            EulerExtraction {
                angles: EulerAngles::new(seq, [a1, s.asin(), a3]),
                gimbal_lock: false,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rot::geodesic_angle;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn zero_angles_identity() {
        let q = Quaternion::from_euler(&EulerAngles::new(EulerSeq::Xyz, [0.0; 3]));
        assert_eq!(q, Quaternion::identity());
    }

    #[test]
    fn single_axis_case() {
        let q = Quaternion::from_euler(&EulerAngles::new(EulerSeq::Xyz, [FRAC_PI_2, 0.0, 0.0]));
        assert!((q.w - FRAC_PI_4.cos()).abs() < 1e-15);
        assert!((q.x - FRAC_PI_4.sin()).abs() < 1e-15);
        assert!(q.y.abs() < 1e-15 && q.z.abs() < 1e-15);
    }

    #[test]
    fn zxy_matches_elementary_product() {
        // Oracle: compose the three elementary quaternions by hand.
        let (a, b, c) = (0.1, 0.2, 0.3);
        let qz = Quaternion::from_axis_angle(&AxisAngle::new(Vec3::z(), a));
        let qx = Quaternion::from_axis_angle(&AxisAngle::new(Vec3::x(), b));
        let qy = Quaternion::from_axis_angle(&AxisAngle::new(Vec3::y(), c));
        let expected = qz * qx * qy;
        let got = Quaternion::from_euler(&EulerAngles::new(EulerSeq::Zxy, [a, b, c]));
        assert!(geodesic_angle(&expected, &got).unwrap() < 1e-14);
    }

    #[test]
    fn round_trip_preserves_rotation() {
        let mut rng = crate::testutil::rng(23);
        use rand::Rng;
        for &seq in &[EulerSeq::Xyz, EulerSeq::Zxy] {
            let mut checked = 0;
            while checked < 500 {
                let angles = [
                    rng.random_range(0.0..TWO_PI),
                    rng.random_range(0.0..TWO_PI),
                    rng.random_range(0.0..TWO_PI),
                ];
                // Stay clear of the singular band for the round-trip property.
                let mid_sin = angles[1].sin().abs();
                if (1.0 - mid_sin) < 1e-3 {
                    continue;
                }
                let q = Quaternion::from_euler(&EulerAngles::new(seq, angles));
                let ext = q.to_euler(seq);
                assert!(!ext.gimbal_lock);
                let back = Quaternion::from_euler(&ext.angles);
                assert!(
                    geodesic_angle(&q, &back).unwrap() <= 1e-9,
                    "{seq:?} {angles:?}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn gimbal_lock_flagged_and_first_angle_zeroed() {
        let q = Quaternion::from_euler(&EulerAngles::new(
            EulerSeq::Xyz,
            [0.4, FRAC_PI_2, 0.7],
        ));
        let ext = q.to_euler(EulerSeq::Xyz);
        assert!(ext.gimbal_lock);
        assert_eq!(ext.angles.angles[0], 0.0);
        // Flagged result still encodes the same rotation.
        let back = Quaternion::from_euler(&ext.angles);
        assert!(geodesic_angle(&q, &back).unwrap() <= 1e-7);
    }

    #[test]
    fn angles_wrapped() {
        let e = EulerAngles::new(EulerSeq::Xyz, [-0.1, 7.0, TWO_PI]);
        assert!(e.angles.iter().all(|&a| (0.0..TWO_PI).contains(&a)));
        assert!((e.angles[0] - (TWO_PI - 0.1)).abs() < 1e-12);
        assert!((e.angles[2]).abs() < 1e-12);
    }
}
