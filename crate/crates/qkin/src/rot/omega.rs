use nalgebra::{Matrix4, Vector4};

use super::Quaternion;
use crate::Vec3;

/// Generator matrix of the quaternion differential equation, `q̇ = ½ Ω(ω) q`.
///
/// Block layout (acting on vector-first components `(x, y, z, w)`):
///
/// ```text
/// Ω(ω) = [ -[ω]×   ω ]
///        [ -ωᵀ     0 ]
/// ```
///
/// The matrix is antisymmetric and satisfies `Ω(ω)² = -‖ω‖² I`, which is why
/// its exponential has a closed form on the unit sphere. Quaternions in this
/// crate are stored scalar-first; [`OmegaMatrix::apply`] performs the
/// component permutation in both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaMatrix(Matrix4<f64>);

/// Build `Ω(ω)` from an angular velocity in rad/s.
pub fn omega_matrix(omega: &Vec3) -> OmegaMatrix {
    let (w1, w2, w3) = (omega.x, omega.y, omega.z);
    OmegaMatrix(Matrix4::new(
        0.0, w3, -w2, w1, //
        -w3, 0.0, w1, w2, //
        w2, -w1, 0.0, w3, //
        -w1, -w2, -w3, 0.0,
    ))
}

impl OmegaMatrix {
    #[inline]
    pub fn as_matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// Apply the matrix to a scalar-first quaternion: permutes to
    /// vector-first, multiplies, and permutes back.
    pub fn apply(&self, q: &Quaternion) -> Quaternion {
        let v = self.0 * Vector4::new(q.x, q.y, q.z, q.w);
        Quaternion::new(v[3], v[0], v[1], v[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_velocity_zero_matrix() {
        let m = omega_matrix(&Vec3::zeros());
        assert_eq!(m.as_matrix(), &Matrix4::zeros());
    }

    #[test]
    fn unit_z_pattern() {
        // For ω = (0,0,1): -[ω]× has (0,1) = +1 and (1,0) = -1, last column
        // carries ω, last row -ωᵀ.
        let m = omega_matrix(&Vec3::z());
        let expected = Matrix4::new(
            0.0, 1.0, 0.0, 0.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0,
        );
        assert_eq!(m.as_matrix(), &expected);
    }

    #[test]
    fn antisymmetric_for_random_omega() {
        let mut rng = crate::testutil::rng(5);
        for _ in 0..1000 {
            let w = crate::testutil::random_vec3(&mut rng, 15.0);
            let m = omega_matrix(&w);
            let s = m.as_matrix() + m.as_matrix().transpose();
            assert!(s.amax() <= 1e-14);
        }
    }

    #[test]
    fn squares_to_minus_norm() {
        let w = Vec3::new(1.0, -2.0, 0.5);
        let m = omega_matrix(&w);
        let sq = m.as_matrix() * m.as_matrix();
        let expected = -w.norm_squared() * Matrix4::identity();
        assert!((sq - expected).amax() <= 1e-12);
    }

    #[test]
    fn apply_matches_right_hamilton_product() {
        // Ω(ω) acting on vector-first components equals the Hamilton product
        // q ⊗ (0, ω) in scalar-first form: the generator as printed is the
        // body-frame (right-multiplication) convention.
        let mut rng = crate::testutil::rng(9);
        for _ in 0..200 {
            let q = crate::testutil::random_unit_quat(&mut rng);
            let w = crate::testutil::random_vec3(&mut rng, 8.0);
            let via_matrix = omega_matrix(&w).apply(&q);
            let via_product = q.hamilton(&Quaternion::new(0.0, w.x, w.y, w.z));
            assert!((via_matrix.w - via_product.w).abs() <= 1e-12);
            assert!((via_matrix.vec() - via_product.vec()).norm() <= 1e-12);
        }
    }
}
