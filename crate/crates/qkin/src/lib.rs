//! Quaternion state-space kinematics toolkit.
//!
//! The crate models articulated motion as a discrete-time state-space system:
//! per-joint unit quaternions with angular velocities, driven by a meta-PD
//! controller with a second-order acceleration enhancement, and integrated
//! exactly on the unit sphere via the closed-form solution of the quaternion
//! differential equation. Euler-angle and axis-angle trackers are included as
//! ablation baselines, together with an approximate renormalizing integrator.
//!
//! Modules:
//! - [`rot`]: quaternion algebra, rotation representations, QDE generator
//! - [`integrate`]: fixed-step integrators for pose, velocity, and root translation
//! - [`control`]: PD error, acceleration enhancement, gain policies, state init
//! - [`skeleton`]: kinematic chain and forward kinematics
//! - [`seq`]: pose/keypoint sequences and their file formats
//! - [`metrics`]: motion-quality metrics and the training loss
//! - [`synth`]: synthetic reference motion generation with analytic ground truth
//! - [`runner`]: experiment runner (simulate / ablate / tune / eval)

pub mod control;
pub mod error;
pub mod integrate;
pub mod metrics;
pub mod rot;
pub mod runner;
pub mod seq;
pub mod skeleton;
pub mod synth;

pub use error::{Error, Result};

/// 3-vector used throughout (positions in meters, angular velocity in rad/s).
pub type Vec3 = nalgebra::Vector3<f64>;

#[cfg(test)]
pub(crate) mod testutil {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::rot::Quaternion;
    use crate::Vec3;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn random_unit_quat(rng: &mut ChaCha8Rng) -> Quaternion {
        loop {
            let q = Quaternion::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if q.norm() > 1e-3 {
                return q.normalize();
            }
        }
    }

    pub fn random_axis(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if v.norm() > 1e-3 {
                return v.normalize();
            }
        }
    }

    pub fn random_vec3(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }
}
