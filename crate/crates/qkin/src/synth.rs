//! Synthetic reference motions with analytic ground truth.
//!
//! Every motion kind has a closed-form joint-angle trajectory (the random
//! walk is defined by its seeded recurrence instead), so tests can check the
//! generator against formulas it does not share code with. Corruption models
//! estimator noise on the rotation group: a small random rotation composes
//! onto each pose (half-normal angle about a uniform axis), never additive
//! component noise that would leave the sphere. All randomness flows through
//! the ChaCha8 generator so identical seeds give identical bytes on every
//! platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::rot::{AxisAngle, Quaternion};
use crate::seq::PoseSequence;
use crate::skeleton::PoseFrame;
use crate::{Error, Result, Vec3};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Trajectory family for the moving joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    /// Constant angular rate about a fixed axis.
    ConstantOmega,
    /// Hold, then jump to a new target angle at `step_frame`.
    StepTarget,
    /// `θ(t) = start + amplitude·sin(rate·t + phase)`.
    Sinusoid,
    /// Seeded per-frame random angular velocity, integrated exactly.
    RandomWalk,
    /// Constant rate driven monotonically through a full turn, so wrapped
    /// representations jump while the rotation itself stays continuous.
    WrapCrossing,
}

/// Per-joint motion parameters; unused fields are ignored by each kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JointMotion {
    pub axis: [f64; 3],
    /// rad/s (constant_omega, wrap_crossing, sinusoid frequency, random_walk
    /// velocity bound).
    pub rate: f64,
    /// Sinusoid amplitude, radians.
    pub amplitude: f64,
    pub phase: f64,
    /// Initial angle, radians.
    pub start_angle: f64,
}

impl Default for JointMotion {
    fn default() -> Self {
        Self {
            axis: [0.0, 0.0, 1.0],
            rate: 0.0,
            amplitude: 0.0,
            phase: 0.0,
            start_angle: 0.0,
        }
    }
}

impl JointMotion {
    pub fn still() -> Self {
        Self::default()
    }

    fn axis_vec(&self) -> Vec3 {
        Vec3::new(self.axis[0], self.axis[1], self.axis[2])
    }
}

/// Root translation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RootPath {
    Fixed {
        position: [f64; 3],
    },
    Line {
        start: [f64; 3],
        velocity: [f64; 3],
    },
    Sine {
        center: [f64; 3],
        amplitude: [f64; 3],
        /// rad/s.
        frequency: f64,
    },
}

impl Default for RootPath {
    fn default() -> Self {
        // Pelvis height that puts the default humanoid's feet just above the
        // ground plane.
        RootPath::Fixed {
            position: [0.0, 0.0, 0.9],
        }
    }
}

impl RootPath {
    pub fn at(&self, t: f64) -> Vec3 {
        match *self {
            RootPath::Fixed { position } => Vec3::from(position),
            RootPath::Line { start, velocity } => Vec3::from(start) + Vec3::from(velocity) * t,
            RootPath::Sine {
                center,
                amplitude,
                frequency,
            } => Vec3::from(center) + Vec3::from(amplitude) * (frequency * t).sin(),
        }
    }
}

/// Full description of one synthetic reference motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionSpec {
    pub kind: MotionKind,
    pub n_joints: usize,
    /// Either one entry (broadcast to all joints) or one per joint.
    pub joints: Vec<JointMotion>,
    /// When set, the single joint spec applies to this joint only and every
    /// other joint stays at identity.
    pub only_joint: Option<usize>,
    pub root: RootPath,
    /// Sequence length in frames.
    pub frames: usize,
    pub dt: f64,
    /// Step time for `step_target`.
    pub step_frame: usize,
    /// Step magnitude in radians for `step_target`.
    pub step_size: f64,
    /// Noise the runner applies when corrupting references (radians).
    pub angular_sigma: f64,
    /// Root jitter (meters).
    pub positional_sigma: f64,
    /// Seed for generation randomness (random_walk).
    pub seed: u64,
}

impl Default for MotionSpec {
    fn default() -> Self {
        Self {
            kind: MotionKind::ConstantOmega,
            n_joints: 24,
            joints: vec![JointMotion::default()],
            only_joint: None,
            root: RootPath::default(),
            frames: 100,
            dt: 0.04,
            step_frame: 40,
            step_size: 0.4,
            angular_sigma: 0.0,
            positional_sigma: 0.0,
            seed: 0,
        }
    }
}

impl MotionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frames < 3 {
            return Err(Error::Config(format!(
                "motion needs at least 3 frames, got {}",
                self.frames
            )));
        }
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(Error::Config(format!("invalid dt {}", self.dt)));
        }
        if self.n_joints == 0 {
            return Err(Error::Config("n_joints must be positive".into()));
        }
        if self.joints.len() != 1 && self.joints.len() != self.n_joints {
            return Err(Error::ShapeMismatch {
                context: "joint motion specs".into(),
                expected: self.n_joints,
                got: self.joints.len(),
            });
        }
        if let Some(j) = self.only_joint {
            if j >= self.n_joints {
                return Err(Error::Config(format!(
                    "only_joint {j} out of range for {} joints",
                    self.n_joints
                )));
            }
            if self.joints.len() != 1 {
                return Err(Error::Config(
                    "only_joint requires a single joint motion spec".into(),
                ));
            }
        }
        if self.angular_sigma < 0.0 || self.positional_sigma < 0.0 {
            return Err(Error::Config("noise sigmas must be non-negative".into()));
        }
        if self.kind == MotionKind::StepTarget && self.step_frame >= self.frames {
            return Err(Error::Config(format!(
                "step_frame {} beyond sequence of {} frames",
                self.step_frame, self.frames
            )));
        }
        if self.kind == MotionKind::WrapCrossing {
            if self.joints.len() != 1 {
                return Err(Error::Config(
                    "wrap_crossing takes a single joint motion spec".into(),
                ));
            }
            if self.wrap_frame().is_none() {
                return Err(Error::Config(
                    "wrap_crossing trajectory never crosses a full turn; \
                     adjust start_angle, rate, or frames"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    fn motion_for(&self, joint: usize) -> JointMotion {
        match self.only_joint {
            Some(j) if j != joint => JointMotion::still(),
            Some(_) => self.joints[0],
            None if self.joints.len() == 1 => self.joints[0],
            None => self.joints[joint],
        }
    }

    /// Closed-form joint angle at a frame; `None` for the random walk.
    pub fn analytic_angle(&self, joint: usize, frame: usize) -> Option<f64> {
        let m = self.motion_for(joint);
        let t = frame as f64 * self.dt;
        match self.kind {
            MotionKind::ConstantOmega | MotionKind::WrapCrossing => {
                Some(m.start_angle + m.rate * t)
            }
            MotionKind::Sinusoid => {
                Some(m.start_angle + m.amplitude * (m.rate * t + m.phase).sin())
            }
            MotionKind::StepTarget => Some(if frame < self.step_frame {
                m.start_angle
            } else {
                m.start_angle + self.step_size
            }),
            MotionKind::RandomWalk => None,
        }
    }

    /// Closed-form second finite difference of the joint angle,
    /// `θ_k − 2θ_{k+1} + θ_{k+2}`; `None` for the random walk.
    pub fn analytic_second_difference(&self, joint: usize, frame: usize) -> Option<f64> {
        let m = self.motion_for(joint);
        match self.kind {
            MotionKind::ConstantOmega | MotionKind::WrapCrossing => Some(0.0),
            MotionKind::Sinusoid => {
                let h = m.rate * self.dt;
                let mid = m.rate * (frame + 1) as f64 * self.dt + m.phase;
                Some(-4.0 * (h / 2.0).sin().powi(2) * m.amplitude * mid.sin())
            }
            MotionKind::StepTarget => {
                if frame + 2 == self.step_frame {
                    Some(self.step_size)
                } else if frame + 1 == self.step_frame {
                    Some(-self.step_size)
                } else {
                    Some(0.0)
                }
            }
            MotionKind::RandomWalk => None,
        }
    }

    /// Frame at which a wrap-crossing trajectory passes a multiple of 2π.
    pub fn wrap_frame(&self) -> Option<usize> {
        if self.kind != MotionKind::WrapCrossing {
            return None;
        }
        let m = self.joints[0];
        if m.rate <= 0.0 {
            return None;
        }
        let next_turn = (m.start_angle / TWO_PI).floor() * TWO_PI + TWO_PI;
        let k = ((next_turn - m.start_angle) / (m.rate * self.dt)).ceil() as usize;
        (k < self.frames).then_some(k)
    }
}

/// Generate the clean reference sequence for a spec.
///
/// Deterministic given the spec (including its seed); the output doubles as
/// the ground truth, with noise applied separately by [`corrupt`].
pub fn generate(spec: &MotionSpec) -> Result<PoseSequence> {
    spec.validate()?;
    let mut frames = Vec::with_capacity(spec.frames);
    match spec.kind {
        MotionKind::RandomWalk => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut joints: Vec<Quaternion> = (0..spec.n_joints)
                .map(|j| {
                    let m = spec.motion_for(j);
                    Quaternion::from_axis_angle(&AxisAngle::new(m.axis_vec(), m.start_angle))
                })
                .collect();
            for k in 0..spec.frames {
                frames.push(PoseFrame {
                    joints: joints.clone(),
                    root: spec.root.at(k as f64 * spec.dt),
                });
                // Draw order: per joint, three velocity components.
                for (j, q) in joints.iter_mut().enumerate() {
                    let bound = spec.motion_for(j).rate.abs();
                    let w = if bound > 0.0 {
                        Vec3::new(
                            rng.random_range(-bound..bound),
                            rng.random_range(-bound..bound),
                            rng.random_range(-bound..bound),
                        )
                    } else {
                        Vec3::zeros()
                    };
                    let delta = Quaternion::from_rotation_vector(&(w * spec.dt));
                    *q = delta.hamilton(q);
                }
            }
        }
        _ => {
            for k in 0..spec.frames {
                let joints = (0..spec.n_joints)
                    .map(|j| {
                        let m = spec.motion_for(j);
                        let angle = spec
                            .analytic_angle(j, k)
                            .expect("closed-form kinds have analytic angles");
                        Quaternion::from_axis_angle(&AxisAngle::new(m.axis_vec(), angle))
                    })
                    .collect();
                frames.push(PoseFrame {
                    joints,
                    root: spec.root.at(k as f64 * spec.dt),
                });
            }
        }
    }
    Ok(PoseSequence::new(frames, spec.dt))
}

/// Compose estimator-style noise onto a clean sequence.
///
/// Per joint and frame, a rotation with half-normal(σ) angle about a uniform
/// random axis left-composes onto the pose; the root jitters with an
/// isotropic Gaussian. Outputs are renormalized unit quaternions. The draw
/// order per frame is: each joint's axis then angle, then the root jitter.
pub fn corrupt(
    seq: &PoseSequence,
    angular_sigma: f64,
    positional_sigma: f64,
    seed: u64,
) -> PoseSequence {
    if angular_sigma == 0.0 && positional_sigma == 0.0 {
        return seq.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle_dist = Normal::new(0.0, angular_sigma.max(f64::MIN_POSITIVE)).unwrap();
    let pos_dist = Normal::new(0.0, positional_sigma.max(f64::MIN_POSITIVE)).unwrap();
    let frames = seq
        .frames
        .iter()
        .map(|frame| {
            let joints = frame
                .joints
                .iter()
                .map(|q| {
                    let axis: [f64; 3] = UnitSphere.sample(&mut rng);
                    let angle = if angular_sigma > 0.0 {
                        angle_dist.sample(&mut rng).abs()
                    } else {
                        0.0
                    };
                    let delta =
                        Quaternion::from_axis_angle(&AxisAngle::new(Vec3::from(axis), angle));
                    delta.hamilton(q).normalize()
                })
                .collect();
            let jitter = if positional_sigma > 0.0 {
                Vec3::new(
                    pos_dist.sample(&mut rng),
                    pos_dist.sample(&mut rng),
                    pos_dist.sample(&mut rng),
                )
            } else {
                Vec3::zeros()
            };
            PoseFrame {
                joints,
                root: frame.root + jitter,
            }
        })
        .collect();
    PoseSequence::new(frames, seq.dt)
}
