//! Angular-acceleration control: meta-PD term, additive bias, and the
//! second-order acceleration enhancement.
//!
//! Per joint, the commanded angular acceleration is
//!
//! ```text
//! ω̇ = κP·vec(q̂ ⊗ q*) − κD·ω + b + κA·(vec(q̂_t ⊗ q̂*_{t-1}) − vec(q̂_{t-1} ⊗ q̂*_{t-2}))
//! ```
//!
//! where `q̂` is the reference pose, `q` the tracked pose, and the last term
//! is the second-order quaternion difference of the three most recent
//! references. It reinforces the controller while the reference accelerates
//! and cancels exactly when references advance at a constant angular
//! increment. All quaternion pairs are sign-canonicalized before products so
//! the double cover never produces a long-way-around error.

mod net;
mod tune;

pub use net::{ControlNet, NetworkDims, LAYER_NORM_EPS, LEAKY_SLOPE};
pub use tune::{search_minimum, Candidate, SearchSpec};

use serde::{Deserialize, Serialize};

use crate::integrate::RootState;
use crate::rot::Quaternion;
use crate::skeleton::PoseFrame;
use crate::{Error, Result, Vec3};

/// Sigmoid scale bounds for predicted gains. Joint gains live in
/// `[0, s_p] × [0, s_d] × [0, s_a]`; the root translation controller has its
/// own, larger bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainScales {
    pub s_a: f64,
    pub s_p: f64,
    pub s_d: f64,
    pub root_s_p: f64,
    pub root_s_d: f64,
}

impl Default for GainScales {
    fn default() -> Self {
        Self {
            s_a: 40.0,
            s_p: 40.0,
            s_d: 30.0,
            root_s_p: 200.0,
            root_s_d: 200.0,
        }
    }
}

/// Per-joint controller parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub kappa_p: f64,
    pub kappa_d: f64,
    pub kappa_a: f64,
    /// Additive acceleration bias, rad/s².
    pub bias: Vec3,
}

impl Gains {
    pub fn new(kappa_p: f64, kappa_d: f64, kappa_a: f64) -> Self {
        Self {
            kappa_p,
            kappa_d,
            kappa_a,
            bias: Vec3::zeros(),
        }
    }

    pub fn validate(&self, scales: &GainScales) -> Result<()> {
        let in_box = |v: f64, s: f64| (0.0..=s).contains(&v);
        if !in_box(self.kappa_p, scales.s_p)
            || !in_box(self.kappa_d, scales.s_d)
            || !in_box(self.kappa_a, scales.s_a)
        {
            return Err(Error::Config(format!(
                "gains ({}, {}, {}) outside the scale box [0,{}]x[0,{}]x[0,{}]",
                self.kappa_p, self.kappa_d, self.kappa_a, scales.s_p, scales.s_d, scales.s_a
            )));
        }
        Ok(())
    }
}

/// One evaluation of a gain policy: per-joint gains plus root PD gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    pub joints: Vec<Gains>,
    pub root_kappa_p: f64,
    pub root_kappa_d: f64,
}

impl GainSet {
    pub fn constant(n_joints: usize, joint: Gains, root_kp: f64, root_kd: f64) -> Self {
        Self {
            joints: vec![joint; n_joints],
            root_kappa_p: root_kp,
            root_kappa_d: root_kd,
        }
    }

    pub fn validate(&self, scales: &GainScales) -> Result<()> {
        for g in &self.joints {
            g.validate(scales)?;
        }
        let ok = (0.0..=scales.root_s_p).contains(&self.root_kappa_p)
            && (0.0..=scales.root_s_d).contains(&self.root_kappa_d);
        if !ok {
            return Err(Error::Config(format!(
                "root gains ({}, {}) outside [0,{}]x[0,{}]",
                self.root_kappa_p, self.root_kappa_d, scales.root_s_p, scales.root_s_d
            )));
        }
        Ok(())
    }
}

/// The three most recent reference quaternions for one joint, oldest first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointRefWindow {
    pub prev2: Quaternion,
    pub prev1: Quaternion,
    pub current: Quaternion,
}

/// Rolling window of the last three reference frames plus the current root
/// target. At start-up the earliest frame is repeated so the enhancement term
/// is zero rather than spiking.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceWindow {
    pub joints: Vec<JointRefWindow>,
    pub root: Vec3,
}

impl ReferenceWindow {
    /// Seed the window by repeating the first reference frame.
    pub fn seeded(first: &PoseFrame) -> Self {
        Self {
            joints: first
                .joints
                .iter()
                .map(|&q| JointRefWindow {
                    prev2: q,
                    prev1: q,
                    current: q,
                })
                .collect(),
            root: first.root,
        }
    }

    /// Shift the window forward with a newly observed reference frame.
    pub fn push(&mut self, frame: &PoseFrame) {
        for (w, &q) in self.joints.iter_mut().zip(&frame.joints) {
            w.prev2 = w.prev1;
            w.prev1 = w.current;
            w.current = q;
        }
        self.root = frame.root;
    }
}

/// Vector part of the quaternion error `vec(q̂ ⊗ q*)`, sign-canonicalized.
///
/// Zero exactly (bit-wise) when `q̂ == q`.
pub fn pd_error(q_ref: &Quaternion, q: &Quaternion) -> Result<Vec3> {
    q_ref.check_unit("pd_error reference")?;
    q.check_unit("pd_error pose")?;
    let q_ref = q_ref.aligned_with(q);
    Ok(q_ref.hamilton(&q.conjugate()).vec())
}

/// Second-order quaternion difference of the reference window:
/// `vec(q̂_t ⊗ q̂*_{t-1}) − vec(q̂_{t-1} ⊗ q̂*_{t-2})`.
///
/// Vanishes when the window advances by a constant rotation increment and is
/// exactly zero for a frozen reference.
pub fn accel_enhancement(w: &JointRefWindow) -> Vec3 {
    let newer = w.current.aligned_with(&w.prev1);
    let first = newer.hamilton(&w.prev1.conjugate()).vec();
    let older = w.prev1.aligned_with(&w.prev2);
    let second = older.hamilton(&w.prev2.conjugate()).vec();
    first - second
}

/// Full commanded angular acceleration for one joint.
pub fn angular_accel(
    q: &Quaternion,
    omega: &Vec3,
    window: &JointRefWindow,
    gains: &Gains,
) -> Result<Vec3> {
    let err = pd_error(&window.current, q)?;
    Ok(gains.kappa_p * err - gains.kappa_d * omega
        + gains.bias
        + gains.kappa_a * accel_enhancement(window))
}

/// Per-joint dynamic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub q: Quaternion,
    pub omega: Vec3,
}

/// Complete simulation state: joints, root, and per-bone shape offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub joints: Vec<JointState>,
    pub root: RootState,
    pub beta_fix: Vec<f64>,
}

/// Analytic initial state from the first two reference frames.
///
/// Pose and root position adopt the first reference; the initial velocities
/// come from the difference of the first two: `ω_0` is the rotation vector of
/// `q̂_1 ⊗ q̂*_0` over `Δt`, and `v_0 = (r̂_1 − r̂_0)/Δt`. Shape offsets start
/// at zero.
pub fn init_state(frame0: &PoseFrame, frame1: &PoseFrame, dt: f64) -> Result<FullState> {
    if frame0.joints.len() != frame1.joints.len() {
        return Err(Error::ShapeMismatch {
            context: "init_state reference frames".into(),
            expected: frame0.joints.len(),
            got: frame1.joints.len(),
        });
    }
    let mut joints = Vec::with_capacity(frame0.joints.len());
    for (q0, q1) in frame0.joints.iter().zip(&frame1.joints) {
        q0.check_unit("init_state reference")?;
        q1.check_unit("init_state reference")?;
        let q1 = q1.aligned_with(q0);
        let delta = q1.hamilton(&q0.conjugate());
        joints.push(JointState {
            q: *q0,
            omega: delta.to_rotation_vector() / dt,
        });
    }
    Ok(FullState {
        root: RootState::new(frame0.root, (frame1.root - frame0.root) / dt),
        beta_fix: vec![0.0; frame0.joints.len()],
        joints,
    })
}

/// How gains are produced each step.
#[derive(Debug, Clone)]
pub enum GainPolicy {
    /// The same gains every step, shared across joints.
    Constant {
        joint: Gains,
        root_kappa_p: f64,
        root_kappa_d: f64,
    },
    /// Forward pass of a [`ControlNet`] on the current state and references.
    Network(Box<ControlNet>),
}

impl GainPolicy {
    pub fn constant(joint: Gains, root_kp: f64, root_kd: f64) -> Self {
        GainPolicy::Constant {
            joint,
            root_kappa_p: root_kp,
            root_kappa_d: root_kd,
        }
    }

    /// Produce the gain set for the current step.
    pub fn evaluate(
        &self,
        joints: &[JointState],
        window: &ReferenceWindow,
        root: &RootState,
        scales: &GainScales,
    ) -> Result<GainSet> {
        let set = match self {
            GainPolicy::Constant {
                joint,
                root_kappa_p,
                root_kappa_d,
            } => GainSet::constant(joints.len(), *joint, *root_kappa_p, *root_kappa_d),
            GainPolicy::Network(net) => {
                let refs: Vec<Quaternion> = window.joints.iter().map(|w| w.current).collect();
                net.predict(joints, &refs, root, &window.root, scales)?
            }
        };
        set.validate(scales)?;
        Ok(set)
    }
}
