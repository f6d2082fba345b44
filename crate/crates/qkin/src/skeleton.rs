//! Articulated kinematic chain and rigid forward kinematics.
//!
//! A skeleton is a topologically sorted joint hierarchy with fixed bone
//! offsets in the parent frame (meters). Forward kinematics maps per-joint
//! local quaternions plus a root translation to world-space keypoints; bone
//! lengths are preserved exactly because every transform is rigid.
//!
//! The coordinate convention of the shipped humanoid is z-up, x to the
//! figure's left, y forward. The file format is a JSON array of
//! `{name, parent, offset: [x, y, z], end_effector}` with `parent: -1` for
//! the root, which must sit at index 0.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::rot::Quaternion;
use crate::{Error, Result, Vec3};

/// Default 24-joint humanoid definition shipped with the crate.
const DEFAULT_HUMANOID: &str = include_str!("../data/humanoid24.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JointRecord {
    name: String,
    parent: i64,
    offset: [f64; 3],
    #[serde(default)]
    end_effector: bool,
}

/// One joint of the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    /// Index of the parent joint; `None` for the root.
    pub parent: Option<usize>,
    /// Rest offset from the parent joint, in the parent's frame (meters).
    pub offset: Vec3,
    pub end_effector: bool,
}

/// Joint hierarchy with fixed bone offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    joints: Vec<Joint>,
}

impl Skeleton {
    /// Validate and build a skeleton from joints.
    ///
    /// Requirements: exactly one root at index 0 (`parent == None`), every
    /// parent index smaller than its child (topological order, which also
    /// rules out cycles), and strictly positive bone lengths.
    pub fn new(joints: Vec<Joint>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::SkeletonSchema {
                joint: "<none>".into(),
                reason: "skeleton has no joints".into(),
            });
        }
        if joints[0].parent.is_some() {
            return Err(Error::SkeletonSchema {
                joint: joints[0].name.clone(),
                reason: "joint 0 must be the root (parent -1)".into(),
            });
        }
        for (i, j) in joints.iter().enumerate() {
            match j.parent {
                None if i != 0 => {
                    return Err(Error::SkeletonSchema {
                        joint: j.name.clone(),
                        reason: "multiple roots: only joint 0 may have parent -1".into(),
                    });
                }
                Some(p) if p >= i => {
                    return Err(Error::SkeletonSchema {
                        joint: j.name.clone(),
                        reason: format!(
                            "parent index {p} is not smaller than joint index {i} \
                             (joints must be topologically sorted; cycles are impossible \
                             under this ordering)"
                        ),
                    });
                }
                _ => {}
            }
            if i != 0 && j.offset.norm() <= 0.0 {
                return Err(Error::SkeletonSchema {
                    joint: j.name.clone(),
                    reason: "bone length must be positive".into(),
                });
            }
        }
        Ok(Self { joints })
    }

    /// The built-in 24-joint humanoid.
    pub fn default_humanoid() -> Self {
        Self::from_json(DEFAULT_HUMANOID).expect("embedded humanoid definition is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<JointRecord> = serde_json::from_str(text)?;
        let joints = records
            .into_iter()
            .map(|r| {
                let parent = if r.parent < 0 {
                    None
                } else {
                    Some(r.parent as usize)
                };
                Joint {
                    name: r.name,
                    parent,
                    offset: Vec3::new(r.offset[0], r.offset[1], r.offset[2]),
                    end_effector: r.end_effector,
                }
            })
            .collect();
        Self::new(joints)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let records: Vec<JointRecord> = self
            .joints
            .iter()
            .map(|j| JointRecord {
                name: j.name.clone(),
                parent: j.parent.map(|p| p as i64).unwrap_or(-1),
                offset: [j.offset.x, j.offset.y, j.offset.z],
                end_effector: j.end_effector,
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("skeleton serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.joints.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    #[inline]
    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    /// Indices of joints flagged as end effectors (used for foot contact).
    pub fn end_effectors(&self) -> Vec<usize> {
        self.joints
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.end_effector.then_some(i))
            .collect()
    }

    /// Scale each bone by `1 + β_j` (per-bone shape adjustment).
    ///
    /// `beta` has one entry per joint; the root entry is ignored. Scales must
    /// stay above -1 so bone lengths remain positive.
    pub fn apply_shape(&self, beta: &[f64]) -> Result<Skeleton> {
        if beta.len() != self.joints.len() {
            return Err(Error::ShapeMismatch {
                context: "apply_shape beta".into(),
                expected: self.joints.len(),
                got: beta.len(),
            });
        }
        let mut joints = self.joints.clone();
        for (i, j) in joints.iter_mut().enumerate() {
            if i == 0 {
                continue;
            }
            if beta[i] <= -1.0 {
                return Err(Error::SkeletonSchema {
                    joint: j.name.clone(),
                    reason: format!("shape scale {} would collapse the bone", beta[i]),
                });
            }
            j.offset *= 1.0 + beta[i];
        }
        Ok(Skeleton { joints })
    }
}

/// Full-body pose: one local quaternion per joint plus the root translation.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    pub joints: Vec<Quaternion>,
    pub root: Vec3,
}

impl PoseFrame {
    pub fn identity(n_joints: usize) -> Self {
        Self {
            joints: vec![Quaternion::identity(); n_joints],
            root: Vec3::zeros(),
        }
    }
}

/// World-space joint positions for one frame (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointFrame {
    pub positions: Vec<Vec3>,
}

/// Rigid forward kinematics.
///
/// World rotation of a joint is the parent chain composed with its local
/// quaternion; world position is the parent position plus the parent's world
/// rotation applied to the bone offset. The root sits at the frame's
/// translation.
pub fn forward_kinematics(pose: &PoseFrame, skel: &Skeleton) -> Result<KeypointFrame> {
    if pose.joints.len() != skel.len() {
        return Err(Error::ShapeMismatch {
            context: "forward_kinematics pose".into(),
            expected: skel.len(),
            got: pose.joints.len(),
        });
    }
    let mut world_rot = Vec::with_capacity(skel.len());
    let mut positions = Vec::with_capacity(skel.len());
    for (i, joint) in skel.joints().iter().enumerate() {
        match joint.parent {
            None => {
                world_rot.push(pose.joints[i]);
                positions.push(pose.root);
            }
            Some(p) => {
                let rot_p: Quaternion = world_rot[p];
                positions.push(positions[p] + rot_p.rotate(&joint.offset));
                world_rot.push(rot_p.hamilton(&pose.joints[i]));
            }
        }
    }
    Ok(KeypointFrame { positions })
}
