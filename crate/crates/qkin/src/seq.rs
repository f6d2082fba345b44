//! Time-ordered pose and keypoint sequences.
//!
//! Pose sequences serialize as JSON-lines, one frame per line:
//!
//! ```text
//! {"t":0.0,"joints":[[w,x,y,z],...],"root":[x,y,z]}
//! ```
//!
//! Timestamps are uniform multiples of the sequence's step size. Keypoint
//! sequences are derived from pose sequences through forward kinematics and
//! are what the metric suite consumes.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::rot::Quaternion;
use crate::skeleton::{forward_kinematics, PoseFrame, Skeleton};
use crate::{Error, Result, Vec3};

/// Uniformly sampled sequence of full-body poses.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    pub frames: Vec<PoseFrame>,
    /// Frame spacing in seconds.
    pub dt: f64,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    t: f64,
    joints: Vec<[f64; 4]>,
    root: [f64; 3],
}

impl PoseSequence {
    pub fn new(frames: Vec<PoseFrame>, dt: f64) -> Self {
        Self { frames, dt }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn n_joints(&self) -> usize {
        self.frames.first().map_or(0, |f| f.joints.len())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, frame) in self.frames.iter().enumerate() {
            let record = FrameRecord {
                t: k as f64 * self.dt,
                joints: frame.joints.iter().map(|&q| q.into()).collect(),
                root: [frame.root.x, frame.root.y, frame.root.z],
            };
            serde_json::to_writer(&mut w, &record)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut frames = Vec::new();
        let mut times = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: FrameRecord = serde_json::from_str(&line)?;
            times.push(record.t);
            frames.push(PoseFrame {
                joints: record.joints.into_iter().map(Quaternion::from).collect(),
                root: Vec3::new(record.root[0], record.root[1], record.root[2]),
            });
        }
        if frames.is_empty() {
            return Err(Error::Config("pose sequence file has no frames".into()));
        }
        let dt = if times.len() >= 2 {
            times[1] - times[0]
        } else {
            0.04
        };
        // Reject non-uniform timestamps early; downstream metrics assume them.
        for (k, &t) in times.iter().enumerate() {
            if (t - k as f64 * dt).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "non-uniform timestamp at frame {k}: {t} (expected {})",
                    k as f64 * dt
                )));
            }
        }
        Ok(Self { frames, dt })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_jsonl(BufReader::new(std::fs::File::open(path)?))
    }
}

/// World-space keypoints plus root translations over time.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSequence {
    /// `positions[t][j]` is joint `j` at frame `t`, meters.
    pub positions: Vec<Vec<Vec3>>,
    /// Root translation per frame.
    pub roots: Vec<Vec3>,
    pub dt: f64,
}

impl KeypointSequence {
    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn n_joints(&self) -> usize {
        self.positions.first().map_or(0, |f| f.len())
    }
}

/// Run forward kinematics over a whole sequence.
pub fn fk_sequence(poses: &PoseSequence, skel: &Skeleton) -> Result<KeypointSequence> {
    let mut positions = Vec::with_capacity(poses.len());
    let mut roots = Vec::with_capacity(poses.len());
    for frame in &poses.frames {
        positions.push(forward_kinematics(frame, skel)?.positions);
        roots.push(frame.root);
    }
    Ok(KeypointSequence {
        positions,
        roots,
        dt: poses.dt,
    })
}
