//! Gain prediction network: two dense blocks with layer normalization and a
//! leaky rectifier, followed by one linear head per controller parameter.
//!
//! Inputs are the current pose quaternions, angular velocities, reference
//! quaternions, root translation, root velocity, and reference root
//! translation, concatenated in that order into a single vector of width
//! `11·N + 9` (273 for the 24-joint humanoid). Gain heads are squashed with a
//! sigmoid and scaled to `[0, s]` per [`GainScales`]; the bias head is
//! unscaled. No training happens here: weights are loaded from a file or
//! generated deterministically from a seed.
//!
//! # Weight file
//!
//! A JSON object with `joints`, `input_dim`, `hidden_dim`, and a `layers`
//! map of row-major matrices (`[out][in]`) and bias vectors, in this order:
//!
//! 1. `trunk1.weight` (hidden × input), `trunk1.bias`
//! 2. `norm1.gamma`, `norm1.beta`
//! 3. `trunk2.weight` (hidden × hidden), `trunk2.bias`
//! 4. `norm2.gamma`, `norm2.beta`
//! 5. `head_kappa_p.weight` (N × hidden), `head_kappa_p.bias`
//! 6. `head_kappa_d.weight`, `head_kappa_d.bias`
//! 7. `head_kappa_a.weight`, `head_kappa_a.bias`
//! 8. `head_bias.weight` (3N × hidden), `head_bias.bias`
//! 9. `head_root_kappa_p.weight` (1 × hidden), `head_root_kappa_p.bias`
//! 10. `head_root_kappa_d.weight` (1 × hidden), `head_root_kappa_d.bias`
//!
//! Layer normalization uses population variance with `ε = 1e-5`; the leaky
//! rectifier slope is `0.01`. Seeded generation fills the layers in the order
//! above, row-major within each matrix, drawing weights and biases uniformly
//! from `[-0.5, 0.5)`, gamma from `1 + [-0.25, 0.25)`, and beta from
//! `[-0.25, 0.25)`, using the ChaCha8 generator.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GainScales, GainSet, Gains, JointState};
use crate::integrate::RootState;
use crate::rot::Quaternion;
use crate::{Error, Result, Vec3};

pub const LAYER_NORM_EPS: f64 = 1e-5;
pub const LEAKY_SLOPE: f64 = 0.01;

/// Network shape; `input_dim` is always `11·joints + 9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDims {
    pub joints: usize,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl NetworkDims {
    pub fn for_joints(joints: usize, hidden_dim: usize) -> Self {
        Self {
            joints,
            input_dim: 11 * joints + 9,
            hidden_dim,
        }
    }
}

/// Row-major dense layer.
#[derive(Debug, Clone, PartialEq)]
struct Dense {
    weight: Vec<f64>,
    bias: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Dense {
    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.rows {
            let row = &self.weight[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.bias[r];
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            out.push(acc);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LayerNorm {
    gamma: Vec<f64>,
    beta: Vec<f64>,
}

impl LayerNorm {
    fn apply(&self, x: &mut [f64]) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        for (v, (g, b)) in x.iter_mut().zip(self.gamma.iter().zip(&self.beta)) {
            *v = (*v - mean) * inv * g + b;
        }
    }
}

#[inline]
fn leaky_relu(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v *= LEAKY_SLOPE;
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Raw (pre-sigmoid) head outputs of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RawHeads {
    pub kappa_p: Vec<f64>,
    pub kappa_d: Vec<f64>,
    pub kappa_a: Vec<f64>,
    pub bias: Vec<f64>,
    pub root_kappa_p: f64,
    pub root_kappa_d: f64,
}

/// The gain prediction network. See the module docs for the layer layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlNet {
    dims: NetworkDims,
    trunk1: Dense,
    norm1: LayerNorm,
    trunk2: Dense,
    norm2: LayerNorm,
    head_kappa_p: Dense,
    head_kappa_d: Dense,
    head_kappa_a: Dense,
    head_bias: Dense,
    head_root_kappa_p: Dense,
    head_root_kappa_d: Dense,
}

impl ControlNet {
    pub fn dims(&self) -> NetworkDims {
        self.dims
    }

    /// Deterministic random initialization; identical seeds give identical
    /// networks on every platform.
    pub fn random(joints: usize, hidden_dim: usize, seed: u64) -> Self {
        let dims = NetworkDims::for_joints(joints, hidden_dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dense = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| Dense {
            weight: (0..rows * cols)
                .map(|_| rng.random_range(-0.5..0.5))
                .collect(),
            bias: (0..rows).map(|_| rng.random_range(-0.5..0.5)).collect(),
            rows,
            cols,
        };
        let norm = |n: usize, rng: &mut ChaCha8Rng| LayerNorm {
            gamma: (0..n).map(|_| 1.0 + rng.random_range(-0.25..0.25)).collect(),
            beta: (0..n).map(|_| rng.random_range(-0.25..0.25)).collect(),
        };
        let h = hidden_dim;
        let trunk1 = dense(h, dims.input_dim, &mut rng);
        let norm1 = norm(h, &mut rng);
        let trunk2 = dense(h, h, &mut rng);
        let norm2 = norm(h, &mut rng);
        let head_kappa_p = dense(joints, h, &mut rng);
        let head_kappa_d = dense(joints, h, &mut rng);
        let head_kappa_a = dense(joints, h, &mut rng);
        let head_bias = dense(3 * joints, h, &mut rng);
        let head_root_kappa_p = dense(1, h, &mut rng);
        let head_root_kappa_d = dense(1, h, &mut rng);
        Self {
            dims,
            trunk1,
            norm1,
            trunk2,
            norm2,
            head_kappa_p,
            head_kappa_d,
            head_kappa_a,
            head_bias,
            head_root_kappa_p,
            head_root_kappa_d,
        }
    }

    /// Zero all head weights and biases (every gain becomes `s/2`).
    pub fn zero_heads(&mut self) {
        for head in [
            &mut self.head_kappa_p,
            &mut self.head_kappa_d,
            &mut self.head_kappa_a,
            &mut self.head_bias,
            &mut self.head_root_kappa_p,
            &mut self.head_root_kappa_d,
        ] {
            head.weight.iter_mut().for_each(|w| *w = 0.0);
            head.bias.iter_mut().for_each(|b| *b = 0.0);
        }
    }

    /// Concatenate the network input in the documented block order.
    pub fn build_input(
        joints: &[JointState],
        refs: &[Quaternion],
        root: &RootState,
        root_ref: &Vec3,
    ) -> Vec<f64> {
        let mut x = Vec::with_capacity(11 * joints.len() + 9);
        for j in joints {
            x.extend_from_slice(&[j.q.w, j.q.x, j.q.y, j.q.z]);
        }
        for j in joints {
            x.extend_from_slice(&[j.omega.x, j.omega.y, j.omega.z]);
        }
        for q in refs {
            x.extend_from_slice(&[q.w, q.x, q.y, q.z]);
        }
        x.extend_from_slice(&[root.r.x, root.r.y, root.r.z]);
        x.extend_from_slice(&[root.v.x, root.v.y, root.v.z]);
        x.extend_from_slice(&[root_ref.x, root_ref.y, root_ref.z]);
        x
    }

    /// Run the trunk and heads, returning raw (unscaled) outputs.
    pub fn forward(&self, input: &[f64]) -> Result<RawHeads> {
        if input.len() != self.dims.input_dim {
            return Err(Error::ShapeMismatch {
                context: "network input".into(),
                expected: self.dims.input_dim,
                got: input.len(),
            });
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "network input" });
        }
        let mut h = Vec::with_capacity(self.dims.hidden_dim);
        self.trunk1.apply(input, &mut h);
        self.norm1.apply(&mut h);
        leaky_relu(&mut h);
        let mut h2 = Vec::with_capacity(self.dims.hidden_dim);
        self.trunk2.apply(&h, &mut h2);
        self.norm2.apply(&mut h2);
        leaky_relu(&mut h2);

        let mut kappa_p = Vec::new();
        let mut kappa_d = Vec::new();
        let mut kappa_a = Vec::new();
        let mut bias = Vec::new();
        let mut root_p = Vec::new();
        let mut root_d = Vec::new();
        self.head_kappa_p.apply(&h2, &mut kappa_p);
        self.head_kappa_d.apply(&h2, &mut kappa_d);
        self.head_kappa_a.apply(&h2, &mut kappa_a);
        self.head_bias.apply(&h2, &mut bias);
        self.head_root_kappa_p.apply(&h2, &mut root_p);
        self.head_root_kappa_d.apply(&h2, &mut root_d);
        Ok(RawHeads {
            kappa_p,
            kappa_d,
            kappa_a,
            bias,
            root_kappa_p: root_p[0],
            root_kappa_d: root_d[0],
        })
    }

    /// Forward pass plus sigmoid scaling into the gain box.
    pub fn predict(
        &self,
        joints: &[JointState],
        refs: &[Quaternion],
        root: &RootState,
        root_ref: &Vec3,
        scales: &GainScales,
    ) -> Result<GainSet> {
        if joints.len() != self.dims.joints || refs.len() != self.dims.joints {
            return Err(Error::ShapeMismatch {
                context: "network joint count".into(),
                expected: self.dims.joints,
                got: joints.len().min(refs.len()),
            });
        }
        let input = Self::build_input(joints, refs, root, root_ref);
        let raw = self.forward(&input)?;
        let gains = (0..self.dims.joints)
            .map(|j| Gains {
                kappa_p: sigmoid(raw.kappa_p[j]) * scales.s_p,
                kappa_d: sigmoid(raw.kappa_d[j]) * scales.s_d,
                kappa_a: sigmoid(raw.kappa_a[j]) * scales.s_a,
                bias: Vec3::new(raw.bias[3 * j], raw.bias[3 * j + 1], raw.bias[3 * j + 2]),
            })
            .collect();
        Ok(GainSet {
            joints: gains,
            root_kappa_p: sigmoid(raw.root_kappa_p) * scales.root_s_p,
            root_kappa_d: sigmoid(raw.root_kappa_d) * scales.root_s_d,
        })
    }
}

// --- weight file -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LayerData {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    joints: usize,
    input_dim: usize,
    hidden_dim: usize,
    layers: BTreeMap<String, LayerData>,
}

fn matrix_from(
    layers: &BTreeMap<String, LayerData>,
    name: &str,
    rows: usize,
    cols: usize,
) -> Result<Dense> {
    let weight = match layers.get(&format!("{name}.weight")) {
        Some(LayerData::Matrix(m)) => {
            if m.len() != rows {
                return Err(Error::ShapeMismatch {
                    context: format!("{name}.weight rows"),
                    expected: rows,
                    got: m.len(),
                });
            }
            let mut flat = Vec::with_capacity(rows * cols);
            for row in m {
                if row.len() != cols {
                    return Err(Error::ShapeMismatch {
                        context: format!("{name}.weight cols"),
                        expected: cols,
                        got: row.len(),
                    });
                }
                flat.extend_from_slice(row);
            }
            flat
        }
        _ => {
            return Err(Error::Config(format!(
                "weight file missing matrix layer `{name}.weight`"
            )))
        }
    };
    let bias = match layers.get(&format!("{name}.bias")) {
        Some(LayerData::Vector(v)) if v.len() == rows => v.clone(),
        Some(LayerData::Vector(v)) => {
            return Err(Error::ShapeMismatch {
                context: format!("{name}.bias"),
                expected: rows,
                got: v.len(),
            })
        }
        _ => {
            return Err(Error::Config(format!(
                "weight file missing vector layer `{name}.bias`"
            )))
        }
    };
    Ok(Dense {
        weight,
        bias,
        rows,
        cols,
    })
}

fn norm_from(layers: &BTreeMap<String, LayerData>, name: &str, n: usize) -> Result<LayerNorm> {
    let get = |suffix: &str| -> Result<Vec<f64>> {
        match layers.get(&format!("{name}.{suffix}")) {
            Some(LayerData::Vector(v)) if v.len() == n => Ok(v.clone()),
            Some(LayerData::Vector(v)) => Err(Error::ShapeMismatch {
                context: format!("{name}.{suffix}"),
                expected: n,
                got: v.len(),
            }),
            _ => Err(Error::Config(format!(
                "weight file missing vector layer `{name}.{suffix}`"
            ))),
        }
    };
    Ok(LayerNorm {
        gamma: get("gamma")?,
        beta: get("beta")?,
    })
}

impl ControlNet {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightFile = serde_json::from_str(text)?;
        let expected_input = 11 * file.joints + 9;
        if file.input_dim != expected_input {
            return Err(Error::ShapeMismatch {
                context: "weight file input_dim".into(),
                expected: expected_input,
                got: file.input_dim,
            });
        }
        let dims = NetworkDims::for_joints(file.joints, file.hidden_dim);
        let (n, h) = (file.joints, file.hidden_dim);
        let l = &file.layers;
        Ok(Self {
            dims,
            trunk1: matrix_from(l, "trunk1", h, dims.input_dim)?,
            norm1: norm_from(l, "norm1", h)?,
            trunk2: matrix_from(l, "trunk2", h, h)?,
            norm2: norm_from(l, "norm2", h)?,
            head_kappa_p: matrix_from(l, "head_kappa_p", n, h)?,
            head_kappa_d: matrix_from(l, "head_kappa_d", n, h)?,
            head_kappa_a: matrix_from(l, "head_kappa_a", n, h)?,
            head_bias: matrix_from(l, "head_bias", 3 * n, h)?,
            head_root_kappa_p: matrix_from(l, "head_root_kappa_p", 1, h)?,
            head_root_kappa_d: matrix_from(l, "head_root_kappa_d", 1, h)?,
        })
    }

    pub fn to_json(&self) -> String {
        let mut layers = BTreeMap::new();
        let mut put_dense = |name: &str, d: &Dense| {
            let m: Vec<Vec<f64>> = d
                .weight
                .chunks(d.cols)
                .map(|row| row.to_vec())
                .collect();
            layers.insert(format!("{name}.weight"), LayerData::Matrix(m));
            layers.insert(format!("{name}.bias"), LayerData::Vector(d.bias.clone()));
        };
        put_dense("trunk1", &self.trunk1);
        put_dense("trunk2", &self.trunk2);
        put_dense("head_kappa_p", &self.head_kappa_p);
        put_dense("head_kappa_d", &self.head_kappa_d);
        put_dense("head_kappa_a", &self.head_kappa_a);
        put_dense("head_bias", &self.head_bias);
        put_dense("head_root_kappa_p", &self.head_root_kappa_p);
        put_dense("head_root_kappa_d", &self.head_root_kappa_d);
        layers.insert("norm1.gamma".into(), LayerData::Vector(self.norm1.gamma.clone()));
        layers.insert("norm1.beta".into(), LayerData::Vector(self.norm1.beta.clone()));
        layers.insert("norm2.gamma".into(), LayerData::Vector(self.norm2.gamma.clone()));
        layers.insert("norm2.beta".into(), LayerData::Vector(self.norm2.beta.clone()));
        let file = WeightFile {
            joints: self.dims.joints,
            input_dim: self.dims.input_dim,
            hidden_dim: self.dims.hidden_dim,
            layers,
        };
        serde_json::to_string(&file).expect("weights serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
