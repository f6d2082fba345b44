//! Experiment runner: generates references, tracks them with the configured
//! controller and integrator, runs forward kinematics, and accumulates the
//! metric suite. Also drives the representation ablation matrix and the
//! constant-gain search.
//!
//! The tracking loop is strictly online: the initial state consumes the first
//! two reference frames (pose from the first, velocities from their
//! difference), and step `t` afterwards reads reference `t` only — never
//! anything later. [`track`] is generic over [`ReferenceSource`] so tests can
//! interpose access loggers to prove that claim.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{
    accel_enhancement, angular_accel, init_state, Candidate, ControlNet, GainPolicy, GainScales,
    Gains, JointRefWindow, JointState, ReferenceWindow, SearchSpec,
};
use crate::integrate::{
    step_approx_renorm, step_axis_angle, step_euler_repr, step_exact, step_omega, step_root,
    FrameConvention, IntegratorKind, StepConfig,
};
use crate::metrics::{compute_report, loss_total, ContactConfig, LossBreakdown, MetricReport};
use crate::rot::{geodesic_angle, EulerAngles, EulerSeq, Quaternion};
use crate::seq::{fk_sequence, PoseSequence};
use crate::skeleton::{PoseFrame, Skeleton};
use crate::synth::{corrupt, generate, MotionSpec};
use crate::{Error, Result, Vec3};

/// Joint rotation representation used by the tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Quaternion,
    EulerXyz,
    EulerZxy,
    AxisAngle,
}

/// Gain policy selection for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum GainConfig {
    Constant {
        kappa_p: f64,
        kappa_d: f64,
        #[serde(default)]
        kappa_a: f64,
        #[serde(default)]
        bias: [f64; 3],
        root_kappa_p: f64,
        root_kappa_d: f64,
    },
    /// Load network weights from a JSON file.
    NetworkFile { weights: PathBuf },
    /// Deterministically generated network (useful without a weight file).
    NetworkSeed { seed: u64, hidden_dim: usize },
}

impl Default for GainConfig {
    fn default() -> Self {
        GainConfig::Constant {
            kappa_p: 40.0,
            kappa_d: 30.0,
            kappa_a: 0.0,
            bias: [0.0; 3],
            root_kappa_p: 20.0,
            root_kappa_d: 20.0,
        }
    }
}

/// Complete run description; the resolved form is echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub motions: Vec<MotionSpec>,
    pub representation: Representation,
    /// Apply the policy's additive acceleration bias.
    pub use_bias: bool,
    /// Integrate quaternions with the exact unit-sphere step instead of the
    /// renormalizing approximation. Ignored by non-quaternion trackers.
    pub use_exact_s3: bool,
    /// Apply the second-order acceleration enhancement.
    pub use_accel_enhancement: bool,
    pub gains: GainConfig,
    pub seeds: Vec<u64>,
    /// Flip each integrator's frame convention (sensitivity studies).
    pub flip_frame: bool,
    /// Skeleton definition file; the built-in humanoid when absent.
    pub skeleton: Option<PathBuf>,
    /// Shape-loss weight in the training objective.
    pub lambda: f64,
    pub contact: ContactConfig,
    /// Abort threshold on any joint's angular speed, rad/s.
    pub omega_limit: f64,
    /// Abort threshold on the root linear speed, m/s.
    pub velocity_limit: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            motions: vec![MotionSpec::default()],
            representation: Representation::Quaternion,
            use_bias: true,
            use_exact_s3: true,
            use_accel_enhancement: true,
            gains: GainConfig::default(),
            seeds: vec![0, 1, 2, 3, 4],
            flip_frame: false,
            skeleton: None,
            lambda: 0.01,
            contact: ContactConfig::default(),
            omega_limit: 1e3,
            velocity_limit: 1e3,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.motions.is_empty() {
            return Err(Error::Config("no motion specs in config".into()));
        }
        for m in &self.motions {
            m.validate()?;
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        if let GainConfig::Constant {
            kappa_p,
            kappa_d,
            kappa_a,
            bias,
            root_kappa_p,
            root_kappa_d,
        } = &self.gains
        {
            let mut g = Gains::new(*kappa_p, *kappa_d, *kappa_a);
            g.bias = Vec3::from(*bias);
            g.validate(&GainScales::default())?;
            let scales = GainScales::default();
            if !(0.0..=scales.root_s_p).contains(root_kappa_p)
                || !(0.0..=scales.root_s_d).contains(root_kappa_d)
            {
                return Err(Error::Config(format!(
                    "root gains ({root_kappa_p}, {root_kappa_d}) outside [0,{}]x[0,{}]",
                    scales.root_s_p, scales.root_s_d
                )));
            }
        }
        Ok(())
    }

    pub fn build_skeleton(&self) -> Result<Skeleton> {
        match &self.skeleton {
            Some(path) => Skeleton::load(path),
            None => Ok(Skeleton::default_humanoid()),
        }
    }

    pub fn build_policy(&self, n_joints: usize) -> Result<GainPolicy> {
        match &self.gains {
            GainConfig::Constant {
                kappa_p,
                kappa_d,
                kappa_a,
                bias,
                root_kappa_p,
                root_kappa_d,
            } => {
                let mut joint = Gains::new(*kappa_p, *kappa_d, *kappa_a);
                joint.bias = Vec3::from(*bias);
                Ok(GainPolicy::constant(joint, *root_kappa_p, *root_kappa_d))
            }
            GainConfig::NetworkFile { weights } => {
                let net = ControlNet::load(weights)?;
                if net.dims().joints != n_joints {
                    return Err(Error::ShapeMismatch {
                        context: "network weight file joint count".into(),
                        expected: n_joints,
                        got: net.dims().joints,
                    });
                }
                Ok(GainPolicy::Network(Box::new(net)))
            }
            GainConfig::NetworkSeed { seed, hidden_dim } => Ok(GainPolicy::Network(Box::new(
                ControlNet::random(n_joints, *hidden_dim, *seed),
            ))),
        }
    }
}

/// Reference stream consumed by the tracking loop.
pub trait ReferenceSource {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn dt(&self) -> f64;
    fn frame(&self, idx: usize) -> &PoseFrame;
}

impl ReferenceSource for PoseSequence {
    fn len(&self) -> usize {
        self.frames.len()
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn frame(&self, idx: usize) -> &PoseFrame {
        &self.frames[idx]
    }
}

/// Tracker parameters resolved from a [`RunConfig`].
pub struct SimParams<'a> {
    pub representation: Representation,
    pub use_bias: bool,
    pub use_exact_s3: bool,
    pub use_accel_enhancement: bool,
    pub flip_frame: bool,
    pub policy: &'a GainPolicy,
    pub scales: GainScales,
    pub omega_limit: f64,
    pub velocity_limit: f64,
}

/// Output of one tracking run.
#[derive(Debug, Clone)]
pub struct TrackRun {
    /// Predicted poses; frame 0 is the initialized state.
    pub trajectory: PoseSequence,
    /// Max-over-joints geodesic error against the reference consumed at each
    /// step (length `T − 1`: the final state has no reference of its own).
    pub per_frame_error: Vec<f64>,
    pub max_omega: f64,
}

enum RepState {
    Quat(Vec<Quaternion>),
    Euler(EulerSeq, Vec<[f64; 3]>),
    Axis(Vec<Vec3>),
}

fn euler_angles_of(q: &Quaternion, seq: EulerSeq) -> [f64; 3] {
    q.to_euler(seq).angles.angles
}

impl RepState {
    fn init(rep: Representation, f0: &PoseFrame, f1: &PoseFrame, dt: f64) -> (Self, Vec<Vec3>) {
        match rep {
            Representation::Quaternion => unreachable!("quaternion path uses init_state"),
            Representation::EulerXyz | Representation::EulerZxy => {
                let seq = if rep == Representation::EulerXyz {
                    EulerSeq::Xyz
                } else {
                    EulerSeq::Zxy
                };
                let a0: Vec<[f64; 3]> = f0.joints.iter().map(|q| euler_angles_of(q, seq)).collect();
                let a1: Vec<[f64; 3]> = f1.joints.iter().map(|q| euler_angles_of(q, seq)).collect();
                // Naive component-wise finite difference; representation
                // wraps intentionally leak into the velocity estimate.
                let omega = a0
                    .iter()
                    .zip(&a1)
                    .map(|(p, n)| {
                        Vec3::new(
                            (n[0] - p[0]) / dt,
                            (n[1] - p[1]) / dt,
                            (n[2] - p[2]) / dt,
                        )
                    })
                    .collect();
                (RepState::Euler(seq, a0), omega)
            }
            Representation::AxisAngle => {
                let v0: Vec<Vec3> = f0.joints.iter().map(|q| q.to_rotation_vector()).collect();
                let v1: Vec<Vec3> = f1.joints.iter().map(|q| q.to_rotation_vector()).collect();
                let omega = v0.iter().zip(&v1).map(|(p, n)| (n - p) / dt).collect();
                (RepState::Axis(v0), omega)
            }
        }
    }

    fn error(&self, j: usize, reference: &Quaternion) -> Result<Vec3> {
        Ok(match self {
            RepState::Quat(qs) => crate::control::pd_error(reference, &qs[j])?,
            RepState::Euler(seq, thetas) => {
                let r = euler_angles_of(reference, *seq);
                let t = thetas[j];
                Vec3::new(r[0] - t[0], r[1] - t[1], r[2] - t[2])
            }
            RepState::Axis(vs) => reference.to_rotation_vector() - vs[j],
        })
    }

    fn alpha(&self, w: &JointRefWindow) -> Vec3 {
        match self {
            RepState::Quat(_) => accel_enhancement(w),
            RepState::Euler(seq, _) => {
                let c = euler_angles_of(&w.current, *seq);
                let p1 = euler_angles_of(&w.prev1, *seq);
                let p2 = euler_angles_of(&w.prev2, *seq);
                Vec3::new(
                    (c[0] - p1[0]) - (p1[0] - p2[0]),
                    (c[1] - p1[1]) - (p1[1] - p2[1]),
                    (c[2] - p1[2]) - (p1[2] - p2[2]),
                )
            }
            RepState::Axis(_) => {
                let c = w.current.to_rotation_vector();
                let p1 = w.prev1.to_rotation_vector();
                let p2 = w.prev2.to_rotation_vector();
                (c - p1) - (p1 - p2)
            }
        }
    }

    fn integrate(&mut self, j: usize, omega_next: &Vec3, cfg: &StepConfig) -> Result<()> {
        match self {
            RepState::Quat(qs) => {
                qs[j] = match cfg.kind {
                    IntegratorKind::ApproxRenorm => step_approx_renorm(&qs[j], omega_next, cfg)?,
                    _ => step_exact(&qs[j], omega_next, cfg)?,
                };
            }
            RepState::Euler(seq, thetas) => {
                let angles = EulerAngles::new(*seq, thetas[j]);
                thetas[j] = step_euler_repr(&angles, omega_next, cfg).angles;
            }
            RepState::Axis(vs) => {
                vs[j] = step_axis_angle(&vs[j], omega_next, cfg);
            }
        }
        Ok(())
    }

    fn pose_quat(&self, j: usize) -> Quaternion {
        match self {
            RepState::Quat(qs) => qs[j],
            RepState::Euler(seq, thetas) => {
                Quaternion::from_euler(&EulerAngles::new(*seq, thetas[j]))
            }
            RepState::Axis(vs) => Quaternion::from_rotation_vector(&vs[j]),
        }
    }
}

/// Track a reference stream with the configured controller and integrator.
pub fn track<S: ReferenceSource + ?Sized>(source: &S, params: &SimParams) -> Result<TrackRun> {
    let t_total = source.len();
    if t_total < 3 {
        return Err(Error::Config(format!(
            "tracking needs at least 3 reference frames, got {t_total}"
        )));
    }
    let dt = source.dt();
    let f0 = source.frame(0).clone();
    let f1 = source.frame(1).clone();
    let n = f0.joints.len();

    let quat_init = init_state(&f0, &f1, dt)?;
    let (mut rep, mut omegas) = match params.representation {
        Representation::Quaternion => (
            RepState::Quat(quat_init.joints.iter().map(|s| s.q).collect()),
            quat_init.joints.iter().map(|s| s.omega).collect::<Vec<_>>(),
        ),
        other => RepState::init(other, &f0, &f1, dt),
    };
    let mut root = quat_init.root;

    let pose_kind = match params.representation {
        Representation::Quaternion if params.use_exact_s3 => IntegratorKind::ExactS3,
        Representation::Quaternion => IntegratorKind::ApproxRenorm,
        Representation::EulerXyz => IntegratorKind::EulerAnglesXyz,
        Representation::EulerZxy => IntegratorKind::EulerAnglesZxy,
        Representation::AxisAngle => IntegratorKind::AxisAngle,
    };
    let mut cfg = StepConfig::for_kind(pose_kind, dt);
    if params.flip_frame {
        cfg.frame = match cfg.frame {
            FrameConvention::WorldLeft => FrameConvention::BodyRight,
            FrameConvention::BodyRight => FrameConvention::WorldLeft,
        };
    }

    let mut window = ReferenceWindow::seeded(&f0);
    let mut trajectory = Vec::with_capacity(t_total);
    trajectory.push(PoseFrame {
        joints: (0..n).map(|j| rep.pose_quat(j)).collect(),
        root: root.r,
    });
    let mut per_frame_error = Vec::with_capacity(t_total - 1);
    let mut max_omega: f64 = 0.0;

    for t in 0..t_total - 1 {
        if t >= 1 {
            let ft = source.frame(t).clone();
            window.push(&ft);
        }

        let mut frame_err: f64 = 0.0;
        for j in 0..n {
            frame_err = frame_err.max(
                geodesic_angle(&rep.pose_quat(j), &window.joints[j].current)
                    .unwrap_or(std::f64::consts::PI),
            );
        }
        per_frame_error.push(frame_err);

        let joint_states: Vec<JointState> = (0..n)
            .map(|j| JointState {
                q: rep.pose_quat(j),
                omega: omegas[j],
            })
            .collect();
        let mut gains = params
            .policy
            .evaluate(&joint_states, &window, &root, &params.scales)?;
        if !params.use_bias {
            for g in &mut gains.joints {
                g.bias = Vec3::zeros();
            }
        }
        if !params.use_accel_enhancement {
            for g in &mut gains.joints {
                g.kappa_a = 0.0;
            }
        }

        for j in 0..n {
            let g = &gains.joints[j];
            let omega_dot = match &rep {
                RepState::Quat(qs) => angular_accel(&qs[j], &omegas[j], &window.joints[j], g)?,
                other => {
                    g.kappa_p * other.error(j, &window.joints[j].current)?
                        - g.kappa_d * omegas[j]
                        + g.bias
                        + g.kappa_a * other.alpha(&window.joints[j])
                }
            };
            let omega_next = step_omega(&omegas[j], &omega_dot, &cfg);
            let speed = omega_next.norm();
            if !speed.is_finite() || speed > params.omega_limit {
                return Err(Error::Divergence {
                    frame: t + 1,
                    quantity: "angular velocity",
                    norm: speed,
                    limit: params.omega_limit,
                });
            }
            max_omega = max_omega.max(speed);
            rep.integrate(j, &omega_next, &cfg)?;
            omegas[j] = omega_next;
        }

        root = step_root(
            &root,
            &window.root,
            gains.root_kappa_p,
            gains.root_kappa_d,
            &cfg,
        );
        let speed = root.v.norm();
        if !speed.is_finite() || speed > params.velocity_limit {
            return Err(Error::Divergence {
                frame: t + 1,
                quantity: "root velocity",
                norm: speed,
                limit: params.velocity_limit,
            });
        }

        trajectory.push(PoseFrame {
            joints: (0..n).map(|j| rep.pose_quat(j)).collect(),
            root: root.r,
        });
    }

    Ok(TrackRun {
        trajectory: PoseSequence::new(trajectory, dt),
        per_frame_error,
        max_omega,
    })
}

/// One motion under one seed.
#[derive(Debug, Clone)]
pub struct MotionRun {
    pub clean: PoseSequence,
    pub references: PoseSequence,
    pub track: TrackRun,
    pub metrics: MetricReport,
    pub loss: LossBreakdown,
}

/// All motions under one seed, plus aggregates.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub motions: Vec<MotionRun>,
    pub metrics: MetricReport,
    pub loss_total: f64,
    pub final_error_rad: f64,
    pub max_omega: f64,
}

/// Serializable per-seed summary for the report file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub metrics: MetricReport,
    pub loss_total: f64,
    pub final_tracking_error_rad: f64,
    pub max_omega_rad_s: f64,
}

/// Report written by `simulate`: resolved config echo plus per-seed results
/// and their mean ± sample standard deviation, following the five-seed
/// error-bar protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub per_seed: Vec<SeedSummary>,
    pub mean: MetricReport,
    pub std: MetricReport,
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub report: RunReport,
    pub seeds: Vec<SeedRun>,
}

/// Run every (motion, seed) pair of a config.
pub fn simulate(cfg: &RunConfig) -> Result<SimulateOutput> {
    cfg.validate()?;
    let skel = cfg.build_skeleton()?;
    let mut seeds = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        seeds.push(run_seed(cfg, &skel, seed)?);
    }
    let reports: Vec<MetricReport> = seeds.iter().map(|s| s.metrics).collect();
    let report = RunReport {
        config: cfg.clone(),
        per_seed: seeds
            .iter()
            .map(|s| SeedSummary {
                seed: s.seed,
                metrics: s.metrics,
                loss_total: s.loss_total,
                final_tracking_error_rad: s.final_error_rad,
                max_omega_rad_s: s.max_omega,
            })
            .collect(),
        mean: MetricReport::mean(&reports),
        std: MetricReport::std(&reports),
    };
    Ok(SimulateOutput { report, seeds })
}

fn run_seed(cfg: &RunConfig, skel: &Skeleton, seed: u64) -> Result<SeedRun> {
    let mut motions = Vec::with_capacity(cfg.motions.len());
    for spec in &cfg.motions {
        if spec.n_joints != skel.len() {
            return Err(Error::ShapeMismatch {
                context: "motion spec joint count vs skeleton".into(),
                expected: skel.len(),
                got: spec.n_joints,
            });
        }
        let clean = generate(spec)?;
        let references = corrupt(&clean, spec.angular_sigma, spec.positional_sigma, seed);
        let policy = cfg.build_policy(skel.len())?;
        let params = SimParams {
            representation: cfg.representation,
            use_bias: cfg.use_bias,
            use_exact_s3: cfg.use_exact_s3,
            use_accel_enhancement: cfg.use_accel_enhancement,
            flip_frame: cfg.flip_frame,
            policy: &policy,
            scales: GainScales::default(),
            omega_limit: cfg.omega_limit,
            velocity_limit: cfg.velocity_limit,
        };
        let run = track(&references, &params)?;
        let gt_kp = fk_sequence(&clean, skel)?;
        let pred_kp = fk_sequence(&run.trajectory, skel)?;
        let metrics = compute_report(&pred_kp, &gt_kp, skel, &cfg.contact)?;
        let n = skel.len();
        let loss = loss_total(&pred_kp, &gt_kp, &vec![0.0; n], cfg.lambda)?;
        motions.push(MotionRun {
            clean,
            references,
            track: run,
            metrics,
            loss,
        });
    }
    let reports: Vec<MetricReport> = motions.iter().map(|m| m.metrics).collect();
    let metrics = MetricReport::mean(&reports);
    let loss_mean =
        motions.iter().map(|m| m.loss.total).sum::<f64>() / motions.len() as f64;
    let final_error = motions
        .iter()
        .map(|m| *m.track.per_frame_error.last().unwrap_or(&0.0))
        .sum::<f64>()
        / motions.len() as f64;
    let max_omega = motions
        .iter()
        .map(|m| m.track.max_omega)
        .fold(0.0f64, f64::max);
    Ok(SeedRun {
        seed,
        motions,
        metrics,
        loss_total: loss_mean,
        final_error_rad: final_error,
        max_omega,
    })
}

// --- ablation ---------------------------------------------------------------

/// One row of the representation/component ablation.
#[derive(Debug, Clone)]
pub struct AblationRow {
    pub label: String,
    pub representation: Representation,
    pub use_bias: bool,
    pub use_exact_s3: bool,
    pub use_accel_enhancement: bool,
    pub output: SimulateOutput,
}

#[derive(Debug)]
pub struct AblationOutput {
    /// Rows sorted by mean MPJPE, worst first.
    pub rows: Vec<AblationRow>,
}

const ABLATION_MATRIX: [(&str, Representation, bool, bool, bool); 7] = [
    ("euler_xyz", Representation::EulerXyz, false, false, false),
    ("euler_zxy", Representation::EulerZxy, false, false, false),
    ("axis_angle", Representation::AxisAngle, false, false, false),
    ("quaternion", Representation::Quaternion, false, false, false),
    ("quaternion+bias", Representation::Quaternion, true, false, false),
    ("quaternion+bias+s3", Representation::Quaternion, true, true, false),
    (
        "quaternion+bias+s3+alpha",
        Representation::Quaternion,
        true,
        true,
        true,
    ),
];

/// Run the seven-row ablation matrix on identical motions and seeds.
pub fn ablate(base: &RunConfig) -> Result<AblationOutput> {
    let mut rows = Vec::with_capacity(ABLATION_MATRIX.len());
    for (label, rep, bias, s3, alpha) in ABLATION_MATRIX {
        let mut cfg = base.clone();
        cfg.representation = rep;
        cfg.use_bias = bias;
        cfg.use_exact_s3 = s3;
        cfg.use_accel_enhancement = alpha;
        let output = simulate(&cfg)?;
        rows.push(AblationRow {
            label: label.to_string(),
            representation: rep,
            use_bias: bias,
            use_exact_s3: s3,
            use_accel_enhancement: alpha,
            output,
        });
    }
    rows.sort_by(|a, b| {
        b.output
            .report
            .mean
            .mpjpe
            .partial_cmp(&a.output.report.mean.mpjpe)
            .expect("finite mpjpe")
    });
    Ok(AblationOutput { rows })
}

impl AblationOutput {
    /// Plot-ready CSV, one row per configuration.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "label,representation,bias,s3,alpha,\
             mpjpe_mm,mpjpe_std,p_mpjpe_mm,p_mpjpe_std,accel,accel_std,\
             g_mpjpe_mm,g_mpjpe_std,gre_mm,gre_std,g_accel,g_accel_std,fs_pct,fs_std\n",
        );
        for row in &self.rows {
            let m = &row.output.report.mean;
            let s = &row.output.report.std;
            out.push_str(&format!(
                "{},{:?},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                row.label,
                row.representation,
                row.use_bias,
                row.use_exact_s3,
                row.use_accel_enhancement,
                m.mpjpe, s.mpjpe, m.p_mpjpe, s.p_mpjpe, m.accel, s.accel,
                m.g_mpjpe, s.g_mpjpe, m.gre, s.gre, m.g_accel, s.g_accel, m.fs, s.fs,
            ));
        }
        out
    }

    /// Aligned text table ranked by MPJPE (worst first).
    pub fn to_table(&self) -> String {
        let mut out = String::from(
            "configuration             bias  s3  alpha      mpjpe    p_mpjpe      accel    g_mpjpe        gre    g_accel        fs\n",
        );
        let mark = |b: bool| if b { "y" } else { "-" };
        for row in &self.rows {
            let m = &row.output.report.mean;
            out.push_str(&format!(
                "{:<25} {:>4} {:>3} {:>5} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>9.2}\n",
                row.label,
                mark(row.use_bias),
                mark(row.use_exact_s3),
                mark(row.use_accel_enhancement),
                m.mpjpe,
                m.p_mpjpe,
                m.accel,
                m.g_mpjpe,
                m.gre,
                m.g_accel,
                m.fs,
            ));
        }
        out
    }
}

// --- standalone metric evaluation -------------------------------------------

/// Evaluate the metric suite between two pose files (forward kinematics with
/// the given skeleton, then metrics; foot skating from the prediction).
pub fn eval_metrics(
    pred_path: &Path,
    gt_path: &Path,
    skel: &Skeleton,
    contact: &ContactConfig,
) -> Result<MetricReport> {
    let pred = PoseSequence::load(pred_path)?;
    let gt = PoseSequence::load(gt_path)?;
    let pred_kp = fk_sequence(&pred, skel)?;
    let gt_kp = fk_sequence(&gt, skel)?;
    compute_report(&pred_kp, &gt_kp, skel, contact)
}

// --- constant-gain search ----------------------------------------------------

/// Configuration for the constant-gain search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub base: RunConfig,
    pub search: SearchSpec,
    /// Losses within this distance of the best tie and break to low gains.
    #[serde(default)]
    pub tie_tol: f64,
}

/// Result of a gain search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: Candidate,
    pub loss: f64,
}

/// Exhaustively evaluate the candidate gains on the base config's suite,
/// minimizing the mean training loss across motions and seeds.
pub fn tune(cfg: &TuneConfig) -> Result<TuneResult> {
    let (root_kp, root_kd, bias) = match &cfg.base.gains {
        GainConfig::Constant {
            root_kappa_p,
            root_kappa_d,
            bias,
            ..
        } => (*root_kappa_p, *root_kappa_d, *bias),
        _ => (20.0, 20.0, [0.0; 3]),
    };
    let (best, loss) = crate::control::search_minimum(&cfg.search, cfg.tie_tol, |cand| {
        let mut run_cfg = cfg.base.clone();
        run_cfg.gains = GainConfig::Constant {
            kappa_p: cand.kappa_p,
            kappa_d: cand.kappa_d,
            kappa_a: cand.kappa_a,
            bias,
            root_kappa_p: root_kp,
            root_kappa_d: root_kd,
        };
        match simulate(&run_cfg) {
            Ok(out) => {
                let mean = out.seeds.iter().map(|s| s.loss_total).sum::<f64>()
                    / out.seeds.len() as f64;
                Ok(mean)
            }
            // A diverged candidate is disqualified, not fatal.
            Err(Error::Divergence { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    })?;
    Ok(TuneResult { best, loss })
}

// --- file output --------------------------------------------------------------

/// Per-frame CSV of one tracked motion.
pub fn frames_csv(run: &TrackRun) -> String {
    let mut out = String::from("frame,t,tracking_error_rad,root_x,root_y,root_z\n");
    for (k, frame) in run.trajectory.frames.iter().enumerate() {
        let err = run
            .per_frame_error
            .get(k)
            .map(|e| format!("{e:.9}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{k},{:.6},{err},{:.9},{:.9},{:.9}\n",
            k as f64 * run.trajectory.dt,
            frame.root.x,
            frame.root.y,
            frame.root.z,
        ));
    }
    out
}

/// Write trajectories, per-frame CSVs, and the report into a directory.
pub fn write_simulate_outputs(out: &SimulateOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for seed_run in &out.seeds {
        for (m, motion) in seed_run.motions.iter().enumerate() {
            let stem = format!("seed{}_motion{}", seed_run.seed, m);
            motion
                .track
                .trajectory
                .save(&dir.join(format!("{stem}_trajectory.jsonl")))?;
            std::fs::write(
                dir.join(format!("{stem}_frames.csv")),
                frames_csv(&motion.track),
            )?;
        }
    }
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&out.report).expect("report serializes"),
    )?;
    let mut table = String::from("mean over seeds\n");
    table.push_str(&out.report.mean.to_table());
    table.push_str("\nsample standard deviation over seeds\n");
    table.push_str(&out.report.std.to_table());
    std::fs::write(dir.join("report.txt"), table)?;
    Ok(())
}

/// Write the ablation CSV, table, and per-row reports.
pub fn write_ablation_outputs(out: &AblationOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("ablation.csv"), out.to_csv())?;
    std::fs::write(dir.join("ablation.txt"), out.to_table())?;
    let reports: Vec<&RunReport> = out.rows.iter().map(|r| &r.output.report).collect();
    std::fs::write(
        dir.join("ablation_reports.json"),
        serde_json::to_string_pretty(&reports).expect("reports serialize"),
    )?;
    Ok(())
}
