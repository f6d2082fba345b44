//! Motion-quality metrics and the training loss.
//!
//! Sequences are compared in meters internally; reported position errors are
//! millimeters and acceleration errors mm/frame² (finite differences taken
//! per frame index, not per second). Local metrics subtract the root joint
//! per frame; global metrics compare world coordinates directly.

use serde::{Deserialize, Serialize};

use crate::seq::KeypointSequence;
use crate::skeleton::Skeleton;
use crate::{Error, Result, Vec3};

const MM: f64 = 1000.0;

/// Contact detection for foot skating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactConfig {
    /// A foot below this height (meters above z = 0) is in ground contact.
    pub contact_height: f64,
    /// Horizontal per-frame displacement (meters) beyond which a contacting
    /// foot counts as skating.
    pub slide_threshold: f64,
}

impl Default for ContactConfig {
    fn default() -> Self {
        Self {
            contact_height: 0.05,
            slide_threshold: 0.02,
        }
    }
}

/// Aggregated metric values for one predicted sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Root-aligned mean per-joint position error, mm.
    pub mpjpe: f64,
    /// MPJPE after per-frame rigid (rotation + translation) alignment, mm.
    pub p_mpjpe: f64,
    /// Root-aligned acceleration error, mm/frame².
    pub accel: f64,
    /// Global MPJPE without alignment, mm.
    pub g_mpjpe: f64,
    /// Global root translation error, mm.
    pub gre: f64,
    /// Global acceleration error, mm/frame².
    pub g_accel: f64,
    /// Foot skating: % of frames with a contacting foot sliding.
    pub fs: f64,
}

impl MetricReport {
    pub fn zeros() -> Self {
        Self {
            mpjpe: 0.0,
            p_mpjpe: 0.0,
            accel: 0.0,
            g_mpjpe: 0.0,
            gre: 0.0,
            g_accel: 0.0,
            fs: 0.0,
        }
    }

    fn fields(&self) -> [(&'static str, f64); 7] {
        [
            ("mpjpe_mm", self.mpjpe),
            ("p_mpjpe_mm", self.p_mpjpe),
            ("accel_mm_per_frame2", self.accel),
            ("g_mpjpe_mm", self.g_mpjpe),
            ("gre_mm", self.gre),
            ("g_accel_mm_per_frame2", self.g_accel),
            ("fs_percent", self.fs),
        ]
    }

    /// Aligned two-column text table; stable byte-for-byte for golden files.
    pub fn to_table(&self) -> String {
        let mut out = String::from("metric                          value\n");
        for (name, value) in self.fields() {
            out.push_str(&format!("{name:<24}{value:>17.6}\n"));
        }
        out
    }

    /// Element-wise mean over several reports.
    pub fn mean(reports: &[MetricReport]) -> MetricReport {
        let n = reports.len().max(1) as f64;
        let mut acc = MetricReport::zeros();
        for r in reports {
            acc.mpjpe += r.mpjpe;
            acc.p_mpjpe += r.p_mpjpe;
            acc.accel += r.accel;
            acc.g_mpjpe += r.g_mpjpe;
            acc.gre += r.gre;
            acc.g_accel += r.g_accel;
            acc.fs += r.fs;
        }
        MetricReport {
            mpjpe: acc.mpjpe / n,
            p_mpjpe: acc.p_mpjpe / n,
            accel: acc.accel / n,
            g_mpjpe: acc.g_mpjpe / n,
            gre: acc.gre / n,
            g_accel: acc.g_accel / n,
            fs: acc.fs / n,
        }
    }

    /// Element-wise sample standard deviation (n−1 denominator).
    pub fn std(reports: &[MetricReport]) -> MetricReport {
        if reports.len() < 2 {
            return MetricReport::zeros();
        }
        let mean = Self::mean(reports);
        let n = (reports.len() - 1) as f64;
        let var = |f: fn(&MetricReport) -> f64| {
            (reports.iter().map(|r| (f(r) - f(&mean)).powi(2)).sum::<f64>() / n).sqrt()
        };
        MetricReport {
            mpjpe: var(|r| r.mpjpe),
            p_mpjpe: var(|r| r.p_mpjpe),
            accel: var(|r| r.accel),
            g_mpjpe: var(|r| r.g_mpjpe),
            gre: var(|r| r.gre),
            g_accel: var(|r| r.g_accel),
            fs: var(|r| r.fs),
        }
    }
}

fn check_shapes(pred: &KeypointSequence, gt: &KeypointSequence) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::ShapeMismatch {
            context: "sequence length (frames)".into(),
            expected: gt.len(),
            got: pred.len(),
        });
    }
    if pred.n_joints() != gt.n_joints() {
        return Err(Error::ShapeMismatch {
            context: "joint count".into(),
            expected: gt.n_joints(),
            got: pred.n_joints(),
        });
    }
    Ok(())
}

fn root_aligned(frame: &[Vec3]) -> Vec<Vec3> {
    let root = frame[0];
    frame.iter().map(|p| p - root).collect()
}

/// Mean per-joint position error after per-frame root alignment, mm.
pub fn mpjpe(pred: &KeypointSequence, gt: &KeypointSequence) -> Result<f64> {
    check_shapes(pred, gt)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (pf, gf) in pred.positions.iter().zip(&gt.positions) {
        let pa = root_aligned(pf);
        let ga = root_aligned(gf);
        for (p, g) in pa.iter().zip(&ga) {
            sum += (p - g).norm();
            count += 1;
        }
    }
    Ok(sum / count as f64 * MM)
}

/// Global MPJPE: no alignment at all, mm.
pub fn g_mpjpe(pred: &KeypointSequence, gt: &KeypointSequence) -> Result<f64> {
    check_shapes(pred, gt)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (pf, gf) in pred.positions.iter().zip(&gt.positions) {
        for (p, g) in pf.iter().zip(gf) {
            sum += (p - g).norm();
            count += 1;
        }
    }
    Ok(sum / count as f64 * MM)
}

/// Global root translation error, mm.
pub fn gre(pred: &KeypointSequence, gt: &KeypointSequence) -> Result<f64> {
    if pred.roots.len() != gt.roots.len() {
        return Err(Error::ShapeMismatch {
            context: "root track length".into(),
            expected: gt.roots.len(),
            got: pred.roots.len(),
        });
    }
    let sum: f64 = pred
        .roots
        .iter()
        .zip(&gt.roots)
        .map(|(p, g)| (p - g).norm())
        .sum();
    Ok(sum / pred.roots.len() as f64 * MM)
}

/// Optimal rigid (rotation + translation, no scale) alignment of `points`
/// onto `target`, least-squares over the point pairs.
fn kabsch_align(points: &[Vec3], target: &[Vec3], frame: usize) -> Result<Vec<Vec3>> {
    let n = points.len() as f64;
    let pc: Vec3 = points.iter().sum::<Vec3>() / n;
    let tc: Vec3 = target.iter().sum::<Vec3>() / n;

    let mut h = nalgebra::Matrix3::<f64>::zeros();
    let mut spread = nalgebra::Matrix3::<f64>::zeros();
    for (p, t) in points.iter().zip(target) {
        let cp = p - pc;
        let ct = t - tc;
        h += cp * ct.transpose();
        spread += ct * ct.transpose();
    }
    // Rotation about a line of collinear points is unconstrained.
    let eig = spread.symmetric_eigenvalues();
    let (mut lo, mut mid) = (f64::INFINITY, f64::INFINITY);
    for &l in eig.iter() {
        if l < lo {
            mid = lo;
            lo = l;
        } else if l < mid {
            mid = l;
        }
    }
    if mid <= 1e-12 * eig.amax().max(1e-300) {
        return Err(Error::Degenerate {
            frame,
            reason: "joints are collinear; rigid alignment is not unique".into(),
        });
    }

    let svd = h.svd(true, true);
    let u = svd.u.expect("svd with u");
    let v = svd.v_t.expect("svd with v_t").transpose();
    let d = (v * u.transpose()).determinant().signum();
    let correction = nalgebra::Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d));
    let r = v * correction * u.transpose();
    Ok(points.iter().map(|p| r * (p - pc) + tc).collect())
}

/// MPJPE after per-frame optimal rigid alignment (no scale), mm.
pub fn p_mpjpe(pred: &KeypointSequence, gt: &KeypointSequence) -> Result<f64> {
    check_shapes(pred, gt)?;
    if pred.n_joints() < 3 {
        return Err(Error::Config(
            "rigid alignment needs at least 3 joints".into(),
        ));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (k, (pf, gf)) in pred.positions.iter().zip(&gt.positions).enumerate() {
        let aligned = kabsch_align(pf, gf, k)?;
        for (p, g) in aligned.iter().zip(gf) {
            sum += (p - g).norm();
            count += 1;
        }
    }
    Ok(sum / count as f64 * MM)
}

/// Second finite difference per frame index: `x_t − 2x_{t+1} + x_{t+2}`.
fn second_differences(track: &[Vec<Vec3>]) -> Vec<Vec<Vec3>> {
    (0..track.len().saturating_sub(2))
        .map(|t| {
            (0..track[t].len())
                .map(|j| track[t][j] - track[t + 1][j] * 2.0 + track[t + 2][j])
                .collect()
        })
        .collect()
}

/// Mean acceleration error, mm/frame². `root_align` selects the local
/// variant; without it this is the global acceleration error.
pub fn accel_err(pred: &KeypointSequence, gt: &KeypointSequence, root_align: bool) -> Result<f64> {
    check_shapes(pred, gt)?;
    if pred.len() < 3 {
        return Err(Error::Config(format!(
            "acceleration metrics need at least 3 frames, got {}",
            pred.len()
        )));
    }
    let project = |seq: &KeypointSequence| -> Vec<Vec<Vec3>> {
        seq.positions
            .iter()
            .map(|f| if root_align { root_aligned(f) } else { f.clone() })
            .collect()
    };
    let pa = second_differences(&project(pred));
    let ga = second_differences(&project(gt));
    let mut sum = 0.0;
    let mut count = 0usize;
    for (pf, gf) in pa.iter().zip(&ga) {
        for (p, g) in pf.iter().zip(gf) {
            sum += (p - g).norm();
            count += 1;
        }
    }
    Ok(sum / count as f64 * MM)
}

/// Percentage of frames in which a foot in ground contact slides
/// horizontally beyond the threshold.
///
/// Contact requires the foot below `contact_height` at both the current and
/// previous frame; sliding is the horizontal (xy) displacement between them.
/// Any skating foot marks the frame; the denominator is the total frame
/// count.
pub fn foot_skate(pred: &KeypointSequence, skel: &Skeleton, cfg: &ContactConfig) -> Result<f64> {
    let feet = skel.end_effectors();
    if feet.is_empty() {
        return Err(Error::Config(
            "skeleton declares no end effectors; cannot measure foot skating".into(),
        ));
    }
    let t_total = pred.len();
    let mut skating = 0usize;
    for t in 1..t_total {
        let slid = feet.iter().any(|&f| {
            let cur = pred.positions[t][f];
            let prev = pred.positions[t - 1][f];
            let contact = cur.z < cfg.contact_height && prev.z < cfg.contact_height;
            let horiz = ((cur.x - prev.x).powi(2) + (cur.y - prev.y).powi(2)).sqrt();
            contact && horiz > cfg.slide_threshold
        });
        if slid {
            skating += 1;
        }
    }
    Ok(100.0 * skating as f64 / t_total as f64)
}

/// Loss components: `total = local + global + λ·beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub local: f64,
    pub global: f64,
    pub beta: f64,
    pub lambda: f64,
    pub total: f64,
}

/// Training objective over a predicted and ground-truth sequence (meters).
///
/// The local term is the frame-wise L1 distance of root-aligned keypoints
/// plus the L1 distance of root translations; the global term applies the
/// same L1 sums to second finite differences of the unaligned motion. Both
/// normalize by `T` (and joint count for keypoint terms); the shape term is
/// the Euclidean norm of `beta_fix` scaled by `lambda` (default 0.01).
pub fn loss_total(
    pred: &KeypointSequence,
    gt: &KeypointSequence,
    beta_fix: &[f64],
    lambda: f64,
) -> Result<LossBreakdown> {
    check_shapes(pred, gt)?;
    let t = pred.len() as f64;
    let n = pred.n_joints() as f64;

    let l1 = |a: &Vec3, b: &Vec3| (a.x - b.x).abs() + (a.y - b.y).abs() + (a.z - b.z).abs();

    let mut local = 0.0;
    for (pf, gf) in pred.positions.iter().zip(&gt.positions) {
        let pa = root_aligned(pf);
        let ga = root_aligned(gf);
        for (p, g) in pa.iter().zip(&ga) {
            local += l1(p, g);
        }
    }
    local /= t * n;
    local += pred
        .roots
        .iter()
        .zip(&gt.roots)
        .map(|(p, g)| l1(p, g))
        .sum::<f64>()
        / t;

    let mut global = 0.0;
    let pa = second_differences(&pred.positions);
    let ga = second_differences(&gt.positions);
    for (pf, gf) in pa.iter().zip(&ga) {
        for (p, g) in pf.iter().zip(gf) {
            global += l1(p, g);
        }
    }
    global /= t * n;
    let mut root_accel = 0.0;
    for k in 0..pred.roots.len().saturating_sub(2) {
        let p = pred.roots[k] - pred.roots[k + 1] * 2.0 + pred.roots[k + 2];
        let g = gt.roots[k] - gt.roots[k + 1] * 2.0 + gt.roots[k + 2];
        root_accel += l1(&p, &g);
    }
    global += root_accel / t;

    let beta = beta_fix.iter().map(|b| b * b).sum::<f64>().sqrt();
    Ok(LossBreakdown {
        local,
        global,
        beta,
        lambda,
        total: local + global + lambda * beta,
    })
}

/// The full metric suite for one prediction.
pub fn compute_report(
    pred: &KeypointSequence,
    gt: &KeypointSequence,
    skel: &Skeleton,
    contact: &ContactConfig,
) -> Result<MetricReport> {
    Ok(MetricReport {
        mpjpe: mpjpe(pred, gt)?,
        p_mpjpe: p_mpjpe(pred, gt)?,
        accel: accel_err(pred, gt, true)?,
        g_mpjpe: g_mpjpe(pred, gt)?,
        gre: gre(pred, gt)?,
        g_accel: accel_err(pred, gt, false)?,
        fs: foot_skate(pred, skel, contact)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;

    fn seq_from(positions: Vec<Vec<Vec3>>, dt: f64) -> KeypointSequence {
        let roots = positions.iter().map(|f| f[0]).collect();
        KeypointSequence {
            positions,
            roots,
            dt,
        }
    }

    fn random_cloud(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<Vec3> {
        (0..n).map(|_| testutil::random_vec3(rng, 0.8)).collect()
    }

    fn random_seq(rng: &mut rand_chacha::ChaCha8Rng, t: usize, n: usize) -> KeypointSequence {
        seq_from((0..t).map(|_| random_cloud(rng, n)).collect(), 0.04)
    }

    #[test]
    fn identical_sequences_give_zero_errors() {
        let mut rng = testutil::rng(61);
        let seq = random_seq(&mut rng, 6, 8);
        assert_eq!(mpjpe(&seq, &seq).unwrap(), 0.0);
        assert_eq!(g_mpjpe(&seq, &seq).unwrap(), 0.0);
        assert_eq!(gre(&seq, &seq).unwrap(), 0.0);
        assert_eq!(accel_err(&seq, &seq, true).unwrap(), 0.0);
        assert!(p_mpjpe(&seq, &seq).unwrap() < 1e-9);
    }

    #[test]
    fn mpjpe_closed_form_offset() {
        // One non-root joint offset by (3, 0, 4) mm after root alignment
        // contributes exactly 5 mm.
        let gt = seq_from(
            vec![vec![Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]; 4],
            0.04,
        );
        let mut pred = gt.clone();
        for f in &mut pred.positions {
            f[1] += Vec3::new(0.003, 0.0, 0.004);
        }
        let expected = 5.0 / 3.0; // averaged over 3 joints
        assert!((mpjpe(&pred, &gt).unwrap() - expected).abs() < 1e-9);

        // Root alignment kills a global translation.
        let mut shifted = pred.clone();
        for f in &mut shifted.positions {
            for p in f.iter_mut() {
                *p += Vec3::new(1.0, 0.0, 0.0);
            }
        }
        assert!((mpjpe(&shifted, &gt).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn p_mpjpe_rigid_invariance_and_no_scale() {
        let mut rng = testutil::rng(67);
        let gt = random_seq(&mut rng, 5, 10);
        let rot = testutil::random_unit_quat(&mut rng);
        let t = Vec3::new(0.4, -0.2, 0.9);
        let pred = seq_from(
            gt.positions
                .iter()
                .map(|f| f.iter().map(|p| rot.rotate(p) + t).collect())
                .collect(),
            gt.dt,
        );
        assert!(p_mpjpe(&pred, &gt).unwrap() < 1e-9);

        // Pure scaling is not removed.
        let scaled = seq_from(
            gt.positions
                .iter()
                .map(|f| f.iter().map(|p| p * 1.1).collect())
                .collect(),
            gt.dt,
        );
        assert!(p_mpjpe(&scaled, &gt).unwrap() > 1.0);
    }

    #[test]
    fn p_mpjpe_never_above_mpjpe_for_perturbations() {
        let mut rng = testutil::rng(71);
        for _ in 0..100 {
            let gt = random_seq(&mut rng, 3, 9);
            let pred = seq_from(
                gt.positions
                    .iter()
                    .map(|f| {
                        f.iter()
                            .map(|p| p + testutil::random_vec3(&mut rng, 0.02))
                            .collect()
                    })
                    .collect(),
                gt.dt,
            );
            let p = p_mpjpe(&pred, &gt).unwrap();
            let m = mpjpe(&pred, &gt).unwrap();
            assert!(p <= m + 1e-9, "p_mpjpe {p} > mpjpe {m}");
        }
    }

    #[test]
    fn p_mpjpe_flags_collinear_frames() {
        let line: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let gt = seq_from(vec![line.clone(); 3], 0.04);
        let err = p_mpjpe(&gt, &gt).unwrap_err();
        assert!(matches!(err, Error::Degenerate { frame: 0, .. }), "{err}");
    }

    #[test]
    fn accel_annihilates_affine_offsets() {
        let mut rng = testutil::rng(73);
        // Quantize coordinates to 1/64 steps so sums with dyadic offsets are
        // exact and the second difference cancels bit-wise.
        let gt = seq_from(
            (0..8)
                .map(|_| {
                    random_cloud(&mut rng, 5)
                        .into_iter()
                        .map(|p| {
                            Vec3::new(
                                (p.x * 64.0).round() / 64.0,
                                (p.y * 64.0).round() / 64.0,
                                (p.z * 64.0).round() / 64.0,
                            )
                        })
                        .collect()
                })
                .collect(),
            0.04,
        );
        // Dyadic affine-in-time offset per joint: exact in binary arithmetic.
        let offsets: Vec<(Vec3, Vec3)> = (0..5)
            .map(|j| {
                (
                    Vec3::new(0.25 * j as f64, -0.5, 0.125),
                    Vec3::new(0.5, 0.25 * j as f64, -0.75),
                )
            })
            .collect();
        let pred = seq_from(
            gt.positions
                .iter()
                .enumerate()
                .map(|(t, f)| {
                    f.iter()
                        .enumerate()
                        .map(|(j, p)| p + offsets[j].0 + offsets[j].1 * t as f64)
                        .collect()
                })
                .collect(),
            gt.dt,
        );
        assert_eq!(accel_err(&pred, &gt, false).unwrap(), 0.0);

        // A quadratic c·t² leaves exactly 2c per frame².
        let c = Vec3::new(0.001, 0.0, 0.0);
        let quad = seq_from(
            gt.positions
                .iter()
                .enumerate()
                .map(|(t, f)| f.iter().map(|p| p + c * (t * t) as f64).collect())
                .collect(),
            gt.dt,
        );
        let expected = 2.0 * c.norm() * 1000.0;
        assert!((accel_err(&quad, &gt, false).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn accel_needs_three_frames() {
        let mut rng = testutil::rng(79);
        let seq = random_seq(&mut rng, 2, 4);
        assert!(accel_err(&seq, &seq, true).is_err());
    }

    #[test]
    fn global_metrics_see_translation() {
        let mut rng = testutil::rng(83);
        let gt = random_seq(&mut rng, 5, 6);
        let shift = Vec3::new(0.01, 0.0, 0.0);
        let pred = seq_from(
            gt.positions
                .iter()
                .map(|f| f.iter().map(|p| p + shift).collect())
                .collect(),
            gt.dt,
        );
        assert!((g_mpjpe(&pred, &gt).unwrap() - 10.0).abs() < 1e-9);
        assert!((gre(&pred, &gt).unwrap() - 10.0).abs() < 1e-9);
        assert!(mpjpe(&pred, &gt).unwrap() < 1e-9);
    }

    #[test]
    fn g_metrics_match_hand_average() {
        // Three frames, two joints, displacements chosen for an exact mean.
        let gt = seq_from(
            vec![vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)]; 3],
            0.04,
        );
        let mut pred = gt.clone();
        pred.positions[0][0].x += 0.003; // 3 mm
        pred.positions[1][1].y += 0.004; // 4 mm
        pred.positions[2][0].z += 0.012; // 12 mm
        pred.roots = pred.positions.iter().map(|f| f[0]).collect();
        let expected = (3.0 + 4.0 + 12.0) / 6.0;
        assert!((g_mpjpe(&pred, &gt).unwrap() - expected).abs() < 1e-9);
        let expected_root = (3.0 + 0.0 + 12.0) / 3.0;
        assert!((gre(&pred, &gt).unwrap() - expected_root).abs() < 1e-9);
    }

    #[test]
    fn foot_skate_planted_sequence() {
        let skel = Skeleton::default_humanoid();
        let feet = skel.end_effectors();
        let n = skel.len();
        let t_total = 100;
        // All joints static; feet on the ground. 25 frames slide 30 mm.
        let mut positions = vec![vec![Vec3::new(0.0, 0.0, 0.5); n]; t_total];
        for frame in &mut positions {
            for &f in &feet {
                frame[f] = Vec3::new(0.1, 0.0, 0.01);
            }
        }
        // Frames 10..=34 each advance the left foot 30 mm: 25 skating frames.
        for (k, frame) in positions.iter_mut().enumerate() {
            if k >= 10 {
                let steps = (k.min(34) - 9) as f64;
                frame[feet[0]].x += 0.03 * steps;
            }
        }
        let seq = seq_from(positions, 0.04);
        let fs = foot_skate(&seq, &skel, &ContactConfig::default()).unwrap();
        assert_eq!(fs, 25.0);

        // Airborne motion never skates.
        let airborne = seq_from(
            (0..50)
                .map(|k| {
                    (0..n)
                        .map(|_| Vec3::new(k as f64 * 0.2, 0.0, 1.0))
                        .collect()
                })
                .collect(),
            0.04,
        );
        assert_eq!(
            foot_skate(&airborne, &skel, &ContactConfig::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn foot_skate_needs_declared_feet() {
        let bare = crate::skeleton::Skeleton::new(vec![
            crate::skeleton::Joint {
                name: "root".into(),
                parent: None,
                offset: Vec3::zeros(),
                end_effector: false,
            },
            crate::skeleton::Joint {
                name: "tip".into(),
                parent: Some(0),
                offset: Vec3::new(0.0, 0.0, 1.0),
                end_effector: false,
            },
        ])
        .unwrap();
        let seq = seq_from(vec![vec![Vec3::zeros(); 2]; 5], 0.04);
        assert!(matches!(
            foot_skate(&seq, &bare, &ContactConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn loss_two_frame_toy_matches_hand_sum() {
        // T = 2, N = 2. Root-aligned keypoint L1 plus root L1; the global
        // term is empty below three frames.
        let gt = seq_from(
            vec![
                vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)],
                vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)],
            ],
            0.04,
        );
        let mut pred = gt.clone();
        pred.positions[0][1] += Vec3::new(0.25, -0.5, 0.0); // L1 = 0.75 aligned
        pred.positions[1][0] += Vec3::new(0.125, 0.0, 0.0); // moves root
        pred.roots = pred.positions.iter().map(|f| f[0]).collect();

        // Frame 0 aligned: joint1 err L1 = 0.75. Frame 1 aligned: joint1
        // differs by the root shift: L1 = 0.125. Keypoint term:
        // (0.75 + 0.125) / (T·N) = 0.875/4. Root term: 0.125/2.
        let expected_local = 0.875 / 4.0 + 0.125 / 2.0;
        let beta = [0.3, -0.4];
        let out = loss_total(&pred, &gt, &beta, 0.01).unwrap();
        assert!((out.local - expected_local).abs() < 1e-12);
        assert_eq!(out.global, 0.0);
        assert!((out.beta - 0.5).abs() < 1e-12);
        assert!((out.total - (expected_local + 0.01 * 0.5)).abs() < 1e-12);

        let zero = loss_total(&gt, &gt, &[0.0, 0.0], 0.01).unwrap();
        assert_eq!(zero.total, 0.0);
    }

    #[test]
    fn loss_is_one_homogeneous() {
        let mut rng = testutil::rng(89);
        let gt = random_seq(&mut rng, 6, 5);
        let pred = seq_from(
            gt.positions
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|p| p + testutil::random_vec3(&mut rng, 0.05))
                        .collect()
                })
                .collect(),
            gt.dt,
        );
        let base = loss_total(&pred, &gt, &[0.0; 5], 0.0).unwrap();
        // Scale every error by 3: pred' = gt + 3(pred - gt).
        let scaled = seq_from(
            gt.positions
                .iter()
                .zip(&pred.positions)
                .map(|(gf, pf)| {
                    gf.iter()
                        .zip(pf)
                        .map(|(g, p)| g + (p - g) * 3.0)
                        .collect()
                })
                .collect(),
            gt.dt,
        );
        let tripled = loss_total(&scaled, &gt, &[0.0; 5], 0.0).unwrap();
        assert!((tripled.total - 3.0 * base.total).abs() < 1e-9 * base.total.max(1.0));
    }

    #[test]
    fn shape_mismatch_names_lengths() {
        let mut rng = testutil::rng(97);
        let a = random_seq(&mut rng, 4, 5);
        let b = random_seq(&mut rng, 6, 5);
        let err = mpjpe(&a, &b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('4') && msg.contains('6'), "{msg}");
    }

    #[test]
    fn report_mean_and_std() {
        let mut a = MetricReport::zeros();
        a.mpjpe = 10.0;
        let mut b = MetricReport::zeros();
        b.mpjpe = 14.0;
        let mean = MetricReport::mean(&[a, b]);
        assert_eq!(mean.mpjpe, 12.0);
        // Deviations ±2 with n−1 = 1: std = sqrt(8).
        let std = MetricReport::std(&[a, b]);
        assert!((std.mpjpe - 8.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(MetricReport::std(&[a]).mpjpe, 0.0);
    }
}
