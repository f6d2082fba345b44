//! Fixed-step time integration for pose, angular velocity, and root
//! translation.
//!
//! The default pose integrator solves the quaternion differential equation
//! in closed form under the unit-sphere constraint: assuming constant
//! angular velocity over the step, the update is a Hamilton product with
//! `exp_qde(ω, Δt)` and therefore never needs renormalization. The
//! approximate baseline ([`step_approx_renorm`]) does the first-order update
//! `q + q̇Δt` followed by renormalization, reproducing the integration scheme
//! this crate's exact solver replaces. Euler-angle and axis-angle steps exist
//! purely for the representation ablation.

use serde::{Deserialize, Serialize};

use crate::rot::{EulerAngles, Quaternion};
use crate::{Error, Result, Vec3};

/// Which side the incremental rotation multiplies on.
///
/// `WorldLeft` composes `q_ω ⊗ q_t` (increment expressed in the world frame);
/// `BodyRight` composes `q_t ⊗ q_ω` (increment in the body frame). The exact
/// integrator defaults to world-left, the approximate baseline to body-right;
/// both can be flipped for sensitivity studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameConvention {
    WorldLeft,
    BodyRight,
}

/// Pose integrator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    ExactS3,
    ApproxRenorm,
    EulerAnglesXyz,
    EulerAnglesZxy,
    AxisAngle,
}

/// Step size plus integrator selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    /// Step size in seconds.
    pub dt: f64,
    pub frame: FrameConvention,
    pub kind: IntegratorKind,
}

impl StepConfig {
    /// Canonical configuration for an integrator kind: the exact solver
    /// composes world-left, the approximate baseline body-right.
    pub fn for_kind(kind: IntegratorKind, dt: f64) -> Self {
        let frame = match kind {
            IntegratorKind::ApproxRenorm => FrameConvention::BodyRight,
            _ => FrameConvention::WorldLeft,
        };
        Self { dt, frame, kind }
    }
}

impl Default for StepConfig {
    fn default() -> Self {
        Self::for_kind(IntegratorKind::ExactS3, 0.04)
    }
}

/// Angle below which `exp_qde` switches to its series expansion.
const EXP_SERIES_CUTOFF: f64 = 1e-8;

/// Closed-form solution quaternion of the QDE for constant angular velocity:
/// `(cos(‖ω‖Δt/2), (ω/‖ω‖)·sin(‖ω‖Δt/2))`.
///
/// Unit by construction; uses a two-term series below `‖ω‖Δt = 1e-8` to
/// avoid the indeterminate axis.
pub fn exp_qde(omega: &Vec3, dt: f64) -> Result<Quaternion> {
    if !(omega.x.is_finite() && omega.y.is_finite() && omega.z.is_finite()) {
        return Err(Error::NonFinite { context: "exp_qde angular velocity" });
    }
    let angle = omega.norm() * dt;
    if angle < EXP_SERIES_CUTOFF {
        let half = omega * (0.5 * dt);
        Ok(Quaternion::new(
            1.0 - angle * angle / 8.0,
            half.x,
            half.y,
            half.z,
        ))
    } else {
        let (s, c) = (0.5 * angle).sin_cos();
        let axis = omega / omega.norm();
        Ok(Quaternion::new(c, axis.x * s, axis.y * s, axis.z * s))
    }
}

/// Exact pose step: Hamilton product of the step quaternion with the current
/// pose. Stays on the unit sphere without any renormalization.
pub fn step_exact(q: &Quaternion, omega_next: &Vec3, cfg: &StepConfig) -> Result<Quaternion> {
    q.check_unit("step_exact pose")?;
    let qw = exp_qde(omega_next, cfg.dt)?;
    Ok(match cfg.frame {
        FrameConvention::WorldLeft => qw.hamilton(q),
        FrameConvention::BodyRight => q.hamilton(&qw),
    })
}

/// Approximate baseline: `q̇ = q ⊗ (0, ½ω)`, then `q + q̇Δt`, then
/// renormalize. Returns the renormalized quaternion.
pub fn step_approx_renorm(q: &Quaternion, omega: &Vec3, cfg: &StepConfig) -> Result<Quaternion> {
    step_approx_renorm_parts(q, omega, cfg).map(|(q, _)| q)
}

/// Same as [`step_approx_renorm`] but also reports the norm of `q + q̇Δt`
/// before renormalization, which quantifies how far the first-order update
/// left the sphere.
pub fn step_approx_renorm_parts(
    q: &Quaternion,
    omega: &Vec3,
    cfg: &StepConfig,
) -> Result<(Quaternion, f64)> {
    q.check_unit("step_approx_renorm pose")?;
    let half_omega = Quaternion::new(0.0, 0.5 * omega.x, 0.5 * omega.y, 0.5 * omega.z);
    let qdot = match cfg.frame {
        FrameConvention::BodyRight => q.hamilton(&half_omega),
        FrameConvention::WorldLeft => half_omega.hamilton(q),
    };
    let raw = Quaternion::new(
        q.w + qdot.w * cfg.dt,
        q.x + qdot.x * cfg.dt,
        q.y + qdot.y * cfg.dt,
        q.z + qdot.z * cfg.dt,
    );
    let norm = raw.norm();
    Ok((
        Quaternion::new(raw.w / norm, raw.x / norm, raw.y / norm, raw.z / norm),
        norm,
    ))
}

/// Euler-angle baseline step: component-wise `θ + ωΔt`, wrapped to `[0, 2π)`.
///
/// The wrap is deliberate: it reproduces the representation discontinuity
/// that makes this baseline fail when an angle crosses a full turn.
pub fn step_euler_repr(theta: &EulerAngles, omega: &Vec3, cfg: &StepConfig) -> EulerAngles {
    EulerAngles::new(
        theta.seq,
        [
            theta.angles[0] + omega.x * cfg.dt,
            theta.angles[1] + omega.y * cfg.dt,
            theta.angles[2] + omega.z * cfg.dt,
        ],
    )
}

/// Axis-angle (rotation vector) baseline step: component-wise `a + ωΔt`,
/// unwrapped.
pub fn step_axis_angle(a: &Vec3, omega: &Vec3, cfg: &StepConfig) -> Vec3 {
    a + omega * cfg.dt
}

/// Forward-Euler angular velocity step: `ω + ω̇Δt`.
pub fn step_omega(omega: &Vec3, omega_dot: &Vec3, cfg: &StepConfig) -> Vec3 {
    omega + omega_dot * cfg.dt
}

/// Root translation and linear velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootState {
    /// Position in meters.
    pub r: Vec3,
    /// Linear velocity in m/s.
    pub v: Vec3,
}

impl RootState {
    pub fn new(r: Vec3, v: Vec3) -> Self {
        Self { r, v }
    }
}

/// PD-driven root recursion:
/// `v' = v + (κP(r̂ − r) − κD v)Δt`, `r' = r + v'Δt`.
///
/// Note the discrete stability bound: the velocity decay factor per step is
/// `1 − κD·Δt`, so the recursion diverges whenever `κD·Δt ≥ 2` regardless of
/// how well-damped the continuous-time system would be.
pub fn step_root(
    state: &RootState,
    target: &Vec3,
    kappa_p: f64,
    kappa_d: f64,
    cfg: &StepConfig,
) -> RootState {
    let accel = kappa_p * (target - state.r) - kappa_d * state.v;
    let v_next = state.v + accel * cfg.dt;
    let r_next = state.r + v_next * cfg.dt;
    RootState::new(r_next, v_next)
}
