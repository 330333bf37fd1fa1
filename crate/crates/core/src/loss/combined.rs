//! The weighted sum of all loss terms over a network's head outputs.

use crate::geom::{CameraModel, CropTransform, DepthFrame, SurfaceNormalMap};
use crate::hand::{Digit, JointSet, Quaternion, LOCAL_POSE_DIM};
use crate::loss::{
    appearance_loss, finger_dynamics, l2_loss, FingerState, LossConfig, LossError,
};
use crate::Vec3;

/// One branch's local-pose output: 24 values in branch layout (five palm
/// joints then the digit chain).
#[derive(Debug, Clone)]
pub struct LocalHead {
    pub digit: Digit,
    pub values: Vec<f64>,
}

/// All head outputs of one forward pass, in zero-mean world millimeters
/// (the viewpoint head in quaternion components).
#[derive(Debug, Clone, Default)]
pub struct HeadOutputs {
    pub locals: Vec<LocalHead>,
    pub viewpoint: Option<[f64; 4]>,
    pub global: Option<Vec<f64>>,
}

/// Ground truth of one frame.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Zero-mean world joints.
    pub joints: JointSet,
    pub viewpoint: Quaternion,
    /// Finger states for index, middle, ring, pinky.
    pub states: [FingerState; 4],
}

/// Per-frame context the appearance term samples against.
#[derive(Debug, Clone, Copy)]
pub struct FrameContext<'a> {
    pub frame: &'a DepthFrame,
    pub normals: &'a SurfaceNormalMap,
    pub xform: &'a CropTransform,
    pub cam: &'a CameraModel,
}

/// Per-term loss values and per-head gradients of the combined loss.
#[derive(Debug, Clone, Default)]
pub struct LossReport {
    pub local: f64,
    pub global: f64,
    pub appearance: f64,
    pub dynamics: f64,
    /// `lambda1*local + lambda2*global + lambda3*appearance +
    /// lambda4*dynamics`, exactly.
    pub combined: f64,
    /// Gradients of the combined loss, aligned with `HeadOutputs::locals`.
    pub local_grads: Vec<Vec<f64>>,
    pub viewpoint_grad: Option<[f64; 4]>,
    pub global_grad: Option<Vec<f64>>,
    /// Dynamics hinges skipped because an estimate's cross product
    /// degenerated.
    pub skipped_hinges: usize,
}

fn joints_of(values: &[f64]) -> Vec<Vec3> {
    values
        .chunks_exact(3)
        .map(|c| Vec3::new(c[0], c[1], c[2]))
        .collect()
}

fn add_scaled(dst: &mut [f64], src: &[Vec3], weight: f64) {
    for (k, v) in src.iter().enumerate() {
        dst[3 * k] += weight * v.x;
        dst[3 * k + 1] += weight * v.y;
        dst[3 * k + 2] += weight * v.z;
    }
}

/// Finger position in the `states` array (index, middle, ring, pinky).
fn finger_slot(digit: Digit) -> Option<usize> {
    match digit {
        Digit::Thumb => None,
        d => Some(d as usize - 1),
    }
}

/// Evaluates `L = l1*L_loc + l2*L_glo + l3*L_app + l4*L_dyn` and its
/// gradient for every present head.
///
/// The appearance and dynamics terms apply to each branch's local pose
/// and, when present, to the fused global pose as well. The viewpoint
/// quaternion contributes a scaled L2 inside the local term, with the
/// target hemisphere-normalized.
pub fn combined_loss(
    outputs: &HeadOutputs,
    truth: &GroundTruth,
    ctx: &FrameContext,
    config: &LossConfig,
) -> Result<LossReport, LossError> {
    let [l1, l2w, l3, l4] = config.lambda;
    let mut report = LossReport::default();

    for head in &outputs.locals {
        if head.values.len() != LOCAL_POSE_DIM {
            return Err(LossError::ShapeMismatch {
                expected: LOCAL_POSE_DIM,
                got: head.values.len(),
            });
        }
        let mut grad = vec![0.0; LOCAL_POSE_DIM];
        let gt = truth.joints.branch_pose(head.digit);
        let (v, g) = l2_loss(&head.values, &gt)?;
        report.local += v;
        for (dst, src) in grad.iter_mut().zip(g.iter()) {
            *dst += l1 * src;
        }

        let joints = joints_of(&head.values);
        let (v, g) = appearance_loss(&joints, ctx.frame, ctx.xform, ctx.cam, ctx.normals)?;
        report.appearance += v;
        add_scaled(&mut grad, &g, l3);

        if let Some(slot) = finger_slot(head.digit) {
            // Branch layout: palm joints at 0..5 (the digit's own MCP at
            // its canonical index), chain at 5..8.
            let a = head.digit as usize;
            let quad = [joints[a], joints[5], joints[6], joints[7]];
            let (v, g, skipped) = finger_dynamics(
                &quad,
                &truth.states[slot],
                config.rho,
                config.mu,
                config.kappa_factor,
            )?;
            report.dynamics += v;
            report.skipped_hinges += skipped;
            let slots = [a, 5, 6, 7];
            for (gi, &si) in g.iter().zip(slots.iter()) {
                grad[3 * si] += l4 * gi.x;
                grad[3 * si + 1] += l4 * gi.y;
                grad[3 * si + 2] += l4 * gi.z;
            }
        }
        report.local_grads.push(grad);
    }

    if let Some(q) = outputs.viewpoint {
        let target = truth.viewpoint.hemisphere();
        let tq = target.to_array();
        let mut grad = [0.0; 4];
        for k in 0..4 {
            let d = q[k] - tq[k];
            report.local += config.viewpoint_weight * d * d;
            grad[k] = l1 * config.viewpoint_weight * 2.0 * d;
        }
        report.viewpoint_grad = Some(grad);
    }

    if let Some(global) = &outputs.global {
        let gt = truth.joints.flatten();
        if global.len() != gt.len() {
            return Err(LossError::ShapeMismatch {
                expected: gt.len(),
                got: global.len(),
            });
        }
        let mut grad = vec![0.0; gt.len()];
        let (v, g) = l2_loss(global, &gt)?;
        report.global += v;
        for (dst, src) in grad.iter_mut().zip(g.iter()) {
            *dst += l2w * src;
        }

        let joints = joints_of(global);
        let (v, g) = appearance_loss(&joints, ctx.frame, ctx.xform, ctx.cam, ctx.normals)?;
        report.appearance += v;
        add_scaled(&mut grad, &g, l3);

        for digit in Digit::FINGERS {
            let idx = digit.dynamics_quadruple().expect("finger quadruple");
            let quad = [joints[idx[0]], joints[idx[1]], joints[idx[2]], joints[idx[3]]];
            let slot = finger_slot(digit).expect("finger slot");
            let (v, g, skipped) = finger_dynamics(
                &quad,
                &truth.states[slot],
                config.rho,
                config.mu,
                config.kappa_factor,
            )?;
            report.dynamics += v;
            report.skipped_hinges += skipped;
            for (gi, &si) in g.iter().zip(idx.iter()) {
                grad[3 * si] += l4 * gi.x;
                grad[3 * si + 1] += l4 * gi.y;
                grad[3 * si + 2] += l4 * gi.z;
            }
        }
        report.global_grad = Some(grad);
    }

    report.combined =
        l1 * report.local + l2w * report.global + l3 * report.appearance + l4 * report.dynamics;
    Ok(report)
}
