//! The combined training loss and its analytic gradients.
//!
//! Four terms balanced by weights λ1..λ4:
//!
//! * local L2 over each branch's 24-value local pose (plus the viewpoint
//!   quaternion L2, scaled into millimeter range),
//! * global L2 over the fused 60-value pose,
//! * an appearance hinge penalizing joints in front of the observed depth
//!   surface (the cone background keeps off-hand joints differentiable),
//! * finger-dynamics hinges driven by a per-finger ground-truth state:
//!   collinear fingers constrain direction cosines and path length,
//!   coplanar fingers constrain cross-product normals.
//!
//! Every gradient is analytic and verified against central finite
//! differences by [`finite_difference_check`].

mod combined;
mod fdcheck;
mod terms;

pub use combined::{combined_loss, FrameContext, GroundTruth, HeadOutputs, LocalHead, LossReport};
pub use fdcheck::{finite_difference_check, FdReport};
pub use terms::{
    appearance_loss, classify_finger, dynamics_loss, finger_dynamics, l2_loss, FingerState,
};

use serde::{Deserialize, Serialize};

use crate::geom::GeomError;

/// Loss weights and thresholds. Defaults follow the tuned values
/// λ = (4, 4, 3, 20), μ = 0.0005 with a cone offset of 100 mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    /// Term weights (local, global, appearance, dynamics).
    pub lambda: [f64; 4],
    /// Collinearity length-penalty weight.
    pub mu: f64,
    /// Cosine threshold of the dynamics hinges, in (0, 1).
    pub rho: f64,
    /// Relative collinearity slack: κ = kappa_factor * |D - A|.
    pub kappa_factor: f64,
    /// Cone background offset at the crop center, mm.
    pub phi: f64,
    /// Scale of the viewpoint quaternion L2 inside the local term;
    /// converts unitless quaternion error into the millimeter² range of
    /// the joint terms.
    pub viewpoint_weight: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda: [4.0, 4.0, 3.0, 20.0],
            mu: 0.0005,
            // cos(15 deg): tolerates annotation noise, penalizes gross
            // violations.
            rho: 0.9659258262890683,
            kappa_factor: 0.01,
            phi: 100.0,
            viewpoint_weight: 1000.0,
        }
    }
}

impl LossConfig {
    /// Unconstrained ablation: appearance and dynamics terms disabled.
    pub fn unconstrained() -> Self {
        LossConfig {
            lambda: [4.0, 4.0, 0.0, 0.0],
            ..LossConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LossError {
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("degenerate finger: a segment is shorter than 1e-9 mm")]
    DegenerateFinger,
    #[error(transparent)]
    Geometry(#[from] GeomError),
}
