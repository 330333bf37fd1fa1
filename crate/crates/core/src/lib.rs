//! Tree-structured hand pose regression from depth images.
//!
//! The crate is organized around the stages of the pipeline:
//!
//! * [`hand`] — the 20-joint skeleton, kinematic parameterization with
//!   forward/inverse kinematics, and palm viewpoint quaternions.
//! * [`geom`] — depth camera model, crop/projection geometry, cone
//!   background synthesis, surface normals and differentiable sampling.
//! * [`loss`] — the combined training loss (local/global L2, appearance
//!   hinge, finger-dynamics hinges) with analytic gradients, plus a
//!   finite-difference checker.
//! * [`net`] — a minimal differentiable layer engine, the tree/baseline
//!   graph builders and the SGD trainer.
//! * [`tps`] / [`augment`] — thin-plate-spline warping and the non-rigid
//!   dataset augmentation pipeline.
//! * [`render`] — capsule-based synthetic depth rendering with exact
//!   ground truth, used as the data source.
//! * [`eval`] — mean-error metrics, success-rate curves and the palm
//!   viewpoint replacement variant.
//!
//! All computations are pure functions over immutable inputs; everything
//! that draws random numbers takes an explicit seed or RNG so results are
//! reproducible bit for bit.

pub mod augment;
pub mod eval;
pub mod geom;
pub mod hand;
pub mod loss;
pub mod net;
pub mod render;
pub mod tps;

pub use hand::{HandFrameError, Joint, JointSet, KinematicParams, Quaternion};


/// 3D vector in millimeters, used throughout for world-space points.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3x3 rotation matrix.
pub type Mat3 = nalgebra::Matrix3<f64>;
