//! The 20-joint hand skeleton, its palm/finger partition and kinematics.
//!
//! Canonical joint order (fixed, see [`Joint`]): wrist first, then the four
//! finger MCPs (these five form the palm subset), then the thumb chain, then
//! PIP/DIP/TIP for index, middle, ring and pinky. Each finger branch's local
//! pose is its three finger joints plus the five palm joints: 8 joints, 24
//! scalars.

mod kinematics;
mod quat;
mod reference;

pub use kinematics::{
    forward_kinematics, hand_frame, inverse_kinematics, palm_from_viewpoint, DigitParams,
    KinematicParams, KinematicsError, RigidTransform,
};
pub use quat::{Quaternion, ZeroQuaternion};
pub use reference::{reference_palm, reference_pose, REFERENCE_BONE_LENGTHS, THUMB_REFERENCE_DIR};

use crate::Vec3;

/// Number of joints in the skeleton.
pub const JOINT_COUNT: usize = 20;
/// Joints per branch local pose (finger joints + palm subset).
pub const BRANCH_JOINTS: usize = 8;
/// Scalars in a branch local pose.
pub const LOCAL_POSE_DIM: usize = 3 * BRANCH_JOINTS;
/// Scalars in the global pose.
pub const GLOBAL_POSE_DIM: usize = 3 * JOINT_COUNT;

/// Canonical joint indices. The palm subset is `{Wrist, IndexMcp,
/// MiddleMcp, RingMcp, PinkyMcp}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum Joint {
    Wrist = 0,
    IndexMcp = 1,
    MiddleMcp = 2,
    RingMcp = 3,
    PinkyMcp = 4,
    ThumbMcp = 5,
    ThumbIp = 6,
    ThumbTip = 7,
    IndexPip = 8,
    IndexDip = 9,
    IndexTip = 10,
    MiddlePip = 11,
    MiddleDip = 12,
    MiddleTip = 13,
    RingPip = 14,
    RingDip = 15,
    RingTip = 16,
    PinkyPip = 17,
    PinkyDip = 18,
    PinkyTip = 19,
}

impl Joint {
    pub const ALL: [Joint; JOINT_COUNT] = [
        Joint::Wrist,
        Joint::IndexMcp,
        Joint::MiddleMcp,
        Joint::RingMcp,
        Joint::PinkyMcp,
        Joint::ThumbMcp,
        Joint::ThumbIp,
        Joint::ThumbTip,
        Joint::IndexPip,
        Joint::IndexDip,
        Joint::IndexTip,
        Joint::MiddlePip,
        Joint::MiddleDip,
        Joint::MiddleTip,
        Joint::RingPip,
        Joint::RingDip,
        Joint::RingTip,
        Joint::PinkyPip,
        Joint::PinkyDip,
        Joint::PinkyTip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Joint::Wrist => "wrist",
            Joint::IndexMcp => "index_mcp",
            Joint::MiddleMcp => "middle_mcp",
            Joint::RingMcp => "ring_mcp",
            Joint::PinkyMcp => "pinky_mcp",
            Joint::ThumbMcp => "thumb_mcp",
            Joint::ThumbIp => "thumb_ip",
            Joint::ThumbTip => "thumb_tip",
            Joint::IndexPip => "index_pip",
            Joint::IndexDip => "index_dip",
            Joint::IndexTip => "index_tip",
            Joint::MiddlePip => "middle_pip",
            Joint::MiddleDip => "middle_dip",
            Joint::MiddleTip => "middle_tip",
            Joint::RingPip => "ring_pip",
            Joint::RingDip => "ring_dip",
            Joint::RingTip => "ring_tip",
            Joint::PinkyPip => "pinky_pip",
            Joint::PinkyDip => "pinky_dip",
            Joint::PinkyTip => "pinky_tip",
        }
    }
}

/// Palm subset indices in canonical order.
pub const PALM_JOINTS: [usize; 5] = [0, 1, 2, 3, 4];

/// Fingertip indices (thumb, index, middle, ring, pinky tips).
pub const FINGERTIPS: [usize; 5] = [7, 10, 13, 16, 19];

/// The five digits; also indexes [`KinematicParams::digits`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum Digit {
    Thumb = 0,
    Index = 1,
    Middle = 2,
    Ring = 3,
    Pinky = 4,
}

impl Digit {
    pub const ALL: [Digit; 5] = [
        Digit::Thumb,
        Digit::Index,
        Digit::Middle,
        Digit::Ring,
        Digit::Pinky,
    ];

    /// Non-thumb fingers, the ones constrained by the dynamics loss.
    pub const FINGERS: [Digit; 4] = [Digit::Index, Digit::Middle, Digit::Ring, Digit::Pinky];

    pub fn name(self) -> &'static str {
        match self {
            Digit::Thumb => "thumb",
            Digit::Index => "index",
            Digit::Middle => "middle",
            Digit::Ring => "ring",
            Digit::Pinky => "pinky",
        }
    }

    /// The three chain joints of this digit in canonical joint indices,
    /// proximal to distal. Fingers: PIP, DIP, TIP; thumb: MCP, IP, TIP.
    pub fn chain_joints(self) -> [usize; 3] {
        match self {
            Digit::Thumb => [5, 6, 7],
            Digit::Index => [8, 9, 10],
            Digit::Middle => [11, 12, 13],
            Digit::Ring => [14, 15, 16],
            Digit::Pinky => [17, 18, 19],
        }
    }

    /// Joint indices of this digit's branch local pose: the five palm
    /// joints followed by the digit's chain joints.
    pub fn branch_joints(self) -> [usize; BRANCH_JOINTS] {
        let chain = self.chain_joints();
        [0, 1, 2, 3, 4, chain[0], chain[1], chain[2]]
    }

    /// The dynamics quadruple `(A, B, C, D)` for non-thumb fingers:
    /// the finger's MCP (a palm joint) then PIP, DIP, TIP.
    pub fn dynamics_quadruple(self) -> Option<[usize; 4]> {
        match self {
            Digit::Thumb => None,
            Digit::Index => Some([1, 8, 9, 10]),
            Digit::Middle => Some([2, 11, 12, 13]),
            Digit::Ring => Some([3, 14, 15, 16]),
            Digit::Pinky => Some([4, 17, 18, 19]),
        }
    }
}

/// 20 named 3D joints in world millimeters, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSet {
    pub joints: [Vec3; JOINT_COUNT],
}

impl JointSet {
    pub fn new(joints: [Vec3; JOINT_COUNT]) -> Self {
        JointSet { joints }
    }

    pub fn wrist(&self) -> Vec3 {
        self.joints[0]
    }

    pub fn palm(&self) -> [Vec3; 5] {
        [
            self.joints[0],
            self.joints[1],
            self.joints[2],
            self.joints[3],
            self.joints[4],
        ]
    }

    /// Local pose of one branch: 8 joints, flattened to 24 values in
    /// `[x, y, z]` per joint.
    pub fn branch_pose(&self, digit: Digit) -> [f64; LOCAL_POSE_DIM] {
        let mut out = [0.0; LOCAL_POSE_DIM];
        for (k, &j) in digit.branch_joints().iter().enumerate() {
            out[3 * k] = self.joints[j].x;
            out[3 * k + 1] = self.joints[j].y;
            out[3 * k + 2] = self.joints[j].z;
        }
        out
    }

    /// All 20 joints flattened to 60 values.
    pub fn flatten(&self) -> [f64; GLOBAL_POSE_DIM] {
        let mut out = [0.0; GLOBAL_POSE_DIM];
        for (k, j) in self.joints.iter().enumerate() {
            out[3 * k] = j.x;
            out[3 * k + 1] = j.y;
            out[3 * k + 2] = j.z;
        }
        out
    }

    pub fn from_flat(values: &[f64]) -> Option<JointSet> {
        if values.len() != GLOBAL_POSE_DIM {
            return None;
        }
        let mut joints = [Vec3::zeros(); JOINT_COUNT];
        for (k, j) in joints.iter_mut().enumerate() {
            *j = Vec3::new(values[3 * k], values[3 * k + 1], values[3 * k + 2]);
        }
        Some(JointSet { joints })
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> JointSet {
        let mut joints = self.joints;
        for j in &mut joints {
            *j = f(*j);
        }
        JointSet { joints }
    }

    /// Maximum Euclidean distance over corresponding joints; the dedupe
    /// similarity measure.
    pub fn max_joint_distance(&self, other: &JointSet) -> f64 {
        self.joints
            .iter()
            .zip(other.joints.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The three defining palm joints are collinear; no frame can be built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("degenerate palm: wrist, thumb MCP and middle MCP are collinear")]
pub struct HandFrameError;

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn branch_subsets_have_eight_joints_and_cover_all_twenty() {
        let mut union = BTreeSet::new();
        for digit in Digit::ALL {
            let branch = digit.branch_joints();
            assert_eq!(branch.len(), BRANCH_JOINTS);
            let unique: BTreeSet<_> = branch.iter().copied().collect();
            assert_eq!(unique.len(), BRANCH_JOINTS, "duplicate joint in branch");
            union.extend(branch);
        }
        assert_eq!(union, (0..JOINT_COUNT).collect::<BTreeSet<_>>());
    }

    #[test]
    fn local_pose_flattening_is_24_values() {
        let pose = reference_pose();
        for digit in Digit::ALL {
            assert_eq!(pose.branch_pose(digit).len(), 24);
        }
    }

    #[test]
    fn dynamics_quadruples_start_at_the_palm_mcp() {
        assert_eq!(Digit::Index.dynamics_quadruple(), Some([1, 8, 9, 10]));
        assert_eq!(Digit::Thumb.dynamics_quadruple(), None);
    }

    #[test]
    fn flatten_roundtrip() {
        let pose = reference_pose();
        let flat = pose.flatten();
        assert_eq!(JointSet::from_flat(&flat).unwrap(), pose);
    }
}
