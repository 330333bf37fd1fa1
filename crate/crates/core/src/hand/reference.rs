//! The canonical reference pose: a flat open hand in the plane z = 0 with
//! the wrist at the origin, fingers along +y and the thumb abducted 45
//! degrees toward +x. The hand frame is the identity on this pose by
//! definition, and all kinematic angles are measured relative to it.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{Digit, JointSet, JOINT_COUNT};
use crate::Vec3;

/// Unit direction of the thumb chain in the reference pose.
pub const THUMB_REFERENCE_DIR: [f64; 3] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];

/// Finger MCP positions in the reference pose (mm): index, middle, ring,
/// pinky. The wrist sits at the origin.
pub const MCP_REFERENCE: [[f64; 2]; 4] = [[24.0, 80.0], [8.0, 85.0], [-8.0, 82.0], [-24.0, 75.0]];

/// Reference bone lengths (mm) per digit, proximal to distal. The thumb
/// chain is rooted at the wrist, fingers at their MCP.
pub const REFERENCE_BONE_LENGTHS: [[f64; 3]; 5] = [
    [45.0, 22.0, 20.0], // thumb: wrist->MCP, MCP->IP, IP->TIP
    [35.0, 22.0, 15.0], // index: MCP->PIP, PIP->DIP, DIP->TIP
    [38.0, 25.0, 16.0], // middle
    [35.0, 24.0, 15.0], // ring
    [28.0, 18.0, 13.0], // pinky
];

/// Reference chain direction for a digit (unit, in the palm plane).
pub(crate) fn reference_dir(digit: Digit) -> Vec3 {
    match digit {
        Digit::Thumb => Vec3::new(THUMB_REFERENCE_DIR[0], THUMB_REFERENCE_DIR[1], 0.0),
        _ => Vec3::new(0.0, 1.0, 0.0),
    }
}

/// Chain root position in the reference pose before palm stretching.
pub(crate) fn reference_root(digit: Digit) -> Vec3 {
    match digit {
        Digit::Thumb => Vec3::zeros(),
        Digit::Index => Vec3::new(MCP_REFERENCE[0][0], MCP_REFERENCE[0][1], 0.0),
        Digit::Middle => Vec3::new(MCP_REFERENCE[1][0], MCP_REFERENCE[1][1], 0.0),
        Digit::Ring => Vec3::new(MCP_REFERENCE[2][0], MCP_REFERENCE[2][1], 0.0),
        Digit::Pinky => Vec3::new(MCP_REFERENCE[3][0], MCP_REFERENCE[3][1], 0.0),
    }
}

/// The full 20-joint reference pose.
pub fn reference_pose() -> JointSet {
    let mut joints = [Vec3::zeros(); JOINT_COUNT];
    for (k, mcp) in MCP_REFERENCE.iter().enumerate() {
        joints[1 + k] = Vec3::new(mcp[0], mcp[1], 0.0);
    }
    for digit in Digit::ALL {
        let dir = reference_dir(digit);
        let mut pos = reference_root(digit);
        for (seg, &joint) in digit.chain_joints().iter().enumerate() {
            pos += REFERENCE_BONE_LENGTHS[digit as usize][seg] * dir;
            joints[joint] = pos;
        }
    }
    JointSet::new(joints)
}

/// The five palm joints of the reference pose, centered at the wrist.
pub fn reference_palm() -> [Vec3; 5] {
    reference_pose().palm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_pose_is_planar_with_wrist_at_origin() {
        let pose = reference_pose();
        assert_eq!(pose.wrist(), Vec3::zeros());
        for j in &pose.joints {
            assert_eq!(j.z, 0.0);
        }
    }

    #[test]
    fn reference_bone_lengths_are_realized() {
        let pose = reference_pose();
        for digit in Digit::ALL {
            let chain = digit.chain_joints();
            let root = reference_root(digit);
            let lengths = REFERENCE_BONE_LENGTHS[digit as usize];
            assert!((pose.joints[chain[0]] - root).norm() - lengths[0] < 1e-12);
            for seg in 1..3 {
                let d = (pose.joints[chain[seg]] - pose.joints[chain[seg - 1]]).norm();
                assert!((d - lengths[seg]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thumb_points_45_degrees_toward_plus_x() {
        let pose = reference_pose();
        let d = pose.joints[5].normalize();
        assert!((d.x - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((d.y - FRAC_1_SQRT_2).abs() < 1e-12);
    }
}
