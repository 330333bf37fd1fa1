//! Hand frame, kinematic parameterization and forward/inverse kinematics.
//!
//! The parameterization: a rigid palm frame (quaternion + translation), a
//! two-axis palm stretch, and per digit three bone lengths plus one
//! abduction and three flexion angles (the root carries abduction +
//! flexion, the two distal segments flexion only). 20 angles and 15 bone
//! lengths in total. All angles are degrees, all lengths millimeters.
//!
//! Flexion rotates about the digit's lateral axis (`z x chain_dir` in the
//! reference pose, carried along the chain), abduction about the palm
//! normal at the chain root. Flexions are recoverable for poses within
//! (-90, 90) degrees; inverse kinematics clamps anything outside its range
//! and raises the `clamped` flag instead of failing.

use serde::{Deserialize, Serialize};

use super::reference::{reference_dir, reference_root, MCP_REFERENCE};
use super::{Digit, HandFrameError, JointSet, Quaternion, JOINT_COUNT};
use crate::{Mat3, Vec3};

/// Rotation + translation, applied as `R * p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Quaternion,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Quaternion::IDENTITY,
            translation: Vec3::zeros(),
        }
    }

    pub fn rotation_matrix(&self) -> Mat3 {
        // Kinematic params keep the quaternion normalized, unwrap is safe
        // for any transform produced by this module.
        self.rotation.to_matrix().expect("non-zero rotation")
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation_matrix() * p + self.translation
    }
}

/// Per-digit chain parameters, proximal to distal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitParams {
    pub bone_lengths: [f64; 3],
    pub abduction_deg: f64,
    pub flexion_deg: [f64; 3],
}

/// Full hand pose parameters; `forward_kinematics` maps these to joints.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicParams {
    pub palm_frame: RigidTransform,
    /// Unitless scale of the palm along the hand-frame x and y axes.
    pub palm_stretch: [f64; 2],
    /// Indexed by [`Digit`]: thumb, index, middle, ring, pinky.
    pub digits: [DigitParams; 5],
    /// Set by inverse kinematics when the input pose was outside the
    /// parameterization's range and the nearest representable parameters
    /// were returned instead.
    pub clamped: bool,
}

impl KinematicParams {
    /// Reference pose parameters: identity frame, unit stretch, zero angles.
    pub fn reference() -> Self {
        let mut digits = [DigitParams {
            bone_lengths: [0.0; 3],
            abduction_deg: 0.0,
            flexion_deg: [0.0; 3],
        }; 5];
        for digit in Digit::ALL {
            digits[digit as usize].bone_lengths =
                super::reference::REFERENCE_BONE_LENGTHS[digit as usize];
        }
        KinematicParams {
            palm_frame: RigidTransform::identity(),
            palm_stretch: [1.0, 1.0],
            digits,
            clamped: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum KinematicsError {
    #[error(transparent)]
    DegeneratePalm(#[from] HandFrameError),
    #[error("zero-length bone: {digit} segment {segment}")]
    ZeroLengthBone {
        digit: &'static str,
        segment: usize,
    },
}

/// Rodrigues rotation about a unit axis.
fn axis_rotation(axis: Vec3, angle_rad: f64) -> Mat3 {
    let (s, c) = angle_rad.sin_cos();
    let k = Mat3::new(
        0.0, -axis.z, axis.y, axis.z, 0.0, -axis.x, -axis.y, axis.x, 0.0,
    );
    Mat3::identity() + s * k + (1.0 - c) * (k * k)
}

fn rot_z(angle_rad: f64) -> Mat3 {
    axis_rotation(Vec3::new(0.0, 0.0, 1.0), angle_rad)
}

/// Raw orthonormal frame from the three defining palm joints: x along
/// wrist->thumb-MCP, palm normal z from the thumb/middle span, y completing
/// the right-handed set. This is the frame before referencing it to the
/// canonical pose.
fn raw_frame(wrist: Vec3, thumb_mcp: Vec3, middle_mcp: Vec3) -> Result<Mat3, HandFrameError> {
    let a = thumb_mcp - wrist;
    let b = middle_mcp - wrist;
    let cross = a.cross(&b);
    if cross.norm() <= 1e-9 * a.norm() * b.norm() || a.norm() < 1e-12 {
        return Err(HandFrameError);
    }
    let x = a.normalize();
    let z = cross.normalize();
    let y = z.cross(&x);
    Ok(Mat3::from_columns(&[x, y, z]))
}

/// Orthonormal hand frame of a pose, defined to be the identity on the
/// reference pose; origin at the wrist.
///
/// Equivariant under rigid motion: `hand_frame(R*J + t)` has rotation
/// `R * hand_frame(J).rotation` and origin `R * wrist + t`.
pub fn hand_frame(joints: &JointSet) -> Result<RigidTransform, HandFrameError> {
    let reference = super::reference::reference_pose();
    let raw_ref = raw_frame(reference.joints[0], reference.joints[5], reference.joints[2])
        .expect("reference palm is non-degenerate");
    let raw = raw_frame(joints.joints[0], joints.joints[5], joints.joints[2])?;
    let rotation = raw * raw_ref.transpose();
    Ok(RigidTransform {
        rotation: Quaternion::from_matrix(&rotation),
        translation: joints.joints[0],
    })
}

/// Places every joint from the kinematic parameters.
///
/// Palm joints are the stretched reference MCPs in the palm frame; each
/// digit chain is laid out by successive abduction/flexion rotations along
/// bones of the stored lengths.
pub fn forward_kinematics(params: &KinematicParams) -> JointSet {
    let [sx, sy] = params.palm_stretch;
    let mut local = [Vec3::zeros(); JOINT_COUNT];
    for (k, mcp) in MCP_REFERENCE.iter().enumerate() {
        local[1 + k] = Vec3::new(sx * mcp[0], sy * mcp[1], 0.0);
    }
    let z_axis = Vec3::new(0.0, 0.0, 1.0);
    for digit in Digit::ALL {
        let d = &params.digits[digit as usize];
        let dir0 = reference_dir(digit);
        let lateral = z_axis.cross(&dir0);
        let root = match digit {
            Digit::Thumb => Vec3::zeros(),
            _ => {
                let r = reference_root(digit);
                Vec3::new(sx * r.x, sy * r.y, 0.0)
            }
        };
        let abd = d.abduction_deg.to_radians();
        let mut rot = rot_z(abd) * axis_rotation(lateral, d.flexion_deg[0].to_radians());
        let mut pos = root;
        for (seg, &joint) in digit.chain_joints().iter().enumerate() {
            if seg > 0 {
                rot *= axis_rotation(lateral, d.flexion_deg[seg].to_radians());
            }
            pos += d.bone_lengths[seg] * (rot * dir0);
            local[joint] = pos;
        }
    }
    let frame = params.palm_frame.rotation_matrix();
    let mut joints = [Vec3::zeros(); JOINT_COUNT];
    for (k, p) in local.iter().enumerate() {
        joints[k] = frame * p + params.palm_frame.translation;
    }
    JointSet::new(joints)
}

/// Recovers kinematic parameters from a pose.
///
/// Exact (to floating point) on poses produced by `forward_kinematics`
/// with flexions inside (-90, 90) degrees; otherwise returns the closest
/// representable parameters with `clamped` set.
pub fn inverse_kinematics(joints: &JointSet) -> Result<KinematicParams, KinematicsError> {
    let wrist = joints.joints[0];
    let mut clamped = false;

    // Palm fit: normal from index/pinky MCP span, then a planar
    // rotation+stretch least squares against the reference MCPs.
    let v_index = joints.joints[1] - wrist;
    let v_pinky = joints.joints[4] - wrist;
    let cross = v_index.cross(&v_pinky);
    if cross.norm() <= 1e-9 * v_index.norm() * v_pinky.norm() || v_index.norm() < 1e-12 {
        return Err(HandFrameError.into());
    }
    let normal = cross.normalize();
    let e1 = (v_index - (v_index.dot(&normal)) * normal).normalize();
    let e2 = normal.cross(&e1);

    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let (mut sxa, mut sya, mut sxb, mut syb) = (0.0, 0.0, 0.0, 0.0);
    let mut plane_scale = 0.0f64;
    let mut off_plane = 0.0f64;
    for (k, mcp) in MCP_REFERENCE.iter().enumerate() {
        let v = joints.joints[1 + k] - wrist;
        let (a, b) = (v.dot(&e1), v.dot(&e2));
        let (x, y) = (mcp[0], mcp[1]);
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxa += x * a;
        sya += y * a;
        sxb += x * b;
        syb += y * b;
        plane_scale = plane_scale.max(v.norm());
        off_plane = off_plane.max(v.dot(&normal).abs());
    }
    if off_plane > 1e-6 * plane_scale.max(1.0) {
        clamped = true;
    }
    let det = sxx * syy - sxy * sxy;
    let p = (sxa * syy - sxy * sya) / det;
    let s = (sxy * sxa - sxx * sya) / det;
    let q = (sxb * syy - sxy * syb) / det;
    let r = (sxx * syb - sxy * sxb) / det;
    let sx = p.hypot(q);
    let sy = r.hypot(s);
    if sx < 1e-9 || sy < 1e-9 {
        return Err(HandFrameError.into());
    }
    let theta = (q / sx + s / sy).atan2(p / sx + r / sy);
    let frame = Mat3::from_columns(&[e1, e2, normal]) * rot_z(theta);
    let palm_frame = RigidTransform {
        rotation: Quaternion::from_matrix(&frame),
        translation: wrist,
    };

    // Digit chains in the hand frame.
    let inv = frame.transpose();
    let z_axis = Vec3::new(0.0, 0.0, 1.0);
    let mut digits = [DigitParams {
        bone_lengths: [0.0; 3],
        abduction_deg: 0.0,
        flexion_deg: [0.0; 3],
    }; 5];
    for digit in Digit::ALL {
        let chain = digit.chain_joints();
        let root = match digit {
            Digit::Thumb => Vec3::zeros(),
            _ => inv * (joints.joints[digit as usize] - wrist),
        };
        let positions = [
            root,
            inv * (joints.joints[chain[0]] - wrist),
            inv * (joints.joints[chain[1]] - wrist),
            inv * (joints.joints[chain[2]] - wrist),
        ];
        let out = &mut digits[digit as usize];
        let mut dirs = [Vec3::zeros(); 3];
        for seg in 0..3 {
            let delta = positions[seg + 1] - positions[seg];
            let len = delta.norm();
            if len < 1e-6 {
                return Err(KinematicsError::ZeroLengthBone {
                    digit: digit.name(),
                    segment: seg,
                });
            }
            out.bone_lengths[seg] = len;
            dirs[seg] = delta / len;
        }

        let dir0 = reference_dir(digit);
        let lateral = z_axis.cross(&dir0);
        let sin_f1 = (-dirs[0].z).clamp(-1.0, 1.0);
        if dirs[0].z.abs() > 1.0 {
            clamped = true;
        }
        let f1 = sin_f1.asin();
        let planar = Vec3::new(dirs[0].x, dirs[0].y, 0.0);
        let abd = if planar.norm() < 1e-9 {
            clamped = true;
            0.0
        } else {
            let w = planar.normalize();
            (dir0.x * w.y - dir0.y * w.x).atan2(dir0.x * w.x + dir0.y * w.y)
        };
        let axis = rot_z(abd) * lateral;
        let mut flex = [f1, 0.0, 0.0];
        for seg in 1..3 {
            let (prev, cur) = (dirs[seg - 1], dirs[seg]);
            if cur.dot(&axis).abs() > 1e-7 {
                clamped = true;
            }
            flex[seg] = (prev.cross(&cur).dot(&axis)).atan2(prev.dot(&cur));
        }
        out.abduction_deg = abd.to_degrees();
        out.flexion_deg = [
            flex[0].to_degrees(),
            flex[1].to_degrees(),
            flex[2].to_degrees(),
        ];
    }

    Ok(KinematicParams {
        palm_frame,
        palm_stretch: [sx, sy],
        digits,
        clamped,
    })
}

/// Rotates the reference palm by `q`, optionally anchoring the wrist at a
/// given position (the reference palm is centered at its wrist).
pub fn palm_from_viewpoint(
    q: &Quaternion,
    reference_palm: &[Vec3; 5],
    wrist: Option<Vec3>,
) -> Result<[Vec3; 5], super::ZeroQuaternion> {
    let rot = q.to_matrix()?;
    let t = wrist.unwrap_or_else(Vec3::zeros);
    let mut out = [Vec3::zeros(); 5];
    for (o, p) in out.iter_mut().zip(reference_palm.iter()) {
        *o = rot * p + t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::reference::reference_pose;
    use crate::hand::reference_palm;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng) -> KinematicParams {
        let mut params = KinematicParams::reference();
        let axis = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        params.palm_frame = RigidTransform {
            rotation: Quaternion::from_axis_angle(axis, rng.gen_range(0.0..2.5)).unwrap(),
            translation: Vec3::new(
                rng.gen_range(-100.0..100.0),
                rng.gen_range(-100.0..100.0),
                rng.gen_range(500.0..900.0),
            ),
        };
        params.palm_stretch = [rng.gen_range(0.85..1.1), rng.gen_range(0.85..1.1)];
        for d in &mut params.digits {
            for l in &mut d.bone_lengths {
                *l *= rng.gen_range(0.9..1.1);
            }
            d.abduction_deg = rng.gen_range(-20.0..20.0);
            d.flexion_deg = [
                rng.gen_range(-30.0..75.0),
                rng.gen_range(-5.0..80.0),
                rng.gen_range(-5.0..70.0),
            ];
        }
        params
    }

    #[test]
    fn reference_params_produce_reference_pose() {
        let pose = forward_kinematics(&KinematicParams::reference());
        let reference = reference_pose();
        for (a, b) in pose.joints.iter().zip(reference.joints.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn hand_frame_is_identity_on_reference_pose() {
        let frame = hand_frame(&reference_pose()).unwrap();
        assert_abs_diff_eq!(frame.rotation_matrix(), Mat3::identity(), epsilon = 1e-12);
        assert_abs_diff_eq!(frame.translation, Vec3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn hand_frame_recovers_a_90_degree_rotation() {
        let rot = Quaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), 90f64.to_radians())
            .unwrap()
            .to_matrix()
            .unwrap();
        let pose = reference_pose().map(|p| rot * p);
        let frame = hand_frame(&pose).unwrap();
        assert_abs_diff_eq!(frame.rotation_matrix(), rot, epsilon = 1e-9);
    }

    #[test]
    fn hand_frame_translation_equivariance() {
        let t = Vec3::new(10.0, 20.0, 30.0);
        let pose = reference_pose().map(|p| p + t);
        let frame = hand_frame(&pose).unwrap();
        assert_abs_diff_eq!(frame.rotation_matrix(), Mat3::identity(), epsilon = 1e-12);
        assert_abs_diff_eq!(frame.translation, t, epsilon = 1e-12);
    }

    #[test]
    fn hand_frame_rejects_collinear_defining_joints() {
        let mut pose = reference_pose();
        // Put thumb MCP and middle MCP on one ray from the wrist.
        pose.joints[5] = Vec3::new(0.0, 40.0, 0.0);
        pose.joints[2] = Vec3::new(0.0, 85.0, 0.0);
        assert_eq!(hand_frame(&pose), Err(HandFrameError));
    }

    #[test]
    fn single_pip_flexion_rotates_distal_joints_rigidly() {
        let mut params = KinematicParams::reference();
        params.digits[Digit::Index as usize].flexion_deg[1] = 90.0;
        let pose = forward_kinematics(&params);
        let reference = reference_pose();
        // PIP stays put, distances from DIP/TIP to PIP are preserved.
        assert_abs_diff_eq!(pose.joints[8], reference.joints[8], epsilon = 1e-9);
        for j in [9usize, 10] {
            let before = (reference.joints[j] - reference.joints[8]).norm();
            let after = (pose.joints[j] - pose.joints[8]).norm();
            assert_abs_diff_eq!(before, after, epsilon = 1e-9);
        }
        // 90 degrees sends the distal segment out of the palm plane.
        assert!(pose.joints[9].z.abs() > 1.0);
    }

    #[test]
    fn uniform_bone_scaling_scales_segment_lengths() {
        let mut params = KinematicParams::reference();
        for d in &mut params.digits {
            for l in &mut d.bone_lengths {
                *l *= 1.05;
            }
        }
        let pose = forward_kinematics(&params);
        let reference = reference_pose();
        for digit in Digit::ALL {
            let chain = digit.chain_joints();
            for seg in 1..3 {
                let before = (reference.joints[chain[seg]] - reference.joints[chain[seg - 1]]).norm();
                let after = (pose.joints[chain[seg]] - pose.joints[chain[seg - 1]]).norm();
                assert_abs_diff_eq!(after, 1.05 * before, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ik_of_reference_pose_is_all_zero() {
        let params = inverse_kinematics(&reference_pose()).unwrap();
        assert!(!params.clamped);
        assert_abs_diff_eq!(params.palm_stretch[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params.palm_stretch[1], 1.0, epsilon = 1e-12);
        for d in &params.digits {
            assert_abs_diff_eq!(d.abduction_deg, 0.0, epsilon = 1e-9);
            for f in d.flexion_deg {
                assert_abs_diff_eq!(f, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn fk_ik_roundtrip_on_random_in_range_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let params = random_params(&mut rng);
            let pose = forward_kinematics(&params);
            let recovered = inverse_kinematics(&pose).unwrap();
            let rebuilt = forward_kinematics(&recovered);
            for (a, b) in pose.joints.iter().zip(rebuilt.joints.iter()) {
                assert!((a - b).norm() < 1e-6, "joint mismatch: {a:?} vs {b:?}");
            }
            assert!(!recovered.clamped);
            // Intrinsic parameters match up to angle wrap-around.
            for (da, db) in params.digits.iter().zip(recovered.digits.iter()) {
                for (la, lb) in da.bone_lengths.iter().zip(db.bone_lengths.iter()) {
                    assert!((la - lb).abs() < 1e-6);
                }
                let wrap = |x: f64| (x.rem_euclid(360.0) + 360.0).rem_euclid(360.0);
                assert!((wrap(da.abduction_deg) - wrap(db.abduction_deg)).abs() < 1e-6);
                for (fa, fb) in da.flexion_deg.iter().zip(db.flexion_deg.iter()) {
                    assert!((wrap(*fa) - wrap(*fb)).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn ik_is_rigid_invariant_in_its_intrinsics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = random_params(&mut rng);
        let pose = forward_kinematics(&params);
        let rot = Quaternion::from_axis_angle(Vec3::new(0.3, -0.5, 0.8), 1.2)
            .unwrap()
            .to_matrix()
            .unwrap();
        let t = Vec3::new(5.0, -20.0, 12.0);
        let moved = pose.map(|p| rot * p + t);
        let a = inverse_kinematics(&pose).unwrap();
        let b = inverse_kinematics(&moved).unwrap();
        for (da, db) in a.digits.iter().zip(b.digits.iter()) {
            for (la, lb) in da.bone_lengths.iter().zip(db.bone_lengths.iter()) {
                assert!((la - lb).abs() < 1e-6);
            }
            assert!((da.abduction_deg - db.abduction_deg).abs() < 1e-6);
            for (fa, fb) in da.flexion_deg.iter().zip(db.flexion_deg.iter()) {
                assert!((fa - fb).abs() < 1e-6);
            }
        }
        assert_abs_diff_eq!(
            b.palm_frame.rotation_matrix(),
            rot * a.palm_frame.rotation_matrix(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(b.palm_frame.translation, rot * pose.wrist() + t, epsilon = 1e-9);
    }

    #[test]
    fn ik_rejects_zero_length_bones() {
        let mut pose = reference_pose();
        pose.joints[9] = pose.joints[8];
        match inverse_kinematics(&pose) {
            Err(KinematicsError::ZeroLengthBone { digit, segment }) => {
                assert_eq!(digit, "index");
                assert_eq!(segment, 1);
            }
            other => panic!("expected zero-length bone error, got {other:?}"),
        }
    }

    #[test]
    fn palm_from_viewpoint_identity_and_composition() {
        let palm = reference_palm();
        let same = palm_from_viewpoint(&Quaternion::IDENTITY, &palm, None).unwrap();
        for (a, b) in same.iter().zip(palm.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }

        // 180 degrees about z mirrors x and y.
        let q = Quaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), std::f64::consts::PI).unwrap();
        let flipped = palm_from_viewpoint(&q, &palm, None).unwrap();
        for (a, b) in flipped.iter().zip(palm.iter()) {
            assert_abs_diff_eq!(a.x, -b.x, epsilon = 1e-9);
            assert_abs_diff_eq!(a.y, -b.y, epsilon = 1e-9);
            assert_abs_diff_eq!(a.z, b.z, epsilon = 1e-9);
        }

        // Composing q1 then q2 equals applying q2*q1 once.
        let q1 = Quaternion::from_axis_angle(Vec3::new(1.0, 0.2, -0.3), 0.7).unwrap();
        let q2 = Quaternion::from_axis_angle(Vec3::new(-0.4, 1.0, 0.5), 1.3).unwrap();
        let step = palm_from_viewpoint(&q1, &palm, None).unwrap();
        let two_step = palm_from_viewpoint(&q2, &step, None).unwrap();
        let composed = palm_from_viewpoint(&q2.mul(&q1), &palm, None).unwrap();
        for (a, b) in two_step.iter().zip(composed.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }
}
