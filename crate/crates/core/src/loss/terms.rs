//! Individual loss terms with analytic gradients.

use crate::geom::{
    project_joint, sample_depth, sample_gradient, CameraModel, CropTransform, DepthFrame,
    SurfaceNormalMap,
};
use crate::loss::LossError;
use crate::Vec3;

/// Segments shorter than this are degenerate for cross products and
/// direction cosines.
const DEGENERATE_EPS: f64 = 1e-9;
/// Relative sine below which three chain joints count as collinear when
/// classifying partial-coplanarity states.
const SUB_COLLINEAR_SIN: f64 = 1e-6;

/// Ground-truth finger state: 1 = collinear (`e` is the finger direction),
/// 2 = fully coplanar, 3/4 = only the proximal/distal triple defines the
/// plane (`e` is the plane normal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerState {
    pub state: u8,
    pub e: Vec3,
}

/// Plain squared-error loss `sum((f_i - g_i)^2)` with gradient `2(f - g)`.
/// Serves both the local (per branch) and global terms.
pub fn l2_loss(estimate: &[f64], truth: &[f64]) -> Result<(f64, Vec<f64>), LossError> {
    if estimate.len() != truth.len() {
        return Err(LossError::ShapeMismatch {
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    let mut value = 0.0;
    let mut grad = vec![0.0; estimate.len()];
    for (k, (f, g)) in estimate.iter().zip(truth.iter()).enumerate() {
        let d = f - g;
        value += d * d;
        grad[k] = 2.0 * d;
    }
    Ok((value, grad))
}

/// Appearance hinge: joints must lie behind the observed surface, so
/// `I(u, v) - z <= 0`. Returns the summed hinge and per-joint gradients
/// through the projection chain (zero where the hinge is inactive).
pub fn appearance_loss(
    joints: &[Vec3],
    frame: &DepthFrame,
    xform: &CropTransform,
    cam: &CameraModel,
    normals: &SurfaceNormalMap,
) -> Result<(f64, Vec<Vec3>), LossError> {
    let m = xform.center_world;
    let mut value = 0.0;
    let mut grads = vec![Vec3::zeros(); joints.len()];
    for (k, &j) in joints.iter().enumerate() {
        let (u, v, z) = project_joint(j, xform, cam)?;
        let surface = sample_depth(frame, u, v);
        let diff = surface - z;
        if diff <= 0.0 {
            continue;
        }
        value += diff;
        let (grad_u, grad_v) = sample_gradient(frame, normals, u, v);
        let denom = j.z + m.z;
        let du_dx = cam.fx * xform.scale_x / denom;
        let du_dz = -cam.fx * (j.x + m.x) * xform.scale_x / (denom * denom);
        let dv_dy = cam.fy * xform.scale_y / denom;
        let dv_dz = -cam.fy * (j.y + m.y) * xform.scale_y / (denom * denom);
        grads[k] = Vec3::new(
            grad_u * du_dx,
            grad_v * dv_dy,
            grad_u * du_dz + grad_v * dv_dz - 1.0,
        );
    }
    Ok((value, grads))
}

fn check_segments(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Result<(), LossError> {
    for seg in [(b - a), (c - b), (d - c)] {
        if seg.norm() < DEGENERATE_EPS {
            return Err(LossError::DegenerateFinger);
        }
    }
    Ok(())
}

/// Classifies a ground-truth finger quadruple `(A, B, C, D)` into its
/// dynamics state and reference vector.
///
/// State 1 when the path length beats `(1 + kappa_factor)*|AD|`; otherwise
/// a coplanarity state. A degenerate proximal triple (straight up to the
/// DIP) forces state 4, a degenerate distal triple state 3; four coplanar
/// joints give state 2; genuinely twisted chains pick the triple whose
/// plane fits the remaining joint best. The normal's sign is fixed so
/// `e · (AB x BC) >= 0` (state 4: `e · (BC x CD) >= 0`).
pub fn classify_finger(
    a: Vec3,
    b: Vec3,
    c: Vec3,
    d: Vec3,
    kappa_factor: f64,
) -> Result<FingerState, LossError> {
    check_segments(a, b, c, d)?;
    let (ab, bc, cd, ad) = (b - a, c - b, d - c, d - a);
    let path = ab.norm() + bc.norm() + cd.norm();
    if path < ad.norm() * (1.0 + kappa_factor) {
        return Ok(FingerState {
            state: 1,
            e: ad.normalize(),
        });
    }

    let n_prox = ab.cross(&bc);
    let n_dist = bc.cross(&cd);
    let prox_degenerate = n_prox.norm() < SUB_COLLINEAR_SIN * ab.norm() * bc.norm();
    let dist_degenerate = n_dist.norm() < SUB_COLLINEAR_SIN * bc.norm() * cd.norm();
    if prox_degenerate && dist_degenerate {
        // Straight segments folding back on one line; the closest
        // collinear description.
        let e = if ad.norm() > DEGENERATE_EPS {
            ad.normalize()
        } else {
            ab.normalize()
        };
        return Ok(FingerState { state: 1, e });
    }
    if prox_degenerate {
        return Ok(FingerState {
            state: 4,
            e: n_dist.normalize(),
        });
    }
    if dist_degenerate {
        return Ok(FingerState {
            state: 3,
            e: n_prox.normalize(),
        });
    }

    let n_prox_unit = n_prox.normalize();
    let n_dist_unit = n_dist.normalize();
    let d_off = ad.dot(&n_prox_unit).abs();
    let coplanar_tol = kappa_factor * ad.norm().max(DEGENERATE_EPS);
    if d_off <= coplanar_tol {
        let (ac, cd2) = (c - a, d - c);
        let second = ac.cross(&cd2);
        if second.norm() < SUB_COLLINEAR_SIN * ac.norm() * cd2.norm() {
            // The second hinge of state 2 would be degenerate.
            return Ok(FingerState {
                state: 3,
                e: n_prox_unit,
            });
        }
        return Ok(FingerState {
            state: 2,
            e: n_prox_unit,
        });
    }

    // Twisted chain: pick the triple whose plane the fourth joint fits
    // best.
    let a_off = (a - d).dot(&n_dist_unit).abs();
    if d_off <= a_off {
        Ok(FingerState {
            state: 3,
            e: n_prox_unit,
        })
    } else {
        Ok(FingerState {
            state: 4,
            e: n_dist_unit,
        })
    }
}

/// Accumulates the gradient of `max(0, rho - (v . e)/|v|)` into `out`,
/// returning the hinge value. `sign[k]` maps v's endpoints into joint
/// slots.
fn direction_hinge(
    v: Vec3,
    e: Vec3,
    rho: f64,
    out: &mut [Vec3; 4],
    minus: usize,
    plus: usize,
    skipped: &mut usize,
) -> f64 {
    let n = v.norm();
    if n < DEGENERATE_EPS {
        *skipped += 1;
        return 0.0;
    }
    let cos = v.dot(&e) / n;
    let margin = rho - cos;
    if margin <= 0.0 {
        return 0.0;
    }
    // d cos / d v, negated by the hinge.
    let dcos = e / n - v * (v.dot(&e) / (n * n * n));
    out[plus] -= dcos;
    out[minus] += dcos;
    margin
}

/// Accumulates the gradient of `max(0, rho - (p x q).e / |p x q|)`.
/// `p = joints[p1] - joints[p0]`, `q = joints[q1] - joints[q0]`.
#[allow(clippy::too_many_arguments)]
fn cross_hinge(
    joints: &[Vec3; 4],
    e: Vec3,
    rho: f64,
    (p0, p1): (usize, usize),
    (q0, q1): (usize, usize),
    out: &mut [Vec3; 4],
    skipped: &mut usize,
) -> f64 {
    let p = joints[p1] - joints[p0];
    let q = joints[q1] - joints[q0];
    let n = p.cross(&q);
    let norm = n.norm();
    if norm < DEGENERATE_EPS {
        *skipped += 1;
        return 0.0;
    }
    let cos = n.dot(&e) / norm;
    let margin = rho - cos;
    if margin <= 0.0 {
        return 0.0;
    }
    // d cos / d n, then chain through the cross product:
    // d/dp (f(p x q)) = q x g, d/dq = g x p.
    let g = e / norm - n * (n.dot(&e) / (norm * norm * norm));
    let dp = -(q.cross(&g));
    let dq = -(g.cross(&p));
    out[p1] += dp;
    out[p0] -= dp;
    out[q1] += dq;
    out[q0] -= dq;
    margin
}

/// Dynamics penalty of one estimated finger quadruple against its
/// ground-truth state. Returns `(value, per-joint gradients, skipped
/// hinge count)`; hinges whose cross product degenerates are skipped and
/// counted rather than failing.
pub fn finger_dynamics(
    quad: &[Vec3; 4],
    state: &FingerState,
    rho: f64,
    mu: f64,
    kappa_factor: f64,
) -> Result<(f64, [Vec3; 4], usize), LossError> {
    let [a, b, c, d] = *quad;
    check_segments(a, b, c, d)?;
    let mut grads = [Vec3::zeros(); 4];
    let mut skipped = 0usize;
    let mut value = 0.0;
    match state.state {
        1 => {
            value += direction_hinge(b - a, state.e, rho, &mut grads, 0, 1, &mut skipped);
            value += direction_hinge(c - a, state.e, rho, &mut grads, 0, 2, &mut skipped);
            value += direction_hinge(d - a, state.e, rho, &mut grads, 0, 3, &mut skipped);
            // Path-length hinge with the same relative slack as the
            // collinearity test.
            let (ab, bc, cd, ad) = (b - a, c - b, d - c, d - a);
            let excess = ab.norm() + bc.norm() + cd.norm() - (1.0 + kappa_factor) * ad.norm();
            if excess > 0.0 && ad.norm() > DEGENERATE_EPS {
                value += mu * excess;
                let (uab, ubc, ucd, uad) = (
                    ab.normalize(),
                    bc.normalize(),
                    cd.normalize(),
                    ad.normalize(),
                );
                let k = 1.0 + kappa_factor;
                grads[0] += mu * (-uab + k * uad);
                grads[1] += mu * (uab - ubc);
                grads[2] += mu * (ubc - ucd);
                grads[3] += mu * (ucd - k * uad);
            }
        }
        2 => {
            value += cross_hinge(quad, state.e, rho, (0, 1), (1, 2), &mut grads, &mut skipped);
            value += cross_hinge(quad, state.e, rho, (0, 2), (2, 3), &mut grads, &mut skipped);
        }
        3 => {
            value += cross_hinge(quad, state.e, rho, (0, 1), (1, 2), &mut grads, &mut skipped);
        }
        4 => {
            value += cross_hinge(quad, state.e, rho, (1, 2), (2, 3), &mut grads, &mut skipped);
        }
        other => panic!("invalid finger state {other}"),
    }
    Ok((value, grads, skipped))
}

/// Dynamics loss over the four non-thumb fingers.
pub fn dynamics_loss(
    fingers: &[[Vec3; 4]; 4],
    states: &[FingerState; 4],
    rho: f64,
    mu: f64,
    kappa_factor: f64,
) -> Result<(f64, [[Vec3; 4]; 4], usize), LossError> {
    let mut value = 0.0;
    let mut grads = [[Vec3::zeros(); 4]; 4];
    let mut skipped = 0;
    for k in 0..4 {
        let (v, g, s) = finger_dynamics(&fingers[k], &states[k], rho, mu, kappa_factor)?;
        value += v;
        grads[k] = g;
        skipped += s;
    }
    Ok((value, grads, skipped))
}
