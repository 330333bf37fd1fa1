//! Surface normal estimation and differentiable depth sampling.
//!
//! The appearance-loss gradient needs a continuous depth surface. Hand
//! pixels are sampled bilinearly with gradients taken from a surface
//! normal map (box-smoothed central differences, robust to sensor noise);
//! background and out-of-bounds queries use the analytic cone, so its
//! value and gradient stay exactly consistent.

use super::{cone_gradient, cone_value, BackgroundMode, DepthFrame};

/// Maximum magnitude of the z component used in gradient ratios; bounds
/// `s^x/s^z` near silhouettes where the depth jump makes normals lie
/// almost in the image plane.
const NORMAL_Z_CLAMP: f64 = 0.05;

/// Per-pixel unit surface normals plus the clamped image-space gradient
/// ratios `(-s^x/s^z, -s^y/s^z)` used for sampling.
#[derive(Debug, Clone)]
pub struct SurfaceNormalMap {
    pub width: usize,
    pub height: usize,
    pub normals: Vec<[f64; 3]>,
    grad: Vec<[f64; 2]>,
}

impl SurfaceNormalMap {
    pub fn normal_at(&self, x: usize, y: usize) -> [f64; 3] {
        self.normals[y * self.width + x]
    }
}

/// Central differences, one-sided at the borders.
fn central_diff(depth: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            gx[i] = match x {
                0 => depth[i + 1] - depth[i],
                _ if x == w - 1 => depth[i] - depth[i - 1],
                _ => 0.5 * (depth[i + 1] - depth[i - 1]),
            };
            gy[i] = match y {
                0 => depth[i + w] - depth[i],
                _ if y == h - 1 => depth[i] - depth[i - w],
                _ => 0.5 * (depth[i + w] - depth[i - w]),
            };
        }
    }
    (gx, gy)
}

fn box_smooth(src: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0;
            let mut n = 0.0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                        sum += src[ny as usize * w + nx as usize];
                        n += 1.0;
                    }
                }
            }
            out[y * w + x] = sum / n;
        }
    }
    out
}

/// Estimates per-pixel surface normals from 3x3 box-smoothed central
/// differences of the depth grid. Normals point away from the camera(+z);
/// a constant-depth plane yields `(0, 0, 1)` and a ramp `z0 + a*x` yields
/// `(-a, 0, 1)` normalized.
pub fn estimate_normals(frame: &DepthFrame) -> SurfaceNormalMap {
    let (w, h) = (frame.width, frame.height);
    let (gx, gy) = central_diff(&frame.depth, w, h);
    let gx = box_smooth(&gx, w, h);
    let gy = box_smooth(&gy, w, h);
    let mut normals = Vec::with_capacity(w * h);
    let mut grad = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let norm = (1.0 + gx[i] * gx[i] + gy[i] * gy[i]).sqrt();
        let n = [-gx[i] / norm, -gy[i] / norm, 1.0 / norm];
        let nz = n[2].max(NORMAL_Z_CLAMP);
        normals.push(n);
        grad.push([-n[0] / nz, -n[1] / nz]);
    }
    SurfaceNormalMap {
        width: w,
        height: h,
        normals,
        grad,
    }
}

struct Bilinear {
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
    fx: f64,
    fy: f64,
}

fn bilinear_setup(frame: &DepthFrame, u: f64, v: f64) -> Bilinear {
    let cu = u.clamp(0.0, (frame.width - 1) as f64);
    let cv = v.clamp(0.0, (frame.height - 1) as f64);
    let x0 = cu.floor() as usize;
    let y0 = cv.floor() as usize;
    let x1 = (x0 + 1).min(frame.width - 1);
    let y1 = (y0 + 1).min(frame.height - 1);
    Bilinear {
        x0,
        x1,
        y0,
        y1,
        fx: cu - x0 as f64,
        fy: cv - y0 as f64,
    }
}

fn taps_all_background(frame: &DepthFrame, b: &Bilinear) -> bool {
    !frame.mask[frame.idx(b.x0, b.y0)]
        && !frame.mask[frame.idx(b.x1, b.y0)]
        && !frame.mask[frame.idx(b.x0, b.y1)]
        && !frame.mask[frame.idx(b.x1, b.y1)]
}

fn out_of_bounds(frame: &DepthFrame, u: f64, v: f64) -> bool {
    u < 0.0 || v < 0.0 || u > (frame.width - 1) as f64 || v > (frame.height - 1) as f64
}

/// Depth at continuous `(u, v)`: bilinear on hand pixels, analytic cone on
/// background and out-of-bounds queries (the cone extends beyond the
/// image, keeping stray joints differentiable).
pub fn sample_depth(frame: &DepthFrame, u: f64, v: f64) -> f64 {
    let phi = match frame.background {
        BackgroundMode::ConeFilled { phi } => phi,
        BackgroundMode::RawMissing => f64::NAN,
    };
    debug_assert!(!phi.is_nan(), "sample_depth requires a cone-filled frame");
    let b = bilinear_setup(frame, u, v);
    if out_of_bounds(frame, u, v) || taps_all_background(frame, &b) {
        return cone_value(u, v, frame.width, frame.height, phi);
    }
    let d00 = frame.at(b.x0, b.y0);
    let d10 = frame.at(b.x1, b.y0);
    let d01 = frame.at(b.x0, b.y1);
    let d11 = frame.at(b.x1, b.y1);
    let top = d00 + (d10 - d00) * b.fx;
    let bot = d01 + (d11 - d01) * b.fx;
    top + (bot - top) * b.fy
}

/// Image-space depth derivative `(dI/du, dI/dv)` at continuous `(u, v)`:
/// normal-map ratios on hand pixels, analytic cone gradient elsewhere.
pub fn sample_gradient(
    frame: &DepthFrame,
    normals: &SurfaceNormalMap,
    u: f64,
    v: f64,
) -> (f64, f64) {
    let b = bilinear_setup(frame, u, v);
    if out_of_bounds(frame, u, v) || taps_all_background(frame, &b) {
        return cone_gradient(u, v, frame.width, frame.height);
    }
    let g = |x: usize, y: usize| normals.grad[y * normals.width + x];
    let (g00, g10, g01, g11) = (g(b.x0, b.y0), g(b.x1, b.y0), g(b.x0, b.y1), g(b.x1, b.y1));
    let mut out = [0.0; 2];
    for (k, o) in out.iter_mut().enumerate() {
        let top = g00[k] + (g10[k] - g00[k]) * b.fx;
        let bot = g01[k] + (g11[k] - g01[k]) * b.fx;
        *o = top + (bot - top) * b.fy;
    }
    (out[0], out[1])
}
