//! Camera model, crop/projection geometry and background synthesis.
//!
//! Joints live in zero-mean world millimeters: coordinates are relative to
//! the hand point cloud center `M`. A [`CropTransform`] maps them into the
//! continuous pixel coordinates of the cropped, resized, zero-mean depth
//! image the network consumes. The projection is
//!
//! ```text
//! u = (fx*(jx + Mx)/(jz + Mz) + px - Mu) * scale_x + w/2,
//! scale_x = w*Mz / (c*fx),
//! ```
//!
//! with the symmetric formula in v, and is exactly invertible on
//! continuous coordinates.

mod crop;
mod sampling;

pub use crop::crop_and_normalize;
pub use sampling::{estimate_normals, sample_depth, sample_gradient, SurfaceNormalMap};

use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub px: f64,
    pub py: f64,
}

impl CameraModel {
    pub fn new(fx: f64, fy: f64, px: f64, py: f64) -> Self {
        CameraModel { fx, fy, px, py }
    }

    /// Absolute-world pinhole projection (full frame, not crop space).
    pub fn project_absolute(&self, p: Vec3) -> (f64, f64) {
        (
            self.fx * p.x / p.z + self.px,
            self.fy * p.y / p.z + self.py,
        )
    }

    /// Inverse of [`CameraModel::project_absolute`] at a given depth.
    pub fn backproject_absolute(&self, u: f64, v: f64, z: f64) -> Vec3 {
        Vec3::new((u - self.px) * z / self.fx, (v - self.py) * z / self.fy, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackgroundMode {
    /// Background pixels are missing (sentinel 0 in raw frames).
    RawMissing,
    /// Background replaced by the cone function with offset `phi`.
    ConeFilled { phi: f64 },
}

/// A depth image in millimeters. Raw frames hold absolute depth with 0
/// marking missing pixels; crops hold zero-mean depth (offset recorded in
/// `mean_offset`) and an explicit hand mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f64>,
    pub mask: Vec<bool>,
    pub background: BackgroundMode,
    pub mean_offset: Option<f64>,
}

impl DepthFrame {
    /// Raw frame from absolute depth values; 0 = missing.
    pub fn from_raw(width: usize, height: usize, depth: Vec<f64>) -> Self {
        assert_eq!(depth.len(), width * height, "depth grid length must be w*h");
        let mask = depth.iter().map(|&d| d > 0.0).collect();
        DepthFrame {
            width,
            height,
            depth,
            mask,
            background: BackgroundMode::RawMissing,
            mean_offset: None,
        }
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.depth[self.idx(x, y)]
    }

    pub fn hand_pixel_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn cone_phi(&self) -> Option<f64> {
        match self.background {
            BackgroundMode::ConeFilled { phi } => Some(phi),
            BackgroundMode::RawMissing => None,
        }
    }
}

/// Crop normalization record: cloud center, cube size and the derived
/// image scales. `center_image` is `(M^u, M^v, M^z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropTransform {
    pub center_world: Vec3,
    pub center_image: Vec3,
    pub cube_mm: f64,
    pub width: usize,
    pub height: usize,
    pub scale_x: f64,
    pub scale_y: f64,
}

impl CropTransform {
    pub fn new(cam: &CameraModel, center_world: Vec3, cube_mm: f64, width: usize, height: usize) -> Self {
        let (mu, mv) = cam.project_absolute(center_world);
        CropTransform {
            center_world,
            center_image: Vec3::new(mu, mv, center_world.z),
            cube_mm,
            width,
            height,
            scale_x: width as f64 * center_world.z / (cube_mm * cam.fx),
            scale_y: height as f64 * center_world.z / (cube_mm * cam.fy),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("point is behind the camera")]
    BehindCamera,
    #[error("frame contains no hand pixels")]
    EmptyFrame,
}

/// Projects a zero-mean world point into continuous crop coordinates
/// `(u, v, z)`; `z` passes through unchanged.
pub fn project_joint(
    j: Vec3,
    xform: &CropTransform,
    cam: &CameraModel,
) -> Result<(f64, f64, f64), GeomError> {
    let m = xform.center_world;
    let denom = j.z + m.z;
    if denom <= 0.0 {
        return Err(GeomError::BehindCamera);
    }
    let u = (cam.fx * (j.x + m.x) / denom + cam.px - xform.center_image.x) * xform.scale_x
        + xform.width as f64 / 2.0;
    let v = (cam.fy * (j.y + m.y) / denom + cam.py - xform.center_image.y) * xform.scale_y
        + xform.height as f64 / 2.0;
    Ok((u, v, j.z))
}

/// Exact algebraic inverse of [`project_joint`] on continuous coordinates.
pub fn backproject(uvz: (f64, f64, f64), xform: &CropTransform, cam: &CameraModel) -> Vec3 {
    let (u, v, z) = uvz;
    let m = xform.center_world;
    let denom = z + m.z;
    let x = ((u - xform.width as f64 / 2.0) / xform.scale_x - cam.px + xform.center_image.x)
        * denom
        / cam.fx
        - m.x;
    let y = ((v - xform.height as f64 / 2.0) / xform.scale_y - cam.py + xform.center_image.y)
        * denom
        / cam.fy
        - m.y;
    Vec3::new(x, y, z)
}

/// Slope of the synthetic background cone, in mm per pixel.
pub const CONE_SLOPE: f64 = 5.0;
/// Default cone offset at the image center.
pub const CONE_PHI: f64 = 100.0;

/// Background depth at `(u, v)`: `5*dist_to_center + phi`.
pub fn cone_value(u: f64, v: f64, width: usize, height: usize, phi: f64) -> f64 {
    let du = u - 0.5 * width as f64;
    let dv = v - 0.5 * height as f64;
    CONE_SLOPE * du.hypot(dv) + phi
}

/// Cone with the standard offset of 100 mm.
pub fn cone_background(u: f64, v: f64, width: usize, height: usize) -> f64 {
    cone_value(u, v, width, height, CONE_PHI)
}

/// Spatial gradient of the cone; zero at the exact center.
pub fn cone_gradient(u: f64, v: f64, width: usize, height: usize) -> (f64, f64) {
    let du = u - 0.5 * width as f64;
    let dv = v - 0.5 * height as f64;
    let r = du.hypot(dv);
    if r < 1e-12 {
        return (0.0, 0.0);
    }
    (CONE_SLOPE * du / r, CONE_SLOPE * dv / r)
}

/// Replaces every non-hand pixel with the cone function; hand pixels are
/// untouched. The cone keeps background derivatives nonzero so stray
/// joints are pulled back toward the hand.
pub fn fill_background(frame: &DepthFrame, phi: f64) -> Result<DepthFrame, GeomError> {
    if frame.hand_pixel_count() == 0 {
        return Err(GeomError::EmptyFrame);
    }
    let mut out = frame.clone();
    for y in 0..frame.height {
        for x in 0..frame.width {
            let i = frame.idx(x, y);
            if !frame.mask[i] {
                out.depth[i] = cone_value(x as f64, y as f64, frame.width, frame.height, phi);
            }
        }
    }
    out.background = BackgroundMode::ConeFilled { phi };
    Ok(out)
}
