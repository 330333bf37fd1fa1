//! Cube crop, nearest-neighbor resize and zero-mean normalization.

use super::{BackgroundMode, CameraModel, CropTransform, DepthFrame, GeomError};
use crate::Vec3;

/// Crops the cube's image-plane projection around the cloud center,
/// resizes to `out_width x out_height` by nearest neighbor and subtracts
/// `M^z` so hand depth is zero-mean. Background pixels stay missing; run
/// [`super::fill_background`] afterwards for loss-time sampling.
pub fn crop_and_normalize(
    raw: &DepthFrame,
    cam: &CameraModel,
    center_world: Vec3,
    cube_mm: f64,
    out_width: usize,
    out_height: usize,
) -> Result<(DepthFrame, CropTransform), GeomError> {
    let xform = CropTransform::new(cam, center_world, cube_mm, out_width, out_height);
    let mut depth = vec![0.0; out_width * out_height];
    let mut mask = vec![false; out_width * out_height];
    let mut hand_pixels = 0usize;
    for vo in 0..out_height {
        for uo in 0..out_width {
            let u_abs = (uo as f64 - out_width as f64 / 2.0) / xform.scale_x + xform.center_image.x;
            let v_abs =
                (vo as f64 - out_height as f64 / 2.0) / xform.scale_y + xform.center_image.y;
            let (xr, yr) = (u_abs.round(), v_abs.round());
            if xr < 0.0 || yr < 0.0 || xr >= raw.width as f64 || yr >= raw.height as f64 {
                continue;
            }
            let i_raw = raw.idx(xr as usize, yr as usize);
            if raw.mask[i_raw] {
                let i = vo * out_width + uo;
                depth[i] = raw.depth[i_raw] - center_world.z;
                mask[i] = true;
                hand_pixels += 1;
            }
        }
    }
    if hand_pixels == 0 {
        return Err(GeomError::EmptyFrame);
    }
    Ok((
        DepthFrame {
            width: out_width,
            height: out_height,
            depth,
            mask,
            background: BackgroundMode::RawMissing,
            mean_offset: Some(center_world.z),
        },
        xform,
    ))
}

/// Virtual camera for which an existing crop is itself a raw frame; used
/// to re-crop already-cropped data with identical geometry.
pub fn crop_camera(cam: &CameraModel, xform: &CropTransform) -> CameraModel {
    CameraModel {
        fx: cam.fx * xform.scale_x,
        fy: cam.fy * xform.scale_y,
        px: (cam.px - xform.center_image.x) * xform.scale_x + xform.width as f64 / 2.0,
        py: (cam.py - xform.center_image.y) * xform.scale_y + xform.height as f64 / 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn camera() -> CameraModel {
        CameraModel::new(588.0, 588.0, 96.0, 96.0)
    }

    /// Renders a fronto-parallel square patch at the given depth into a
    /// raw frame.
    fn raw_patch(depth_mm: f64, half_px: i64) -> DepthFrame {
        let (w, h) = (192, 192);
        let mut depth = vec![0.0; w * h];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                if (x - 96).abs() <= half_px && (y - 96).abs() <= half_px {
                    depth[(y * w as i64 + x) as usize] = depth_mm;
                }
            }
        }
        DepthFrame::from_raw(w, h, depth)
    }

    #[test]
    fn centered_hand_crops_to_zero_mean() {
        let raw = raw_patch(800.0, 30);
        let center = Vec3::new(0.0, 0.0, 800.0);
        let (crop, xform) = crop_and_normalize(&raw, &camera(), center, 250.0, 96, 96).unwrap();
        assert_eq!(crop.width, 96);
        let c = crop.at(48, 48);
        assert!(crop.mask[crop.idx(48, 48)]);
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(xform.scale_x, 96.0 * 800.0 / (250.0 * 588.0), epsilon = 1e-12);
    }

    #[test]
    fn doubling_the_cube_halves_the_hand_extent() {
        let raw = raw_patch(800.0, 30);
        let center = Vec3::new(0.0, 0.0, 800.0);
        let (tight, _) = crop_and_normalize(&raw, &camera(), center, 200.0, 96, 96).unwrap();
        let (wide, _) = crop_and_normalize(&raw, &camera(), center, 400.0, 96, 96).unwrap();
        let extent = |f: &DepthFrame| {
            let xs: Vec<usize> = (0..f.width * f.height)
                .filter(|&i| f.mask[i])
                .map(|i| i % f.width)
                .collect();
            (*xs.iter().max().unwrap() - *xs.iter().min().unwrap()) as f64
        };
        let ratio = extent(&tight) / extent(&wide);
        assert!((ratio - 2.0).abs() < 0.15, "extent ratio {ratio}");
    }

    #[test]
    fn crop_of_a_crop_is_idempotent() {
        let raw = raw_patch(820.0, 40);
        let cam = camera();
        let center = Vec3::new(10.0, -6.0, 800.0);
        let (crop1, xform) = crop_and_normalize(&raw, &cam, center, 250.0, 96, 96).unwrap();

        // Treat the crop as a raw frame under its virtual camera.
        let mut as_raw = crop1.clone();
        for (d, &m) in as_raw.depth.iter_mut().zip(crop1.mask.iter()) {
            if m {
                *d += center.z;
            }
        }
        as_raw.mean_offset = None;
        let vcam = crop_camera(&cam, &xform);
        let (crop2, _) = crop_and_normalize(&as_raw, &vcam, center, 250.0, 96, 96).unwrap();
        assert_eq!(crop1.mask, crop2.mask);
        for (a, b) in crop1.depth.iter().zip(crop2.depth.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn empty_crop_is_an_error() {
        let raw = raw_patch(800.0, 5);
        // Center far away from the patch: nothing lands in the cube crop.
        let center = Vec3::new(500.0, 500.0, 800.0);
        assert_eq!(
            crop_and_normalize(&raw, &camera(), center, 100.0, 96, 96).unwrap_err(),
            GeomError::EmptyFrame
        );
    }
}
