//! Unit quaternion rotations.
//!
//! `q` and `-q` encode the same rotation; where a unique representative is
//! needed (viewpoint regression targets) use [`Quaternion::hemisphere`].

use serde::{Deserialize, Serialize};

use crate::{Mat3, Vec3};

/// Rotation quaternion `(w, x, y, z)`, unitless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Quaternion with norm below `1e-12`; carries no rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("zero quaternion cannot encode a rotation")]
pub struct ZeroQuaternion;

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Returns the unit quaternion with the same direction.
    pub fn normalized(&self) -> Result<Quaternion, ZeroQuaternion> {
        let n = self.norm();
        if n < 1e-12 {
            return Err(ZeroQuaternion);
        }
        Ok(Quaternion::new(
            self.w / n,
            self.x / n,
            self.y / n,
            self.z / n,
        ))
    }

    /// Flips sign so that `w >= 0`, picking one representative of the
    /// `q`/`-q` double cover. Ties at `w == 0` resolve to the first
    /// nonzero component being positive.
    pub fn hemisphere(&self) -> Quaternion {
        let flip = if self.w != 0.0 {
            self.w < 0.0
        } else if self.x != 0.0 {
            self.x < 0.0
        } else if self.y != 0.0 {
            self.y < 0.0
        } else {
            self.z < 0.0
        };
        if flip {
            Quaternion::new(-self.w, -self.x, -self.y, -self.z)
        } else {
            *self
        }
    }

    pub fn from_axis_angle(axis: Vec3, angle_rad: f64) -> Result<Quaternion, ZeroQuaternion> {
        let n = axis.norm();
        if n < 1e-12 {
            return Err(ZeroQuaternion);
        }
        let half = 0.5 * angle_rad;
        let s = half.sin() / n;
        Ok(Quaternion::new(
            half.cos(),
            axis.x * s,
            axis.y * s,
            axis.z * s,
        ))
    }

    /// Proper rotation matrix (orthonormal, det +1). Normalizes internally.
    pub fn to_matrix(&self) -> Result<Mat3, ZeroQuaternion> {
        let q = self.normalized()?;
        let (w, x, y, z) = (q.w, q.x, q.y, q.z);
        Ok(Mat3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ))
    }

    /// Quaternion of a rotation matrix (Shepperd's method). The result is
    /// hemisphere-normalized.
    pub fn from_matrix(m: &Mat3) -> Quaternion {
        let trace = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
        let q = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            Quaternion::new(
                0.25 * s,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            )
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
            Quaternion::new(
                (m[(2, 1)] - m[(1, 2)]) / s,
                0.25 * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            )
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
            Quaternion::new(
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                0.25 * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
            )
        } else {
            let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
            Quaternion::new(
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                0.25 * s,
            )
        };
        q.hemisphere()
    }

    /// Hamilton product; `(q1 * q2)` rotates by `q2` first, then `q1`.
    pub fn mul(&self, rhs: &Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }

    pub fn rotate(&self, v: Vec3) -> Result<Vec3, ZeroQuaternion> {
        Ok(self.to_matrix()? * v)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Quaternion {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_maps_to_identity_matrix() {
        let m = Quaternion::IDENTITY.to_matrix().unwrap();
        assert_abs_diff_eq!(m, Mat3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn ninety_degrees_about_z_maps_x_to_y() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = Quaternion::new(h, 0.0, 0.0, h);
        let v = q.rotate(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn q_and_minus_q_give_identical_matrices() {
        let q = Quaternion::new(0.3, -0.5, 0.7, 0.2);
        let neg = Quaternion::new(-0.3, 0.5, -0.7, -0.2);
        let (a, b) = (q.to_matrix().unwrap(), neg.to_matrix().unwrap());
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn zero_quaternion_is_rejected() {
        assert_eq!(
            Quaternion::new(0.0, 0.0, 0.0, 0.0).to_matrix(),
            Err(ZeroQuaternion)
        );
    }

    #[test]
    fn matrix_roundtrip_recovers_hemisphere_representative() {
        let q = Quaternion::new(-0.4, 0.1, -0.8, 0.3).normalized().unwrap();
        let back = Quaternion::from_matrix(&q.to_matrix().unwrap());
        let expect = q.hemisphere();
        assert_abs_diff_eq!(back.w, expect.w, epsilon = 1e-12);
        assert_abs_diff_eq!(back.x, expect.x, epsilon = 1e-12);
        assert_abs_diff_eq!(back.y, expect.y, epsilon = 1e-12);
        assert_abs_diff_eq!(back.z, expect.z, epsilon = 1e-12);
    }

    #[test]
    fn rotation_matrices_are_proper_for_random_unit_quaternions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let q = Quaternion::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if q.norm() < 1e-3 {
                continue;
            }
            let m = q.to_matrix().unwrap();
            assert_abs_diff_eq!(m.transpose() * m, Mat3::identity(), epsilon = 1e-9);
            assert_abs_diff_eq!(m.determinant(), 1.0, epsilon = 1e-9);
        }
    }
}
