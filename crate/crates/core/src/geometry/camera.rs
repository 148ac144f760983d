use serde::{Deserialize, Serialize};

use super::{GeometryError, Ray, Vec3};

/// Pinhole camera with an explicit orthonormal basis.
///
/// The basis satisfies `right × up = −forward`; depth is measured along
/// `forward` from `position`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel {
    pub position: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
    /// Vertical field of view in radians.
    pub vfov: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraModel {
    /// Camera at `position` looking at `target`. `up_hint` must not be parallel
    /// to the viewing direction.
    pub fn look_at(
        position: Vec3,
        target: Vec3,
        up_hint: Vec3,
        vfov: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        let forward = (target - position).normalize();
        let right = forward.cross(up_hint);
        if right.length() < 1e-9 || !forward.is_unit() {
            return Err(GeometryError::InvalidCamera(
                "degenerate look-at: target coincides with position or up is parallel to view"
                    .into(),
            ));
        }
        let right = right.normalize();
        let up = right.cross(forward);
        let cam = CameraModel {
            position,
            right,
            up,
            forward,
            vfov,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |msg: &str| Err(GeometryError::InvalidCamera(msg.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("resolution must be at least 1x1");
        }
        if !(self.vfov > 0.0 && self.vfov < std::f64::consts::PI) {
            return bad("vertical fov must lie in (0, pi)");
        }
        if !self.position.is_finite() {
            return bad("position must be finite");
        }
        let tol = 1e-6;
        if !(self.right.is_unit() && self.up.is_unit() && self.forward.is_unit()) {
            return bad("basis vectors must be unit length");
        }
        if self.right.dot(self.up).abs() > tol
            || self.right.dot(self.forward).abs() > tol
            || self.up.dot(self.forward).abs() > tol
        {
            return bad("basis must be orthogonal");
        }
        if (self.right.cross(self.up) + self.forward).length() > tol {
            return bad("basis must be right-handed (right x up = -forward)");
        }
        Ok(())
    }

    /// Same camera with a different image resolution.
    pub fn with_resolution(&self, width: u32, height: u32) -> Self {
        CameraModel {
            width,
            height,
            ..self.clone()
        }
    }

    /// Camera-space z (distance along `forward`) of a world point.
    #[inline]
    pub fn depth_of(&self, p: Vec3) -> f64 {
        (p - self.position).dot(self.forward)
    }

    /// Normalized image coordinates of a world point: `(0,0)` is the top-left
    /// corner, `(1,1)` the bottom-right. `None` when the point is behind the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let rel = p - self.position;
        let z = rel.dot(self.forward);
        if z <= 0.0 {
            return None;
        }
        let half_h = libm::tan(0.5 * self.vfov);
        let half_w = half_h * self.width as f64 / self.height as f64;
        let u = rel.dot(self.right) / (z * half_w);
        let v = rel.dot(self.up) / (z * half_h);
        Some((0.5 * (u + 1.0), 0.5 * (1.0 - v)))
    }

    /// Primary ray through pixel `(px, py)` offset by `jitter` in `[0,1)²`;
    /// `(0.5, 0.5)` is the pixel center. Rows run top to bottom.
    pub fn ray(&self, px: u32, py: u32, jitter: (f64, f64)) -> Result<Ray, GeometryError> {
        if px >= self.width || py >= self.height {
            return Err(GeometryError::PixelOutOfRange {
                px,
                py,
                width: self.width,
                height: self.height,
            });
        }
        let w = self.width as f64;
        let h = self.height as f64;
        let half_h = libm::tan(0.5 * self.vfov);
        let half_w = half_h * w / h;
        let u = 2.0 * (px as f64 + jitter.0) / w - 1.0;
        let v = 1.0 - 2.0 * (py as f64 + jitter.1) / h;
        let dir = self.forward + self.right * (u * half_w) + self.up * (v * half_h);
        Ok(Ray::new(self.position, dir.normalize()))
    }
}

/// Free-function form of [`CameraModel::ray`].
pub fn camera_ray(
    camera: &CameraModel,
    px: u32,
    py: u32,
    jitter: (f64, f64),
) -> Result<Ray, GeometryError> {
    camera.ray(px, py, jitter)
}
