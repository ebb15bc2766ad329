use serde::{Deserialize, Serialize};

use crate::math::{Ray, Vec3};

use super::RenderError;

/// Pinhole camera.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: Vec3,
    pub forward: Vec3,
    pub up: Vec3,
    /// Vertical field of view in radians.
    pub vfov: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidArgument(format!(
                "resolution must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.vfov > 0.0 && self.vfov < std::f64::consts::PI) {
            return Err(RenderError::InvalidArgument(format!(
                "vertical field of view {} rad outside (0, pi)",
                self.vfov
            )));
        }
        let f = self.forward;
        if !self.position.is_finite() || !f.is_finite() || f.length() == 0.0 {
            return Err(RenderError::InvalidArgument("camera position/forward must be finite and non-zero".into()));
        }
        if !self.up.is_finite() || f.cross(self.up).length() < 1e-9 * f.length() * self.up.length() {
            return Err(RenderError::InvalidArgument("camera up must not be parallel to forward".into()));
        }
        Ok(())
    }

    pub(crate) fn frame(&self) -> CameraFrame {
        let forward = self.forward.normalized();
        let right = forward.cross(self.up).normalized();
        let up = right.cross(forward);
        let half_h = (self.vfov * 0.5).tan();
        let half_w = half_h * self.width as f64 / self.height as f64;
        CameraFrame {
            origin: self.position,
            forward,
            right: right * half_w,
            up: up * half_h,
            width: self.width as f64,
            height: self.height as f64,
        }
    }
}

/// Precomputed orthonormal camera frame, scaled to the image plane at unit distance.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CameraFrame {
    origin: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    width: f64,
    height: f64,
}

impl CameraFrame {
    /// Primary ray through film position `(px, py)` in pixel units, `y` pointing down.
    pub(crate) fn ray(&self, px: f64, py: f64) -> Ray {
        let sx = 2.0 * px / self.width - 1.0;
        let sy = 1.0 - 2.0 * py / self.height;
        let dir = self.forward + self.right * sx + self.up * sy;
        Ray::new(self.origin, dir.normalized())
    }
}
