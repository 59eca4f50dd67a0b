//! Euclidean 3-vectors and the spherical angle convention shared by the
//! antenna and channel models.
//!
//! The base station panel is vertical, lies in the y-z plane, and radiates
//! toward +x (boresight). Directions are described by a zenith angle `theta`
//! measured from +z (so the horizon sits at 90 degrees) and an azimuth `phi`
//! measured from +x in the horizontal plane, both in degrees.

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn add(self, other: Self) -> Self {
        Self::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn sub(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector pointing from `self` toward `to`. Returns `None` when the
    /// two points coincide.
    pub fn unit_toward(self, to: Self) -> Option<Self> {
        let d = to.sub(self);
        let n = d.norm();
        if n == 0.0 {
            None
        } else {
            Some(d.scale(1.0 / n))
        }
    }

    /// Distance ignoring the z component; used for safety-circle membership.
    pub fn horizontal_distance(self, other: Self) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    /// Rotation about the vertical axis by `angle_rad`, counterclockwise when
    /// viewed from above.
    pub fn rotated_z(self, angle_rad: f64) -> Self {
        let (s, c) = angle_rad.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

/// Departure direction in the panel-local spherical convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalAngles {
    /// Zenith angle in degrees, in [0, 180].
    pub theta_deg: f64,
    /// Azimuth in degrees measured from boresight, in [-180, 180].
    pub phi_deg: f64,
}

/// Angles of the ray leaving `from` toward `to`.
///
/// Returns `None` when the points coincide (the direction is undefined).
pub fn departure_angles(from: Vec3, to: Vec3) -> Option<SphericalAngles> {
    let d = to.sub(from);
    let n = d.norm();
    if n == 0.0 {
        return None;
    }
    let cos_theta = (d.z / n).clamp(-1.0, 1.0);
    Some(SphericalAngles {
        theta_deg: cos_theta.acos().to_degrees(),
        phi_deg: d.y.atan2(d.x).to_degrees(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn test_unit_toward_has_unit_norm() {
        let a = Vec3::new(1.0, -2.0, 3.0);
        let b = Vec3::new(-4.0, 0.5, 9.0);
        let u = a.unit_toward(b).unwrap();
        assert_relative_eq!(u.norm(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn test_unit_toward_coincident_points_is_none() {
        let a = Vec3::new(1.0, 1.0, 1.0);
        assert!(a.unit_toward(a).is_none());
    }

    #[test]
    fn test_departure_angles_boresight() {
        let a = departure_angles(Vec3::zero(), Vec3::new(10.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(a.theta_deg, 90.0, max_relative = 1e-12);
        assert_relative_eq!(a.phi_deg, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn test_departure_angles_zenith_and_nadir() {
        let up = departure_angles(Vec3::zero(), Vec3::new(0.0, 0.0, 5.0)).unwrap();
        assert_relative_eq!(up.theta_deg, 0.0, epsilon = 1e-12);
        let down = departure_angles(Vec3::zero(), Vec3::new(0.0, 0.0, -5.0)).unwrap();
        assert_relative_eq!(down.theta_deg, 180.0, epsilon = 1e-12);
    }

    #[test]
    fn test_departure_angles_quadrants() {
        let left = departure_angles(Vec3::zero(), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(left.phi_deg, 90.0, max_relative = 1e-12);
        let back = departure_angles(Vec3::zero(), Vec3::new(-1.0, 1e-12, 0.0)).unwrap();
        assert!(back.phi_deg > 179.0);
    }

    #[test]
    fn test_rotated_z_preserves_norm_and_z() {
        let v = Vec3::new(3.0, -4.0, 2.5);
        let r = v.rotated_z(1.234);
        assert_relative_eq!(r.norm(), v.norm(), max_relative = 1e-14);
        assert_eq!(r.z, v.z);
    }
}
