//! Plane vectors and rigid motions.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: c, y: s }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    /// Rotation by +90 degrees; the inward normal of a counterclockwise tangent.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2 { x: -self.y, y: self.x }
    }

    #[inline]
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2 {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Orientation-preserving rigid motion `x -> R(angle) x + shift`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub angle: f64,
    pub shift: Vec2,
}

impl Default for Isometry {
    fn default() -> Self {
        Isometry::IDENTITY
    }
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        angle: 0.0,
        shift: Vec2::ZERO,
    };

    pub fn translation(v: Vec2) -> Self {
        Isometry {
            angle: 0.0,
            shift: v,
        }
    }

    pub fn rotation(angle: f64) -> Self {
        Isometry {
            angle,
            shift: Vec2::ZERO,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.angle == 0.0 && self.shift == Vec2::ZERO
    }

    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        if self.angle == 0.0 {
            p + self.shift
        } else {
            p.rotated(self.angle) + self.shift
        }
    }

    #[inline]
    pub fn apply_vector(&self, v: Vec2) -> Vec2 {
        if self.angle == 0.0 {
            v
        } else {
            v.rotated(self.angle)
        }
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &Isometry) -> Isometry {
        Isometry {
            angle: self.angle + first.angle,
            shift: self.apply(first.shift),
        }
    }
}

/// Representative of `x` modulo 1 in `[0, 1)`.
#[inline]
pub fn wrap01(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the circle R/Z.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = wrap01(a - b);
    d.min(1.0 - d)
}

/// Angle reduced into `(-pi, pi]`.
#[inline]
pub fn wrap_pi(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a % two_pi;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    } else if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_helpers() {
        assert_eq!(wrap01(1.25), 0.25);
        assert_eq!(wrap01(-0.25), 0.75);
        assert!(wrap01(-1e-18) < 1.0);
        assert!((circle_dist(0.95, 0.05) - 0.1).abs() < 1e-15);
        assert!((wrap_pi(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn isometry_composition() {
        let a = Isometry {
            angle: 0.3,
            shift: Vec2::new(1.0, -2.0),
        };
        let b = Isometry {
            angle: -1.1,
            shift: Vec2::new(0.5, 0.25),
        };
        let p = Vec2::new(0.7, 0.2);
        let lhs = a.compose(&b).apply(p);
        let rhs = a.apply(b.apply(p));
        assert!(lhs.dist(rhs) < 1e-15);
    }
}
