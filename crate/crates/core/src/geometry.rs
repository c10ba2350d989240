//! 3D primitives shared by the rest of the crate: vectors, segments,
//! segment-segment distance and the circumradius of vertex triples.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{KnotError, Result};

/// Relative threshold on the closest-point denominator below which two
/// segments are treated as parallel.
const PARALLEL_EPS: f64 = 1e-12;

/// Triangles with area below `COLLINEAR_EPS * longest_side^2` are collinear.
const COLLINEAR_EPS: f64 = 1e-12;

/// A point or displacement in simulation units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    #[inline]
    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self / n)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

/// A non-degenerate line segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    a: Vec3,
    b: Vec3,
}

impl Segment {
    pub fn new(a: Vec3, b: Vec3) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(KnotError::NonFinite);
        }
        if a == b {
            return Err(KnotError::DegenerateSegment);
        }
        Ok(Segment { a, b })
    }

    pub fn a(&self) -> Vec3 {
        self.a
    }

    pub fn b(&self) -> Vec3 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    /// Point at parameter `t` in `[0, 1]`.
    pub fn at(&self, t: f64) -> Vec3 {
        self.a + (self.b - self.a) * t
    }
}

/// Minimum Euclidean distance between two segments.
pub fn segment_min_distance(s1: &Segment, s2: &Segment) -> f64 {
    segment_distance(s1.a, s1.b, s2.a, s2.b)
}

/// Closest-point parameters `(s, t)` on `p1-q1` and `p2-q2`.
///
/// Clamped parametric solve on the two carrier lines; when the lines are
/// (nearly) parallel the first parameter is pinned to 0 and the second is
/// solved and clamped, then the first re-solved against the clamped value.
pub fn closest_parameters(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> (f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm2();
    let e = d2.norm2();
    let f = d2.dot(r);
    let c = d1.dot(r);
    let b = d1.dot(d2);
    let denom = a * e - b * b;

    let mut s = if denom > PARALLEL_EPS * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (s, t)
}

/// Distance between segments `p1-q1` and `p2-q2`, given by their endpoints.
#[inline]
pub fn segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let (s, t) = closest_parameters(p1, q1, p2, q2);
    let c1 = p1 + (q1 - p1) * s;
    let c2 = p2 + (q2 - p2) * t;
    c1.distance(c2)
}

/// Radius of the circle through `a`, `b`, `c`; `f64::INFINITY` when the
/// points are collinear.
pub fn circumradius(a: Vec3, b: Vec3, c: Vec3) -> Result<f64> {
    let ab = a.distance(b);
    let bc = b.distance(c);
    let ca = c.distance(a);
    if ab == 0.0 || bc == 0.0 || ca == 0.0 {
        return Err(KnotError::CoincidentVertices);
    }
    let twice_area = (b - a).cross(c - a).norm();
    let longest = ab.max(bc).max(ca);
    if 0.5 * twice_area < COLLINEAR_EPS * longest * longest {
        return Ok(f64::INFINITY);
    }
    Ok(ab * bc * ca / (2.0 * twice_area))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: [f64; 3], b: [f64; 3]) -> Segment {
        Segment::new(a.into(), b.into()).unwrap()
    }

    #[test]
    fn parallel_offset() {
        let d = segment_min_distance(&seg([0., 0., 0.], [1., 0., 0.]), &seg([0., 0., 1.], [1., 0., 1.]));
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perpendicular_offset() {
        let d = segment_min_distance(
            &seg([0., 0., 0.], [1., 0., 0.]),
            &seg([0.5, -1., 0.5], [0.5, 1., 0.5]),
        );
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collinear_gap() {
        let d = segment_min_distance(&seg([0., 0., 0.], [1., 0., 0.]), &seg([2., 0., 0.], [3., 0., 0.]));
        assert!((d - 1.0).abs() < 1e-15);
        let d = segment_min_distance(&seg([3., 0., 0.], [2., 0., 0.]), &seg([1., 0., 0.], [0., 0., 0.]));
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn intersecting_is_zero() {
        let d = segment_min_distance(&seg([-1., 0., 0.], [1., 0., 0.]), &seg([0., -1., 0.], [0., 1., 0.]));
        assert_eq!(d, 0.0);
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(matches!(
            Segment::new(Vec3::ZERO, Vec3::ZERO),
            Err(KnotError::DegenerateSegment)
        ));
        assert!(Segment::new(Vec3::new(f64::NAN, 0., 0.), Vec3::ZERO).is_err());
    }

    #[test]
    fn circumradius_cases() {
        let r = circumradius([1., 0., 0.].into(), [0., 1., 0.].into(), [-1., 0., 0.].into()).unwrap();
        assert!((r - 1.0).abs() < 1e-14);

        let r = circumradius(Vec3::ZERO, [1., 0., 0.].into(), [2., 0., 0.].into()).unwrap();
        assert!(r.is_infinite());

        let h = 3f64.sqrt() / 2.0;
        let r = circumradius(Vec3::ZERO, [1., 0., 0.].into(), [0.5, h, 0.].into()).unwrap();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-14);

        assert!(circumradius(Vec3::ZERO, Vec3::ZERO, [1., 0., 0.].into()).is_err());
    }
}
