//! Linking number by signed crossings in a generic projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KnotError, Result};
use crate::geometry::{segment_distance, Vec3};

/// Crossings whose parameter lies this close to a segment end are treated
/// as non-generic and the projection is retried.
const ENDPOINT_EPS: f64 = 1e-9;
const MAX_RETRIES: u64 = 8;

/// A proper rotation matrix (row-major).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation([[1., 0., 0.], [0., 1., 0.], [0., 0., 1.]]);

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Rotation for the unit quaternion `(w, x, y, z)`.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Rotation([
            [1. - 2. * (y * y + z * z), 2. * (x * y - w * z), 2. * (x * z + w * y)],
            [2. * (x * y + w * z), 1. - 2. * (x * x + z * z), 2. * (y * z - w * x)],
            [2. * (x * z - w * y), 2. * (y * z + w * x), 1. - 2. * (x * x + y * y)],
        ])
    }
}

/// Uniformly distributed rotation drawn from a seeded generator.
pub fn rotation_from_seed(seed: u64) -> Rotation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Shoemake's subgroup algorithm
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Rotation::from_quaternion(
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
        b * (tau * u3).cos(),
    )
}

/// Result of a linking-number evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linking {
    pub value: i64,
    /// Distance of the half crossing sum from the reported integer.
    pub residual: f64,
    /// Number of inter-component crossings in the projection used.
    pub crossings: usize,
    /// Projections tried before a generic one was found.
    pub attempts: u64,
}

enum Crossing {
    None,
    /// `s`, `t` along the two projected segments.
    At(f64, f64),
    Degenerate,
}

fn cross2(a: Vec3, b: Vec3) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Intersection of two segments after dropping the z coordinate.
fn projected_crossing(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> Crossing {
    let r = q1 - p1;
    let u = q2 - p2;
    let w = p2 - p1;
    let denom = cross2(r, u);
    let scale = (r.x.abs() + r.y.abs()) * (u.x.abs() + u.y.abs());
    if denom.abs() <= 1e-14 * scale {
        // parallel in projection; collinear overlap is non-generic
        if cross2(w, r).abs() <= 1e-14 * scale.max(1.0) {
            let rr = r.x * r.x + r.y * r.y;
            let t0 = (w.x * r.x + w.y * r.y) / rr;
            let t1 = t0 + (u.x * r.x + u.y * r.y) / rr;
            let (lo, hi) = (t0.min(t1), t0.max(t1));
            if hi >= -ENDPOINT_EPS && lo <= 1.0 + ENDPOINT_EPS {
                return Crossing::Degenerate;
            }
        }
        return Crossing::None;
    }
    let s = cross2(w, u) / denom;
    let t = cross2(w, r) / denom;
    let outside = |x: f64| !(-ENDPOINT_EPS..=1.0 + ENDPOINT_EPS).contains(&x);
    if outside(s) || outside(t) {
        return Crossing::None;
    }
    let near_end = |x: f64| !(ENDPOINT_EPS..=1.0 - ENDPOINT_EPS).contains(&x);
    if near_end(s) || near_end(t) {
        return Crossing::Degenerate;
    }
    Crossing::At(s, t)
}

fn edges(lp: &[Vec3]) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
    (0..lp.len()).map(move |i| (lp[i], lp[(i + 1) % lp.len()]))
}

/// Signed crossing sum between two loops under `rot`, or `None` if the
/// projection is not generic.
fn signed_crossings(c1: &[Vec3], c2: &[Vec3], rot: &Rotation) -> Option<(i64, usize)> {
    let a: Vec<Vec3> = c1.iter().map(|&v| rot.apply(v)).collect();
    let b: Vec<Vec3> = c2.iter().map(|&v| rot.apply(v)).collect();
    let mut sum = 0i64;
    let mut count = 0usize;
    for (p1, q1) in edges(&a) {
        for (p2, q2) in edges(&b) {
            match projected_crossing(p1, q1, p2, q2) {
                Crossing::None => {}
                Crossing::Degenerate => return None,
                Crossing::At(s, t) => {
                    let z1 = p1.z + (q1.z - p1.z) * s;
                    let z2 = p2.z + (q2.z - p2.z) * t;
                    if (z1 - z2).abs() < ENDPOINT_EPS {
                        return None;
                    }
                    let (over, under) = if z1 > z2 { (q1 - p1, q2 - p2) } else { (q2 - p2, q1 - p1) };
                    sum += if cross2(over, under) > 0.0 { 1 } else { -1 };
                    count += 1;
                }
            }
        }
    }
    Some((sum, count))
}

/// Gauss linking number of two disjoint closed loops.
///
/// Counted as half the signed crossing sum in a projection along z after a
/// seeded generic rotation; non-generic projections are retried with fresh
/// rotations.
pub fn linking_number(c1: &[Vec3], c2: &[Vec3]) -> Result<Linking> {
    if c1.len() < 3 || c2.len() < 3 {
        return Err(KnotError::Linking("loops need at least 3 vertices".into()));
    }
    let touching = edges(c1).any(|(p1, q1)| edges(c2).any(|(p2, q2)| segment_distance(p1, q1, p2, q2) <= 0.0));
    if touching {
        return Err(KnotError::Linking("loops touch".into()));
    }
    for attempt in 0..MAX_RETRIES {
        let rot = rotation_from_seed(0x6c69_6e6b ^ attempt);
        if let Some((sum, crossings)) = signed_crossings(c1, c2, &rot) {
            let half = sum as f64 / 2.0;
            let value = half.round() as i64;
            return Ok(Linking { value, residual: (half - value as f64).abs(), crossings, attempts: attempt + 1 });
        }
    }
    Err(KnotError::Linking(format!("no generic projection after {MAX_RETRIES} rotations")))
}

/// Number of self-crossings of a single loop in the projection along z
/// after `rot`, or `None` if that projection is not generic.
pub fn projected_crossings(lp: &[Vec3], rot: &Rotation) -> Option<usize> {
    let a: Vec<Vec3> = lp.iter().map(|&v| rot.apply(v)).collect();
    let n = a.len();
    let mut count = 0;
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            match projected_crossing(a[i], a[(i + 1) % n], a[j], a[(j + 1) % n]) {
                Crossing::None => {}
                Crossing::Degenerate => return None,
                Crossing::At(..) => count += 1,
            }
        }
    }
    Some(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, center: Vec3, radius: f64, plane: fn(f64, f64) -> Vec3) -> Vec<Vec3> {
        (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                center + plane(radius * t.cos(), radius * t.sin())
            })
            .collect()
    }

    #[test]
    fn coaxial_circles_unlinked() {
        let a = circle(32, Vec3::ZERO, 1.0, |u, v| Vec3::new(u, v, 0.));
        let b = circle(32, Vec3::new(0., 0., 0.5), 1.0, |u, v| Vec3::new(u, v, 0.));
        let lk = linking_number(&a, &b).unwrap();
        assert_eq!(lk.value, 0);
        assert!(lk.residual < 0.01);
    }

    #[test]
    fn hopf_link() {
        let a = circle(32, Vec3::ZERO, 1.0, |u, v| Vec3::new(u, v, 0.));
        let b = circle(32, Vec3::new(1., 0., 0.), 0.5, |u, v| Vec3::new(u, 0., v));
        let lk = linking_number(&a, &b).unwrap();
        assert_eq!(lk.value.abs(), 1);
        let back = linking_number(&b, &a).unwrap();
        assert_eq!(back.value, lk.value);
    }

    #[test]
    fn rotation_is_orthonormal() {
        for seed in 0..10 {
            let r = rotation_from_seed(seed);
            let (x, y) = (r.apply(Vec3::new(1., 0., 0.)), r.apply(Vec3::new(0., 1., 0.)));
            assert!((x.norm() - 1.0).abs() < 1e-12);
            assert!(x.dot(y).abs() < 1e-12);
            let z = r.apply(Vec3::new(0., 0., 1.));
            assert!((x.cross(y) - z).norm() < 1e-12);
        }
    }
}
