use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::PolyKnot;
use crate::error::{KnotError, Result};
use crate::geometry::Vec3;

/// Parameters of a (p, q) torus knot or link.
///
/// `p` counts turns around the torus axis (longitude) and `q` turns around
/// the tube (meridian). `gcd(p, q)` components are produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusKnotSpec {
    pub p: u32,
    pub q: u32,
    /// Total vertex count over all components.
    pub n: usize,
    /// Major radius.
    pub major_radius: f64,
    /// Minor (tube) radius, `0 < r < R`.
    pub minor_radius: f64,
}

impl TorusKnotSpec {
    /// `R = 2`, `r = 1`.
    pub fn new(p: u32, q: u32, n: usize) -> Self {
        TorusKnotSpec { p, q, n, major_radius: 2.0, minor_radius: 1.0 }
    }

    pub fn components(&self) -> usize {
        gcd(self.p, self.q) as usize
    }

    fn check(&self) -> Result<()> {
        if self.p == 0 && self.q == 0 {
            return Err(KnotError::invalid("p and q are both zero"));
        }
        let min_n = 3 * self.p.max(self.q).max(1) as usize;
        if self.n < min_n {
            return Err(KnotError::invalid(format!(
                "n = {} is too small for a ({}, {}) torus curve (need at least {min_n})",
                self.n, self.p, self.q
            )));
        }
        let g = self.components();
        if !self.n.is_multiple_of(g) {
            return Err(KnotError::invalid(format!(
                "n = {} is not divisible by gcd({}, {}) = {g}",
                self.n, self.p, self.q
            )));
        }
        if !(self.major_radius > 0.0 && self.minor_radius > 0.0 && self.minor_radius < self.major_radius) {
            return Err(KnotError::invalid(format!(
                "torus radii R = {}, r = {} (need 0 < r < R)",
                self.major_radius, self.minor_radius
            )));
        }
        Ok(())
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Samples the (p, q) torus curve
/// `t -> ((R + r cos qt) cos pt, (R + r cos qt) sin pt, r sin qt)`.
///
/// With `g = gcd(p, q) > 1` the link has `g` components, each a
/// `(p/g, q/g)` curve with `n/g` vertices. Component `j` is the base curve
/// shifted along the longitude by `2 pi j / q` so that the components
/// partition the level set `q' phi - p' theta = 2 pi j / g`.
pub fn generate_torus(spec: &TorusKnotSpec) -> Result<PolyKnot> {
    spec.check()?;
    let g = spec.components();
    let (p, q) = ((spec.p as usize / g) as f64, (spec.q as usize / g) as f64);
    let per = spec.n / g;
    let (big_r, small_r) = (spec.major_radius, spec.minor_radius);

    let components: Vec<Vec<Vec3>> = (0..g)
        .map(|j| {
            // q' = 0 only happens with g = 1 (the (1, 0) circle).
            let shift = if q > 0.0 { TAU * j as f64 / (g as f64 * q) } else { 0.0 };
            (0..per)
                .map(|k| {
                    let t = TAU * k as f64 / per as f64;
                    let phi = p * t + shift;
                    let theta = q * t;
                    let rho = big_r + small_r * theta.cos();
                    Vec3::new(rho * phi.cos(), rho * phi.sin(), small_r * theta.sin())
                })
                .collect()
        })
        .collect();

    let mut knot = PolyKnot::from_components_unchecked(components, 1.0)?;
    let mean = knot.total_length() / knot.vertex_count() as f64;
    knot.set_rest_edge_length(mean);
    knot.validate()?;
    Ok(knot)
}
