//! The force law: pairwise `r^-d` repulsion between all vertices, Hooke
//! springs along the edges, and the Simon energy used as the displayed
//! energy.
//!
//! The pair potential for exponent `d` is `r^-(d-1) / (d-1)` so that the
//! force magnitude is exactly `r^-d`; at `d = 2` it coincides with the
//! Simon energy. All sums run in a fixed order, so repeated evaluation on
//! the same input is bit-identical.

use serde::{Deserialize, Serialize};

use crate::error::{KnotError, Result};
use crate::geometry::Vec3;
use crate::knot::PolyKnot;

pub const MIN_EXPONENT: f64 = 2.0;
pub const MAX_EXPONENT: f64 = 6.0;

/// Force exponent and strengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceField {
    exponent: f64,
    repulsion_strength: f64,
    spring_constant: f64,
}

impl Default for ForceField {
    fn default() -> Self {
        ForceField { exponent: 2.0, repulsion_strength: 1.0, spring_constant: 50.0 }
    }
}

impl ForceField {
    pub fn new(exponent: f64, repulsion_strength: f64, spring_constant: f64) -> Result<Self> {
        check_exponent(exponent)?;
        if !(repulsion_strength.is_finite() && repulsion_strength > 0.0) {
            return Err(KnotError::invalid(format!("repulsion strength {repulsion_strength}")));
        }
        if !(spring_constant.is_finite() && spring_constant > 0.0) {
            return Err(KnotError::invalid(format!("spring constant {spring_constant}")));
        }
        Ok(ForceField { exponent, repulsion_strength, spring_constant })
    }

    /// Default strengths with force exponent `d`.
    pub fn with_exponent(d: f64) -> Result<Self> {
        ForceField::default().set_exponent(d)
    }

    pub fn set_exponent(mut self, d: f64) -> Result<Self> {
        check_exponent(d)?;
        self.exponent = d;
        Ok(self)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn repulsion_strength(&self) -> f64 {
        self.repulsion_strength
    }

    pub fn spring_constant(&self) -> f64 {
        self.spring_constant
    }
}

pub fn check_exponent(d: f64) -> Result<()> {
    if (MIN_EXPONENT..=MAX_EXPONENT).contains(&d) {
        Ok(())
    } else {
        Err(KnotError::invalid(format!("force exponent {d} outside [{MIN_EXPONENT}, {MAX_EXPONENT}]")))
    }
}

/// Energies and clearance of one configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub simon_energy: f64,
    /// Pair potential for the active exponent.
    pub potential_energy_d: f64,
    pub spring_energy: f64,
    /// Minimum distance between non-adjacent edges.
    pub min_clearance: f64,
}

/// `r^-(d+1)` from the squared distance.
#[inline]
fn inv_pow(r2: f64, d: f64) -> f64 {
    if d == 2.0 {
        1.0 / (r2 * r2.sqrt())
    } else if d == 3.0 {
        1.0 / (r2 * r2)
    } else if d == 6.0 {
        let r = r2.sqrt();
        let r7 = r2 * r2 * r2 * r;
        1.0 / r7
    } else {
        r2.powf(-0.5 * (d + 1.0))
    }
}

/// Sum of `1/|v_i - v_j|` over all unordered vertex pairs, across all
/// components, adjacent pairs included.
pub fn simon_energy(knot: &PolyKnot) -> Result<f64> {
    let v = knot.vertices();
    let mut e = 0.0;
    for i in 0..v.len() {
        let vi = v[i];
        for &vj in &v[i + 1..] {
            let r = vi.distance(vj);
            if r == 0.0 {
                return Err(KnotError::CoincidentVertices);
            }
            e += 1.0 / r;
        }
    }
    Ok(e)
}

/// Pair potential `strength * sum r^-(d-1) / (d-1)`.
pub fn repulsion_potential(knot: &PolyKnot, ff: &ForceField) -> Result<f64> {
    let d = ff.exponent;
    if d == 2.0 {
        return Ok(ff.repulsion_strength * simon_energy(knot)?);
    }
    let v = knot.vertices();
    let mut e = 0.0;
    for i in 0..v.len() {
        for &vj in &v[i + 1..] {
            let r2 = (v[i] - vj).norm2();
            if r2 == 0.0 {
                return Err(KnotError::CoincidentVertices);
            }
            e += r2.powf(-0.5 * (d - 1.0));
        }
    }
    Ok(ff.repulsion_strength * e / (d - 1.0))
}

/// Repulsive force on every vertex: `strength * sum_j (v_i - v_j) / r^(d+1)`.
pub fn repulsive_forces(knot: &PolyKnot, ff: &ForceField) -> Result<Vec<Vec3>> {
    let v = knot.vertices();
    let mut f = vec![Vec3::ZERO; v.len()];
    let d = ff.exponent;
    for i in 0..v.len() {
        let vi = v[i];
        let mut fi = Vec3::ZERO;
        for j in i + 1..v.len() {
            let diff = vi - v[j];
            let r2 = diff.norm2();
            if r2 == 0.0 {
                return Err(KnotError::CoincidentVertices);
            }
            let push = diff * inv_pow(r2, d);
            fi += push;
            f[j] -= push;
        }
        f[i] += fi;
    }
    let s = ff.repulsion_strength;
    if s != 1.0 {
        f.iter_mut().for_each(|x| *x = *x * s);
    }
    Ok(f)
}

/// `sum over edges of k/2 (l - rest)^2`.
pub fn spring_energy(knot: &PolyKnot, ff: &ForceField) -> f64 {
    let rest = knot.rest_edge_length();
    knot.edge_lengths().iter().map(|&l| 0.5 * ff.spring_constant * (l - rest) * (l - rest)).sum()
}

/// Two-sided Hooke forces: stretched edges pull their ends together,
/// compressed edges push them apart.
pub fn spring_forces(knot: &PolyKnot, ff: &ForceField) -> Vec<Vec3> {
    let v = knot.vertices();
    let rest = knot.rest_edge_length();
    let mut f = vec![Vec3::ZERO; v.len()];
    for (i, j) in knot.edge_indices() {
        let diff = v[j] - v[i];
        let len = diff.norm();
        let pull = diff * (ff.spring_constant * (len - rest) / len);
        f[i] += pull;
        f[j] -= pull;
    }
    f
}

/// Repulsive plus spring forces.
pub fn total_forces(knot: &PolyKnot, ff: &ForceField) -> Result<Vec<Vec3>> {
    let mut f = repulsive_forces(knot, ff)?;
    for (a, b) in f.iter_mut().zip(spring_forces(knot, ff)) {
        *a += b;
    }
    Ok(f)
}

pub fn energy_report(knot: &PolyKnot, ff: &ForceField) -> Result<EnergyReport> {
    Ok(EnergyReport {
        simon_energy: simon_energy(knot)?,
        potential_energy_d: repulsion_potential(knot, ff)?,
        spring_energy: spring_energy(knot, ff),
        min_clearance: knot.clearance(1).distance,
    })
}
