//! Tube thickness and ropelength of a specific polygonal configuration,
//! and the electrical ropelength: the ropelength of the configuration the
//! self-repelling process settles into at a given force exponent.

use serde::{Deserialize, Serialize};

use crate::dynamics::{SimParams, SimState};
use crate::energy::check_exponent;
use crate::error::{KnotError, Result};
use crate::experiments::{run_schedule, Schedule};
use crate::geometry::{circumradius, closest_parameters, Vec3};
use crate::knot::{generate_torus, PolyKnot, TorusKnotSpec};
use crate::trace::EnergyTrace;

const ENDPOINT_EPS: f64 = 1e-12;

/// Edge pairs within this many steps of each other along a loop are left
/// out of the self-distance bound.
pub const DEFAULT_SKIP: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    SelfDistance,
    Curvature,
}

impl std::fmt::Display for Binding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Binding::SelfDistance => "self_distance",
            Binding::Curvature => "curvature",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    pub tube_radius: f64,
    pub binding_constraint: Binding,
    pub total_length: f64,
    pub ropelength: f64,
    pub skip: usize,
}

/// Half the smallest doubly-critical self-distance and the smallest
/// circumradius of consecutive vertex triples.
pub fn radius_bounds(knot: &PolyKnot, skip: usize) -> Result<(f64, f64)> {
    let r_dist = 0.5 * doubly_critical_distance(knot, skip);
    let mut r_curv = f64::INFINITY;
    for comp in knot.components() {
        let n = comp.len();
        for i in 0..n {
            let r = circumradius(comp[(i + n - 1) % n], comp[i], comp[(i + 1) % n])?;
            r_curv = r_curv.min(r);
        }
    }
    Ok((r_dist, r_curv))
}

/// Smallest distance between two points of the polygon that are each a
/// critical point of the distance to the other, over edge pairs more than
/// `skip` apart along a loop (all inter-component pairs count).
///
/// Only closest-point pairs of edge pairs are examined. A closest point in
/// an edge's interior is perpendicular to the connecting chord; one that
/// lands on a vertex must also be critical with respect to the neighbouring
/// edge, i.e. both incident edges leave the vertex on the same side of the
/// plane normal to the chord. Nearby stretches of a smooth arc fail this
/// test, so they do not pinch the tube. Returns infinity when no pair
/// qualifies.
pub fn doubly_critical_distance(knot: &PolyKnot, skip: usize) -> f64 {
    let v = knot.vertices();
    let edges = knot.edge_indices();
    let prev_of = |i: usize| {
        let r = knot.component_range(knot.component_of(i));
        if i == r.start {
            r.end - 1
        } else {
            i - 1
        }
    };
    // Critical test for the polygon point at parameter `s` on edge (a, b)
    // with respect to the point `q`.
    let critical = |a: usize, b: usize, s: f64, q: Vec3| -> bool {
        let vertex = if s <= ENDPOINT_EPS {
            a
        } else if s >= 1.0 - ENDPOINT_EPS {
            b
        } else {
            return true;
        };
        let x = v[vertex];
        let u = x - q;
        let back = (v[prev_of(vertex)] - x).dot(u);
        let fwd = (v[knot.next(vertex)] - x).dot(u);
        back * fwd >= 0.0
    };

    let mut best = f64::INFINITY;
    for (e1, &(a1, b1)) in edges.iter().enumerate() {
        for (e2, &(a2, b2)) in edges.iter().enumerate().skip(e1 + 1) {
            if let Some(sep) = knot.edge_separation(e1, e2) {
                if sep <= skip {
                    continue;
                }
            }
            let (s, t) = closest_parameters(v[a1], v[b1], v[a2], v[b2]);
            let p = v[a1] + (v[b1] - v[a1]) * s;
            let q = v[a2] + (v[b2] - v[a2]) * t;
            let d = p.distance(q);
            if d < best && critical(a1, b1, s, q) && critical(a2, b2, t, p) {
                best = d;
            }
        }
    }
    best
}

/// Grows the tube radius until the tube touches itself.
pub fn thickness(knot: &PolyKnot, skip: usize) -> Result<ThicknessReport> {
    let (r_dist, r_curv) = radius_bounds(knot, skip)?;
    let (tube_radius, binding_constraint) =
        if r_dist <= r_curv { (r_dist, Binding::SelfDistance) } else { (r_curv, Binding::Curvature) };
    if !(tube_radius.is_finite() && tube_radius > 0.0) {
        return Err(KnotError::invalid(format!("tube radius {tube_radius}")));
    }
    let total_length = knot.total_length();
    Ok(ThicknessReport { tube_radius, binding_constraint, total_length, ropelength: total_length / tube_radius, skip })
}

/// Outcome of an electrical ropelength run.
#[derive(Clone, Debug)]
pub struct ElectricalRopelength {
    pub exponent: f64,
    pub report: ThicknessReport,
    pub state: SimState,
    pub trace: EnergyTrace,
}

/// Starts from the torus curve `spec`, runs `schedule` at force exponent
/// `d` and measures the thickness of the configuration it stabilizes at.
/// With `schedule = None` the default is a single damped evolution.
pub fn electrical_ropelength(
    spec: &TorusKnotSpec,
    d: f64,
    schedule: Option<&Schedule>,
    params: SimParams,
) -> Result<ElectricalRopelength> {
    check_exponent(d)?;
    let knot = generate_torus(spec)?;
    let mut params = params;
    params.force_field = params.force_field.set_exponent(d)?;
    let mut state = SimState::new(knot, params)?;
    let default = Schedule::damped_descent(DEFAULT_ERL_STEPS);
    let schedule = schedule.unwrap_or(&default);
    let run = run_schedule(&mut state, schedule)?;
    if !run.converged() {
        return Err(KnotError::NotConverged { steps: state.step_index() });
    }
    let report = thickness(state.knot(), DEFAULT_SKIP)?;
    Ok(ElectricalRopelength { exponent: d, report, state, trace: run.trace })
}

/// Step budget of the default electrical-ropelength schedule.
pub const DEFAULT_ERL_STEPS: u64 = 4_000_000;

#[cfg(test)]
mod tests {
    use super::*;

    fn ngon(n: usize, radius: f64, z: f64) -> Vec<Vec3> {
        (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                Vec3::new(radius * t.cos(), radius * t.sin(), z)
            })
            .collect()
    }

    #[test]
    fn round_unknot_is_two_pi() {
        let k = PolyKnot::new(vec![ngon(256, 1.0, 0.0)], 1.0).unwrap();
        let t = thickness(&k, DEFAULT_SKIP).unwrap();
        assert!((t.tube_radius - 1.0).abs() < 0.01);
        assert!((t.ropelength - std::f64::consts::TAU).abs() < 0.01 * std::f64::consts::TAU);
        // antipodal edges sit at twice the apothem, just inside the circumradius
        assert_eq!(t.binding_constraint, Binding::SelfDistance);
        let (r_dist, r_curv) = radius_bounds(&k, DEFAULT_SKIP).unwrap();
        assert!((r_dist - (std::f64::consts::PI / 256.0).cos()).abs() < 1e-12);
        assert!((r_curv - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coaxial_circles_bind_on_distance() {
        let k = PolyKnot::new(vec![ngon(256, 1.0, 0.0), ngon(256, 1.0, 0.4)], 1.0).unwrap();
        let t = thickness(&k, DEFAULT_SKIP).unwrap();
        assert_eq!(t.binding_constraint, Binding::SelfDistance);
        assert!((t.tube_radius - 0.2).abs() < 1e-9);
    }

    #[test]
    fn scale_invariant() {
        let k = generate_torus(&TorusKnotSpec::new(2, 3, 80)).unwrap();
        let base = thickness(&k, DEFAULT_SKIP).unwrap().ropelength;
        for s in [0.5, 2.0, 10.0] {
            let r = thickness(&k.scaled(s), DEFAULT_SKIP).unwrap().ropelength;
            assert!((r - base).abs() < 1e-9 * base);
        }
    }
}
