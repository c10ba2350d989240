//! Thickness and ropelength of a round loop and of a torus knot curve.

use std::f64::consts::TAU;

use knot_descent::prelude::*;
use knot_descent::ropelength::DEFAULT_SKIP;

fn main() -> Result<()> {
    let circle: Vec<Vec3> = (0..256)
        .map(|k| TAU * k as f64 / 256.0)
        .map(|t| Vec3::new(t.cos(), t.sin(), 0.0))
        .collect();
    let round = PolyKnot::new(vec![circle], 1.0)?;
    let trefoil = generate_torus(&TorusKnotSpec::new(2, 3, 80))?;
    for (name, knot) in [("256-gon", &round), ("(2,3) torus curve", &trefoil)] {
        let t = thickness(knot, DEFAULT_SKIP)?;
        println!(
            "{name}: tube radius {:.5} ({}), length {:.4}, ropelength {:.4}",
            t.tube_radius, t.binding_constraint, t.total_length, t.ropelength
        );
    }
    Ok(())
}
