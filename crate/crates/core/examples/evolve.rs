//! Damped descent of the (3,2) trefoil start, then a kick and an undamped
//! phase that lets it escape to the lower minimum.

use knot_descent::experiments::{evolve, snapshot, Phase, Stability};
use knot_descent::prelude::*;

fn main() -> Result<()> {
    let params = SimParams {
        force_field: ForceField::with_exponent(6.0)?,
        dt: 0.04,
        ..SimParams::default()
    };
    let mut state = SimState::new(generate_torus(&TorusKnotSpec::new(3, 2, 48))?, params)?;
    let schedule = Schedule::new(vec![
        evolve(Mode::Damped, 2_000_000),
        snapshot("local"),
        Phase::Perturb { magnitude: 0.1, seed: 1 },
        Phase::Evolve {
            mode: Mode::Undamped,
            max_steps: 2_000_000,
            stability: Some(Stability { window: 200, epsilon: 1e-8 }),
        },
        snapshot("escaped"),
    ])?;
    let run = run_schedule(&mut state, &schedule)?;
    for (mode, reason, steps) in &run.stops {
        println!("{mode:?} phase ended at step {steps}: {reason}");
    }
    for s in &run.snapshots {
        println!("{}: simon energy {:.6}", s.label, s.energy.simon_energy);
    }
    Ok(())
}
