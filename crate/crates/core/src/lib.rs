//! Self-repelling polygonal knots and links.
//!
//! The crate models a knot as a closed chain of vertices that repel each
//! other with an `r^-d` force and are held together by Hooke springs. It
//! provides:
//!
//! * torus knot and link starting configurations ([`knot`]),
//! * the Simon energy and the force law ([`energy`]),
//! * damped and undamped evolution that never lets edges pass through each
//!   other, plus seeded perturbation ([`dynamics`]),
//! * tube thickness, ropelength and electrical ropelength ([`ropelength`]),
//! * scripted experiments comparing local and global energy minima
//!   ([`experiments`]),
//! * a local steering service for live sessions ([`service`]),
//! * the command-line front end ([`cli`]).
//!
//! ```no_run
//! use knot_descent::prelude::*;
//!
//! let knot = generate_torus(&TorusKnotSpec::new(2, 3, 80))?;
//! let mut state = SimState::new(knot, SimParams::default())?;
//! let (trace, reason) = state.evolve_until_stable(200_000)?;
//! println!("{reason}: E = {}", trace.last().unwrap().simon_energy);
//! # Ok::<(), knot_descent::KnotError>(())
//! ```

pub mod cli;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod format;
pub mod geometry;
pub mod knot;
pub mod ropelength;
pub mod service;
pub mod trace;

pub use error::{KnotError, Result};

pub mod prelude {
    pub use crate::dynamics::{min_clearance, Mode, SimParams, SimState, StopReason};
    pub use crate::energy::{simon_energy, ForceField};
    pub use crate::error::{KnotError, Result};
    pub use crate::experiments::{run_schedule, Phase, Schedule};
    pub use crate::geometry::Vec3;
    pub use crate::knot::{generate_torus, linking_number, load_knot, save_knot, KnotFormat, PolyKnot, TorusKnotSpec};
    pub use crate::ropelength::{electrical_ropelength, thickness};
    pub use crate::trace::EnergyTrace;
}
