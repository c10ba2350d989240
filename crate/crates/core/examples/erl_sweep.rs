//! Electrical ropelength of the trefoil across force exponents, as CSV.

use knot_descent::experiments::{run_erl_sweep, write_erl_csv};
use knot_descent::prelude::*;

fn main() -> Result<()> {
    let params = SimParams { dt: 0.04, ..SimParams::default() };
    let rows = run_erl_sweep(&TorusKnotSpec::new(2, 3, 48), &[2.0, 3.5, 6.0], params)?;
    write_erl_csv(&rows, std::io::stdout())
}
