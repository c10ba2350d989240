//! Linking numbers of two-component torus links.

use knot_descent::prelude::*;

fn main() -> Result<()> {
    for (p, q) in [(2, 2), (4, 2), (2, 4), (6, 2)] {
        let link = generate_torus(&TorusKnotSpec::new(p, q, 60))?;
        let lk = linking_number(link.component(0), link.component(1))?;
        println!("({p},{q}) link: linking number {}", lk.value);
    }
    Ok(())
}
