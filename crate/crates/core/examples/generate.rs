//! Torus knot and link starts, written in both file formats.

use knot_descent::prelude::*;

fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("knot-descent-generate");
    std::fs::create_dir_all(&dir)?;
    for (p, q) in [(2, 3), (3, 2), (4, 2), (3, 4)] {
        let knot = generate_torus(&TorusKnotSpec::new(p, q, 84))?;
        let path = dir.join(format!("t{p}{q}.json"));
        save_knot(&knot, &path, KnotFormat::Structured)?;
        save_knot(&knot, path.with_extension("knot"), KnotFormat::Plain)?;
        println!(
            "({p},{q}): {} components, length {:.4}, simon energy {:.4} -> {}",
            knot.num_components(),
            knot.total_length(),
            simon_energy(&knot)?,
            path.display()
        );
    }
    Ok(())
}
