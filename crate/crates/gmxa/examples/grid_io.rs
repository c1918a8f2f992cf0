//! GMXA1 binary grids and CSV import.
//!
//! ```bash
//! cargo run --example grid_io
//! ```

use gmxa::gridops::{GridFunction, MAGIC};

fn main() -> gmxa::Result<()> {
    let g = GridFunction::from_fn(vec![4, 6], vec![-1.0, 0.5], 0.25, |x| (3.0 * x[0]).sin() + x[1] * x[1])?;
    let dir = std::path::Path::new("target/examples-out");
    std::fs::create_dir_all(dir).map_err(|e| gmxa::Error::io(dir, e))?;
    let path = dir.join("grid.gmxa");
    g.save(&path)?;
    let back = GridFunction::load(&path)?;
    println!("{}: {} bytes, magic {:?}, bit-exact: {}", path.display(), g.to_bytes().len(), std::str::from_utf8(MAGIC).unwrap(), back == g);
    let csv = "0,0,1.5\n3,5,-2\n1,2,0.25\n";
    let c = GridFunction::from_csv(csv, vec![4, 6], vec![0.0, 0.0], 1.0)?;
    println!("CSV import: integral {}, value at (3,5) {}", c.integral(), c.values[c.flat_index(&[3, 5])]);
    match GridFunction::from_bytes(&g.to_bytes()[..20]) {
        Ok(_) => println!("truncated file accepted"),
        Err(e) => println!("truncated file: {e}"),
    }
    Ok(())
}
