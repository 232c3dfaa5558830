//! Writes `fixtures/abelian_benchmark.bin`: `A = sin(2πx₂)·X dx¹` on T², N = 64,
//! su(2), with `X` the unit abelian generator.

use std::f64::consts::PI;
use std::path::Path;

use gaugeflow::liealg::abelian_generator;
use gaugeflow::{snapshot, FormField, GridSpec};

fn main() -> gaugeflow::Result<()> {
    let grid = GridSpec::new(2, 64, 2, 2)?;
    let x = abelian_generator(2);
    let a = FormField::from_fn(grid, 1, |p, c, out| {
        if c == 0 {
            let s = (2.0 * PI * p[1]).sin();
            for (o, e) in out.iter_mut().zip(x.entries()) {
                *o = e * s;
            }
        }
    })?;
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/abelian_benchmark.bin");
    std::fs::create_dir_all(path.parent().expect("has parent"))?;
    snapshot::write_form(&path, &a)?;
    println!("wrote {}", path.display());
    Ok(())
}
