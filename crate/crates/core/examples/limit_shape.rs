//! For axis-parallel lines every cell is a rectangle, and the shape law
//! given Φ > a settles on the shape law given f = 4.

use hypercell::analytics::{limit_shape_test, LimitShapeOptions};
use hypercell::direction::DirectionalDistribution;
use hypercell::geom::from_slice;
use hypercell::process::{planar_arrangement_cells, ArrangementOptions, ProcessConfig};
use hypercell::rng::{substream, tag};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let axes = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]].iter().map(|u| from_slice(u)).collect();
    let phi = DirectionalDistribution::discrete(axes, None)?;
    let cfg = ProcessConfig::new(1.0, phi.clone(), 4)?;
    let opts = ArrangementOptions {
        window_side: 60.0,
        margin: 0.2,
    };
    let mut cells = Vec::new();
    for i in 0..40 {
        cells.extend(planar_arrangement_cells(opts, &cfg, &mut substream(4, tag("rect"), i))?);
    }
    let curve = limit_shape_test(
        &cells,
        phi.n_max()?,
        &[0.5, 1.0, 2.0, 3.0],
        |c| c.isoperimetric_ratio(1, 2),
        LimitShapeOptions::default(),
    )?;
    print!("{}", curve.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("limit shape example");
}
