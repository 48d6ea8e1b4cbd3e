//! Given f = n, the Φ-content of a planar typical cell is Gamma(n - 2, γ)
//! and independent of its shape.

use hypercell::cellstats::{gamma_fit_test, independence_test, IndependenceOptions};
use hypercell::direction::DirectionalDistribution;
use hypercell::process::{planar_arrangement_cells, ArrangementOptions, ProcessConfig};
use hypercell::rng::{substream, tag};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(2)?, 3)?;
    let mut cells = Vec::new();
    let mut i = 0;
    while cells.len() < 5000 {
        cells.extend(planar_arrangement_cells(ArrangementOptions::default(), &cfg, &mut substream(3, tag("cells"), i))?);
        i += 1;
    }
    for n in 3..=5 {
        println!("{}", gamma_fit_test(&cells, n, 1.0)?);
    }
    let opts = IndependenceOptions {
        permutations: 500,
        ..Default::default()
    };
    let t = independence_test(&cells, 4, |c| c.isoperimetric_ratio(1, 2), opts)?;
    println!("Φ vs (1,2) ratio given f = 4: {t}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("complementary test example");
}
