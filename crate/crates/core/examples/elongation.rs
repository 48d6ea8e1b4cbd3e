//! Elongated cells in d = 4: how often the (1,2) ratio is small given a
//! large Φ, and pruning a flat polytope against its elongation rate.

use hypercell::analytics::{elongation_conditional, Conditioning};
use hypercell::approx::{elongated_prune, tangent_polytope};
use hypercell::direction::DirectionalDistribution;
use hypercell::geom::ball_isoperimetric_ratio;
use hypercell::process::{zero_cell, ProcessConfig};
use hypercell::rng::{substream, tag};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let phi = DirectionalDistribution::isotropic(4)?;
    let cfg = ProcessConfig::new(1.0, phi.clone(), 8)?;
    let cells: Vec<_> = (0..300)
        .map(|i| zero_cell(&cfg, &mut substream(8, tag("d4"), i)))
        .collect::<Result<_, _>>()?;
    println!("ball (1,2) ratio in R^4: {:.3}", ball_isoperimetric_ratio(4, 1, 2));
    let mut phis: Vec<f64> = cells.iter().map(|c| c.phi_content).collect();
    phis.sort_by(f64::total_cmp);
    // condition on Φ above its 0th, 50th and 80th percentiles
    for a in [0.0, phis[150], phis[240]] {
        let p = elongation_conditional(&cells, 0.55, 1, 2, Conditioning::ByPhi(a))?;
        println!("P(ratio < 0.55 | Φ > {a:.2}) = {:.3} [{:.3}, {:.3}]", p.p, p.lo, p.hi);
    }

    let flat = tangent_polytope(&[1.0, 1.0, 0.05, 0.05], 60, &mut substream(8, tag("flat"), 0))?;
    let e = elongated_prune(&flat, 0.6, 1, 2, 20, &phi)?;
    println!("flat body ratio {:.3}: pruned to 20 facets, d_H {:.4}, rate {:.4}", e.ratio, e.result.dh, e.rate);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("elongation example");
}
