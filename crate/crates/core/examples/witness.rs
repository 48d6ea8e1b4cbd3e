//! The random n-facet polytopes inside the unit ball built from slabs
//! over well-separated small caps; their probability mass decays like
//! n^{-(d+1)/(d-1)} per facet.

use hypercell::approx::{feasible_rho_constant, witness_construction, WitnessOptions};
use hypercell::direction::DirectionalDistribution;
use hypercell::rng::{substream, tag};
use hypercell::stats::log_log_fit;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let phi = DirectionalDistribution::isotropic(2)?;
    let ns = [16, 32, 64];
    let base = WitnessOptions {
        cap_divisor: 3.0,
        ..Default::default()
    };
    let opts = WitnessOptions {
        rho_constant: Some(feasible_rho_constant(&phi, &ns, &base)?),
        ..base
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for n in ns {
        let w = witness_construction(&phi, n, &opts)?;
        let mut ok = 0;
        for i in 0..100 {
            let p = w.draw(&mut substream(0, tag("witness"), i))?;
            ok += (p.n_facets() == n && p.circumradius() < 1.0) as usize;
        }
        println!("n = {n}: {ok}/100 draws have n facets inside B(0,1); slab measure {:.3e}", w.set_measure());
        xs.push(n as f64);
        ys.push(w.set_measure());
    }
    println!("measure exponent {:.3} (expect -3)", log_log_fit(&xs, &ys).slope);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("witness example");
}
