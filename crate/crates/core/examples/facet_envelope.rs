//! Facet-count frequencies of planar typical cells, the envelope
//! n^2 q_n^{1/n} and the ratio q_n / (q_{n-1} n^{-2}).

use hypercell::analytics::{envelope_fit, recurrence_check};
use hypercell::cellstats::HistogramBuilder;
use hypercell::direction::DirectionalDistribution;
use hypercell::process::{planar_arrangement_cells, ArrangementOptions, ProcessConfig};
use hypercell::rng::{substream, tag};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let phi = DirectionalDistribution::isotropic(2)?;
    let cfg = ProcessConfig::new(1.0, phi.clone(), 2)?;
    // facet counts only need unbiased frequencies, so a large window is fine
    let opts = ArrangementOptions {
        window_side: 100.0,
        margin: 0.2,
    };
    let mut b = HistogramBuilder::new(false, 2);
    for i in 0..150 {
        for c in planar_arrangement_cells(opts, &cfg, &mut substream(2, tag("envelope"), i))? {
            b.push(c.f, c.weight, c.sampler);
        }
    }
    let h = b.finish()?;
    let fit = envelope_fit(&h, 2, &[4, 5, 6, 7, 8])?;
    print!("{}", fit.to_csv());
    println!("band [{:.3}, {:.3}]", fit.c_lower, fit.c_upper);
    let rec = recurrence_check(&h, 2, phi.c_phi_lower_bound(4096));
    for (n, r, se) in rec.ratios {
        println!("ρ_{n} = {r:.3} ± {se:.3}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("facet envelope example");
}
