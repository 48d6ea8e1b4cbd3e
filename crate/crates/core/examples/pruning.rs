//! Facet pruning with certified Hausdorff distance, and circumscribed
//! approximation by a few facet directions.

use hypercell::approx::{circumscribe, prune_path, prune_to_subset, tangent_polytope};
use hypercell::direction::DirectionalDistribution;
use hypercell::geom::Polytope;
use hypercell::rng::{substream, tag};
use hypercell::stats::log_log_fit;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let iso2 = DirectionalDistribution::isotropic(2)?;
    let (mut ks, mut dhs) = (Vec::new(), Vec::new());
    for n in [16, 32, 64] {
        let r = prune_to_subset(&Polytope::regular_polygon(n, 1.0), n / 2, &iso2)?;
        let exact = 1.0 / (2.0 * std::f64::consts::PI / n as f64).cos() - 1.0;
        println!("{n}-gon -> {} facets: d_H {:.3e} (closed form {exact:.3e})", n / 2, r.dh);
        ks.push((n / 2) as f64);
        dhs.push(r.dh);
    }
    println!("polygon slope {:.3}", log_log_fit(&ks, &dhs).slope);

    let iso3 = DirectionalDistribution::isotropic(3)?;
    let p = tangent_polytope(&[1.0, 1.0, 1.0], 94, &mut substream(1, tag("pruning"), 0))?;
    for r in prune_path(&p, &[40, 20, 10], &iso3)? {
        println!("100 facets -> {}: d_H {:.4}", r.kept.len(), r.dh);
    }

    let c = circumscribe(&p, 12)?;
    println!("circumscribed with 12 of {} directions: d_H {:.4}", p.n_facets(), c.dh);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("pruning example");
}
