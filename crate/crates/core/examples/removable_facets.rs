//! Facets whose removal moves a cell little in both Hausdorff distance and
//! Φ-content, and the normal-cone identity behind their count.

use hypercell::approx::{
    cone_measures, fit_removable_constants, normalized_removal_costs, removable_from_costs, removal_profile,
};
use hypercell::direction::DirectionalDistribution;
use hypercell::process::{zero_cell_with, ProcessConfig, ZeroCellOptions};
use hypercell::rng::{substream, tag};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let iso = DirectionalDistribution::isotropic(2)?;
    let cfg = ProcessConfig::new(1.0, iso.clone(), 5)?;
    // conditioning on a large empty disc gives many-sided zero cells
    let opts = ZeroCellOptions {
        min_offset: 320.0,
        ..Default::default()
    };
    let mut costs = Vec::new();
    let mut cells = Vec::new();
    let mut i = 0;
    while cells.len() < 40 {
        let c = zero_cell_with(&cfg, opts, &mut substream(5, tag("large"), i))?;
        i += 1;
        if c.f >= 16 {
            let prof = removal_profile(&c.polytope, &iso)?;
            costs.push(normalized_removal_costs(&c.polytope, &prof, c.phi_content));
            cells.push(c);
        }
    }
    let (a, b) = fit_removable_constants(&costs[..20]);
    println!("constants from 20 cells: α_dH = {a:.3}, α_Φ = {b:.3}");
    for (c, k) in cells[20..25].iter().zip(&costs[20..25]) {
        println!("  n = {}: |J| = {}", c.f, removable_from_costs(k, a, b).len());
    }

    let m = cone_measures(&cells[0].polytope, &iso, 20_000, &mut substream(5, tag("cones"), 0))?;
    println!(
        "Σ φ(N(v)) = {:.4}, Σ φ(U_j) = {:.4} ± {:.4} (d = 2)",
        m.vertex_sum.value, m.facet_sum.value, m.facet_sum.stderr
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("removable facets example");
}
