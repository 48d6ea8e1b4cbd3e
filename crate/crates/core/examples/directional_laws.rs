//! The three directional distributions, their Φ-content and the constants
//! derived from them.

use hypercell::direction::{DirectionalDistribution, PhiSpec};
use hypercell::geom::{from_slice, Polytope};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let square = Polytope::cube(2, 2.0);

    let iso = DirectionalDistribution::isotropic(2)?;
    // half the mean width of the square: perimeter / (2 pi)
    println!("isotropic Φ(square) = {:.6} (expect {:.6})", iso.content(&square).value, 8.0 / (2.0 * std::f64::consts::PI));

    let axes = vec![from_slice(&[1.0, 0.0]), from_slice(&[0.0, 1.0]), from_slice(&[-1.0, 0.0]), from_slice(&[0.0, -1.0])];
    let disc = DirectionalDistribution::discrete(axes, None)?;
    println!("axis-parallel Φ(square) = {}", disc.content_exact(&square)?);
    println!("n_max = {}, c_Φ >= {:.4}", disc.n_max()?, disc.c_phi_lower_bound(4096));

    let cap = DirectionalDistribution::cap_mixture(from_slice(&[0.0, 1.0]), 0.4, 0.3, iso.clone())?;
    let w = cap.well_spread_witness().expect("mixtures are well spread");
    println!("cap mixture: well-spread cap of radius {:.3}, c5 = {:.3}", w.r, w.c5);

    let spec: PhiSpec = serde_json::from_str(r#"{"variant":"discrete","directions":[[1,0],[0,1],[-1,0],[0,-1]]}"#)?;
    println!("from JSON: {:?}", spec.build(2)?.atoms().map(|(a, _)| a.len()));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("directional laws example");
}
