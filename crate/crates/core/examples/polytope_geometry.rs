//! Halfspace intersection, intrinsic volumes and Hausdorff distance on a
//! cube with one corner cut off.

use hypercell::geom::{
    cent, from_slice, hausdorff_nested, intersect_halfspaces, intrinsic_volumes, isoperimetric_ratio, CenterKind,
    Halfspace, Polytope, Side, VolumeMode,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cube = Polytope::cube(3, 2.0);
    let mut hs = cube.halfspaces().to_vec();
    // x + y + z <= 2 removes the corner at (1, 1, 1)
    hs.push(Halfspace::new(from_slice(&[1.0, 1.0, 1.0]).normalize(), 2.0 / 3f64.sqrt(), Side::Origin)?);
    hs.push(hs[0].clone());
    let cut = intersect_halfspaces(&hs)?;
    println!(
        "cut cube: {} facets, {} vertices, {} redundant input halfspaces",
        cut.polytope.n_facets(),
        cut.polytope.vertices().len(),
        cut.redundant.len()
    );

    let iv = intrinsic_volumes(&cut.polytope, VolumeMode::Exact)?;
    println!("V_0..V_3 = {:?}", (0..=3).map(|j| iv.get(j)).collect::<Vec<_>>());
    println!("volume {:.6} (expect 8 - 1/6)", iv.volume());
    println!("(1,2) ratio {:.4}", isoperimetric_ratio(&cut.polytope, 1, 2)?);

    let c = cent(&cut.polytope, CenterKind::Centroid)?;
    let s = cent(&cut.polytope, CenterKind::Steiner)?;
    println!("centroid {:.4?}\nSteiner point {:.4?}", c.as_slice(), s.as_slice());

    let dh = hausdorff_nested(&cut.polytope, &cube)?;
    println!("d_H(cube, cut) = {dh:.6} (expect 1/sqrt(3) = {:.6})", 1.0 / 3f64.sqrt());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("polytope geometry example");
}
