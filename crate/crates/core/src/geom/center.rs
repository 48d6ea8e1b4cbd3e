//! Translation-covariant centers and normalized shapes.

use serde::{Deserialize, Serialize};

use super::faces::external_angle;
use super::measure::volume_and_centroid;
use super::{GeomError, Polytope, Vector};
use crate::direction::{uniform_direction, DirectionalDistribution};
use crate::rng;

/// Directions used for the Steiner point when `d >= 4`.
const STEINER_MC_DIRECTIONS: usize = 20_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterKind {
    #[default]
    Centroid,
    Steiner,
}

/// Center of `p`. The Steiner point is `sum_v gamma(v) v` with `gamma` the
/// external angle at vertex `v`; closed form up to `d = 3`, a fixed-seed
/// estimate beyond that.
pub fn cent(p: &Polytope, kind: CenterKind) -> Result<Vector, GeomError> {
    match kind {
        CenterKind::Centroid => Ok(volume_and_centroid(p).1),
        CenterKind::Steiner if p.dim() <= 3 => {
            let mut s = Vector::zeros(p.dim());
            for (v, facets) in p.vertices().iter().zip(p.vertex_facets()) {
                let normals: Vec<Vector> = facets
                    .iter()
                    .map(|&j| p.halfspaces()[j].outward().normalize())
                    .collect();
                s.axpy(external_angle(&normals)?, v, 1.0);
            }
            Ok(s)
        }
        CenterKind::Steiner => {
            let d = p.dim();
            let mut r = rng::substream(0x57e1, rng::tag("steiner"), d as u64);
            let mut counts = vec![0usize; p.vertices().len()];
            for _ in 0..STEINER_MC_DIRECTIONS / 2 {
                let u = uniform_direction(d, &mut r);
                counts[p.support_vertex(&u)] += 1;
                counts[p.support_vertex(&-u)] += 1;
            }
            let n: usize = counts.iter().sum();
            let mut s = Vector::zeros(d);
            for (v, c) in p.vertices().iter().zip(counts) {
                s.axpy(c as f64 / n as f64, v, 1.0);
            }
            Ok(s)
        }
    }
}

/// `(p - cent(p)) / Φ(p)`.
pub fn shape(p: &Polytope, phi: &DirectionalDistribution, kind: CenterKind) -> Result<Polytope, GeomError> {
    let c = cent(p, kind)?;
    let content = phi.content(p).value;
    if !(content > 0.0) {
        return Err(GeomError::Degenerate(super::DegenerateKind::LowerDimensional));
    }
    Ok(p.transformed(1.0 / content, &(-&c / content)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::from_slice;

    #[test]
    fn centers_of_a_shifted_box() {
        let b = Polytope::axis_box(&[1.0, 2.0, -1.0], &[3.0, 3.0, 0.0]);
        let expect = from_slice(&[2.0, 2.5, -0.5]);
        for kind in [CenterKind::Centroid, CenterKind::Steiner] {
            assert!((cent(&b, kind).unwrap() - &expect).norm() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn right_triangle_centers() {
        let pts = vec![from_slice(&[0.0, 0.0]), from_slice(&[1.0, 0.0]), from_slice(&[0.0, 1.0])];
        let t = crate::geom::convex_hull(&pts).unwrap().polytope;
        let c = cent(&t, CenterKind::Centroid).unwrap();
        assert!((c - from_slice(&[1.0 / 3.0, 1.0 / 3.0])).norm() < 1e-12);
        // external angles: 1/4 at the right angle, 3/8 at the other two
        let s = cent(&t, CenterKind::Steiner).unwrap();
        assert!((s - from_slice(&[0.375, 0.375])).norm() < 1e-12);
    }

    #[test]
    fn shape_is_translation_and_scale_invariant() {
        let phi = DirectionalDistribution::isotropic(2).unwrap();
        let p = Polytope::regular_polygon(5, 1.0);
        let q = p.transformed(3.0, &from_slice(&[7.0, -2.0]));
        let a = shape(&p, &phi, CenterKind::Centroid).unwrap();
        let b = shape(&q, &phi, CenterKind::Centroid).unwrap();
        for (x, y) in a.halfspaces().iter().zip(b.halfspaces()) {
            assert!((x.rhs() - y.rhs()).abs() < 1e-12);
        }
        assert!((phi.content(&a).value - 1.0).abs() < 1e-12);
    }
}
