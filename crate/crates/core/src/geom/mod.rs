//! Convex polytope kernel in dimension `d >= 2`.
//!
//! Polytopes are kept in a dual representation: the irredundant list of
//! facet-defining halfspaces together with the vertex set and the
//! vertex/facet incidence. Everything downstream (support functions,
//! intrinsic volumes, pruning) works from that pair.

mod body;
mod center;
mod dd;
mod faces;
mod linalg;
mod distance;
mod hull;
mod measure;
mod polytope;
mod serial;

pub use body::{Ball, ConvexBody, PointSet};
pub use center::{cent, shape, CenterKind};
pub use dd::{intersect_halfspaces, Intersection};
pub(crate) use dd::removal_parts;
pub use distance::{distance_to_hull, hausdorff_nested, min_norm_point};
pub use hull::{convex_hull, convex_hull_2d, Hull};
pub use measure::{
    ball_isoperimetric_ratio, facet_areas, intrinsic_volumes, intrinsic_volumes_auto, isoperimetric_bound,
    isoperimetric_ratio, volume, IntrinsicVolumes, VolumeMethod, VolumeMode, EXACT_MAX_DIM,
};
pub use polytope::{Polytope, SimplicityCertificate};
pub use serial::PolytopeJson;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points and directions in `R^d`.
pub type Vector = DVector<f64>;

/// Absolute tolerance for geometric predicates on unit-scale data.
pub const GEOM_TOL: f64 = 1e-9;

/// Tolerance on `|u| = 1` for halfspace normals.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegenerateKind {
    Empty,
    Unbounded,
    LowerDimensional,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate intersection: {0:?}")]
    Degenerate(DegenerateKind),
    #[error("ill-conditioned vertex solve (smallest singular value {sigma:.3e})")]
    IllConditioned { sigma: f64 },
    #[error("need at least {needed} halfspaces in dimension {dim}, got {got}")]
    TooFewHalfspaces { dim: usize, needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid halfspace: {0}")]
    InvalidHalfspace(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// Which closed side of `H(u, t)` a halfspace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `<x, u> <= t`, the side containing the origin (`eps = -1`).
    Origin,
    /// `<x, u> >= t` (`eps = +1`).
    Far,
}

impl Side {
    pub fn eps(self) -> i8 {
        match self {
            Side::Origin => -1,
            Side::Far => 1,
        }
    }

    pub fn from_eps(eps: i8) -> Option<Side> {
        match eps {
            -1 => Some(Side::Origin),
            1 => Some(Side::Far),
            _ => None,
        }
    }

    pub fn flipped(self) -> Side {
        match self {
            Side::Origin => Side::Far,
            Side::Far => Side::Origin,
        }
    }
}

/// Affine hyperplane `H(u, t) = { x : <x, u> = t }` with `|u| = 1`, `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vector,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Result<Self, GeomError> {
        check_unit(&normal)?;
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(GeomError::InvalidHalfspace(format!(
                "offset must be finite and >= 0, got {offset}"
            )));
        }
        Ok(Hyperplane { normal, offset })
    }

    pub fn halfspace(&self, side: Side) -> Halfspace {
        Halfspace {
            normal: self.normal.clone(),
            offset: self.offset,
            side,
        }
    }

    /// Signed distance `<x, u> - t`.
    pub fn signed_distance(&self, x: &Vector) -> f64 {
        x.dot(&self.normal) - self.offset
    }
}

/// Closed halfspace `H(u, t)^eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
    pub side: Side,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64, side: Side) -> Result<Self, GeomError> {
        let h = Hyperplane::new(normal, offset)?;
        Ok(h.halfspace(side))
    }

    /// Builds the halfspace `{ x : <a, x> <= b }` for any nonzero `a`.
    pub fn from_inequality(a: &Vector, b: f64) -> Result<Self, GeomError> {
        let n = a.norm();
        if !(n > 0.0) || !n.is_finite() || !b.is_finite() {
            return Err(GeomError::InvalidHalfspace(
                "inequality normal must be finite and nonzero".into(),
            ));
        }
        let u = a / n;
        let t = b / n;
        if t >= 0.0 {
            Ok(Halfspace {
                normal: u,
                offset: t,
                side: Side::Origin,
            })
        } else {
            Ok(Halfspace {
                normal: -u,
                offset: -t,
                side: Side::Far,
            })
        }
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn eps(&self) -> i8 {
        self.side.eps()
    }

    pub fn hyperplane(&self) -> Hyperplane {
        Hyperplane {
            normal: self.normal.clone(),
            offset: self.offset,
        }
    }

    /// Outward unit normal `a` of the inequality form `<a, x> <= b`.
    pub fn outward(&self) -> Vector {
        match self.side {
            Side::Origin => self.normal.clone(),
            Side::Far => -&self.normal,
        }
    }

    /// Right-hand side `b` of the inequality form `<a, x> <= b`.
    pub fn rhs(&self) -> f64 {
        match self.side {
            Side::Origin => self.offset,
            Side::Far => -self.offset,
        }
    }

    /// `<a, x> - b`; nonpositive inside.
    pub fn violation(&self, x: &Vector) -> f64 {
        let s = x.dot(&self.normal) - self.offset;
        match self.side {
            Side::Origin => s,
            Side::Far => -s,
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.violation(x) <= tol
    }

    /// The complementary closed halfspace.
    pub fn flipped(&self) -> Halfspace {
        Halfspace {
            normal: self.normal.clone(),
            offset: self.offset,
            side: self.side.flipped(),
        }
    }

    /// Image under `x -> scale * x + shift`, `scale > 0`.
    pub fn transformed(&self, scale: f64, shift: &Vector) -> Halfspace {
        let a = self.outward();
        let b = scale * self.rhs() + a.dot(shift);
        // `a` is already unit, so this only re-canonicalizes the sign.
        Halfspace::from_inequality(&a, b).expect("unit normal stays valid")
    }
}

fn check_unit(u: &Vector) -> Result<(), GeomError> {
    if u.len() < 2 {
        return Err(GeomError::InvalidHalfspace(format!(
            "dimension must be >= 2, got {}",
            u.len()
        )));
    }
    let n = u.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(GeomError::InvalidHalfspace(format!(
            "normal must be a unit vector (|u| = {n})"
        )));
    }
    Ok(())
}

/// Volume of the `j`-dimensional unit ball.
pub fn kappa(j: usize) -> f64 {
    let mut k = if j.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut i = if j.is_multiple_of(2) { 2 } else { 3 };
    while i <= j {
        k *= 2.0 * std::f64::consts::PI / i as f64;
        i += 2;
    }
    k
}

/// Surface area of the unit sphere `S^{d-1}`, i.e. `d * kappa_d`.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * kappa(d)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn unit_vector(d: usize, axis: usize) -> Vector {
    let mut v = Vector::zeros(d);
    v[axis] = 1.0;
    v
}

pub fn from_slice(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(kappa(0), 1.0);
        assert_eq!(kappa(1), 2.0);
        assert!((kappa(2) - PI).abs() < 1e-15);
        assert!((kappa(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((kappa(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn inequality_canonicalization() {
        let h = Halfspace::from_inequality(&from_slice(&[-2.0, 0.0]), -2.0).unwrap();
        // -2x <= -2  <=>  x >= 1
        assert_eq!(h.side, Side::Far);
        assert!((h.offset - 1.0).abs() < 1e-15);
        assert!((h.normal[0] - 1.0).abs() < 1e-15);
        assert!(h.contains(&from_slice(&[1.5, 0.0]), 0.0));
        assert!(!h.contains(&from_slice(&[0.5, 0.0]), 0.0));
    }

    #[test]
    fn rejects_non_unit_normals() {
        assert!(Halfspace::new(from_slice(&[1.0, 1.0]), 1.0, Side::Origin).is_err());
        assert!(Halfspace::new(from_slice(&[1.0, 0.0]), -1.0, Side::Origin).is_err());
    }

    #[test]
    fn transform_moves_offsets() {
        let h = Halfspace::new(from_slice(&[1.0, 0.0]), 1.0, Side::Origin).unwrap();
        let g = h.transformed(2.0, &from_slice(&[-5.0, 0.0]));
        // x <= 1 maps to x <= 2 - 5 = -3, i.e. <x, -e1> >= 3.
        assert_eq!(g.side, Side::Far);
        assert!((g.offset - 3.0).abs() < 1e-15);
        assert!(g.contains(&from_slice(&[-4.0, 7.0]), 0.0));
    }
}
