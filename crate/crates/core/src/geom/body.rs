use super::distance::distance_to_hull;
use super::measure::{intrinsic_volumes, VolumeMode, EXACT_MAX_DIM};
use super::{kappa, Polytope, Vector};

/// `V_1 κ_{d-1} / (d κ_d)`: mean of the support function over the sphere.
fn mean_support(d: usize, v1: f64) -> f64 {
    v1 * kappa(d - 1) / (d as f64 * kappa(d))
}

/// What the Φ-content and hit sampler need from a convex body.
pub trait ConvexBody: Sync {
    fn dim(&self) -> usize;
    fn support(&self, u: &Vector) -> f64;
    fn contains(&self, x: &Vector, tol: f64) -> bool;
    /// Radius of the smallest ball about the origin containing the body.
    fn circumradius(&self) -> f64;
    /// Average of `h(K, u)` over the uniform law on the sphere when a closed
    /// form is available.
    fn isotropic_content(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn centered(d: usize, radius: f64) -> Ball {
        Ball {
            center: Vector::zeros(d),
            radius,
        }
    }
}

impl ConvexBody for Ball {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn support(&self, u: &Vector) -> f64 {
        self.center.dot(u) + self.radius * u.norm()
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        (x - &self.center).norm() <= self.radius + tol
    }

    fn circumradius(&self) -> f64 {
        self.center.norm() + self.radius
    }

    fn isotropic_content(&self) -> Option<f64> {
        Some(self.radius)
    }
}

/// Convex hull of finitely many points, e.g. a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<Vector>,
}

impl PointSet {
    pub fn segment(a: Vector, b: Vector) -> PointSet {
        PointSet { points: vec![a, b] }
    }
}

impl ConvexBody for PointSet {
    fn dim(&self) -> usize {
        self.points[0].len()
    }

    fn support(&self, u: &Vector) -> f64 {
        self.points.iter().map(|p| p.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        distance_to_hull(x, &self.points) <= tol
    }

    fn circumradius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    fn isotropic_content(&self) -> Option<f64> {
        match self.points.as_slice() {
            [_] => Some(0.0),
            [a, b] => Some(mean_support(a.len(), (a - b).norm())),
            _ => None,
        }
    }
}

impl ConvexBody for Polytope {
    fn dim(&self) -> usize {
        Polytope::dim(self)
    }

    fn support(&self, u: &Vector) -> f64 {
        Polytope::support(self, u)
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        Polytope::contains(self, x, tol)
    }

    fn circumradius(&self) -> f64 {
        Polytope::circumradius(self)
    }

    fn isotropic_content(&self) -> Option<f64> {
        if self.dim() > EXACT_MAX_DIM {
            return None;
        }
        let v = intrinsic_volumes(self, VolumeMode::Exact).ok()?;
        Some(mean_support(self.dim(), v.get(1)))
    }
}
