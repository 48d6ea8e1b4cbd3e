//! Convex hulls: planar monotone chain, and polarity plus halfspace
//! intersection in higher dimensions.

use super::dd::{self, TIGHT_TOL};
use super::{DegenerateKind, GeomError, Halfspace, Polytope, Vector};

#[derive(Debug, Clone)]
pub struct Hull {
    pub polytope: Polytope,
    /// Indices of the input points that are vertices of the hull.
    pub extreme: Vec<usize>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain. Returns hull indices counter-clockwise,
/// collinear points dropped.
pub fn convex_hull_2d(pts: &[[f64; 2]]) -> Vec<usize> {
    let n = pts.len();
    if n < 3 {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
    });
    let mut hull: Vec<usize> = Vec::with_capacity(2 * n);
    for pass in 0..2 {
        let start = hull.len();
        let it: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in it {
            while hull.len() >= start + 2
                && cross(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// Shoelace area of a polygon given in order.
pub(crate) fn polygon_area(pts: &[[f64; 2]], order: &[usize]) -> f64 {
    let n = order.len();
    let mut s = 0.0;
    for k in 0..n {
        let a = pts[order[k]];
        let b = pts[order[(k + 1) % n]];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s.abs()
}

/// Convex hull of a full-dimensional point set as a [`Polytope`].
pub fn convex_hull(points: &[Vector]) -> Result<Hull, GeomError> {
    let d = points
        .first()
        .map(|p| p.len())
        .ok_or(GeomError::Degenerate(DegenerateKind::Empty))?;
    if points.len() < d + 1 {
        return Err(GeomError::Degenerate(DegenerateKind::LowerDimensional));
    }
    let mut c = Vector::zeros(d);
    for p in points {
        c += p;
    }
    c /= points.len() as f64;
    let scale = points.iter().map(|p| (p - &c).norm()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(GeomError::Degenerate(DegenerateKind::LowerDimensional));
    }

    // Polar body of (points - c)/scale: one halfspace <q, y> <= 1 per point.
    let mut polar = Vec::new();
    let mut owner = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let q = (p - &c) / scale;
        let n = q.norm();
        if n > TIGHT_TOL {
            polar.push(Halfspace::new(q / n, 1.0 / n, super::Side::Origin)?);
            owner.push(i);
        }
    }
    if polar.len() < d + 1 {
        return Err(GeomError::Degenerate(DegenerateKind::LowerDimensional));
    }
    let inter = dd::intersect_halfspaces(&polar).map_err(|e| match e {
        GeomError::Degenerate(DegenerateKind::Unbounded) => {
            GeomError::Degenerate(DegenerateKind::LowerDimensional)
        }
        other => other,
    })?;

    let facets: Vec<Halfspace> = inter
        .polytope
        .vertices()
        .iter()
        .map(|y| Halfspace::from_inequality(y, scale + y.dot(&c)))
        .collect::<Result<_, _>>()?;
    let extreme: Vec<usize> = inter.kept.iter().map(|&k| owner[k]).collect();
    let verts: Vec<Vector> = extreme.iter().map(|&i| points[i].clone()).collect();
    let scale_abs = scale.max(c.amax());
    let polytope = Polytope::assemble(d, facets, verts, TIGHT_TOL * scale_abs.max(1e-300))?;
    Ok(Hull { polytope, extreme })
}
