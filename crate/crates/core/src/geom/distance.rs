//! Point-to-polytope distance by Wolfe's minimum-norm-point algorithm on
//! the vertex representation, and the Hausdorff distance of nested
//! polytopes built on it.

use nalgebra::{DMatrix, DVector};

use super::{GeomError, Polytope, Vector};

const MAX_MAJOR: usize = 500;
const WEIGHT_EPS: f64 = 1e-14;

/// Affine minimizer of `|sum a_i p_i|` over `sum a_i = 1`.
fn affine_min(points: &[Vector], s: &[usize]) -> Vec<f64> {
    let k = s.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..=a {
            let g = points[s[a]].dot(&points[s[b]]);
            m[(a, b)] = g;
            m[(b, a)] = g;
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = match m.clone().lu().solve(&rhs) {
        Some(x) if x.iter().all(|v| v.is_finite()) => x,
        _ => m
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .unwrap_or_else(|_| DVector::from_element(k + 1, 1.0 / k as f64)),
    };
    sol.iter().take(k).copied().collect()
}

/// Point of minimum norm in the convex hull of `points`, with its convex
/// weights (indexed like `points`, zero outside the final corral).
pub fn min_norm_point(points: &[Vector]) -> (Vector, Vec<f64>) {
    assert!(!points.is_empty(), "min_norm_point needs at least one point");
    let scale2 = points
        .iter()
        .map(|p| p.norm_squared())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let first = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .unwrap();
    let mut s = vec![first];
    let mut lam = vec![1.0];
    let mut x = points[first].clone();

    for _ in 0..MAX_MAJOR {
        let (j, pjx) = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.dot(&x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let xx = x.norm_squared();
        if xx - pjx <= 1e-15 * scale2 || s.contains(&j) {
            break;
        }
        s.push(j);
        lam.push(0.0);
        loop {
            let alpha = affine_min(points, &s);
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                lam = alpha;
                break;
            }
            let mut theta: f64 = 1.0;
            for (l, a) in lam.iter().zip(&alpha) {
                if *a <= WEIGHT_EPS && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let mut keep_s = Vec::with_capacity(s.len());
            let mut keep_l = Vec::with_capacity(s.len());
            for (&i, &l) in s.iter().zip(&lam) {
                if l > WEIGHT_EPS {
                    keep_s.push(i);
                    keep_l.push(l);
                }
            }
            if keep_s.is_empty() {
                // Numerical collapse; restart the corral at the best vertex.
                keep_s.push(j);
                keep_l.push(1.0);
            }
            let total: f64 = keep_l.iter().sum();
            keep_l.iter_mut().for_each(|l| *l /= total);
            s = keep_s;
            lam = keep_l;
            if s.len() == 1 {
                break;
            }
        }
        let mut nx = Vector::zeros(x.len());
        for (&i, &l) in s.iter().zip(&lam) {
            nx.axpy(l, &points[i], 1.0);
        }
        let progressed = nx.norm_squared() < xx * (1.0 - 1e-15);
        x = nx;
        if !progressed {
            break;
        }
    }

    let mut w = vec![0.0; points.len()];
    for (&i, &l) in s.iter().zip(&lam) {
        w[i] = l;
    }
    (x, w)
}

/// Euclidean distance from `x` to `conv(points)`.
pub fn distance_to_hull(x: &Vector, points: &[Vector]) -> f64 {
    let shifted: Vec<Vector> = points.iter().map(|p| p - x).collect();
    min_norm_point(&shifted).0.norm()
}

/// `d_H(K, L)` for `K ⊆ L`: the largest distance from a vertex of `L` to `K`.
pub fn hausdorff_nested(k: &Polytope, l: &Polytope) -> Result<f64, GeomError> {
    if k.dim() != l.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    let tol = k.tolerance().max(l.tolerance());
    if let Some(v) = k.vertices().iter().find(|v| !l.contains(v, tol)) {
        return Err(GeomError::Precondition(format!(
            "K is not contained in L (vertex {v:?} escapes)"
        )));
    }
    let mut best: f64 = 0.0;
    for v in l.vertices() {
        if k.contains(v, 0.0) {
            continue;
        }
        best = best.max(distance_to_hull(v, k.vertices()));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{from_slice, Halfspace, Side};

    #[test]
    fn distance_to_square_edge_and_corner() {
        let sq = Polytope::cube(2, 2.0);
        let d1 = distance_to_hull(&from_slice(&[3.0, 0.5]), sq.vertices());
        assert!((d1 - 2.0).abs() < 1e-12);
        let d2 = distance_to_hull(&from_slice(&[4.0, 5.0]), sq.vertices());
        assert!((d2 - 5.0).abs() < 1e-12);
        assert!(distance_to_hull(&from_slice(&[0.2, 0.1]), sq.vertices()) < 1e-12);
    }

    #[test]
    fn distance_to_tetrahedron_face() {
        let pts = vec![
            from_slice(&[0.0, 0.0, 0.0]),
            from_slice(&[1.0, 0.0, 0.0]),
            from_slice(&[0.0, 1.0, 0.0]),
            from_slice(&[0.0, 0.0, 1.0]),
        ];
        let d = distance_to_hull(&from_slice(&[1.0, 1.0, 1.0]), &pts);
        assert!((d - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nested_squares() {
        let k = Polytope::cube(2, 2.0);
        let l = Polytope::cube(2, 2.5);
        assert!((hausdorff_nested(&k, &l).unwrap() - 0.25 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(hausdorff_nested(&k, &k).unwrap(), 0.0);
        assert!(hausdorff_nested(&l, &k).is_err());
    }

    #[test]
    fn cut_corner_of_unit_square() {
        let l = Polytope::axis_box(&[0.0, 0.0], &[1.0, 1.0]);
        let mut hs = l.halfspaces().to_vec();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        hs.push(Halfspace::new(from_slice(&[s, s]), 1.5 * s, Side::Origin).unwrap());
        let k = Polytope::from_halfspaces(&hs).unwrap();
        let d = hausdorff_nested(&k, &l).unwrap();
        assert!((d - 0.25 * 2f64.sqrt()).abs() < 1e-12);
        // dense boundary sampling of L as a second opinion
        let mut dense: f64 = 0.0;
        for i in 0..=400 {
            let t = i as f64 / 400.0;
            for p in [[t, 1.0], [1.0, t]] {
                let x = from_slice(&p);
                dense = dense.max(distance_to_hull(&x, k.vertices()));
            }
        }
        assert!((dense - d).abs() < 1e-9);
    }
}
