//! Halfspace intersection by the double description method.
//!
//! The polytope `{x : <a_i, x> <= b_i}` is lifted to the cone
//! `{(y, s) : <a_i, y> - b_i s <= 0, s >= 0}` in `R^{d+1}`, whose extreme rays
//! with `s > 0` are the vertices and whose rays with `s = 0` are recession
//! directions. Constraints are inserted one at a time; new rays are formed
//! only from adjacent (positive, negative) pairs using the combinatorial
//! adjacency test on zero sets.

use nalgebra::DMatrix;

use super::linalg::{affine_rank, Bits};
use super::{DegenerateKind, GeomError, Halfspace, Polytope, Vector};

/// Zero-classification tolerance on unit rays against unit constraint rows.
const RAY_TOL: f64 = 1e-10;
/// Rays with `s` below this (after normalization) are recession directions.
const RECESSION_TOL: f64 = 1e-12;
/// Tightness tolerance in rescaled coordinates.
pub(crate) const TIGHT_TOL: f64 = 1e-9;
/// Smallest admissible singular value of the tight normals at a vertex.
const COND_TOL: f64 = 1e-10;

/// Result of [`intersect_halfspaces`].
#[derive(Debug, Clone)]
pub struct Intersection {
    pub polytope: Polytope,
    /// For each facet of `polytope`, the index of the input halfspace.
    pub kept: Vec<usize>,
    /// Input halfspaces that do not define a facet (including duplicates).
    pub redundant: Vec<usize>,
}

struct Ray {
    y: Vec<f64>,
    zero: Bits,
}

pub(crate) enum Vertices {
    Empty,
    Unbounded,
    Points(Vec<Vector>),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Greedy independent subset of the rows, scanned in order.
fn pick_basis(g: &[Vec<f64>], dim: usize) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut idx = Vec::new();
    for (k, row) in g.iter().enumerate() {
        let mut r = row.clone();
        for _ in 0..2 {
            for e in &basis {
                let c = dot(&r, e);
                r.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = dot(&r, &r).sqrt();
        if n > 1e-9 {
            r.iter_mut().for_each(|x| *x /= n);
            basis.push(r);
            idx.push(k);
            if idx.len() == dim {
                break;
            }
        }
    }
    idx
}

/// Extreme rays of `{y : g_k . y <= 0 for all k}`; `None` if the rows do
/// not span (the cone is not pointed).
fn double_description(g: &[Vec<f64>], dim: usize) -> Option<Vec<Ray>> {
    let m = g.len();
    let basis = pick_basis(g, dim);
    if basis.len() < dim {
        return None;
    }
    let b = DMatrix::from_fn(dim, dim, |r, c| g[basis[r]][c]);
    let inv = b.try_inverse()?;
    let mut in_basis = vec![false; m];
    basis.iter().for_each(|&k| in_basis[k] = true);

    let mut rays: Vec<Ray> = (0..dim)
        .map(|k| {
            let mut y: Vec<f64> = (0..dim).map(|r| -inv[(r, k)]).collect();
            normalize(&mut y);
            let mut zero = Bits::new(m);
            for (l, &bl) in basis.iter().enumerate() {
                if l != k {
                    zero.set(bl);
                }
            }
            Ray { y, zero }
        })
        .collect();

    for c in (0..m).filter(|&c| !in_basis[c]) {
        let vals: Vec<f64> = rays.iter().map(|r| dot(&g[c], &r.y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > RAY_TOL).collect();
        if pos.is_empty() {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.abs() <= RAY_TOL {
                    r.zero.set(c);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -RAY_TOL).collect();

        let mut fresh = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zero.and(&rays[n].zero);
                if common.count() + 2 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == n || !common.subset_of(&r.zero));
                if !adjacent {
                    continue;
                }
                let (vp, vn) = (vals[p], vals[n]);
                let mut y: Vec<f64> = rays[n]
                    .y
                    .iter()
                    .zip(&rays[p].y)
                    .map(|(yn, yp)| vp * yn - vn * yp)
                    .collect();
                normalize(&mut y);
                let mut zero = common;
                zero.set(c);
                fresh.push(Ray { y, zero });
            }
        }

        let old = std::mem::take(&mut rays);
        for (i, mut r) in old.into_iter().enumerate() {
            if vals[i] > RAY_TOL {
                continue;
            }
            if vals[i] >= -RAY_TOL {
                r.zero.set(c);
            }
            rays.push(r);
        }
        rays.extend(fresh);
        if rays.is_empty() {
            break;
        }
    }
    Some(rays)
}

/// Vertices of `{x : <a_k, x> <= b_k}` with constraints inserted in `order`.
/// `scale` must be a positive bound on the magnitude of the data.
pub(crate) fn enumerate_vertices(
    rows: &[(Vector, f64)],
    order: &[usize],
    scale: f64,
) -> Result<Vertices, GeomError> {
    let d = rows[0].0.len();
    let dim = d + 1;
    let lift = |a: &Vector, b: f64| -> Vec<f64> {
        let mut g: Vec<f64> = a.iter().copied().collect();
        g.push(-b / scale);
        normalize(&mut g);
        g
    };
    let mut g: Vec<Vec<f64>> = Vec::with_capacity(order.len() + 1);
    let mut s_row = vec![0.0; dim];
    s_row[d] = -1.0;
    g.push(s_row);
    for &k in order {
        g.push(lift(&rows[k].0, rows[k].1));
    }

    let rays = match double_description(&g, dim) {
        Some(r) => r,
        None => {
            // Normals do not span: the set is empty or contains a line.
            // Close it with a large box to tell the two apart.
            for axis in 0..d {
                for sign in [1.0, -1.0] {
                    let mut a = Vector::zeros(d);
                    a[axis] = sign;
                    g.push(lift(&a, 1e3 * scale));
                }
            }
            return match double_description(&g, dim) {
                Some(r) if r.iter().any(|r| r.y[d] > RECESSION_TOL) => Ok(Vertices::Unbounded),
                _ => Ok(Vertices::Empty),
            };
        }
    };

    let mut pts = Vec::new();
    let mut recession = false;
    for r in &rays {
        let s = r.y[d];
        if s > RECESSION_TOL {
            pts.push(Vector::from_iterator(d, r.y[..d].iter().map(|v| v / s * scale)));
        } else {
            recession = true;
        }
    }
    if pts.is_empty() {
        return Ok(Vertices::Empty);
    }
    if recession {
        return Ok(Vertices::Unbounded);
    }
    Ok(Vertices::Points(merge_close(pts, TIGHT_TOL * scale)))
}

fn merge_close(pts: Vec<Vector>, tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out.iter().any(|q| (q - &p).amax() <= tol) {
            out.push(p);
        }
    }
    out
}

pub(crate) fn data_scale(hs: &[Halfspace]) -> f64 {
    let s = hs.iter().map(|h| h.offset).fold(0.0, f64::max);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Smallest singular value of the stacked normals.
pub(crate) fn min_singular(normals: &[Vector]) -> f64 {
    let d = normals[0].len();
    if normals.len() < d {
        return 0.0;
    }
    let m = DMatrix::from_fn(normals.len(), d, |r, c| normals[r][c]);
    let sv = m.svd(false, false).singular_values;
    sv.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Intersection of closed halfspaces as an irredundant polytope.
pub fn intersect_halfspaces(hs: &[Halfspace]) -> Result<Intersection, GeomError> {
    let d = match hs.first() {
        Some(h) => h.dim(),
        None => {
            return Err(GeomError::TooFewHalfspaces {
                dim: 0,
                needed: 1,
                got: 0,
            })
        }
    };
    if let Some(h) = hs.iter().find(|h| h.dim() != d) {
        return Err(GeomError::DimensionMismatch {
            expected: d,
            got: h.dim(),
        });
    }
    if d < 2 {
        return Err(GeomError::Unsupported("dimension must be >= 2".into()));
    }
    if hs.len() < d + 1 {
        return Err(GeomError::TooFewHalfspaces {
            dim: d,
            needed: d + 1,
            got: hs.len(),
        });
    }
    let scale = data_scale(hs);
    let rows: Vec<(Vector, f64)> = hs.iter().map(|h| (h.outward(), h.rhs())).collect();
    let order: Vec<usize> = (0..hs.len()).collect();
    let pts = match enumerate_vertices(&rows, &order, scale)? {
        Vertices::Empty => return Err(GeomError::Degenerate(DegenerateKind::Empty)),
        Vertices::Unbounded => return Err(GeomError::Degenerate(DegenerateKind::Unbounded)),
        Vertices::Points(p) => p,
    };
    let refs: Vec<&Vector> = pts.iter().collect();
    if affine_rank(&refs, TIGHT_TOL * scale) < d {
        return Err(GeomError::Degenerate(DegenerateKind::LowerDimensional));
    }

    let tol = TIGHT_TOL * scale;
    let mut kept = Vec::new();
    let mut redundant = Vec::new();
    let mut seen: Vec<Bits> = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let mut tight = Bits::new(pts.len());
        let mut members = Vec::new();
        for (v, p) in pts.iter().enumerate() {
            if h.violation(p).abs() <= tol {
                tight.set(v);
                members.push(p);
            }
        }
        let is_facet = members.len() >= d && affine_rank(&members, tol) == d - 1;
        if is_facet && !seen.contains(&tight) {
            seen.push(tight);
            kept.push(i);
        } else {
            redundant.push(i);
        }
    }

    let halfspaces: Vec<Halfspace> = kept.iter().map(|&i| hs[i].clone()).collect();
    let polytope = Polytope::assemble(d, halfspaces, pts, tol)?;
    check_conditioning(&polytope)?;
    Ok(Intersection {
        polytope,
        kept,
        redundant,
    })
}

/// What removing one facet does to a polytope.
pub(crate) enum Removal {
    Unbounded,
    Bounded {
        /// Vertices of the enlarged polytope strictly beyond the removed facet.
        new_vertices: Vec<Vector>,
        /// Facets (indices in the original polytope) tight somewhere on the
        /// region cut off by the removed facet.
        region_facets: Vec<usize>,
    },
}

/// Computes the cap `{<a_j, x> >= b_j} ∩ (other facets)` that facet `j`
/// was cutting off.
pub(crate) fn removal_region(p: &Polytope, j: usize) -> Result<Removal, GeomError> {
    let hs = p.halfspaces();
    let n = hs.len();
    let mut rows: Vec<(Vector, f64)> = Vec::with_capacity(n);
    rows.push((-hs[j].outward(), -hs[j].rhs()));
    let mut idx = vec![j];
    let neighbors = p.facet_neighbors(j);
    let mut is_nb = vec![false; n];
    for &i in &neighbors {
        is_nb[i] = true;
    }
    for &i in &neighbors {
        rows.push((hs[i].outward(), hs[i].rhs()));
        idx.push(i);
    }
    for i in (0..n).filter(|&i| i != j && !is_nb[i]) {
        rows.push((hs[i].outward(), hs[i].rhs()));
        idx.push(i);
    }
    let order: Vec<usize> = (0..rows.len()).collect();
    let scale = p.scale();
    let tol = TIGHT_TOL * scale;
    match enumerate_vertices(&rows, &order, scale)? {
        Vertices::Unbounded => Ok(Removal::Unbounded),
        Vertices::Empty => Err(GeomError::Precondition(format!(
            "facet {j} cuts off an empty region"
        ))),
        Vertices::Points(pts) => {
            let mut region = Bits::new(n);
            for q in &pts {
                for (r, &i) in rows.iter().zip(&idx).skip(1) {
                    if (r.0.dot(q) - r.1).abs() <= tol {
                        region.set(i);
                    }
                }
            }
            let new_vertices = pts
                .into_iter()
                .filter(|q| hs[j].violation(q) > tol)
                .collect();
            Ok(Removal::Bounded {
                new_vertices,
                region_facets: region.ones().collect(),
            })
        }
    }
}

/// [`removal_region`] as plain data: new vertices and touched facets, or
/// `None` when dropping facet `j` unbounds the polytope.
pub(crate) fn removal_parts(p: &Polytope, j: usize) -> Result<Option<(Vec<Vector>, Vec<usize>)>, GeomError> {
    Ok(match removal_region(p, j)? {
        Removal::Unbounded => None,
        Removal::Bounded {
            new_vertices,
            region_facets,
        } => Some((new_vertices, region_facets)),
    })
}

/// Verifies that no vertex is held by nearly parallel facets.
pub(crate) fn check_conditioning(p: &Polytope) -> Result<(), GeomError> {
    let hs = p.halfspaces();
    for fs in p.vertex_facets() {
        let normals: Vec<Vector> = fs.iter().map(|&i| hs[i].outward()).collect();
        let sigma = if normals.is_empty() {
            0.0
        } else {
            min_singular(&normals)
        };
        if sigma < COND_TOL {
            return Err(GeomError::IllConditioned { sigma });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{from_slice, Side};

    fn hs(u: &[f64], t: f64, side: Side) -> Halfspace {
        let v = from_slice(u);
        let n = v.norm();
        Halfspace::new(v / n, t, side).unwrap()
    }

    #[test]
    fn square_from_four_halfspaces() {
        let h = vec![
            hs(&[1.0, 0.0], 1.0, Side::Origin),
            hs(&[-1.0, 0.0], 1.0, Side::Origin),
            hs(&[0.0, 1.0], 1.0, Side::Origin),
            hs(&[0.0, -1.0], 1.0, Side::Origin),
        ];
        let out = intersect_halfspaces(&h).unwrap();
        let p = out.polytope;
        assert_eq!(p.n_facets(), 4);
        assert_eq!(p.vertices().len(), 4);
        for v in p.vertices() {
            assert!((v[0].abs() - 1.0).abs() < 1e-12 && (v[1].abs() - 1.0).abs() < 1e-12);
        }
        assert!(out.redundant.is_empty());
    }

    #[test]
    fn simplex_in_three_dimensions() {
        let s = 1.0 / 3f64.sqrt();
        let h = vec![
            hs(&[1.0, 0.0, 0.0], 1.0, Side::Origin),
            hs(&[0.0, 1.0, 0.0], 1.0, Side::Origin),
            hs(&[0.0, 0.0, 1.0], 1.0, Side::Origin),
            hs(&[-s, -s, -s], 1.0, Side::Origin),
        ];
        let p = intersect_halfspaces(&h).unwrap().polytope;
        assert_eq!(p.n_facets(), 4);
        assert_eq!(p.vertices().len(), 4);
        assert!(p.simplicity().simple);
    }

    #[test]
    fn halfplane_normals_are_unbounded() {
        let h = vec![
            hs(&[1.0, 0.0], 1.0, Side::Origin),
            hs(&[0.0, 1.0], 1.0, Side::Origin),
            hs(&[1.0, 1.0], 3.0 / 2f64.sqrt(), Side::Origin),
        ];
        assert_eq!(
            intersect_halfspaces(&h).unwrap_err(),
            GeomError::Degenerate(DegenerateKind::Unbounded)
        );
    }

    #[test]
    fn redundant_constraint_is_reported() {
        let h = vec![
            hs(&[1.0, 0.0], 1.0, Side::Origin),
            hs(&[-1.0, 0.0], 1.0, Side::Origin),
            hs(&[0.0, 1.0], 1.0, Side::Origin),
            hs(&[0.0, -1.0], 1.0, Side::Origin),
            hs(&[1.0, 1.0], 3.0 / 2f64.sqrt(), Side::Origin),
            hs(&[1.0, 0.0], 1.0, Side::Origin),
        ];
        let out = intersect_halfspaces(&h).unwrap();
        assert_eq!(out.kept, vec![0, 1, 2, 3]);
        assert_eq!(out.redundant, vec![4, 5]);
    }

    #[test]
    fn empty_and_flat_cases() {
        let empty = vec![
            hs(&[1.0, 0.0], 1.0, Side::Far),
            hs(&[1.0, 0.0], 0.5, Side::Origin),
            hs(&[0.0, 1.0], 1.0, Side::Origin),
            hs(&[0.0, -1.0], 1.0, Side::Origin),
        ];
        assert_eq!(
            intersect_halfspaces(&empty).unwrap_err(),
            GeomError::Degenerate(DegenerateKind::Empty)
        );
        let flat = vec![
            hs(&[1.0, 0.0], 0.0, Side::Origin),
            hs(&[1.0, 0.0], 0.0, Side::Far),
            hs(&[0.0, 1.0], 1.0, Side::Origin),
            hs(&[0.0, -1.0], 1.0, Side::Origin),
        ];
        assert_eq!(
            intersect_halfspaces(&flat).unwrap_err(),
            GeomError::Degenerate(DegenerateKind::LowerDimensional)
        );
        let parallel = vec![
            hs(&[1.0, 0.0], 1.0, Side::Origin),
            hs(&[-1.0, 0.0], 1.0, Side::Origin),
            hs(&[1.0, 0.0], 0.5, Side::Origin),
        ];
        assert_eq!(
            intersect_halfspaces(&parallel).unwrap_err(),
            GeomError::Degenerate(DegenerateKind::Unbounded)
        );
    }

    #[test]
    fn non_simple_apex_is_handled() {
        // Square pyramid: the apex lies on four facets.
        let s = 1.0 / 2f64.sqrt();
        let h = vec![
            hs(&[0.0, 0.0, -1.0], 0.0, Side::Origin),
            hs(&[s, 0.0, s], s, Side::Origin),
            hs(&[-s, 0.0, s], s, Side::Origin),
            hs(&[0.0, s, s], s, Side::Origin),
            hs(&[0.0, -s, s], s, Side::Origin),
        ];
        let p = intersect_halfspaces(&h).unwrap().polytope;
        assert_eq!(p.vertices().len(), 5);
        let cert = p.simplicity();
        assert!(!cert.simple);
        let apex = &p.vertices()[cert.witness.unwrap()];
        assert!((apex[2] - 1.0).abs() < 1e-12);
    }
}
