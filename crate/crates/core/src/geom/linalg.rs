//! Small dense helpers shared by the polytope routines.

use super::Vector;

/// Orthonormal basis of `span{ p - base : p in points }` by modified
/// Gram-Schmidt, dropping directions with residual below `tol`. Pivots on
/// the largest residual so nearly coincident points cannot set a noisy
/// direction.
pub(crate) fn affine_basis<'a, I>(base: &Vector, points: I, tol: f64) -> Vec<Vector>
where
    I: IntoIterator<Item = &'a Vector>,
{
    let mut rs: Vec<Vector> = points.into_iter().map(|p| p - base).collect();
    let mut basis: Vec<Vector> = Vec::new();
    while basis.len() < base.len() {
        let Some((k, n)) = rs
            .iter()
            .map(|r| r.norm())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if n <= tol {
            break;
        }
        let mut e = rs.swap_remove(k) / n;
        // second pass for stability
        for b in &basis {
            let c = e.dot(b);
            e.axpy(-c, b, 1.0);
        }
        e.normalize_mut();
        for r in rs.iter_mut() {
            let c = r.dot(&e);
            r.axpy(-c, &e, 1.0);
        }
        basis.push(e);
    }
    basis
}

pub(crate) fn affine_rank(points: &[&Vector], tol: f64) -> usize {
    match points.split_first() {
        None => 0,
        Some((first, rest)) => affine_basis(first, rest.iter().copied(), tol).len(),
    }
}

/// Distance from `x` to the affine hull `base + span(basis)`.
pub(crate) fn distance_to_flat(x: &Vector, base: &Vector, basis: &[Vector]) -> f64 {
    let mut r = x - base;
    for e in basis {
        let c = r.dot(e);
        r.axpy(-c, e, 1.0);
    }
    r.norm()
}

/// Fixed-width bitset over constraint indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    pub fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1u64 << (i % 64);
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::from_slice;

    #[test]
    fn near_duplicate_points_do_not_inflate_rank() {
        // coplanar points on a tilted plane, the first two 2e-9 apart
        let (u, v, c) = (from_slice(&[0.6, 0.3, -0.7]), from_slice(&[-0.2, 0.9, 0.4]), from_slice(&[0.1, 0.2, 0.3]));
        let pts: Vec<Vector> = [(0.0, 0.0), (2e-9, 1e-9), (0.5, -0.3), (-0.4, 0.1), (0.3, 0.6)]
            .iter()
            .map(|&(a, b)| &c + a * &u + b * &v)
            .collect();
        let refs: Vec<&Vector> = pts.iter().collect();
        assert_eq!(affine_rank(&refs, 1e-10), 2);
    }

    #[test]
    fn rank_of_collinear_points() {
        let a = from_slice(&[0.0, 0.0, 0.0]);
        let b = from_slice(&[1.0, 1.0, 1.0]);
        let c = from_slice(&[2.0, 2.0, 2.0]);
        let e = from_slice(&[0.0, 1.0, 0.0]);
        assert_eq!(affine_rank(&[&a, &b, &c], 1e-12), 1);
        assert_eq!(affine_rank(&[&a, &b, &c, &e], 1e-12), 2);
    }

    #[test]
    fn bitset_ops() {
        let mut a = Bits::new(130);
        let mut b = Bits::new(130);
        a.set(3);
        a.set(129);
        b.set(3);
        b.set(129);
        b.set(70);
        assert!(a.subset_of(&b));
        assert!(!b.subset_of(&a));
        assert_eq!(b.count(), 3);
        assert_eq!(a.and(&b).ones().collect::<Vec<_>>(), vec![3, 129]);
    }
}
