use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::dd::{self, Removal, TIGHT_TOL};
use super::linalg::affine_rank;
use super::{from_slice, unit_vector, GeomError, Halfspace, Side, Vector};
use crate::rng;

/// Bounded, full-dimensional convex polytope with irredundant facets.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Vector>,
    vertex_facets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicityCertificate {
    pub simple: bool,
    /// A vertex lying on more than `d` facets, if any.
    pub witness: Option<usize>,
}

impl Polytope {
    /// Intersects halfspaces; redundant ones are silently dropped.
    pub fn from_halfspaces(hs: &[Halfspace]) -> Result<Polytope, GeomError> {
        dd::intersect_halfspaces(hs).map(|i| i.polytope)
    }

    /// Builds the incidence structure for already irredundant facets and
    /// their vertex set.
    pub(crate) fn assemble(
        dim: usize,
        halfspaces: Vec<Halfspace>,
        vertices: Vec<Vector>,
        tol: f64,
    ) -> Result<Polytope, GeomError> {
        let mut vertex_facets = Vec::with_capacity(vertices.len());
        for v in &vertices {
            let mut fs = Vec::new();
            for (i, h) in halfspaces.iter().enumerate() {
                let s = h.violation(v);
                if s > tol {
                    return Err(GeomError::Precondition(format!(
                        "vertex violates facet {i} by {s:.3e}"
                    )));
                }
                if s.abs() <= tol {
                    fs.push(i);
                }
            }
            if fs.len() < dim {
                return Err(GeomError::IllConditioned { sigma: 0.0 });
            }
            vertex_facets.push(fs);
        }
        Ok(Polytope {
            dim,
            halfspaces,
            vertices,
            vertex_facets,
        })
    }

    /// Rebuilds a polytope from stored facets and vertices, recomputing the
    /// incidences and validating irredundancy.
    pub fn from_parts(halfspaces: Vec<Halfspace>, vertices: Vec<Vector>) -> Result<Polytope, GeomError> {
        let dim = halfspaces
            .first()
            .map(|h| h.dim())
            .ok_or(GeomError::TooFewHalfspaces { dim: 0, needed: 3, got: 0 })?;
        if halfspaces.len() < dim + 1 {
            return Err(GeomError::TooFewHalfspaces {
                dim,
                needed: dim + 1,
                got: halfspaces.len(),
            });
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(GeomError::DimensionMismatch { expected: dim, got: v.len() });
        }
        let scale = dd::data_scale(&halfspaces);
        let p = Polytope::assemble(dim, halfspaces, vertices, TIGHT_TOL * scale)?;
        for j in 0..p.n_facets() {
            let members: Vec<&Vector> = p.facet_vertices(j).into_iter().map(|v| &p.vertices[v]).collect();
            if affine_rank(&members, TIGHT_TOL * scale) != dim - 1 {
                return Err(GeomError::Precondition(format!("halfspace {j} is not facet-defining")));
            }
        }
        Ok(p)
    }

    /// Cube `[-side/2, side/2]^d`.
    pub fn cube(d: usize, side: f64) -> Polytope {
        let lo = vec![-side / 2.0; d];
        let hi = vec![side / 2.0; d];
        Polytope::axis_box(&lo, &hi)
    }

    /// Axis-parallel box `prod [lo_k, hi_k]`.
    pub fn axis_box(lo: &[f64], hi: &[f64]) -> Polytope {
        let d = lo.len();
        let mut hs = Vec::with_capacity(2 * d);
        for k in 0..d {
            let e = unit_vector(d, k);
            hs.push(Halfspace::from_inequality(&e, hi[k]).expect("unit normal"));
            hs.push(Halfspace::from_inequality(&(-&e), -lo[k]).expect("unit normal"));
        }
        Polytope::from_halfspaces(&hs).expect("nonempty box")
    }

    /// Regular `n`-gon with facet normals at angles `2 pi k / n` and the
    /// given inradius, centred at the origin.
    pub fn regular_polygon(n: usize, inradius: f64) -> Polytope {
        let hs: Vec<Halfspace> = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Halfspace::new(from_slice(&[a.cos(), a.sin()]), inradius, Side::Origin)
                    .expect("unit normal")
            })
            .collect();
        Polytope::from_halfspaces(&hs).expect("regular polygon")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn vertex_facets(&self) -> &[Vec<usize>] {
        &self.vertex_facets
    }

    /// Number of facets `f(P)`.
    pub fn n_facets(&self) -> usize {
        self.halfspaces.len()
    }

    /// Magnitude used to scale tolerances.
    pub fn scale(&self) -> f64 {
        let r = self.vertices.iter().map(|v| v.amax()).fold(0.0, f64::max);
        let s = dd::data_scale(&self.halfspaces).max(r);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn tolerance(&self) -> f64 {
        TIGHT_TOL * self.scale()
    }

    pub fn facet_vertices(&self, j: usize) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertex_facets[v].contains(&j))
            .collect()
    }

    /// Facets sharing at least one vertex with facet `j`.
    pub fn facet_neighbors(&self, j: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .vertex_facets
            .iter()
            .filter(|fs| fs.contains(&j))
            .flat_map(|fs| fs.iter().copied())
            .filter(|&i| i != j)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Support function `h(P, u)`.
    pub fn support(&self, u: &Vector) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of a vertex attaining `h(P, u)` (lowest index on ties).
    pub fn support_vertex(&self, u: &Vector) -> usize {
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let s = v.dot(u);
            if s > val {
                val = s;
                best = i;
            }
        }
        best
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x, tol))
    }

    pub fn simplicity(&self) -> SimplicityCertificate {
        let witness = self.vertex_facets.iter().position(|fs| fs.len() > self.dim);
        SimplicityCertificate {
            simple: witness.is_none(),
            witness,
        }
    }

    pub fn is_simple(&self) -> bool {
        self.simplicity().simple
    }

    /// Largest vertex norm, i.e. the radius of the smallest origin-centred
    /// ball containing `P`.
    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                m = m.max((a - b).norm());
            }
        }
        m
    }

    pub fn vertex_mean(&self) -> Vector {
        let mut c = Vector::zeros(self.dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    /// Image under `x -> t x + shift` for `t > 0`.
    pub fn transformed(&self, t: f64, shift: &Vector) -> Polytope {
        assert!(t > 0.0 && t.is_finite(), "scale factor must be positive");
        Polytope {
            dim: self.dim,
            halfspaces: self.halfspaces.iter().map(|h| h.transformed(t, shift)).collect(),
            vertices: self.vertices.iter().map(|v| v * t + shift).collect(),
            vertex_facets: self.vertex_facets.clone(),
        }
    }

    pub fn translated(&self, shift: &Vector) -> Polytope {
        self.transformed(1.0, shift)
    }

    pub fn scaled(&self, t: f64) -> Polytope {
        self.transformed(t, &Vector::zeros(self.dim))
    }

    /// Vertex indices in counter-clockwise order (planar polytopes only).
    pub fn polygon_cycle(&self) -> Vec<usize> {
        assert_eq!(self.dim, 2, "polygon_cycle needs d = 2");
        let c = self.vertex_mean();
        let mut idx: Vec<usize> = (0..self.vertices.len()).collect();
        let ang: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| (v[1] - c[1]).atan2(v[0] - c[0]))
            .collect();
        idx.sort_by(|&a, &b| ang[a].total_cmp(&ang[b]));
        idx
    }

    /// `P` with facet `j` deleted, or `None` when that makes it unbounded.
    /// Computed locally from the region that facet `j` cut off.
    pub fn without_facet(&self, j: usize) -> Result<Option<Polytope>, GeomError> {
        match dd::removal_region(self, j)? {
            Removal::Unbounded => Ok(None),
            Removal::Bounded { new_vertices, .. } => Ok(Some(self.rebuild_without(j, new_vertices)?)),
        }
    }

    pub(crate) fn rebuild_without(&self, j: usize, new_vertices: Vec<Vector>) -> Result<Polytope, GeomError> {
        let hs: Vec<Halfspace> = self
            .halfspaces
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, h)| h.clone())
            .collect();
        let mut verts = Vec::with_capacity(self.vertices.len() + new_vertices.len());
        for (v, fs) in self.vertices.iter().zip(&self.vertex_facets) {
            if !fs.contains(&j) {
                verts.push(v.clone());
            } else {
                // A degenerate vertex survives if the other facets still pin it.
                let normals: Vec<Vector> = fs
                    .iter()
                    .filter(|&&i| i != j)
                    .map(|&i| self.halfspaces[i].outward())
                    .collect();
                if normals.len() >= self.dim && dd::min_singular(&normals) > 1e-10 {
                    verts.push(v.clone());
                }
            }
        }
        verts.extend(new_vertices);
        let tol = self.tolerance();
        Polytope::assemble(self.dim, hs, verts, tol)
    }

    /// Keeps only the listed facets, recomputing from scratch.
    pub fn restricted(&self, keep: &[usize]) -> Result<Polytope, GeomError> {
        let hs: Vec<Halfspace> = keep.iter().map(|&i| self.halfspaces[i].clone()).collect();
        let out = dd::intersect_halfspaces(&hs)?;
        if !out.redundant.is_empty() {
            return Err(GeomError::Precondition(
                "a kept facet became redundant".into(),
            ));
        }
        Ok(out.polytope)
    }

    /// Perturbs offsets by a seeded jitter of size `magnitude` (relative to
    /// the polytope scale) when the polytope is not simple.
    pub fn into_simple_position(self, seed: u64, magnitude: f64) -> Result<Polytope, GeomError> {
        if self.is_simple() {
            return Ok(self);
        }
        let scale = self.scale();
        for attempt in 0..16u64 {
            let mut r = rng::substream(seed, rng::tag("simple-position"), attempt);
            let hs: Vec<Halfspace> = self
                .halfspaces
                .iter()
                .map(|h| {
                    let eps: f64 = r.random_range(-1.0..1.0) * magnitude * scale;
                    Halfspace::from_inequality(&h.outward(), h.rhs() + eps).expect("unit normal")
                })
                .collect();
            if let Ok(out) = dd::intersect_halfspaces(&hs) {
                if out.redundant.is_empty() && out.polytope.is_simple() {
                    return Ok(out.polytope);
                }
            }
        }
        Err(GeomError::IllConditioned { sigma: 0.0 })
    }
}
