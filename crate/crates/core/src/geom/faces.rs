//! Face lattice from vertex/facet incidences, face volumes and centroids by
//! pyramid decomposition, and external angles of normal cones.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::linalg::{affine_basis, affine_rank, distance_to_flat};
use super::{GeomError, Polytope, Vector};

pub(crate) struct Face {
    pub verts: Vec<usize>,
    pub facets: Vec<usize>,
    pub children: Vec<usize>,
}

/// `levels[k]` holds the `k`-faces for `min_level <= k <= d`.
pub(crate) struct Lattice {
    pub levels: Vec<Vec<Face>>,
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub(crate) fn lattice(p: &Polytope, min_level: usize) -> Lattice {
    let d = p.dim();
    let nf = p.n_facets();
    let tol = p.tolerance();
    let tight: Vec<Vec<usize>> = (0..nf).map(|j| p.facet_vertices(j)).collect();
    let vf = p.vertex_facets();

    let mut levels: Vec<Vec<Face>> = (0..=d).map(|_| Vec::new()).collect();
    levels[d].push(Face {
        verts: (0..p.vertices().len()).collect(),
        facets: Vec::new(),
        children: (0..nf).collect(),
    });
    levels[d - 1] = (0..nf)
        .map(|j| Face {
            verts: tight[j].clone(),
            facets: vec![j],
            children: Vec::new(),
        })
        .collect();

    for k in (min_level.max(1) + 1..d).rev() {
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut next: Vec<Face> = Vec::new();
        for g in 0..levels[k].len() {
            let mut cand: Vec<usize> = levels[k][g]
                .verts
                .iter()
                .flat_map(|&v| vf[v].iter().copied())
                .filter(|i| !levels[k][g].facets.contains(i))
                .collect();
            cand.sort_unstable();
            cand.dedup();
            let mut children = Vec::new();
            for i in cand {
                let s = intersect_sorted(&levels[k][g].verts, &tight[i]);
                if s.len() < k {
                    continue;
                }
                let id = match index.get(&s) {
                    Some(&id) => id,
                    None => {
                        let pts: Vec<&Vector> = s.iter().map(|&v| &p.vertices()[v]).collect();
                        if affine_rank(&pts, tol) != k - 1 {
                            continue;
                        }
                        let mut facets = vf[s[0]].clone();
                        for &v in &s[1..] {
                            facets = intersect_sorted(&facets, &vf[v]);
                        }
                        next.push(Face {
                            verts: s.clone(),
                            facets,
                            children: Vec::new(),
                        });
                        index.insert(s, next.len() - 1);
                        next.len() - 1
                    }
                };
                if !children.contains(&id) {
                    children.push(id);
                }
            }
            levels[k][g].children = children;
        }
        levels[k - 1] = next;
    }
    Lattice { levels }
}

/// `k`-volumes and centroids of every face at levels `1..=d`; the lattice
/// must have been built down to level 1.
pub(crate) struct FaceMeasures {
    pub vol: Vec<Vec<f64>>,
    pub centroid: Vec<Vec<Vector>>,
}

pub(crate) fn face_measures(p: &Polytope, lat: &Lattice) -> FaceMeasures {
    let d = p.dim();
    let tol = p.tolerance();
    let pts = p.vertices();
    let mut vol: Vec<Vec<f64>> = vec![Vec::new(); d + 1];
    let mut centroid: Vec<Vec<Vector>> = vec![Vec::new(); d + 1];
    for face in &lat.levels[1] {
        let (v, c) = segment_measure(pts, &face.verts);
        vol[1].push(v);
        centroid[1].push(c);
    }
    for k in 2..=d {
        let bases: Vec<(Vector, Vec<Vector>)> = lat.levels[k - 1]
            .iter()
            .map(|f| {
                let base = pts[f.verts[0]].clone();
                let basis = affine_basis(&base, f.verts[1..].iter().map(|&v| &pts[v]), tol);
                (base, basis)
            })
            .collect();
        for face in &lat.levels[k] {
            let mut c = Vector::zeros(d);
            for &v in &face.verts {
                c += &pts[v];
            }
            c /= face.verts.len() as f64;
            let mut total = 0.0;
            let mut moment = Vector::zeros(d);
            for &ch in &face.children {
                let (base, basis) = &bases[ch];
                let h = distance_to_flat(&c, base, basis);
                let pv = h * vol[k - 1][ch] / k as f64;
                total += pv;
                let pc = &c + (&centroid[k - 1][ch] - &c) * (k as f64 / (k as f64 + 1.0));
                moment.axpy(pv, &pc, 1.0);
            }
            let cen = if total > 0.0 { moment / total } else { c };
            vol[k].push(total);
            centroid[k].push(cen);
        }
    }
    FaceMeasures { vol, centroid }
}

fn segment_measure(pts: &[Vector], verts: &[usize]) -> (f64, Vector) {
    let mut best = (0.0, verts[0], verts[0]);
    for (i, &a) in verts.iter().enumerate() {
        for &b in &verts[i + 1..] {
            let l = (&pts[a] - &pts[b]).norm();
            if l > best.0 {
                best = (l, a, b);
            }
        }
    }
    (best.0, (&pts[best.1] + &pts[best.2]) * 0.5)
}

/// Solid angle of the triangular cone spanned by unit vectors.
fn triangle_solid_angle(a: &Vector, b: &Vector, c: &Vector) -> f64 {
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * det.abs().atan2(den)
}

/// Fraction of the unit sphere of `span(normals)` covered by the cone the
/// unit `normals` generate: the external angle of the face they belong to.
pub(crate) fn external_angle(normals: &[Vector]) -> Result<f64, GeomError> {
    let zero = Vector::zeros(normals[0].len());
    let basis = affine_basis(&zero, normals.iter(), 1e-9);
    match basis.len() {
        1 => Ok(0.5),
        2 => {
            let mut theta: f64 = 0.0;
            for (i, a) in normals.iter().enumerate() {
                for b in &normals[i + 1..] {
                    theta = theta.max(a.dot(b).clamp(-1.0, 1.0).acos());
                }
            }
            Ok(theta / (2.0 * PI))
        }
        3 => {
            let g: Vec<Vector> = normals
                .iter()
                .map(|n| {
                    let v = Vector::from_iterator(3, basis.iter().map(|e| e.dot(n)));
                    let l = v.norm();
                    v / l
                })
                .collect();
            let mut axis = Vector::zeros(3);
            for v in &g {
                axis += v;
            }
            let axis = axis.normalize();
            let seed = if axis[0].abs() < 0.9 {
                Vector::from_column_slice(&[1.0, 0.0, 0.0])
            } else {
                Vector::from_column_slice(&[0.0, 1.0, 0.0])
            };
            let e1 = (&seed - &axis * axis.dot(&seed)).normalize();
            let e2 = axis.cross(&e1);
            let mut order: Vec<(f64, usize)> = g
                .iter()
                .enumerate()
                .map(|(i, v)| (v.dot(&e2).atan2(v.dot(&e1)), i))
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut omega = 0.0;
            for w in 1..order.len() - 1 {
                omega += triangle_solid_angle(&g[order[0].1], &g[order[w].1], &g[order[w + 1].1]);
            }
            Ok(omega / (4.0 * PI))
        }
        r => Err(GeomError::Unsupported(format!(
            "closed-form external angle for a {r}-dimensional normal cone"
        ))),
    }
}
