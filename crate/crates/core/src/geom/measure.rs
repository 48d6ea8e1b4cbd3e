//! Intrinsic volumes and isoperimetric ratios.
//!
//! Exact values come from `V_k(P) = sum_F vol_k(F) * gamma(F, P)` over the
//! `k`-faces `F`, with `gamma` the external angle; this is closed-form
//! whenever the normal cones have dimension at most 3. The Monte Carlo
//! route uses the Cauchy-Kubota formula over random `j`-subspaces.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::faces::{external_angle, face_measures, lattice};
use super::hull::{convex_hull, convex_hull_2d, polygon_area};
use super::linalg::affine_basis;
use super::{binomial, kappa, GeomError, Polytope, Vector};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Largest dimension with closed-form intrinsic volumes.
pub const EXACT_MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicVolumes {
    /// `V_0, ..., V_d`.
    pub values: Vec<f64>,
    pub method: VolumeMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
}

impl IntrinsicVolumes {
    pub fn dim(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn volume(&self) -> f64 {
        self.values[self.dim()]
    }

    /// `V_j^{1/j} / V_i^{1/i}`.
    pub fn ratio(&self, i: usize, j: usize) -> Result<f64, GeomError> {
        check_ratio_indices(i, j, self.dim())?;
        Ok(self.values[j].powf(1.0 / j as f64) / self.values[i].powf(1.0 / i as f64))
    }
}

fn check_ratio_indices(i: usize, j: usize, d: usize) -> Result<(), GeomError> {
    if i == 0 || i >= j || j > d {
        return Err(GeomError::Argument(format!(
            "isoperimetric ratio needs 1 <= i < j <= d, got i={i}, j={j}, d={d}"
        )));
    }
    Ok(())
}

/// Exact volume in any dimension.
pub fn volume(p: &Polytope) -> f64 {
    volume_and_centroid(p).0
}

pub(crate) fn volume_and_centroid(p: &Polytope) -> (f64, Vector) {
    if p.dim() == 2 {
        return polygon_area_centroid(p);
    }
    let lat = lattice(p, 1);
    let m = face_measures(p, &lat);
    let d = p.dim();
    (m.vol[d][0], m.centroid[d][0].clone())
}

fn polygon_area_centroid(p: &Polytope) -> (f64, Vector) {
    let order = p.polygon_cycle();
    let v = p.vertices();
    let o = &v[order[0]];
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for k in 1..order.len() - 1 {
        let p1 = &v[order[k]] - o;
        let p2 = &v[order[k + 1]] - o;
        let t = 0.5 * (p1[0] * p2[1] - p1[1] * p2[0]);
        a += t;
        cx += t * (p1[0] + p2[0]) / 3.0;
        cy += t * (p1[1] + p2[1]) / 3.0;
    }
    let c = Vector::from_column_slice(&[o[0] + cx / a, o[1] + cy / a]);
    (a.abs(), c)
}

fn perimeter(p: &Polytope) -> f64 {
    let order = p.polygon_cycle();
    let v = p.vertices();
    (0..order.len())
        .map(|k| (&v[order[k]] - &v[order[(k + 1) % order.len()]]).norm())
        .sum()
}

fn exact(p: &Polytope) -> Result<IntrinsicVolumes, GeomError> {
    let d = p.dim();
    if d > EXACT_MAX_DIM {
        return Err(GeomError::Unsupported(format!(
            "exact intrinsic volumes for d = {d} (available up to d = {EXACT_MAX_DIM})"
        )));
    }
    if d == 2 {
        let (area, _) = polygon_area_centroid(p);
        return Ok(IntrinsicVolumes {
            values: vec![1.0, perimeter(p) / 2.0, area],
            method: VolumeMethod::Exact,
            stderr: None,
        });
    }
    let lat = lattice(p, 1);
    let m = face_measures(p, &lat);
    let hs = p.halfspaces();
    let mut values = vec![0.0; d + 1];
    values[0] = 1.0;
    values[d] = m.vol[d][0];
    for k in 1..d {
        let mut s = 0.0;
        for (f, face) in lat.levels[k].iter().enumerate() {
            let normals: Vec<Vector> = face.facets.iter().map(|&i| hs[i].outward()).collect();
            s += m.vol[k][f] * external_angle(&normals)?;
        }
        values[k] = s;
    }
    Ok(IntrinsicVolumes {
        values,
        method: VolumeMethod::Exact,
        stderr: None,
    })
}

/// Volume of the orthogonal projection of `P` onto a random `j`-frame.
fn projected_volume(p: &Polytope, frame: &[Vector]) -> f64 {
    let j = frame.len();
    let pts: Vec<Vec<f64>> = p
        .vertices()
        .iter()
        .map(|v| frame.iter().map(|e| e.dot(v)).collect())
        .collect();
    match j {
        1 => {
            let (lo, hi) = pts
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[0]), hi.max(x[0])));
            hi - lo
        }
        2 => {
            let q: Vec<[f64; 2]> = pts.iter().map(|x| [x[0], x[1]]).collect();
            let h = convex_hull_2d(&q);
            polygon_area(&q, &h)
        }
        _ => {
            let q: Vec<Vector> = pts.into_iter().map(Vector::from_vec).collect();
            convex_hull(&q).map(|h| volume(&h.polytope)).unwrap_or(0.0)
        }
    }
}

fn random_frame<R: rand::Rng>(d: usize, j: usize, r: &mut R) -> Vec<Vector> {
    loop {
        let g: Vec<Vector> = (0..j)
            .map(|_| Vector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(r))))
            .collect();
        let basis = affine_basis(&Vector::zeros(d), g.iter(), 1e-9);
        if basis.len() == j {
            return basis;
        }
    }
}

fn monte_carlo(p: &Polytope, samples: usize, seed: u64) -> Result<IntrinsicVolumes, GeomError> {
    let d = p.dim();
    if samples < 2 {
        return Err(GeomError::Argument("Monte Carlo mode needs at least 2 samples".into()));
    }
    let mut values = vec![0.0; d + 1];
    let mut stderr = vec![0.0; d + 1];
    values[0] = 1.0;
    values[d] = volume(p);
    for j in 1..d {
        let factor = binomial(d, j) * kappa(d) / (kappa(j) * kappa(d - j));
        let mut r = rng::substream(seed, rng::tag("cauchy-kubota"), j as u64);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..samples {
            let frame = random_frame(d, j, &mut r);
            let v = projected_volume(p, &frame);
            sum += v;
            sum2 += v * v;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
        values[j] = factor * mean;
        stderr[j] = factor * (var / n).sqrt();
    }
    Ok(IntrinsicVolumes {
        values,
        method: VolumeMethod::MonteCarlo,
        stderr: Some(stderr),
    })
}

pub fn intrinsic_volumes(p: &Polytope, mode: VolumeMode) -> Result<IntrinsicVolumes, GeomError> {
    match mode {
        VolumeMode::Exact => exact(p),
        VolumeMode::MonteCarlo { samples, seed } => monte_carlo(p, samples, seed),
    }
}

/// Exact when available, otherwise Monte Carlo with a fixed seed.
pub fn intrinsic_volumes_auto(p: &Polytope) -> IntrinsicVolumes {
    exact(p).unwrap_or_else(|_| {
        monte_carlo(p, 20_000, 0).expect("sample count is valid")
    })
}

/// `(d-1)`-volume of every facet, in facet order.
pub fn facet_areas(p: &Polytope) -> Vec<f64> {
    let lat = lattice(p, 1);
    let m = face_measures(p, &lat);
    m.vol[p.dim() - 1].clone()
}

pub fn isoperimetric_ratio(p: &Polytope, i: usize, j: usize) -> Result<f64, GeomError> {
    check_ratio_indices(i, j, p.dim())?;
    intrinsic_volumes_auto(p).ratio(i, j)
}

/// The bound `kappa_j^{1/j} / kappa_i^{1/i}` on every `(i, j)` ratio.
pub fn isoperimetric_bound(i: usize, j: usize) -> f64 {
    kappa(j).powf(1.0 / j as f64) / kappa(i).powf(1.0 / i as f64)
}

/// `(i, j)` ratio of the unit ball in `R^d`, the sharp maximum.
pub fn ball_isoperimetric_ratio(d: usize, i: usize, j: usize) -> f64 {
    let v = |m: usize| binomial(d, m) * kappa(d) / kappa(d - m);
    v(j).powf(1.0 / j as f64) / v(i).powf(1.0 / i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cube_steiner_coefficients() {
        for s in [1.0, 2.5] {
            let iv = intrinsic_volumes(&Polytope::cube(3, s), VolumeMode::Exact).unwrap();
            let expect = [1.0, 3.0 * s, 3.0 * s * s, s * s * s];
            for (a, b) in iv.values.iter().zip(expect) {
                assert!((a - b).abs() < 1e-12 * b.max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn square_values_and_ratio() {
        let iv = intrinsic_volumes(&Polytope::cube(2, 3.0), VolumeMode::Exact).unwrap();
        assert!((iv.get(1) - 6.0).abs() < 1e-12);
        assert!((iv.get(2) - 9.0).abs() < 1e-12);
        assert!((iv.ratio(1, 2).unwrap() - 0.5).abs() < 1e-12);
        assert!(iv.ratio(2, 2).is_err());
    }

    #[test]
    fn tesseract_exact() {
        // V_k of the unit 4-cube is C(4, k).
        let iv = intrinsic_volumes(&Polytope::cube(4, 1.0), VolumeMode::Exact).unwrap();
        for (k, v) in iv.values.iter().enumerate() {
            assert!((v - binomial(4, k)).abs() < 1e-12, "V_{k} = {v}");
        }
    }

    #[test]
    fn regular_simplex_mean_width() {
        // Regular tetrahedron with edge a: V_1 = 6 a (pi - arccos(1/3)) / (2 pi).
        let pts: Vec<Vector> = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
            .iter()
            .map(|p| Vector::from_column_slice(p))
            .collect();
        let t = convex_hull(&pts).unwrap().polytope;
        let a = 8f64.sqrt();
        let iv = intrinsic_volumes(&t, VolumeMode::Exact).unwrap();
        let v1 = 6.0 * a * (PI - (1.0f64 / 3.0).acos()) / (2.0 * PI);
        assert!((iv.get(1) - v1).abs() < 1e-12);
        assert!((iv.get(3) - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_matches_exact_on_cube() {
        let c = Polytope::cube(3, 1.0);
        let mc = intrinsic_volumes(&c, VolumeMode::MonteCarlo { samples: 100_000, seed: 3 }).unwrap();
        let ex = intrinsic_volumes(&c, VolumeMode::Exact).unwrap();
        let se = mc.stderr.as_ref().unwrap();
        for j in 1..3 {
            assert!((mc.get(j) - ex.get(j)).abs() < 3.0 * se[j], "j={j}");
        }
    }

    #[test]
    fn polygon_ratio_tends_to_disk() {
        let r = isoperimetric_ratio(&Polytope::regular_polygon(720, 1.0), 1, 2).unwrap();
        assert!((r - ball_isoperimetric_ratio(2, 1, 2)).abs() < 1e-4);
        assert!((ball_isoperimetric_ratio(2, 1, 2) - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!(r < isoperimetric_bound(1, 2));
    }

    #[test]
    fn unsupported_beyond_four() {
        assert!(matches!(
            intrinsic_volumes(&Polytope::cube(5, 1.0), VolumeMode::Exact),
            Err(GeomError::Unsupported(_))
        ));
        let iv = intrinsic_volumes(&Polytope::cube(5, 1.0), VolumeMode::MonteCarlo { samples: 200, seed: 1 }).unwrap();
        assert!((iv.volume() - 1.0).abs() < 1e-12);
    }
}
