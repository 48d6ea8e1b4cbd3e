//! Planar line arrangements clipped to a square window, as a doubly
//! connected edge list.

use serde::{Deserialize, Serialize};

use super::{sample_hits, CellRecord, ProcessConfig, ProcessError, Sampler};
use crate::geom::{GeomError, Halfspace, Hyperplane, Polytope, Side, Vector};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrangementOptions {
    /// Side of the square window `[-s/2, s/2]^2`.
    pub window_side: f64,
    /// Inner-window margin per side, as a fraction of the window side.
    pub margin: f64,
}

impl Default for ArrangementOptions {
    fn default() -> Self {
        ArrangementOptions {
            window_side: 40.0,
            margin: 0.46,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HalfEdge {
    pub origin: usize,
    pub twin: usize,
    pub next: usize,
    /// Index of the supporting line, or `n_lines + k` for side `k` of the
    /// window.
    pub curve: usize,
}

#[derive(Debug, Clone)]
pub struct Arrangement {
    pub points: Vec<[f64; 2]>,
    pub half_edges: Vec<HalfEdge>,
    /// Bounded faces, each a counter-clockwise cycle of half-edge ids.
    pub faces: Vec<Vec<usize>>,
    pub n_lines: usize,
    pub lines: Vec<Hyperplane>,
}

impl Arrangement {
    pub fn n_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn n_edges(&self) -> usize {
        self.half_edges.len() / 2
    }

    /// `V - E + F` over bounded faces; 1 for a connected planar subdivision.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.faces.len() as i64
    }

    pub fn face_area(&self, face: &[usize]) -> f64 {
        signed_area(face.iter().map(|&h| self.points[self.half_edges[h].origin]))
    }

    /// Area centroid of a face.
    pub fn face_centroid(&self, face: &[usize]) -> [f64; 2] {
        let o = self.points[self.half_edges[face[0]].origin];
        let pts: Vec<[f64; 2]> = face
            .iter()
            .map(|&h| {
                let p = self.points[self.half_edges[h].origin];
                [p[0] - o[0], p[1] - o[1]]
            })
            .collect();
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for k in 0..pts.len() {
            let (p, q) = (pts[k], pts[(k + 1) % pts.len()]);
            let w = p[0] * q[1] - q[0] * p[1];
            a += w;
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
        [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
    }

    pub fn touches_window(&self, face: &[usize]) -> bool {
        face.iter().any(|&h| self.half_edges[h].curve >= self.n_lines)
    }
}

fn signed_area<I: Iterator<Item = [f64; 2]>>(pts: I) -> f64 {
    let pts: Vec<[f64; 2]> = pts.collect();
    // relative to the first vertex, or tiny faces far from the origin
    // lose their sign to cancellation
    let o = pts[0];
    let mut s = 0.0;
    for w in pts[1..].windows(2) {
        let (a, b) = ([w[0][0] - o[0], w[0][1] - o[1]], [w[1][0] - o[0], w[1][1] - o[1]]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

/// Parameter interval where the line meets `[-h, h]^2`.
fn clip(p0: [f64; 2], v: [f64; 2], h: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..2 {
        if v[k].abs() < 1e-300 {
            if p0[k].abs() > h {
                return None;
            }
            continue;
        }
        let a = (-h - p0[k]) / v[k];
        let b = (h - p0[k]) / v[k];
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    (lo < hi).then_some((lo, hi))
}

/// Position along the window boundary, counter-clockwise from `(-h, -h)`,
/// and the side it lies on.
fn perimeter_coord(x: [f64; 2], h: f64) -> (usize, f64) {
    let dist = [(x[1] + h).abs(), (x[0] - h).abs(), (x[1] - h).abs(), (x[0] + h).abs()];
    let side = (0..4).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
    let s = match side {
        0 => x[0] + h,
        1 => x[1] + h,
        2 => h - x[0],
        _ => h - x[1],
    };
    (side, s)
}

/// Builds the arrangement of `lines` inside `[-h, h]^2`.
pub fn planar_arrangement(lines: &[Hyperplane], h: f64) -> Arrangement {
    let n = lines.len();
    let mut points: Vec<[f64; 2]> = Vec::new();
    // per curve: (parameter, vertex)
    let mut on_curve: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n + 4];
    let base: Vec<([f64; 2], [f64; 2])> = lines
        .iter()
        .map(|l| {
            let u = [l.normal[0], l.normal[1]];
            ([l.offset * u[0], l.offset * u[1]], [-u[1], u[0]])
        })
        .collect();

    let corners = [[-h, -h], [h, -h], [h, h], [-h, h]];
    for (k, c) in corners.iter().enumerate() {
        points.push(*c);
        on_curve[n + k].push((0.0, k));
        on_curve[n + (k + 3) % 4].push((2.0 * h, k));
    }

    let mut clipped = vec![None; n];
    for i in 0..n {
        let (p0, v) = base[i];
        if let Some((lo, hi)) = clip(p0, v, h) {
            clipped[i] = Some((lo, hi));
            for s in [lo, hi] {
                let x = [p0[0] + s * v[0], p0[1] + s * v[1]];
                let id = points.len();
                points.push(x);
                on_curve[i].push((s, id));
                let (side, ps) = perimeter_coord(x, h);
                on_curve[n + side].push((ps, id));
            }
        }
    }

    for i in 0..n {
        let Some((lo_i, hi_i)) = clipped[i] else { continue };
        for j in i + 1..n {
            let Some((lo_j, hi_j)) = clipped[j] else { continue };
            let (ui, uj) = (&lines[i].normal, &lines[j].normal);
            let det = ui[0] * uj[1] - ui[1] * uj[0];
            if det.abs() < 1e-14 {
                continue;
            }
            let (ti, tj) = (lines[i].offset, lines[j].offset);
            let x = [(ti * uj[1] - tj * ui[1]) / det, (ui[0] * tj - uj[0] * ti) / det];
            let si = (x[0] - base[i].0[0]) * base[i].1[0] + (x[1] - base[i].0[1]) * base[i].1[1];
            let sj = (x[0] - base[j].0[0]) * base[j].1[0] + (x[1] - base[j].0[1]) * base[j].1[1];
            if si <= lo_i || si >= hi_i || sj <= lo_j || sj >= hi_j {
                continue;
            }
            let id = points.len();
            points.push(x);
            on_curve[i].push((si, id));
            on_curve[j].push((sj, id));
        }
    }

    let mut half_edges: Vec<HalfEdge> = Vec::new();
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
    for (c, list) in on_curve.iter_mut().enumerate() {
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in list.windows(2) {
            let (a, b) = (w[0].1, w[1].1);
            let e = half_edges.len();
            half_edges.push(HalfEdge {
                origin: a,
                twin: e + 1,
                next: usize::MAX,
                curve: c,
            });
            half_edges.push(HalfEdge {
                origin: b,
                twin: e,
                next: usize::MAX,
                curve: c,
            });
            outgoing[a].push(e);
            outgoing[b].push(e + 1);
        }
    }
    let angle = |e: usize| {
        let a = points[half_edges[e].origin];
        let b = points[half_edges[half_edges[e].twin].origin];
        (b[1] - a[1]).atan2(b[0] - a[0])
    };
    let mut position = vec![0usize; half_edges.len()];
    for out in outgoing.iter_mut() {
        out.sort_by(|&x, &y| angle(x).total_cmp(&angle(y)));
        for (k, &e) in out.iter().enumerate() {
            position[e] = k;
        }
    }
    for e in 0..half_edges.len() {
        let t = half_edges[e].twin;
        let b = half_edges[t].origin;
        let out = &outgoing[b];
        let k = position[t];
        half_edges[e].next = out[(k + out.len() - 1) % out.len()];
    }

    let mut seen = vec![false; half_edges.len()];
    let mut faces = Vec::new();
    for start in 0..half_edges.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut e = start;
        while !seen[e] {
            seen[e] = true;
            cycle.push(e);
            e = half_edges[e].next;
        }
        if signed_area(cycle.iter().map(|&h| points[half_edges[h].origin])) > 0.0 {
            faces.push(cycle);
        }
    }
    Arrangement {
        points,
        half_edges,
        faces,
        n_lines: n,
        lines: lines.to_vec(),
    }
}

/// Polygon of a bounded face that avoids the window boundary.
fn face_polytope(arr: &Arrangement, face: &[usize]) -> Result<Polytope, GeomError> {
    let he = &arr.half_edges;
    let k = face.len();
    let mut corners = Vec::new();
    let mut curves = Vec::new();
    for i in 0..k {
        let (prev, cur) = (he[face[(i + k - 1) % k]], he[face[i]]);
        if prev.curve != cur.curve {
            let p = arr.points[cur.origin];
            corners.push(Vector::from_column_slice(&p));
            curves.push(cur.curve);
        }
    }
    let mut c = Vector::zeros(2);
    for v in &corners {
        c += v;
    }
    c /= corners.len() as f64;
    let hs: Vec<Halfspace> = curves
        .iter()
        .map(|&l| {
            let line = &arr.lines[l];
            let side = if line.signed_distance(&c) < 0.0 {
                Side::Origin
            } else {
                Side::Far
            };
            line.halfspace(side)
        })
        .collect();
    let scale = corners.iter().map(|v| v.amax()).fold(1.0, f64::max);
    Polytope::assemble(2, hs, corners, 1e-9 * scale)
}

/// Cells of one arrangement realization whose centroid lies in the inner
/// window (minus sampling); every such cell avoids the window boundary.
pub fn planar_arrangement_cells(
    opts: ArrangementOptions,
    cfg: &ProcessConfig,
    rng: &mut Rng,
) -> Result<Vec<CellRecord>, ProcessError> {
    if cfg.d != 2 {
        return Err(ProcessError::Unsupported(format!(
            "line arrangements need d = 2, got d = {}",
            cfg.d
        )));
    }
    let h = opts.window_side / 2.0;
    let window = Polytope::cube(2, opts.window_side);
    let lines = sample_hits(&window, cfg, rng);
    let arr = planar_arrangement(&lines, h);
    if arr.euler_characteristic() != 1 {
        return Err(ProcessError::Geom(GeomError::Precondition(format!(
            "arrangement fails the Euler check (V - E + F = {})",
            arr.euler_characteristic()
        ))));
    }
    let inner = h - opts.margin * opts.window_side;
    let mut out = Vec::new();
    for face in &arr.faces {
        let c = arr.face_centroid(face);
        if c[0].abs().max(c[1].abs()) > inner + 1e-6 * h || arr.touches_window(face) {
            continue;
        }
        let p = face_polytope(&arr, face)?;
        let rec = CellRecord::new(p, &cfg.phi, Sampler::Arrangement, 1.0);
        if rec.cent.amax() <= inner {
            out.push(rec);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::DirectionalDistribution;
    use crate::geom::from_slice;
    use crate::rng;

    fn line(u: [f64; 2], t: f64) -> Hyperplane {
        Hyperplane::new(from_slice(&u), t).unwrap()
    }

    #[test]
    fn empty_window() {
        let arr = planar_arrangement(&[], 1.0);
        assert_eq!(arr.faces.len(), 1);
        assert_eq!(arr.euler_characteristic(), 1);
        assert!(arr.touches_window(&arr.faces[0]));
    }

    #[test]
    fn tic_tac_toe() {
        let ls = [line([1.0, 0.0], 1.0), line([1.0, 0.0], 0.0), line([0.0, 1.0], 1.0), line([0.0, 1.0], 0.0)];
        // shift the zero-offset lines slightly so each is strictly inside
        let ls: Vec<Hyperplane> = ls.iter().map(|l| line([l.normal[0], l.normal[1]], l.offset + 0.5)).collect();
        let arr = planar_arrangement(&ls, 3.0);
        assert_eq!(arr.faces.len(), 9);
        assert_eq!(arr.euler_characteristic(), 1);
        let inside: Vec<&Vec<usize>> = arr.faces.iter().filter(|f| !arr.touches_window(f)).collect();
        assert_eq!(inside.len(), 1);
        assert!((arr.face_area(inside[0]) - 1.0).abs() < 1e-12);
        let p = face_polytope(&arr, inside[0]).unwrap();
        assert_eq!(p.n_facets(), 4);
    }

    #[test]
    fn random_realizations_pass_euler_and_tile() {
        let cfg = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(2).unwrap(), 0).unwrap();
        for i in 0..5 {
            let mut r = rng::substream(11, 0, i);
            let lines = sample_hits(&Polytope::cube(2, 40.0), &cfg, &mut r);
            let arr = planar_arrangement(&lines, 20.0);
            assert_eq!(arr.euler_characteristic(), 1);
            let total: f64 = arr.faces.iter().map(|f| arr.face_area(f)).sum();
            assert!((total - 1600.0).abs() < 1e-8);
        }
    }

    #[test]
    fn near_triple_point_keeps_its_sliver() {
        // three lines meet within 3e-7 near the window edge; the sliver
        // between them has area about 2e-14
        let cfg = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(2).unwrap(), 0).unwrap();
        let mut r = rng::substream(1, rng::tag("arrangement"), 117013);
        let lines = sample_hits(&Polytope::cube(2, 40.0), &cfg, &mut r);
        assert_eq!(planar_arrangement(&lines, 20.0).euler_characteristic(), 1);
    }

    #[test]
    fn cells_are_bounded_and_inside() {
        let cfg = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(2).unwrap(), 0).unwrap();
        let opts = ArrangementOptions {
            window_side: 40.0,
            margin: 0.46,
        };
        let cells: Vec<CellRecord> = (0..20)
            .flat_map(|i| planar_arrangement_cells(opts, &cfg, &mut rng::substream(12, 0, i)).unwrap())
            .collect();
        assert!(!cells.is_empty());
        for c in &cells {
            assert!(c.f >= 3);
            assert!(c.cent.amax() <= 1.6 + 1e-12);
            assert!(c.polytope.vertices().iter().all(|v| v.amax() < 20.0));
        }
        let bad = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(3).unwrap(), 0).unwrap();
        assert!(planar_arrangement_cells(opts, &bad, &mut rng::substream(12, 0, 0)).is_err());
    }
}
