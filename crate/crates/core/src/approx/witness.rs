//! Explicit `n`-facet polytopes inside the unit ball whose facets can each
//! be perturbed within a set of positive hyperplane measure.
//!
//! Big caps of radius `r/q` are packed (saturated) on `C ∪ -C`, where `C`
//! is a well-spread cap of `φ`. Inside each big cap, small caps of radius
//! `ρ` are packed by farthest-point insertion. A hyperplane `H(v, t)` with
//! `v` within `ρ/2` of a small-cap center and `t` in the top `ρ²/8` slice
//! always supports a facet, because the small caps are `2ρ` apart. The
//! big caps saturate `C ∪ -C`, whose two opposite cones span `R^d`, so
//! every such choice is bounded; the offsets are scaled to land in the
//! unit ball.

use serde::{Deserialize, Serialize};

use super::ApproxError;
use crate::direction::{cap_area, sample_cap, DirectionalDistribution};
use crate::geom::{convex_hull, intersect_halfspaces, Halfspace, Polytope, Side, Vector};
use crate::rng::Rng;
use rand::Rng as _;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WitnessOptions {
    /// Big caps have radius `r / cap_divisor`.
    pub cap_divisor: f64,
    /// Fixes `ρ = rho_constant · r · n^{-1/(d-1)}`; searched when absent.
    pub rho_constant: Option<f64>,
    /// Candidate points per big cap for the small-cap packing.
    pub cloud: usize,
    pub seed: u64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            cap_divisor: 12.0,
            rho_constant: None,
            cloud: 3000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapPacking {
    pub centers: Vec<Vector>,
    pub radius: f64,
    /// Insertion attempts made before saturation was declared.
    pub attempts: usize,
}

/// Random sequential packing of disjoint caps of chordal radius `radius`
/// with centers in `C(center, r) ∪ -C(center, r)`. Saturation is declared
/// after `10 · max(m, 10)` consecutive rejections, `m` the current count.
pub fn cap_packing(center: &Vector, r: f64, radius: f64, rng: &mut Rng) -> CapPacking {
    let mut centers: Vec<Vector> = Vec::new();
    let mut rejected = 0usize;
    let mut attempts = 0usize;
    while rejected < 10 * centers.len().max(10) {
        attempts += 1;
        let mut y = sample_cap(center, r, rng);
        if rng.random::<bool>() {
            y = -y;
        }
        if centers.iter().all(|c| (c - &y).norm() > 2.0 * radius) {
            centers.push(y);
            rejected = 0;
        } else {
            rejected += 1;
        }
    }
    CapPacking {
        centers,
        radius,
        attempts,
    }
}

/// One perturbation set `S_i = {H(v, t) : v ∈ C(z, ρ/2), t ∈ [t_lo, t_hi]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSet {
    pub center: Vector,
    pub cap_radius: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// `c5 · H^{d-1}(C(z, ρ/2)) · (t_hi - t_lo)`, a lower bound on `μ(S_i)`.
    pub measure: f64,
}

impl SliceSet {
    pub fn sample(&self, rng: &mut Rng) -> Halfspace {
        let v = sample_cap(&self.center, self.cap_radius, rng);
        let t = rng.random_range(self.t_lo..=self.t_hi);
        Halfspace::new(v, t, Side::Origin).expect("unit normal and t > 0")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub d: usize,
    pub n: usize,
    pub r: f64,
    pub c5: f64,
    pub cap_center: Vector,
    pub big_caps: CapPacking,
    pub rho: f64,
    /// Any choice from the sets lies in `B(0, containment)` before rescaling.
    pub containment: f64,
    pub sets: Vec<SliceSet>,
}

impl Witness {
    /// `∩ H_i^-` for one hyperplane drawn from each set.
    pub fn draw(&self, rng: &mut Rng) -> Result<Polytope, ApproxError> {
        let hs: Vec<Halfspace> = self.sets.iter().map(|s| s.sample(rng)).collect();
        Ok(intersect_halfspaces(&hs)?.polytope)
    }

    /// `prod_i μ(S_i)` in log form.
    pub fn log_measure_product(&self) -> f64 {
        self.sets.iter().map(|s| s.measure.ln()).sum()
    }

    /// `c · ρ^{d+1} / containment` shared by every set.
    pub fn set_measure(&self) -> f64 {
        self.sets[0].measure
    }
}

/// Candidate centers for small caps: uniform on `C(y, big)` within `C(side, r)`.
fn candidate_cloud(y: &Vector, side: &Vector, r: f64, big: f64, cloud: usize, rng: &mut Rng) -> Vec<Vector> {
    let mut pts = Vec::with_capacity(cloud);
    let mut tries = 0;
    while pts.len() < cloud && tries < 50 * cloud {
        tries += 1;
        let z = sample_cap(y, big, rng);
        if (&z - side).norm() <= r {
            pts.push(z);
        }
    }
    pts
}

/// Farthest-point packing of `want` centers `2ρ` apart, each within
/// `big - ρ` of `y` and `r - ρ/2` of `side`.
fn small_caps(y: &Vector, side: &Vector, r: f64, big: f64, rho: f64, want: usize, cloud: &[Vector]) -> Option<Vec<Vector>> {
    let pts: Vec<&Vector> = cloud
        .iter()
        .filter(|z| (*z - y).norm() <= big - rho && (*z - side).norm() <= r - rho / 2.0)
        .collect();
    if pts.is_empty() {
        return None;
    }
    let first = (0..pts.len())
        .min_by(|&a, &b| (pts[a] - y).norm().total_cmp(&(pts[b] - y).norm()))
        .unwrap();
    let mut chosen = vec![pts[first].clone()];
    let mut gap: Vec<f64> = pts.iter().map(|p| (*p - pts[first]).norm()).collect();
    while chosen.len() < want {
        let (i, g) = gap
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, g)| (i, *g))
            .unwrap();
        if g <= 2.0 * rho {
            return None;
        }
        for (k, p) in pts.iter().enumerate() {
            gap[k] = gap[k].min((*p - pts[i]).norm());
        }
        chosen.push(pts[i].clone());
    }
    Some(chosen)
}

/// Builds the `n`-facet witness for `φ`. Fails when `φ` has no
/// well-spread cap, or when `n` is below the number of big caps.
pub fn witness_construction(
    phi: &DirectionalDistribution,
    n: usize,
    opts: &WitnessOptions,
) -> Result<Witness, ApproxError> {
    let d = phi.dim();
    let w = phi
        .well_spread_witness()
        .ok_or_else(|| ApproxError::Argument("φ has no well-spread cap".into()))?;
    let c = Vector::from_vec(w.cap_center.clone());
    let r = w.r;
    let big = r / opts.cap_divisor;
    // the big packing depends on (φ, r, q) only, so a sweep over n shares it
    let packing = cap_packing(&c, r, big, &mut crate::rng::substream(opts.seed, crate::rng::tag("witness"), 0));
    let mut rng = crate::rng::substream(opts.seed, crate::rng::tag("witness"), n as u64);
    let m = packing.centers.len();
    if n < m {
        return Err(ApproxError::Packing(format!(
            "n = {n} is below the {m} big caps; raise n or lower the cap divisor"
        )));
    }
    let per = n.div_ceil(m);
    let scale = r * (n as f64).powf(-1.0 / (d as f64 - 1.0));

    let sides: Vec<Vector> = packing
        .centers
        .iter()
        .map(|y| if y.dot(&c) >= 0.0 { c.clone() } else { -&c })
        .collect();
    let clouds: Vec<Vec<Vector>> = packing
        .centers
        .iter()
        .zip(&sides)
        .map(|(y, side)| candidate_cloud(y, side, r, big, opts.cloud, &mut rng))
        .collect();
    let attempt = |rho: f64| -> Option<Vec<Vec<Vector>>> {
        (0..m)
            .map(|i| small_caps(&packing.centers[i], &sides[i], r, big, rho, per, &clouds[i]))
            .collect()
    };
    let (rho, mut groups) = match opts.rho_constant {
        Some(k) => {
            let rho = k * scale;
            if !(rho > 0.0 && rho <= big) {
                return Err(ApproxError::Argument(format!("ρ = {rho} outside (0, r/q = {big}]")));
            }
            let g = attempt(rho).ok_or_else(|| {
                ApproxError::Packing(format!("cannot place {per} caps of radius {rho} in every big cap"))
            })?;
            (rho, g)
        }
        None => {
            let mut rho = big / 2.0;
            loop {
                if let Some(g) = attempt(rho) {
                    break (rho, g);
                }
                rho *= 0.97;
                if rho < 1e-6 * big {
                    return Err(ApproxError::Packing(format!("no small-cap radius fits {per} caps")));
                }
            }
        }
    };
    let mut excess = m * per - n;
    for g in groups.iter_mut().rev() {
        if excess == 0 {
            break;
        }
        g.pop();
        excess -= 1;
    }
    let z: Vec<Vector> = groups.into_iter().flatten().collect();

    // Every big cap holds a center within r/q of its own center, so the
    // big-cap hull bounds the support of the small-cap centers from below.
    let hull = convex_hull(&packing.centers)?.polytope;
    let inradius = hull
        .halfspaces()
        .iter()
        .map(|h| h.rhs() / h.outward().norm())
        .fold(f64::INFINITY, f64::min);
    let margin = inradius - big - rho / 2.0;
    if !(margin > 0.0) {
        return Err(ApproxError::Packing(format!(
            "big caps do not surround the origin (inradius {inradius}, cap radius {big})"
        )));
    }
    let containment = (1.0 + 1e-9) / margin;
    let t_hi = 1.0 / containment;
    let t_lo = (1.0 - rho * rho / 8.0) / containment;
    let measure = w.c5 * cap_area(d, rho / 2.0) * (t_hi - t_lo);
    let sets = z
        .into_iter()
        .map(|center| SliceSet {
            center,
            cap_radius: rho / 2.0,
            t_lo,
            t_hi,
            measure,
        })
        .collect();
    Ok(Witness {
        d,
        n,
        r,
        c5: w.c5,
        cap_center: c,
        big_caps: packing,
        rho,
        containment,
        sets,
    })
}

/// Largest `ρ / (r n^{-1/(d-1)})` that packs at every `n` in `ns`, so one
/// constant serves a whole sweep.
pub fn feasible_rho_constant(
    phi: &DirectionalDistribution,
    ns: &[usize],
    opts: &WitnessOptions,
) -> Result<f64, ApproxError> {
    let d = phi.dim() as f64;
    let mut k = f64::INFINITY;
    for &n in ns {
        let w = witness_construction(phi, n, &WitnessOptions { rho_constant: None, ..*opts })?;
        k = k.min(w.rho / (w.r * (n as f64).powf(-1.0 / (d - 1.0))));
    }
    // farthest-point packing is not monotone in ρ; shrink until all fit
    for _ in 0..100 {
        k *= 0.97;
        let fixed = WitnessOptions { rho_constant: Some(k), ..*opts };
        if ns.iter().all(|&n| witness_construction(phi, n, &fixed).is_ok()) {
            return Ok(k);
        }
    }
    Err(ApproxError::Packing("no common ρ constant fits every n".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats::log_log_fit;

    #[test]
    fn packing_is_disjoint_and_saturated() {
        let c = Vector::from_column_slice(&[1.0, 0.0, 0.0]);
        let mut r = rng::substream(41, 0, 0);
        let p = cap_packing(&c, 0.5, 0.1, &mut r);
        assert!(p.centers.len() > 4);
        for (i, a) in p.centers.iter().enumerate() {
            assert!((a.dot(&c).abs() - 1.0).abs() < 0.5 * 0.5 / 2.0 + 1e-12);
            for b in &p.centers[i + 1..] {
                assert!((a - b).norm() > 0.2);
            }
        }
    }

    #[test]
    fn draws_have_n_facets_in_unit_ball() {
        for d in [2usize, 3] {
            let phi = DirectionalDistribution::isotropic(d).unwrap();
            let opts = WitnessOptions {
                cap_divisor: 3.0,
                ..Default::default()
            };
            let w = witness_construction(&phi, 16, &opts).unwrap();
            assert_eq!(w.sets.len(), 16);
            let mut r = rng::substream(42, 0, d as u64);
            for _ in 0..50 {
                let p = w.draw(&mut r).unwrap();
                assert_eq!(p.n_facets(), 16);
                assert!(p.circumradius() < 1.0);
            }
        }
    }

    #[test]
    fn measure_exponent() {
        let d = 3;
        let phi = DirectionalDistribution::isotropic(d).unwrap();
        let ns = [16usize, 32, 64];
        let base = WitnessOptions {
            cap_divisor: 3.0,
            ..Default::default()
        };
        let k = feasible_rho_constant(&phi, &ns, &base).unwrap();
        let opts = WitnessOptions {
            rho_constant: Some(k),
            ..base
        };
        let mu: Vec<f64> = ns
            .iter()
            .map(|&n| witness_construction(&phi, n, &opts).unwrap().set_measure())
            .collect();
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let fit = log_log_fit(&x, &mu);
        assert!((fit.slope + 2.0).abs() < 0.2, "{fit:?}");
    }

    #[test]
    fn too_few_facets_is_an_error() {
        let phi = DirectionalDistribution::isotropic(3).unwrap();
        assert!(matches!(
            witness_construction(&phi, 4, &WitnessOptions::default()),
            Err(ApproxError::Packing(_))
        ));
    }
}
