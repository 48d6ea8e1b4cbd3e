//! Few-facet approximation of polytopes: circumscription, greedy facet
//! pruning with certified Hausdorff distance, removable facets, normal-cone
//! umbrellas, and the elongation and isoperimetric-continuity probes.

mod witness;

pub use witness::{
    cap_packing, feasible_rho_constant, witness_construction, CapPacking, SliceSet, Witness, WitnessOptions,
};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::direction::DirectionalDistribution;
use crate::geom::{
    distance_to_hull, hausdorff_nested, intersect_halfspaces, intrinsic_volumes_auto, DegenerateKind, GeomError,
    Halfspace, Polytope, Vector,
};
use crate::rng::Rng;
use crate::stats::{log_log_fit, LineFit};
use crate::Estimate;

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("polytope is not simple (vertex {vertex} lies on more than d facets)")]
    NotSimple { vertex: usize },
    #[error("no bounded removal left at step {step} with {remaining} facets")]
    Unbounded { step: usize, remaining: usize },
    #[error("{m} directions do not bound the approximation")]
    CannotBound { m: usize },
    #[error("cap packing infeasible: {0}")]
    Packing(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Greedy deletion record; indices refer to the input polytope's facets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PruneTrace {
    pub schedule: Vec<usize>,
    /// `d_H(P_current, P_previous)` for each step.
    pub dh_per_step: Vec<f64>,
    /// `Φ(P_current) - Φ(P_previous)` for each step.
    pub phi_per_step: Vec<f64>,
    /// `d_H(P, P_current)` after each step.
    pub dh_total: Vec<f64>,
}

impl PruneTrace {
    /// CSV with columns `k, d_H, Φ` (facets left, distance to the input,
    /// content), starting from the input itself.
    pub fn to_csv(&self, n: usize, phi0: f64) -> String {
        let mut s = format!("k,d_H,phi\n{n},0,{phi0}\n");
        let mut phi = phi0;
        for (step, (dh, dp)) in self.dh_total.iter().zip(&self.phi_per_step).enumerate() {
            phi += dp;
            s.push_str(&format!("{},{dh},{phi}\n", n - step - 1));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct PruneResult {
    /// Kept facet indices of the input, ascending.
    pub kept: Vec<usize>,
    pub polytope: Polytope,
    /// Certified `d_H(P, P_I)`, recomputed from scratch.
    pub dh: f64,
    pub trace: PruneTrace,
}

struct Candidate {
    local: f64,
    new_vertices: Vec<Vector>,
    region: Vec<usize>,
}

fn vkey(v: &Vector) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// Greedy reverse deletion: repeatedly drop the facet whose removal
/// increases `d_H(P, P_current)` least (ties: smaller local increase, then
/// lower index), never unbounding the polytope. Returns snapshots at every
/// requested size in `ks`, largest first.
pub fn prune_path(p: &Polytope, ks: &[usize], phi: &DirectionalDistribution) -> Result<Vec<PruneResult>, ApproxError> {
    let d = p.dim();
    let n = p.n_facets();
    let mut targets: Vec<usize> = ks.to_vec();
    targets.sort_unstable_by(|a, b| b.cmp(a));
    targets.dedup();
    if let Some(&k) = targets.last() {
        if k < d + 1 {
            return Err(ApproxError::Argument(format!("k must be >= d + 1 = {}, got {k}", d + 1)));
        }
    }
    if targets.first().is_some_and(|&k| k > n) {
        return Err(ApproxError::Argument(format!("k exceeds the {n} facets")));
    }
    let tol = 1e-9 * p.scale();
    let base = p.vertices().to_vec();
    let mut dist_cache: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut dist_to_p = |v: &Vector| -> f64 {
        *dist_cache.entry(vkey(v)).or_insert_with(|| {
            if p.contains(v, 0.0) {
                0.0
            } else {
                distance_to_hull(v, &base)
            }
        })
    };

    let mut cur = p.clone();
    let mut orig: Vec<usize> = (0..n).collect();
    let mut cache: HashMap<usize, Option<Candidate>> = HashMap::new();
    let mut trace = PruneTrace::default();
    let mut phi_cur = phi.content(&cur).value;
    let mut vdist: Vec<f64> = cur.vertices().iter().map(&mut dist_to_p).collect();
    let mut out = Vec::new();
    let mut dh_cur = 0.0f64;

    for &k in &targets {
        while cur.n_facets() > k {
            // evaluate missing candidates
            let missing: Vec<usize> = (0..cur.n_facets()).filter(|jc| !cache.contains_key(&orig[*jc])).collect();
            let evaluated: Vec<(usize, Result<Option<(Vec<Vector>, Vec<usize>)>, GeomError>)> = missing
                .par_iter()
                .map(|&jc| (jc, removal(&cur, jc)))
                .collect();
            for (jc, res) in evaluated {
                let entry = match res? {
                    None => None,
                    Some((nv, region)) => {
                        let local = nv.iter().map(&mut dist_to_p).fold(0.0, f64::max);
                        Some(Candidate {
                            local,
                            new_vertices: nv,
                            region: region.into_iter().map(|i| orig[i]).collect(),
                        })
                    }
                };
                cache.insert(orig[jc], entry);
            }
            let mut best: Option<(f64, f64, usize, usize)> = None;
            for jc in 0..cur.n_facets() {
                let Some(Some(c)) = cache.get(&orig[jc]) else { continue };
                let rest = cur
                    .vertex_facets()
                    .iter()
                    .zip(&vdist)
                    .filter(|(fs, _)| !fs.contains(&jc))
                    .map(|(_, &x)| x)
                    .fold(0.0, f64::max);
                let value = rest.max(c.local);
                let better = match best {
                    None => true,
                    Some((bv, bl, bo, _)) => {
                        if value < bv - tol {
                            true
                        } else if value > bv + tol {
                            false
                        } else if c.local < bl - tol {
                            true
                        } else if c.local > bl + tol {
                            false
                        } else {
                            orig[jc] < bo
                        }
                    }
                };
                if better {
                    best = Some((value, c.local, orig[jc], jc));
                }
            }
            let Some((value, _, o, jc)) = best else {
                return Err(ApproxError::Unbounded {
                    step: trace.schedule.len(),
                    remaining: cur.n_facets(),
                });
            };
            let cand = cache.remove(&o).flatten().expect("selected candidate exists");
            let prev_vertices = cur.vertices().to_vec();
            let next = cur.rebuild_without(jc, cand.new_vertices.clone())?;
            let step_dh = cand
                .new_vertices
                .iter()
                .map(|v| distance_to_hull(v, &prev_vertices))
                .fold(0.0, f64::max);
            let phi_next = phi.content(&next).value;
            trace.schedule.push(o);
            trace.dh_per_step.push(step_dh);
            trace.phi_per_step.push(phi_next - phi_cur);
            dh_cur = dh_cur.max(value);
            trace.dh_total.push(dh_cur);
            phi_cur = phi_next;
            orig.remove(jc);
            cache.retain(|_, c| match c {
                Some(c) => !c.region.contains(&o),
                None => true,
            });
            cur = next;
            vdist = cur.vertices().iter().map(&mut dist_to_p).collect();
        }
        let mut kept = orig.clone();
        kept.sort_unstable();
        let dh = hausdorff_nested(p, &cur)?;
        out.push(PruneResult {
            kept,
            polytope: cur.clone(),
            dh,
            trace: trace.clone(),
        });
    }
    Ok(out)
}

/// New vertices and touched facets when facet `jc` is dropped, or `None`
/// when the result is unbounded.
fn removal(p: &Polytope, jc: usize) -> Result<Option<(Vec<Vector>, Vec<usize>)>, GeomError> {
    crate::geom::removal_parts(p, jc)
}

/// Prunes a simple polytope to `k` facets.
pub fn prune_to_subset(p: &Polytope, k: usize, phi: &DirectionalDistribution) -> Result<PruneResult, ApproxError> {
    if !p.is_simple() {
        return Err(ApproxError::NotSimple {
            vertex: p.simplicity().witness.unwrap_or(0),
        });
    }
    Ok(prune_path(p, &[k], phi)?.pop().expect("one snapshot"))
}

const SWAP_CANDIDATES: usize = 4;

/// Circumscribed approximation with at most `m` facets: support
/// hyperplanes of `K` at `m` of its own facet normals, chosen by weighted
/// farthest-point covering and then improved by single swaps.
pub fn circumscribe(k: &Polytope, m: usize) -> Result<Circumscription, ApproxError> {
    let d = k.dim();
    if m < d + 1 {
        return Err(ApproxError::Argument(format!("m must be >= d + 1 = {}, got {m}", d + 1)));
    }
    let n = k.n_facets();
    if m >= n {
        return Ok(Circumscription {
            polytope: k.clone(),
            directions: (0..n).collect(),
            dh: 0.0,
        });
    }
    let normals: Vec<Vector> = k.halfspaces().iter().map(|h| h.outward().normalize()).collect();
    let weights = facet_weights(k);
    let wmax = weights.iter().cloned().fold(0.0, f64::max);
    let first = (0..n).max_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(b.cmp(&a))).unwrap();
    let mut chosen = vec![first];
    let mut gap: Vec<f64> = normals.iter().map(|u| (u - &normals[first]).norm()).collect();
    while chosen.len() < m {
        let score = |i: usize| gap[i] * (weights[i] / wmax).powf(1.0 / (d as f64 - 1.0));
        let next = (0..n)
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| score(a).total_cmp(&score(b)).then(b.cmp(&a)))
            .unwrap();
        chosen.push(next);
        for i in 0..n {
            gap[i] = gap[i].min((&normals[i] - &normals[next]).norm());
        }
    }
    let eval = |set: &[usize]| -> Option<(Polytope, f64)> {
        let hs: Vec<Halfspace> = set.iter().map(|&i| k.halfspaces()[i].clone()).collect();
        let q = intersect_halfspaces(&hs).ok()?.polytope;
        let dh = hausdorff_nested(k, &q).ok()?;
        Some((q, dh))
    };
    let mut best = eval(&chosen);
    // swap passes: try the facets most violated at the worst vertex as
    // replacements for each chosen direction, keep the best improvement
    for _ in 0..2 * m {
        let Some((q, dh)) = best.as_ref() else { break };
        let worst = q
            .vertices()
            .iter()
            .max_by(|a, b| distance_to_hull(a, k.vertices()).total_cmp(&distance_to_hull(b, k.vertices())))
            .unwrap()
            .clone();
        let mut incoming: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
        incoming.sort_by(|&a, &b| {
            let va = k.halfspaces()[a].violation(&worst);
            let vb = k.halfspaces()[b].violation(&worst);
            vb.total_cmp(&va).then(a.cmp(&b))
        });
        incoming.truncate(SWAP_CANDIDATES);
        let mut improved: Option<(Vec<usize>, Polytope, f64)> = None;
        for &inc in &incoming {
            for out in 0..chosen.len() {
                let mut trial = chosen.clone();
                trial[out] = inc;
                if let Some((tq, tdh)) = eval(&trial) {
                    if tdh < improved.as_ref().map_or(*dh, |x| x.2) - 1e-12 * k.scale() {
                        improved = Some((trial, tq, tdh));
                    }
                }
            }
        }
        match improved {
            Some((set, tq, tdh)) => {
                chosen = set;
                best = Some((tq, tdh));
            }
            None => break,
        }
    }
    if best.is_none() {
        // the farthest-point pick did not bound; fall back to any bounding swap
        for extra in 0..n {
            if chosen.contains(&extra) {
                continue;
            }
            for out in (0..chosen.len()).rev() {
                let mut trial = chosen.clone();
                trial[out] = extra;
                if let Some(b) = eval(&trial) {
                    chosen = trial;
                    best = Some(b);
                    break;
                }
            }
            if best.is_some() {
                break;
            }
        }
    }
    let (polytope, dh) = best.ok_or(ApproxError::CannotBound { m })?;
    chosen.sort_unstable();
    Ok(Circumscription {
        polytope,
        directions: chosen,
        dh,
    })
}

#[derive(Debug, Clone)]
pub struct Circumscription {
    pub polytope: Polytope,
    /// Facet indices of `K` whose hyperplanes bound the result.
    pub directions: Vec<usize>,
    pub dh: f64,
}

/// `(d-1)`-volume of each facet (exact up to `d = 5`).
pub fn facet_weights(p: &Polytope) -> Vec<f64> {
    crate::geom::facet_areas(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacetRemoval {
    /// `d_H(P, P \ j)`.
    pub dh: f64,
    /// `Φ(P \ j)`.
    pub phi_after: f64,
}

/// Effect of removing each facet on its own; `None` where that unbounds.
pub fn removal_profile(p: &Polytope, phi: &DirectionalDistribution) -> Result<Vec<Option<FacetRemoval>>, ApproxError> {
    let base = p.vertices();
    (0..p.n_facets())
        .into_par_iter()
        .map(|j| -> Result<Option<FacetRemoval>, ApproxError> {
            let Some((nv, _)) = removal(p, j)? else { return Ok(None) };
            let dh = nv.iter().map(|v| distance_to_hull(v, base)).fold(0.0, f64::max);
            let q = p.rebuild_without(j, nv)?;
            Ok(Some(FacetRemoval {
                dh,
                phi_after: phi.content(&q).value,
            }))
        })
        .collect()
}

/// Normalized removal costs `(d_H / (Φ n^{-2/(d-1)}), ln(Φ'/Φ) / n^{-(d+1)/(d-1)})`.
pub fn normalized_removal_costs(
    p: &Polytope,
    profile: &[Option<FacetRemoval>],
    phi_p: f64,
) -> Vec<Option<(f64, f64)>> {
    let d = p.dim() as f64;
    let n = profile.len() as f64;
    let s_dh = phi_p * n.powf(-2.0 / (d - 1.0));
    let s_phi = n.powf(-(d + 1.0) / (d - 1.0));
    profile
        .iter()
        .map(|r| r.map(|r| (r.dh / s_dh, (r.phi_after / phi_p).ln() / s_phi)))
        .collect()
}

/// Facets `j` with `d_H(P, P\j) < α_dh Φ(P) n^{-2/(d-1)}` and
/// `Φ(P\j) < exp(α_Φ n^{-(d+1)/(d-1)}) Φ(P)`.
pub fn removable_set(
    p: &Polytope,
    alpha_dh: f64,
    alpha_phi: f64,
    phi: &DirectionalDistribution,
) -> Result<Vec<usize>, ApproxError> {
    if !p.is_simple() {
        return Err(ApproxError::NotSimple {
            vertex: p.simplicity().witness.unwrap_or(0),
        });
    }
    let phi_p = phi.content(p).value;
    let profile = removal_profile(p, phi)?;
    Ok(removable_from_costs(&normalized_removal_costs(p, &profile, phi_p), alpha_dh, alpha_phi))
}

pub fn removable_from_costs(costs: &[Option<(f64, f64)>], alpha_dh: f64, alpha_phi: f64) -> Vec<usize> {
    costs
        .iter()
        .enumerate()
        .filter_map(|(j, c)| c.filter(|(a, b)| *a < alpha_dh && *b < alpha_phi).map(|_| j))
        .collect()
}

/// Smallest scalar multiple of the median cost pair under which every
/// training polytope keeps at least `n/4` removable facets.
pub fn fit_removable_constants(training: &[Vec<Option<(f64, f64)>>]) -> (f64, f64) {
    let mut a: Vec<f64> = training.iter().flatten().flatten().map(|c| c.0).collect();
    let mut b: Vec<f64> = training.iter().flatten().flatten().map(|c| c.1).collect();
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2].max(f64::MIN_POSITIVE)
    };
    let (ma, mb) = (median(&mut a), median(&mut b));
    let mut lambda: f64 = 0.0;
    for costs in training {
        let need = costs.len().div_ceil(4);
        let mut s: Vec<f64> = costs.iter().flatten().map(|c| (c.0 / ma).max(c.1 / mb)).collect();
        s.sort_by(f64::total_cmp);
        let l = if need == 0 {
            0.0
        } else {
            s.get(need - 1).copied().unwrap_or(f64::INFINITY)
        };
        lambda = lambda.max(l);
    }
    let lambda = lambda * (1.0 + 1e-9);
    (lambda * ma, lambda * mb)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalCone {
    pub vertex: usize,
    /// Outward unit normals of the facets at the vertex.
    pub generators: Vec<Vector>,
}

pub fn normal_cones(p: &Polytope) -> Result<Vec<NormalCone>, ApproxError> {
    let cert = p.simplicity();
    if !cert.simple {
        return Err(ApproxError::NotSimple {
            vertex: cert.witness.unwrap_or(0),
        });
    }
    Ok(p.vertex_facets()
        .iter()
        .enumerate()
        .map(|(v, fs)| NormalCone {
            vertex: v,
            generators: fs.iter().map(|&i| p.halfspaces()[i].outward().normalize()).collect(),
        })
        .collect())
}

/// `U_j`: the union of the normal cones of the vertices of facet `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Umbrella {
    pub facet: usize,
    pub vertices: Vec<usize>,
}

pub fn facet_umbrella(p: &Polytope, j: usize) -> Umbrella {
    Umbrella {
        facet: j,
        vertices: p.facet_vertices(j),
    }
}

/// `φ(U)` by sampling `u ~ φ` and testing whether the maximizing vertex
/// of `<., u>` belongs to the umbrella.
pub fn phi_measure(p: &Polytope, u: &Umbrella, phi: &DirectionalDistribution, samples: usize, rng: &mut Rng) -> Estimate {
    let xs: Vec<f64> = (0..samples)
        .map(|_| {
            let v = p.support_vertex(&phi.sample(rng));
            u.vertices.contains(&v) as u8 as f64
        })
        .collect();
    Estimate::from_samples(&xs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeMeasures {
    pub per_vertex: Vec<Estimate>,
    pub per_facet: Vec<Estimate>,
    /// `sum_l φ(N(v_l))`, which is 1.
    pub vertex_sum: Estimate,
    /// `sum_j φ(U_j)`, which is `d` for simple polytopes.
    pub facet_sum: Estimate,
}

/// All cone and umbrella measures from one shared sample.
pub fn cone_measures(
    p: &Polytope,
    phi: &DirectionalDistribution,
    samples: usize,
    rng: &mut Rng,
) -> Result<ConeMeasures, ApproxError> {
    normal_cones(p)?;
    let nv = p.vertices().len();
    let mut hits = vec![0usize; nv];
    let per_sample_facets: Vec<f64> = (0..samples)
        .map(|_| {
            let v = p.support_vertex(&phi.sample(rng));
            hits[v] += 1;
            p.vertex_facets()[v].len() as f64
        })
        .collect();
    let n = samples as f64;
    let bern = |k: usize| {
        let q = k as f64 / n;
        Estimate {
            value: q,
            stderr: (q * (1.0 - q) / n).sqrt(),
        }
    };
    let per_vertex: Vec<Estimate> = hits.iter().map(|&k| bern(k)).collect();
    let per_facet: Vec<Estimate> = (0..p.n_facets())
        .map(|j| bern(p.facet_vertices(j).iter().map(|&v| hits[v]).sum()))
        .collect();
    Ok(ConeMeasures {
        vertex_sum: bern(samples),
        facet_sum: Estimate::from_samples(&per_sample_facets),
        per_vertex,
        per_facet,
    })
}

#[derive(Debug, Clone)]
pub struct ElongatedPrune {
    pub result: PruneResult,
    pub ratio: f64,
    /// `ε^{1/(2d)} V_1(P) k^{-2/(d-1)}`.
    pub rate: f64,
}

/// Pruning for an `(ε : i, j)`-elongated polytope, reported against the
/// elongation rate.
pub fn elongated_prune(
    p: &Polytope,
    eps: f64,
    i: usize,
    j: usize,
    k: usize,
    phi: &DirectionalDistribution,
) -> Result<ElongatedPrune, ApproxError> {
    let iv = intrinsic_volumes_auto(p);
    let ratio = iv.ratio(i, j)?;
    if !(ratio < eps) {
        return Err(ApproxError::Argument(format!(
            "isoperimetric ratio {ratio} is not below eps = {eps}"
        )));
    }
    let d = p.dim() as f64;
    let result = prune_path(p, &[k], phi)?.pop().expect("one snapshot");
    let rate = eps.powf(1.0 / (2.0 * d)) * iv.get(1) * (k as f64).powf(-2.0 / (d - 1.0));
    Ok(ElongatedPrune { result, ratio, rate })
}

/// `(δ, gap)` with `δ = d_H(K, L) / V_1(K)` and
/// `gap = ratio_{ij}(L) - ratio_{ij}(K)`, for `K ⊆ L`.
pub fn isoperimetric_continuity_probe(k: &Polytope, l: &Polytope, i: usize, j: usize) -> Result<(f64, f64), ApproxError> {
    let dh = hausdorff_nested(k, l)?;
    let ik = intrinsic_volumes_auto(k);
    let v1 = ik.get(1);
    if !(dh < v1) {
        return Err(ApproxError::Argument(format!("d_H = {dh} is not below V_1(K) = {v1}")));
    }
    let il = intrinsic_volumes_auto(l);
    Ok((dh / v1, il.ratio(i, j)? - ik.ratio(i, j)?))
}

/// Exponent of `|gap|` against `δ`, skipping zero pairs.
pub fn fit_continuity_exponent(pairs: &[(f64, f64)]) -> Option<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .filter(|(d, g)| *d > 0.0 && g.abs() > 0.0)
        .map(|(d, g)| (*d, g.abs()))
        .unzip();
    (x.len() >= 3).then(|| log_log_fit(&x, &y))
}

/// The continuity exponent `(j-i) / (i j (j-1))`.
pub fn continuity_exponent(i: usize, j: usize) -> f64 {
    (j - i) as f64 / (i * j * (j - 1)) as f64
}

/// Polytope from `count` tangent halfspaces of the ellipsoid with the given
/// semi-axes, at seeded random directions; used for thin test bodies.
pub fn tangent_polytope(semi_axes: &[f64], count: usize, rng: &mut Rng) -> Result<Polytope, ApproxError> {
    let d = semi_axes.len();
    let mut hs = Vec::with_capacity(count + 2 * d);
    for k in 0..d {
        for s in [-1.0, 1.0] {
            let mut u = Vector::zeros(d);
            u[k] = s;
            hs.push(Halfspace::from_inequality(&u, semi_axes[k])?);
        }
    }
    for _ in 0..count {
        let u = crate::direction::uniform_direction(d, rng);
        let h: f64 = u.iter().zip(semi_axes).map(|(x, a)| (x * a).powi(2)).sum::<f64>().sqrt();
        hs.push(Halfspace::from_inequality(&u, h)?);
    }
    let p = intersect_halfspaces(&hs)
        .map_err(|e| match e {
            GeomError::Degenerate(DegenerateKind::Unbounded) => ApproxError::CannotBound { m: hs.len() },
            e => e.into(),
        })?
        .polytope;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::DirectionalDistribution;
    use crate::geom::from_slice;
    use crate::rng;
    use std::f64::consts::PI;

    fn iso(d: usize) -> DirectionalDistribution {
        DirectionalDistribution::isotropic(d).unwrap()
    }

    #[test]
    fn square_circumscribes_itself() {
        let sq = Polytope::cube(2, 2.0);
        let c = circumscribe(&sq, 4).unwrap();
        assert_eq!(c.dh, 0.0);
        assert_eq!(c.polytope.n_facets(), 4);
    }

    #[test]
    fn polygon_circumscription_rate() {
        let k = Polytope::regular_polygon(64, 1.0);
        let ms = [8.0, 16.0, 32.0];
        let dh: Vec<f64> = ms.iter().map(|&m| circumscribe(&k, m as usize).unwrap().dh).collect();
        let fit = log_log_fit(&ms, &dh);
        assert!((fit.slope + 2.0).abs() < 0.3, "{fit:?} {dh:?}");
    }

    #[test]
    fn k_equal_n_is_identity() {
        let p = Polytope::regular_polygon(12, 1.0);
        let r = prune_to_subset(&p, 12, &iso(2)).unwrap();
        assert_eq!(r.kept, (0..12).collect::<Vec<_>>());
        assert_eq!(r.dh, 0.0);
    }

    #[test]
    fn polygon_pruning_keeps_alternate_facets() {
        for j in 3..=6 {
            let n = 1usize << j;
            let p = Polytope::regular_polygon(n, 1.0);
            let r = prune_to_subset(&p, n / 2, &iso(2)).unwrap();
            let odd: Vec<usize> = (0..n).filter(|i| i % 2 == 1).collect();
            assert_eq!(r.kept, odd, "n = {n}");
            // new vertex sits on the removed facet's normal line
            let exact = 1.0 / (2.0 * PI / n as f64).cos() - 1.0;
            assert!((r.dh - exact).abs() < 1e-12, "n = {n}: {} vs {exact}", r.dh);
        }
    }

    #[test]
    fn trace_is_monotone() {
        let mut r = rng::substream(31, 0, 0);
        let p = tangent_polytope(&[1.0, 0.6, 0.4], 40, &mut r).unwrap();
        let res = prune_to_subset(&p, 8, &iso(3)).unwrap();
        let t = &res.trace;
        assert_eq!(t.schedule.len(), p.n_facets() - 8);
        assert!(t.dh_per_step.iter().all(|x| *x >= 0.0));
        assert!(t.phi_per_step.iter().all(|x| *x >= -1e-12));
        assert!(t.dh_total.windows(2).all(|w| w[1] >= w[0]));
        assert!((t.dh_total.last().unwrap() - res.dh).abs() < 1e-9);
        let mut s = t.schedule.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), t.schedule.len());
    }

    #[test]
    fn square_has_no_removable_facet() {
        let sq = Polytope::cube(2, 1.0);
        assert!(removable_set(&sq, 1e9, 1e9, &iso(2)).unwrap().is_empty());
        let hex = Polytope::regular_polygon(6, 1.0);
        let costs = normalized_removal_costs(&hex, &removal_profile(&hex, &iso(2)).unwrap(), 1.0);
        let first = costs[0].unwrap();
        assert!(costs.iter().all(|c| (c.unwrap().0 - first.0).abs() < 1e-9));
    }

    #[test]
    fn square_umbrellas_are_halves() {
        let sq = Polytope::cube(2, 1.0);
        let mut r = rng::substream(32, 0, 0);
        let m = cone_measures(&sq, &iso(2), 100_000, &mut r).unwrap();
        for e in &m.per_facet {
            assert!((e.value - 0.5).abs() < 4.0 * e.stderr);
        }
        assert!((m.facet_sum.value - 2.0).abs() < 1e-12);
        assert!((m.vertex_sum.value - 1.0).abs() < 1e-12);
        let u = facet_umbrella(&sq, 0);
        let e = phi_measure(&sq, &u, &iso(2), 20_000, &mut r);
        assert!((e.value - 0.5).abs() < 4.0 * e.stderr);
    }

    #[test]
    fn pyramid_is_not_simple() {
        let apex = from_slice(&[0.0, 0.0, 1.0]);
        let mut pts = Polytope::cube(3, 2.0)
            .vertices()
            .iter()
            .filter(|v| v[2] < 0.0)
            .cloned()
            .collect::<Vec<_>>();
        pts.push(apex);
        let p = crate::geom::convex_hull(&pts).unwrap().polytope;
        assert!(matches!(normal_cones(&p), Err(ApproxError::NotSimple { .. })));
    }

    #[test]
    fn continuity_probe_basics() {
        let k = Polytope::cube(2, 2.0);
        assert_eq!(isoperimetric_continuity_probe(&k, &k, 1, 2).unwrap(), (0.0, 0.0));
        // K + rB approximated by a 64-gon Minkowski sum
        let mut prev = f64::INFINITY;
        for r in [0.2, 0.1, 0.05] {
            let mut pts = Vec::new();
            for v in k.vertices() {
                for s in 0..64 {
                    let a = 2.0 * PI * s as f64 / 64.0;
                    pts.push(v + from_slice(&[r * a.cos(), r * a.sin()]));
                }
            }
            let l = crate::geom::convex_hull(&pts).unwrap().polytope;
            let (_, gap) = isoperimetric_continuity_probe(&k, &l, 1, 2).unwrap();
            assert!(gap > 0.0 && gap < prev);
            prev = gap;
        }
        assert_eq!(continuity_exponent(1, 2), 0.5);
    }
}
