//! Even directional distributions on the unit sphere.
//!
//! Three families: the uniform (isotropic) law, finitely many atoms, and a
//! mixture that puts extra uniform mass on an antipodal pair of caps
//! `C ∪ (-C)` on top of a background law. Caps are chordal:
//! `C(y, r) = { u in S^{d-1} : |u - y| <= r }`.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{kappa, ConvexBody, PointSet, Vector};
use crate::rng;
use crate::Estimate;

/// Atoms closer than this are merged during symmetrization.
const ATOM_MERGE_TOL: f64 = 1e-12;
/// Deviation from unit length that triggers a normalization warning.
const NORMALIZE_WARN_TOL: f64 = 1e-9;
/// Quadrature nodes per cap for the Monte Carlo part of Φ.
const CAP_NODES: usize = 8192;
/// Quadrature nodes on the whole sphere when no closed form applies.
const SPHERE_NODES: usize = 16384;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirectionError {
    #[error("invalid directional distribution: {0}")]
    Invalid(String),
    #[error("support lies in a great subsphere (directions span only {rank} of {d} dimensions)")]
    GreatCircle { rank: usize, d: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Configuration form, `{"variant": "...", ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum PhiSpec {
    Isotropic,
    Discrete {
        directions: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    CapMixture {
        cap_center: Vec<f64>,
        cap_radius: f64,
        /// Mass of `C`; `-C` gets the same, the background `1 - 2 cap_mass`.
        cap_mass: f64,
        background: Box<PhiSpec>,
    },
}

impl PhiSpec {
    pub fn build(&self, d: usize) -> Result<DirectionalDistribution, DirectionError> {
        match self {
            PhiSpec::Isotropic => DirectionalDistribution::isotropic(d),
            PhiSpec::Discrete { directions, weights } => {
                let dirs: Vec<Vector> = directions.iter().map(|u| Vector::from_column_slice(u)).collect();
                if let Some(u) = dirs.iter().find(|u| u.len() != d) {
                    return Err(DirectionError::Invalid(format!(
                        "direction of dimension {} in a d = {d} distribution",
                        u.len()
                    )));
                }
                DirectionalDistribution::discrete(dirs, weights.clone())
            }
            PhiSpec::CapMixture {
                cap_center,
                cap_radius,
                cap_mass,
                background,
            } => {
                if cap_center.len() != d {
                    return Err(DirectionError::Invalid("cap_center has the wrong dimension".into()));
                }
                DirectionalDistribution::cap_mixture(
                    Vector::from_column_slice(cap_center),
                    *cap_radius,
                    *cap_mass,
                    background.build(d)?,
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Isotropic,
    Discrete {
        dirs: Vec<Vector>,
        weights: Vec<f64>,
        cumulative: Vec<f64>,
    },
    CapMixture {
        center: Vector,
        radius: f64,
        mass: f64,
        background: Box<DirectionalDistribution>,
    },
}

/// Even probability measure `φ` on `S^{d-1}`.
#[derive(Debug)]
pub struct DirectionalDistribution {
    d: usize,
    kind: Kind,
    warnings: Vec<String>,
    nodes: OnceLock<Vec<Vector>>,
}

impl Clone for DirectionalDistribution {
    fn clone(&self) -> Self {
        DirectionalDistribution {
            d: self.d,
            kind: self.kind.clone(),
            warnings: self.warnings.clone(),
            nodes: OnceLock::new(),
        }
    }
}

impl PartialEq for DirectionalDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.spec() == other.spec() && self.d == other.d
    }
}

/// Surface-density lower bound of `φ` on a cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellSpreadWitness {
    pub cap_center: Vec<f64>,
    /// Chordal radius.
    pub r: f64,
    /// `φ >= c5 H^{d-1}` on the cap.
    pub c5: f64,
}

/// Angular radius of a chordal cap.
pub fn cap_angle(r: f64) -> f64 {
    2.0 * (r / 2.0).asin()
}

/// `H^{d-1}` measure of a chordal cap of radius `r` on `S^{d-1}`.
pub fn cap_area(d: usize, r: f64) -> f64 {
    let theta = cap_angle(r);
    // area(S^{d-2}) * int_0^theta sin^{d-2}
    let sub = if d == 2 { 2.0 } else { (d - 1) as f64 * kappa(d - 1) };
    let m = 2000;
    let h = theta / m as f64;
    let f = |x: f64| x.sin().powi(d as i32 - 2);
    let mut s = f(0.0) + f(theta);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    sub * s * h / 3.0
}

/// Uniform direction on `S^{d-1}`.
pub fn uniform_direction<R: Rng + ?Sized>(d: usize, r: &mut R) -> Vector {
    loop {
        let g = Vector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(r)));
        let n = g.norm();
        if n > 1e-300 {
            return g / n;
        }
    }
}

/// Some unit vector orthogonal to `u`.
fn orthonormal_frame(u: &Vector) -> Vec<Vector> {
    let d = u.len();
    let mut basis = vec![u.clone()];
    for k in 0..d {
        let mut e = Vector::zeros(d);
        e[k] = 1.0;
        for b in &basis {
            let c = e.dot(b);
            e.axpy(-c, b, 1.0);
        }
        let n = e.norm();
        if n > 1e-6 {
            basis.push(e / n);
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Uniform draw from the chordal cap `C(center, r)`: the polar angle is
/// drawn by rejection against its `sin^{d-2}` density, the azimuth
/// uniformly on the orthogonal sphere.
pub fn sample_cap<R: Rng + ?Sized>(center: &Vector, r: f64, rng: &mut R) -> Vector {
    let d = center.len();
    let theta_max = cap_angle(r);
    let smax = if theta_max > FRAC_PI_2 { 1.0 } else { theta_max.sin() };
    let theta = loop {
        let t = rng.random_range(0.0..theta_max);
        if d == 2 || rng.random::<f64>() <= (t.sin() / smax).powi(d as i32 - 2) {
            break t;
        }
    };
    let frame = orthonormal_frame(center);
    let w = uniform_direction(d - 1, rng);
    let w = if d == 2 {
        // S^0 = {-1, +1}
        Vector::from_column_slice(&[if rng.random::<bool>() { 1.0 } else { -1.0 }])
    } else {
        w
    };
    let mut out = center * theta.cos();
    for (e, c) in frame.iter().zip(w.iter()) {
        out.axpy(theta.sin() * c, e, 1.0);
    }
    out.normalize()
}

fn symmetrize(dirs: &[Vector], weights: &[f64]) -> (Vec<Vector>, Vec<f64>) {
    let mut out_d: Vec<Vector> = Vec::new();
    let mut out_w: Vec<f64> = Vec::new();
    let mut add = |u: Vector, w: f64| {
        if let Some(k) = out_d.iter().position(|v| (v - &u).amax() <= ATOM_MERGE_TOL) {
            out_w[k] += w;
        } else {
            out_d.push(u);
            out_w.push(w);
        }
    };
    for (u, &w) in dirs.iter().zip(weights) {
        add(u.clone(), w / 2.0);
        add(-u, w / 2.0);
    }
    (out_d, out_w)
}

fn span_rank(dirs: &[Vector]) -> usize {
    let d = dirs[0].len();
    let mut basis: Vec<Vector> = Vec::new();
    for u in dirs {
        let mut r = u.clone();
        for b in &basis {
            let c = r.dot(b);
            r.axpy(-c, b, 1.0);
        }
        let n = r.norm();
        if n > 1e-9 {
            basis.push(r / n);
            if basis.len() == d {
                break;
            }
        }
    }
    basis.len()
}

impl DirectionalDistribution {
    pub fn isotropic(d: usize) -> Result<Self, DirectionError> {
        if d < 2 {
            return Err(DirectionError::Invalid(format!("dimension must be >= 2, got {d}")));
        }
        Ok(DirectionalDistribution {
            d,
            kind: Kind::Isotropic,
            warnings: Vec::new(),
            nodes: OnceLock::new(),
        })
    }

    /// Finitely many atoms; directions are normalized (with a warning when
    /// they were off by more than 1e-9), weights default to uniform, and
    /// the measure is symmetrized as `(φ + φ(-·)) / 2`.
    pub fn discrete(directions: Vec<Vector>, weights: Option<Vec<f64>>) -> Result<Self, DirectionError> {
        let d = directions
            .first()
            .map(|u| u.len())
            .ok_or_else(|| DirectionError::Invalid("no directions given".into()))?;
        if d < 2 {
            return Err(DirectionError::Invalid(format!("dimension must be >= 2, got {d}")));
        }
        let mut warnings = Vec::new();
        let mut dirs = Vec::with_capacity(directions.len());
        for (k, u) in directions.into_iter().enumerate() {
            if u.len() != d {
                return Err(DirectionError::Invalid("directions of mixed dimension".into()));
            }
            let n = u.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(DirectionError::Invalid(format!("direction {k} is zero or not finite")));
            }
            if (n - 1.0).abs() > NORMALIZE_WARN_TOL {
                warnings.push(format!("direction {k} normalized (|u| = {n})"));
            }
            dirs.push(u / n);
        }
        let w = match weights {
            None => vec![1.0 / dirs.len() as f64; dirs.len()],
            Some(w) => {
                if w.len() != dirs.len() {
                    return Err(DirectionError::Invalid("weights and directions differ in length".into()));
                }
                if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                    return Err(DirectionError::Invalid("weights must be finite and nonnegative".into()));
                }
                let s: f64 = w.iter().sum();
                if !(s > 0.0) {
                    return Err(DirectionError::Invalid("weights sum to zero".into()));
                }
                if (s - 1.0).abs() > 1e-12 {
                    warnings.push(format!("weights renormalized (sum was {s})"));
                }
                w.into_iter().map(|x| x / s).collect()
            }
        };
        let (dirs, weights) = symmetrize(&dirs, &w);
        let (dirs, weights): (Vec<Vector>, Vec<f64>) = dirs
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .unzip();
        let rank = span_rank(&dirs);
        if rank < d {
            return Err(DirectionError::GreatCircle { rank, d });
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Ok(DirectionalDistribution {
            d,
            kind: Kind::Discrete {
                dirs,
                weights,
                cumulative,
            },
            warnings,
            nodes: OnceLock::new(),
        })
    }

    /// `cap_mass` on the chordal cap `C(center, radius)`, the same on `-C`,
    /// and `1 - 2 cap_mass` on `background`.
    pub fn cap_mixture(
        center: Vector,
        radius: f64,
        cap_mass: f64,
        background: DirectionalDistribution,
    ) -> Result<Self, DirectionError> {
        let d = center.len();
        if background.d != d {
            return Err(DirectionError::Invalid("background has a different dimension".into()));
        }
        if !(radius > 0.0 && radius < 1.0) {
            return Err(DirectionError::Invalid(format!("cap radius must lie in (0, 1), got {radius}")));
        }
        if !(cap_mass > 0.0 && cap_mass <= 0.5) {
            return Err(DirectionError::Invalid(format!("cap_mass must lie in (0, 1/2], got {cap_mass}")));
        }
        let n = center.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(DirectionError::Invalid("cap center must be nonzero".into()));
        }
        let mut warnings = background.warnings.clone();
        if (n - 1.0).abs() > NORMALIZE_WARN_TOL {
            warnings.push(format!("cap center normalized (|u| = {n})"));
        }
        Ok(DirectionalDistribution {
            d,
            kind: Kind::CapMixture {
                center: center / n,
                radius,
                mass: cap_mass,
                background: Box::new(background),
            },
            warnings,
            nodes: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.kind, Kind::Isotropic)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, Kind::Discrete { .. })
    }

    /// Atoms and weights of a discrete law (after symmetrization).
    pub fn atoms(&self) -> Option<(&[Vector], &[f64])> {
        match &self.kind {
            Kind::Discrete { dirs, weights, .. } => Some((dirs, weights)),
            _ => None,
        }
    }

    pub fn spec(&self) -> PhiSpec {
        match &self.kind {
            Kind::Isotropic => PhiSpec::Isotropic,
            Kind::Discrete { dirs, weights, .. } => PhiSpec::Discrete {
                directions: dirs.iter().map(|u| u.iter().copied().collect()).collect(),
                weights: Some(weights.clone()),
            },
            Kind::CapMixture {
                center,
                radius,
                mass,
                background,
            } => PhiSpec::CapMixture {
                cap_center: center.iter().copied().collect(),
                cap_radius: *radius,
                cap_mass: *mass,
                background: Box::new(background.spec()),
            },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match &self.kind {
            Kind::Isotropic => uniform_direction(self.d, rng),
            Kind::Discrete { dirs, cumulative, .. } => {
                let x: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
                let k = cumulative.partition_point(|&c| c <= x).min(dirs.len() - 1);
                dirs[k].clone()
            }
            Kind::CapMixture {
                center,
                radius,
                mass,
                background,
            } => {
                let x: f64 = rng.random();
                if x < 2.0 * mass {
                    let u = sample_cap(center, *radius, rng);
                    if x < *mass {
                        u
                    } else {
                        -u
                    }
                } else {
                    background.sample(rng)
                }
            }
        }
    }

    /// Fixed, antipodally symmetric quadrature nodes: on the cap for a
    /// mixture, on the whole sphere otherwise.
    fn nodes(&self) -> &[Vector] {
        self.nodes.get_or_init(|| {
            let mut r = rng::substream(0x5eed, rng::tag("phi-nodes"), self.d as u64);
            match &self.kind {
                Kind::CapMixture { center, radius, .. } => {
                    (0..CAP_NODES).map(|_| sample_cap(center, *radius, &mut r)).collect()
                }
                _ => (0..SPHERE_NODES / 2)
                    .map(|_| uniform_direction(self.d, &mut r))
                    .collect(),
            }
        })
    }

    /// Mean of `(f(u) + f(-u)) / 2` over the nodes, with its standard error.
    fn node_average<F: Fn(&Vector) -> f64>(&self, f: F) -> Estimate {
        let nodes = self.nodes();
        let vals: Vec<f64> = nodes.iter().map(|u| 0.5 * (f(u) + f(&-u))).collect();
        Estimate::from_samples(&vals)
    }

    /// `Φ(K) = ∫ h(K, u) dφ(u)`: exact for atoms and for isotropic `φ` on
    /// bodies with a mean-width formula, a fixed-node estimate otherwise.
    pub fn content(&self, body: &dyn ConvexBody) -> Estimate {
        match &self.kind {
            Kind::Isotropic => match body.isotropic_content() {
                Some(v) => Estimate::exact(v),
                None => self.node_average(|u| body.support(u)),
            },
            Kind::Discrete { dirs, weights, .. } => {
                Estimate::exact(dirs.iter().zip(weights).map(|(u, w)| w * body.support(u)).sum())
            }
            Kind::CapMixture { mass, background, .. } => {
                let cap = self.node_average(|u| body.support(u));
                let bg = background.content(body);
                Estimate {
                    value: 2.0 * mass * cap.value + (1.0 - 2.0 * mass) * bg.value,
                    stderr: (4.0 * mass * mass * cap.stderr.powi(2)
                        + (1.0 - 2.0 * mass).powi(2) * bg.stderr.powi(2))
                    .sqrt(),
                }
            }
        }
    }

    /// `Φ(K)` only when it can be evaluated without Monte Carlo.
    pub fn content_exact(&self, body: &dyn ConvexBody) -> Result<f64, DirectionError> {
        let e = self.content(body);
        if e.stderr == 0.0 && self.has_exact_rule(body) {
            Ok(e.value)
        } else {
            Err(DirectionError::Unsupported(
                "no exact Φ rule for this distribution and body".into(),
            ))
        }
    }

    fn has_exact_rule(&self, body: &dyn ConvexBody) -> bool {
        match &self.kind {
            Kind::Isotropic => body.isotropic_content().is_some(),
            Kind::Discrete { .. } => true,
            Kind::CapMixture { .. } => false,
        }
    }

    /// `∫ |<v, u>| dφ(u)` for a unit vector `v`.
    pub fn mean_abs_projection(&self, v: &Vector) -> Estimate {
        match &self.kind {
            Kind::Isotropic => Estimate::exact(2.0 * kappa(self.d - 1) / (self.d as f64 * kappa(self.d))),
            Kind::Discrete { dirs, weights, .. } => {
                Estimate::exact(dirs.iter().zip(weights).map(|(u, w)| w * u.dot(v).abs()).sum())
            }
            Kind::CapMixture { mass, background, .. } => {
                let cap = self.node_average(|u| u.dot(v).abs());
                let bg = background.mean_abs_projection(v);
                Estimate {
                    value: 2.0 * mass * cap.value + (1.0 - 2.0 * mass) * bg.value,
                    stderr: (4.0 * mass * mass * cap.stderr.powi(2)
                        + (1.0 - 2.0 * mass).powi(2) * bg.stderr.powi(2))
                    .sqrt(),
                }
            }
        }
    }

    /// Mass of a chordal cap, exact for atoms; `None` when it needs sampling.
    pub fn cap_mass_exact(&self, center: &Vector, r: f64) -> Option<f64> {
        match &self.kind {
            Kind::Discrete { dirs, weights, .. } => Some(
                dirs.iter()
                    .zip(weights)
                    .filter(|(u, _)| (*u - center).norm() <= r)
                    .map(|(_, w)| w)
                    .sum(),
            ),
            Kind::Isotropic => Some(cap_area(self.d, r) / (self.d as f64 * kappa(self.d))),
            Kind::CapMixture { .. } => None,
        }
    }

    pub fn well_spread_witness(&self) -> Option<WellSpreadWitness> {
        let sphere = self.d as f64 * kappa(self.d);
        match &self.kind {
            Kind::Isotropic => {
                let mut c = vec![0.0; self.d];
                c[0] = 1.0;
                Some(WellSpreadWitness {
                    cap_center: c,
                    r: 0.5,
                    c5: 1.0 / sphere,
                })
            }
            Kind::Discrete { .. } => None,
            Kind::CapMixture {
                center,
                radius,
                mass,
                background,
            } => {
                let bg = if background.is_isotropic() {
                    (1.0 - 2.0 * mass) / sphere
                } else {
                    0.0
                };
                Some(WellSpreadWitness {
                    cap_center: center.iter().copied().collect(),
                    r: *radius,
                    c5: mass / cap_area(self.d, *radius) + bg,
                })
            }
        }
    }

    /// Number of distinct directions of a discrete law.
    pub fn n_max(&self) -> Result<usize, DirectionError> {
        match &self.kind {
            Kind::Discrete { dirs, .. } => Ok(dirs.len()),
            _ => Err(DirectionError::Unsupported("n_max needs a discrete distribution".into())),
        }
    }

    /// Lower bound on `c_Φ = sup V_1 / Φ` from unit segments: the ratio for
    /// direction `v` is `2 / ∫|<v,u>| dφ`. Exact `d κ_d / κ_{d-1}` when
    /// isotropic. Candidate directions are the atoms (if any) followed by a
    /// fixed uniform sequence, so the bound grows with `samples`.
    pub fn c_phi_lower_bound(&self, samples: usize) -> f64 {
        if self.is_isotropic() {
            return self.d as f64 * kappa(self.d) / kappa(self.d - 1);
        }
        let mut cands: Vec<Vector> = Vec::new();
        if let Kind::Discrete { dirs, .. } = &self.kind {
            cands.extend(dirs.iter().cloned());
        }
        let mut r = rng::substream(0xc0ff, rng::tag("c-phi"), self.d as u64);
        let mut best: f64 = 0.0;
        let mut it = cands.into_iter();
        for _ in 0..samples {
            let v = it.next().unwrap_or_else(|| uniform_direction(self.d, &mut r));
            let m = self.mean_abs_projection(&v).value;
            if m > 0.0 {
                best = best.max(2.0 / m);
            }
        }
        best
    }

    /// `Φ` of a unit segment in direction `v`, for cross-checks.
    pub fn segment_content(&self, v: &Vector) -> f64 {
        let s = PointSet::segment(Vector::zeros(self.d), v.clone());
        self.content(&s).value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{from_slice, Ball, Polytope};
    use std::f64::consts::PI;

    fn axes2() -> DirectionalDistribution {
        DirectionalDistribution::discrete(vec![from_slice(&[1.0, 0.0]), from_slice(&[0.0, 1.0])], None).unwrap()
    }

    #[test]
    fn symmetrization_splits_unpaired_atoms() {
        let phi = axes2();
        let (dirs, w) = phi.atoms().unwrap();
        assert_eq!(dirs.len(), 4);
        assert!(w.iter().all(|x| (x - 0.25).abs() < 1e-15));
        assert_eq!(phi.n_max().unwrap(), 4);
        // idempotent
        let again = DirectionalDistribution::discrete(dirs.to_vec(), Some(w.to_vec())).unwrap();
        assert_eq!(again.atoms().unwrap().1, w);
    }

    #[test]
    fn six_directions() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = DirectionalDistribution::discrete(
            vec![from_slice(&[1.0, 0.0]), from_slice(&[0.0, 1.0]), from_slice(&[s, s])],
            None,
        )
        .unwrap();
        assert_eq!(phi.n_max().unwrap(), 6);
        assert!(DirectionalDistribution::isotropic(2).unwrap().n_max().is_err());
    }

    #[test]
    fn great_circle_is_rejected() {
        let r = DirectionalDistribution::discrete(
            vec![from_slice(&[1.0, 0.0, 0.0]), from_slice(&[0.0, 1.0, 0.0])],
            None,
        );
        assert_eq!(r.unwrap_err(), DirectionError::GreatCircle { rank: 2, d: 3 });
    }

    #[test]
    fn normalization_warns() {
        let phi = DirectionalDistribution::discrete(vec![from_slice(&[2.0, 0.0]), from_slice(&[0.0, 1.0])], None)
            .unwrap();
        assert_eq!(phi.warnings().len(), 1);
    }

    #[test]
    fn content_of_balls_and_squares() {
        let ball = Ball::centered(2, 1.7);
        let iso = DirectionalDistribution::isotropic(2).unwrap();
        assert_eq!(iso.content(&ball).value, 1.7);
        assert_eq!(axes2().content(&ball).value, 1.7);
        let sq = Polytope::cube(2, 1.0);
        assert!((axes2().content(&sq).value - 0.5).abs() < 1e-15);
        // isotropic: perimeter / (2 pi)
        assert!((iso.content(&sq).value - 4.0 / (2.0 * PI)).abs() < 1e-14);
        let mix = DirectionalDistribution::cap_mixture(from_slice(&[0.0, 1.0]), 0.2, 0.3, iso.clone()).unwrap();
        let e = mix.content(&ball);
        assert!((e.value - 1.7).abs() < 1e-12);
    }

    #[test]
    fn isotropic_segment_is_length_over_pi() {
        let iso = DirectionalDistribution::isotropic(2).unwrap();
        let l = 2.5;
        let seg = PointSet::segment(from_slice(&[0.3, 0.1]), from_slice(&[0.3 + l, 0.1]));
        assert!((iso.content(&seg).value - l / PI).abs() < 1e-14);
        // numerical integration of (1/2pi) int l |cos| / 2 ... via support function
        let m = 20000;
        let mut s = 0.0;
        for k in 0..m {
            let a = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            s += seg.support(&from_slice(&[a.cos(), a.sin()]));
        }
        assert!((s / m as f64 - l / PI).abs() < 1e-8);
    }

    #[test]
    fn c_phi_values() {
        assert!((DirectionalDistribution::isotropic(2).unwrap().c_phi_lower_bound(10) - PI).abs() < 1e-14);
        assert!((DirectionalDistribution::isotropic(3).unwrap().c_phi_lower_bound(10) - 4.0).abs() < 1e-14);
        let phi = axes2();
        let e1 = from_slice(&[1.0, 0.0]);
        assert!((phi.mean_abs_projection(&e1).value - 0.5).abs() < 1e-15);
        // unit segment along e1: V_1 = 1 and Φ = 1/4
        assert!((1.0 / phi.segment_content(&e1) - 4.0).abs() < 1e-14);
        let b = phi.c_phi_lower_bound(100);
        assert!(b >= 2.0);
        assert!(phi.c_phi_lower_bound(10) <= b);
    }

    #[test]
    fn witnesses() {
        let iso = DirectionalDistribution::isotropic(2).unwrap();
        assert!((iso.well_spread_witness().unwrap().c5 - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(axes2().well_spread_witness().is_none());
        let mix = DirectionalDistribution::cap_mixture(from_slice(&[0.0, 1.0]), 0.2, 0.3, iso).unwrap();
        let w = mix.well_spread_witness().unwrap();
        let arc = 2.0 * cap_angle(0.2);
        assert!((cap_area(2, 0.2) - arc).abs() < 1e-12);
        assert!(w.c5 >= 0.3 / arc + 0.4 / (2.0 * PI) - 1e-12);
    }

    #[test]
    fn cap_area_in_three_dimensions() {
        let r: f64 = 0.7;
        let theta = cap_angle(r);
        // chordal radius r has height r^2 / 2
        assert!((1.0 - theta.cos() - r * r / 2.0).abs() < 1e-14);
        assert!((cap_area(3, r) - 2.0 * PI * (1.0 - theta.cos())).abs() < 1e-10);
    }

    #[test]
    fn cap_samples_stay_in_cap() {
        let mut r = rng::substream(1, 2, 3);
        let c = from_slice(&[0.0, 0.6, 0.8]);
        for _ in 0..2000 {
            let u = sample_cap(&c, 0.3, &mut r);
            assert!((u.norm() - 1.0).abs() < 1e-12);
            assert!((&u - &c).norm() <= 0.3 + 1e-12);
        }
    }
}
