//! Sampling the stationary Poisson hyperplane process and extracting cells.
//!
//! A hyperplane is `H(u, t)` with `u ~ φ` and `t >= 0`; the number hitting
//! a convex body `K` that contains the origin is Poisson with mean
//! `γ Φ(K)`, and given that number the hits are i.i.d. with `u ~ φ`
//! conditioned on `t <= h(K, u)`.

mod archive;
mod arrangement;

pub use archive::{ArchiveHeader, ArchiveReader, ArchiveWriter, ARCHIVE_SCHEMA_VERSION};
pub use arrangement::{planar_arrangement, planar_arrangement_cells, Arrangement, ArrangementOptions};

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::direction::DirectionalDistribution;
use crate::geom::{
    cent, intersect_halfspaces, intrinsic_volumes_auto, kappa, Ball, CenterKind, ConvexBody, DegenerateKind,
    GeomError, Hyperplane, IntrinsicVolumes, Polytope, PolytopeJson, Side, Vector,
};
use crate::rng::Rng;
use crate::Estimate;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("invalid process configuration: {0}")]
    Config(String),
    #[error("zero cell not localized within radius {radius} (cap {cap})")]
    NonTermination { radius: f64, cap: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("archive: {0}")]
    Archive(String),
}

#[derive(Debug, Clone)]
pub struct ProcessConfig {
    pub d: usize,
    pub gamma: f64,
    pub phi: DirectionalDistribution,
    pub seed: u64,
}

impl ProcessConfig {
    pub fn new(gamma: f64, phi: DirectionalDistribution, seed: u64) -> Result<ProcessConfig, ProcessError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(ProcessError::Config(format!("gamma must be positive, got {gamma}")));
        }
        Ok(ProcessConfig {
            d: phi.dim(),
            gamma,
            phi,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    ZeroCell,
    Arrangement,
    DirectShape,
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::ZeroCell => "zero-cell",
            Sampler::Arrangement => "arrangement",
            Sampler::DirectShape => "direct-shape",
        })
    }
}

/// One sampled cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub polytope: Polytope,
    pub f: usize,
    pub phi_content: f64,
    pub phi_stderr: f64,
    pub intrinsic: IntrinsicVolumes,
    pub cent: Vector,
    pub sampler: Sampler,
    pub weight: f64,
}

/// Wire form of a [`CellRecord`], one JSON line in an archive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecordJson {
    pub polytope: PolytopeJson,
    pub f: usize,
    pub phi_content: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub phi_stderr: f64,
    pub intrinsic: IntrinsicVolumes,
    pub cent: Vec<f64>,
    pub sampler: Sampler,
    pub weight: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl From<&CellRecord> for CellRecordJson {
    fn from(r: &CellRecord) -> Self {
        CellRecordJson {
            polytope: PolytopeJson::from(&r.polytope),
            f: r.f,
            phi_content: r.phi_content,
            phi_stderr: r.phi_stderr,
            intrinsic: r.intrinsic.clone(),
            cent: r.cent.iter().copied().collect(),
            sampler: r.sampler,
            weight: r.weight,
        }
    }
}

impl TryFrom<CellRecordJson> for CellRecord {
    type Error = GeomError;

    fn try_from(j: CellRecordJson) -> Result<CellRecord, GeomError> {
        Ok(CellRecord {
            polytope: Polytope::try_from(j.polytope)?,
            f: j.f,
            phi_content: j.phi_content,
            phi_stderr: j.phi_stderr,
            intrinsic: j.intrinsic,
            cent: Vector::from_vec(j.cent),
            sampler: j.sampler,
            weight: j.weight,
        })
    }
}

impl CellRecord {
    pub fn new(polytope: Polytope, phi: &DirectionalDistribution, sampler: Sampler, weight: f64) -> CellRecord {
        let intrinsic = intrinsic_volumes_auto(&polytope);
        let d = polytope.dim();
        let content = if phi.is_isotropic() && intrinsic.stderr.is_none() {
            Estimate::exact(intrinsic.get(1) * kappa(d - 1) / (d as f64 * kappa(d)))
        } else {
            phi.content(&polytope)
        };
        let c = cent(&polytope, CenterKind::Centroid).unwrap_or_else(|_| polytope.vertex_mean());
        CellRecord {
            f: polytope.n_facets(),
            phi_content: content.value,
            phi_stderr: content.stderr,
            intrinsic,
            cent: c,
            sampler,
            weight,
            polytope,
        }
    }

    pub fn volume(&self) -> f64 {
        self.intrinsic.volume()
    }

    /// `V_j^{1/j} / V_i^{1/i}`.
    pub fn isoperimetric_ratio(&self, i: usize, j: usize) -> f64 {
        self.intrinsic.ratio(i, j).unwrap_or(f64::NAN)
    }
}

/// Draws the hyperplanes hitting `k` by thinning the hits of the smallest
/// origin-centered ball containing it.
pub fn sample_hits(k: &dyn ConvexBody, cfg: &ProcessConfig, rng: &mut Rng) -> Vec<Hyperplane> {
    let r = k.circumradius();
    let mut out = Vec::new();
    if !(r > 0.0) {
        return out;
    }
    let n = poisson(cfg.gamma * r, rng);
    for _ in 0..n {
        let u = cfg.phi.sample(rng);
        let t = rng.random_range(0.0..r);
        if t <= k.support(&u) && -t <= k.support(&-&u) {
            out.push(Hyperplane { normal: u, offset: t });
        }
    }
    out
}

/// Hits of the ball `B(0, r)`, the fast path of [`sample_hits`].
pub fn sample_ball_hits(r: f64, cfg: &ProcessConfig, rng: &mut Rng) -> Vec<Hyperplane> {
    shell_hits(0.0, r, cfg, rng)
}

/// Hyperplanes with offsets in `(r0, r1]`.
fn shell_hits(r0: f64, r1: f64, cfg: &ProcessConfig, rng: &mut Rng) -> Vec<Hyperplane> {
    if r1 <= r0 {
        return Vec::new();
    }
    let n = poisson(cfg.gamma * (r1 - r0), rng);
    (0..n)
        .map(|_| {
            let u = cfg.phi.sample(rng);
            let t = r0 + (r1 - r0) * (1.0 - rng.random::<f64>());
            Hyperplane { normal: u, offset: t }
        })
        .collect()
}

fn poisson(mean: f64, rng: &mut Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCellOptions {
    /// Give up once the radius would exceed `cap_factor / γ`.
    pub cap_factor: f64,
    /// Condition on no hyperplane passing within this distance of the
    /// origin, i.e. on `B(0, min_offset)` lying inside the cell.
    pub min_offset: f64,
}

impl Default for ZeroCellOptions {
    fn default() -> Self {
        ZeroCellOptions {
            cap_factor: (1u64 << 20) as f64,
            min_offset: 0.0,
        }
    }
}

/// The cell containing the origin, weighted by `1 / V_d` so that the
/// records average to typical-cell expectations.
pub fn zero_cell(cfg: &ProcessConfig, rng: &mut Rng) -> Result<CellRecord, ProcessError> {
    zero_cell_with(cfg, ZeroCellOptions::default(), rng)
}

pub fn zero_cell_with(cfg: &ProcessConfig, opts: ZeroCellOptions, rng: &mut Rng) -> Result<CellRecord, ProcessError> {
    let p = zero_cell_polytope(cfg, opts, rng)?;
    let mut rec = CellRecord::new(p, &cfg.phi, Sampler::ZeroCell, 1.0);
    rec.weight = 1.0 / rec.volume();
    Ok(rec)
}

/// Doubling search: sample the hits of `B(0, R)`, intersect their origin
/// sides, and stop once the cell sits inside `B(0, R/2)`; on each doubling
/// only the new shell `R < t <= 2R` is drawn.
pub fn zero_cell_polytope(cfg: &ProcessConfig, opts: ZeroCellOptions, rng: &mut Rng) -> Result<Polytope, ProcessError> {
    let cap = opts.cap_factor / cfg.gamma;
    let rho = opts.min_offset.max(0.0);
    let mut r = (1.0 / cfg.gamma).max(2.0 * rho).min(cap);
    let mut hs: Vec<_> = shell_hits(rho, r, cfg, rng)
        .into_iter()
        .map(|h| h.halfspace(Side::Origin))
        .collect();
    loop {
        if hs.len() > cfg.d {
            match intersect_halfspaces(&hs) {
                Ok(inter) => {
                    if inter.polytope.circumradius() <= r / 2.0 {
                        return Ok(inter.polytope);
                    }
                    // the cell only shrinks from here, so redundant
                    // constraints stay redundant
                    hs = inter.kept.iter().map(|&i| hs[i].clone()).collect();
                }
                Err(GeomError::Degenerate(DegenerateKind::Unbounded)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        if 2.0 * r > cap {
            return Err(ProcessError::NonTermination { radius: r, cap });
        }
        hs.extend(shell_hits(r, 2.0 * r, cfg, rng).into_iter().map(|h| h.halfspace(Side::Origin)));
        r *= 2.0;
    }
}

/// Typical-cell mean of `g` from zero-cell records:
/// `sum w g(Z) / sum w` with delta-method standard error.
pub fn typical_cell_expectation<G: Fn(&CellRecord) -> f64>(
    records: &[CellRecord],
    g: G,
) -> Result<Estimate, ProcessError> {
    if records.is_empty() {
        return Err(ProcessError::Empty("no records".into()));
    }
    let n = records.len() as f64;
    let (mut sw, mut swg) = (0.0, 0.0);
    let vals: Vec<(f64, f64)> = records.iter().map(|r| (r.weight, g(r))).collect();
    for &(w, x) in &vals {
        sw += w;
        swg += w * x;
    }
    let est = swg / sw;
    let wbar = sw / n;
    let var = vals.iter().map(|(w, x)| (w * (x - est)).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(Estimate {
        value: est,
        stderr: (var / n).sqrt() / wbar,
    })
}

/// `P(no hyperplane meets k)`, the void probability `exp(-γ Φ(k))`.
pub fn void_probability(k: &dyn ConvexBody, cfg: &ProcessConfig) -> f64 {
    (-cfg.gamma * cfg.phi.content(k).value).exp()
}

/// A ball centered at the origin as a hit window.
pub fn ball_window(d: usize, r: f64) -> Ball {
    Ball::centered(d, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn iso(d: usize, gamma: f64) -> ProcessConfig {
        ProcessConfig::new(gamma, DirectionalDistribution::isotropic(d).unwrap(), 1).unwrap()
    }

    #[test]
    fn ball_hit_count_mean() {
        let cfg = iso(2, 3.0);
        let ball = Ball::centered(2, 2.0);
        let mut r = rng::substream(1, 0, 0);
        let m = 20_000;
        let total: usize = (0..m).map(|_| sample_hits(&ball, &cfg, &mut r).len()).sum();
        let mean = total as f64 / m as f64;
        assert!((mean - 6.0).abs() < 3.0 * (6.0f64 / m as f64).sqrt(), "{mean}");
    }

    #[test]
    fn void_probability_of_unit_ball() {
        let cfg = iso(2, 2.0);
        let ball = Ball::centered(2, 1.0);
        let mut r = rng::substream(2, 0, 0);
        let m = 40_000;
        let empty = (0..m).filter(|_| sample_hits(&ball, &cfg, &mut r).is_empty()).count();
        let p = (-2.0f64).exp();
        let se = (p * (1.0 - p) / m as f64).sqrt();
        assert!((empty as f64 / m as f64 - p).abs() < 4.0 * se);
        assert!((void_probability(&ball, &cfg) - p).abs() < 1e-15);
    }

    #[test]
    fn zero_cell_contains_origin_strictly() {
        for d in 2..=3 {
            let cfg = iso(d, 1.0);
            for i in 0..20 {
                let mut r = rng::substream(3, d as u64, i);
                let rec = zero_cell(&cfg, &mut r).unwrap();
                assert!(rec.polytope.halfspaces().iter().all(|h| h.offset > 0.0));
                assert!(rec.polytope.contains(&Vector::zeros(d), -1e-12));
                assert!(rec.f > d);
                assert!((rec.weight * rec.volume() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forced_empty_process_hits_the_cap() {
        let cfg = iso(2, 1.0);
        let opts = ZeroCellOptions {
            cap_factor: 64.0,
            min_offset: 64.0,
        };
        let mut r = rng::substream(4, 0, 0);
        assert!(matches!(
            zero_cell_with(&cfg, opts, &mut r),
            Err(ProcessError::NonTermination { .. })
        ));
    }

    #[test]
    fn conditioned_zero_cell_contains_the_ball() {
        let cfg = iso(2, 1.0);
        let opts = ZeroCellOptions {
            min_offset: 20.0,
            ..Default::default()
        };
        let mut r = rng::substream(5, 0, 0);
        let p = zero_cell_polytope(&cfg, opts, &mut r).unwrap();
        assert!(p.halfspaces().iter().all(|h| h.offset > 20.0));
        assert!(p.n_facets() >= 8);
    }

    #[test]
    fn constant_statistic_has_unit_expectation() {
        let cfg = iso(2, 1.0);
        let recs: Vec<CellRecord> = (0..30)
            .map(|i| zero_cell(&cfg, &mut rng::substream(6, 0, i)).unwrap())
            .collect();
        let e = typical_cell_expectation(&recs, |_| 1.0).unwrap();
        assert_eq!(e.value, 1.0);
        assert!(typical_cell_expectation(&[], |_| 1.0).is_err());
    }

    #[test]
    fn record_json_round_trip() {
        let cfg = iso(2, 1.0);
        let rec = zero_cell(&cfg, &mut rng::substream(7, 0, 0)).unwrap();
        let j = serde_json::to_string(&CellRecordJson::from(&rec)).unwrap();
        let back: CellRecordJson = serde_json::from_str(&j).unwrap();
        let rec2 = CellRecord::try_from(back).unwrap();
        assert_eq!(rec, rec2);
    }
}
