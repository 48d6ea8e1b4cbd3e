//! Facet-count histograms, the conditional Gamma and independence tests,
//! and a direct rejection sampler for cells with a prescribed facet count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{intersect_halfspaces, Halfspace, Polytope, Side};
use crate::process::{CellRecord, ProcessConfig, Sampler};
use crate::rng::{self, Rng};
use crate::stats::{
    dcor_permutation_test, gamma_cdf, ks_test, ks_test_weighted, PoissonBootstrap, TestReport,
};

/// Smallest conditioning bin for the Gamma test.
pub const MIN_GAMMA_SAMPLES: usize = 200;
/// Smallest conditioning bin for the independence test.
pub const MIN_INDEPENDENCE_SAMPLES: usize = 500;
pub const BOOTSTRAP_REPLICATES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("insufficient samples for f = {n}: need {needed}, have {got}")]
    Insufficient { n: usize, needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("rejection sampler exhausted: no acceptance in {attempts} attempts")]
    Exhausted { attempts: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetHistogram {
    /// `n -> (q_n, bootstrap stderr)`.
    pub q: BTreeMap<usize, (f64, f64)>,
    /// `n -> r_n = sum_{k >= n} q_k`.
    pub r: BTreeMap<usize, f64>,
    pub total_samples: usize,
    pub weighted: bool,
}

impl FacetHistogram {
    pub fn q(&self, n: usize) -> f64 {
        self.q.get(&n).map_or(0.0, |x| x.0)
    }

    pub fn q_stderr(&self, n: usize) -> f64 {
        self.q.get(&n).map_or(0.0, |x| x.1)
    }

    pub fn r(&self, n: usize) -> f64 {
        match self.r.range(n..).next() {
            Some((_, &v)) => v,
            None => 0.0,
        }
    }

    pub fn max_n(&self) -> usize {
        self.q.keys().next_back().copied().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,q,q_stderr,r\n");
        for (&n, &(q, se)) in &self.q {
            let _ = writeln!(s, "{n},{q},{se},{}", self.r(n));
        }
        s
    }
}

/// Streaming construction with a Poisson bootstrap; records are fed in a
/// fixed order and only per-replicate sums are kept.
pub struct HistogramBuilder {
    weighted: bool,
    boot: PoissonBootstrap,
    sampler: Option<Sampler>,
    mixed: bool,
    count: usize,
    total: f64,
    sums: BTreeMap<usize, f64>,
    rep_total: Vec<f64>,
    rep_sums: BTreeMap<usize, Vec<f64>>,
    mult: Vec<u32>,
}

impl HistogramBuilder {
    pub fn new(weighted: bool, seed: u64) -> HistogramBuilder {
        HistogramBuilder::with_replicates(weighted, seed, BOOTSTRAP_REPLICATES)
    }

    pub fn with_replicates(weighted: bool, seed: u64, replicates: usize) -> HistogramBuilder {
        HistogramBuilder {
            weighted,
            boot: PoissonBootstrap::new(replicates, seed),
            sampler: None,
            mixed: false,
            count: 0,
            total: 0.0,
            sums: BTreeMap::new(),
            rep_total: vec![0.0; replicates],
            rep_sums: BTreeMap::new(),
            mult: Vec::new(),
        }
    }

    pub fn push(&mut self, f: usize, weight: f64, sampler: Sampler) {
        match self.sampler {
            None => self.sampler = Some(sampler),
            Some(s) if s != sampler => self.mixed = true,
            _ => {}
        }
        let w = if self.weighted { weight } else { 1.0 };
        self.total += w;
        *self.sums.entry(f).or_insert(0.0) += w;
        let reps = self.boot.replicates;
        self.boot.multiplicities(self.count as u64, &mut self.mult);
        let row = self.rep_sums.entry(f).or_insert_with(|| vec![0.0; reps]);
        for (b, &m) in self.mult.iter().enumerate() {
            if m > 0 {
                let x = w * m as f64;
                row[b] += x;
                self.rep_total[b] += x;
            }
        }
        self.count += 1;
    }

    pub fn finish(self) -> Result<FacetHistogram, StatsError> {
        if self.count == 0 {
            return Err(StatsError::Invalid("no records".into()));
        }
        if !self.weighted {
            if self.mixed {
                return Err(StatsError::Invalid("records from different samplers need weighting".into()));
            }
            if self.sampler == Some(Sampler::ZeroCell) {
                return Err(StatsError::Invalid("zero-cell records must be weighted".into()));
            }
        }
        let mut q = BTreeMap::new();
        let mut r = BTreeMap::new();
        let mut tail = 0.0;
        let keys: Vec<usize> = self.sums.keys().copied().collect();
        let mut tails = Vec::with_capacity(keys.len());
        for &n in keys.iter().rev() {
            tail += self.sums[&n];
            tails.push((n, tail));
        }
        for (n, t) in tails.into_iter().rev() {
            r.insert(n, t / self.total);
        }
        for &n in &keys {
            let est = self.sums[&n] / self.total;
            let reps: Vec<f64> = self.rep_sums[&n]
                .iter()
                .zip(&self.rep_total)
                .filter(|(_, &t)| t > 0.0)
                .map(|(s, t)| s / t)
                .collect();
            q.insert(n, (est, crate::stats::std_dev(&reps)));
        }
        Ok(FacetHistogram {
            q,
            r,
            total_samples: self.count,
            weighted: self.weighted,
        })
    }
}

pub fn facet_histogram<'a, I>(records: I, weighted: bool, seed: u64) -> Result<FacetHistogram, StatsError>
where
    I: IntoIterator<Item = &'a CellRecord>,
{
    let mut b = HistogramBuilder::new(weighted, seed);
    for rec in records {
        b.push(rec.f, rec.weight, rec.sampler);
    }
    b.finish()
}

fn equal_weights(recs: &[&CellRecord]) -> bool {
    recs.windows(2).all(|w| w[0].weight == w[1].weight)
}

/// KS test of `Φ | f = n` against `Gamma(n - d, γ)`; zero-cell records
/// enter with their weights and an effective sample size.
pub fn gamma_fit_test(records: &[CellRecord], n: usize, gamma: f64) -> Result<TestReport, StatsError> {
    let bin: Vec<&CellRecord> = records.iter().filter(|r| r.f == n).collect();
    if bin.len() < MIN_GAMMA_SAMPLES {
        return Err(StatsError::Insufficient {
            n,
            needed: MIN_GAMMA_SAMPLES,
            got: bin.len(),
        });
    }
    let d = bin[0].polytope.dim();
    let shape = (n - d) as f64;
    let xs: Vec<f64> = bin.iter().map(|r| r.phi_content).collect();
    let cdf = |x: f64| gamma_cdf(shape, gamma, x);
    if equal_weights(&bin) {
        let (stat, p) = ks_test(&xs, cdf);
        Ok(TestReport {
            statistic: stat,
            p_value: p,
            sample_size: xs.len(),
            method: format!("KS vs Gamma({}, {gamma})", n - d),
        })
    } else {
        let w: Vec<f64> = bin.iter().map(|r| r.weight).collect();
        let (stat, p, n_eff) = ks_test_weighted(&xs, &w, cdf);
        Ok(TestReport {
            statistic: stat,
            p_value: p,
            sample_size: n_eff.round() as usize,
            method: format!("weighted KS vs Gamma({}, {gamma})", n - d),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceOptions {
    pub permutations: usize,
    /// The bin is subsampled to at most this many cells.
    pub max_samples: usize,
    pub seed: u64,
}

impl Default for IndependenceOptions {
    fn default() -> Self {
        IndependenceOptions {
            permutations: 2000,
            max_samples: 1000,
            seed: 0,
        }
    }
}

/// Distance-correlation permutation test between `Φ` and a shape statistic
/// among cells with `f = n`.
pub fn independence_test<S: Fn(&CellRecord) -> f64>(
    records: &[CellRecord],
    n: usize,
    statistic: S,
    opts: IndependenceOptions,
) -> Result<TestReport, StatsError> {
    let bin: Vec<&CellRecord> = records.iter().filter(|r| r.f == n).collect();
    if bin.len() < MIN_INDEPENDENCE_SAMPLES {
        return Err(StatsError::Insufficient {
            n,
            needed: MIN_INDEPENDENCE_SAMPLES,
            got: bin.len(),
        });
    }
    let x: Vec<f64> = bin.iter().map(|r| r.phi_content).collect();
    let y: Vec<f64> = bin.iter().map(|r| statistic(r)).collect();
    independence_test_pairs(&x, &y, opts)
}

/// Same test on raw pairs.
pub fn independence_test_pairs(x: &[f64], y: &[f64], opts: IndependenceOptions) -> Result<TestReport, StatsError> {
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if x.is_empty() || constant(x) || constant(y) {
        return Err(StatsError::Degenerate("a variable is constant".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::Degenerate("non-finite values".into()));
    }
    let mut r = rng::substream(opts.seed, rng::tag("independence"), 0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = if x.len() > opts.max_samples {
        let mut idx = sample_indices(&mut r, x.len(), opts.max_samples).into_vec();
        idx.sort_unstable();
        idx.iter().map(|&i| (x[i], y[i])).unzip()
    } else {
        (x.to_vec(), y.to_vec())
    };
    let (dcor, p) = dcor_permutation_test(&xs, &ys, opts.permutations, &mut r);
    Ok(TestReport {
        statistic: dcor,
        p_value: p,
        sample_size: xs.len(),
        method: format!("distance correlation, {} permutations", opts.permutations),
    })
}

#[derive(Debug, Clone)]
pub struct DirectSample {
    pub record: CellRecord,
    pub attempts: u64,
    /// Offsets of the accepted halfspaces, all below `t_max`.
    pub offsets: Vec<f64>,
    pub t_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectOptions {
    pub max_attempts: u64,
    /// Offset range `T`; `None` uses `sqrt(d) + 2 ĉ_Φ`.
    pub t_max: Option<f64>,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions {
            max_attempts: 10_000_000,
            t_max: None,
        }
    }
}

/// `sqrt(d) + 2 ĉ_Φ`, with `ĉ_Φ` the segment lower bound.
pub fn default_offset_range(cfg: &ProcessConfig) -> f64 {
    (cfg.d as f64).sqrt() + 2.0 * cfg.phi.c_phi_lower_bound(4096)
}

/// Rejection sampler for cells with exactly `n` facets: draw `n`
/// halfspaces with `u ~ φ`, a fair side and `t ~ U(0, T)`, and accept when
/// the intersection is a polytope with `n` facets, `Φ < 1` and centroid
/// in `[0, 1]^d`.
pub fn direct_shape_sampler(
    n: usize,
    cfg: &ProcessConfig,
    rng: &mut Rng,
    opts: DirectOptions,
) -> Result<DirectSample, StatsError> {
    let d = cfg.d;
    if n < d + 1 {
        return Err(StatsError::Invalid(format!("need n >= d + 1 = {}, got {n}", d + 1)));
    }
    let t_max = opts.t_max.unwrap_or_else(|| default_offset_range(cfg));
    let mut hs: Vec<Halfspace> = Vec::with_capacity(n);
    for attempt in 1..=opts.max_attempts {
        hs.clear();
        for _ in 0..n {
            let u = cfg.phi.sample(rng);
            let side = if rng.random::<bool>() { Side::Far } else { Side::Origin };
            let t = t_max * (1.0 - rng.random::<f64>());
            hs.push(Halfspace { normal: u, offset: t, side });
        }
        if let Some(p) = accept(&hs, n) {
            let rec = CellRecord::new(p, &cfg.phi, Sampler::DirectShape, 1.0);
            if rec.phi_content < 1.0 && rec.cent.iter().all(|c| (0.0..=1.0).contains(c)) {
                let offsets = hs.iter().map(|h| h.offset).collect();
                return Ok(DirectSample {
                    record: rec,
                    attempts: attempt,
                    offsets,
                    t_max,
                });
            }
        }
    }
    Err(StatsError::Exhausted {
        attempts: opts.max_attempts,
    })
}

fn accept(hs: &[Halfspace], n: usize) -> Option<Polytope> {
    let inter = intersect_halfspaces(hs).ok()?;
    if inter.polytope.n_facets() != n {
        return None;
    }
    // cheap pre-screen before the Φ evaluation
    let c = inter.polytope.vertex_mean();
    if c.iter().any(|x| *x < -1.0 || *x > 2.0) {
        return None;
    }
    Some(inter.polytope)
}

/// Largest `circumradius / T` over accepted samples; below 1 means no
/// accepted cell came near the truncation of the offset range.
pub fn truncation_certificate(samples: &[DirectSample]) -> f64 {
    samples
        .iter()
        .map(|s| s.record.polytope.circumradius() / s.t_max)
        .fold(0.0, f64::max)
}
