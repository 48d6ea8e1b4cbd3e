//! Series identities for the size tail, facet-count envelopes, and the
//! limit-shape and elongation checks on sampled cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cellstats::FacetHistogram;
use crate::geom::isoperimetric_bound;
use crate::process::CellRecord;
use crate::stats::{compensated_sum, effective_sample_size, wilson_interval, PoissonBootstrap, Z95};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("only {got} usable bins, need {needed}")]
    TooFewBins { got: usize, needed: usize },
    #[error("conditioning set is empty: {0}")]
    EmptyBin(String),
}

/// `∫_a^∞ e^{-γt} γ^k t^{k-1}/(k-1)! dt = e^{-γa} Σ_{m<k} (γa)^m/m!`,
/// summed term by term in the log domain.
pub fn gamma_tail(a: f64, gamma: f64, k: usize) -> f64 {
    assert!(k >= 1 && a >= 0.0, "gamma_tail needs a >= 0 and k >= 1");
    let x = gamma * a;
    if x == 0.0 {
        return 1.0;
    }
    let lx = x.ln();
    let mut l = -x;
    let terms = (0..k).map(|m| {
        if m > 0 {
            l += lx - (m as f64).ln();
        }
        l.exp()
    });
    compensated_sum(terms).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSeriesInput {
    pub d: usize,
    pub gamma: f64,
    pub q: BTreeMap<usize, f64>,
    /// Probability mass possibly missing from `q`.
    pub truncation_error_bound: f64,
}

impl TailSeriesInput {
    pub fn new(d: usize, gamma: f64, q: BTreeMap<usize, f64>, truncation_error_bound: f64) -> Result<Self, AnalyticsError> {
        if !(gamma > 0.0) {
            return Err(AnalyticsError::Invalid(format!("gamma must be positive, got {gamma}")));
        }
        if let Some((&n, _)) = q.iter().find(|(&n, &p)| n < d + 1 || !(0.0..=1.0).contains(&p)) {
            return Err(AnalyticsError::Invalid(format!("bad q entry at n = {n}")));
        }
        let total: f64 = q.values().sum();
        if total > 1.0 + 1e-9 {
            return Err(AnalyticsError::Invalid(format!("q sums to {total} > 1")));
        }
        Ok(TailSeriesInput {
            d,
            gamma,
            q,
            truncation_error_bound,
        })
    }

    pub fn from_histogram(h: &FacetHistogram, d: usize, gamma: f64) -> Result<Self, AnalyticsError> {
        let q = h.q.iter().filter(|(_, v)| v.0 > 0.0).map(|(&n, v)| (n, v.0)).collect();
        TailSeriesInput::new(d, gamma, q, 0.0)
    }

    /// `r_n = Σ_{m >= n} q_m`.
    pub fn r(&self, n: usize) -> f64 {
        compensated_sum(self.q.range(n..).map(|(_, &p)| p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailValue {
    pub value: f64,
    /// The true tail lies in `[value, value + remainder]`.
    pub remainder: f64,
    pub terms: usize,
}

/// `P(Φ(Z) > a) = e^{-γa} Σ_{n>=0} r_{n+d+1} (γa)^n / n!`.
pub fn phi_tail_series(input: &TailSeriesInput, a: f64) -> TailValue {
    let x = input.gamma * a;
    let d = input.d;
    let top = input.q.keys().next_back().copied().unwrap_or(d);
    let rs: Vec<f64> = (d + 1..=top.max(d + 1)).map(|n| input.r(n)).collect();
    if x == 0.0 {
        return TailValue {
            value: rs.first().copied().unwrap_or(0.0),
            remainder: input.truncation_error_bound,
            terms: 1,
        };
    }
    let lx = x.ln();
    let mut l = -x;
    let mut terms = Vec::with_capacity(rs.len());
    let mut tail = 0.0;
    for (n, &r) in rs.iter().enumerate() {
        if n > 0 {
            l += lx - (n as f64).ln();
        }
        let t = r * l.exp();
        terms.push(t);
        // remaining terms are at most r_n · P(Poisson(x) > n)
        let partial: f64 = compensated_sum(terms.iter().copied());
        if n as f64 > x && t <= 1e-16 * partial {
            let bound = r * crate::stats::gamma_p(n as f64 + 1.0, x);
            if bound < 1e-12 {
                tail = bound;
                break;
            }
        }
    }
    TailValue {
        value: compensated_sum(terms.iter().copied()),
        remainder: tail + input.truncation_error_bound,
        terms: terms.len(),
    }
}

/// `ln Σ_{n >= from_n} x^n / (n!)^α`, never overflowing.
pub fn ln_subexp_series(x: f64, alpha: f64, from_n: usize) -> f64 {
    assert!(x >= 0.0 && alpha >= 1.0, "needs x >= 0 and alpha >= 1");
    if x == 0.0 {
        return if from_n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let lx = x.ln();
    let ln_term = |n: usize| n as f64 * lx - alpha * crate::stats::ln_factorial(n as u64);
    // terms are log-concave in n with the peak where (n+1)^α passes x
    let peak = (x.powf(1.0 / alpha).ceil() as usize).saturating_sub(1).max(from_n);
    let lmax = ln_term(peak).max(ln_term(peak + 1));
    // terms below e^{-50} of the peak on the rising side are dropped
    let mut start = peak;
    while start > from_n && ln_term(start - 1) > lmax - 50.0 {
        start -= 1;
    }
    let mut terms = Vec::new();
    let mut n = start;
    let mut l = ln_term(n);
    loop {
        let t = (l - lmax).exp();
        terms.push(t);
        if n > peak {
            let ratio = (lx - alpha * ((n + 1) as f64).ln()).exp();
            if ratio < 0.5 && t * ratio / (1.0 - ratio) <= 1e-17 {
                break;
            }
        }
        n += 1;
        l += lx - alpha * (n as f64).ln();
    }
    lmax + compensated_sum(terms).ln()
}

/// `Σ_{n >= from_n} x^n / (n!)^α`; `inf` when it exceeds `f64`.
pub fn subexp_series(x: f64, alpha: f64, from_n: usize) -> f64 {
    ln_subexp_series(x, alpha, from_n).exp()
}

/// Smallest `x` at which the lower sandwich bound is claimed.
pub fn sandwich_threshold(d: usize, alpha: f64) -> f64 {
    (2.0 * (3 * d + 5) as f64).powf(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub x: f64,
    pub alpha: f64,
    /// `α x^{1/α} / 2`, `ln Σ_{n>=d+1}`, `ln Σ_{n>=0}`, `α x^{1/α}`.
    pub ln_lower: f64,
    pub ln_tail: f64,
    pub ln_full: f64,
    pub ln_upper: f64,
    /// `ln(Σ_{n<=d} / Σ_{n>=d+1})`. The head is far below the resolution of
    /// `ln_full`, so the strict middle inequality is read off this being
    /// finite.
    pub ln_head_ratio: f64,
    pub holds: bool,
}

/// `exp(α x^{1/α}/2) < Σ_{n>=d+1} < Σ_{n>=0} < exp(α x^{1/α})`, in logs.
pub fn sandwich_check(x: f64, alpha: f64, d: usize) -> Result<Sandwich, AnalyticsError> {
    let xmin = sandwich_threshold(d, alpha);
    if x < xmin {
        return Err(AnalyticsError::Invalid(format!("x = {x} is below the threshold {xmin}")));
    }
    let ln_upper = alpha * x.powf(1.0 / alpha);
    let ln_lower = ln_upper / 2.0;
    let ln_tail = ln_subexp_series(x, alpha, d + 1);
    let ln_full = ln_subexp_series(x, alpha, 0);
    let heads: Vec<f64> = (0..=d)
        .map(|n| n as f64 * x.ln() - alpha * crate::stats::ln_factorial(n as u64))
        .collect();
    let hmax = heads.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ln_head = hmax + compensated_sum(heads.iter().map(|h| (h - hmax).exp())).ln();
    let ln_head_ratio = ln_head - ln_tail;
    Ok(Sandwich {
        x,
        alpha,
        ln_lower,
        ln_tail,
        ln_full,
        ln_upper,
        ln_head_ratio,
        holds: ln_lower < ln_tail && ln_head_ratio > f64::NEG_INFINITY && ln_full < ln_upper,
    })
}

/// The grid `x_min(d, α) 2^k`, `k = 0..6`, for `α = (d+1)/(d-1)`, `d = 2..6`.
pub fn sandwich_grid() -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for d in 2..=6usize {
        let alpha = (d + 1) as f64 / (d - 1) as f64;
        let x0 = sandwich_threshold(d, alpha);
        for k in 0..=6 {
            out.push((d, alpha, x0 * 2f64.powi(k)));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub n: usize,
    pub v: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub points: Vec<EnvelopePoint>,
    pub c_upper: f64,
    pub c_lower: f64,
}

impl EnvelopeFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,v,ci_lo,ci_hi\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{},{}\n", p.n, p.v, p.lo, p.hi));
        }
        s
    }
}

/// `v_n = n^{2/(d-1)} q_n^{1/n}` over the populated bins in `ns`
/// (all populated bins when `ns` is empty), with delta-method intervals.
pub fn envelope_fit(h: &FacetHistogram, d: usize, ns: &[usize]) -> Result<EnvelopeFit, AnalyticsError> {
    let points: Vec<EnvelopePoint> = h
        .q
        .iter()
        .filter(|(n, (q, _))| *q > 0.0 && (ns.is_empty() || ns.contains(n)))
        .map(|(&n, &(q, se))| {
            let v = (n as f64).powf(2.0 / (d as f64 - 1.0)) * q.powf(1.0 / n as f64);
            let sv = v * se / (n as f64 * q);
            EnvelopePoint {
                n,
                v,
                lo: v - Z95 * sv,
                hi: v + Z95 * sv,
            }
        })
        .collect();
    if points.len() < 3 {
        return Err(AnalyticsError::TooFewBins {
            got: points.len(),
            needed: 3,
        });
    }
    Ok(EnvelopeFit {
        c_upper: points.iter().map(|p| p.v).fold(f64::NEG_INFINITY, f64::max),
        c_lower: points.iter().map(|p| p.v).fold(f64::INFINITY, f64::min),
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    /// `(n, ρ_n, stderr)`.
    pub ratios: Vec<(usize, f64, f64)>,
    pub max_ratio: f64,
    /// `max ρ_n / c_Φ`, the empirical constant.
    pub constant: f64,
    /// Bins where `q_n` exceeds `q_{n-1}` beyond the 95% interval.
    pub increases: Vec<usize>,
    pub skipped: Vec<usize>,
}

/// `ρ_n = q_n / (q_{n-1} n^{-2/(d-1)})` over consecutive populated bins.
pub fn recurrence_check(h: &FacetHistogram, d: usize, c_phi: f64) -> RecurrenceReport {
    let mut ratios = Vec::new();
    let mut increases = Vec::new();
    let mut skipped = Vec::new();
    for (&n, &(q, se)) in &h.q {
        if n == 0 || q <= 0.0 {
            continue;
        }
        let (qp, sep) = match h.q.get(&(n - 1)) {
            Some(&(qp, sep)) if qp > 0.0 => (qp, sep),
            _ => {
                if h.q.range(..n).next().is_some() {
                    skipped.push(n);
                }
                continue;
            }
        };
        let scale = (n as f64).powf(-2.0 / (d as f64 - 1.0));
        let rho = q / (qp * scale);
        let se_rho = rho * ((se / q).powi(2) + (sep / qp).powi(2)).sqrt();
        ratios.push((n, rho, se_rho));
        if q - qp > Z95 * (se * se + sep * sep).sqrt() {
            increases.push(n);
        }
    }
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    RecurrenceReport {
        constant: max_ratio / c_phi,
        max_ratio,
        ratios,
        increases,
        skipped,
    }
}

/// `n` from `from` on where `q_n > q_{n+1}` holds beyond the combined
/// `z`-interval; returns the first failing `n` otherwise.
pub fn strictly_decreasing_from(h: &FacetHistogram, from: usize, to: usize, z: f64) -> Result<(), usize> {
    for n in from..to {
        let (a, sa) = (h.q(n), h.q_stderr(n));
        let (b, sb) = (h.q(n + 1), h.q_stderr(n + 1));
        if !(a - b > z * (sa * sa + sb * sb).sqrt()) {
            return Err(n);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvPoint {
    pub a: f64,
    pub count: usize,
    /// Binned TV minus its same-size resampling baseline.
    pub tv: f64,
    pub raw: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitShapeCurve {
    pub n_max: usize,
    pub reference: usize,
    pub points: Vec<TvPoint>,
}

impl LimitShapeCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,count,tv,raw_tv,ci_lo,ci_hi\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{},{},{},{}\n", p.a, p.count, p.tv, p.raw, p.lo, p.hi));
        }
        s
    }

    /// Last grid point with at least `min_count` conditioning cells.
    pub fn last_supported(&self, min_count: usize) -> Option<&TvPoint> {
        self.points.iter().rev().find(|p| p.count >= min_count)
    }

    /// No step up beyond the larger of the two interval half-widths.
    pub fn non_increasing(&self, min_count: usize) -> bool {
        let pts: Vec<&TvPoint> = self.points.iter().filter(|p| p.count >= min_count).collect();
        pts.windows(2).all(|w| {
            let slack = ((w[0].hi - w[0].lo) / 2.0).max((w[1].hi - w[1].lo) / 2.0);
            w[1].tv <= w[0].tv + slack
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitShapeOptions {
    pub bins: usize,
    pub bootstrap: usize,
    /// Same-size random subsets of the reference used for the baseline.
    pub baseline: usize,
    pub seed: u64,
}

impl Default for LimitShapeOptions {
    fn default() -> Self {
        LimitShapeOptions {
            bins: 10,
            bootstrap: 200,
            baseline: 50,
            seed: 0,
        }
    }
}

fn histogram(xs: &[(f64, f64)], edges: &[f64]) -> Vec<f64> {
    let mut h = vec![0.0; edges.len() + 1];
    let mut total = 0.0;
    for &(x, w) in xs {
        h[edges.partition_point(|e| *e <= x)] += w;
        total += w;
    }
    if total > 0.0 {
        h.iter_mut().for_each(|v| *v /= total);
    }
    h
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// TV distance between the binned law of `stat` given `Φ > a` and given
/// `f = n_max`, for each `a`. Bins are reference quantiles. Sampling noise
/// is removed by subtracting the mean TV of same-size random subsets of the
/// reference; intervals come from a Poisson bootstrap.
pub fn limit_shape_test<S: Fn(&CellRecord) -> f64>(
    records: &[CellRecord],
    n_max: usize,
    a_grid: &[f64],
    stat: S,
    opts: LimitShapeOptions,
) -> Result<LimitShapeCurve, AnalyticsError> {
    let vals: Vec<(f64, f64, usize, f64)> = records
        .iter()
        .map(|r| (stat(r), r.phi_content, r.f, r.weight))
        .filter(|v| v.0.is_finite())
        .collect();
    let reference: Vec<(f64, f64)> = vals.iter().filter(|v| v.2 == n_max).map(|v| (v.0, v.3)).collect();
    if reference.is_empty() {
        return Err(AnalyticsError::EmptyBin(format!("no cells with f = {n_max}")));
    }
    let mut sorted: Vec<f64> = reference.iter().map(|v| v.0).collect();
    sorted.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (1..opts.bins).map(|k| sorted[k * sorted.len() / opts.bins]).collect();
    let h_ref = histogram(&reference, &edges);
    let boot = PoissonBootstrap::new(opts.bootstrap, opts.seed);
    let mut rng = crate::rng::substream(opts.seed, crate::rng::tag("limit-shape"), 0);
    let mut points = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let group: Vec<(f64, f64)> = vals.iter().filter(|v| v.1 > a).map(|v| (v.0, v.3)).collect();
        let m = group.len();
        if m == 0 {
            points.push(TvPoint {
                a,
                count: 0,
                tv: f64::NAN,
                raw: f64::NAN,
                lo: f64::NAN,
                hi: f64::NAN,
            });
            continue;
        }
        let raw = tv(&histogram(&group, &edges), &h_ref);
        let mut base = 0.0;
        for _ in 0..opts.baseline {
            let idx = rand::seq::index::sample(&mut rng, reference.len(), m.min(reference.len()));
            let sub: Vec<(f64, f64)> = idx.iter().map(|i| reference[i]).collect();
            base += tv(&histogram(&sub, &edges), &h_ref);
        }
        base /= opts.baseline.max(1) as f64;
        let mut reps = Vec::with_capacity(opts.bootstrap);
        let mut mult = Vec::new();
        let mut weighted: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(m); opts.bootstrap];
        for (i, &(x, w)) in group.iter().enumerate() {
            boot.multiplicities(i as u64, &mut mult);
            for (b, &k) in mult.iter().enumerate() {
                if k > 0 {
                    weighted[b].push((x, w * k as f64));
                }
            }
        }
        for g in &weighted {
            reps.push(tv(&histogram(g, &edges), &h_ref));
        }
        reps.sort_by(f64::total_cmp);
        // resampling inflates TV, so the interval keeps the spread of the
        // replicates around their mean and recentres it on the estimate
        let point = raw - base;
        let (lo, hi) = if reps.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let mean = reps.iter().sum::<f64>() / reps.len() as f64;
            let q = |p: f64| reps[((reps.len() - 1) as f64 * p).round() as usize];
            (point - (mean - q(0.025)), point + (q(0.975) - mean))
        };
        points.push(TvPoint {
            a,
            count: m,
            tv: point,
            raw,
            lo,
            hi,
        });
    }
    Ok(LimitShapeCurve {
        n_max,
        reference: reference.len(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "value")]
pub enum Conditioning {
    ByFacets(usize),
    ByPhi(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalProbability {
    pub p: f64,
    pub stderr: f64,
    pub lo: f64,
    pub hi: f64,
    /// Effective number of conditioning cells.
    pub n_eff: f64,
}

/// `P(ratio_{ij} < ε | f = n)` or `P(ratio_{ij} < ε | Φ > a)`, weighted by
/// the record weights, with a Wilson interval on the effective count.
pub fn elongation_conditional(
    records: &[CellRecord],
    eps: f64,
    i: usize,
    j: usize,
    mode: Conditioning,
) -> Result<ConditionalProbability, AnalyticsError> {
    let d = records
        .first()
        .map(|r| r.polytope.dim())
        .ok_or_else(|| AnalyticsError::EmptyBin("no records".into()))?;
    if !(1 <= i && i < j && j <= (d - 1).div_ceil(2)) {
        return Err(AnalyticsError::Invalid(format!(
            "need 1 <= i < j <= ceil((d-1)/2) = {}, got ({i}, {j})",
            (d - 1).div_ceil(2)
        )));
    }
    let sel: Vec<(bool, f64)> = records
        .iter()
        .filter(|r| match mode {
            Conditioning::ByFacets(n) => r.f == n,
            Conditioning::ByPhi(a) => r.phi_content > a,
        })
        .map(|r| (r.isoperimetric_ratio(i, j) < eps, r.weight))
        .collect();
    if sel.is_empty() {
        return Err(AnalyticsError::EmptyBin(format!("{mode:?}")));
    }
    let w: Vec<f64> = sel.iter().map(|s| s.1).collect();
    let total: f64 = w.iter().sum();
    let p = sel.iter().filter(|s| s.0).map(|s| s.1).sum::<f64>() / total;
    let n_eff = effective_sample_size(&w);
    let (lo, hi) = wilson_interval(p * n_eff, n_eff, Z95);
    Ok(ConditionalProbability {
        p,
        stderr: (p * (1.0 - p) / n_eff).sqrt(),
        lo,
        hi,
        n_eff,
    })
}

/// The largest possible `(i, j)` ratio, attained only by balls.
pub fn max_ratio(i: usize, j: usize) -> f64 {
    isoperimetric_bound(i, j)
}
