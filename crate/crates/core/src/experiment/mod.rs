//! Seeded, parallel experiment runs that bind the samplers, estimators and
//! analytics together and persist their results.
//!
//! A run writes one directory: `config.json` (the resolved configuration),
//! `summary.txt`, and command-specific CSV or JSONL files. Outputs depend
//! only on the configuration, never on the worker count.

mod config;

pub use config::ExperimentConfig;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{self, AnalyticsError, Conditioning, LimitShapeOptions, TailSeriesInput};
use crate::approx::{self, ApproxError, WitnessOptions};
use crate::cellstats::{self, DirectOptions, HistogramBuilder, IndependenceOptions, StatsError};
use crate::direction::DirectionalDistribution;
use crate::geom::Polytope;
use crate::process::{
    self, ArchiveHeader, ArchiveReader, ArchiveWriter, ArrangementOptions, CellRecord, ProcessConfig, ProcessError,
    Sampler, ZeroCellOptions, ARCHIVE_SCHEMA_VERSION,
};
use crate::rng::{self, tag};
use crate::stats::log_log_fit;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

impl ExperimentError {
    /// 2 for configuration problems, 3 for statistical insufficiency.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Schema(_) => 2,
            ExperimentError::Insufficient(_) => 3,
            _ => 1,
        }
    }
}

impl From<ProcessError> for ExperimentError {
    fn from(e: ProcessError) -> Self {
        match e {
            ProcessError::Config(m) => ExperimentError::Schema(m),
            ProcessError::Archive(m) => ExperimentError::Schema(format!("archive: {m}")),
            e => ExperimentError::Failed(e.to_string()),
        }
    }
}

impl From<StatsError> for ExperimentError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Insufficient { .. } | StatsError::Degenerate(_) => ExperimentError::Insufficient(e.to_string()),
            StatsError::Invalid(m) => ExperimentError::Schema(m),
            e => ExperimentError::Failed(e.to_string()),
        }
    }
}

impl From<AnalyticsError> for ExperimentError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Invalid(m) => ExperimentError::Schema(m),
            e => ExperimentError::Insufficient(e.to_string()),
        }
    }
}

impl From<ApproxError> for ExperimentError {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::Argument(m) => ExperimentError::Schema(m),
            e => ExperimentError::Failed(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SampleCells,
    FacetHist,
    ComplementaryTest,
    ShapeDirect,
    ApproxBench,
    Witness,
    PhiTail,
    Envelope,
    LimitShape,
    Elongation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SampleCells => "sample-cells",
            Command::FacetHist => "facet-hist",
            Command::ComplementaryTest => "complementary-test",
            Command::ShapeDirect => "shape-direct",
            Command::ApproxBench => "approx-bench",
            Command::Witness => "witness",
            Command::PhiTail => "phi-tail",
            Command::Envelope => "envelope",
            Command::LimitShape => "limit-shape",
            Command::Elongation => "elongation",
        }
    }
}

/// `--workers`, then `HYPERCELL_WORKERS`, then the machine's parallelism.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    flag.filter(|w| *w > 0)
        .or_else(|| std::env::var("HYPERCELL_WORKERS").ok()?.parse().ok().filter(|w: &usize| *w > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs tasks `start..end` on the pool and returns results in task order.
pub fn ordered_map<T: Send, F: Fn(u64) -> T + Sync + Send>(pool: &rayon::ThreadPool, start: u64, end: u64, f: F) -> Vec<T> {
    pool.install(|| (start..end).into_par_iter().map(&f).collect())
}

pub struct Runner {
    pub cfg: ExperimentConfig,
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Runner {
    pub fn new(cfg: ExperimentConfig, workers: usize) -> Result<Runner, ExperimentError> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| ExperimentError::Failed(e.to_string()))?;
        Ok(Runner { cfg, pool, workers })
    }

    fn process(&self) -> Result<ProcessConfig, ExperimentError> {
        let phi = self.cfg.phi.build(self.cfg.d).map_err(|e| ExperimentError::Schema(e.to_string()))?;
        Ok(ProcessConfig::new(self.cfg.gamma, phi, self.cfg.seed)?)
    }

    fn header(&self, sampler: Sampler) -> ArchiveHeader {
        ArchiveHeader {
            schema_version: ARCHIVE_SCHEMA_VERSION,
            d: self.cfg.d,
            gamma: self.cfg.gamma,
            phi: self.cfg.phi.clone(),
            seed: self.cfg.seed,
            sampler,
        }
    }

    /// Streams `n_samples` cells from the configured sampler to `sink`, in
    /// task order.
    pub fn sample_cells<F: FnMut(CellRecord) -> Result<(), ExperimentError>>(
        &self,
        mut sink: F,
    ) -> Result<usize, ExperimentError> {
        let pc = self.process()?;
        let want = self.cfg.n_samples;
        let batch = (4 * self.workers).max(8) as u64;
        let seed = self.cfg.seed;
        let mut produced = 0usize;
        let mut next = 0u64;
        while produced < want {
            let chunk: Vec<Result<Vec<CellRecord>, ExperimentError>> = match self.cfg.sampler {
                Sampler::ZeroCell => {
                    let opts = ZeroCellOptions {
                        min_offset: self.cfg.min_offset,
                        ..Default::default()
                    };
                    let end = (next + batch).min(want as u64);
                    ordered_map(&self.pool, next, end, |i| {
                        let mut r = rng::substream(seed, tag("zero-cell"), i);
                        Ok(vec![process::zero_cell_with(&pc, opts, &mut r)?])
                    })
                }
                Sampler::Arrangement => {
                    let opts = ArrangementOptions {
                        window_side: self.cfg.window_side,
                        margin: self.cfg.margin,
                    };
                    ordered_map(&self.pool, next, next + batch, |i| {
                        let mut r = rng::substream(seed, tag("arrangement"), i);
                        Ok(process::planar_arrangement_cells(opts, &pc, &mut r)?)
                    })
                }
                Sampler::DirectShape => {
                    let end = (next + batch).min(want as u64);
                    let n = self.cfg.n;
                    ordered_map(&self.pool, next, end, |i| {
                        let mut r = rng::substream(seed, tag("direct-shape"), i);
                        Ok(vec![cellstats::direct_shape_sampler(n, &pc, &mut r, DirectOptions::default())?.record])
                    })
                }
            };
            next += batch;
            for recs in chunk {
                for rec in recs? {
                    if produced < want {
                        sink(rec)?;
                        produced += 1;
                    }
                }
            }
            if self.cfg.sampler == Sampler::Arrangement && next > 1_000_000 && produced == 0 {
                return Err(ExperimentError::Insufficient("window produces no interior cells".into()));
            }
        }
        Ok(produced)
    }

    /// Streams cells from `input` if set, otherwise samples them.
    pub fn for_each_cell<F: FnMut(CellRecord) -> Result<(), ExperimentError>>(
        &self,
        mut sink: F,
    ) -> Result<ArchiveHeader, ExperimentError> {
        match &self.cfg.input {
            Some(path) => {
                let file = File::open(path).map_err(|e| ExperimentError::Schema(format!("input `{path}`: {e}")))?;
                let reader = ArchiveReader::new(BufReader::new(file))?;
                let header = reader.header.clone();
                for rec in reader {
                    sink(rec?)?;
                }
                Ok(header)
            }
            None => {
                self.sample_cells(sink)?;
                Ok(self.header(self.cfg.sampler))
            }
        }
    }

    fn collect_cells(&self) -> Result<(ArchiveHeader, Vec<CellRecord>), ExperimentError> {
        let mut out = Vec::new();
        let h = self.for_each_cell(|r| {
            out.push(r);
            Ok(())
        })?;
        Ok((h, out))
    }

    /// Runs `cmd`, writing everything below `out`; returns the summary text.
    pub fn run(&self, cmd: Command, out: &Path) -> Result<String, ExperimentError> {
        std::fs::create_dir_all(out)?;
        let mut resolved = serde_json::to_string_pretty(&self.cfg).expect("config serializes");
        resolved.push('\n');
        std::fs::write(out.join("config.json"), resolved)?;
        let mut summary = format!("command: {}\nseed: {}\n", cmd.name(), self.cfg.seed);
        match cmd {
            Command::SampleCells => self.cmd_sample(out, &mut summary)?,
            Command::FacetHist => self.cmd_facet_hist(out, &mut summary)?,
            Command::ComplementaryTest => self.cmd_complementary(out, &mut summary)?,
            Command::ShapeDirect => self.cmd_shape_direct(out, &mut summary)?,
            Command::ApproxBench => self.cmd_approx_bench(out, &mut summary)?,
            Command::Witness => self.cmd_witness(out, &mut summary)?,
            Command::PhiTail => self.cmd_phi_tail(out, &mut summary)?,
            Command::Envelope => self.cmd_envelope(out, &mut summary)?,
            Command::LimitShape => self.cmd_limit_shape(out, &mut summary)?,
            Command::Elongation => self.cmd_elongation(out, &mut summary)?,
        }
        std::fs::write(out.join("summary.txt"), &summary)?;
        Ok(summary)
    }

    fn cmd_sample(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let file = BufWriter::new(File::create(out.join("cells.jsonl"))?);
        let mut w = ArchiveWriter::new(file, &self.header(self.cfg.sampler))?;
        let mut hist = std::collections::BTreeMap::<usize, usize>::new();
        self.sample_cells(|r| {
            *hist.entry(r.f).or_default() += 1;
            Ok(w.write(&r)?)
        })?;
        let n = w.written();
        w.finish()?;
        let _ = writeln!(s, "sampler: {}\ncells: {n}", self.cfg.sampler);
        for (f, c) in hist {
            let _ = writeln!(s, "  f = {f}: {c}");
        }
        Ok(())
    }

    fn cmd_facet_hist(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let mut b: Option<HistogramBuilder> = None;
        let seed = self.cfg.seed;
        let reps = self.cfg.bootstrap;
        self.for_each_cell(|r| {
            let builder = b.get_or_insert_with(|| {
                HistogramBuilder::with_replicates(r.sampler == Sampler::ZeroCell, seed, reps)
            });
            builder.push(r.f, r.weight, r.sampler);
            Ok(())
        })?;
        let h = b
            .ok_or_else(|| ExperimentError::Insufficient("no cells".into()))?
            .finish()?;
        std::fs::write(out.join("facets.csv"), h.to_csv())?;
        let _ = writeln!(s, "cells: {}\nweighted: {}", h.total_samples, h.weighted);
        for (n, (q, se)) in &h.q {
            let _ = writeln!(s, "  q_{n} = {q:.6} ± {se:.6}");
        }
        Ok(())
    }

    fn default_ns(&self) -> Vec<usize> {
        if self.cfg.n_values.is_empty() {
            (self.cfg.d + 1..=self.cfg.d + 3).collect()
        } else {
            self.cfg.n_values.clone()
        }
    }

    fn cmd_complementary(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let ns = self.default_ns();
        let mut recs = Vec::new();
        let header = self.for_each_cell(|r| {
            if ns.contains(&r.f) {
                recs.push(r);
            }
            Ok(())
        })?;
        let mut gamma_csv = String::from("n,count,statistic,p_value\n");
        let mut ind_csv = String::from("n,count,dcor,p_value\n");
        let mut ran = 0;
        for &n in &ns {
            match cellstats::gamma_fit_test(&recs, n, header.gamma) {
                Ok(t) => {
                    ran += 1;
                    let _ = writeln!(gamma_csv, "{n},{},{},{}", t.sample_size, t.statistic, t.p_value);
                    let _ = writeln!(s, "gamma fit n = {n}: {t}");
                }
                Err(StatsError::Insufficient { got, .. }) => {
                    let _ = writeln!(s, "gamma fit n = {n}: skipped ({got} cells)");
                }
                Err(e) => return Err(e.into()),
            }
            let opts = IndependenceOptions {
                permutations: self.cfg.permutations,
                seed: self.cfg.seed,
                ..Default::default()
            };
            let ratio = |r: &CellRecord| r.isoperimetric_ratio(1, 2);
            match cellstats::independence_test(&recs, n, ratio, opts) {
                Ok(t) => {
                    ran += 1;
                    let _ = writeln!(ind_csv, "{n},{},{},{}", t.sample_size, t.statistic, t.p_value);
                    let _ = writeln!(s, "independence n = {n}: {t}");
                }
                Err(StatsError::Insufficient { got, .. }) => {
                    let _ = writeln!(s, "independence n = {n}: skipped ({got} cells)");
                }
                Err(e) => return Err(e.into()),
            }
        }
        std::fs::write(out.join("gamma_fit.csv"), gamma_csv)?;
        std::fs::write(out.join("independence.csv"), ind_csv)?;
        if ran == 0 {
            return Err(ExperimentError::Insufficient("no facet bin is large enough for either test".into()));
        }
        Ok(())
    }

    fn cmd_shape_direct(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let pc = self.process()?;
        let n = self.cfg.n;
        let seed = self.cfg.seed;
        let samples = ordered_map(&self.pool, 0, self.cfg.n_samples as u64, |i| {
            let mut r = rng::substream(seed, tag("direct-shape"), i);
            cellstats::direct_shape_sampler(n, &pc, &mut r, DirectOptions::default())
        });
        let samples: Vec<_> = samples.into_iter().collect::<Result<_, _>>()?;
        let file = BufWriter::new(File::create(out.join("cells.jsonl"))?);
        let mut w = ArchiveWriter::new(file, &self.header(Sampler::DirectShape))?;
        let mut csv = String::from("index,attempts,phi,circumradius_over_t\n");
        for (i, d) in samples.iter().enumerate() {
            w.write(&d.record)?;
            let _ = writeln!(
                csv,
                "{i},{},{},{}",
                d.attempts,
                d.record.phi_content,
                d.record.polytope.circumradius() / d.t_max
            );
        }
        w.finish()?;
        std::fs::write(out.join("direct.csv"), csv)?;
        let attempts: u64 = samples.iter().map(|d| d.attempts).sum();
        let _ = writeln!(
            s,
            "n: {n}\nsamples: {}\nacceptance rate: {:.3e}\ntruncation certificate: {:.4}",
            samples.len(),
            samples.len() as f64 / attempts.max(1) as f64,
            cellstats::truncation_certificate(&samples)
        );
        Ok(())
    }

    fn cmd_approx_bench(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let iso2 = DirectionalDistribution::isotropic(2).expect("d = 2");
        let iso3 = DirectionalDistribution::isotropic(3).expect("d = 3");
        // polygon pruning against the closed form
        let mut csv = String::from("n,k,d_h,exact\n");
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for j in 3..=7 {
            let n = 1usize << j;
            let p = Polytope::regular_polygon(n, 1.0);
            let r = approx::prune_to_subset(&p, n / 2, &iso2)?;
            let exact = 1.0 / (2.0 * std::f64::consts::PI / n as f64).cos() - 1.0;
            let _ = writeln!(csv, "{n},{},{},{exact}", n / 2, r.dh);
            xs.push((n / 2) as f64);
            ys.push(r.dh);
        }
        std::fs::write(out.join("prune_polygon.csv"), csv)?;
        let _ = writeln!(s, "polygon prune slope: {:.3} (expect -2)", log_log_fit(&xs, &ys).slope);

        let ks = if self.cfg.ks.is_empty() { vec![40, 20, 10] } else { self.cfg.ks.clone() };
        let mut r = rng::substream(self.cfg.seed, tag("approx-bench"), 0);
        let p = approx::tangent_polytope(&[1.0, 1.0, 1.0], 194, &mut r)?;
        let path = approx::prune_path(&p, &ks, &iso3)?;
        let mut csv = String::from("k,d_h\n");
        for res in &path {
            let _ = writeln!(csv, "{},{}", res.kept.len(), res.dh);
        }
        std::fs::write(out.join("prune_random.csv"), csv)?;
        let last = path.last().expect("at least one k");
        std::fs::write(
            out.join("prune_trace.csv"),
            last.trace.to_csv(p.n_facets(), iso3.content(&p).value),
        )?;
        let kx: Vec<f64> = path.iter().map(|r| r.kept.len() as f64).collect();
        let ky: Vec<f64> = path.iter().map(|r| r.dh).collect();
        let _ = writeln!(s, "random 3d prune slope: {:.3} (expect -1)", log_log_fit(&kx, &ky).slope);

        // removable sets with train/holdout constants
        let cells = self.large_cells(self.cfg.train + self.cfg.holdout, 16)?;
        let costs: Vec<Vec<Option<(f64, f64)>>> = self.pool.install(|| {
            cells
                .par_iter()
                .map(|c| {
                    let prof = approx::removal_profile(&c.polytope, &iso2)?;
                    Ok(approx::normalized_removal_costs(&c.polytope, &prof, c.phi_content))
                })
                .collect::<Result<_, ApproxError>>()
        })?;
        let (train, hold) = costs.split_at(self.cfg.train);
        let (a, b) = approx::fit_removable_constants(train);
        let mut csv = String::from("cell,n,removable,meets_quarter\n");
        let mut ok = 0;
        for (k, c) in hold.iter().enumerate() {
            let j = approx::removable_from_costs(c, a, b).len();
            let good = 4 * j >= c.len();
            ok += good as usize;
            let _ = writeln!(csv, "{k},{},{j},{good}", c.len());
        }
        std::fs::write(out.join("removable.csv"), csv)?;
        let _ = writeln!(
            s,
            "removable constants: alpha_dh = {a:.4}, alpha_phi = {b:.4}\nholdout with |J| >= n/4: {ok}/{}",
            hold.len()
        );

        // normal-cone identity
        let mut csv = String::from("polytope,d,phi,sum,stderr\n");
        let phis2 = phi_family(2);
        let phis3 = phi_family(3);
        let mut r = rng::substream(self.cfg.seed, tag("normal-cones"), 0);
        for k in 0..4 {
            for (d, phis) in [(2usize, &phis2), (3, &phis3)] {
                let p = approx::tangent_polytope(&vec![1.0; d], 6 + 4 * k, &mut r)?;
                for (name, phi) in phis {
                    let m = approx::cone_measures(&p, phi, self.cfg.directions, &mut r)?;
                    let _ = writeln!(csv, "{k},{d},{name},{},{}", m.facet_sum.value, m.facet_sum.stderr);
                }
            }
        }
        std::fs::write(out.join("normal_cones.csv"), csv)?;
        Ok(())
    }

    /// Zero cells conditioned on a large empty ball, kept when `f >= min_f`.
    pub fn large_cells(&self, count: usize, min_f: usize) -> Result<Vec<CellRecord>, ExperimentError> {
        let pc = ProcessConfig::new(self.cfg.gamma, DirectionalDistribution::isotropic(2).expect("d = 2"), self.cfg.seed)?;
        let opts = ZeroCellOptions {
            min_offset: if self.cfg.min_offset > 0.0 { self.cfg.min_offset } else { 320.0 / self.cfg.gamma },
            ..Default::default()
        };
        let mut out = Vec::with_capacity(count);
        let mut next = 0u64;
        let batch = (4 * self.workers).max(16) as u64;
        let seed = self.cfg.seed;
        while out.len() < count {
            let chunk = ordered_map(&self.pool, next, next + batch, |i| {
                process::zero_cell_with(&pc, opts, &mut rng::substream(seed, tag("large-cell"), i))
            });
            next += batch;
            for c in chunk {
                let c = c?;
                if c.f >= min_f && out.len() < count {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    fn cmd_witness(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let phi = self.cfg.phi.build(self.cfg.d).map_err(|e| ExperimentError::Schema(e.to_string()))?;
        let ns = if self.cfg.n_values.is_empty() { vec![16, 32, 64] } else { self.cfg.n_values.clone() };
        let base = WitnessOptions {
            cap_divisor: self.cfg.cap_divisor,
            seed: self.cfg.seed,
            ..Default::default()
        };
        let k = approx::feasible_rho_constant(&phi, &ns, &base)?;
        let opts = WitnessOptions {
            rho_constant: Some(k),
            ..base
        };
        let mut csv = String::from("n,big_caps,rho,containment,set_measure,draws,facets_ok,inside_ok\n");
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for &n in &ns {
            let w = approx::witness_construction(&phi, n, &opts)?;
            let seed = self.cfg.seed;
            let checks = ordered_map(&self.pool, 0, self.cfg.draws as u64, |i| {
                let mut r = rng::substream(seed, tag("witness-draw"), (n as u64) << 32 | i);
                w.draw(&mut r).map(|p| (p.n_facets() == n, p.circumradius() < 1.0))
            });
            let checks: Vec<(bool, bool)> = checks.into_iter().collect::<Result<_, _>>()?;
            let f_ok = checks.iter().filter(|c| c.0).count();
            let b_ok = checks.iter().filter(|c| c.1).count();
            let _ = writeln!(
                csv,
                "{n},{},{},{},{},{},{f_ok},{b_ok}",
                w.big_caps.centers.len(),
                w.rho,
                w.containment,
                w.set_measure(),
                checks.len()
            );
            let _ = writeln!(s, "n = {n}: f = n in {f_ok}/{0}, inside B(0,1) in {b_ok}/{0}", checks.len());
            xs.push(n as f64);
            ys.push(w.set_measure());
        }
        std::fs::write(out.join("witness.csv"), csv)?;
        if xs.len() >= 2 {
            let d = self.cfg.d as f64;
            let _ = writeln!(
                s,
                "measure exponent: {:.3} (expect {:.3})",
                log_log_fit(&xs, &ys).slope,
                -(d + 1.0) / (d - 1.0)
            );
        }
        Ok(())
    }

    fn cmd_phi_tail(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let mut recs: Vec<(usize, f64, f64, Sampler)> = Vec::new();
        let header = self.for_each_cell(|r| {
            recs.push((r.f, r.phi_content, r.weight, r.sampler));
            Ok(())
        })?;
        let (_, rows) = tail_comparison(&recs, header.d, header.gamma, &self.cfg.a_grid, self.cfg.seed, self.cfg.bootstrap)?;
        let mut csv = String::from("a,series,remainder,empirical,empirical_stderr,diff_stderr\n");
        for t in &rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                t.a, t.series, t.remainder, t.empirical, t.empirical_stderr, t.diff_stderr
            );
            let _ = writeln!(
                s,
                "a = {}: series {:.6}, empirical {:.6} ± {:.6}, agrees at 3 se: {}",
                t.a,
                t.series,
                t.empirical,
                t.diff_stderr,
                t.agrees(3.0)
            );
        }
        std::fs::write(out.join("phi_tail.csv"), csv)?;
        Ok(())
    }

    fn cmd_envelope(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let mut b: Option<HistogramBuilder> = None;
        let (seed, reps) = (self.cfg.seed, self.cfg.bootstrap);
        let header = self.for_each_cell(|r| {
            b.get_or_insert_with(|| HistogramBuilder::with_replicates(r.sampler == Sampler::ZeroCell, seed, reps))
                .push(r.f, r.weight, r.sampler);
            Ok(())
        })?;
        let h = b.ok_or_else(|| ExperimentError::Insufficient("no cells".into()))?.finish()?;
        let ns: Vec<usize> = if self.cfg.n_values.is_empty() { Vec::new() } else { self.cfg.n_values.clone() };
        let fit = analytics::envelope_fit(&h, header.d, &ns)?;
        std::fs::write(out.join("envelope.csv"), fit.to_csv())?;
        let phi = header.phi.build(header.d).map_err(|e| ExperimentError::Schema(e.to_string()))?;
        let rec = analytics::recurrence_check(&h, header.d, phi.c_phi_lower_bound(4096));
        let mut csv = String::from("n,rho,stderr\n");
        for (n, r, se) in &rec.ratios {
            let _ = writeln!(csv, "{n},{r},{se}");
        }
        std::fs::write(out.join("recurrence.csv"), csv)?;
        let _ = writeln!(
            s,
            "v_n band: [{:.4}, {:.4}] (ratio {:.3})\nmax recurrence ratio: {:.4}\nincreasing bins: {:?}",
            fit.c_lower,
            fit.c_upper,
            fit.c_upper / fit.c_lower,
            rec.max_ratio,
            rec.increases
        );
        Ok(())
    }

    fn cmd_limit_shape(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let (header, recs) = self.collect_cells()?;
        let phi = header.phi.build(header.d).map_err(|e| ExperimentError::Schema(e.to_string()))?;
        let n_max = phi
            .n_max()
            .map_err(|e| ExperimentError::Schema(format!("limit-shape needs a discrete φ: {e}")))?;
        let opts = LimitShapeOptions {
            bins: self.cfg.bins,
            bootstrap: self.cfg.bootstrap,
            seed: self.cfg.seed,
            ..Default::default()
        };
        let curve = analytics::limit_shape_test(&recs, n_max, &self.cfg.a_grid, |r| r.isoperimetric_ratio(1, 2), opts)?;
        std::fs::write(out.join("limit_shape.csv"), curve.to_csv())?;
        let _ = writeln!(s, "n_max: {n_max}\nreference cells: {}", curve.reference);
        for p in &curve.points {
            let _ = writeln!(s, "  a = {}: {} cells, TV {:.4} [{:.4}, {:.4}]", p.a, p.count, p.tv, p.lo, p.hi);
        }
        Ok(())
    }

    fn cmd_elongation(&self, out: &Path, s: &mut String) -> Result<(), ExperimentError> {
        let (_, recs) = self.collect_cells()?;
        let conds: Vec<Conditioning> = if self.cfg.condition == "facets" {
            self.default_ns().into_iter().map(Conditioning::ByFacets).collect()
        } else {
            self.cfg.a_grid.iter().map(|&a| Conditioning::ByPhi(a)).collect()
        };
        let mut csv = String::from("condition,value,p,ci_lo,ci_hi,n_eff\n");
        for c in conds {
            let (name, v) = match c {
                Conditioning::ByFacets(n) => ("facets", n as f64),
                Conditioning::ByPhi(a) => ("phi", a),
            };
            match analytics::elongation_conditional(&recs, self.cfg.eps, self.cfg.i, self.cfg.j, c) {
                Ok(p) => {
                    let _ = writeln!(csv, "{name},{v},{},{},{},{}", p.p, p.lo, p.hi, p.n_eff);
                    let _ = writeln!(s, "{name} {v}: P = {:.4} [{:.4}, {:.4}]", p.p + 0.0, p.lo + 0.0, p.hi);
                }
                Err(AnalyticsError::EmptyBin(_)) => {
                    let _ = writeln!(s, "{name} {v}: empty");
                }
                Err(e) => return Err(e.into()),
            }
        }
        std::fs::write(out.join("elongation.csv"), csv)?;
        Ok(())
    }
}

/// The isotropic law, a cap mixture and a four-atom discrete law in `R^d`.
pub fn phi_family(d: usize) -> Vec<(&'static str, DirectionalDistribution)> {
    let iso = DirectionalDistribution::isotropic(d).expect("d >= 2");
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    let cap = DirectionalDistribution::cap_mixture(crate::geom::from_slice(&e1), 0.5, 0.3, iso.clone()).expect("valid cap");
    let atoms: Vec<crate::geom::Vector> = (0..d + 1)
        .map(|k| {
            let mut v = vec![0.3; d];
            if k < d {
                v[k] = 1.0;
            } else {
                v.iter_mut().for_each(|x| *x = -1.0);
            }
            crate::geom::from_slice(&v).normalize()
        })
        .collect();
    let disc = DirectionalDistribution::discrete(atoms, None).expect("spanning atoms");
    vec![("isotropic", iso), ("cap-mixture", cap), ("discrete", disc)]
}

/// Series and empirical values of `P(Φ > a)` at one `a`, with a bootstrap
/// standard error of their difference taken over the same resamples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailComparison {
    pub a: f64,
    pub series: f64,
    pub remainder: f64,
    pub empirical: f64,
    pub empirical_stderr: f64,
    pub diff_stderr: f64,
}

impl TailComparison {
    /// Agreement within `z` standard errors of the difference, allowing for
    /// the series remainder.
    pub fn agrees(&self, z: f64) -> bool {
        let gap = self.empirical - self.series;
        gap >= -z * self.diff_stderr && gap <= z * self.diff_stderr + self.remainder
    }
}

/// Compares empirical `P(Φ > a)` with the series fed by the facet
/// histogram of the same `(f, Φ, weight, sampler)` tuples.
pub fn tail_comparison(
    recs: &[(usize, f64, f64, Sampler)],
    d: usize,
    gamma: f64,
    a_grid: &[f64],
    seed: u64,
    replicates: usize,
) -> Result<(cellstats::FacetHistogram, Vec<TailComparison>), ExperimentError> {
    let weighted = recs.first().is_some_and(|r| r.3 == Sampler::ZeroCell);
    let mut b = HistogramBuilder::with_replicates(weighted, seed, replicates);
    for r in recs {
        b.push(r.0, r.2, r.3);
    }
    let h = b.finish()?;
    let input = TailSeriesInput::from_histogram(&h, d, gamma)?;

    let boot = crate::stats::PoissonBootstrap::new(replicates, seed ^ tag("phi-tail"));
    let m = a_grid.len();
    let mut above = vec![vec![0.0; m]; replicates];
    let mut facets: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); replicates];
    let mut den = vec![0.0; replicates];
    let (mut tn, mut td) = (vec![0.0; m], 0.0);
    let mut mult = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        let w = if weighted { r.2 } else { 1.0 };
        td += w;
        for (k, &a) in a_grid.iter().enumerate() {
            if r.1 > a {
                tn[k] += w;
            }
        }
        boot.multiplicities(i as u64, &mut mult);
        for (b, &c) in mult.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let wc = w * c as f64;
            den[b] += wc;
            *facets[b].entry(r.0).or_default() += wc;
            for (k, &a) in a_grid.iter().enumerate() {
                if r.1 > a {
                    above[b][k] += wc;
                }
            }
        }
    }
    let inputs: Vec<Option<TailSeriesInput>> = (0..replicates)
        .map(|b| {
            if den[b] <= 0.0 {
                return None;
            }
            let q = facets[b].iter().map(|(&n, &c)| (n, (c / den[b]).min(1.0))).collect();
            TailSeriesInput::new(d, gamma, q, 0.0).ok()
        })
        .collect();
    let rows = a_grid
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let t = analytics::phi_tail_series(&input, a);
            let (mut emp, mut diff) = (Vec::new(), Vec::new());
            for b in 0..replicates {
                if let Some(inp) = &inputs[b] {
                    let e = above[b][k] / den[b];
                    emp.push(e);
                    diff.push(e - analytics::phi_tail_series(inp, a).value);
                }
            }
            TailComparison {
                a,
                series: t.value,
                remainder: t.remainder,
                empirical: tn[k] / td,
                empirical_stderr: crate::stats::std_dev(&emp),
                diff_stderr: crate::stats::std_dev(&diff),
            }
        })
        .collect();
    Ok((h, rows))
}
