use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::direction::PhiSpec;
use crate::process::Sampler;

/// One resolved experiment description. Every command reads the fields it
/// needs and ignores the rest; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub gamma: f64,
    pub phi: PhiSpec,
    pub seed: u64,
    pub sampler: Sampler,
    pub n_samples: usize,
    pub window_side: f64,
    pub margin: f64,
    /// Zero cells conditioned on no hyperplane within this distance.
    pub min_offset: f64,
    /// Cell archive to analyse instead of sampling afresh.
    pub input: Option<String>,
    /// Facet count for `shape-direct`.
    pub n: usize,
    /// Facet counts for `complementary-test` and `witness`; defaults per command.
    pub n_values: Vec<usize>,
    pub a_grid: Vec<f64>,
    pub eps: f64,
    pub i: usize,
    pub j: usize,
    /// `phi` (condition on `Φ > a`) or `facets` (condition on `f = n`).
    pub condition: String,
    pub bootstrap: usize,
    pub permutations: usize,
    pub cap_divisor: f64,
    pub draws: usize,
    pub ks: Vec<usize>,
    pub train: usize,
    pub holdout: usize,
    pub directions: usize,
    pub bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d: 2,
            gamma: 1.0,
            phi: PhiSpec::Isotropic,
            seed: 0,
            sampler: Sampler::Arrangement,
            n_samples: 10_000,
            window_side: 40.0,
            margin: 0.46,
            min_offset: 0.0,
            input: None,
            n: 5,
            n_values: Vec::new(),
            a_grid: vec![1.0, 2.0, 4.0],
            eps: 0.5,
            i: 1,
            j: 2,
            condition: "phi".into(),
            bootstrap: 200,
            permutations: 2000,
            cap_divisor: 3.0,
            draws: 1000,
            ks: Vec::new(),
            train: 200,
            holdout: 200,
            directions: 100_000,
            bins: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ExperimentError::Schema(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |field: &str, why: String| Err(ExperimentError::Schema(format!("field `{field}`: {why}")));
        if self.d < 2 {
            return bad("d", format!("must be >= 2, got {}", self.d));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma", format!("must be positive, got {}", self.gamma));
        }
        if !(self.window_side > 0.0) {
            return bad("window_side", "must be positive".into());
        }
        if !(0.0..0.5).contains(&self.margin) {
            return bad("margin", format!("must lie in [0, 0.5), got {}", self.margin));
        }
        if !(self.min_offset >= 0.0) {
            return bad("min_offset", "must be >= 0".into());
        }
        if self.a_grid.iter().any(|a| !(*a >= 0.0)) {
            return bad("a_grid", "entries must be >= 0".into());
        }
        if !(self.eps > 0.0) {
            return bad("eps", "must be positive".into());
        }
        if self.condition != "phi" && self.condition != "facets" {
            return bad("condition", format!("must be `phi` or `facets`, got `{}`", self.condition));
        }
        if !(self.cap_divisor >= 1.0) {
            return bad("cap_divisor", "must be >= 1".into());
        }
        if self.bins < 2 {
            return bad("bins", "must be >= 2".into());
        }
        if let Err(e) = self.phi.build(self.d) {
            return bad("phi", e.to_string());
        }
        Ok(())
    }
}
