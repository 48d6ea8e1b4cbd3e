//! Simulation and verification toolkit for stationary Poisson hyperplane
//! tessellations with an even directional distribution: sampling of zero
//! and typical cells, facet-count statistics, polytope approximation by
//! facet pruning, and the tail asymptotics these feed into.

pub mod analytics;
pub mod approx;
pub mod cellstats;
pub mod direction;
pub mod experiment;
pub mod geom;
pub mod process;
pub mod rng;
pub mod stats;

use serde::{Deserialize, Serialize};

/// A number with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Estimate {
        Estimate { value, stderr: 0.0 }
    }

    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.stderr == 0.0
    }
}
