//! Statistical tools shared by the estimators and tests.

mod dcor;
mod ks;
mod special;

pub use dcor::{dcor_permutation_test, distance_correlation};
pub use ks::{
    effective_sample_size, kolmogorov_sf, ks_p_value, ks_statistic, ks_test, ks_test_weighted, ks_two_sample,
    uniformity_p_value,
};
pub use special::{chi_square_sf, gamma_cdf, gamma_p, gamma_q, ln_factorial, ln_gamma, normal_cdf};

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::rng::{self, Rng};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub sample_size: usize,
    pub method: String,
}

impl std::fmt::Display for TestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: statistic {:.4e}, p = {:.4}, n = {}",
            self.method, self.statistic, self.p_value, self.sample_size
        )
    }
}

/// Wilson score interval for `k` successes in `n` trials at level `z`.
pub fn wilson_interval(k: f64, n: f64, z: f64) -> (f64, f64) {
    if n <= 0.0 {
        return (0.0, 1.0);
    }
    let p = k / n;
    let z2 = z * z;
    let den = 1.0 + z2 / n;
    let mid = (p + z2 / (2.0 * n)) / den;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / den;
    ((mid - half).max(0.0), (mid + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares `y = a + b x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = if x.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit {
        slope,
        intercept,
        slope_stderr,
    }
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> LineFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Streaming Poisson bootstrap: record `i` enters replicate `b` with a
/// Poisson(1) multiplicity drawn from a substream keyed by `i`, so the
/// replicates do not depend on how records are batched.
#[derive(Debug, Clone, Copy)]
pub struct PoissonBootstrap {
    pub replicates: usize,
    pub seed: u64,
}

impl PoissonBootstrap {
    pub fn new(replicates: usize, seed: u64) -> PoissonBootstrap {
        PoissonBootstrap { replicates, seed }
    }

    /// Multiplicities of record `index` in every replicate.
    pub fn multiplicities(&self, index: u64, out: &mut Vec<u32>) {
        let mut r: Rng = rng::substream(self.seed, rng::tag("poisson-bootstrap"), index);
        let pois = Poisson::new(1.0).expect("valid rate");
        out.clear();
        out.extend((0..self.replicates).map(|_| pois.sample(&mut r) as u32));
    }
}

/// Sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}
