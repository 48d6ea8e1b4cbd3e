//! Distance correlation and its permutation test.

use rand::seq::SliceRandom;

use crate::rng::Rng;

fn centered(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (x[i] - x[j]).abs();
        }
    }
    let row: Vec<f64> = (0..n).map(|i| a[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let grand = row.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] += grand - row[i] - row[j];
        }
    }
    a
}

fn cross(a: &[f64], b: &[f64], n: usize, perm: &[usize]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        let ra = &a[i * n..(i + 1) * n];
        let rb = &b[perm[i] * n..(perm[i] + 1) * n];
        s += perm.iter().zip(ra).map(|(&pj, x)| x * rb[pj]).sum::<f64>();
    }
    s / (n * n) as f64
}

/// Sample distance correlation.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let a = centered(x);
    let b = centered(y);
    let id: Vec<usize> = (0..n).collect();
    let vxy = cross(&a, &b, n, &id);
    let vx = cross(&a, &a, n, &id);
    let vy = cross(&b, &b, n, &id);
    if vx <= 0.0 || vy <= 0.0 {
        return 0.0;
    }
    (vxy.max(0.0) / (vx * vy).sqrt()).sqrt()
}

/// `(dCor, p)` where `p = (1 + #{perm >= obs}) / (1 + permutations)`.
pub fn dcor_permutation_test(x: &[f64], y: &[f64], permutations: usize, rng: &mut Rng) -> (f64, f64) {
    let n = x.len();
    let a = centered(x);
    let b = centered(y);
    let mut perm: Vec<usize> = (0..n).collect();
    let obs = cross(&a, &b, n, &perm);
    let mut exceed = 0usize;
    for _ in 0..permutations {
        perm.shuffle(rng);
        if cross(&a, &b, n, &perm) >= obs - 1e-15 * obs.abs() {
            exceed += 1;
        }
    }
    let p = (1 + exceed) as f64 / (1 + permutations) as f64;
    (distance_correlation(x, y), p)
}
