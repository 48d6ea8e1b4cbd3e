//! P(Φ(Z) > a) from the facet distribution through the Gamma mixture, and
//! the sub-exponential sandwich used in the tail asymptotics.

use std::collections::BTreeMap;

use hypercell::analytics::{gamma_tail, phi_tail_series, sandwich_check, sandwich_threshold, TailSeriesInput};
use hypercell::stats::gamma_q;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // rounded planar isotropic facet frequencies
    let q: BTreeMap<usize, f64> =
        [(3, 0.3554), (4, 0.3815), (5, 0.1921), (6, 0.0580), (7, 0.0112), (8, 0.0016), (9, 0.0002)].into();
    let input = TailSeriesInput::new(2, 1.0, q.clone(), 0.0)?;
    for a in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let t = phi_tail_series(&input, a);
        let mix: f64 = q.iter().map(|(&n, &p)| p * gamma_tail(a, 1.0, n - 2)).sum();
        println!("a = {a}: series {:.10}, Gamma mixture {mix:.10}, remainder {:.1e}", t.value, t.remainder);
    }
    println!("gamma_tail(3, 1, 4) = {:.12}, regularized Q = {:.12}", gamma_tail(3.0, 1.0, 4), gamma_q(4.0, 3.0));

    for d in 2..=4 {
        let alpha = (d as f64 + 1.0) / (d as f64 - 1.0);
        let x = sandwich_threshold(d, alpha);
        let s = sandwich_check(x, alpha, d)?;
        println!("d = {d}: ln bounds [{:.3}, {:.3}] around ln tail {:.3}: {}", s.ln_lower, s.ln_upper, s.ln_tail, s.holds);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("tail series example");
}
