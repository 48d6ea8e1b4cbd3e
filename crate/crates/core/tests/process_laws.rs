use hypercell::direction::DirectionalDistribution;
use hypercell::geom::{from_slice, intersect_halfspaces, Ball, ConvexBody, Halfspace, Polytope, Side};
use hypercell::process::{sample_ball_hits, sample_hits, void_probability, zero_cell, ProcessConfig};
use hypercell::rng::{substream, tag};
use hypercell::stats::{chi_square_sf, ks_two_sample};

#[test]
fn void_probability_matches_empty_hit_frequency() {
    let iso2 = ProcessConfig::new(0.7, DirectionalDistribution::isotropic(2).unwrap(), 0).unwrap();
    let iso3 = ProcessConfig::new(0.5, DirectionalDistribution::isotropic(3).unwrap(), 0).unwrap();
    let tri = Polytope::from_halfspaces(&[
        Halfspace::new(from_slice(&[0.0, -1.0]), 0.2, Side::Origin).unwrap(),
        Halfspace::new(from_slice(&[1.0, 1.0]).normalize(), 0.8, Side::Origin).unwrap(),
        Halfspace::new(from_slice(&[-1.0, 1.0]).normalize(), 0.8, Side::Origin).unwrap(),
    ])
    .unwrap();
    let off_center = Polytope::cube(2, 1.0).translated(&from_slice(&[2.0, -1.5]));
    let bodies: Vec<(&str, Box<dyn ConvexBody>, &ProcessConfig)> = vec![
        ("square", Box::new(Polytope::cube(2, 1.5)), &iso2),
        ("triangle", Box::new(tri), &iso2),
        ("shifted square", Box::new(off_center), &iso2),
        ("shifted ball", Box::new(Ball { center: from_slice(&[0.5, 1.0, 0.0]), radius: 0.8 }), &iso3),
        ("thin box", Box::new(Polytope::axis_box(&[-1.0, -0.1, -0.1], &[1.0, 0.1, 0.1])), &iso3),
    ];
    let trials = 20_000u64;
    for (k, (name, body, cfg)) in bodies.iter().enumerate() {
        let p = void_probability(body.as_ref(), cfg);
        let empty = (0..trials)
            .filter(|&i| sample_hits(body.as_ref(), cfg, &mut substream(3, k as u64, i)).is_empty())
            .count() as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let emp = empty / trials as f64;
        assert!((emp - p).abs() < 4.0 * se, "{name}: empirical {emp} vs e^(-γΦ) = {p}");
    }
}

#[test]
fn ball_hits_count_is_poisson_with_mean_gamma_r() {
    let cfg = ProcessConfig::new(2.0, DirectionalDistribution::isotropic(3).unwrap(), 0).unwrap();
    let n = 4000;
    let total: usize = (0..n).map(|i| sample_ball_hits(1.5, &cfg, &mut substream(4, 0, i)).len()).sum();
    let mean = total as f64 / n as f64;
    assert!((mean - 3.0).abs() < 4.0 * (3.0 / n as f64).sqrt(), "mean {mean}");
}

/// One-shot reference: all hyperplanes within a fixed large radius.
fn one_shot_zero_cell(cfg: &ProcessConfig, r: f64, i: u64) -> Option<(usize, f64)> {
    let hs: Vec<Halfspace> = sample_ball_hits(r, cfg, &mut substream(5, tag("one-shot"), i))
        .iter()
        .map(|h| h.halfspace(Side::Origin))
        .collect();
    let p = intersect_halfspaces(&hs).ok()?.polytope;
    // hyperplanes beyond r cannot cut a cell inside B(0, r)
    (p.circumradius() < r).then(|| (p.n_facets(), cfg.phi.content(&p).value))
}

#[test]
fn shell_growth_matches_one_shot_sampling() {
    let cfg = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(2).unwrap(), 0).unwrap();
    let n = 3000;
    let grown: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            let c = zero_cell(&cfg, &mut substream(5, tag("grown"), i)).unwrap();
            (c.f, c.phi_content)
        })
        .collect();
    let shot: Vec<(usize, f64)> = (0..n).filter_map(|i| one_shot_zero_cell(&cfg, 160.0, i)).collect();
    assert!(shot.len() > n as usize * 99 / 100, "only {} one-shot cells", shot.len());

    let a: Vec<f64> = grown.iter().map(|c| c.1).collect();
    let b: Vec<f64> = shot.iter().map(|c| c.1).collect();
    let (_, p) = ks_two_sample(&a, &b);
    assert!(p > 0.001, "KS on Φ: p = {p}");

    // chi-square homogeneity on facet counts, tail bins pooled
    let bin = |f: usize| f.clamp(3, 9) - 3;
    let mut table = [[0.0f64; 7]; 2];
    for c in &grown {
        table[0][bin(c.0)] += 1.0;
    }
    for c in &shot {
        table[1][bin(c.0)] += 1.0;
    }
    let rows = [table[0].iter().sum::<f64>(), table[1].iter().sum::<f64>()];
    let total = rows[0] + rows[1];
    let mut stat = 0.0;
    let mut df = 0;
    for k in 0..7 {
        let col = table[0][k] + table[1][k];
        if col == 0.0 {
            continue;
        }
        df += 1;
        for r in 0..2 {
            let e = rows[r] * col / total;
            stat += (table[r][k] - e).powi(2) / e;
        }
    }
    let p = chi_square_sf(stat, (df - 1) as f64);
    assert!(p > 0.001, "chi-square on f: p = {p}");
}
