use std::collections::BTreeMap;

use hypercell::analytics::{gamma_tail, ln_subexp_series, phi_tail_series, sandwich_check, sandwich_threshold, TailSeriesInput};
use hypercell::approx::{cone_measures, prune_path, witness_construction, WitnessOptions};
use hypercell::cellstats::{direct_shape_sampler, DirectOptions, HistogramBuilder};
use hypercell::direction::DirectionalDistribution;
use hypercell::geom::{
    convex_hull, from_slice, intersect_halfspaces, intrinsic_volumes_auto, isoperimetric_bound, kappa,
    Halfspace, Polytope, Side, Vector,
};
use hypercell::process::{zero_cell, ProcessConfig, Sampler};
use hypercell::rng::substream;
use proptest::prelude::*;
use rand::Rng;

fn unit(rng: &mut impl Rng, d: usize) -> Vector {
    hypercell::direction::uniform_direction(d, rng)
}

/// Random polytope: a box plus `extra` random halfspaces at offsets in [0.3, 1.5].
fn random_polytope(d: usize, extra: usize, seed: u64) -> Polytope {
    let mut r = substream(seed, 0, 0);
    let mut hs = Polytope::cube(d, 4.0).halfspaces().to_vec();
    for _ in 0..extra {
        let u = unit(&mut r, d);
        let t = r.random_range(0.3..1.5);
        hs.push(Halfspace::new(u, t, Side::Origin).unwrap());
    }
    intersect_halfspaces(&hs).unwrap().polytope
}

fn polytopes() -> impl Strategy<Value = Polytope> {
    (2usize..=3, 0usize..12, any::<u64>()).prop_map(|(d, k, s)| random_polytope(d, k, s))
}

fn max_support_by_constraints(p: &Polytope, u: &Vector) -> f64 {
    // the maximum of a linear functional over a polytope sits on a vertex
    // of the halfspace arrangement; enumerate d-subsets of constraints
    let hs = p.halfspaces();
    let d = p.dim();
    let mut best = f64::NEG_INFINITY;
    let idx: Vec<usize> = (0..hs.len()).collect();
    let mut combo = vec![0usize; d];
    fn rec(k: usize, start: usize, combo: &mut Vec<usize>, idx: &[usize], f: &mut dyn FnMut(&[usize])) {
        if k == combo.len() {
            f(combo);
            return;
        }
        for i in start..idx.len() {
            combo[k] = idx[i];
            rec(k + 1, i + 1, combo, idx, f);
        }
    }
    rec(0, 0, &mut combo, &idx, &mut |c: &[usize]| {
        let a = nalgebra::DMatrix::from_fn(d, d, |r, k| hs[c[r]].outward()[k]);
        let b = nalgebra::DVector::from_fn(d, |r, _| hs[c[r]].rhs());
        if let Some(x) = a.lu().solve(&b) {
            if hs.iter().all(|h| h.violation(&x) <= 1e-9) {
                best = best.max(x.dot(u));
            }
        }
    });
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn support_matches_constraint_oracle(p in polytopes(), s in any::<u64>()) {
        let u = unit(&mut substream(s, 1, 0), p.dim());
        let h = p.support(&u);
        prop_assert!((h - max_support_by_constraints(&p, &u)).abs() <= 1e-9 * p.scale());
    }

    #[test]
    fn phi_content_is_homogeneous_and_translation_invariant(p in polytopes(), t in 0.01f64..10.0, s in any::<u64>()) {
        let d = p.dim();
        let mut r = substream(s, 2, 0);
        let x = unit(&mut r, d) * r.random_range(0.0..5.0);
        let moved = p.transformed(t, &x);
        let iso = DirectionalDistribution::isotropic(d).unwrap();
        let (a, b) = (iso.content(&p).value, iso.content(&moved).value);
        prop_assert!((b - t * a).abs() <= 1e-9 * t * a);
        let atoms: Vec<Vector> = (0..3).map(|_| unit(&mut r, d)).chain((0..d).map(|k| hypercell::geom::unit_vector(d, k))).collect();
        let disc = DirectionalDistribution::discrete(atoms, None).unwrap();
        let (a, b) = (disc.content_exact(&p).unwrap(), disc.content_exact(&moved).unwrap());
        prop_assert!((b - t * a).abs() <= 1e-9 * t * a);
    }

    #[test]
    fn inclusion_is_monotone(p in polytopes(), s in any::<u64>()) {
        let d = p.dim();
        let mut r = substream(s, 3, 0);
        let mut hs = p.halfspaces().to_vec();
        hs.push(Halfspace::new(unit(&mut r, d), r.random_range(0.2..1.0), Side::Origin).unwrap());
        let k = intersect_halfspaces(&hs).unwrap().polytope;
        for _ in 0..20 {
            let u = unit(&mut r, d);
            prop_assert!(k.support(&u) <= p.support(&u) + 1e-9);
        }
        let (vk, vp) = (intrinsic_volumes_auto(&k), intrinsic_volumes_auto(&p));
        for j in 0..=d {
            prop_assert!(vk.get(j) <= vp.get(j) * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn isoperimetric_and_mean_width_bounds(p in polytopes()) {
        let d = p.dim();
        let iv = intrinsic_volumes_auto(&p);
        for i in 1..d {
            for j in i + 1..=d {
                prop_assert!(iv.ratio(i, j).unwrap() <= isoperimetric_bound(i, j) + 1e-9);
            }
        }
        let c_phi = d as f64 * kappa(d) / kappa(d - 1);
        let phi = DirectionalDistribution::isotropic(d).unwrap().content(&p).value;
        prop_assert!(iv.get(1) <= c_phi * phi * (1.0 + 1e-9));
    }

    #[test]
    fn hull_of_vertices_reproduces_facets(p in polytopes()) {
        let h = convex_hull(p.vertices()).unwrap().polytope;
        prop_assert_eq!(h.n_facets(), p.n_facets());
        for a in p.halfspaces() {
            let found = h.halfspaces().iter().any(|b| (a.outward() - b.outward()).norm() < 1e-7 && (a.rhs() - b.rhs()).abs() < 1e-7 * p.scale());
            prop_assert!(found);
        }
    }

    #[test]
    fn discrete_laws_are_even_and_symmetrization_is_idempotent(s in any::<u64>(), d in 2usize..=4) {
        let mut r = substream(s, 4, 0);
        let atoms: Vec<Vector> = (0..d + 2).map(|_| unit(&mut r, d)).collect();
        let phi = DirectionalDistribution::discrete(atoms, None).unwrap();
        let (dirs, w) = phi.atoms().unwrap();
        for (u, wu) in dirs.iter().zip(w) {
            let k = dirs.iter().position(|v| (v + u).norm() < 1e-12).expect("antipode present");
            prop_assert!((w[k] - wu).abs() < 1e-15);
        }
        let again = DirectionalDistribution::discrete(dirs.to_vec(), Some(w.to_vec())).unwrap();
        prop_assert_eq!(again.atoms().unwrap().0.len(), dirs.len());
    }

    #[test]
    fn c_phi_bound_grows_with_samples(s in any::<u64>()) {
        let mut r = substream(s, 5, 0);
        let atoms: Vec<Vector> = (0..5).map(|_| unit(&mut r, 3)).collect();
        let phi = DirectionalDistribution::discrete(atoms, None).unwrap();
        let mut last = 0.0;
        for n in [16, 64, 256, 1024] {
            let c = phi.c_phi_lower_bound(n);
            prop_assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn zero_cells_are_bounded_full_dimensional_and_reproducible(s in any::<u64>(), d in 2usize..=3) {
        let cfg = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(d).unwrap(), s).unwrap();
        let a = zero_cell(&cfg, &mut substream(s, 6, 0)).unwrap();
        let b = zero_cell(&cfg, &mut substream(s, 6, 0)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.f > d);
        prop_assert!(a.volume() > 0.0 && a.polytope.circumradius().is_finite());
    }

    #[test]
    fn histogram_is_normalized(fs in prop::collection::vec(3usize..12, 1..400)) {
        let mut b = HistogramBuilder::new(false, 0);
        for &f in &fs {
            b.push(f, 1.0, Sampler::Arrangement);
        }
        let h = b.finish().unwrap();
        let total: f64 = h.q.values().map(|v| v.0).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (&n, &(q, _)) in &h.q {
            prop_assert!((h.r(n) - h.r(n + 1) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn prune_trace_is_monotone(s in any::<u64>()) {
        let iso = DirectionalDistribution::isotropic(2).unwrap();
        let p = random_polytope(2, 14, s);
        prop_assume!(p.n_facets() >= 8 && p.is_simple());
        let k = p.n_facets() / 2;
        let r = prune_path(&p, &[k], &iso).unwrap().pop().unwrap();
        prop_assert!(r.trace.dh_total.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(r.trace.phi_per_step.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn single_facet_removal_matches_recomputation(p in polytopes(), j in any::<prop::sample::Index>()) {
        let j = j.index(p.n_facets());
        if let Some(q) = p.without_facet(j).unwrap() {
            let mut hs = p.halfspaces().to_vec();
            hs.remove(j);
            let fresh = intersect_halfspaces(&hs).unwrap().polytope;
            prop_assert_eq!(q.vertices().len(), fresh.vertices().len());
            for v in q.vertices() {
                prop_assert!(fresh.vertices().iter().any(|w| (v - w).norm() < 1e-9 * p.scale()));
            }
        }
    }

    #[test]
    fn normal_cone_sums(s in any::<u64>(), d in 2usize..=3) {
        let p = random_polytope(d, 6, s);
        prop_assume!(p.is_simple());
        let phi = DirectionalDistribution::isotropic(d).unwrap();
        let m = cone_measures(&p, &phi, 2000, &mut substream(s, 7, 0)).unwrap();
        prop_assert!((m.vertex_sum.value - 1.0).abs() <= 3.0 * m.vertex_sum.stderr + 1e-12);
        prop_assert!((m.facet_sum.value - d as f64).abs() <= 3.0 * m.facet_sum.stderr + 1e-12);
    }

    #[test]
    fn direct_sampler_is_a_pure_function_of_its_stream(s in any::<u64>()) {
        let cfg = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(2).unwrap(), s).unwrap();
        let opts = DirectOptions { max_attempts: 2_000_000, t_max: None };
        let a = direct_shape_sampler(3, &cfg, &mut substream(s, 8, 0), opts).unwrap();
        let b = direct_shape_sampler(3, &cfg, &mut substream(s, 8, 0), opts).unwrap();
        prop_assert_eq!(a.attempts, b.attempts);
        prop_assert_eq!(a.record, b.record);
    }

    #[test]
    fn series_identities(qs in prop::collection::vec(0.0f64..1.0, 1..12), a in 0.0f64..30.0, g in 0.1f64..5.0, d in 2usize..=4) {
        let total: f64 = qs.iter().sum();
        let q: BTreeMap<usize, f64> = qs.iter().enumerate().map(|(k, &x)| (d + 1 + k, x / total)).collect();
        let input = TailSeriesInput::new(d, g, q.clone(), 0.0).unwrap();
        let s = phi_tail_series(&input, a).value;
        let mix: f64 = q.iter().map(|(&n, &p)| p * gamma_tail(a, g, n - d)).sum();
        prop_assert!((s - mix).abs() <= 1e-12);
        let half = TailSeriesInput::new(d, g / 2.0, q, 0.0).unwrap();
        prop_assert!((phi_tail_series(&half, 2.0 * a).value - s).abs() <= 1e-12);
        let delta = TailSeriesInput::new(d, g, [(d + 1, 1.0)].into(), 0.0).unwrap();
        prop_assert_eq!(phi_tail_series(&delta, a).value, gamma_tail(a, g, 1));
    }

    #[test]
    fn subexp_series_is_monotone(x in 1.5f64..1e4, dx in 0.01f64..10.0, d in 2usize..=6) {
        let alpha = (d as f64 + 1.0) / (d as f64 - 1.0);
        prop_assert!(ln_subexp_series(x + dx, alpha, 0) > ln_subexp_series(x, alpha, 0));
        prop_assert!(ln_subexp_series(x, alpha + 0.1, 0) < ln_subexp_series(x, alpha, 0));
    }
}

#[test]
fn sandwich_on_the_eligibility_grid() {
    for d in 2..=6usize {
        let alpha = (d as f64 + 1.0) / (d as f64 - 1.0);
        for k in 0..=6 {
            let x = sandwich_threshold(d, alpha) * 2f64.powi(k);
            assert!(sandwich_check(x, alpha, d).unwrap().holds, "d = {d}, k = {k}");
        }
    }
}

#[test]
fn great_circle_discrete_law_is_rejected() {
    let atoms = vec![from_slice(&[1.0, 0.0, 0.0]), from_slice(&[0.0, 1.0, 0.0]), from_slice(&[1.0, 1.0, 0.0]).normalize()];
    assert!(DirectionalDistribution::discrete(atoms, None).is_err());
}

#[test]
fn witness_draws_are_deterministically_valid() {
    for d in [2, 3] {
        let phi = DirectionalDistribution::isotropic(d).unwrap();
        let opts = WitnessOptions { cap_divisor: 3.0, ..Default::default() };
        let w = witness_construction(&phi, 24, &opts).unwrap();
        for i in 0..200 {
            let p = w.draw(&mut substream(d as u64, 9, i)).unwrap();
            assert_eq!(p.n_facets(), 24);
            assert!(p.circumradius() < 1.0);
        }
    }
}
