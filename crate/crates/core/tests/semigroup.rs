mod common;

use common::*;
use qds::dilation::kolmogorov_correlation_profile;
use qds::random;
use qds::sweep::lindblad_sweep;
use qds::{
    algebra_g, algebra_g0, channels, classify, classify_restricted, conditional_expectation,
    kms_dual, predual_distance, reduced_semigroup, subharmonic_limit, support_projection, CPMap,
    DensityState, Tolerances,
};

fn corpus() -> Vec<(String, CPMap)> {
    let mut all = faithful_corpus();
    all.extend(random_channels(30, 2024));
    all
}

#[test]
fn spectral_mixing_agrees_with_iteration() {
    let tol = Tolerances::default();
    for (name, map) in corpus() {
        let state = mean_invariant(&map);
        let c = classify(&map, Some(&state), &tol).unwrap();
        let (iter_mixing, dev) = iterate_mixing(&map, state.rho(), 200, 1e-6);
        assert_eq!(c.strong_mixing, iter_mixing, "{name}: deviation {dev:e}");
        assert_eq!(c.fixed_algebra_dim, fixed_dim(&map), "{name}");
        assert_eq!(c.ergodic, fixed_dim(&map) == 1, "{name}");
    }
}

#[test]
fn dephase_flip_is_ergodic_not_mixing() {
    let tol = Tolerances::default();
    let c = classify(&channels::dephase_flip(), None, &tol).unwrap();
    assert!(c.ergodic);
    assert!(!c.strong_mixing);
    assert!(!c.kolmogorov);
    let mut arg: Vec<f64> = c.peripheral_eigenvalues.iter().map(|z| z.re).collect();
    arg.sort_by(f64::total_cmp);
    assert_eq!(arg.len(), 2);
    assert!((arg[0] + 1.0).abs() < 1e-10 && (arg[1] - 1.0).abs() < 1e-10);
}

#[test]
fn kms_dual_against_reference_relation() {
    let tol = Tolerances::default();
    for (name, map) in corpus() {
        let state = mean_invariant(&map);
        let dual = kms_dual(&map, &state, &tol).unwrap();
        assert!(kms_relation(&map, &dual, state.rho()) < 1e-9, "{name}");
        let back = kms_dual(&dual, &state, &tol).unwrap();
        assert!(map_distance(&map, &back) < 1e-9, "{name}");
        assert!(dual.unitality_residual() < 1e-10, "{name}");
    }
}

#[test]
fn unitary_dual_is_inverse_conjugation() {
    let tol = Tolerances::default();
    let u = random::unitary(&mut random::rng(8), 3);
    let map = channels::unitary(u.clone()).unwrap();
    let dual = kms_dual(&map, &DensityState::maximally_mixed(3), &tol).unwrap();
    let inverse = channels::unitary(u.adjoint()).unwrap();
    assert!(map_distance(&dual, &inverse) < 1e-12);
}

#[test]
fn algebra_g_matches_iterated_kernel() {
    let tol = Tolerances::default();
    for (name, map) in corpus() {
        let state = mean_invariant(&map);
        let g = algebra_g(&map, &state, &tol).unwrap();
        let dual = kms_dual(&map, &state, &tol).unwrap();
        let n = map.dim();
        assert_eq!(g.dim(), g_n_dim(&map, &dual, n * n), "{name}");
        for b in g.basis() {
            let back = heisenberg(dual.kraus(), &heisenberg(map.kraus(), b));
            assert!((back - b).norm() < 1e-8, "{name}");
        }
        // finite dimensions: the automorphic part is all of G
        assert_eq!(
            algebra_g0(&map, &state, &tol).unwrap().dim(),
            g.dim(),
            "{name}"
        );
    }
}

#[test]
fn conditional_expectation_commutes_with_tau() {
    let tol = Tolerances::default();
    let mut maps = corpus();
    let mut rng = random::rng(17);
    let sum = channels::direct_sum(
        &random::channel(&mut rng, 2, 2),
        &channels::unitary(random::unitary(&mut rng, 2)).unwrap(),
    );
    maps.push(("sum".into(), sum));
    for (name, map) in maps {
        let state = mean_invariant(&map);
        let g = algebra_g(&map, &state, &tol).unwrap();
        let e = conditional_expectation(&g, &state, &tol).unwrap();
        let s = map.superop();
        let gap = (e.compose(&s).matrix() - s.compose(&e).matrix()).norm();
        assert!(gap < 1e-8, "{name}: {gap:e}");
    }
}

#[test]
fn classification_agrees_with_restriction_to_g0() {
    let tol = Tolerances::default();
    for (name, map) in corpus() {
        let state = mean_invariant(&map);
        let c = classify(&map, Some(&state), &tol).unwrap();
        let g0 = algebra_g0(&map, &state, &tol).unwrap();
        let (ergodic, mixing) = classify_restricted(&map, &g0, &tol).unwrap();
        assert_eq!((c.ergodic, c.strong_mixing), (ergodic, mixing), "{name}");
    }
}

#[test]
fn support_reduction_preserves_convergence() {
    let tol = Tolerances::default();
    for (name, map) in leaking_channels() {
        let phi0 = mean_invariant(&map);
        assert!(!phi0.is_faithful(&tol), "{name}");
        let p = support_projection(&phi0, tol.faithful);
        let limit = subharmonic_limit(&map, &p, 1 << 20, 1e-9).unwrap();
        assert!(limit.reaches_identity, "{name}");

        let corner = reduced_semigroup(&map, &p, &tol).unwrap();
        let q = p.range();
        let phi0_red = DensityState::new(q.adjoint() * phi0.rho() * q).unwrap();
        let mut rng = random::rng(3);
        let ambient = (0..4).all(|_| {
            let phi = random::state(&mut rng, map.dim());
            predual_distance(&map, &phi, &phi0, 100).unwrap() <= 1e-6
        });
        let reduced = (0..4).all(|_| {
            let phi = random::state(&mut rng, corner.dim());
            predual_distance(&corner, &phi, &phi0_red, 100).unwrap() <= 1e-6
        });
        assert_eq!(ambient, reduced, "{name}");

        let c = classify(&map, Some(&phi0), &tol).unwrap();
        let r = c.reduced.as_ref().expect("non-faithful state is reduced");
        let direct = classify(&corner, Some(&phi0_red), &tol).unwrap();
        assert_eq!(
            (r.ergodic, r.strong_mixing),
            (direct.ergodic, direct.strong_mixing),
            "{name}"
        );
        // slow corners need more than 100 steps; compare the verdict far out
        let converges = (0..4).all(|_| {
            let phi = random::state(&mut rng, corner.dim());
            predual_distance(&corner, &phi, &phi0_red, 20_000).unwrap() <= 1e-6
        });
        assert_eq!(r.strong_mixing, converges, "{name}");
    }
}

#[test]
fn kolmogorov_profile_decay_matches_mixing() {
    let tol = Tolerances::default();
    for (name, map) in faithful_corpus() {
        let state = mean_invariant(&map);
        let c = classify(&map, Some(&state), &tol).unwrap();
        let profile = kolmogorov_correlation_profile(&map, &state, 50);
        assert_eq!(
            profile[50] <= 1e-6,
            c.strong_mixing,
            "{name}: {:e}",
            profile[50]
        );
        assert_eq!(c.kolmogorov, c.strong_mixing, "{name}");
    }
}

#[test]
fn lindblad_sweep_has_no_counterexamples() {
    let r = lindblad_sweep(100, 3, 7, &Tolerances::default());
    assert_eq!(r.errors, 0);
    assert_eq!(r.counterexamples, 0);
    assert!(r.instances.iter().filter(|i| i.faithful).count() >= 50);
}
