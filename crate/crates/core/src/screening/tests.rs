use super::*;
use crate::functions::families::Family;
use crate::functions::Modular;
use crate::solver::{min_norm_point, Snapshot};
use crate::submodular::{brute_force_sfm, check_base_membership, submodularity_violation};

fn modular(w: &[f64]) -> Oracle {
    Oracle::new(Modular::new(w.to_vec()))
}

fn instance(seed: u64, p_max: usize) -> (Family, usize, Oracle) {
    let family = Family::ALL[seed as usize % 4];
    let p = 1 + (seed as usize * 7 + 3) % p_max;
    (family, p, family.instance(p, seed))
}

#[test]
fn empty_contraction_is_identity() {
    let f = Family::GridCut.instance(6, 4);
    let g = contract(&f, &ScreeningState::new(6));
    for mask in 0..64u64 {
        let s = ElementSet::from_mask(6, mask);
        assert_eq!(f.evaluate(&s), g.evaluate(&s));
    }
}

#[test]
fn modular_contraction() {
    let f = modular(&[1.0, -2.0, 3.0]);
    let mut state = ScreeningState::new(3);
    state
        .absorb(&f, &ElementSet::from_indices(3, [1]), &ElementSet::from_indices(3, [0]))
        .unwrap();
    assert_eq!(state.remaining, vec![2]);
    assert_eq!(state.f_active, -2.0);
    let g = contract(&f, &state);
    assert_eq!(g.p(), 1);
    assert_eq!(g.evaluate(&ElementSet::full(1)), 3.0);
    assert!(matches!(
        state.absorb(&f, &ElementSet::from_indices(3, [0]), &ElementSet::empty(3)),
        Err(Error::ConflictingVerdict(0))
    ));
}

#[test]
fn contractions_stay_submodular() {
    for seed in 0..40u64 {
        let (family, p, f) = instance(seed, 10);
        let mut state = ScreeningState::new(p);
        let active = ElementSet::from_indices(p, (0..p).filter(|j| (seed >> j) & 3 == 1));
        let inactive = ElementSet::from_indices(p, (0..p).filter(|j| (seed >> j) & 3 == 2));
        state.absorb(&f, &active, &inactive).unwrap();
        let g = contract(&f, &state);
        assert!(
            submodularity_violation(&g, 1e-9).unwrap().is_none(),
            "{family} seed {seed}"
        );
    }
}

#[test]
fn optimum_certificate_classifies_everything() {
    let m = [1.0, -2.0, 3.0, -0.5];
    let f = modular(&m);
    let w: Vec<f64> = m.iter().map(|x| -x).collect();
    let cert = GapCertificate::for_pair(&f, w, m.to_vec()).unwrap();
    assert_eq!(cert.gap, 0.0);
    let (a, i) = screen_pass(&cert, &ScreeningState::new(4), ScreeningVariant::Iaes).unwrap();
    assert_eq!(a, ElementSet::from_indices(4, [1, 3]));
    assert_eq!(i, ElementSet::from_indices(4, [0, 2]));
    let (a, i) = screen_pass(&cert, &ScreeningState::new(4), ScreeningVariant::Aes).unwrap();
    assert_eq!((a.len(), i.len()), (2, 0));
    let (a, i) = screen_pass(&cert, &ScreeningState::new(4), ScreeningVariant::Ies).unwrap();
    assert_eq!((a.len(), i.len()), (0, 2));
}

#[test]
fn huge_gap_classifies_nothing_wrong() {
    for seed in 0..50u64 {
        let (_, p, f) = instance(seed, 10);
        let bf = brute_force_sfm(&f).unwrap();
        let s = greedy_linear_maximize(&f, &vec![0.0; p]).coords;
        let mut cert = GapCertificate::for_pair(&f, s.iter().map(|x| -x).collect(), s).unwrap();
        cert.gap = 1e6;
        let (a, i) = screen_pass(&cert, &ScreeningState::new(p), ScreeningVariant::Iaes).unwrap();
        assert!(a.is_subset(&bf.maximal));
        assert!(i.is_disjoint(&bf.minimal));
    }
}

#[test]
fn modular_instance_is_fully_screened() {
    let f = modular(&[1.0, -2.0, 3.0]);
    let out = iaes_solve(&f, 1e-6, 0.5, SolverKind::Wolfe).unwrap();
    assert_eq!(out.set, ElementSet::from_indices(3, [1]));
    assert_eq!(out.value, -2.0);
    assert_eq!(out.report.rejection_ratio(), 1.0);
}

#[test]
fn restricted_iterates_stay_in_base_polytope() {
    for seed in 0..30u64 {
        let (_, p, f) = instance(seed, 10);
        let r = min_norm_point(&f, 1e-3, 500, &mut |_, _| {}).unwrap();
        let mut state = ScreeningState::new(p);
        let picked = ElementSet::from_indices(p, (0..p).filter(|j| (seed >> j) & 1 == 1));
        let active = ElementSet::from_indices(p, picked.iter().filter(|&j| r.w_star[j] > 0.0));
        let inactive = picked.difference(&active);
        state.absorb(&f, &active, &inactive).unwrap();
        let g = contract(&f, &state);
        let (w, s) = restrict_iterates(&r.w_star, &picked, &g);
        assert_eq!(w.len(), g.p());
        if g.p() > 0 {
            assert!(check_base_membership(&g, &s, 1e-8).unwrap());
        }
    }
}

#[test]
fn unchanged_restriction_keeps_gap() {
    let f = Family::GridCut.instance(9, 2);
    let r = min_norm_point(&f, 1e-4, 500, &mut |_, _| {}).unwrap();
    let snap = Snapshot::certify(&f, r.s_star.clone()).unwrap();
    let (w, s) = restrict_iterates(&snap.w, &ElementSet::empty(9), &f);
    assert_eq!(w, snap.w);
    let gap = crate::solver::duality_gap(&f, &w, &s).unwrap();
    let again = crate::solver::duality_gap(&f, &w, &greedy_linear_maximize(&f, &w).coords).unwrap();
    assert!((gap - again).abs() < 1e-12);
}

/// Every screening decision, at every iteration and at every trigger, agrees
/// with the exhaustive minimizer sandwich.
#[test]
fn screening_is_safe_on_random_instances() {
    for seed in 0..300u64 {
        let (family, _, f) = instance(seed, 10);
        let bf = brute_force_sfm(&f).unwrap();
        let opts = IaesOptions {
            eps: 1e-9,
            ..IaesOptions::default()
        };
        let mut observer = |_: &TraceRow, snap: &Snapshot, state: &ScreeningState| {
            assert!(state.active.is_subset(&bf.maximal), "{family} seed {seed}");
            assert!(state.inactive.is_disjoint(&bf.minimal), "{family} seed {seed}");
            let cert = GapCertificate::from_snapshot(snap);
            let (a, i) = screen_pass(&cert, state, ScreeningVariant::Iaes).unwrap();
            assert!(a.is_subset(&bf.maximal), "{family} seed {seed}");
            assert!(i.is_disjoint(&bf.minimal), "{family} seed {seed}");
        };
        let out = iaes_solve_with(&f, &opts, &mut observer).unwrap();
        assert!(
            (out.value - bf.min_value).abs() <= 1e-9 * bf.min_value.abs().max(1.0),
            "{family} seed {seed}: {} vs {}",
            out.value,
            bf.min_value
        );
        let ratios: Vec<f64> = out.report.triggers.iter().map(|t| t.rejection_ratio).collect();
        assert!(ratios.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn all_variants_agree_on_value() {
    for seed in 0..60u64 {
        let (_, _, f) = instance(seed, 12);
        let mut values = vec![];
        for variant in ScreeningVariant::ALL {
            for solver in [SolverKind::Wolfe, SolverKind::FrankWolfe] {
                let opts = IaesOptions {
                    eps: 1e-8,
                    variant,
                    solver,
                    max_iter: Some(200_000),
                    ..IaesOptions::default()
                };
                values.push(iaes_solve_with(&f, &opts, &mut |_, _, _| {}).unwrap().value);
            }
        }
        let bf = brute_force_sfm(&f).unwrap();
        for v in values {
            assert!(
                (v - bf.min_value).abs() <= 1e-9 * bf.min_value.abs().max(1.0),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn rejects_bad_options() {
    let f = modular(&[1.0]);
    for (eps, rho) in [(0.0, 0.5), (1e-6, 0.0), (1e-6, 1.0)] {
        assert!(iaes_solve(&f, eps, rho, SolverKind::Wolfe).is_err());
    }
    let g = f.contract(&ElementSet::empty(1), &ElementSet::full(1));
    assert!(iaes_solve(&g, 1e-6, 0.5, SolverKind::Wolfe).is_err());
}
