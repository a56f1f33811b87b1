mod common;

use coflow_core::math;
use coflow_core::profiles::Domain;
use coflow_core::soliton::reduced::{integrate_reduced, recover_theta_k, reduced_residual, reduced_rhs, ReducedOptions, ReducedStatus};
use coflow_core::soliton::{
    compact_identity_check, cy_closed_form, eigenform_check, form_residual, nk_equations, nk_special, residuals_cy,
    residuals_nk, shoot, NkFamily, ShootConfig, ShootOutcome, SolitonError,
};
use common::arb_jet;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cy_closed_form_is_a_soliton(b in -2.0..2.0f64, c in -3.0..3.0f64) {
        let cand = cy_closed_form(b, c, Some(Domain::interval(-2.0, 2.0))).unwrap();
        let rep = residuals_cy(&cand).unwrap();
        prop_assert!(rep.pass, "{:?}", rep);
        prop_assert!((rep.get("w_derivative").unwrap()) < 1e-10);
        prop_assert!(form_residual(&cand).unwrap().max() < 1e-9);
    }

    #[test]
    fn cones_solve_the_system(b in -3.0..3.0f64, lambda in -5.0..5.0f64) {
        for fam in [NkFamily::Cone { b, lambda }, NkFamily::AntiCone { b, lambda }] {
            let cand = nk_special(fam, None).unwrap();
            let rep = residuals_nk(&cand).unwrap();
            prop_assert!(rep.max() < 1e-12 * (1.0 + lambda.abs()) * 300.0, "{:?}", rep);
            prop_assert!(form_residual(&cand).unwrap().max() < 1e-9 * (1.0 + lambda.abs()));
        }
    }

    #[test]
    fn cylinders_solve_the_system(b in 0.2..4.0f64, c in -3.0..3.0f64) {
        let cand = nk_special(NkFamily::Cylinder { b, c }, None).unwrap();
        prop_assert!((cand.lambda + 12.0 / (b * b)).abs() < 1e-15);
        prop_assert!(residuals_nk(&cand).unwrap().max() < 1e-12 * (1.0 + b.powi(4)));
        prop_assert!(form_residual(&cand).unwrap().max() < 1e-10 * (1.0 + b.powi(4)));
    }

    #[test]
    fn redundant_equation_follows(h in arb_jet(0.5, 2.0), th in arb_jet(-2.0, 2.0), k in arb_jet(-2.0, 2.0), lambda in -10.0..10.0f64) {
        let [e1, _, e3, red] = nk_equations(&h, &th, &k, lambda);
        let h3 = h * h * h;
        let expect = e3.derivative() + h3 * e1 * lambda;
        prop_assert!((red.value - expect.value).abs() < 1e-9 * (1.0 + red.value.abs()));
    }

    #[test]
    fn reduced_rhs_solves_the_ode(h in 0.2..3.0f64, dh in 0.01..0.99f64, sign in prop::bool::ANY, ddh in -3.0..3.0f64, lambda in -20.0..20.0f64) {
        let dh = if sign { dh } else { -dh };
        let d3 = reduced_rhs(h, dh, ddh, lambda).unwrap();
        let scale = h.powi(3) * dh.abs() * (1.0 - dh * dh);
        prop_assert!(reduced_residual(h, dh, ddh, d3, lambda).abs() < 1e-12 * (1.0 + scale * d3.abs()) * 100.0);
    }
}

#[test]
fn sine_cone_checks() {
    let cand = nk_special(NkFamily::SineCone, None).unwrap();
    assert!(residuals_nk(&cand).unwrap().max() < 1e-12);
    assert!(form_residual(&cand).unwrap().max() < 1e-11);
    let pts = Domain::interval(0.0, math::PI).midpoints(50);
    let (mu2, res) = eigenform_check(&cand.g2(), &pts).unwrap();
    assert!((mu2 - 16.0).abs() < 1e-10 && res < 1e-10, "{mu2} {res}");
    let (lhs, rhs) = compact_identity_check(&cand).unwrap();
    assert!((lhs - rhs).abs() < 1e-8 * rhs, "{lhs} {rhs}");
    assert!((lhs - 112.0 * 5.0 * math::PI / 16.0).abs() < 1e-8);
}

#[test]
fn compact_identity_on_cylinder_circle() {
    let cand = nk_special(NkFamily::Cylinder { b: 1.0, c: 0.0 }, Some(Domain::circle(math::TAU))).unwrap();
    let (lhs, rhs) = compact_identity_check(&cand).unwrap();
    assert!((lhs - 84.0 * math::TAU).abs() < 1e-9 && (rhs - 84.0 * math::TAU).abs() < 1e-9);
    let flat = cy_closed_form(0.0, 0.0, Some(Domain::circle(math::TAU))).unwrap();
    assert_eq!(compact_identity_check(&flat).unwrap(), (0.0, 0.0));
}

fn sine_cone_trajectory(lambda: f64) -> coflow_core::soliton::Trajectory {
    let r0 = math::PI / 8.0;
    let y0 = [math::sin(r0), math::cos(r0), -math::sin(r0)];
    integrate_reduced(y0, lambda, r0, 3.0 * math::PI / 8.0, &ReducedOptions::default()).unwrap()
}

#[test]
fn reduced_ode_reproduces_sine_cone() {
    let t = sine_cone_trajectory(-16.0);
    assert_eq!(t.status, ReducedStatus::Completed);
    let mut err: f64 = 0.0;
    for k in 0..=100 {
        let r = math::PI / 8.0 + math::PI / 4.0 * k as f64 / 100.0;
        let j = t.h_jet(r).unwrap();
        err = err.max((j.value - math::sin(r)).abs()).max((j.d(1) - math::cos(r)).abs());
    }
    assert!(err < 1e-8, "{err}");
    let cand = recover_theta_k(t.clone(), 1.0).unwrap();
    for r in [0.5, 0.8, 1.1] {
        assert!((cand.theta.eval(r).unwrap() - r / 3.0).abs() < 1e-7);
        assert!(cand.kprime.eval(r).unwrap().abs() < 1e-7);
    }
    let nk = residuals_nk(&cand).unwrap().max();
    assert!(nk < 1e-6);
    assert!(form_residual(&cand).unwrap().max() < 10.0 * nk.max(1e-12), "{nk}");
    // the other branch is the reflection θ → −θ, also a solution
    let flip = recover_theta_k(t, -1.0).unwrap();
    assert!((flip.theta.eval(0.8).unwrap() + 0.8 / 3.0).abs() < 1e-7);
    assert!(residuals_nk(&flip).unwrap().max() < 1e-6);
}

#[test]
fn reduced_ode_stops_at_singular_locus() {
    // h = 1 + 0.5 r² reaches h′ = 1 at r = 2 only with special λ; start near h′ = 1
    let opts = ReducedOptions::default();
    let r = integrate_reduced([1.0, 1.0, 0.0], 1.0, 0.0, 1.0, &opts);
    assert!(matches!(r, Err(SolitonError::SingularLocus { .. })));
    let t = integrate_reduced([1.0, 0.999, 0.5], 0.0, 0.0, 1.0, &opts).unwrap();
    assert_eq!(t.status, ReducedStatus::SingularApproach);
    assert!(t.end() < 1.0);
}

#[test]
fn shooting_finds_sine_cone() {
    let r0 = math::PI / 8.0;
    let r1 = 3.0 * math::PI / 8.0;
    let cfg = ShootConfig::new(r0, [math::sin(r0), math::cos(r0), -math::sin(r0)], r1, math::cos(r1), -20.0, -12.0);
    match shoot(&cfg).unwrap() {
        ShootOutcome::Found { lambda, report, .. } => {
            assert!((lambda + 16.0).abs() < 1e-6, "{lambda}");
            assert!(report.max() < 1e-6);
        }
        other => panic!("{other:?}"),
    }
    let far = ShootConfig::new(r0, cfg.jets, r1, math::cos(r1), 0.0, 5.0);
    assert!(matches!(shoot(&far).unwrap(), ShootOutcome::NotFound { .. }));
}

#[test]
fn eigenform_examples() {
    let pts = Domain::interval(-1.0, 1.0).midpoints(20);
    let flat = cy_closed_form(0.0, 0.0, None).unwrap();
    assert_eq!(eigenform_check(&flat.g2(), &pts).unwrap(), (0.0, 0.0));
    let cy = cy_closed_form(1.0, 1.0, None).unwrap();
    assert!(eigenform_check(&cy.g2(), &pts).unwrap().1 > 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reduced_trajectories_are_consistent(h in 0.5..2.0f64, dh in 0.2..0.8f64, ddh in -0.5..0.5f64, lambda in -4.0..4.0f64) {
        let opts = ReducedOptions::default();
        let t = integrate_reduced([h, dh, ddh], lambda, 0.0, 0.5, &opts).unwrap();
        prop_assume!(t.end() > 0.2);
        // restart from a dense checkpoint and compare at the end
        let mid = 0.5 * t.end();
        let j = t.h_jet(mid).unwrap();
        let t2 = integrate_reduced([j.value, j.d(1), j.d(2)], lambda, mid, t.end(), &opts).unwrap();
        let (a, b) = (t.end_state(), t2.end_state());
        prop_assert!((0..3).all(|i| (a[i] - b[i]).abs() < 1e-7 * (1.0 + a[i].abs())), "{:?} {:?}", a, b);
        for k in 0..20 {
            let r = t.end() * (k as f64 + 0.5) / 20.0;
            let j = t.h_jet(r).unwrap();
            prop_assert!(reduced_residual(j.value, j.d(1), j.d(2), j.d(3), lambda).abs() < 1e-9);
        }
        let cand = recover_theta_k(t, 1.0).unwrap();
        let nk = residuals_nk(&cand).unwrap().max();
        prop_assert!(nk < 1e-6, "{}", nk);
        prop_assert!(form_residual(&cand).unwrap().max() < 10.0 * nk.max(1e-10));
    }
}
