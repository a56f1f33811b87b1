mod common;

use coflow_core::forms::G2Profile;
use coflow_core::profiles::Domain;
use coflow_core::torsion::*;
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tau2_vanishes(p in arb_point()) {
        let (tau2, _) = tau2_tau3(&p);
        prop_assert!(tau2.max_coeff() < 1e-11);
    }

    #[test]
    fn closed_form_matches_first_principles(p in arb_point()) {
        let (a0, a1) = tau01_first_principles(&p);
        let (b0, b1) = tau01_closed(&p);
        prop_assert!((a0.value - b0.value).abs() < 1e-10 * (1.0 + b0.value.abs()));
        prop_assert!((a1.value - b1.value).abs() < 1e-10 * (1.0 + b1.value.abs()));
    }

    #[test]
    fn torsion_reconstructs_derivatives(p in arb_point()) {
        let (e1, e2) = reconstruction_residual(&p);
        prop_assert!(e1 < 1e-10 && e2 < 1e-10);
    }

    #[test]
    fn tau3_is_pure(p in arb_point()) {
        let (_, tau3) = tau2_tau3(&p);
        prop_assert!(tau3_purity(&p, &tau3).unwrap() < 1e-10 * (1.0 + tau3.max_coeff()));
    }

    #[test]
    fn coclosed_points_have_no_tau1(p in arb_coclosed_point()) {
        let (_, t1) = tau01_first_principles(&p);
        prop_assert!(t1.value.abs() < 1e-12);
    }
}

#[test]
fn report_over_quadrature_built_profile() {
    use coflow_core::profiles::Expr;
    let theta = Expr::c(0.1) + 0.2 * Expr::r().sin();
    let g = Expr::c(1.0);
    let prof = G2Profile::nk_from_constraint(theta, g, Domain::interval(-1.0, 1.0), 0.0, 2.5).unwrap();
    let pts: Vec<f64> = Domain::interval(-1.0, 1.0).midpoints(20);
    let rep = report(&prof, &pts).unwrap();
    assert_eq!(rep.samples.len(), 20);
    assert!(rep.tau2_norm < 1e-8);
    assert!(rep.coclosed_residual < 1e-8);
    assert!(rep.closed_form_gap < 1e-8);
    assert!(rep.samples.iter().all(|s| s.tau3_purity < 1e-8));
}
