mod common;

use coflow_core::forms::*;
use coflow_core::jet::{CJet, RJet};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn rel(a: &InvariantForm, b: &InvariantForm) -> f64 {
    (*a - *b).max_coeff_jet() / (1.0 + a.max_coeff_jet())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn d_squared_vanishes(f in arb_form(), s in arb_structure()) {
        prop_assume!(f.degree() <= 5);
        prop_assert!(f.d(s).d(s).max_coeff_jet() < 1e-13);
    }

    #[test]
    fn star_is_an_involution(f in arb_form(), p in arb_point()) {
        let sf = f.star(&p);
        let e = sf.star(&p) - f;
        prop_assert!(e.max_coeff() < 1e-13 * (1.0 + f.max_coeff().max(sf.max_coeff())));
        // higher jet orders carry the rounding of h^(±6) derivatives
        prop_assert!(e.max_coeff_jet() < 1e-10 * (1.0 + f.max_coeff_jet().max(sf.max_coeff_jet())));
    }

    #[test]
    fn star_is_an_isometry(f in arb_form(), p in arb_point()) {
        let a = pointwise_inner(&f, &f, &p).unwrap();
        let sf = f.star(&p);
        let b = pointwise_inner(&sf, &sf, &p).unwrap();
        prop_assert!((a.value - b.value).norm() < 1e-13 * (1.0 + a.value.norm()));
        prop_assert!(a.max_diff(&b) < 1e-10 * (1.0 + a.sup().max(b.sup())));
    }

    #[test]
    fn psi_is_star_phi(p in arb_point()) {
        let phi = build_phi(&p);
        let psi = build_psi(&p);
        prop_assert!(rel(&phi.star(&p), &psi) < 1e-12);
        prop_assert!(phi.reality_defect() < 1e-14 && psi.reality_defect() < 1e-14);
        let n = pointwise_inner(&phi, &phi, &p).unwrap().value;
        prop_assert!((n - Complex64::new(7.0, 0.0)).norm() < 1e-12);
        let n = pointwise_inner(&psi, &psi, &p).unwrap().value;
        prop_assert!((n - Complex64::new(7.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn first_derivatives_match_printed_formulas(p in arb_point()) {
        let f3 = p.f3();
        let df3 = f3.derivative();
        let half = Complex64::new(0.5, 0.0);
        let gh2 = (p.g * p.h * p.h).to_complex();
        let h4p = p.h.powi(4).derivative().to_complex();
        let (dphi, dpsi) = match p.structure {
            StructureKind::CalabiYau => (
                InvariantForm::real_term(Basis::DrHolo, df3.scale(half)),
                InvariantForm::real_term(Basis::DrOmega2Half, -h4p),
            ),
            StructureKind::NearlyKahler => (
                InvariantForm::real_term(Basis::DrHolo, df3.scale(half) - gh2.scale(Complex64::new(1.5, 0.0)))
                    + InvariantForm::real_term(
                        Basis::Omega2Half,
                        (f3 - f3.conj()).scale(Complex64::new(0.0, 2.0)),
                    ),
                InvariantForm::real_term(
                    Basis::DrOmega2Half,
                    (f3 + f3.conj()).scale_real(&p.g).scale(Complex64::new(2.0, 0.0)) - h4p,
                ),
            ),
        };
        prop_assert!(rel(&build_phi(&p).d(p.structure), &dphi) < 1e-12);
        prop_assert!(rel(&build_psi(&p).d(p.structure), &dpsi) < 1e-12);
    }

    #[test]
    fn laplacian_matches_closed_form(p in arb_coclosed_point()) {
        let lap = hodge_laplacian_psi(&p).unwrap();
        let closed = laplacian_psi_closed_form(&p);
        prop_assert!((lap - closed).max_coeff() < 1e-10 * (1.0 + lap.max_coeff()));
        // full dd* + d*d agrees because dψ = 0
        let full = build_psi(&p).hodge_laplacian(&p);
        prop_assert!((lap + full).max_coeff() < 1e-10 * (1.0 + lap.max_coeff()));
        prop_assert!(build_psi(&p).d(p.structure).max_coeff() < 1e-12);
        // d*ψ = ⋆dφ
        let a = build_psi(&p).codifferential(&p);
        let b = build_phi(&p).d(p.structure).star(&p);
        prop_assert!(rel(&a, &b) < 1e-12);
    }

    #[test]
    fn interior_product_of_psi(k in arb_jet(-2.0, 2.0), p in arb_point()) {
        let c = build_psi(&p).interior_r(&k);
        let want = p.f3().scale_real(&(p.g * k)).scale(Complex64::new(0.0, 0.5));
        prop_assert!(c.coeff(Basis::Holo).max_diff(&want) < 1e-12 * (1.0 + want.sup()));
        prop_assert!(c.coeff(Basis::HoloBar).max_diff(&want.conj()) < 1e-12 * (1.0 + want.sup()));
    }

    #[test]
    fn wedge_is_bilinear(a in arb_form(), b in arb_form(), c in arb_form(), z in arb_cjet()) {
        prop_assume!(b.degree() == c.degree());
        let lhs = a.wedge(&(b + c.scale(z)));
        let rhs = a.wedge(&b) + a.wedge(&c).scale(z);
        prop_assert!((lhs - rhs).max_coeff_jet() < 1e-12);
    }
}

#[test]
fn graded_commutativity_on_basis_pairs() {
    for a in Basis::ALL {
        for b in Basis::ALL {
            if a.degree() + b.degree() > 7 {
                continue;
            }
            let (x, y) = (InvariantForm::basis(a), InvariantForm::basis(b));
            let sign = if (a.degree() * b.degree()) % 2 == 1 { -1.0 } else { 1.0 };
            let diff = x.wedge(&y) - y.wedge(&x).scale_real(&RJet::constant(sign));
            assert!(diff.max_coeff() == 0.0, "{a} {b}");
        }
    }
}

#[test]
fn d_squared_on_every_basis_element() {
    let r = RJet::variable(0.3);
    let coeff = CJet::from_parts(&(r.sin() + r * r), &r.exp());
    for s in [StructureKind::CalabiYau, StructureKind::NearlyKahler] {
        for b in Basis::ALL {
            let f = InvariantForm::term(b, coeff);
            assert!(f.d(s).d(s).max_coeff_jet() < 1e-13, "{b}");
        }
    }
}

#[test]
fn laplacian_special_cases() {
    let one = RJet::constant(1.0);
    let r = 1.2;
    // torsion-free CY product
    let p = G2Point::new(r, one, RJet::constant(0.3), one, StructureKind::CalabiYau).unwrap();
    assert!(hodge_laplacian_psi(&p).unwrap().max_coeff() < 1e-14);
    // sine-cone: −Δψ = −16ψ
    let x = RJet::variable(r);
    let p = G2Point::new(r, x.sin(), x * (1.0 / 3.0), one, StructureKind::NearlyKahler).unwrap();
    let lap = hodge_laplacian_psi(&p).unwrap();
    let want = build_psi(&p).scale_real(&RJet::constant(-16.0));
    assert!((lap - want).max_coeff() < 1e-12);
    let full = build_psi(&p).hodge_laplacian(&p);
    assert!((full + want).max_coeff() < 1e-12);
}

