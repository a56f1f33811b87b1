//! Torsion forms `τ₀, τ₁, τ₂, τ₃` of the warped G2-structure.
//!
//! `dφ = τ₀ψ + 3τ₁∧φ + ⋆τ₃` and `dψ = 4τ₁∧ψ + ⋆τ₂`.

use alloc::vec::Vec;

use crate::forms::{build_phi, build_psi, pointwise_inner, Basis, FormError, G2Point, G2Profile, InvariantForm, StructureKind};
use crate::jet::RJet;
use crate::math;

/// `(τ₀, dr-coefficient of τ₁)` from `τ₀ = ⋆(φ∧dφ)/7`, `τ₁ = ⋆(φ∧⋆dφ)/12`.
pub fn tau01_first_principles(p: &G2Point) -> (RJet, RJet) {
    let phi = build_phi(p);
    let dphi = phi.d(p.structure);
    let t0 = phi.wedge(&dphi).star(p).coeff(Basis::One).re() * (1.0 / 7.0);
    let t1 = phi.wedge(&dphi.star(p)).star(p).coeff(Basis::Dr).re() * (1.0 / 12.0);
    (t0, t1)
}

/// Closed forms of `τ₀`, `τ₁`.
pub fn tau01_closed(p: &G2Point) -> (RJet, RJet) {
    let (h, th, g) = (p.h, p.theta, p.g);
    match p.structure {
        StructureKind::CalabiYau => (th.derivative() / g * (12.0 / 7.0), h.derivative() / h),
        StructureKind::NearlyKahler => {
            let s3 = (th * 3.0).sin();
            let c3 = (th * 3.0).cos();
            let t0 = (th.derivative() / g + s3 / h * 2.0) * (12.0 / 7.0);
            let t1 = (h.derivative() - g * c3) / h;
            (t0, t1)
        }
    }
}

/// The one-form `τ₁ = t dr`.
pub fn tau1_form(t1: &RJet) -> InvariantForm {
    InvariantForm::real_term(Basis::Dr, t1.to_complex())
}

/// `(τ₂, τ₃)` with `τ₀, τ₁` taken from first principles.
pub fn tau2_tau3(p: &G2Point) -> (InvariantForm, InvariantForm) {
    let s = p.structure;
    let phi = build_phi(p);
    let psi = build_psi(p);
    let (t0, t1) = tau01_first_principles(p);
    let t1 = tau1_form(&t1);
    let tau2 = psi.d(s).star(p) - t1.wedge(&psi).star(p).scale_real(&RJet::constant(4.0));
    let tau3 = phi.d(s).star(p) - phi.scale_real(&t0) - t1.wedge(&phi).star(p).scale_real(&RJet::constant(3.0));
    (tau2, tau3)
}

/// Largest deviation in `dφ = τ₀ψ + 3τ₁∧φ + ⋆τ₃` and `dψ = 4τ₁∧ψ + ⋆τ₂`.
pub fn reconstruction_residual(p: &G2Point) -> (f64, f64) {
    let s = p.structure;
    let phi = build_phi(p);
    let psi = build_psi(p);
    let (t0, t1) = tau01_first_principles(p);
    let t1 = tau1_form(&t1);
    let (tau2, tau3) = tau2_tau3(p);
    let three = RJet::constant(3.0);
    let four = RJet::constant(4.0);
    let e1 = phi.d(s) - psi.scale_real(&t0) - t1.wedge(&phi).scale_real(&three) - tau3.star(p);
    let e2 = psi.d(s) - t1.wedge(&psi).scale_real(&four) - tau2.star(p);
    (e1.max_coeff_jet(), e2.max_coeff_jet())
}

/// How far `τ₃` is from lying in `Λ³₂₇`: the largest of `|⟨τ₃, φ⟩|`,
/// `|⟨τ₃, ∂r⌟ψ⟩|`, and the coefficients of `τ₃∧φ`, `τ₃∧ψ`.
pub fn tau3_purity(p: &G2Point, tau3: &InvariantForm) -> Result<f64, FormError> {
    let phi = build_phi(p);
    let psi = build_psi(p);
    let a = pointwise_inner(tau3, &phi, p)?.value.norm();
    let b = pointwise_inner(tau3, &psi.interior_r(&RJet::constant(1.0)), p)?.value.norm();
    let c = tau3.wedge(&phi).max_coeff();
    let d = tau3.wedge(&psi).max_coeff() / p.volume().value;
    Ok(math::max(math::max(a, b), math::max(c, d)))
}

/// Torsion data at one sample point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorsionSample {
    pub r: f64,
    pub tau0: f64,
    pub tau1: f64,
    pub tau0_closed: f64,
    pub tau1_closed: f64,
    /// Largest coefficient of `τ₂`.
    pub tau2_max: f64,
    /// Pointwise norm `|τ₃|`.
    pub tau3_norm: f64,
    pub tau3_purity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorsionReport {
    pub samples: Vec<TorsionSample>,
    pub tau2_norm: f64,
    /// `sup |τ₁|` over the samples.
    pub coclosed_residual: f64,
    /// Largest disagreement between closed-form and first-principles `τ₀, τ₁`.
    pub closed_form_gap: f64,
}

pub fn sample(p: &G2Point) -> Result<TorsionSample, FormError> {
    let (t0, t1) = tau01_first_principles(p);
    let (c0, c1) = tau01_closed(p);
    let (tau2, tau3) = tau2_tau3(p);
    let n3 = pointwise_inner(&tau3, &tau3, p)?.value;
    Ok(TorsionSample {
        r: p.r,
        tau0: t0.value,
        tau1: t1.value,
        tau0_closed: c0.value,
        tau1_closed: c1.value,
        tau2_max: tau2.max_coeff(),
        tau3_norm: math::sqrt(math::max(0.0, n3.re)),
        tau3_purity: tau3_purity(p, &tau3)?,
    })
}

/// Torsion at the given sample points.
pub fn report(g: &G2Profile, points: &[f64]) -> Result<TorsionReport, FormError> {
    let mut samples = Vec::with_capacity(points.len());
    for &r in points {
        samples.push(sample(&g.at(r)?)?);
    }
    let tau2_norm = samples.iter().fold(0.0, |m, s| math::max(m, s.tau2_max));
    let coclosed_residual = samples.iter().fold(0.0, |m, s| math::max(m, math::abs(s.tau1)));
    let closed_form_gap = samples.iter().fold(0.0, |m, s| {
        math::max(m, math::max(math::abs(s.tau0 - s.tau0_closed), math::abs(s.tau1 - s.tau1_closed)))
    });
    Ok(TorsionReport { samples, tau2_norm, coclosed_residual, closed_form_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Domain;

    fn point(h: &str, th: &str, g: &str, s: StructureKind, r: f64) -> G2Point {
        G2Profile::parse(h, th, g, s, Domain::interval(-10.0, 10.0)).unwrap().at(r).unwrap()
    }

    #[test]
    fn cy_constant_angle_has_no_tau0() {
        let p = point("1.5", "0.4", "1 + 0.1*sin(r)", StructureKind::CalabiYau, 0.3);
        let (t0, _) = tau01_first_principles(&p);
        assert!(t0.value.abs() < 1e-14);
    }

    #[test]
    fn cy_linear_angle() {
        let p = point("1", "r", "1", StructureKind::CalabiYau, 0.3);
        let (t0, t1) = tau01_closed(&p);
        assert!((t0.value - 12.0 / 7.0).abs() < 1e-15);
        assert_eq!(t1.value, 0.0);
        let (f0, f1) = tau01_first_principles(&p);
        assert!((f0.value - 12.0 / 7.0).abs() < 1e-13 && f1.value.abs() < 1e-13);
    }

    #[test]
    fn nk_cylinder_closed_form() {
        let p = point("1", "pi/6", "1", StructureKind::NearlyKahler, 0.0);
        let (t0, t1) = tau01_closed(&p);
        assert!((t0.value - 24.0 / 7.0).abs() < 1e-14);
        assert!(t1.value.abs() < 1e-15);
    }

    #[test]
    fn nk_cone_is_torsion_free() {
        let p = point("r", "0", "1", StructureKind::NearlyKahler, 2.0);
        let (t0, t1) = tau01_first_principles(&p);
        assert!(t0.value.abs() < 1e-14 && t1.value.abs() < 1e-14);
        let (t2, t3) = tau2_tau3(&p);
        assert!(t2.max_coeff() < 1e-13 && t3.max_coeff() < 1e-13);
    }

    #[test]
    fn sine_cone_is_nearly_parallel() {
        let p = point("sin(r)", "r/3", "1", StructureKind::NearlyKahler, 1.1);
        let (t0, t1) = tau01_first_principles(&p);
        assert!((t0.value - 4.0).abs() < 1e-13, "{}", t0.value);
        assert!(t1.value.abs() < 1e-13);
        let (t2, t3) = tau2_tau3(&p);
        assert!(t2.max_coeff() < 1e-13 && t3.max_coeff() < 1e-13);
        let e = build_phi(&p).d(p.structure) - build_psi(&p).scale_real(&RJet::constant(4.0));
        assert!(e.max_coeff() < 1e-13);
    }

    #[test]
    fn generic_profile_identities() {
        let p = point("2 + 0.3*sin(r)", "0.2*cos(2*r) + 0.1", "1 + 0.2*exp(-r*r)", StructureKind::NearlyKahler, 0.4);
        let (e1, e2) = reconstruction_residual(&p);
        assert!(e1 < 1e-12 && e2 < 1e-12);
        let (_, t3) = tau2_tau3(&p);
        assert!(t3.max_coeff() > 1e-3);
        assert!(tau3_purity(&p, &t3).unwrap() < 1e-12);
    }
}
