//! Gradient solitons `−Δψ = L_{∇k}ψ + λψ` of the coflow.
//!
//! Closed-form CY solitons, the special NK families, coordinate and
//! form-level residuals, and the reduced third-order ODE in [`reduced`].

pub mod reduced;
pub mod shoot;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::forms::{build_phi, build_psi, hodge_laplacian_psi, FormError, G2Point, G2Profile, StructureKind};
use crate::jet::{CJet, RJet};
use crate::math;
use crate::profiles::{quad, Domain, Expr, Profile, ProfileError};

pub use reduced::{integrate_reduced, recover_theta_k, reduced_residual, reduced_rhs, ReducedOptions, Trajectory};
pub use shoot::{shoot, ShootConfig, ShootOutcome};

/// Number of sample points used by residual reports.
pub const SAMPLES: usize = 200;
/// Default pass threshold of a residual report.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SolitonError {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("expected {expected:?} candidate")]
    StructureMismatch { expected: StructureKind },
    #[error("singular locus of the reduced ODE at h = {h}, h' = {dh}")]
    SingularLocus { h: f64, dh: f64 },
    #[error("inadmissible point h = {h}, h' = {dh}: need h > 0 and |h'| < 1")]
    Inadmissible { h: f64, dh: f64 },
    #[error("step size underflow at r = {r}")]
    StepFailure { r: f64 },
    #[error("sign of sin 3θ is ambiguous at r = {r}")]
    SignAmbiguity { r: f64 },
    #[error("integral does not converge on [{a}, {b}]")]
    DivergentIntegral { a: f64, b: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Cone,
    AntiCone,
    Cylinder,
    SineCone,
    CYClosedForm,
    OdeTrajectory,
    Custom,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Cone => "Cone",
            Family::AntiCone => "AntiCone",
            Family::Cylinder => "Cylinder",
            Family::SineCone => "SineCone",
            Family::CYClosedForm => "CYClosedForm",
            Family::OdeTrajectory => "OdeTrajectory",
            Family::Custom => "Custom",
        }
    }
}

/// `(h, θ, k′, λ)` with `G = 1`.
#[derive(Clone, Debug)]
pub struct SolitonCandidate {
    pub h: Profile,
    pub theta: Profile,
    pub kprime: Profile,
    pub lambda: f64,
    pub structure: StructureKind,
    pub family: Family,
    pub domain: Domain,
}

/// Expanding, steady or shrinking, by the sign of `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolitonType {
    Expanding,
    Steady,
    Shrinking,
}

impl SolitonCandidate {
    pub fn kind(&self) -> SolitonType {
        if self.lambda > 0.0 {
            SolitonType::Expanding
        } else if self.lambda < 0.0 {
            SolitonType::Shrinking
        } else {
            SolitonType::Steady
        }
    }

    pub fn g2(&self) -> G2Profile {
        G2Profile {
            h: self.h.clone(),
            theta: self.theta.clone(),
            g: Profile::constant(1.0, self.domain),
            structure: self.structure,
            domain: self.domain,
        }
    }

    pub fn at(&self, r: f64) -> Result<G2Point, SolitonError> {
        Ok(G2Point::new(r, self.h.jet_at(r)?, self.theta.jet_at(r)?, RJet::constant(1.0), self.structure)?)
    }

    /// Interior sample points (cell midpoints).
    pub fn sample_points(&self, n: usize) -> Vec<f64> {
        self.domain.midpoints(n)
    }
}

/// Named sup-norm residuals over a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub entries: Vec<(&'static str, f64)>,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn new(entries: Vec<(&'static str, f64)>, samples: usize, tol: f64) -> Self {
        let pass = entries.iter().all(|(_, v)| v.is_finite() && *v <= tol);
        ResidualReport { entries, samples, tol, pass }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, (_, v)| if v.is_nan() { f64::NAN } else { math::max(m, *v) })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.pass = self.entries.iter().all(|(_, v)| v.is_finite() && *v <= tol);
        self
    }
}

fn closed(e: Expr, d: Domain) -> Profile {
    Profile::closed_form(e, d)
}

/// `θ = (2/3)arctan(c e^{br})`, `k′ = b(1 − c²e^{2br})/(1 + c²e^{2br})`,
/// `h = G = 1`, `λ = 0`, on `[-5, 5]` unless a domain is given.
pub fn cy_closed_form(b: f64, c: f64, domain: Option<Domain>) -> Result<SolitonCandidate, SolitonError> {
    if !(b.is_finite() && c.is_finite()) {
        return Err(SolitonError::InvalidParams("b and c must be finite"));
    }
    let domain = domain.unwrap_or(Domain::interval(-5.0, 5.0));
    domain.validate()?;
    let r = Expr::r();
    let ce = c * (b * r).exp();
    let theta = (2.0 / 3.0) * ce.clone().atan();
    let c2e = ce.powi(2);
    let kprime = b * (1.0 - c2e.clone()) / (1.0 + c2e);
    Ok(SolitonCandidate {
        h: Profile::constant(1.0, domain),
        theta: closed(theta, domain),
        kprime: closed(kprime, domain),
        lambda: 0.0,
        structure: StructureKind::CalabiYau,
        family: Family::CYClosedForm,
        domain,
    })
}

/// CY residuals: with `W = −((e^{3iθ})′ − e^{3iθ}k′)` fitted to its mean
/// `b₁ + ib₂`, reports `|3θ′ − b₁ sin 3θ + b₂ cos 3θ|`,
/// `|k′ − b₁ cos 3θ − b₂ sin 3θ|`, `|W′|`, and `|λ|`, `|h′|`, `|h − 1|`.
pub fn residuals_cy(cand: &SolitonCandidate) -> Result<ResidualReport, SolitonError> {
    if cand.structure != StructureKind::CalabiYau {
        return Err(SolitonError::StructureMismatch { expected: StructureKind::CalabiYau });
    }
    let pts = cand.sample_points(SAMPLES);
    let mut ws = Vec::with_capacity(pts.len());
    let mut hdev: f64 = 0.0;
    for &r in &pts {
        let th = cand.theta.jet_at(r)?;
        let kp = cand.kprime.jet_at(r)?;
        let h = cand.h.jet_at(r)?;
        hdev = math::max(hdev, math::max(math::abs(h.d(1)), math::abs(h.value - 1.0)));
        let e = CJet::cis(&(th * 3.0));
        let w = -(e.derivative() - e * kp.to_complex());
        ws.push((th, kp, w));
    }
    let mean = ws.iter().fold(Complex64::new(0.0, 0.0), |s, (_, _, w)| s + w.value) / pts.len() as f64;
    let (b1, b2) = (mean.re, mean.im);
    let (mut e1, mut e2, mut e3): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (th, kp, w) in &ws {
        let (s3, c3) = (math::sin(3.0 * th.value), math::cos(3.0 * th.value));
        e1 = math::max(e1, math::abs(3.0 * th.d(1) - b1 * s3 + b2 * c3));
        e2 = math::max(e2, math::abs(kp.value - b1 * c3 - b2 * s3));
        e3 = math::max(e3, w.d(1).norm());
    }
    Ok(ResidualReport::new(
        alloc::vec![
            ("theta_eq", e1),
            ("kprime_eq", e2),
            ("w_derivative", e3),
            ("lambda", math::abs(cand.lambda)),
            ("warp", hdev),
        ],
        pts.len(),
        DEFAULT_TOL,
    ))
}

/// Parameters of the special NK families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NkFamily {
    /// `3θ = 0`, `h = r + b`, `k′ = −(λ/4)(r + b)`.
    Cone { b: f64, lambda: f64 },
    /// `3θ = π`, `h = −r + b`, `k′ = (λ/4)(−r + b)`.
    AntiCone { b: f64, lambda: f64 },
    /// `3θ = π/2`, `h = b`, `k′ = c`, `λ = −12/b²`.
    Cylinder { b: f64, c: f64 },
    /// `3θ = r`, `h = sin r`, `k′ = 0`, `λ = −16` on `(0, π)`.
    SineCone,
}

/// One of the special NK solitons. Default domains: `(−b, 4 − b)` for the
/// cone, `(b − 4, b)` for the anti-cone, `(−5, 5)` for the cylinder.
pub fn nk_special(family: NkFamily, domain: Option<Domain>) -> Result<SolitonCandidate, SolitonError> {
    let r = Expr::r();
    let (h, theta, kprime, lambda, tag, default) = match family {
        NkFamily::Cone { b, lambda } => {
            if !(b.is_finite() && lambda.is_finite()) {
                return Err(SolitonError::InvalidParams("b and lambda must be finite"));
            }
            let h = r.clone() + b;
            (h.clone(), Expr::c(0.0), -(lambda / 4.0) * h, lambda, Family::Cone, Domain::interval(-b, 4.0 - b))
        }
        NkFamily::AntiCone { b, lambda } => {
            if !(b.is_finite() && lambda.is_finite()) {
                return Err(SolitonError::InvalidParams("b and lambda must be finite"));
            }
            let h = b - r.clone();
            (h.clone(), Expr::c(math::PI / 3.0), (lambda / 4.0) * h, lambda, Family::AntiCone, Domain::interval(b - 4.0, b))
        }
        NkFamily::Cylinder { b, c } => {
            if !(b > 0.0 && b.is_finite() && c.is_finite()) {
                return Err(SolitonError::InvalidParams("cylinder needs b > 0"));
            }
            (Expr::c(b), Expr::c(math::PI / 6.0), Expr::c(c), -12.0 / (b * b), Family::Cylinder, Domain::interval(-5.0, 5.0))
        }
        NkFamily::SineCone => {
            (r.clone().sin(), r / 3.0, Expr::c(0.0), -16.0, Family::SineCone, Domain::interval(0.0, math::PI))
        }
    };
    let domain = domain.unwrap_or(default);
    domain.validate()?;
    // h must stay positive on the open domain
    let (a, z) = (domain.start(), domain.end());
    let inside = [a + 1e-9 * (z - a), 0.5 * (a + z), z - 1e-9 * (z - a)];
    for x in inside {
        if !(h.eval(x)? > 0.0) {
            return Err(SolitonError::InvalidParams("h must be positive on the domain"));
        }
    }
    if family == NkFamily::SineCone && (a < 0.0 || z > math::PI) {
        return Err(SolitonError::InvalidParams("sine-cone lives on (0, π)"));
    }
    Ok(SolitonCandidate {
        h: closed(h, domain),
        theta: closed(theta, domain),
        kprime: closed(kprime, domain),
        lambda,
        structure: StructureKind::NearlyKahler,
        family: tag,
        domain,
    })
}

/// The four NK coordinate equations at one point, as jets:
/// `[h′ − cos 3θ, eq2, eq3, redundant]`.
pub fn nk_equations(h: &RJet, theta: &RJet, kprime: &RJet, lambda: f64) -> [RJet; 4] {
    let s3 = (*theta * 3.0).sin();
    let c3 = (*theta * 3.0).cos();
    let h2 = *h * *h;
    let h3 = h2 * *h;
    let e1 = h.derivative() - c3;
    let hs = h3 * s3;
    let e2 = hs.derivative().derivative() - *h * s3 * 12.0 - hs * lambda - (*kprime * hs).derivative();
    let hc = h3 * c3;
    let e3 = hc.derivative() - h2 * 3.0 - h2 * h2 * (lambda / 4.0) - *kprime * hc;
    let red = (hc.derivative() - h2 * 3.0).derivative() - hc * lambda - (*kprime * hc).derivative();
    [e1, e2, e3, red]
}

/// NK coordinate residuals at 200 interior points.
pub fn residuals_nk(cand: &SolitonCandidate) -> Result<ResidualReport, SolitonError> {
    if cand.structure != StructureKind::NearlyKahler {
        return Err(SolitonError::StructureMismatch { expected: StructureKind::NearlyKahler });
    }
    let pts = cand.sample_points(SAMPLES);
    let mut sup = [0.0f64; 4];
    for &r in &pts {
        let eqs = nk_equations(&cand.h.jet_at(r)?, &cand.theta.jet_at(r)?, &cand.kprime.jet_at(r)?, cand.lambda);
        for (s, e) in sup.iter_mut().zip(eqs.iter()) {
            *s = if e.value.is_nan() { f64::NAN } else { math::max(*s, math::abs(e.value)) };
        }
    }
    Ok(ResidualReport::new(
        alloc::vec![("eq1", sup[0]), ("eq2", sup[1]), ("eq3", sup[2]), ("redundant", sup[3])],
        pts.len(),
        DEFAULT_TOL,
    ))
}

/// `−Δψ − d(k′∂r⌟ψ) − λψ` at one point.
pub fn form_residual_at(cand: &SolitonCandidate, r: f64) -> Result<crate::forms::InvariantForm, SolitonError> {
    let p = cand.at(r)?;
    let psi = build_psi(&p);
    let lap = hodge_laplacian_psi(&p)?;
    let lie = psi.interior_r(&cand.kprime.jet_at(r)?).d(p.structure);
    Ok(lap - lie - psi.scale_real(&RJet::constant(cand.lambda)))
}

/// Sup over the samples of every basis coefficient of the form residual.
pub fn form_residual(cand: &SolitonCandidate) -> Result<ResidualReport, SolitonError> {
    let pts = cand.sample_points(SAMPLES);
    let mut sup: f64 = 0.0;
    for &r in &pts {
        sup = math::max(sup, form_residual_at(cand, r)?.max_coeff());
    }
    Ok(ResidualReport::new(alloc::vec![("form", sup)], pts.len(), DEFAULT_TOL))
}

/// Least-squares `μ²` in `Δψ = μ²ψ` over all basis coefficients at the
/// sample points, and the sup of the remaining residual.
pub fn eigenform_check(g: &G2Profile, points: &[f64]) -> Result<(f64, f64), SolitonError> {
    let mut pairs = Vec::with_capacity(points.len());
    let (mut num, mut den) = (0.0, 0.0);
    for &r in points {
        let p = g.at(r)?;
        let psi = build_psi(&p);
        let lap = -hodge_laplacian_psi(&p)?;
        for (a, b) in psi.coeffs().iter().zip(lap.coeffs().iter()) {
            num += (a.value.conj() * b.value).re;
            den += a.value.norm_sqr();
        }
        pairs.push((psi, lap));
    }
    if den == 0.0 {
        return Err(SolitonError::InvalidParams("ψ vanishes at every sample"));
    }
    let mu2 = num / den;
    let res = pairs.iter().fold(0.0, |m, (psi, lap)| {
        math::max(m, (*lap - psi.scale_real(&RJet::constant(mu2))).max_coeff())
    });
    Ok((mu2, res))
}

/// `(‖d*ψ‖², −7λ Vol)` by open-interval quadrature (`Vol(N) = 1`).
pub fn compact_identity_check(cand: &SolitonCandidate) -> Result<(f64, f64), SolitonError> {
    let g2 = cand.g2();
    let (a, b) = (cand.domain.start(), cand.domain.end());
    let wrap = |e: FormError| match e {
        FormError::Profile(ProfileError::QuadratureFailure { .. }) => SolitonError::DivergentIntegral { a, b },
        other => SolitonError::Form(other),
    };
    let lhs = g2
        .l2_inner(
            |p| {
                let dstar = build_phi(p).d(p.structure).star(p);
                Ok((dstar, dstar))
            },
            1e-12,
        )
        .map_err(wrap)?
        .re;
    let vol = g2.volume(1e-12).map_err(wrap)?;
    Ok((lhs, -7.0 * cand.lambda * vol))
}

/// `∫ k′ dr` as a profile with `k(r0) = 0`.
pub fn potential(cand: &SolitonCandidate, r0: f64) -> Result<Profile, SolitonError> {
    Ok(cand.kprime.antiderivative_with_tol(r0, 0.0, quad::DEFAULT_TOL)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cy_examples() {
        let c = cy_closed_form(2.0, 0.0, None).unwrap();
        assert_eq!(c.theta.eval(1.0).unwrap(), 0.0);
        assert_eq!(c.kprime.eval(1.0).unwrap(), 2.0);
        let c = cy_closed_form(0.0, 1.5, None).unwrap();
        assert!((c.theta.eval(0.3).unwrap() - 2.0 / 3.0 * math::atan(1.5)).abs() < 1e-15);
        assert_eq!(c.kprime.eval(0.3).unwrap(), 0.0);
        let c = cy_closed_form(1.0, 1.0, None).unwrap();
        let th = c.theta.jet_at(0.0).unwrap();
        assert!((th.value - math::FRAC_PI_6).abs() < 1e-15 && (th.d(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!(c.kprime.eval(0.0).unwrap().abs() < 1e-15);
        assert_eq!(c.lambda, 0.0);
        let rep = residuals_cy(&c).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn cy_non_soliton() {
        let d = Domain::interval(-1.0, 1.0);
        let mut c = cy_closed_form(1.0, 1.0, Some(d)).unwrap();
        c.theta = Profile::parse("r", d).unwrap();
        c.kprime = Profile::constant(0.0, d);
        let rep = residuals_cy(&c).unwrap();
        assert!(!rep.pass && rep.get("w_derivative").unwrap() > 1.0);
        c.theta = Profile::constant(0.2, d);
        c.kprime = Profile::constant(0.7, d);
        let rep = residuals_cy(&c).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn nk_special_parameters() {
        assert_eq!(nk_special(NkFamily::Cylinder { b: 1.0, c: 0.0 }, None).unwrap().lambda, -12.0);
        let s = nk_special(NkFamily::SineCone, None).unwrap();
        assert_eq!(s.lambda, -16.0);
        assert_eq!(s.kprime.eval(1.0).unwrap(), 0.0);
        assert!(matches!(
            nk_special(NkFamily::Cylinder { b: -1.0, c: 0.0 }, None),
            Err(SolitonError::InvalidParams(_))
        ));
        assert!(nk_special(NkFamily::Cone { b: 0.0, lambda: 0.0 }, Some(Domain::interval(-1.0, 1.0))).is_err());
    }

    #[test]
    fn cylinder_with_wrong_lambda() {
        let mut c = nk_special(NkFamily::Cylinder { b: 1.0, c: 0.0 }, None).unwrap();
        c.lambda = 0.0;
        let rep = residuals_nk(&c).unwrap();
        assert!((rep.get("eq3").unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn torsion_free_product_has_zero_form_residual() {
        let c = cy_closed_form(0.0, 0.0, None).unwrap();
        assert_eq!(form_residual(&c).unwrap().get("form"), Some(0.0));
    }
}
