//! Seeded identity suites over random closed-form profiles.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::{
    build_phi, build_psi, first_derivatives_closed_form, hodge_laplacian_psi, laplacian_psi_closed_form, Basis,
    FormError, G2Point, G2Profile, InvariantForm, StructureKind,
};
use crate::math;
use crate::profiles::{Domain, Expr, Profile};
use crate::soliton::{self, NkFamily, SolitonError};
use crate::torsion;

/// Domain shared by the random profiles.
pub const SUITE_DOMAIN: Domain = Domain::Interval { r0: -1.0, r1: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub profiles: usize,
    pub points: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Acc {
    names: Vec<(&'static str, f64, f64)>,
}

impl Acc {
    fn new(spec: &[(&'static str, f64)]) -> Self {
        Acc { names: spec.iter().map(|&(n, t)| (n, 0.0, t)).collect() }
    }

    fn record(&mut self, name: &str, v: f64) {
        let e = self.names.iter_mut().find(|e| e.0 == name).expect("unknown check");
        e.1 = if v.is_nan() || e.1.is_nan() { f64::NAN } else { math::max(e.1, v) };
    }

    fn finish(self) -> Vec<Check> {
        self.names
            .into_iter()
            .map(|(name, max_residual, tol)| Check { name, max_residual, tol, pass: max_residual <= tol })
            .collect()
    }
}

/// `|a − b|_∞ / (1 + |b|_∞)` over all coefficients and jet orders.
fn rel(a: &InvariantForm, b: &InvariantForm) -> f64 {
    (*a - *b).max_coeff_jet() / (1.0 + b.max_coeff_jet())
}

fn trig(rng: &mut ChaCha8Rng, amp: f64) -> Expr {
    let w = rng.gen_range(0.5..2.5);
    let p = rng.gen_range(0.0..math::TAU);
    rng.gen_range(-amp..amp) * (w * Expr::r() + p).sin()
}

fn random_theta(rng: &mut ChaCha8Rng) -> Expr {
    rng.gen_range(-1.0..1.0) + trig(rng, 0.6) + rng.gen_range(-0.5..0.5) * Expr::r()
}

fn random_g(rng: &mut ChaCha8Rng) -> Expr {
    let m = rng.gen_range(-1.0..1.0);
    1.0 + rng.gen_range(-0.4..0.4) * (-(Expr::r() - m).powi(2)).exp()
}

/// Random closed-form `(h, θ, G)` with `h ∈ [0.5, 2.5]`, `G ∈ [0.6, 1.4]`.
pub fn random_profile(rng: &mut ChaCha8Rng) -> G2Profile {
    let structure = if rng.gen_bool(0.5) { StructureKind::CalabiYau } else { StructureKind::NearlyKahler };
    let h = rng.gen_range(1.0..2.0) + trig(rng, 0.5);
    let d = SUITE_DOMAIN;
    G2Profile {
        h: Profile::closed_form(h, d),
        theta: Profile::closed_form(random_theta(rng), d),
        g: Profile::closed_form(random_g(rng), d),
        structure,
        domain: d,
    }
}

/// Random coclosed profile: constant `h` for CY, `h` by quadrature of
/// `G cos 3θ` for NK.
pub fn random_coclosed_profile(rng: &mut ChaCha8Rng, structure: StructureKind) -> Result<G2Profile, FormError> {
    let d = SUITE_DOMAIN;
    let theta = random_theta(rng);
    let g = random_g(rng);
    match structure {
        StructureKind::CalabiYau => Ok(G2Profile {
            h: Profile::constant(rng.gen_range(0.5..2.0), d),
            theta: Profile::closed_form(theta, d),
            g: Profile::closed_form(g, d),
            structure,
            domain: d,
        }),
        StructureKind::NearlyKahler => G2Profile::nk_from_constraint(theta, g, d, 0.0, rng.gen_range(1.6..2.5)),
    }
}

fn identity_checks(p: &G2Point, acc: &mut Acc) -> Result<(), FormError> {
    let s = p.structure;
    let phi = build_phi(p);
    let psi = build_psi(p);
    let dphi = phi.d(s);
    let dpsi = psi.d(s);
    let zero = |k| InvariantForm::zero(k);
    let mut samples = alloc::vec![phi, psi, dphi.star(p), dpsi.star(p), dphi, dpsi];
    samples.extend(Basis::ALL.iter().map(|&b| InvariantForm::basis(b)));
    for f in &samples {
        let dd = f.d(s).d(s);
        acc.record("d_squared", rel(&dd, &zero(dd.degree())) / (1.0 + f.max_coeff_jet()));
        acc.record("star_star", rel(&f.star(p).star(p), f));
    }
    let (cphi, cpsi) = first_derivatives_closed_form(p);
    acc.record("dphi_closed_form", rel(&dphi, &cphi));
    acc.record("dpsi_closed_form", rel(&dpsi, &cpsi));
    let (t0, t1) = torsion::tau01_first_principles(p);
    let (c0, c1) = torsion::tau01_closed(p);
    acc.record(
        "tau01_closed_form",
        math::max(math::abs(t0.value - c0.value), math::abs(t1.value - c1.value)),
    );
    let (tau2, _) = torsion::tau2_tau3(p);
    acc.record("tau2_vanishes", tau2.max_coeff());
    Ok(())
}

/// `d² = 0`, `⋆⋆ = id`, closed forms of `dφ`, `dψ`, `τ₀`, `τ₁` and
/// `τ₂ = 0` on `profiles` random profiles at `points` points each.
pub fn identity_suite(seed: u64, profiles: usize, points: usize) -> Result<SuiteReport, FormError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Acc::new(&[
        ("d_squared", 1e-12),
        ("star_star", 1e-12),
        ("dphi_closed_form", 1e-12),
        ("dpsi_closed_form", 1e-12),
        ("tau2_vanishes", 1e-11),
        ("tau01_closed_form", 1e-10),
    ]);
    let pts = SUITE_DOMAIN.midpoints(points);
    for _ in 0..profiles {
        let g = random_profile(&mut rng);
        for &r in &pts {
            identity_checks(&g.at(r)?, &mut acc)?;
        }
    }
    Ok(SuiteReport { suite: "identities", seed, profiles, points, checks: acc.finish() })
}

/// Closed-form Laplacian of `ψ` against `−d⋆dφ` on coclosed profiles,
/// alternating CY and NK.
pub fn laplacian_suite(seed: u64, profiles: usize, points: usize) -> Result<SuiteReport, FormError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Acc::new(&[("laplacian_closed_form", 1e-8), ("constraint", 1e-10)]);
    let pts = SUITE_DOMAIN.midpoints(points);
    for k in 0..profiles {
        let s = if k % 2 == 0 { StructureKind::NearlyKahler } else { StructureKind::CalabiYau };
        let g = random_coclosed_profile(&mut rng, s)?;
        for &r in &pts {
            let p = g.at(r)?;
            acc.record("constraint", p.constraint_residual());
            let lap = hodge_laplacian_psi(&p)?;
            let closed = laplacian_psi_closed_form(&p);
            acc.record("laplacian_closed_form", (lap - closed).max_coeff() / (1.0 + closed.max_coeff()));
        }
    }
    Ok(SuiteReport { suite: "laplacian", seed, profiles, points, checks: acc.finish() })
}

/// Coordinate and form-level residuals of the special NK solitons and a CY
/// closed-form soliton, 200 points each.
pub fn soliton_suite() -> Result<SuiteReport, SolitonError> {
    let mut acc = Acc::new(&[("nk_coordinate", 1e-10), ("form_level", 1e-10), ("cy_coordinate", 1e-10)]);
    let fams = [
        NkFamily::Cone { b: 0.0, lambda: 1.0 },
        NkFamily::Cone { b: 0.5, lambda: -3.0 },
        NkFamily::AntiCone { b: 1.0, lambda: 2.0 },
        NkFamily::Cylinder { b: 1.0, c: 0.0 },
        NkFamily::Cylinder { b: 2.0, c: 0.5 },
        NkFamily::SineCone,
    ];
    for f in fams {
        let c = soliton::nk_special(f, None)?;
        acc.record("nk_coordinate", soliton::residuals_nk(&c)?.max());
        acc.record("form_level", soliton::form_residual(&c)?.max());
    }
    let cy = soliton::cy_closed_form(1.0, 1.0, None)?;
    acc.record("cy_coordinate", soliton::residuals_cy(&cy)?.max());
    acc.record("form_level", soliton::form_residual(&cy)?.max());
    Ok(SuiteReport { suite: "solitons", seed: 0, profiles: fams.len() + 1, points: soliton::SAMPLES, checks: acc.finish() })
}
