//! SU(3)-invariant forms on `N⁶ × L¹` and their exterior calculus.
//!
//! Every invariant form is a combination of the twelve basis elements
//! `{1, ω, Ω, Ω̄, ω²/2, vol₆} × {1, dr}` with coefficients depending on `r`.
//! Forms here are pointwise: each coefficient is a complex [`CJet`] at one
//! value of `r`, so `d` can differentiate it. Evaluate a [`G2Profile`] at `r`
//! to get the jets.

use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::jet::{CJet, RJet};
use crate::math;
use crate::profiles::{quad, Domain, Expr, Profile, ProfileError};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FormError {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: u8, right: u8 },
    #[error("wedge product has degree {degree} > 7")]
    DegreeOverflow { degree: u8 },
    #[error("coclosed constraint violated at r = {r}: residual {residual:e}")]
    ConstraintViolated { r: f64, residual: f64 },
    #[error("{what} is not positive at r = {r}")]
    NonPositive { r: f64, what: &'static str },
    #[error("{0} needs closed-form profiles")]
    NotClosedForm(&'static str),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Which SU(3)-structure the cross-section `N⁶` carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StructureKind {
    CalabiYau,
    NearlyKahler,
}

impl StructureKind {
    pub fn tag(self) -> &'static str {
        match self {
            StructureKind::CalabiYau => "CY",
            StructureKind::NearlyKahler => "NK",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "CY" | "cy" => Some(StructureKind::CalabiYau),
            "NK" | "nk" => Some(StructureKind::NearlyKahler),
            _ => None,
        }
    }
}

/// Invariant forms on `N⁶` alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NBasis {
    One,
    Omega,
    Holo,
    HoloBar,
    Omega2Half,
    Vol6,
}

impl NBasis {
    pub const ALL: [NBasis; 6] =
        [NBasis::One, NBasis::Omega, NBasis::Holo, NBasis::HoloBar, NBasis::Omega2Half, NBasis::Vol6];

    pub fn degree(self) -> u8 {
        match self {
            NBasis::One => 0,
            NBasis::Omega => 2,
            NBasis::Holo | NBasis::HoloBar => 3,
            NBasis::Omega2Half => 4,
            NBasis::Vol6 => 6,
        }
    }

    /// `self ∧ other` on `N`, as a multiple of a basis element.
    pub fn wedge(self, other: NBasis) -> Option<(NBasis, Complex64)> {
        use NBasis::*;
        let one = Complex64::new(1.0, 0.0);
        match (self, other) {
            (One, b) => Some((b, one)),
            (a, One) => Some((a, one)),
            (Omega, Omega) => Some((Omega2Half, Complex64::new(2.0, 0.0))),
            (Omega, Omega2Half) | (Omega2Half, Omega) => Some((Vol6, Complex64::new(3.0, 0.0))),
            (Holo, HoloBar) => Some((Vol6, -8.0 * I)),
            (HoloBar, Holo) => Some((Vol6, 8.0 * I)),
            _ => None,
        }
    }

    /// Exterior derivative on `N` as a list of `(element, coefficient)`.
    pub fn d(self, s: StructureKind) -> &'static [(NBasis, Complex64)] {
        const NK_D_OMEGA: [(NBasis, Complex64); 2] =
            [(NBasis::Holo, Complex64::new(-1.5, 0.0)), (NBasis::HoloBar, Complex64::new(-1.5, 0.0))];
        const NK_D_HOLO: [(NBasis, Complex64); 1] = [(NBasis::Omega2Half, Complex64::new(0.0, 4.0))];
        const NK_D_HOLOBAR: [(NBasis, Complex64); 1] = [(NBasis::Omega2Half, Complex64::new(0.0, -4.0))];
        match (s, self) {
            (StructureKind::NearlyKahler, NBasis::Omega) => &NK_D_OMEGA,
            (StructureKind::NearlyKahler, NBasis::Holo) => &NK_D_HOLO,
            (StructureKind::NearlyKahler, NBasis::HoloBar) => &NK_D_HOLOBAR,
            _ => &[],
        }
    }

    /// Hodge star of `N⁶` (unwarped).
    pub fn star6(self) -> (NBasis, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        match self {
            NBasis::One => (NBasis::Vol6, one),
            NBasis::Vol6 => (NBasis::One, one),
            NBasis::Omega => (NBasis::Omega2Half, one),
            NBasis::Omega2Half => (NBasis::Omega, one),
            NBasis::Holo => (NBasis::Holo, -I),
            NBasis::HoloBar => (NBasis::HoloBar, I),
        }
    }
}

/// The twelve invariant basis elements of `N⁶ × L¹`, in storage order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    One,
    Dr,
    Omega,
    DrOmega,
    Holo,
    HoloBar,
    DrHolo,
    DrHoloBar,
    Omega2Half,
    DrOmega2Half,
    Vol6,
    DrVol6,
}

impl Basis {
    pub const ALL: [Basis; 12] = [
        Basis::One,
        Basis::Dr,
        Basis::Omega,
        Basis::DrOmega,
        Basis::Holo,
        Basis::HoloBar,
        Basis::DrHolo,
        Basis::DrHoloBar,
        Basis::Omega2Half,
        Basis::DrOmega2Half,
        Basis::Vol6,
        Basis::DrVol6,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> &'static str {
        match self {
            Basis::One => "one",
            Basis::Dr => "dr",
            Basis::Omega => "omega",
            Basis::DrOmega => "dr_omega",
            Basis::Holo => "Omega",
            Basis::HoloBar => "Omegabar",
            Basis::DrHolo => "dr_Omega",
            Basis::DrHoloBar => "dr_Omegabar",
            Basis::Omega2Half => "omega2_half",
            Basis::DrOmega2Half => "dr_omega2_half",
            Basis::Vol6 => "vol6",
            Basis::DrVol6 => "dr_vol6",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Basis> {
        Basis::ALL.into_iter().find(|b| b.tag() == tag)
    }

    /// `(N-part, has dr factor)`.
    pub fn split(self) -> (NBasis, bool) {
        match self {
            Basis::One => (NBasis::One, false),
            Basis::Dr => (NBasis::One, true),
            Basis::Omega => (NBasis::Omega, false),
            Basis::DrOmega => (NBasis::Omega, true),
            Basis::Holo => (NBasis::Holo, false),
            Basis::HoloBar => (NBasis::HoloBar, false),
            Basis::DrHolo => (NBasis::Holo, true),
            Basis::DrHoloBar => (NBasis::HoloBar, true),
            Basis::Omega2Half => (NBasis::Omega2Half, false),
            Basis::DrOmega2Half => (NBasis::Omega2Half, true),
            Basis::Vol6 => (NBasis::Vol6, false),
            Basis::DrVol6 => (NBasis::Vol6, true),
        }
    }

    pub fn join(n: NBasis, dr: bool) -> Basis {
        let k = match n {
            NBasis::One => 0,
            NBasis::Omega => 2,
            NBasis::Holo => 4,
            NBasis::HoloBar => 5,
            NBasis::Omega2Half => 8,
            NBasis::Vol6 => 10,
        };
        let k = match (n, dr) {
            (NBasis::Holo, true) => 6,
            (NBasis::HoloBar, true) => 7,
            (_, true) => k + 1,
            (_, false) => k,
        };
        Basis::ALL[k]
    }

    pub fn degree(self) -> u8 {
        let (n, dr) = self.split();
        n.degree() + dr as u8
    }

    /// The element paired with this one under complex conjugation.
    pub fn conjugate(self) -> Basis {
        let (n, dr) = self.split();
        let m = match n {
            NBasis::Holo => NBasis::HoloBar,
            NBasis::HoloBar => NBasis::Holo,
            other => other,
        };
        Basis::join(m, dr)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Homogeneous invariant form with jet coefficients at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantForm {
    degree: u8,
    coeffs: [CJet; 12],
    real: bool,
}

impl InvariantForm {
    pub fn zero(degree: u8) -> Self {
        InvariantForm { degree, coeffs: [CJet::zero(); 12], real: true }
    }

    /// `c · b` for a single basis element.
    pub fn term(b: Basis, c: CJet) -> Self {
        let mut f = Self::zero(b.degree());
        f.coeffs[b.index()] = c;
        f.real = false;
        f
    }

    pub fn basis(b: Basis) -> Self {
        let mut f = Self::term(b, CJet::constant(Complex64::new(1.0, 0.0)));
        f.real = !matches!(b.split().0, NBasis::Holo | NBasis::HoloBar);
        f
    }

    /// Real form `re(c)·b` for non-Ω elements, `c·Ω + c̄·Ω̄` for Ω-type ones.
    pub fn real_term(b: Basis, c: CJet) -> Self {
        let mut f = Self::zero(b.degree());
        match b.split().0 {
            NBasis::Holo | NBasis::HoloBar => {
                f.coeffs[b.index()] = c;
                f.coeffs[b.conjugate().index()] = c.conj();
            }
            _ => f.coeffs[b.index()] = c.re().to_complex(),
        }
        f
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeff(&self, b: Basis) -> CJet {
        self.coeffs[b.index()]
    }

    pub fn coeffs(&self) -> &[CJet; 12] {
        &self.coeffs
    }

    /// Nonzero entries, in basis order.
    pub fn entries(&self) -> impl Iterator<Item = (Basis, CJet)> + '_ {
        Basis::ALL
            .into_iter()
            .filter(move |b| b.degree() == self.degree)
            .map(move |b| (b, self.coeffs[b.index()]))
    }

    /// Largest modulus among coefficient values.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| math::max(m, c.value.norm()))
    }

    /// Largest modulus over coefficient values and their valid derivatives.
    pub fn max_coeff_jet(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| math::max(m, c.sup()))
    }

    /// Distance from satisfying the reality conditions.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in Basis::ALL {
            let c = self.coeffs[b.index()];
            let bar = self.coeffs[b.conjugate().index()];
            worst = math::max(worst, (c - bar.conj()).sup());
        }
        worst
    }

    pub fn scale(&self, c: CJet) -> Self {
        let mut out = *self;
        for x in out.coeffs.iter_mut() {
            *x *= c;
        }
        out.real = false;
        out
    }

    pub fn scale_real(&self, s: &RJet) -> Self {
        let mut out = *self;
        let c = s.to_complex();
        for x in out.coeffs.iter_mut() {
            *x *= c;
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FormError> {
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch { left: self.degree, right: other.degree });
        }
        let mut out = *self;
        for (x, y) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *x += *y;
        }
        out.real = self.real && other.real;
        Ok(out)
    }

    /// Wedge product; a result of degree above 7 is the zero form.
    pub fn wedge(&self, other: &Self) -> Self {
        self.wedge_strict(other).unwrap_or_else(|_| Self::zero(self.degree + other.degree))
    }

    /// Wedge product that reports `DegreeOverflow` instead of truncating.
    pub fn wedge_strict(&self, other: &Self) -> Result<Self, FormError> {
        let degree = self.degree + other.degree;
        if degree > 7 {
            return Err(FormError::DegreeOverflow { degree });
        }
        let mut out = Self::zero(degree);
        out.real = self.real && other.real;
        for (a, ca) in self.entries() {
            let (na, dra) = a.split();
            for (b, cb) in other.entries() {
                let (nb, drb) = b.split();
                if dra && drb {
                    continue;
                }
                let Some((nc, k)) = na.wedge(nb) else { continue };
                // (dr∧α)∧β = dr∧(α∧β);  α∧(dr∧β) = (−1)^|α| dr∧(α∧β)
                let sign = if drb && na.degree() % 2 == 1 { -1.0 } else { 1.0 };
                let c = Basis::join(nc, dra || drb);
                out.coeffs[c.index()] += (ca * cb).scale(k * sign);
            }
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self, s: StructureKind) -> Self {
        let mut out = Self::zero(self.degree + 1);
        out.real = self.real;
        for (b, c) in self.entries() {
            let (n, dr) = b.split();
            if !dr {
                out.coeffs[Basis::join(n, true).index()] += c.derivative();
                for &(m, k) in n.d(s) {
                    out.coeffs[Basis::join(m, false).index()] += c.scale(k);
                }
            } else {
                for &(m, k) in n.d(s) {
                    out.coeffs[Basis::join(m, true).index()] += c.scale(-k);
                }
            }
        }
        out
    }

    /// Hodge star of the warped metric `G² dr² + h² g₆`.
    pub fn star(&self, g: &G2Point) -> Self {
        let mut out = Self::zero(7 - self.degree.min(7));
        out.real = self.real;
        let h2 = g.h * g.h;
        let ginv = g.g.recip();
        let mut hp = [RJet::constant(1.0); 7];
        hp[1] = h2;
        for k in 2..7 {
            hp[k] = hp[k - 1] * h2;
        }
        let hinv2 = h2.recip();
        // h^{6−2k} for k = 0..6
        let warp = |k: u8| -> RJet {
            let e = 3 - k as i32;
            if e >= 0 {
                hp[e as usize]
            } else {
                let mut w = hinv2;
                for _ in 1..(-e) {
                    w *= hinv2;
                }
                w
            }
        };
        for (b, c) in self.entries() {
            let (n, dr) = b.split();
            let k = n.degree();
            let (m, s6) = n.star6();
            let c = c.scale(s6);
            if dr {
                let f = warp(k) * ginv;
                out.coeffs[Basis::join(m, false).index()] += c.scale_real(&f);
            } else {
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                let f = warp(k) * g.g * sign;
                out.coeffs[Basis::join(m, true).index()] += c.scale_real(&f);
            }
        }
        out
    }

    /// Contraction with `s(r)·∂/∂r`.
    pub fn interior_r(&self, s: &RJet) -> Self {
        let mut out = Self::zero(self.degree.saturating_sub(1));
        out.real = self.real;
        if self.degree == 0 {
            return out;
        }
        let s = s.to_complex();
        for (b, c) in self.entries() {
            let (n, dr) = b.split();
            if dr {
                out.coeffs[Basis::join(n, false).index()] += c * s;
            }
        }
        out
    }

    /// `d* = (−1)^k ⋆d⋆` on `k`-forms; zero on functions.
    pub fn codifferential(&self, g: &G2Point) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let out = self.star(g).d(g.structure).star(g);
        if self.degree % 2 == 1 {
            -out
        } else {
            out
        }
    }

    /// Hodge Laplacian `Δ = dd* + d*d`.
    pub fn hodge_laplacian(&self, g: &G2Point) -> Self {
        let s = g.structure;
        let mut out = Self::zero(self.degree);
        if self.degree > 0 {
            out = out + self.codifferential(g).d(s);
        }
        if self.degree < 7 {
            out = out + self.d(s).codifferential(g);
        }
        out
    }
}

impl Add for InvariantForm {
    type Output = InvariantForm;
    /// Panics on mismatched degrees; see [`InvariantForm::try_add`].
    fn add(self, rhs: Self) -> Self {
        match self.try_add(&rhs) {
            Ok(f) => f,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Neg for InvariantForm {
    type Output = InvariantForm;
    fn neg(self) -> Self {
        let mut out = self;
        for x in out.coeffs.iter_mut() {
            *x = -*x;
        }
        out
    }
}

impl Sub for InvariantForm {
    type Output = InvariantForm;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// The warping data `(h, θ, G)` at a single `r`, as jets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G2Point {
    pub r: f64,
    pub h: RJet,
    pub theta: RJet,
    pub g: RJet,
    pub structure: StructureKind,
}

impl G2Point {
    pub fn new(r: f64, h: RJet, theta: RJet, g: RJet, structure: StructureKind) -> Result<Self, FormError> {
        if !(h.value > 0.0) {
            return Err(FormError::NonPositive { r, what: "h" });
        }
        if !(g.value > 0.0) {
            return Err(FormError::NonPositive { r, what: "G" });
        }
        Ok(G2Point { r, h, theta, g, structure })
    }

    /// `F³ = h³ e^{3iθ}`.
    pub fn f3(&self) -> CJet {
        CJet::cis(&(self.theta * 3.0)).scale_real(&self.h.powi(3))
    }

    /// Coefficient of `dr∧vol₆` in `vol₇`: `G h⁶`.
    pub fn volume(&self) -> RJet {
        self.g * self.h.powi(6)
    }

    /// `h′ − G cos 3θ` for NK, `h′` for CY.
    pub fn constraint_residual(&self) -> f64 {
        match self.structure {
            StructureKind::CalabiYau => self.h.d(1),
            StructureKind::NearlyKahler => self.h.d(1) - self.g.value * math::cos(3.0 * self.theta.value),
        }
    }

    pub fn check_coclosed(&self, tol: f64) -> Result<(), FormError> {
        let residual = math::abs(self.constraint_residual());
        if residual > tol * math::max(1.0, self.g.value) {
            return Err(FormError::ConstraintViolated { r: self.r, residual });
        }
        Ok(())
    }
}

/// `φ = (F³/2)Ω + (F̄³/2)Ω̄ − G h² dr∧ω`.
pub fn build_phi(g: &G2Point) -> InvariantForm {
    let half = g.f3().scale(Complex64::new(0.5, 0.0));
    InvariantForm::real_term(Basis::Holo, half)
        + InvariantForm::real_term(Basis::DrOmega, (-(g.g * g.h * g.h)).to_complex())
}

/// `ψ = (iGF³/2) dr∧Ω − (iGF̄³/2) dr∧Ω̄ − h⁴ ω²/2`.
pub fn build_psi(g: &G2Point) -> InvariantForm {
    let c = g.f3().scale_real(&g.g).scale(Complex64::new(0.0, 0.5));
    InvariantForm::real_term(Basis::DrHolo, c)
        + InvariantForm::real_term(Basis::Omega2Half, (-g.h.powi(4)).to_complex())
}

/// Default tolerance on the coclosed constraint.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// `−Δψ`, computed as `−d⋆dφ`; requires the coclosed constraint.
pub fn hodge_laplacian_psi(g: &G2Point) -> Result<InvariantForm, FormError> {
    g.check_coclosed(CONSTRAINT_TOL)?;
    Ok(-build_phi(g).d(g.structure).star(g).d(g.structure))
}

/// `−Δψ` from the closed-form coefficients `A`, `B` (CY: `B = 0`,
/// `A = (i(F³)′/2G)′`).
pub fn laplacian_psi_closed_form(g: &G2Point) -> InvariantForm {
    let f3 = g.f3();
    let ginv = g.g.recip().to_complex();
    let i = CJet::constant(I);
    let inner = i * f3.derivative() * ginv.scale(Complex64::new(0.5, 0.0));
    match g.structure {
        StructureKind::CalabiYau => InvariantForm::real_term(Basis::DrHolo, inner.derivative()),
        StructureKind::NearlyKahler => {
            let h = g.h;
            let s3 = (g.theta * 3.0).sin();
            let c3 = (g.theta * 3.0).cos();
            let a = (inner - i * (h * h * 1.5).to_complex()).derivative()
                + (g.g * h * s3 * 6.0).to_complex();
            let b = -((h.powi(3) * c3).derivative() * g.g.recip() * 4.0) + h * h * 12.0;
            InvariantForm::real_term(Basis::DrHolo, a)
                + InvariantForm::real_term(Basis::Omega2Half, b.to_complex())
        }
    }
}

/// `(dφ, dψ)` from their closed-form coefficients.
pub fn first_derivatives_closed_form(p: &G2Point) -> (InvariantForm, InvariantForm) {
    let f3 = p.f3();
    let df3 = f3.derivative();
    let half = Complex64::new(0.5, 0.0);
    let h4p = p.h.powi(4).derivative().to_complex();
    match p.structure {
        StructureKind::CalabiYau => (
            InvariantForm::real_term(Basis::DrHolo, df3.scale(half)),
            InvariantForm::real_term(Basis::DrOmega2Half, -h4p),
        ),
        StructureKind::NearlyKahler => {
            let gh2 = (p.g * p.h * p.h).to_complex();
            (
                InvariantForm::real_term(Basis::DrHolo, df3.scale(half) - gh2.scale(Complex64::new(1.5, 0.0)))
                    + InvariantForm::real_term(Basis::Omega2Half, (f3 - f3.conj()).scale(Complex64::new(0.0, 2.0))),
                InvariantForm::real_term(
                    Basis::DrOmega2Half,
                    (f3 + f3.conj()).scale_real(&p.g).scale(Complex64::new(2.0, 0.0)) - h4p,
                ),
            )
        }
    }
}

/// Pointwise inner product: `a ∧ ⋆b = ⟨a, b⟩ vol₇`. Complex-bilinear; real
/// for real forms.
pub fn pointwise_inner(a: &InvariantForm, b: &InvariantForm, g: &G2Point) -> Result<CJet, FormError> {
    if a.degree() != b.degree() {
        return Err(FormError::DegreeMismatch { left: a.degree(), right: b.degree() });
    }
    let top = a.wedge(&b.star(g));
    Ok(top.coeff(Basis::DrVol6) / g.volume().to_complex())
}

/// A `(h, θ, G)` triple of profiles on a common domain.
#[derive(Clone, Debug)]
pub struct G2Profile {
    pub h: Profile,
    pub theta: Profile,
    pub g: Profile,
    pub structure: StructureKind,
    pub domain: Domain,
}

impl G2Profile {
    pub fn new(h: Profile, theta: Profile, g: Profile, structure: StructureKind) -> Self {
        let domain = h.domain();
        G2Profile { h, theta, g, structure, domain }
    }

    /// Closed-form triple from expression strings.
    pub fn parse(h: &str, theta: &str, g: &str, structure: StructureKind, domain: Domain) -> Result<Self, FormError> {
        Ok(G2Profile {
            h: Profile::parse(h, domain)?,
            theta: Profile::parse(theta, domain)?,
            g: Profile::parse(g, domain)?,
            structure,
            domain,
        })
    }

    /// NK data with `h` obtained from the constraint `h′ = G cos 3θ`,
    /// `h(r0) = h0`.
    pub fn nk_from_constraint(theta: Expr, g: Expr, domain: Domain, r0: f64, h0: f64) -> Result<Self, FormError> {
        let integrand = Profile::closed_form(g.clone() * (theta.clone() * 3.0).cos(), domain);
        let h = integrand.antiderivative_with_tol(r0, h0, quad::DEFAULT_TOL)?;
        Ok(G2Profile {
            h,
            theta: Profile::closed_form(theta, domain),
            g: Profile::closed_form(g, domain),
            structure: StructureKind::NearlyKahler,
            domain,
        })
    }

    pub fn at(&self, r: f64) -> Result<G2Point, FormError> {
        G2Point::new(r, self.h.jet_at(r)?, self.theta.jet_at(r)?, self.g.jet_at(r)?, self.structure)
    }

    /// `∫ f(point) G h⁶ dr` over the domain, with `Vol(N) = 1`.
    pub fn integrate<F>(&self, mut f: F, rel_tol: f64) -> Result<Complex64, FormError>
    where
        F: FnMut(&G2Point) -> Result<Complex64, FormError>,
    {
        let (a, b) = (self.domain.start(), self.domain.end());
        let mut err = None;
        let mut run = |part: u8| {
            quad::integrate_open(
                |r| {
                    let p = self.at(r).map_err(|e| {
                        err = Some(e);
                        ProfileError::SingularEval { r, what: "integrand" }
                    })?;
                    let v = f(&p).map_err(|e| {
                        err = Some(e);
                        ProfileError::SingularEval { r, what: "integrand" }
                    })?;
                    let w = v * p.volume().value;
                    Ok(if part == 0 { w.re } else { w.im })
                },
                a,
                b,
                rel_tol,
            )
        };
        let re = run(0);
        let im = run(1);
        match (re, im) {
            (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
            (Err(e), _) | (_, Err(e)) => Err(err.take().unwrap_or(FormError::Profile(e))),
        }
    }

    /// `∫ G h⁶ dr`.
    pub fn volume(&self, rel_tol: f64) -> Result<f64, FormError> {
        Ok(self.integrate(|_| Ok(Complex64::new(1.0, 0.0)), rel_tol)?.re)
    }

    /// `L²` inner product of two forms built pointwise by `forms`.
    pub fn l2_inner<F>(&self, mut forms: F, rel_tol: f64) -> Result<Complex64, FormError>
    where
        F: FnMut(&G2Point) -> Result<(InvariantForm, InvariantForm), FormError>,
    {
        self.integrate(
            |p| {
                let (a, b) = forms(p)?;
                Ok(pointwise_inner(&a, &b, p)?.value)
            },
            rel_tol,
        )
    }
}
