//! Truncated derivative jets in the radial coordinate.
//!
//! A [`Jet`] carries a value together with its first four derivatives with
//! respect to `r`. Arithmetic follows the Leibniz and Faà di Bruno rules, so a
//! closed-form expression evaluated on jets yields exact derivatives (up to
//! rounding). Differentiating a jet shifts its entries down by one and lowers
//! the number of valid derivatives; the `order` field tracks how many of the
//! four derivative slots are still meaningful.

use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::math;

/// Highest derivative carried by a jet.
pub const JET_ORDER: usize = 4;

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

/// Scalar kinds a jet can carry: `f64` and `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self {
        Self::from(0.0)
    }
    fn one() -> Self {
        Self::from(1.0)
    }
    /// Absolute value (modulus for complex scalars).
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
    fn scale(self, s: f64) -> Self {
        self * Self::from(s)
    }
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        math::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        math::hypot(self.re, self.im)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Value and derivatives `d¹..d⁴` of a function of `r` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub derivs: [T; JET_ORDER],
    order: u8,
}

/// Real jet.
pub type RJet = Jet<f64>;
/// Complex jet.
pub type CJet = Jet<Complex64>;

impl<T: Scalar> Jet<T> {
    pub fn new(value: T, derivs: [T; JET_ORDER]) -> Self {
        Jet { value, derivs, order: JET_ORDER as u8 }
    }

    /// Jet whose derivatives beyond `order` are unknown (stored as zero).
    pub fn with_order(value: T, derivs: [T; JET_ORDER], order: usize) -> Self {
        let order = order.min(JET_ORDER);
        let mut derivs = derivs;
        for d in derivs.iter_mut().skip(order) {
            *d = T::zero();
        }
        Jet { value, derivs, order: order as u8 }
    }

    pub fn constant(value: T) -> Self {
        Jet::new(value, [T::zero(); JET_ORDER])
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    /// The identity function `r ↦ r` evaluated at `r`.
    pub fn variable(r: f64) -> Self {
        Jet::new(T::from(r), [T::one(), T::zero(), T::zero(), T::zero()])
    }

    /// Number of valid derivatives.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// `k`-th derivative, `k = 0` being the value.
    pub fn d(&self, k: usize) -> T {
        if k == 0 {
            self.value
        } else {
            self.derivs[k - 1]
        }
    }

    fn coeffs(&self) -> [T; 5] {
        [self.value, self.derivs[0], self.derivs[1], self.derivs[2], self.derivs[3]]
    }

    fn from_coeffs(c: [T; 5], order: usize) -> Self {
        Jet::with_order(c[0], [c[1], c[2], c[3], c[4]], order)
    }

    /// Derivative with respect to `r`; loses one order.
    pub fn derivative(&self) -> Self {
        let c = self.coeffs();
        Jet::from_coeffs([c[1], c[2], c[3], c[4], T::zero()], self.order().saturating_sub(1))
    }

    pub fn scale(&self, s: T) -> Self {
        let c = self.coeffs();
        Jet::from_coeffs([c[0] * s, c[1] * s, c[2] * s, c[3] * s, c[4] * s], self.order())
    }

    pub fn recip(&self) -> Self {
        Jet::constant(T::one()) / *self
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Jet::constant(T::one());
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc.order = acc.order.min(self.order);
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().take(self.order() + 1).all(|c| c.is_finite())
    }

    /// Largest modulus over the valid entries.
    pub fn sup(&self) -> f64 {
        self.coeffs()
            .iter()
            .take(self.order() + 1)
            .fold(0.0, |m, c| math::max(m, c.modulus()))
    }

    /// Componentwise comparison over the entries valid in both jets.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let n = self.order().min(other.order());
        let (a, b) = (self.coeffs(), other.coeffs());
        (0..=n).fold(0.0, |m, k| math::max(m, (a[k] - b[k]).modulus()))
    }

    /// Chain rule: `f∘self` given `f, f′, .., f⁗` at `self.value`.
    pub fn compose(&self, f: [T; 5]) -> Self {
        let [_, g1, g2, g3, g4] = self.coeffs();
        let three = T::from(3.0);
        let four = T::from(4.0);
        let six = T::from(6.0);
        let d1 = f[1] * g1;
        let d2 = f[2] * g1 * g1 + f[1] * g2;
        let d3 = f[3] * g1 * g1 * g1 + three * f[2] * g1 * g2 + f[1] * g3;
        let d4 = f[4] * g1 * g1 * g1 * g1
            + six * f[3] * g1 * g1 * g2
            + f[2] * (three * g2 * g2 + four * g1 * g3)
            + f[1] * g4;
        Jet::from_coeffs([f[0], d1, d2, d3, d4], self.order())
    }
}

impl Jet<f64> {
    pub fn sin(&self) -> Self {
        let (s, c) = (math::sin(self.value), math::cos(self.value));
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (math::sin(self.value), math::cos(self.value));
        self.compose([c, -s, -c, s, c])
    }

    pub fn exp(&self) -> Self {
        let e = math::exp(self.value);
        self.compose([e; 5])
    }

    pub fn atan(&self) -> Self {
        let x = self.value;
        let q = 1.0 / (1.0 + x * x);
        self.compose([
            math::atan(x),
            q,
            -2.0 * x * q * q,
            (6.0 * x * x - 2.0) * q * q * q,
            24.0 * x * (1.0 - x * x) * q * q * q * q,
        ])
    }

    /// Square root; requires a positive value.
    pub fn sqrt(&self) -> Self {
        let x = self.value;
        let s = math::sqrt(x);
        self.compose([
            s,
            0.5 / s,
            -0.25 / (s * x),
            0.375 / (s * x * x),
            -0.9375 / (s * x * x * x),
        ])
    }

    /// Arccosine; requires `|value| < 1`.
    pub fn acos(&self) -> Self {
        let x = self.value;
        let w = 1.0 - x * x;
        let s = math::sqrt(w);
        self.compose([
            math::acos(x),
            -1.0 / s,
            -x / (s * w),
            -(1.0 + 2.0 * x * x) / (s * w * w),
            -(9.0 * x + 6.0 * x * x * x) / (s * w * w * w),
        ])
    }

    pub fn to_complex(&self) -> CJet {
        CJet::from_parts(self, &Jet::zero())
    }
}

impl Jet<Complex64> {
    pub fn from_parts(re: &RJet, im: &RJet) -> Self {
        let c = |k: usize| Complex64::new(re.d(k), im.d(k));
        Jet::with_order(c(0), [c(1), c(2), c(3), c(4)], re.order().min(im.order()))
    }

    pub fn re(&self) -> RJet {
        let c = self.coeffs();
        Jet::with_order(c[0].re, [c[1].re, c[2].re, c[3].re, c[4].re], self.order())
    }

    pub fn im(&self) -> RJet {
        let c = self.coeffs();
        Jet::with_order(c[0].im, [c[1].im, c[2].im, c[3].im, c[4].im], self.order())
    }

    pub fn conj(&self) -> Self {
        let c = self.coeffs();
        Jet::from_coeffs(
            [c[0].conj(), c[1].conj(), c[2].conj(), c[3].conj(), c[4].conj()],
            self.order(),
        )
    }

    /// `e^{i·phase}` for a real phase jet.
    pub fn cis(phase: &RJet) -> Self {
        Self::from_parts(&phase.cos(), &phase.sin())
    }

    pub fn scale_real(&self, s: &RJet) -> Self {
        *self * s.to_complex()
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.coeffs(), rhs.coeffs());
        Jet::from_coeffs(
            [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4]],
            self.order().min(rhs.order()),
        )
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let a = self.coeffs();
        Jet::from_coeffs([-a[0], -a[1], -a[2], -a[3], -a[4]], self.order())
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.coeffs(), rhs.coeffs());
        let mut c = [T::zero(); 5];
        for (n, cn) in c.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in 0..=n {
                acc = acc + a[k] * b[n - k] * T::from(BINOM[n][k]);
            }
            *cn = acc;
        }
        Jet::from_coeffs(c, self.order().min(rhs.order()))
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let (f, g) = (self.coeffs(), rhs.coeffs());
        let mut q = [T::zero(); 5];
        for n in 0..5 {
            let mut acc = f[n];
            for k in 1..=n {
                acc = acc - g[k] * q[n - k] * T::from(BINOM[n][k]);
            }
            q[n] = acc / g[0];
        }
        Jet::from_coeffs(q, self.order().min(rhs.order()))
    }
}

impl<T: Scalar> Add<T> for Jet<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        let mut out = self;
        out.value = out.value + rhs;
        out
    }
}

impl<T: Scalar> Sub<T> for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: T) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Mul<T> for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Scalar> Div<T> for Jet<T> {
    type Output = Self;
    fn div(self, rhs: T) -> Self {
        self.scale(T::one() / rhs)
    }
}

impl<T: Scalar> AddAssign for Jet<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Jet<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar> MulAssign for Jet<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &RJet, b: [f64; 5], tol: f64) {
        for (k, want) in b.iter().enumerate() {
            assert!((a.d(k) - want).abs() < tol, "d{k}: {} vs {want}", a.d(k));
        }
    }

    #[test]
    fn sine_jet_at_zero() {
        let s = RJet::variable(0.0).sin();
        close(&s, [0.0, 1.0, 0.0, -1.0, 0.0], 1e-15);
    }

    #[test]
    fn square_jet() {
        let r = RJet::variable(3.0);
        close(&(r * r), [9.0, 6.0, 2.0, 0.0, 0.0], 1e-15);
        close(&r.powi(2), [9.0, 6.0, 2.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn quotient_matches_product_with_reciprocal() {
        let r = RJet::variable(0.7);
        let f = r.sin() + r * r;
        let g = r.exp() + 2.0;
        let q = f / g;
        assert!(q.max_diff(&(f * g.recip())) < 1e-13);
        // (f/g)·g = f
        assert!((q * g).max_diff(&f) < 1e-13);
    }

    #[test]
    fn atan_of_exp_matches_hand_derivative() {
        // (2/3) atan(e^r) at 0: value π/6, d1 = (2/3)·e^r/(1+e^{2r}) = 1/3
        let th = RJet::variable(0.0).exp().atan() * (2.0 / 3.0);
        assert!((th.value - core::f64::consts::FRAC_PI_6).abs() < 1e-15);
        assert!((th.d(1) - 1.0 / 3.0).abs() < 1e-15);
        // d2 = (2/3)·e^r(1−e^{2r})/(1+e^{2r})² = 0 at r = 0
        assert!(th.d(2).abs() < 1e-15);
    }

    #[test]
    fn acos_inverts_cos() {
        let r = RJet::variable(0.4);
        let back = r.cos().acos();
        close(&back, [0.4, 1.0, 0.0, 0.0, 0.0], 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let r = RJet::variable(1.3);
        let f = r.exp() + r;
        assert!((f.sqrt() * f.sqrt()).max_diff(&f) < 1e-12);
    }

    #[test]
    fn derivative_drops_order() {
        let r = RJet::variable(1.0).sin();
        let d = r.derivative().derivative();
        assert_eq!(d.order(), 2);
        let sum = d + r;
        assert_eq!(sum.order(), 2);
        assert!(sum.sup() < 1e-15);
    }

    #[test]
    fn complex_cis_has_unit_modulus() {
        let th = RJet::variable(0.3) * 3.0;
        let e = CJet::cis(&th);
        let m = e * e.conj();
        assert!(m.max_diff(&CJet::constant(Complex64::new(1.0, 0.0))) < 1e-14);
    }
}
