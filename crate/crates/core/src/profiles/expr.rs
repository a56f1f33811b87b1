//! Closed-form expression trees in the single variable `r`.

use alloc::boxed::Box;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use super::quad::{self, QuadratureInfo};
use super::ProfileError;
use crate::jet::RJet;
use crate::math;

/// Definite-integral node: `c0 + ∫_{r0}^{r} integrand`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiderivativeNode {
    pub integrand: Expr,
    pub r0: f64,
    pub c0: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    R,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Atan(Box<Expr>),
    PowI(Box<Expr>, i32),
    Antiderivative(Box<AntiderivativeNode>),
}

impl Expr {
    pub fn r() -> Expr {
        Expr::R
    }

    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn atan(self) -> Expr {
        Expr::Atan(Box::new(self))
    }

    pub fn powi(self, n: i32) -> Expr {
        Expr::PowI(Box::new(self), n)
    }

    /// `c0 + ∫_{r0}^{r} self`, evaluated by adaptive Simpson at `tol`.
    pub fn antiderivative(self, r0: f64, c0: f64, tol: f64) -> Expr {
        Expr::Antiderivative(Box::new(AntiderivativeNode { integrand: self, r0, c0, tol }))
    }

    /// Quadrature metadata of the outermost antiderivative node, if any.
    pub fn quadrature(&self) -> Option<QuadratureInfo> {
        match self {
            Expr::Antiderivative(node) => Some(QuadratureInfo::adaptive_simpson(node.tol)),
            _ => None,
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64, ProfileError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::R => r,
            Expr::Neg(a) => -a.eval(r)?,
            Expr::Add(a, b) => a.eval(r)? + b.eval(r)?,
            Expr::Sub(a, b) => a.eval(r)? - b.eval(r)?,
            Expr::Mul(a, b) => a.eval(r)? * b.eval(r)?,
            Expr::Div(a, b) => {
                let den = b.eval(r)?;
                if den == 0.0 {
                    return Err(ProfileError::SingularEval { r, what: "division by zero" });
                }
                a.eval(r)? / den
            }
            Expr::Sin(a) => math::sin(a.eval(r)?),
            Expr::Cos(a) => math::cos(a.eval(r)?),
            Expr::Exp(a) => math::exp(a.eval(r)?),
            Expr::Atan(a) => math::atan(a.eval(r)?),
            Expr::PowI(a, n) => {
                let base = a.eval(r)?;
                if base == 0.0 && *n < 0 {
                    return Err(ProfileError::SingularEval { r, what: "negative power of zero" });
                }
                math::powi(base, *n)
            }
            Expr::Antiderivative(node) => {
                node.c0 + quad::adaptive_simpson(|s| node.integrand.eval(s), node.r0, r, node.tol)?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ProfileError::SingularEval { r, what: "non-finite value" })
        }
    }

    /// Value and derivatives up to order four at `r`.
    pub fn jet(&self, r: f64) -> Result<RJet, ProfileError> {
        let j = match self {
            Expr::Const(c) => RJet::constant(*c),
            Expr::R => RJet::variable(r),
            Expr::Neg(a) => -a.jet(r)?,
            Expr::Add(a, b) => a.jet(r)? + b.jet(r)?,
            Expr::Sub(a, b) => a.jet(r)? - b.jet(r)?,
            Expr::Mul(a, b) => a.jet(r)? * b.jet(r)?,
            Expr::Div(a, b) => {
                let den = b.jet(r)?;
                if den.value == 0.0 {
                    return Err(ProfileError::SingularEval { r, what: "division by zero" });
                }
                a.jet(r)? / den
            }
            Expr::Sin(a) => a.jet(r)?.sin(),
            Expr::Cos(a) => a.jet(r)?.cos(),
            Expr::Exp(a) => a.jet(r)?.exp(),
            Expr::Atan(a) => a.jet(r)?.atan(),
            Expr::PowI(a, n) => {
                let base = a.jet(r)?;
                if base.value == 0.0 && *n < 0 {
                    return Err(ProfileError::SingularEval { r, what: "negative power of zero" });
                }
                base.powi(*n)
            }
            Expr::Antiderivative(node) => {
                let inner = node.integrand.jet(r)?;
                let value = self.eval(r)?;
                RJet::with_order(
                    value,
                    [inner.value, inner.d(1), inner.d(2), inner.d(3)],
                    (inner.order() + 1).min(4),
                )
            }
        };
        if j.is_finite() {
            Ok(j)
        } else {
            Err(ProfileError::SingularEval { r, what: "non-finite jet" })
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::R => write!(f, "r"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Atan(a) => write!(f, "atan({a})"),
            Expr::PowI(a, n) => write!(f, "pow({a}, {n})"),
            Expr::Antiderivative(node) => write!(
                f,
                "antiderivative({}, r0 = {:?}, c0 = {:?})",
                node.integrand, node.r0, node.c0
            ),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Box::new(self), Box::new(Expr::Const(rhs)))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Const(self)), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_by_zero_is_rejected() {
        let e = Expr::c(1.0) / Expr::r();
        assert!(matches!(e.jet(0.0), Err(ProfileError::SingularEval { .. })));
        assert!(e.jet(0.5).is_ok());
    }

    #[test]
    fn antiderivative_of_cosine_is_sine() {
        let e = Expr::r().cos().antiderivative(0.0, 0.0, 1e-12);
        for k in 0..=20 {
            let r = math::PI * k as f64 / 20.0;
            let j = e.jet(r).unwrap();
            let s = RJet::variable(r).sin();
            assert!((j.value - s.value).abs() < 1e-12);
            assert!(j.max_diff(&s) < 1e-12);
        }
    }

    #[test]
    fn display_is_parseable() {
        let e = (Expr::r() * 2.0).sin() + Expr::c(-0.5) * Expr::r().exp().atan().powi(-2);
        let back = super::super::parse::parse_expr(&alloc::format!("{e}")).unwrap();
        for r in [0.1, 0.7, 1.9] {
            assert!((e.eval(r).unwrap() - back.eval(r).unwrap()).abs() < 1e-15);
        }
    }
}
