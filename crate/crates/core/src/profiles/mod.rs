//! Scalar functions of the radial coordinate `r`.
//!
//! A [`Profile`] is either a closed-form expression tree, a table of samples
//! on a uniform [`Mesh`], or a user-supplied jet source. Every backend answers
//! [`Profile::jet_at`] with the value and four derivatives; closed forms are
//! exact to rounding, samples use finite differences.

pub mod expr;
pub mod parse;
pub mod quad;
pub mod stencil;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

pub use expr::{AntiderivativeNode, Expr};
pub use quad::QuadratureInfo;
pub use stencil::DiffOperator;

use crate::jet::RJet;
use crate::math;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("r = {r} lies outside the profile domain")]
    DomainError { r: f64 },
    #[error("singular evaluation at r = {r}: {what}")]
    SingularEval { r: f64, what: &'static str },
    #[error("quadrature on [{a}, {b}] did not reach tolerance {tol}")]
    QuadratureFailure { a: f64, b: f64, tol: f64 },
    #[error("r = {r} is not a mesh node of the sampled profile")]
    NotANode { r: f64 },
    #[error("mesh has {n} nodes, stencil needs {needed}")]
    MeshTooSmall { n: usize, needed: usize },
    #[error("invalid stencil: derivative {m}, accuracy order {order}")]
    InvalidStencil { m: usize, order: usize },
    #[error("invalid domain: {0}")]
    InvalidDomain(&'static str),
    #[error("sample count {got} does not match mesh size {expected}")]
    SampleCount { got: usize, expected: usize },
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

/// Where the radial coordinate lives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// `r ∈ [r0, r0 + period)` with periodic identification.
    Circle { r0: f64, period: f64 },
    /// `r ∈ [r0, r1]`.
    Interval { r0: f64, r1: f64 },
}

impl Domain {
    pub fn circle(period: f64) -> Self {
        Domain::Circle { r0: 0.0, period }
    }

    pub fn interval(r0: f64, r1: f64) -> Self {
        Domain::Interval { r0, r1 }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        match *self {
            Domain::Circle { r0, period } => {
                if !(period > 0.0 && period.is_finite() && r0.is_finite()) {
                    return Err(ProfileError::InvalidDomain("circle period must be positive"));
                }
            }
            Domain::Interval { r0, r1 } => {
                if !(r1 > r0 && r0.is_finite() && r1.is_finite()) {
                    return Err(ProfileError::InvalidDomain("interval needs r0 < r1"));
                }
            }
        }
        Ok(())
    }

    pub fn start(&self) -> f64 {
        match *self {
            Domain::Circle { r0, .. } | Domain::Interval { r0, .. } => r0,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            Domain::Circle { r0, period } => r0 + period,
            Domain::Interval { r1, .. } => r1,
        }
    }

    pub fn length(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, Domain::Circle { .. })
    }

    pub fn contains(&self, r: f64) -> bool {
        match *self {
            Domain::Circle { .. } => r.is_finite(),
            Domain::Interval { r0, r1 } => {
                let slack = 1e-12 * math::max(1.0, math::max(math::abs(r0), math::abs(r1)));
                r >= r0 - slack && r <= r1 + slack
            }
        }
    }

    /// `n` interior sample points at cell midpoints; never touches the ends.
    pub fn midpoints(&self, n: usize) -> Vec<f64> {
        let (a, len) = (self.start(), self.length());
        (0..n).map(|k| a + len * (k as f64 + 0.5) / n as f64).collect()
    }
}

/// Uniform mesh on a [`Domain`]. Circles carry `n` distinct nodes starting at
/// `r0`; intervals carry `n` nodes including both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh {
    domain: Domain,
    n: usize,
}

impl Mesh {
    pub fn new(domain: Domain, n: usize) -> Result<Self, ProfileError> {
        domain.validate()?;
        if n < 2 {
            return Err(ProfileError::MeshTooSmall { n, needed: 2 });
        }
        Ok(Mesh { domain, n })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_periodic(&self) -> bool {
        self.domain.is_circle()
    }

    pub fn spacing(&self) -> f64 {
        match self.domain {
            Domain::Circle { period, .. } => period / self.n as f64,
            Domain::Interval { r0, r1 } => (r1 - r0) / (self.n - 1) as f64,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.domain.start() + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Index of the node at `r`, if `r` is one (periodic wrap on circles).
    pub fn locate(&self, r: f64) -> Option<usize> {
        let x = (r - self.domain.start()) / self.spacing();
        let k = math::round(x);
        if math::abs(x - k) > 1e-9 {
            return None;
        }
        let k = k as i64;
        if self.is_periodic() {
            Some(k.rem_euclid(self.n as i64) as usize)
        } else if (0..self.n as i64).contains(&k) {
            Some(k as usize)
        } else {
            None
        }
    }
}

/// A source of jets, for profiles defined by other means than an expression
/// or a sample table (for instance an ODE solution).
pub trait JetFn: Send + Sync {
    fn jet(&self, r: f64) -> Result<RJet, ProfileError>;
}

/// Samples of a function on a mesh together with the stencil order used to
/// differentiate them.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    pub mesh: Mesh,
    pub values: Vec<f64>,
    pub stencil_order: usize,
}

#[derive(Clone)]
pub enum Backend {
    ClosedForm(Expr),
    Sampled(Sampled),
    Custom(Arc<dyn JetFn>),
}

impl fmt::Debug for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::ClosedForm(e) => f.debug_tuple("ClosedForm").field(e).finish(),
            Backend::Sampled(s) => f.debug_tuple("Sampled").field(s).finish(),
            Backend::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// An immutable scalar function of `r` on a domain.
#[derive(Clone, Debug)]
pub struct Profile {
    backend: Backend,
    domain: Domain,
    quadrature: Option<QuadratureInfo>,
}

impl Profile {
    pub fn closed_form(expr: Expr, domain: Domain) -> Self {
        let quadrature = expr.quadrature();
        Profile { backend: Backend::ClosedForm(expr), domain, quadrature }
    }

    pub fn constant(c: f64, domain: Domain) -> Self {
        Self::closed_form(Expr::Const(c), domain)
    }

    /// Parses an expression string (see [`parse`]) into a closed-form profile.
    pub fn parse(src: &str, domain: Domain) -> Result<Self, ProfileError> {
        Ok(Self::closed_form(parse::parse_expr(src)?, domain))
    }

    pub fn sampled(mesh: Mesh, values: Vec<f64>, stencil_order: usize) -> Result<Self, ProfileError> {
        if values.len() != mesh.len() {
            return Err(ProfileError::SampleCount { got: values.len(), expected: mesh.len() });
        }
        // Validates the stencil against the mesh up front.
        DiffOperator::new(&mesh, 4, stencil_order)?;
        Ok(Profile {
            domain: mesh.domain(),
            backend: Backend::Sampled(Sampled { mesh, values, stencil_order }),
            quadrature: None,
        })
    }

    pub fn custom(source: Arc<dyn JetFn>, domain: Domain) -> Self {
        Profile { backend: Backend::Custom(source), domain, quadrature: None }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.backend {
            Backend::ClosedForm(e) => Some(e),
            _ => None,
        }
    }

    /// Quadrature rule and tolerance, when the profile was built by one.
    pub fn quadrature(&self) -> Option<QuadratureInfo> {
        self.quadrature
    }

    /// Value and derivatives `d¹..d⁴` at `r`.
    pub fn jet_at(&self, r: f64) -> Result<RJet, ProfileError> {
        if !self.domain.contains(r) {
            return Err(ProfileError::DomainError { r });
        }
        match &self.backend {
            Backend::ClosedForm(e) => e.jet(r),
            Backend::Custom(f) => f.jet(r),
            Backend::Sampled(s) => {
                let i = s.mesh.locate(r).ok_or(ProfileError::NotANode { r })?;
                let mut d = [0.0; 4];
                for (m, dm) in d.iter_mut().enumerate() {
                    *dm = DiffOperator::new(&s.mesh, m + 1, s.stencil_order)?.apply_at(&s.values, i);
                }
                Ok(RJet::new(s.values[i], d))
            }
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64, ProfileError> {
        match &self.backend {
            Backend::ClosedForm(e) => {
                if !self.domain.contains(r) {
                    return Err(ProfileError::DomainError { r });
                }
                e.eval(r)
            }
            _ => Ok(self.jet_at(r)?.value),
        }
    }

    /// Values at every node of `mesh`.
    pub fn sample(&self, mesh: &Mesh) -> Result<Vec<f64>, ProfileError> {
        mesh.nodes().map(|r| self.eval(r)).collect()
    }

    /// `q` with `q(r0) = c0` and `q′ = self`, at the default tolerance 1e−12.
    pub fn antiderivative(&self, r0: f64, c0: f64) -> Result<Profile, ProfileError> {
        self.antiderivative_with_tol(r0, c0, quad::DEFAULT_TOL)
    }

    pub fn antiderivative_with_tol(&self, r0: f64, c0: f64, tol: f64) -> Result<Profile, ProfileError> {
        if !self.domain.contains(r0) {
            return Err(ProfileError::DomainError { r: r0 });
        }
        match &self.backend {
            Backend::ClosedForm(e) => {
                let q = e.clone().antiderivative(r0, c0, tol);
                // Probe the far end so that a non-integrable input fails here.
                q.eval(self.domain.end())?;
                Ok(Profile::closed_form(q, self.domain))
            }
            Backend::Sampled(s) => {
                let k0 = s.mesh.locate(r0).ok_or(ProfileError::NotANode { r: r0 })?;
                let cells = stencil::cell_integrals(&s.mesh, &s.values)?;
                let n = s.mesh.len();
                if s.mesh.is_periodic() {
                    let total: f64 = cells.iter().sum();
                    let scale = s.values.iter().fold(0.0, |m, v| math::max(m, math::abs(*v)));
                    if math::abs(total) > tol + 1e-12 * scale * s.mesh.domain().length() {
                        return Err(ProfileError::QuadratureFailure {
                            a: s.mesh.domain().start(),
                            b: s.mesh.domain().end(),
                            tol,
                        });
                    }
                }
                let mut values = alloc::vec![0.0; n];
                values[k0] = c0;
                for i in k0 + 1..n {
                    values[i] = values[i - 1] + cells[i - 1];
                }
                for i in (0..k0).rev() {
                    values[i] = values[i + 1] - cells[i];
                }
                let mut p = Profile::sampled(s.mesh, values, s.stencil_order)?;
                p.quadrature = Some(QuadratureInfo { rule: "cubic-cell", tol });
                Ok(p)
            }
            Backend::Custom(f) => {
                let f = f.clone();
                let q = CustomAntiderivative { source: f, r0, c0, tol };
                let mut p = Profile::custom(Arc::new(q), self.domain);
                p.quadrature = Some(QuadratureInfo::adaptive_simpson(tol));
                Ok(p)
            }
        }
    }
}

struct CustomAntiderivative {
    source: Arc<dyn JetFn>,
    r0: f64,
    c0: f64,
    tol: f64,
}

impl JetFn for CustomAntiderivative {
    fn jet(&self, r: f64) -> Result<RJet, ProfileError> {
        let inner = self.source.jet(r)?;
        let v = self.c0 + quad::adaptive_simpson(|s| Ok(self.source.jet(s)?.value), self.r0, r, self.tol)?;
        Ok(RJet::with_order(
            v,
            [inner.value, inner.d(1), inner.d(2), inner.d(3)],
            (inner.order() + 1).min(4),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_outside_interval_is_a_domain_error() {
        let p = Profile::parse("r*r", Domain::interval(0.0, 1.0)).unwrap();
        assert!(matches!(p.jet_at(1.5), Err(ProfileError::DomainError { .. })));
        let j = p.jet_at(1.0).unwrap();
        assert_eq!(j.value, 1.0);
    }

    #[test]
    fn sampled_requires_mesh_nodes() {
        let mesh = Mesh::new(Domain::circle(math::TAU), 32).unwrap();
        let vals: Vec<f64> = mesh.nodes().map(math::sin).collect();
        let p = Profile::sampled(mesh, vals, 4).unwrap();
        assert!(matches!(p.jet_at(0.1), Err(ProfileError::NotANode { .. })));
        let j = p.jet_at(mesh.node(3)).unwrap();
        assert!((j.d(1) - math::cos(mesh.node(3))).abs() < 1e-4);
        // wraps around the circle
        assert!(p.jet_at(mesh.node(3) + math::TAU).is_ok());
    }

    #[test]
    fn sine_cone_profile_from_constraint() {
        // h = ∫ G cos 3θ with G = 1, θ = r/3 gives sin r
        let integrand = Profile::parse("cos(3*(r/3))", Domain::interval(0.0, math::PI)).unwrap();
        let h = integrand.antiderivative(0.0, 0.0).unwrap();
        assert_eq!(h.quadrature().unwrap().rule, "adaptive-simpson");
        for k in 0..=16 {
            let r = math::PI * k as f64 / 16.0;
            assert!((h.eval(r).unwrap() - math::sin(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_antiderivative_on_interval() {
        let mesh = Mesh::new(Domain::interval(0.0, 2.0), 201).unwrap();
        let vals: Vec<f64> = mesh.nodes().map(math::cos).collect();
        let p = Profile::sampled(mesh, vals, 4).unwrap();
        let q = p.antiderivative(mesh.node(100), math::sin(1.0)).unwrap();
        for (i, r) in mesh.nodes().enumerate() {
            let v = q.jet_at(r).unwrap();
            assert!((v.value - math::sin(r)).abs() < 1e-9, "i={i}");
        }
    }

    #[test]
    fn periodic_antiderivative_needs_zero_mean() {
        let mesh = Mesh::new(Domain::circle(math::TAU), 64).unwrap();
        let p = Profile::sampled(mesh, mesh.nodes().map(|r| 1.0 + math::cos(r)).collect(), 4).unwrap();
        assert!(matches!(p.antiderivative(0.0, 0.0), Err(ProfileError::QuadratureFailure { .. })));
        let p = Profile::sampled(mesh, mesh.nodes().map(math::cos).collect(), 4).unwrap();
        assert!(p.antiderivative(0.0, 0.0).is_ok());
    }
}
