//! Quadrature rules: adaptive Simpson for antiderivatives, composite
//! Gauss–Legendre for integrals over open intervals.

use alloc::vec::Vec;

use super::ProfileError;
use crate::math;

/// Default absolute tolerance for antiderivatives.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_DEPTH: u32 = 50;
const PANEL_WIDTH: f64 = 0.25;

/// Which rule produced an integral, and at what tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureInfo {
    pub rule: &'static str,
    pub tol: f64,
}

impl QuadratureInfo {
    pub fn adaptive_simpson(tol: f64) -> Self {
        QuadratureInfo { rule: "adaptive-simpson", tol }
    }
}

/// `∫_a^b f` by adaptive Simpson with absolute tolerance `tol`.
///
/// The range is first cut into panels of width at most 0.25 so that
/// oscillatory integrands cannot fool the first error estimate.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, ProfileError>
where
    F: FnMut(f64) -> Result<f64, ProfileError>,
{
    if a == b {
        return Ok(0.0);
    }
    let len = b - a;
    let panels = math::max(1.0, math::floor(math::abs(len) / PANEL_WIDTH) + 1.0) as usize;
    let h = len / panels as f64;
    let panel_tol = tol / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let x0 = a + h * k as f64;
        let x1 = if k + 1 == panels { b } else { x0 + h };
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0)?, f(xm)?, f(x1)?);
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += simpson_step(&mut f, x0, x1, f0, fm, f1, whole, panel_tol, 0)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, ProfileError>
where
    F: FnMut(f64) -> Result<f64, ProfileError>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    let roundoff = 64.0 * f64::EPSILON * (math::abs(left) + math::abs(right));
    if math::abs(diff) <= 15.0 * tol || math::abs(diff) <= roundoff {
        return Ok(left + right + diff / 15.0);
    }
    if depth >= MAX_DEPTH || !diff.is_finite() {
        return Err(ProfileError::QuadratureFailure { a, b, tol });
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
    Ok(l + r)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = math::cos(math::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if math::abs(dx) < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre over `panels` equal panels; never evaluates `f`
/// at `a` or `b`.
pub fn composite_gauss<F>(
    f: &mut F,
    a: f64,
    b: f64,
    panels: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> Result<f64, ProfileError>
where
    F: FnMut(f64) -> Result<f64, ProfileError>,
{
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + h * (k as f64 + 0.5);
        for (x, w) in rule.0.iter().zip(rule.1.iter()) {
            total += w * 0.5 * h * f(mid + 0.5 * h * x)?;
        }
    }
    Ok(total)
}

/// Integral over an open interval, doubling the panel count until two
/// successive estimates agree to `rel_tol`.
pub fn integrate_open<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64, ProfileError>
where
    F: FnMut(f64) -> Result<f64, ProfileError>,
{
    let rule = gauss_legendre(10);
    let mut panels = 8;
    let mut prev = composite_gauss(&mut f, a, b, panels, &rule)?;
    while panels < 4096 {
        panels *= 2;
        let next = composite_gauss(&mut f, a, b, panels, &rule)?;
        if math::abs(next - prev) <= rel_tol * math::max(1.0, math::abs(next)) {
            return Ok(next);
        }
        prev = next;
    }
    Err(ProfileError::QuadratureFailure { a, b, tol: rel_tol })
}
