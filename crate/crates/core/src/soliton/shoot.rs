//! Shooting in `λ` for the reduced ODE.

use super::reduced::{integrate_reduced, recover_theta_k, ReducedOptions, ReducedStatus};
use super::{residuals_nk, ResidualReport, SolitonCandidate, SolitonError};
use crate::math;

/// Fixed initial jets at `r0`; `λ` is tuned so that `h′(r1) = target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootConfig {
    pub r0: f64,
    /// `[h, h′, h″]` at `r0`.
    pub jets: [f64; 3],
    pub r1: f64,
    pub target: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub u_sign: f64,
    pub options: ReducedOptions,
    pub lambda_tol: f64,
    pub max_iter: usize,
    /// Largest coordinate residual accepted for a hit.
    pub residual_tol: f64,
}

impl ShootConfig {
    pub fn new(r0: f64, jets: [f64; 3], r1: f64, target: f64, lambda_lo: f64, lambda_hi: f64) -> Self {
        ShootConfig {
            r0,
            jets,
            r1,
            target,
            lambda_lo,
            lambda_hi,
            u_sign: 1.0,
            options: ReducedOptions::default(),
            lambda_tol: 1e-12,
            max_iter: 200,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ShootOutcome {
    Found { candidate: SolitonCandidate, report: ResidualReport, lambda: f64, iterations: usize },
    NotFound { lo: f64, hi: f64, f_lo: Option<f64>, f_hi: Option<f64>, reason: &'static str },
}

/// `h′(r1) − target`, or `None` when the trajectory stops short of `r1`.
pub fn closing(cfg: &ShootConfig, lambda: f64) -> Result<Option<f64>, SolitonError> {
    match integrate_reduced(cfg.jets, lambda, cfg.r0, cfg.r1, &cfg.options) {
        Ok(t) if t.status == ReducedStatus::Completed => Ok(Some(t.end_state()[1] - cfg.target)),
        Ok(_) => Ok(None),
        Err(SolitonError::StepFailure { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Bisection down to a bracket of width `1e-3`, then secant steps kept
/// inside the bracket.
pub fn shoot(cfg: &ShootConfig) -> Result<ShootOutcome, SolitonError> {
    let (mut lo, mut hi) = (cfg.lambda_lo, cfg.lambda_hi);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(SolitonError::NoBracket { lo, hi });
    }
    let f_lo = closing(cfg, lo)?;
    let f_hi = closing(cfg, hi)?;
    let (mut flo, mut fhi) = match (f_lo, f_hi) {
        (Some(a), Some(b)) if a * b <= 0.0 => (a, b),
        (Some(_), Some(_)) => {
            return Ok(ShootOutcome::NotFound { lo, hi, f_lo, f_hi, reason: "no sign change" });
        }
        _ => {
            return Ok(ShootOutcome::NotFound { lo, hi, f_lo, f_hi, reason: "trajectory stopped before r1" });
        }
    };
    let mut lambda = if flo == 0.0 { lo } else { hi };
    let mut iterations = 0;
    while flo != 0.0 && fhi != 0.0 && hi - lo > cfg.lambda_tol * math::max(1.0, math::abs(lo)) {
        iterations += 1;
        if iterations > cfg.max_iter {
            return Ok(ShootOutcome::NotFound { lo, hi, f_lo: Some(flo), f_hi: Some(fhi), reason: "iteration limit" });
        }
        let mid = 0.5 * (lo + hi);
        let sec = hi - fhi * (hi - lo) / (fhi - flo);
        let next = if hi - lo > 1e-3 || !(sec > lo && sec < hi) { mid } else { sec };
        let fm = match closing(cfg, next)? {
            Some(v) => v,
            None => {
                return Ok(ShootOutcome::NotFound {
                    lo,
                    hi,
                    f_lo: Some(flo),
                    f_hi: Some(fhi),
                    reason: "trajectory stopped before r1",
                });
            }
        };
        lambda = next;
        if fm == 0.0 {
            break;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = next;
            flo = fm;
        } else {
            hi = next;
            fhi = fm;
        }
        if math::abs(fm) < 1e-15 {
            break;
        }
    }
    if flo == 0.0 {
        lambda = lo;
    } else if fhi == 0.0 {
        lambda = hi;
    }
    let traj = integrate_reduced(cfg.jets, lambda, cfg.r0, cfg.r1, &cfg.options)?;
    let candidate = recover_theta_k(traj, cfg.u_sign)?;
    let report = residuals_nk(&candidate)?.with_tol(cfg.residual_tol);
    if !report.pass {
        return Ok(ShootOutcome::NotFound { lo, hi, f_lo: Some(flo), f_hi: Some(fhi), reason: "residual above tolerance" });
    }
    Ok(ShootOutcome::Found { candidate, report, lambda, iterations })
}
