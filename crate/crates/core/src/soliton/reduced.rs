//! The third-order ODE for `h` obtained by eliminating `θ` and `k′` from the
//! NK soliton system, integrated with Dormand–Prince 5(4).
//!
//! `h³h′(h′² − 1) h‴ + P(h, h′, h″; λ) = 0`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Family, SolitonCandidate, SolitonError};
use crate::forms::StructureKind;
use crate::jet::RJet;
use crate::math;
use crate::profiles::{Domain, JetFn, Profile, ProfileError};

/// Below this `|h³h′(h′² − 1)|` the ODE is treated as singular.
pub const LEAD_TOL: f64 = 1e-10;

/// `(leading coefficient, remainder)` as jets in `h`, `h′`, `h″`.
fn terms(h: RJet, dh: RJet, ddh: RJet, lambda: f64) -> (RJet, RJet) {
    let h2 = h * h;
    let h3 = h2 * h;
    let h4 = h2 * h2;
    let p2 = dh * dh;
    let p4 = p2 * p2;
    let p6 = p4 * p2;
    let q2 = ddh * ddh;
    let lead = h3 * dh * (p2 - 1.0);
    let rest = h3 * p2 * q2 * -2.0 + h2 * p4 * ddh * 3.0 - h * p2 * 6.0 + h3 * q2 - h2 * ddh * 3.0 + h * p4 * 12.0
        - h * p6 * 6.0
        + h4 * ddh * (p2 - 1.0) * (lambda / 4.0);
    (lead, rest)
}

/// Left-hand side of the reduced ODE with `h‴` supplied.
pub fn reduced_residual(h: f64, dh: f64, ddh: f64, dddh: f64, lambda: f64) -> f64 {
    let c = RJet::constant;
    let (lead, rest) = terms(c(h), c(dh), c(ddh), lambda);
    lead.value * dddh + rest.value
}

fn admissible(h: f64, dh: f64, lead: f64) -> Result<(), SolitonError> {
    if !(math::abs(lead) >= LEAD_TOL) {
        return Err(SolitonError::SingularLocus { h, dh });
    }
    if !(h > 0.0 && math::abs(dh) < 1.0) {
        return Err(SolitonError::Inadmissible { h, dh });
    }
    Ok(())
}

/// `h‴` at an admissible point (`h > 0`, `0 < |h′| < 1`).
pub fn reduced_rhs(h: f64, dh: f64, ddh: f64, lambda: f64) -> Result<f64, SolitonError> {
    let c = RJet::constant;
    let (lead, rest) = terms(c(h), c(dh), c(ddh), lambda);
    admissible(h, dh, lead.value)?;
    let v = -rest.value / lead.value;
    if !v.is_finite() {
        return Err(SolitonError::SingularLocus { h, dh });
    }
    Ok(v)
}

/// Full jet `(h, h′, h″, h‴, h⁗)` with the last two taken from the ODE.
pub fn reduced_jet(h: f64, dh: f64, ddh: f64, lambda: f64) -> Result<RJet, SolitonError> {
    let d3 = reduced_rhs(h, dh, ddh, lambda)?;
    let hj = RJet::with_order(h, [dh, ddh, d3, 0.0], 3);
    let d1 = hj.derivative();
    let d2 = d1.derivative();
    let (lead, rest) = terms(hj, d1, d2, lambda);
    let d4 = (-rest / lead).d(1);
    Ok(RJet::new(h, [dh, ddh, d3, d4]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Stop once `|h′|` comes within this distance of `0` or `1`.
    pub margin: f64,
    /// Stop once `h` drops below this.
    pub h_floor: f64,
    pub max_steps: usize,
}

impl Default for ReducedOptions {
    fn default() -> Self {
        ReducedOptions { rtol: 1e-10, atol: 1e-12, margin: 1e-4, h_floor: 1e-6, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReducedStatus {
    Completed,
    /// `|h′|` reached the margin around `0` or `1`.
    SingularApproach,
    HFloor,
}

impl ReducedStatus {
    pub fn tag(self) -> &'static str {
        match self {
            ReducedStatus::Completed => "completed",
            ReducedStatus::SingularApproach => "singular_approach",
            ReducedStatus::HFloor => "h_floor",
        }
    }
}

/// Accepted steps with full jets at every node; dense output is quintic
/// Hermite in `(h, h′, h″)` with `h‴`, `h⁗` re-derived from the ODE.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub lambda: f64,
    pub nodes: Vec<f64>,
    /// `[h, h′, h″, h‴, h⁗]` per node.
    pub jets: Vec<[f64; 5]>,
    pub status: ReducedStatus,
    pub rejected: usize,
}

fn hermite5(s: f64, step: f64, a: [f64; 3], b: [f64; 3]) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    a[0] * h0 + step * a[1] * h1 + step * step * a[2] * h2 + step * step * b[2] * h3 + step * b[1] * h4 + b[0] * h5
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn domain(&self) -> Domain {
        let (a, b) = (self.start(), self.end());
        Domain::interval(math::min(a, b), math::max(a, b))
    }

    /// `[h, h′, h″]` at the last node.
    pub fn end_state(&self) -> [f64; 3] {
        let j = self.jets.last().unwrap();
        [j[0], j[1], j[2]]
    }

    /// Jet of `h` at `r`.
    pub fn h_jet(&self, r: f64) -> Result<RJet, ProfileError> {
        let n = self.nodes.len();
        let (lo, hi) = (math::min(self.start(), self.end()), math::max(self.start(), self.end()));
        let slack = 1e-12 * math::max(1.0, math::max(math::abs(lo), math::abs(hi)));
        if !(r >= lo - slack && r <= hi + slack) {
            return Err(ProfileError::DomainError { r });
        }
        if n == 1 {
            let j = self.jets[0];
            return Ok(RJet::new(j[0], [j[1], j[2], j[3], j[4]]));
        }
        let forward = self.end() > self.start();
        // index of the segment [k, k+1] containing r
        let k = if forward {
            self.nodes.partition_point(|&x| x <= r)
        } else {
            self.nodes.partition_point(|&x| x >= r)
        }
        .clamp(1, n - 1)
            - 1;
        let (ra, rb) = (self.nodes[k], self.nodes[k + 1]);
        let (ja, jb) = (self.jets[k], self.jets[k + 1]);
        let step = rb - ra;
        let s = (r - ra) / step;
        let y: [f64; 3] = core::array::from_fn(|i| {
            hermite5(s, step, [ja[i], ja[i + 1], ja[i + 2]], [jb[i], jb[i + 1], jb[i + 2]])
        });
        reduced_jet(y[0], y[1], y[2], self.lambda)
            .map_err(|_| ProfileError::SingularEval { r, what: "reduced ODE" })
    }

    pub fn h_profile(self: &Arc<Self>) -> Profile {
        Profile::custom(Arc::new(HFn(self.clone())), self.domain())
    }
}

struct HFn(Arc<Trajectory>);

impl JetFn for HFn {
    fn jet(&self, r: f64) -> Result<RJet, ProfileError> {
        self.0.h_jet(r)
    }
}

/// `sin 3θ = u`, `u² = 1 − h′²`, sign fixed by `u_sign`.
struct ThetaFn {
    traj: Arc<Trajectory>,
    sign: f64,
}

impl JetFn for ThetaFn {
    fn jet(&self, r: f64) -> Result<RJet, ProfileError> {
        let dh = self.traj.h_jet(r)?.derivative();
        Ok(dh.acos() * (self.sign / 3.0))
    }
}

/// `h³k′ = 3h²h′ + h³h″/h′ − 3h²/h′ − λh⁴/(4h′)`.
struct KFn {
    traj: Arc<Trajectory>,
}

pub(crate) fn kprime_from_h(h: &RJet, lambda: f64) -> RJet {
    let dh = h.derivative();
    let ddh = dh.derivative();
    let h2 = *h * *h;
    let h3 = h2 * *h;
    (h2 * dh * 3.0 + (h3 * ddh - h2 * 3.0 - h2 * h2 * (lambda / 4.0)) / dh) / h3
}

impl JetFn for KFn {
    fn jet(&self, r: f64) -> Result<RJet, ProfileError> {
        Ok(kprime_from_h(&self.traj.h_jet(r)?, self.traj.lambda))
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn field(y: [f64; 3], lambda: f64) -> Result<[f64; 3], SolitonError> {
    Ok([y[1], y[2], reduced_rhs(y[0], y[1], y[2], lambda)?])
}

fn within_margin(y: [f64; 3], opts: &ReducedOptions) -> bool {
    let a = math::abs(y[1]);
    a > opts.margin && a < 1.0 - opts.margin
}

/// One Dormand–Prince step: `(y5, error estimate)`.
fn dp_step(y: [f64; 3], k1: [f64; 3], dt: f64, lambda: f64) -> Result<([f64; 3], [f64; 3]), SolitonError> {
    let mut k = [[0.0; 3]; 7];
    k[0] = k1;
    for s in 0..6 {
        let mut ys = y;
        for (i, v) in ys.iter_mut().enumerate() {
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                *v += dt * A[s][j] * kj[i];
            }
        }
        k[s + 1] = field(ys, lambda)?;
    }
    let mut y5 = y;
    let mut err = [0.0; 3];
    for i in 0..3 {
        for j in 0..7 {
            let b5 = if j < 6 { A[5][j] } else { 0.0 };
            y5[i] += dt * b5 * k[j][i];
            err[i] += dt * (b5 - B4[j]) * k[j][i];
        }
    }
    Ok((y5, err))
}

/// Integrates from `r0` (state `[h, h′, h″]`) towards `r1`. Stops early at
/// the margin around the singular locus or below the `h` floor; an initial
/// state already there is an error.
pub fn integrate_reduced(
    y0: [f64; 3],
    lambda: f64,
    r0: f64,
    r1: f64,
    opts: &ReducedOptions,
) -> Result<Trajectory, SolitonError> {
    if !(r0.is_finite() && r1.is_finite() && r0 != r1 && lambda.is_finite()) {
        return Err(SolitonError::InvalidParams("need finite r0 != r1 and finite lambda"));
    }
    if !(opts.rtol > 0.0 && opts.atol >= 0.0 && opts.margin >= 0.0 && opts.margin < 0.5) {
        return Err(SolitonError::InvalidParams("bad integrator options"));
    }
    let first = reduced_jet(y0[0], y0[1], y0[2], lambda)?;
    if !within_margin(y0, opts) {
        return Err(SolitonError::SingularLocus { h: y0[0], dh: y0[1] });
    }
    let span = r1 - r0;
    let dir = span.signum();
    let min_step = 1e-13 * math::max(1.0, math::abs(r0) + math::abs(r1));
    let mut traj = Trajectory {
        lambda,
        nodes: alloc::vec![r0],
        jets: alloc::vec![[first.value, first.d(1), first.d(2), first.d(3), first.d(4)]],
        status: ReducedStatus::Completed,
        rejected: 0,
    };
    let (mut r, mut y) = (r0, y0);
    let mut f = field(y, lambda)?;
    let mut dt = 1e-3 * math::abs(span);
    let mut steps = 0usize;
    while dir * (r1 - r) > min_step {
        steps += 1;
        if steps > opts.max_steps {
            return Err(SolitonError::StepFailure { r });
        }
        dt = math::min(dt, math::abs(r1 - r));
        if dt < min_step {
            traj.status = ReducedStatus::SingularApproach;
            break;
        }
        let attempt = dp_step(y, f, dir * dt, lambda);
        let (y5, err) = match attempt {
            Ok(v) => v,
            Err(_) => {
                traj.rejected += 1;
                dt *= 0.25;
                continue;
            }
        };
        let mut e: f64 = 0.0;
        for i in 0..3 {
            let sc = opts.atol + opts.rtol * math::max(math::abs(y[i]), math::abs(y5[i]));
            e = math::max(e, math::abs(err[i]) / sc);
        }
        if !e.is_finite() || e > 1.0 {
            traj.rejected += 1;
            let fac = if e.is_finite() { math::max(0.2, 0.9 * math::pow(e, -0.2)) } else { 0.2 };
            dt *= fac;
            continue;
        }
        if !within_margin(y5, opts) || y5[0] < opts.h_floor {
            // approach the boundary with shrinking steps
            traj.rejected += 1;
            dt *= 0.5;
            if dt < min_step * 1e3 {
                traj.status =
                    if y5[0] < opts.h_floor { ReducedStatus::HFloor } else { ReducedStatus::SingularApproach };
                break;
            }
            continue;
        }
        let jet = match reduced_jet(y5[0], y5[1], y5[2], lambda) {
            Ok(j) => j,
            Err(_) => {
                traj.rejected += 1;
                dt *= 0.5;
                continue;
            }
        };
        r += dir * dt;
        if dir * (r1 - r) <= min_step {
            r = r1;
        }
        y = y5;
        f = [jet.d(1), jet.d(2), jet.d(3)];
        traj.nodes.push(r);
        traj.jets.push([jet.value, jet.d(1), jet.d(2), jet.d(3), jet.d(4)]);
        let fac = if e == 0.0 { 5.0 } else { (0.9 * math::pow(e, -0.2)).clamp(0.2, 5.0) };
        dt *= fac;
    }
    Ok(traj)
}

/// Recovers `θ` and `k′` from an integrated `h`. `u_sign` picks the branch
/// `sin 3θ = ±√(1 − h′²)`.
pub fn recover_theta_k(traj: Trajectory, u_sign: f64) -> Result<SolitonCandidate, SolitonError> {
    if !(u_sign == 1.0 || u_sign == -1.0) {
        return Err(SolitonError::InvalidParams("u_sign must be +1 or -1"));
    }
    if traj.len() < 2 {
        return Err(SolitonError::InvalidParams("trajectory has fewer than two nodes"));
    }
    for (&r, j) in traj.nodes.iter().zip(traj.jets.iter()) {
        let u2 = 1.0 - j[1] * j[1];
        if !(u2 > 1e-12) || math::abs(j[1]) < 1e-12 {
            return Err(SolitonError::SignAmbiguity { r });
        }
        // u u′ = −h′h″
        let dh = RJet::with_order(j[1], [j[2], j[3], 0.0, 0.0], 2);
        let u = (-(dh * dh) + 1.0).sqrt() * u_sign;
        let gap = u.value * u.d(1) + j[1] * j[2];
        if !(math::abs(gap) <= 1e-8 * math::max(1.0, math::abs(j[1] * j[2]))) {
            return Err(SolitonError::SignAmbiguity { r });
        }
    }
    let domain = traj.domain();
    let lambda = traj.lambda;
    let traj = Arc::new(traj);
    Ok(SolitonCandidate {
        h: traj.h_profile(),
        theta: Profile::custom(Arc::new(ThetaFn { traj: traj.clone(), sign: u_sign }), domain),
        kprime: Profile::custom(Arc::new(KFn { traj }), domain),
        lambda,
        structure: StructureKind::NearlyKahler,
        family: Family::OdeTrajectory,
        domain,
    })
}
