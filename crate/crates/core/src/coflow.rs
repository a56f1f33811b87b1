//! Method-of-lines integrator for the Laplacian coflow `∂ψ/∂t = −Δψ` of the
//! warped ansatz.
//!
//! `h`, `θ`, `G` are sampled on a uniform mesh and evolved independently by
//! classical RK4; the coclosed constraint `h′ = G cos 3θ` (NK) or `h′ = 0`
//! (CY) is only monitored.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::forms::{hodge_laplacian_psi, FormError, G2Point, G2Profile, StructureKind};
use crate::jet::RJet;
use crate::math;
use crate::profiles::{DiffOperator, Mesh, ProfileError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("expected {expected:?} data, got {found:?}")]
    StructureMismatch { expected: StructureKind, found: StructureKind },
    #[error("CY flow needs constant h (deviation {deviation:e})")]
    NonConstantWarp { deviation: f64 },
    #[error("{what} is not positive at r = {r}")]
    Singularity { r: f64, what: &'static str },
    #[error("initial constraint residual {residual:e} exceeds {tol:e}")]
    InitialConstraint { residual: f64, tol: f64 },
    #[error("array length {got} does not match mesh size {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Values and `r`-derivatives of `(h, θ, G)` at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Local {
    pub h: f64,
    pub dh: f64,
    pub ddh: f64,
    pub th: f64,
    pub dth: f64,
    pub ddth: f64,
    pub g: f64,
    pub dg: f64,
}

impl Local {
    pub fn from_point(p: &G2Point) -> Self {
        Local {
            h: p.h.value,
            dh: p.h.d(1),
            ddh: p.h.d(2),
            th: p.theta.value,
            dth: p.theta.d(1),
            ddth: p.theta.d(2),
            g: p.g.value,
            dg: p.g.d(1),
        }
    }
}

/// `(∂h/∂t, ∂θ/∂t, ∂G/∂t)` from the evolution equations.
pub fn rhs_local(s: StructureKind, l: &Local) -> (f64, f64, f64) {
    let g2 = l.g * l.g;
    let g3 = g2 * l.g;
    match s {
        StructureKind::CalabiYau => {
            let tht = l.ddth / g2 - l.dg * l.dth / g3;
            let gt = -9.0 * l.dth * l.dth / l.g;
            (0.0, tht, gt)
        }
        StructureKind::NearlyKahler => {
            let (s3, c3) = (math::sin(3.0 * l.th), math::cos(3.0 * l.th));
            let ht = l.ddh / g2 + 3.0 * l.dh * l.dh / (l.h * g2) - l.dh * l.dg / g3 - 3.0 / l.h;
            let gt = -3.0 * l.g * s3 * s3 / (l.h * l.h) - 9.0 * l.dth * l.dth / l.g;
            let tht = l.ddth / g2 + 6.0 * l.dth * c3 / (l.h * l.g) - l.dth * l.dg / g3
                - 2.0 * s3 * c3 / (l.h * l.h);
            (ht, tht, gt)
        }
    }
}

/// Time derivatives read off from `∂ψ/∂t = −Δψ` by matching the
/// coefficients of `dr∧Ω` and `ω²/2`.
pub fn oracle_time_derivative(p: &G2Point) -> Result<(f64, f64, f64), FormError> {
    use crate::forms::Basis;
    let lap = hodge_laplacian_psi(p)?;
    let a = lap.coeff(Basis::DrHolo).value;
    let b = lap.coeff(Basis::Omega2Half).value.re;
    let (h, g, th) = (p.h.value, p.g.value, p.theta.value);
    let h3 = h * h * h;
    let ht = -b / (4.0 * h3);
    // ∂(G F³)/∂t = −2iA
    let z = Complex64::from_polar(1.0, -3.0 * th) * (Complex64::new(0.0, -2.0) * a);
    let gt = (z.re - 3.0 * g * h * h * ht) / h3;
    let tht = z.im / (3.0 * g * h3);
    Ok((ht, tht, gt))
}

/// Precomputed first and second derivative stencils on a mesh.
#[derive(Clone, Debug)]
pub struct Stencils {
    d1: DiffOperator,
    d2: DiffOperator,
}

impl Stencils {
    pub fn new(mesh: &Mesh, order: usize) -> Result<Self, FlowError> {
        Ok(Stencils { d1: DiffOperator::new(mesh, 1, order)?, d2: DiffOperator::new(mesh, 2, order)? })
    }

    pub fn d1(&self, f: &[f64]) -> Vec<f64> {
        self.d1.apply(f)
    }

    pub fn d2(&self, f: &[f64]) -> Vec<f64> {
        self.d2.apply(f)
    }
}

/// Discretized `(h, θ, G)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub mesh: Mesh,
    pub h: Vec<f64>,
    pub theta: Vec<f64>,
    pub g: Vec<f64>,
    pub t: f64,
    pub structure: StructureKind,
}

impl FlowState {
    pub fn new(
        mesh: Mesh,
        h: Vec<f64>,
        theta: Vec<f64>,
        g: Vec<f64>,
        structure: StructureKind,
    ) -> Result<Self, FlowError> {
        for v in [&h, &theta, &g] {
            if v.len() != mesh.len() {
                return Err(FlowError::LengthMismatch { got: v.len(), expected: mesh.len() });
            }
        }
        let s = FlowState { mesh, h, theta, g, t: 0.0, structure };
        s.check_positive(0.0)?;
        Ok(s)
    }

    /// Samples a profile triple on `mesh`.
    pub fn from_profiles(g2: &G2Profile, mesh: Mesh) -> Result<Self, FlowError> {
        Self::new(mesh, g2.h.sample(&mesh)?, g2.theta.sample(&mesh)?, g2.g.sample(&mesh)?, g2.structure)
    }

    fn check_positive(&self, floor: f64) -> Result<(), FlowError> {
        for (i, r) in self.mesh.nodes().enumerate() {
            if !(self.h[i] > floor) {
                return Err(FlowError::Singularity { r, what: "h" });
            }
            if !(self.g[i] > floor) {
                return Err(FlowError::Singularity { r, what: "G" });
            }
        }
        Ok(())
    }

    pub fn min_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, math::min)
    }

    pub fn min_g(&self) -> f64 {
        self.g.iter().copied().fold(f64::INFINITY, math::min)
    }

    fn locals(&self, st: &Stencils) -> Vec<Local> {
        let (dh, ddh) = (st.d1(&self.h), st.d2(&self.h));
        let (dth, ddth) = (st.d1(&self.theta), st.d2(&self.theta));
        let dg = st.d1(&self.g);
        (0..self.mesh.len())
            .map(|i| Local {
                h: self.h[i],
                dh: dh[i],
                ddh: ddh[i],
                th: self.theta[i],
                dth: dth[i],
                ddth: ddth[i],
                g: self.g[i],
                dg: dg[i],
            })
            .collect()
    }

    /// `h′ − G cos 3θ` (NK) or `h′` (CY) at every node.
    pub fn constraint_residual(&self, st: &Stencils) -> Vec<f64> {
        let dh = st.d1(&self.h);
        match self.structure {
            StructureKind::CalabiYau => dh,
            StructureKind::NearlyKahler => {
                (0..dh.len()).map(|i| dh[i] - self.g[i] * math::cos(3.0 * self.theta[i])).collect()
            }
        }
    }

    /// `τ₀` at every node.
    pub fn tau0(&self, st: &Stencils) -> Vec<f64> {
        let dth = st.d1(&self.theta);
        (0..dth.len())
            .map(|i| match self.structure {
                StructureKind::CalabiYau => 12.0 * dth[i] / (7.0 * self.g[i]),
                StructureKind::NearlyKahler => {
                    12.0 / 7.0 * (dth[i] / self.g[i] + 2.0 * math::sin(3.0 * self.theta[i]) / self.h[i])
                }
            })
            .collect()
    }
}

/// `Δf = f″/G² + 6h′f′/(hG²) − f′G′/G³` with finite-difference derivatives.
pub fn scalar_laplacian(f: &[f64], state: &FlowState, st: &Stencils) -> Result<Vec<f64>, FlowError> {
    if f.len() != state.mesh.len() {
        return Err(FlowError::LengthMismatch { got: f.len(), expected: state.mesh.len() });
    }
    let (df, ddf) = (st.d1(f), st.d2(f));
    let dh = st.d1(&state.h);
    let dg = st.d1(&state.g);
    Ok((0..f.len())
        .map(|i| {
            let (h, g) = (state.h[i], state.g[i]);
            ddf[i] / (g * g) + 6.0 * dh[i] * df[i] / (h * g * g) - df[i] * dg[i] / (g * g * g)
        })
        .collect())
}

/// Time derivatives of `(θ, G)` for CY data; `h` must be constant.
pub fn rhs_cy(state: &FlowState, st: &Stencils) -> Result<(Vec<f64>, Vec<f64>), FlowError> {
    if state.structure != StructureKind::CalabiYau {
        return Err(FlowError::StructureMismatch { expected: StructureKind::CalabiYau, found: state.structure });
    }
    let h0 = state.h[0];
    let deviation = state.h.iter().fold(0.0, |m, h| math::max(m, math::abs(h - h0)));
    if deviation > 1e-12 * math::max(1.0, math::abs(h0)) {
        return Err(FlowError::NonConstantWarp { deviation });
    }
    let mut tht = Vec::with_capacity(state.mesh.len());
    let mut gt = Vec::with_capacity(state.mesh.len());
    for l in state.locals(st) {
        let (_, a, b) = rhs_local(StructureKind::CalabiYau, &l);
        tht.push(a);
        gt.push(b);
    }
    Ok((tht, gt))
}

/// Time derivatives of `(h, θ, G)` for NK data.
pub fn rhs_nk(state: &FlowState, st: &Stencils) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), FlowError> {
    if state.structure != StructureKind::NearlyKahler {
        return Err(FlowError::StructureMismatch { expected: StructureKind::NearlyKahler, found: state.structure });
    }
    state.check_positive(0.0)?;
    let n = state.mesh.len();
    let (mut ht, mut tht, mut gt) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for l in state.locals(st) {
        let (a, b, c) = rhs_local(StructureKind::NearlyKahler, &l);
        ht.push(a);
        tht.push(b);
        gt.push(c);
    }
    Ok((ht, tht, gt))
}

/// Scratch space for right-hand sides and RK4 stages.
struct Workspace {
    derivs: [Vec<f64>; 5],
    k: [[Vec<f64>; 3]; 4],
    stage: FlowState,
}

impl Workspace {
    fn new(state: &FlowState) -> Self {
        let n = state.mesh.len();
        let z = || vec![0.0; n];
        Workspace {
            derivs: [z(), z(), z(), z(), z()],
            k: core::array::from_fn(|_| [z(), z(), z()]),
            stage: state.clone(),
        }
    }
}

/// Time derivatives into `out`; CY warp constancy is checked by the caller.
fn rhs_into(
    state: &FlowState,
    st: &Stencils,
    derivs: &mut [Vec<f64>; 5],
    out: &mut [Vec<f64>; 3],
) -> Result<(), FlowError> {
    let s = state.structure;
    let [dh, ddh, dth, ddth, dg] = derivs;
    match s {
        StructureKind::CalabiYau => {
            dh.fill(0.0);
            ddh.fill(0.0);
        }
        StructureKind::NearlyKahler => {
            state.check_positive(0.0)?;
            st.d1.apply_into(&state.h, dh);
            st.d2.apply_into(&state.h, ddh);
        }
    }
    st.d1.apply_into(&state.theta, dth);
    st.d2.apply_into(&state.theta, ddth);
    st.d1.apply_into(&state.g, dg);
    let n = state.mesh.len();
    let (h, th, g) = (&state.h[..n], &state.theta[..n], &state.g[..n]);
    let (dh, ddh, dth, ddth, dg) = (&dh[..n], &ddh[..n], &dth[..n], &ddth[..n], &dg[..n]);
    let [ht, tht, gt] = out;
    let (ht, tht, gt) = (&mut ht[..n], &mut tht[..n], &mut gt[..n]);
    for i in 0..n {
        let l = Local { h: h[i], dh: dh[i], ddh: ddh[i], th: th[i], dth: dth[i], ddth: ddth[i], g: g[i], dg: dg[i] };
        let (a, b, c) = rhs_local(s, &l);
        ht[i] = a;
        tht[i] = b;
        gt[i] = c;
    }
    if !state.mesh.is_periodic() {
        // Dirichlet: endpoint values stay frozen
        let n = state.mesh.len();
        for v in out.iter_mut() {
            v[0] = 0.0;
            v[n - 1] = 0.0;
        }
    }
    for v in out.iter() {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(FlowError::Singularity { r: f64::NAN, what: "time derivative" });
        }
    }
    Ok(())
}

fn step_with(state: &mut FlowState, dt: f64, st: &Stencils, ws: &mut Workspace) -> Result<(), FlowError> {
    let Workspace { derivs, k, stage } = ws;
    let coef = [0.5 * dt, 0.5 * dt, dt];
    rhs_into(state, st, derivs, &mut k[0])?;
    for j in 1..4 {
        let (done, rest) = k.split_at_mut(j);
        let prev = &done[j - 1];
        for (f, (dst, src)) in [(&mut stage.h, &state.h), (&mut stage.theta, &state.theta), (&mut stage.g, &state.g)]
            .into_iter()
            .enumerate()
        {
            for ((d, s), p) in dst.iter_mut().zip(src.iter()).zip(prev[f].iter()) {
                *d = s + coef[j - 1] * p;
            }
        }
        stage.t = state.t + coef[j - 1];
        rhs_into(stage, st, derivs, &mut rest[0])?;
    }
    let w = dt / 6.0;
    for (f, dst) in [&mut state.h, &mut state.theta, &mut state.g].into_iter().enumerate() {
        let n = dst.len();
        let (a, b, c, e) = (&k[0][f][..n], &k[1][f][..n], &k[2][f][..n], &k[3][f][..n]);
        for i in 0..n {
            dst[i] += w * (a[i] + 2.0 * b[i] + 2.0 * c[i] + e[i]);
        }
    }
    state.t += dt;
    Ok(())
}

/// One classical RK4 step.
pub fn step(state: &FlowState, dt: f64, st: &Stencils) -> Result<FlowState, FlowError> {
    if state.structure == StructureKind::CalabiYau {
        rhs_cy(state, st)?;
    }
    let mut ws = Workspace::new(state);
    let mut next = state.clone();
    step_with(&mut next, dt, st, &mut ws)?;
    Ok(next)
}

/// Largest stable explicit step: `cfl · min(G²) · Δr²`.
pub fn stable_dt(state: &FlowState, cfl: f64) -> f64 {
    let gmin = state.min_g();
    let dr = state.mesh.spacing();
    cfl * gmin * gmin * dr * dr
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub t_end: f64,
    /// Snapshot times in `(0, t_end]`; `t_end` is always included.
    pub output_times: Vec<f64>,
    pub cfl: f64,
    /// Fixed step overriding the CFL rule (still clipped to outputs).
    pub dt: Option<f64>,
    pub stencil_order: usize,
    pub floor: f64,
    pub blowup: f64,
    /// Largest initial constraint residual accepted for NK data.
    pub init_tol: f64,
    pub max_steps: usize,
}

impl FlowConfig {
    pub fn new(t_end: f64) -> Self {
        FlowConfig {
            t_end,
            output_times: Vec::new(),
            cfl: 0.2,
            dt: None,
            stencil_order: 4,
            floor: 1e-6,
            blowup: 1e-2,
            init_tol: 1e-6,
            max_steps: 50_000_000,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(FlowError::InvalidConfig("t_end must be positive"));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(FlowError::InvalidConfig("cfl must be positive"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(FlowError::InvalidConfig("dt must be positive"));
            }
        }
        let mut prev = 0.0;
        for &t in &self.output_times {
            if !(t > prev && t <= self.t_end) {
                return Err(FlowError::InvalidConfig("output_times must increase within (0, t_end]"));
            }
            prev = t;
        }
        if !(self.floor >= 0.0 && self.blowup > 0.0 && self.init_tol > 0.0) {
            return Err(FlowError::InvalidConfig("floor, blowup and init_tol must be positive"));
        }
        Ok(())
    }

    fn outputs(&self) -> Vec<f64> {
        let mut out = self.output_times.clone();
        if out.last().copied() != Some(self.t_end) {
            out.push(self.t_end);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowStatus {
    Completed,
    SingularityDetected,
    ConstraintBlowup,
    StepLimit,
}

impl FlowStatus {
    pub fn tag(self) -> &'static str {
        match self {
            FlowStatus::Completed => "Completed",
            FlowStatus::SingularityDetected => "SingularityDetected",
            FlowStatus::ConstraintBlowup => "ConstraintBlowup",
            FlowStatus::StepLimit => "StepLimit",
        }
    }
}

/// Per-step record, taken after the step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub dt: f64,
    pub constraint: f64,
    pub tau0: f64,
    pub min_h: f64,
    pub min_g: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowRun {
    /// Initial state followed by one state per reached output time.
    pub snapshots: Vec<FlowState>,
    pub diagnostics: Vec<Diagnostic>,
    pub status: FlowStatus,
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| math::max(m, math::abs(*x)))
}

fn diagnose(state: &FlowState, st: &Stencils, dt: f64) -> Diagnostic {
    Diagnostic {
        t: state.t,
        dt,
        constraint: sup_abs(&state.constraint_residual(st)),
        tau0: sup_abs(&state.tau0(st)),
        min_h: state.min_h(),
        min_g: state.min_g(),
    }
}

/// Integrates from `initial` to `config.t_end`.
pub fn run_flow(initial: &FlowState, config: &FlowConfig) -> Result<FlowRun, FlowError> {
    config.validate()?;
    let st = Stencils::new(&initial.mesh, config.stencil_order)?;
    initial.check_positive(config.floor)?;
    if initial.structure == StructureKind::NearlyKahler {
        let residual = sup_abs(&initial.constraint_residual(&st));
        if residual > config.init_tol {
            return Err(FlowError::InitialConstraint { residual, tol: config.init_tol });
        }
    } else {
        rhs_cy(initial, &st)?;
    }
    let t0 = initial.t;
    let outputs: Vec<f64> = config.outputs().into_iter().map(|t| t0 + t).collect();
    let mut snapshots = vec![initial.clone()];
    let mut diagnostics = vec![diagnose(initial, &st, 0.0)];
    let mut state = initial.clone();
    let mut ws = Workspace::new(initial);
    let mut status = FlowStatus::Completed;
    let mut steps = 0usize;
    'outer: for &t_out in &outputs {
        while state.t < t_out {
            if steps >= config.max_steps {
                status = FlowStatus::StepLimit;
                break 'outer;
            }
            let mut dt = config.dt.unwrap_or_else(|| stable_dt(&state, config.cfl));
            let remaining = t_out - state.t;
            // land exactly on the output time, avoiding a sliver step
            if dt >= remaining * (1.0 - 1e-12) {
                dt = remaining;
            } else if dt > 0.5 * remaining {
                dt = 0.5 * remaining;
            }
            match step_with(&mut state, dt, &st, &mut ws) {
                Ok(()) => {}
                Err(FlowError::Singularity { .. }) => {
                    status = FlowStatus::SingularityDetected;
                    break 'outer;
                }
                Err(e) => return Err(e),
            }
            if dt == remaining {
                state.t = t_out;
            }
            steps += 1;
            let d = diagnose(&state, &st, dt);
            diagnostics.push(d);
            if !(d.min_h > config.floor && d.min_g > config.floor) {
                status = FlowStatus::SingularityDetected;
                break 'outer;
            }
            if !(d.constraint <= config.blowup) {
                status = FlowStatus::ConstraintBlowup;
                break 'outer;
            }
        }
        snapshots.push(state.clone());
    }
    Ok(FlowRun { snapshots, diagnostics, status })
}

/// The jet of a flow field at node `i`, from finite differences.
pub fn node_point(state: &FlowState, st: &Stencils, i: usize) -> Result<G2Point, FormError> {
    let l = &state.locals(st)[i];
    let r = state.mesh.node(i);
    G2Point::new(
        r,
        RJet::with_order(l.h, [l.dh, l.ddh, 0.0, 0.0], 2),
        RJet::with_order(l.th, [l.dth, l.ddth, 0.0, 0.0], 2),
        RJet::with_order(l.g, [l.dg, 0.0, 0.0, 0.0], 1),
        state.structure,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Domain;

    fn local(h: f64, dh: f64, ddh: f64, th: f64, dth: f64, ddth: f64, g: f64, dg: f64) -> Local {
        Local { h, dh, ddh, th, dth, ddth, g, dg }
    }

    #[test]
    fn scalar_laplacian_examples() {
        let mesh = Mesh::new(Domain::interval(1.0, 3.0), 41).unwrap();
        let st = Stencils::new(&mesh, 4).unwrap();
        let f: Vec<f64> = mesh.nodes().map(|r| r * r).collect();
        let mk = |h: Vec<f64>, g: f64| {
            FlowState::new(mesh, h, vec![0.0; 41], vec![g; 41], StructureKind::NearlyKahler).unwrap()
        };
        let s = mk(vec![1.0; 41], 1.0);
        assert!(scalar_laplacian(&f, &s, &st).unwrap().iter().all(|v| (v - 2.0).abs() < 1e-9));
        let s = mk(mesh.nodes().collect(), 1.0);
        assert!(scalar_laplacian(&f, &s, &st).unwrap().iter().all(|v| (v - 14.0).abs() < 1e-9));
        let s = mk(vec![1.0; 41], 2.0);
        assert!(scalar_laplacian(&f, &s, &st).unwrap().iter().all(|v| (v - 0.5).abs() < 1e-9));
    }

    #[test]
    fn cy_local_rhs() {
        let (_, tht, gt) = rhs_local(StructureKind::CalabiYau, &local(1.0, 0.0, 0.0, 0.3, 0.0, 0.0, 1.0, 0.0));
        assert_eq!((tht, gt), (0.0, 0.0));
        let eps = 0.01;
        // θ = ε sin r at r = π/2
        let (_, tht, _) = rhs_local(StructureKind::CalabiYau, &local(1.0, 0.0, 0.0, eps, 0.0, -eps, 1.0, 0.0));
        assert!((tht + eps).abs() < 1e-16);
        // at r = 0
        let (_, _, gt) = rhs_local(StructureKind::CalabiYau, &local(1.0, 0.0, 0.0, 0.0, eps, 0.0, 1.0, 0.0));
        assert!((gt + 9.0 * eps * eps).abs() < 1e-16);
    }

    #[test]
    fn nk_local_rhs() {
        let (a, b, c) = rhs_local(StructureKind::NearlyKahler, &local(2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0));
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15 && c.abs() < 1e-15);
        let th = math::PI / 6.0;
        let (a, b, c) = rhs_local(StructureKind::NearlyKahler, &local(1.0, 0.0, 0.0, th, 0.0, 0.0, 1.0, 0.0));
        assert!((a + 3.0).abs() < 1e-15 && (c + 3.0).abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn structure_mismatch() {
        let mesh = Mesh::new(Domain::circle(math::TAU), 16).unwrap();
        let s = FlowState::new(mesh, vec![1.0; 16], vec![0.0; 16], vec![1.0; 16], StructureKind::NearlyKahler)
            .unwrap();
        let st = Stencils::new(&mesh, 4).unwrap();
        assert!(matches!(rhs_cy(&s, &st), Err(FlowError::StructureMismatch { .. })));
        let mut s = s;
        s.structure = StructureKind::CalabiYau;
        s.h[3] = 1.1;
        assert!(matches!(rhs_cy(&s, &st), Err(FlowError::NonConstantWarp { .. })));
        assert!(matches!(rhs_nk(&s, &st), Err(FlowError::StructureMismatch { .. })));
    }

    #[test]
    fn nk_cone_is_a_fixed_point() {
        let mesh = Mesh::new(Domain::interval(1.0, 3.0), 64).unwrap();
        let s = FlowState::new(mesh, mesh.nodes().collect(), vec![0.0; 64], vec![1.0; 64], StructureKind::NearlyKahler)
            .unwrap();
        let mut cfg = FlowConfig::new(0.1);
        cfg.output_times = vec![0.05];
        let run = run_flow(&s, &cfg).unwrap();
        assert_eq!(run.status, FlowStatus::Completed);
        assert_eq!(run.snapshots.len(), 3);
        let last = run.snapshots.last().unwrap();
        assert_eq!(last.t, 0.1);
        for i in 0..64 {
            assert!((last.h[i] - s.h[i]).abs() < 1e-10);
            assert!(last.theta[i].abs() < 1e-10 && (last.g[i] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bad_config() {
        let mut cfg = FlowConfig::new(1.0);
        cfg.dt = Some(-0.1);
        assert!(matches!(cfg.validate(), Err(FlowError::InvalidConfig(_))));
        let mut cfg = FlowConfig::new(1.0);
        cfg.output_times = vec![0.5, 0.2];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unconstrained_nk_data_is_rejected() {
        let mesh = Mesh::new(Domain::circle(math::TAU), 64).unwrap();
        let th: Vec<f64> = mesh.nodes().map(|r| math::PI / 6.0 + 0.001 * math::cos(r)).collect();
        let s = FlowState::new(mesh, vec![1.0; 64], th, vec![1.0; 64], StructureKind::NearlyKahler).unwrap();
        assert!(matches!(run_flow(&s, &FlowConfig::new(0.01)), Err(FlowError::InitialConstraint { .. })));
    }
}
