//! Dispatch of a resolved [`RunConfig`] and the run manifest.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use coflow_core::coflow::{run_flow, FlowState, FlowStatus, Stencils};
use coflow_core::forms::{build_phi, build_psi, G2Profile, StructureKind};
use coflow_core::profiles::{Domain, Mesh};
use coflow_core::soliton::{
    self, cy_closed_form, form_residual, integrate_reduced, nk_special, recover_theta_k, residuals_cy, residuals_nk,
    Family, ReducedOptions, ShootOutcome, SolitonCandidate,
};
use coflow_core::torsion::{self, TorsionReport};
use coflow_core::verify::{self, SuiteReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{nk_family, resolve_triple, RunConfig, Suite};
use crate::error::CliError;
use crate::json::sampled_form_to_json;
use crate::output;

/// Result of a completed run: a status tag and whether every tolerance held.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: String,
    pub ok: bool,
}

impl Outcome {
    fn pass(ok: bool) -> Self {
        Outcome { status: if ok { "ok" } else { "tolerance_failure" }.into(), ok }
    }
}

/// Prints a line; a closed stdout is not an error of the run.
fn say(args: std::fmt::Arguments) {
    let _ = writeln!(std::io::stdout().lock(), "{args}");
}

const IDENTITY_PROFILES: usize = 20;
const LAPLACIAN_PROFILES: usize = 10;

fn suites(suite: Suite, seed: u64, profiles: Option<usize>, points: usize) -> Result<Vec<SuiteReport>, CliError> {
    let ident = || verify::identity_suite(seed, profiles.unwrap_or(IDENTITY_PROFILES), points).map_err(CliError::from);
    let lap = || verify::laplacian_suite(seed, profiles.unwrap_or(LAPLACIAN_PROFILES), points).map_err(CliError::from);
    let sol = || verify::soliton_suite().map_err(CliError::from);
    Ok(match suite {
        Suite::Identities => vec![ident()?],
        Suite::Laplacian => vec![lap()?],
        Suite::Solitons => vec![sol()?],
        Suite::All => {
            let (a, (b, c)) = rayon::join(ident, || rayon::join(lap, sol));
            vec![a?, b?, c?]
        }
    })
}

/// Torsion report over `points`, computed in parallel chunks.
fn torsion_report(g: &G2Profile, points: &[f64]) -> Result<TorsionReport, CliError> {
    let parts: Vec<TorsionReport> =
        points.par_chunks(16).map(|c| torsion::report(g, c)).collect::<Result<_, _>>()?;
    let mut out = TorsionReport { samples: Vec::new(), tau2_norm: 0.0, coclosed_residual: 0.0, closed_form_gap: 0.0 };
    for p in parts {
        out.samples.extend(p.samples);
        out.tau2_norm = out.tau2_norm.max(p.tau2_norm);
        out.coclosed_residual = out.coclosed_residual.max(p.coclosed_residual);
        out.closed_form_gap = out.closed_form_gap.max(p.closed_form_gap);
    }
    Ok(out)
}

fn forms_json(g: &G2Profile, mesh: &Mesh) -> Result<Value, CliError> {
    let pts: Vec<_> = mesh.nodes().map(|r| g.at(r)).collect::<Result<_, _>>()?;
    let phi: Vec<_> = pts.iter().map(build_phi).collect();
    let psi: Vec<_> = pts.iter().map(build_psi).collect();
    let tau3: Vec<_> = pts.iter().map(|p| torsion::tau2_tau3(p).1).collect();
    Ok(json!({
        "phi": sampled_form_to_json(3, &phi, mesh)?,
        "psi": sampled_form_to_json(4, &psi, mesh)?,
        "tau3": sampled_form_to_json(3, &tau3, mesh)?,
    }))
}

/// Candidate CSV, profile tables and `residuals.json`.
fn write_candidate(out: &Path, c: &SolitonCandidate, samples: usize, tol: f64, extra: Value) -> Result<bool, CliError> {
    let coord = match c.structure {
        StructureKind::CalabiYau => residuals_cy(c)?,
        StructureKind::NearlyKahler => residuals_nk(c)?,
    }
    .with_tol(tol);
    let form = form_residual(c)?.with_tol(tol);
    let pts = c.sample_points(samples);
    output::candidate(out, c, &pts)?;
    output::profile_table(out, "h.csv", &c.h, &pts)?;
    output::profile_table(out, "theta.csv", &c.theta, &pts)?;
    output::profile_table(out, "kprime.csv", &c.kprime, &pts)?;
    let mut j = output::residual_json(c, &coord, &form);
    if let (Value::Object(m), Value::Object(e)) = (&mut j, extra) {
        m.extend(e);
    }
    output::write_json(out, "residuals.json", &j)?;
    Ok(coord.pass && form.pass)
}

/// Runs `cfg`, writing artifacts into `out` (which must exist).
pub fn execute(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    match cfg {
        RunConfig::Verify { suite, seed, profiles, points } => {
            let reports = suites(*suite, *seed, *profiles, *points)?;
            let ok = reports.iter().all(|r| r.pass());
            for r in &reports {
                for c in &r.checks {
                    say(format_args!(
                        "{} {}/{}: max residual {:.3e} (tol {:.0e})",
                        if c.pass { "PASS" } else { "FAIL" },
                        r.suite,
                        c.name,
                        c.max_residual,
                        c.tol
                    ));
                }
            }
            let j = json!({ "pass": ok, "reports": reports.iter().map(output::suite_json).collect::<Vec<_>>() });
            output::write_json(out, "report.json", &j)?;
            Ok(Outcome::pass(ok))
        }
        RunConfig::Torsion { structure, domain, h, theta, g, points, forms, tol } => {
            let d = domain.domain()?;
            let g2 = resolve_triple(*structure, d, h, theta, g)?;
            let mesh = Mesh::new(d, *points).map_err(|e| CliError::Config(format!("points: {e}")))?;
            let pts: Vec<f64> = mesh.nodes().collect();
            let rep = torsion_report(&g2, &pts)?;
            let j = output::torsion_json(&rep);
            say(format_args!("{}", serde_json::to_string_pretty(&j).expect("serializable")));
            output::write_json(out, "torsion.json", &j)?;
            output::torsion_csv(out, &rep)?;
            if *forms {
                output::write_json(out, "forms.json", &forms_json(&g2, &mesh)?)?;
            }
            Ok(Outcome::pass(rep.closed_form_gap <= *tol && rep.tau2_norm <= *tol))
        }
        RunConfig::Flow(f) => {
            let fc = f.flow_config()?;
            let mesh = f.domain.mesh()?;
            let i = &f.initial;
            let g2 = resolve_triple(f.structure, mesh.domain(), &i.h, &i.theta, &i.g)?;
            let init = FlowState::from_profiles(&g2, mesh)?;
            let run = run_flow(&init, &fc)?;
            let st = Stencils::new(&mesh, fc.stencil_order)?;
            for (k, s) in run.snapshots.iter().enumerate() {
                output::snapshot(out, k, s, &st)?;
            }
            output::diagnostics(out, &run.diagnostics)?;
            let last = run.snapshots.last().map(|s| s.t).unwrap_or(0.0);
            say(format_args!("{} at t = {last} after {} steps", run.status.tag(), run.diagnostics.len() - 1));
            Ok(Outcome { status: run.status.tag().into(), ok: run.status == FlowStatus::Completed })
        }
        RunConfig::SolitonCy { b, c, domain, samples, tol } => {
            let d = domain.map(|d| d.domain()).transpose()?;
            let cand = cy_closed_form(*b, *c, d)?;
            Ok(Outcome::pass(write_candidate(out, &cand, *samples, *tol, json!({}))?))
        }
        RunConfig::SolitonNk { family, b, c, lambda, domain, samples, tol } => {
            let d = domain.map(|d| d.domain()).transpose()?;
            let cand = nk_special(nk_family(*family, *b, *c, *lambda)?, d)?;
            Ok(Outcome::pass(write_candidate(out, &cand, *samples, *tol, json!({}))?))
        }
        RunConfig::SolitonReduce { h0, dh0, ddh0, lambda, span, u_sign, rtol, samples, tol } => {
            let opts = ReducedOptions { rtol: *rtol, ..ReducedOptions::default() };
            let traj = integrate_reduced([*h0, *dh0, *ddh0], *lambda, span[0], span[1], &opts)?;
            let (status, end) = (traj.status, traj.end());
            let cand = recover_theta_k(traj, *u_sign)?;
            let extra = json!({ "trajectory": { "status": status.tag(), "end": end } });
            let ok = write_candidate(out, &cand, *samples, *tol, extra)?;
            Ok(Outcome { status: if ok { status.tag() } else { "tolerance_failure" }.into(), ok })
        }
        RunConfig::SolitonShoot(s) => match soliton::shoot(&s.shoot_config())? {
            ShootOutcome::Found { candidate, lambda, iterations, .. } => {
                let extra = json!({ "shoot": { "lambda": lambda, "iterations": iterations } });
                let ok = write_candidate(out, &candidate, s.samples, s.residual_tol, extra)?;
                Ok(Outcome::pass(ok))
            }
            ShootOutcome::NotFound { lo, hi, f_lo, f_hi, reason } => {
                let j = json!({ "lo": lo, "hi": hi, "f_lo": f_lo, "f_hi": f_hi, "reason": reason });
                output::write_json(out, "shoot.json", &j)?;
                eprintln!("no soliton found in [{lo}, {hi}]: {reason}");
                Ok(Outcome { status: "NotFound".into(), ok: false })
            }
        },
        RunConfig::Residual(r) => {
            let d: Domain = r.domain.domain()?;
            let cand = SolitonCandidate {
                h: r.h.resolve(d, "h")?,
                theta: r.theta.resolve(d, "theta")?,
                kprime: r.kprime.resolve(d, "kprime")?,
                lambda: r.lambda,
                structure: r.structure.kind(),
                family: Family::Custom,
                domain: d,
            };
            Ok(Outcome::pass(write_candidate(out, &cand, r.samples, r.tol, json!({}))?))
        }
    }
}

fn manifest(cfg: &RunConfig, wall: f64, status: &str, error: Option<&str>) -> Value {
    let mut m = json!({
        "config": cfg,
        "versions": { "coflow": env!("CARGO_PKG_VERSION"), "coflow-core": coflow_core::VERSION },
        "wall_time": wall,
        "status": status,
    });
    if let Some(e) = error {
        m["error"] = json!(e);
    }
    m
}

/// Runs `cfg` and writes `manifest.json`; returns the exit code.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    fs::create_dir_all(out).map_err(CliError::io(out))?;
    let t = Instant::now();
    let res = execute(cfg, out);
    let wall = t.elapsed().as_secs_f64();
    let (m, code) = match &res {
        Ok(o) => (manifest(cfg, wall, &o.status, None), if o.ok { 0 } else { 1 }),
        Err(e) => (manifest(cfg, wall, "error", Some(&e.to_string())), e.exit_code()),
    };
    output::write_json(out, "manifest.json", &m)?;
    res?;
    Ok(code)
}
