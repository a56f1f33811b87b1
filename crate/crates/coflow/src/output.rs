//! CSV tables and JSON artifacts. Floats are written as `{:.16e}`
//! (17 significant digits), so identical runs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use coflow_core::coflow::{Diagnostic, FlowState, Stencils};
use coflow_core::profiles::Profile;
use coflow_core::soliton::{ResidualReport, SolitonCandidate};
use coflow_core::torsion::TorsionReport;
use coflow_core::verify::SuiteReport;
use serde_json::{json, Value};

use crate::error::CliError;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` and `rows` as CSV to `dir/name`.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let err = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt(*x))).map_err(err)?;
    }
    w.flush().map_err(CliError::io(&path))?;
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, v: &Value) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(path)
}

/// `r, value, d1, d2, d3, d4` at `points`; `NaN` past the jet order.
pub fn profile_table(dir: &Path, name: &str, p: &Profile, points: &[f64]) -> Result<PathBuf, CliError> {
    let mut rows = Vec::with_capacity(points.len());
    for &r in points {
        let j = p.jet_at(r)?;
        let mut row = vec![r, j.value];
        row.extend((1..=4).map(|k| if k <= j.order() { j.d(k) } else { f64::NAN }));
        rows.push(row);
    }
    write_csv(dir, name, &["r", "value", "d1", "d2", "d3", "d4"], rows)
}

pub fn snapshot(dir: &Path, index: usize, state: &FlowState, st: &Stencils) -> Result<PathBuf, CliError> {
    let c = state.constraint_residual(st);
    let t0 = state.tau0(st);
    let rows = (0..state.mesh.len()).map(|i| vec![state.mesh.node(i), state.h[i], state.theta[i], state.g[i], c[i], t0[i]]);
    write_csv(dir, &format!("snapshot_{index:03}.csv"), &["r", "h", "theta", "G", "constraint_residual", "tau0"], rows)
}

pub fn diagnostics(dir: &Path, d: &[Diagnostic]) -> Result<PathBuf, CliError> {
    let rows = d.iter().map(|d| vec![d.t, d.dt, d.constraint, d.tau0, d.min_h, d.min_g]);
    write_csv(dir, "diagnostics.csv", &["t", "dt", "constraint", "tau0", "min_h", "min_g"], rows)
}

/// `r, h, theta, kprime` at `points`.
pub fn candidate(dir: &Path, c: &SolitonCandidate, points: &[f64]) -> Result<PathBuf, CliError> {
    let mut rows = Vec::with_capacity(points.len());
    for &r in points {
        rows.push(vec![r, c.h.eval(r)?, c.theta.eval(r)?, c.kprime.eval(r)?]);
    }
    write_csv(dir, "candidate.csv", &["r", "h", "theta", "kprime"], rows)
}

pub fn residual_json(c: &SolitonCandidate, coordinate: &ResidualReport, form: &ResidualReport) -> Value {
    let entries = |r: &ResidualReport| -> Value {
        Value::Object(r.entries.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
    };
    json!({
        "family": c.family.tag(),
        "structure": format!("{:?}", c.structure),
        "lambda": c.lambda,
        "kind": format!("{:?}", c.kind()),
        "samples": coordinate.samples,
        "tol": coordinate.tol,
        "coordinate": entries(coordinate),
        "form": entries(form),
        "max_residual": coordinate.max().max(form.max()),
        "pass": coordinate.pass && form.pass,
    })
}

pub fn suite_json(r: &SuiteReport) -> Value {
    json!({
        "suite": r.suite,
        "seed": r.seed,
        "profiles": r.profiles,
        "points": r.points,
        "checks": r.checks.iter().map(|c| json!({
            "name": c.name,
            "max_residual": c.max_residual,
            "tol": c.tol,
            "pass": c.pass,
        })).collect::<Vec<_>>(),
        "pass": r.pass(),
    })
}

pub fn torsion_json(r: &TorsionReport) -> Value {
    json!({
        "tau2_norm": r.tau2_norm,
        "coclosed_residual": r.coclosed_residual,
        "closed_form_gap": r.closed_form_gap,
        "samples": r.samples.iter().map(|s| json!({
            "r": s.r,
            "tau0": s.tau0,
            "tau1": s.tau1,
            "tau0_closed": s.tau0_closed,
            "tau1_closed": s.tau1_closed,
            "tau2_max": s.tau2_max,
            "tau3_norm": s.tau3_norm,
            "tau3_purity": s.tau3_purity,
        })).collect::<Vec<_>>(),
    })
}

pub fn torsion_csv(dir: &Path, r: &TorsionReport) -> Result<PathBuf, CliError> {
    let rows = r.samples.iter().map(|s| {
        vec![s.r, s.tau0, s.tau1, s.tau0_closed, s.tau1_closed, s.tau2_max, s.tau3_norm, s.tau3_purity]
    });
    write_csv(
        dir,
        "torsion.csv",
        &["r", "tau0", "tau1", "tau0_closed", "tau1_closed", "tau2_max", "tau3_norm", "tau3_purity"],
        rows,
    )
}
