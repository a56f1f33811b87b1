//! Resolved run configurations. Every run is described by one [`RunConfig`],
//! which is echoed into the manifest and can be replayed from it.

use std::fs;
use std::path::{Path, PathBuf};

use coflow_core::coflow::FlowConfig;
use coflow_core::forms::{G2Profile, StructureKind};
use coflow_core::profiles::{parse::parse_expr, Domain, Expr, Mesh, Profile};
use coflow_core::soliton::{NkFamily, ReducedOptions, ShootConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::json::{expr_from_json, DomainSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Laplacian,
    Solitons,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Cone,
    Anticone,
    Cylinder,
    Sinecone,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Structure {
    #[serde(rename = "CY")]
    #[value(name = "CY", alias = "cy")]
    Cy,
    #[serde(rename = "NK")]
    #[value(name = "NK", alias = "nk")]
    Nk,
}

impl Structure {
    pub fn kind(self) -> StructureKind {
        match self {
            Structure::Cy => StructureKind::CalabiYau,
            Structure::Nk => StructureKind::NearlyKahler,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub r0: f64,
    pub h0: f64,
}

/// An expression string, a sample file (CSV with a `value` column), an
/// expression tree, or (for NK `h` only) integration of the constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSource {
    Expr(String),
    File(FileSource),
    Tree(TreeSource),
    Constraint(ConstraintSource),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSource {
    pub file: PathBuf,
    #[serde(default = "default_stencil")]
    pub stencil_order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSource {
    pub expr: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSource {
    pub constraint: ConstraintSpec,
}

fn default_stencil() -> usize {
    4
}

/// Reads the `value` column (or the only column) of a CSV file.
pub fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?.clone();
    let col = match headers.iter().position(|h| h.trim() == "value") {
        Some(c) => c,
        None if headers.len() == 1 => 0,
        None => return Err(CliError::Config(format!("{}: no `value` column", path.display()))),
    };
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let v = rec
            .get(col)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| CliError::Config(format!("{}: row {}: not a number", path.display(), i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

impl ProfileSource {
    /// Closed-form expression, if this source is one.
    pub fn expr(&self, key: &str) -> Result<Option<Expr>, CliError> {
        match self {
            ProfileSource::Expr(s) => parse_expr(s).map(Some).map_err(|e| CliError::Config(format!("{key}: {e}"))),
            ProfileSource::Tree(t) => expr_from_json(&t.expr, &format!("{key}.expr")).map(Some),
            _ => Ok(None),
        }
    }

    /// Makes a relative sample-file path absolute against `base`.
    pub fn absolutize(&mut self, base: &Path) {
        if let ProfileSource::File(f) = self {
            if f.file.is_relative() {
                let joined = base.join(&f.file);
                f.file = fs::canonicalize(&joined).unwrap_or(joined);
            }
        }
    }

    pub fn resolve(&self, domain: Domain, key: &str) -> Result<Profile, CliError> {
        if let Some(e) = self.expr(key)? {
            return Ok(Profile::closed_form(e, domain));
        }
        match self {
            ProfileSource::File(f) => {
                let values = read_samples(&f.file)?;
                let mesh = Mesh::new(domain, values.len()).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
                Profile::sampled(mesh, values, f.stencil_order).map_err(|e| CliError::Config(format!("{key}: {e}")))
            }
            ProfileSource::Constraint(_) => {
                Err(CliError::Config(format!("{key}: `constraint` is only allowed for h with NK structure")))
            }
            _ => unreachable!(),
        }
    }
}

/// `(h, θ, G)` sources resolved into a profile triple.
pub fn resolve_triple(
    structure: Structure,
    domain: Domain,
    h: &ProfileSource,
    theta: &ProfileSource,
    g: &ProfileSource,
) -> Result<G2Profile, CliError> {
    if let ProfileSource::Constraint(c) = h {
        if structure != Structure::Nk {
            return Err(CliError::Config("h: `constraint` is only allowed for h with NK structure".into()));
        }
        let th = theta.expr("theta")?.ok_or_else(|| CliError::Config("theta: must be closed form with `constraint`".into()))?;
        let ge = g.expr("G")?.ok_or_else(|| CliError::Config("G: must be closed form with `constraint`".into()))?;
        let (r0, h0) = (c.constraint.r0, c.constraint.h0);
        return Ok(G2Profile::nk_from_constraint(th, ge, domain, r0, h0)?);
    }
    Ok(G2Profile {
        h: h.resolve(domain, "h")?,
        theta: theta.resolve(domain, "theta")?,
        g: g.resolve(domain, "G")?,
        structure: structure.kind(),
        domain,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDomain {
    pub kind: String,
    #[serde(default)]
    pub r0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    pub n: usize,
}

impl FlowDomain {
    pub fn mesh(&self) -> Result<Mesh, CliError> {
        let spec = match (self.kind.as_str(), self.r1, self.period) {
            ("circle", None, Some(period)) => DomainSpec::Circle { r0: self.r0, period },
            ("interval", Some(r1), None) => DomainSpec::Interval { r0: self.r0, r1 },
            ("circle", _, _) => return Err(CliError::Config("domain: circle needs `period` and no `r1`".into())),
            ("interval", _, _) => return Err(CliError::Config("domain: interval needs `r1` and no `period`".into())),
            (k, _, _) => return Err(CliError::Config(format!("domain.kind: unknown kind `{k}`"))),
        };
        Mesh::new(spec.domain()?, self.n).map_err(|e| CliError::Config(format!("domain.n: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub h: ProfileSource,
    pub theta: ProfileSource,
    #[serde(rename = "G")]
    pub g: ProfileSource,
}

fn d_cfl() -> f64 {
    0.2
}
fn d_floor() -> f64 {
    1e-6
}
fn d_blowup() -> f64 {
    1e-2
}
fn d_init_tol() -> f64 {
    1e-6
}
fn d_max_steps() -> usize {
    50_000_000
}

/// The `flow` configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowFile {
    pub structure: Structure,
    pub domain: FlowDomain,
    pub initial: Initial,
    pub t_end: f64,
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default = "d_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_stencil")]
    pub stencil_order: usize,
    #[serde(default = "d_floor")]
    pub floor: f64,
    #[serde(default = "d_blowup")]
    pub blowup: f64,
    #[serde(default = "d_init_tol")]
    pub init_tol: f64,
    #[serde(default = "d_max_steps")]
    pub max_steps: usize,
}

impl FlowFile {
    pub fn flow_config(&self) -> Result<FlowConfig, CliError> {
        let mut c = FlowConfig::new(self.t_end);
        c.output_times = self.output_times.clone();
        c.cfl = self.cfl;
        c.dt = self.dt;
        c.stencil_order = self.stencil_order;
        c.floor = self.floor;
        c.blowup = self.blowup;
        c.init_tol = self.init_tol;
        c.max_steps = self.max_steps;
        c.validate()?;
        Ok(c)
    }
}

fn d_rtol() -> f64 {
    1e-10
}
fn d_atol() -> f64 {
    1e-12
}
fn d_margin() -> f64 {
    1e-4
}
fn d_h_floor() -> f64 {
    1e-6
}
fn d_one() -> f64 {
    1.0
}
fn d_lambda_tol() -> f64 {
    1e-12
}
fn d_max_iter() -> usize {
    200
}
fn d_residual_tol() -> f64 {
    1e-6
}
fn d_samples() -> usize {
    200
}

/// The `soliton shoot` configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootFile {
    pub r0: f64,
    /// `[h, h', h'']` at `r0`.
    pub jets: [f64; 3],
    pub r1: f64,
    /// Target value of `h'(r1)`.
    pub target: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    #[serde(default = "d_one")]
    pub u_sign: f64,
    #[serde(default = "d_rtol")]
    pub rtol: f64,
    #[serde(default = "d_atol")]
    pub atol: f64,
    #[serde(default = "d_margin")]
    pub margin: f64,
    #[serde(default = "d_h_floor")]
    pub h_floor: f64,
    #[serde(default = "d_lambda_tol")]
    pub lambda_tol: f64,
    #[serde(default = "d_max_iter")]
    pub max_iter: usize,
    #[serde(default = "d_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "d_samples")]
    pub samples: usize,
}

impl ShootFile {
    pub fn shoot_config(&self) -> ShootConfig {
        let mut c = ShootConfig::new(self.r0, self.jets, self.r1, self.target, self.lambda_lo, self.lambda_hi);
        c.u_sign = self.u_sign;
        c.options = ReducedOptions {
            rtol: self.rtol,
            atol: self.atol,
            margin: self.margin,
            h_floor: self.h_floor,
            ..ReducedOptions::default()
        };
        c.lambda_tol = self.lambda_tol;
        c.max_iter = self.max_iter;
        c.residual_tol = self.residual_tol;
        c
    }
}

fn d_tol() -> f64 {
    coflow_core::soliton::DEFAULT_TOL
}

/// The `residual` configuration file: a candidate soliton to check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualFile {
    pub structure: Structure,
    pub domain: DomainSpec,
    pub h: ProfileSource,
    pub theta: ProfileSource,
    pub kprime: ProfileSource,
    pub lambda: f64,
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_samples")]
    pub samples: usize,
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunConfig {
    Verify {
        suite: Suite,
        seed: u64,
        profiles: Option<usize>,
        points: usize,
    },
    Torsion {
        structure: Structure,
        domain: DomainSpec,
        h: ProfileSource,
        theta: ProfileSource,
        #[serde(rename = "G")]
        g: ProfileSource,
        points: usize,
        forms: bool,
        tol: f64,
    },
    Flow(FlowFile),
    SolitonCy {
        b: f64,
        c: f64,
        domain: Option<DomainSpec>,
        samples: usize,
        tol: f64,
    },
    SolitonNk {
        family: FamilyName,
        b: Option<f64>,
        c: Option<f64>,
        lambda: Option<f64>,
        domain: Option<DomainSpec>,
        samples: usize,
        tol: f64,
    },
    SolitonReduce {
        h0: f64,
        dh0: f64,
        ddh0: f64,
        lambda: f64,
        span: [f64; 2],
        u_sign: f64,
        rtol: f64,
        samples: usize,
        tol: f64,
    },
    SolitonShoot(ShootFile),
    Residual(ResidualFile),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Verify { .. } => "verify",
            RunConfig::Torsion { .. } => "torsion",
            RunConfig::Flow(_) => "flow",
            RunConfig::SolitonCy { .. } => "soliton cy",
            RunConfig::SolitonNk { .. } => "soliton nk",
            RunConfig::SolitonReduce { .. } => "soliton reduce",
            RunConfig::SolitonShoot(_) => "soliton shoot",
            RunConfig::Residual { .. } => "residual",
        }
    }
}

/// Resolves special-family parameters, defaulting `b = 0` (`b = 1` for the
/// cylinder), `c = 0`, `λ = 0`.
pub fn nk_family(family: FamilyName, b: Option<f64>, c: Option<f64>, lambda: Option<f64>) -> Result<NkFamily, CliError> {
    let reject = |what: &str| Err(CliError::Config(format!("--{what} does not apply to the {family:?} family")));
    Ok(match family {
        FamilyName::Cone | FamilyName::Anticone => {
            if c.is_some() {
                return reject("c");
            }
            let (b, lambda) = (b.unwrap_or(0.0), lambda.unwrap_or(0.0));
            if family == FamilyName::Cone {
                NkFamily::Cone { b, lambda }
            } else {
                NkFamily::AntiCone { b, lambda }
            }
        }
        FamilyName::Cylinder => {
            if lambda.is_some() {
                return reject("lambda");
            }
            NkFamily::Cylinder { b: b.unwrap_or(1.0), c: c.unwrap_or(0.0) }
        }
        FamilyName::Sinecone => {
            if b.is_some() || c.is_some() || lambda.is_some() {
                return reject("b/--c/--lambda");
            }
            NkFamily::SineCone
        }
    })
}

/// Reads JSON, reporting the path of the offending key on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("at `{path}`: {inner}"))
        }
    })
}
