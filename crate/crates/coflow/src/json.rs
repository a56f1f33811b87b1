//! JSON schemas for domains, expression trees, profiles and forms.
//!
//! Expression nodes are `{"type": ..., "children": [...]}` with extra fields
//! `value` (const), `n` (powi) and `r0`, `c0`, `tol` (antiderivative).

use coflow_core::forms::{Basis, InvariantForm};
use coflow_core::profiles::{AntiderivativeNode, Backend, Domain, Expr, Mesh, Profile, ProfileError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Circle {
        #[serde(default)]
        r0: f64,
        period: f64,
    },
    Interval {
        r0: f64,
        r1: f64,
    },
}

impl DomainSpec {
    pub fn domain(&self) -> Result<Domain, CliError> {
        let d = match *self {
            DomainSpec::Circle { r0, period } => Domain::Circle { r0, period },
            DomainSpec::Interval { r0, r1 } => Domain::interval(r0, r1),
        };
        d.validate().map_err(|e| CliError::Config(format!("domain: {e}")))?;
        Ok(d)
    }

    pub fn from_domain(d: Domain) -> Self {
        match d {
            Domain::Circle { r0, period } => DomainSpec::Circle { r0, period },
            Domain::Interval { r0, r1 } => DomainSpec::Interval { r0, r1 },
        }
    }
}

fn unary(tag: &str, a: &Expr) -> Value {
    json!({ "type": tag, "children": [expr_to_json(a)] })
}

fn binary(tag: &str, a: &Expr, b: &Expr) -> Value {
    json!({ "type": tag, "children": [expr_to_json(a), expr_to_json(b)] })
}

pub fn expr_to_json(e: &Expr) -> Value {
    match e {
        Expr::Const(v) => json!({ "type": "const", "value": v }),
        Expr::R => json!({ "type": "r" }),
        Expr::Neg(a) => unary("neg", a),
        Expr::Add(a, b) => binary("add", a, b),
        Expr::Sub(a, b) => binary("sub", a, b),
        Expr::Mul(a, b) => binary("mul", a, b),
        Expr::Div(a, b) => binary("div", a, b),
        Expr::Sin(a) => unary("sin", a),
        Expr::Cos(a) => unary("cos", a),
        Expr::Exp(a) => unary("exp", a),
        Expr::Atan(a) => unary("atan", a),
        Expr::PowI(a, n) => json!({ "type": "powi", "n": n, "children": [expr_to_json(a)] }),
        Expr::Antiderivative(node) => json!({
            "type": "antiderivative",
            "r0": node.r0,
            "c0": node.c0,
            "tol": node.tol,
            "children": [expr_to_json(&node.integrand)],
        }),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| CliError::Config(format!("{path}: missing field `{key}`")))
}

fn number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64, CliError> {
    field(obj, key, path)?.as_f64().ok_or_else(|| CliError::Config(format!("{path}.{key}: expected a number")))
}

pub fn expr_from_json(v: &Value, path: &str) -> Result<Expr, CliError> {
    let obj = v.as_object().ok_or_else(|| CliError::Config(format!("{path}: expected an object")))?;
    let tag = field(obj, "type", path)?
        .as_str()
        .ok_or_else(|| CliError::Config(format!("{path}.type: expected a string")))?;
    let allowed: &[&str] = match tag {
        "const" => &["type", "value"],
        "r" => &["type"],
        "powi" => &["type", "n", "children"],
        "antiderivative" => &["type", "r0", "c0", "tol", "children"],
        _ => &["type", "children"],
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Config(format!("{path}: unknown field `{k}`")));
    }
    let children = || -> Result<Vec<Expr>, CliError> {
        let arr = field(obj, "children", path)?
            .as_array()
            .ok_or_else(|| CliError::Config(format!("{path}.children: expected an array")))?;
        arr.iter().enumerate().map(|(i, c)| expr_from_json(c, &format!("{path}.children[{i}]"))).collect()
    };
    let arity = |n: usize| -> Result<Vec<Expr>, CliError> {
        let c = children()?;
        if c.len() != n {
            return Err(CliError::Config(format!("{path}: `{tag}` takes {n} children, got {}", c.len())));
        }
        Ok(c)
    };
    let one = || -> Result<Box<Expr>, CliError> { Ok(Box::new(arity(1)?.remove(0))) };
    let two = || -> Result<(Box<Expr>, Box<Expr>), CliError> {
        let mut c = arity(2)?;
        let b = c.pop().unwrap();
        Ok((Box::new(c.pop().unwrap()), Box::new(b)))
    };
    Ok(match tag {
        "const" => Expr::Const(number(obj, "value", path)?),
        "r" => Expr::R,
        "neg" => Expr::Neg(one()?),
        "add" => {
            let (a, b) = two()?;
            Expr::Add(a, b)
        }
        "sub" => {
            let (a, b) = two()?;
            Expr::Sub(a, b)
        }
        "mul" => {
            let (a, b) = two()?;
            Expr::Mul(a, b)
        }
        "div" => {
            let (a, b) = two()?;
            Expr::Div(a, b)
        }
        "sin" => Expr::Sin(one()?),
        "cos" => Expr::Cos(one()?),
        "exp" => Expr::Exp(one()?),
        "atan" => Expr::Atan(one()?),
        "powi" => {
            let n = field(obj, "n", path)?
                .as_i64()
                .and_then(|n| i32::try_from(n).ok())
                .ok_or_else(|| CliError::Config(format!("{path}.n: expected an integer")))?;
            Expr::PowI(one()?, n)
        }
        "antiderivative" => Expr::Antiderivative(Box::new(AntiderivativeNode {
            integrand: *one()?,
            r0: number(obj, "r0", path)?,
            c0: number(obj, "c0", path)?,
            tol: number(obj, "tol", path)?,
        })),
        other => return Err(CliError::Config(format!("{path}.type: unknown node type `{other}`"))),
    })
}

/// Closed forms serialize exactly; sampled and custom profiles as samples
/// on `mesh` (custom ones need it).
pub fn profile_to_json(p: &Profile, mesh: Option<&Mesh>) -> Result<Value, CliError> {
    let domain = serde_json::to_value(DomainSpec::from_domain(p.domain())).unwrap();
    match p.backend() {
        Backend::ClosedForm(e) => Ok(json!({ "domain": domain, "expr": expr_to_json(e) })),
        Backend::Sampled(s) => Ok(json!({
            "domain": domain,
            "samples": { "n": s.mesh.len(), "stencil_order": s.stencil_order, "values": s.values },
        })),
        Backend::Custom(_) => {
            let mesh = mesh.ok_or_else(|| CliError::Runtime("custom profile needs a sampling mesh".into()))?;
            let values = p.sample(mesh)?;
            Ok(json!({
                "domain": serde_json::to_value(DomainSpec::from_domain(mesh.domain())).unwrap(),
                "samples": { "n": mesh.len(), "stencil_order": 4, "values": values },
            }))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplesSpec {
    n: usize,
    #[serde(default = "default_order")]
    stencil_order: usize,
    values: Vec<f64>,
}

fn default_order() -> usize {
    4
}

pub fn profile_from_json(v: &Value, path: &str) -> Result<Profile, CliError> {
    let obj = v.as_object().ok_or_else(|| CliError::Config(format!("{path}: expected an object")))?;
    if let Some(k) = obj.keys().find(|k| !["domain", "expr", "samples"].contains(&k.as_str())) {
        return Err(CliError::Config(format!("{path}: unknown field `{k}`")));
    }
    let spec: DomainSpec = serde_json::from_value(field(obj, "domain", path)?.clone())
        .map_err(|e| CliError::Config(format!("{path}.domain: {e}")))?;
    let domain = spec.domain()?;
    match (obj.get("expr"), obj.get("samples")) {
        (Some(e), None) => Ok(Profile::closed_form(expr_from_json(e, &format!("{path}.expr"))?, domain)),
        (None, Some(s)) => {
            let s: SamplesSpec = serde_json::from_value(s.clone())
                .map_err(|e| CliError::Config(format!("{path}.samples: {e}")))?;
            if s.n != s.values.len() {
                return Err(CliError::Config(format!("{path}.samples: n = {} but {} values", s.n, s.values.len())));
            }
            let mesh = Mesh::new(domain, s.n).map_err(|e| CliError::Config(format!("{path}.samples: {e}")))?;
            Profile::sampled(mesh, s.values, s.stencil_order).map_err(|e| CliError::Config(format!("{path}.samples: {e}")))
        }
        _ => Err(CliError::Config(format!("{path}: exactly one of `expr` or `samples` is required"))),
    }
}

/// `{degree, entries: [{basis, re, im}]}` with coefficient profiles sampled
/// from pointwise forms at the mesh nodes.
pub fn sampled_form_to_json(degree: u8, forms: &[InvariantForm], mesh: &Mesh) -> Result<Value, CliError> {
    let mut entries = Vec::new();
    for b in Basis::ALL.iter().copied().filter(|b| b.degree() == degree) {
        let re: Vec<f64> = forms.iter().map(|f| f.coeff(b).value.re).collect();
        let im: Vec<f64> = forms.iter().map(|f| f.coeff(b).value.im).collect();
        if re.iter().chain(im.iter()).all(|x| *x == 0.0) {
            continue;
        }
        let re = Profile::sampled(*mesh, re, 4)?;
        let im = Profile::sampled(*mesh, im, 4)?;
        entries.push(json!({
            "basis": b.tag(),
            "re": profile_to_json(&re, None)?,
            "im": profile_to_json(&im, None)?,
        }));
    }
    Ok(json!({ "degree": degree, "entries": entries }))
}

/// A form whose coefficients are profiles, evaluated at `r`.
pub fn form_from_json(v: &Value, r: f64, path: &str) -> Result<InvariantForm, CliError> {
    let obj = v.as_object().ok_or_else(|| CliError::Config(format!("{path}: expected an object")))?;
    let degree = field(obj, "degree", path)?
        .as_u64()
        .filter(|d| *d <= 7)
        .ok_or_else(|| CliError::Config(format!("{path}.degree: expected an integer in 0..=7")))? as u8;
    let entries = field(obj, "entries", path)?
        .as_array()
        .ok_or_else(|| CliError::Config(format!("{path}.entries: expected an array")))?;
    let mut form = InvariantForm::zero(degree);
    for (i, e) in entries.iter().enumerate() {
        let p = format!("{path}.entries[{i}]");
        let eo = e.as_object().ok_or_else(|| CliError::Config(format!("{p}: expected an object")))?;
        let tag = field(eo, "basis", &p)?.as_str().unwrap_or_default();
        let b = Basis::from_tag(tag).ok_or_else(|| CliError::Config(format!("{p}.basis: unknown tag `{tag}`")))?;
        if b.degree() != degree {
            return Err(CliError::Config(format!("{p}.basis: `{tag}` has degree {}", b.degree())));
        }
        let re = profile_from_json(field(eo, "re", &p)?, &format!("{p}.re"))?.jet_at(r)?;
        let im = profile_from_json(field(eo, "im", &p)?, &format!("{p}.im"))?.jet_at(r)?;
        form = form + InvariantForm::term(b, coflow_core::jet::CJet::from_parts(&re, &im));
    }
    Ok(form)
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        CliError::Runtime(e.to_string())
    }
}
