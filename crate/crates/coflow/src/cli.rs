//! Argument parsing and resolution into a [`RunConfig`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::config::{
    parse_json, read_json, FamilyName, FlowFile, ProfileSource, ResidualFile, RunConfig, ShootFile, Structure, Suite,
};
use crate::error::CliError;
use crate::json::DomainSpec;
use crate::run;

#[derive(Debug, Parser)]
#[command(name = "coflow", version, about = "Laplacian coflow of coclosed G2-structures on N^6 x L^1")]
pub struct Cli {
    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

/// `interval:R0:R1` or `circle:PERIOD`.
fn domain_flag(s: &str) -> Result<DomainSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let spec = match parts.as_slice() {
        ["interval", a, b] => DomainSpec::Interval { r0: num(a)?, r1: num(b)? },
        ["circle", p] => DomainSpec::Circle { r0: 0.0, period: num(p)? },
        _ => return Err("expected `interval:R0:R1` or `circle:PERIOD`".into()),
    };
    spec.domain().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seeded identity suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random profiles per suite (20 for identities, 10 for laplacian).
        #[arg(long)]
        profiles: Option<usize>,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Torsion of a closed-form (h, θ, G) triple.
    #[command(allow_negative_numbers = true)]
    Torsion {
        #[arg(long, value_enum)]
        structure: Structure,
        #[arg(long)]
        h: String,
        #[arg(long)]
        theta: String,
        #[arg(long = "G", default_value = "1")]
        g: String,
        #[arg(long, value_parser = domain_flag)]
        domain: DomainSpec,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Also write φ, ψ and τ₃ to forms.json.
        #[arg(long)]
        forms: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Evolve initial data under the coflow.
    Flow {
        #[arg(long)]
        config: PathBuf,
    },
    #[command(subcommand)]
    Soliton(SolitonCommand),
    /// Soliton residuals of a candidate given by a config file.
    Residual {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run the configuration recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SolitonCommand {
    /// Closed-form CY soliton.
    #[command(allow_negative_numbers = true)]
    Cy {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, value_parser = domain_flag)]
        domain: Option<DomainSpec>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Special NK soliton families.
    #[command(allow_negative_numbers = true)]
    Nk {
        #[arg(long, value_enum)]
        family: FamilyName,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_parser = domain_flag)]
        domain: Option<DomainSpec>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Integrate the reduced third-order ODE from (h, h', h'') at the
    /// start of the span.
    #[command(allow_negative_numbers = true)]
    Reduce {
        #[arg(long)]
        h0: f64,
        #[arg(long)]
        dh0: f64,
        #[arg(long)]
        ddh0: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, num_args = 2, value_names = ["R0", "R1"])]
        span: Vec<f64>,
        /// Sign of sin 3θ.
        #[arg(long, default_value_t = 1.0)]
        u_sign: f64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Shoot on λ for a boundary condition on h'.
    Shoot {
        #[arg(long)]
        config: PathBuf,
    },
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Reads and validates a flow config; relative sample files resolve
/// against the config's directory.
pub fn load_flow(path: &Path) -> Result<FlowFile, CliError> {
    let mut f: FlowFile = read_json(path)?;
    let base = config_dir(path);
    for s in [&mut f.initial.h, &mut f.initial.theta, &mut f.initial.g] {
        s.absolutize(&base);
    }
    f.flow_config()?;
    f.domain.mesh()?;
    Ok(f)
}

pub fn load_residual(path: &Path) -> Result<ResidualFile, CliError> {
    let mut f: ResidualFile = read_json(path)?;
    let base = config_dir(path);
    for s in [&mut f.h, &mut f.theta, &mut f.kprime] {
        s.absolutize(&base);
    }
    f.domain.domain()?;
    Ok(f)
}

pub fn load_manifest(path: &Path) -> Result<RunConfig, CliError> {
    let m: Value = read_json(path)?;
    let cfg = m.get("config").ok_or_else(|| CliError::Config(format!("{}: no `config` key", path.display())))?;
    parse_json(&cfg.to_string()).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: config: {m}", path.display())),
        other => other,
    })
}

impl Command {
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        Ok(match self {
            Command::Verify { suite, seed, profiles, points } => RunConfig::Verify { suite, seed, profiles, points },
            Command::Torsion { structure, h, theta, g, domain, points, forms, tol } => RunConfig::Torsion {
                structure,
                domain,
                h: ProfileSource::Expr(h),
                theta: ProfileSource::Expr(theta),
                g: ProfileSource::Expr(g),
                points,
                forms,
                tol,
            },
            Command::Flow { config } => RunConfig::Flow(load_flow(&config)?),
            Command::Residual { config } => RunConfig::Residual(load_residual(&config)?),
            Command::Replay { manifest } => load_manifest(&manifest)?,
            Command::Soliton(s) => match s {
                SolitonCommand::Cy { b, c, domain, samples, tol } => RunConfig::SolitonCy { b, c, domain, samples, tol },
                SolitonCommand::Nk { family, b, c, lambda, domain, samples, tol } => {
                    RunConfig::SolitonNk { family, b, c, lambda, domain, samples, tol }
                }
                SolitonCommand::Reduce { h0, dh0, ddh0, lambda, span, u_sign, rtol, samples, tol } => {
                    RunConfig::SolitonReduce { h0, dh0, ddh0, lambda, span: [span[0], span[1]], u_sign, rtol, samples, tol }
                }
                SolitonCommand::Shoot { config } => RunConfig::SolitonShoot(read_json::<ShootFile>(&config)?),
            },
        })
    }
}

/// Caps the rayon pool from `COFLOW_THREADS`.
fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("COFLOW_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("COFLOW_THREADS: expected a positive integer, got `{v}`")))?;
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let res = init_threads().and_then(|()| cli.command.resolve()).and_then(|cfg| run::run(&cfg, &cli.out));
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
