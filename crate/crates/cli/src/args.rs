use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::{usage, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "qmcforge",
    version,
    about = "Construct and certify rank-1 lattice and polynomial lattice rules",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a rule by component-by-component search and write it as JSON.
    Construct(ConstructArgs),
    /// Report the worst-case error, Zaremba index and discrepancy bounds of a rule.
    Evaluate(EvaluateArgs),
    /// Check one of the error or stability bounds on a rule.
    Certify(CertifyArgs),
    /// Construct and evaluate rules over a grid of sizes and emit a CSV table.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Lattice,
    PolyLattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    Thm1,
    Thm2,
    Prop1,
    Prop2,
    Eq1,
    Jensen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// JSON file whose keys stand in for flags; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Number of points of a lattice rule.
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Prime base of a polynomial lattice rule.
    #[arg(long, default_value_t = 2)]
    pub b: u32,
    /// Degree of the modulus; the rule has b^m points.
    #[arg(long)]
    pub m: Option<usize>,
    /// Integer encoding of the modulus (coefficient of x^i is digit i in base b).
    /// Defaults to the smallest irreducible polynomial of degree m.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value = "product:1")]
    pub weights: String,
    /// FFT-based search (prime N, product weights).
    #[arg(long)]
    pub fast: bool,
    /// Draw a random generating vector instead of searching.
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rule output file; without it the rule goes to stdout and the trace to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    pub rule: PathBuf,
    /// Defaults to the smoothness recorded at construction.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Defaults to the weights recorded at construction.
    #[arg(long)]
    pub weights: Option<String>,
    /// Add the Zaremba index and per-subset minimal dual sizes.
    #[arg(long)]
    pub rho: bool,
    /// Add star-discrepancy bounds and, where feasible, the exact value.
    #[arg(long)]
    pub discrepancy: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(value_enum)]
    pub theorem: Theorem,
    pub rule: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub weights: Option<String>,
    /// Target smoothness; defaults to --alpha.
    #[arg(long = "alpha-prime")]
    pub alpha_prime: Option<f64>,
    /// Target weights; default to --weights.
    #[arg(long = "weights-prime")]
    pub weights_prime: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Sizes N (lattice) or degrees m (polynomial): a list like `17,31,61`,
    /// ranges like `17..251`, or both.
    #[arg(long)]
    pub grid: String,
    /// Keep only the prime grid values.
    #[arg(long)]
    pub primes: bool,
    #[arg(long, default_value_t = 2)]
    pub b: u32,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value = "product:1")]
    pub weights: String,
    #[arg(long = "alpha-prime")]
    pub alpha_prime: Option<f64>,
    #[arg(long = "weights-prime")]
    pub weights_prime: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub fast: bool,
    /// Add a `passed` column for this stability bound.
    #[arg(long, value_enum)]
    pub certify: Option<Theorem>,
    /// CSV output file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Config keys that fill positional arguments, in argument order.
const POSITIONAL: [&str; 2] = ["theorem", "rule"];

fn config_flags(path: &str) -> CliResult<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })?;
    let Value::Object(map) = value else {
        return Err(usage(format!("{path}: config must be a JSON object")));
    };
    let scalar = |v: &Value| -> CliResult<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            Value::Bool(b) => Ok(b.to_string()),
            other => Err(usage(format!("{path}: unsupported config value {other}"))),
        }
    };
    let mut out = Vec::new();
    for key in POSITIONAL {
        if let Some(v) = map.get(key) {
            out.push(scalar(v)?.into());
        }
    }
    for (key, v) in map
        .iter()
        .filter(|(k, _)| !POSITIONAL.contains(&k.as_str()))
    {
        match v {
            Value::Bool(true) => out.push(format!("--{key}").into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let joined = items
                    .iter()
                    .map(scalar)
                    .collect::<CliResult<Vec<_>>>()?
                    .join(",");
                out.extend([format!("--{key}").into(), joined.into()]);
            }
            _ => out.extend([format!("--{key}").into(), scalar(v)?.into()]),
        }
    }
    Ok(out)
}

/// Splices the flags of every `--config FILE` in front of the explicit ones, so
/// that explicit flags override config values.
pub fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(sub) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 1)
    else {
        return Ok(args);
    };
    let mut injected = Vec::new();
    let mut i = sub + 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            let path = args
                .get(i + 1)
                .ok_or_else(|| usage("--config needs a path"))?;
            injected.extend(config_flags(&path.to_string_lossy())?);
            i += 2;
        } else if let Some(path) = a.strip_prefix("--config=") {
            injected.extend(config_flags(path)?);
            i += 1;
        } else {
            i += 1;
        }
    }
    let mut out = args[..=sub].to_vec();
    out.extend(injected);
    out.extend(args[sub + 1..].iter().cloned());
    Ok(out)
}
