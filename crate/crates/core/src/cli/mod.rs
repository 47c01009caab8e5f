//! Command-line front end of the `erasure-cap` binary.
//!
//! Every invocation is first resolved into a [`RunConfig`], either from
//! flags or from a `--config` JSON file, validated, and then executed. The
//! output starts with a metadata block (tool version and the canonical
//! config) followed by a CSV table or a JSON document.

mod commands;
mod config;
mod output;
mod reproduce;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use config::{
    parse_grid, CommandConfig, ConstraintSource, InputSpec, MiMethodChoice, QuantityChoice, RunConfig,
    SaSettings, Target,
};
pub use output::{render, round_sig, Cell, Column, Format, Report};
pub use reproduce::{TABLE_CAPACITY_BITS, TABLE_THETA};

use crate::capacity_opt::GradientEstimator;
use crate::erasure::{ErasureProcess, ErasureSpec};
use crate::error::{Error, Result};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "ERASURE_CAP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "erasure-cap", version, about = "Capacities and information rates of input-constrained erasure channels")]
pub struct Cli {
    /// Read the whole run configuration from a JSON file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Report information quantities in nats instead of bits.
    #[arg(long, global = true)]
    pub nats: bool,

    /// Print the canonical configuration and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Option<CommandArgs>,
}

#[derive(Debug, Args)]
pub struct ConstraintArgs {
    /// Constraint preset such as `rll(1,inf)`, `rll(2,5)` or `full(3)`.
    #[arg(value_name = "PRESET")]
    preset_positional: Option<String>,

    #[arg(long, conflicts_with_all = ["preset_positional", "constraint"])]
    preset: Option<String>,

    /// Constraint file `{"K": 2, "forbidden": ["22"]}`.
    #[arg(long, conflicts_with = "preset_positional")]
    constraint: Option<PathBuf>,
}

impl ConstraintArgs {
    fn source(&self) -> ConstraintSource {
        if let Some(path) = &self.constraint {
            ConstraintSource::File(path.clone())
        } else if let Some(p) = self.preset.as_ref().or(self.preset_positional.as_ref()) {
            ConstraintSource::Preset(p.clone())
        } else {
            ConstraintSource::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct MiRateArgs {
    #[command(flatten)]
    constraint: ConstraintArgs,

    /// Use the (1,∞)-RLL θ chain as input.
    #[arg(long, conflicts_with_all = ["theta_uniform", "chain"])]
    theta: Option<f64>,

    /// Use i.i.d. uniform input symbols.
    #[arg(long, conflicts_with = "chain")]
    theta_uniform: bool,

    /// Input chain file: `{"theta": x}` or `{"order": m, "kernel": {...}}`.
    #[arg(long)]
    chain: Option<PathBuf>,

    /// I.i.d. erasure rate.
    #[arg(long, conflicts_with_all = ["markov_erasure", "erasure"])]
    eps: Option<f64>,

    /// Markov erasures given as `P(1→1),P(0→1)` (state 1 = received).
    #[arg(long, value_name = "P11,P01", conflicts_with = "erasure")]
    markov_erasure: Option<String>,

    /// Erasure file: `{"iid": ε}` or `{"markov": [[..],[..]]}`.
    #[arg(long)]
    erasure: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "auto")]
    method: MiMethodChoice,

    /// Window length for finite-window, exact and brute-force methods.
    #[arg(long)]
    n: Option<usize>,

    /// Truncation of the higher-order series.
    #[arg(long)]
    k_max: Option<usize>,

    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// ε value, `a:step:b` range or comma list.
    #[arg(long, alias = "eps-grid", default_value = "0")]
    eps: String,

    #[arg(long, default_value_t = 1e-10)]
    tol: f64,

    /// Run stochastic approximation instead of the deterministic search.
    #[arg(long)]
    sa: bool,

    #[arg(long, default_value_t = 10_000)]
    steps: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value = "series")]
    estimator: EstimatorArg,

    /// Step numerator `a` in `a_n = a / (1 + n/A)`.
    #[arg(long, default_value_t = 0.5)]
    step_a: f64,

    /// Step scale `A` in `a_n = a / (1 + n/A)`.
    #[arg(long, default_value_t = 100.0)]
    step_scale: f64,

    /// Window growth exponent `b`.
    #[arg(long, default_value_t = 1.0)]
    window_exponent: f64,

    /// Starting θ (random from the seed when absent).
    #[arg(long)]
    theta0: Option<f64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum EstimatorArg {
    Series,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long, default_value_t = 3)]
    order: usize,

    #[arg(long, value_enum, default_value = "c1")]
    quantity: QuantityChoice,

    /// Constraint for `--quantity linear`.
    #[command(flatten)]
    constraint: ConstraintArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, alias = "eps-grid", default_value = "0:0.1:0.9")]
    eps: String,

    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    target: Target,

    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Noiseless capacity of a constraint.
    Noiseless(ConstraintArgs),
    /// Max-entropy (Parry) chain of a constraint.
    Parry(ConstraintArgs),
    /// Mutual information rate or output entropy for a given input.
    MiRate(MiRateArgs),
    /// First-order capacity of the (1,∞)-RLL erasure channel.
    Capacity(CapacityArgs),
    /// Taylor coefficients in ε.
    Asymptotics(AsymptoticsArgs),
    /// Feedback capacity of the (1,∞)-RLL erasure channel.
    Feedback(GridArgs),
    /// Feedback capacity beside the first-order capacity.
    Compare(GridArgs),
    /// Regenerate the reference table or a figure.
    Reproduce(ReproduceArgs),
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("expected two probabilities `p11,p01`, got `{text}`"));
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match v[..] {
        [a, b] => Ok((a, b)),
        _ => Err(bad()),
    }
}

impl CommandArgs {
    pub fn to_config(&self) -> Result<CommandConfig> {
        Ok(match self {
            Self::Noiseless(c) => CommandConfig::Noiseless {
                constraint: c.source(),
            },
            Self::Parry(c) => CommandConfig::Parry {
                constraint: c.source(),
            },
            Self::MiRate(a) => {
                let input = if let Some(t) = a.theta {
                    InputSpec::Theta(t)
                } else if a.theta_uniform {
                    InputSpec::Uniform
                } else if let Some(p) = &a.chain {
                    InputSpec::Chain(p.clone())
                } else {
                    InputSpec::Parry
                };
                let erasure = if let Some(e) = a.eps {
                    ErasureSpec::Iid(e)
                } else if let Some(pair) = &a.markov_erasure {
                    let (p11, p01) = parse_pair(pair)?;
                    ErasureProcess::markov_from_stay(p11, p01)?.to_spec()
                } else if let Some(path) = &a.erasure {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    serde_json::from_str(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                } else {
                    return Err(Error::Config(
                        "mi-rate needs --eps, --markov-erasure or --erasure".into(),
                    ));
                };
                CommandConfig::MiRate {
                    constraint: a.constraint.source(),
                    input,
                    erasure,
                    method: a.method,
                    n: a.n,
                    k_max: a.k_max,
                    tol: a.tol,
                }
            }
            Self::Capacity(a) => CommandConfig::Capacity {
                eps_grid: parse_grid(&a.eps)?,
                tol: a.tol,
                sa: a.sa.then_some(SaSettings {
                    steps: a.steps,
                    seed: a.seed,
                    estimator: match a.estimator {
                        EstimatorArg::Series => GradientEstimator::Series,
                        EstimatorArg::MonteCarlo => GradientEstimator::MonteCarlo,
                    },
                    a: a.step_a,
                    a_scale: a.step_scale,
                    b: a.window_exponent,
                    theta0: a.theta0,
                }),
            },
            Self::Asymptotics(a) => CommandConfig::Asymptotics {
                order: a.order,
                quantity: a.quantity,
                constraint: a.constraint.source(),
            },
            Self::Feedback(g) => CommandConfig::Feedback {
                eps_grid: parse_grid(&g.eps)?,
            },
            Self::Compare(g) => CommandConfig::Compare {
                eps_grid: parse_grid(&g.eps)?,
                tol: g.tol,
            },
            Self::Reproduce(r) => CommandConfig::Reproduce {
                target: r.target,
                tol: r.tol,
            },
        })
    }
}

impl Cli {
    /// Resolves flags and an optional config file into one configuration.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.command) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either --config or a subcommand, not both".into(),
                ))
            }
            (None, None) => return Err(Error::Config("no subcommand given".into())),
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                RunConfig::from_json(&text)?
            }
            (None, Some(cmd)) => RunConfig {
                command: cmd.to_config()?,
                format: Format::default(),
                output: None,
                nats: false,
            },
        };
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if self.output.is_some() {
            cfg.output.clone_from(&self.output);
        }
        cfg.nats |= self.nats;
        Ok(cfg)
    }
}

/// Metadata block written ahead of every report. It holds no timestamps,
/// so reruns are byte-identical.
pub fn metadata(cfg: &RunConfig) -> serde_json::Value {
    json!({
        "tool": format!("erasure-cap {}", env!("CARGO_PKG_VERSION")),
        "units": if cfg.nats { "nats" } else { "bits" },
        "config": cfg.canonical_json(),
    })
}

/// Validates and executes a configuration, writing the report to `out`.
pub fn run_to<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    cfg.command.validate()?;
    let report = commands::execute(&cfg.command)?;
    render(out, &report, &metadata(cfg), cfg.format, cfg.nats)
}

/// Validates and executes a configuration, writing to its output target.
pub fn run(cfg: &RunConfig) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            cfg.command.validate()?;
            let mut w = BufWriter::new(File::create(path)?);
            run_to(cfg, &mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            run_to(cfg, &mut lock)
        }
    }
}

/// Reads `ERASURE_CAP_THREADS` and sizes the global thread pool.
pub fn configure_threads() -> Result<()> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV}={text} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = configure_threads().and_then(|()| {
        let cfg = cli.resolve()?;
        if cli.dump_config {
            println!("{}", cfg.canonical_json());
            return Ok(());
        }
        run(&cfg)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
