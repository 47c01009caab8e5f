//! The resolved run configuration, shared by command-line flags and
//! `--config` files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::output::Format;
use crate::capacity_opt::GradientEstimator;
use crate::constraint::{ConstraintFile, ConstraintGraph, ForbiddenWordSet};
use crate::erasure::{ErasureProcess, ErasureSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandConfig,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub nats: bool,
}

impl RunConfig {
    /// Single-line canonical JSON; parsing it back gives an equal config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSource {
    Preset(String),
    File(PathBuf),
    Inline(ConstraintFile),
}

impl Default for ConstraintSource {
    fn default() -> Self {
        Self::Preset("rll(1,inf)".into())
    }
}

impl ConstraintSource {
    pub fn describe(&self) -> String {
        match self {
            Self::Preset(p) => p.clone(),
            Self::File(p) => p.display().to_string(),
            Self::Inline(f) => format!("K={} forbidden={:?}", f.alphabet_size, f.forbidden),
        }
    }

    pub fn load(&self) -> Result<ForbiddenWordSet> {
        match self {
            Self::Preset(p) => ForbiddenWordSet::preset(p),
            Self::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                ForbiddenWordSet::from_json(&text)
            }
            Self::Inline(f) => ForbiddenWordSet::from_file(f),
        }
    }

    pub fn graph(&self) -> Result<ConstraintGraph> {
        self.load()?.compile()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    /// Max-entropy chain of the constraint.
    Parry,
    /// I.i.d. uniform symbols.
    Uniform,
    /// The (1,∞)-RLL θ chain.
    Theta(f64),
    /// Chain description file.
    Chain(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MiMethodChoice {
    /// Series when erasures are i.i.d., finite window otherwise.
    Auto,
    FiniteN,
    SeriesFirst,
    SeriesMth,
    /// `H(Y_0 | Y_{-n}^{-1})` by the subset decomposition.
    Exact,
    /// `H(Y_0 | Y_{-n}^{-1})` by enumerating outputs.
    Brute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaSettings {
    pub steps: usize,
    pub seed: u64,
    pub estimator: GradientEstimator,
    pub a: f64,
    #[serde(rename = "A")]
    pub a_scale: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum QuantityChoice {
    Theta,
    C1,
    Cfb,
    /// Two-term expansion of a general constraint.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Table1,
    Fig1,
    Fig2,
    Gain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CommandConfig {
    Noiseless {
        #[serde(default)]
        constraint: ConstraintSource,
    },
    Parry {
        #[serde(default)]
        constraint: ConstraintSource,
    },
    MiRate {
        #[serde(default)]
        constraint: ConstraintSource,
        input: InputSpec,
        erasure: ErasureSpec,
        method: MiMethodChoice,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k_max: Option<usize>,
        tol: f64,
    },
    Capacity {
        eps_grid: Vec<f64>,
        tol: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sa: Option<SaSettings>,
    },
    Asymptotics {
        order: usize,
        quantity: QuantityChoice,
        #[serde(default)]
        constraint: ConstraintSource,
    },
    Feedback {
        eps_grid: Vec<f64>,
    },
    Compare {
        eps_grid: Vec<f64>,
        tol: f64,
    },
    Reproduce {
        target: Target,
        tol: f64,
    },
}

fn precondition(msg: String) -> Error {
    Error::Precondition(msg)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("empty ε grid".into()));
    }
    if let Some(e) = grid.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(precondition(format!("ε = {e} is outside [0, 1)")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(precondition("ε grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-12..1.0).contains(&tol) {
        return Err(precondition(format!("tolerance {tol} is outside [1e-12, 1)")));
    }
    Ok(())
}

impl CommandConfig {
    /// Range checks that can be made before any computation starts.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Noiseless { constraint } | Self::Parry { constraint } => {
                constraint.load().map(|_| ())
            }
            Self::MiRate {
                constraint,
                input,
                erasure,
                tol,
                ..
            } => {
                constraint.load()?;
                if let InputSpec::Theta(t) = input {
                    if !(0.0..=1.0).contains(t) {
                        return Err(precondition(format!("θ = {t} is outside [0, 1]")));
                    }
                }
                ErasureProcess::from_spec(erasure)?;
                if !(*tol > 0.0) {
                    return Err(precondition(format!("tolerance {tol} must be positive")));
                }
                Ok(())
            }
            Self::Capacity { eps_grid, tol, sa } => {
                check_grid(eps_grid)?;
                check_tol(*tol)?;
                if let Some(sa) = sa {
                    if !(sa.a > 0.0 && sa.a_scale > 0.0 && sa.b >= 0.0) {
                        return Err(precondition(
                            "step constants a, A must be positive and b non-negative".into(),
                        ));
                    }
                    if let Some(t) = sa.theta0 {
                        if !(0.0..=1.0).contains(&t) {
                            return Err(precondition(format!("θ0 = {t} is outside [0, 1]")));
                        }
                    }
                }
                Ok(())
            }
            Self::Asymptotics {
                order, constraint, ..
            } => {
                crate::asymptotics::check_order(*order)?;
                constraint.load().map(|_| ())
            }
            Self::Feedback { eps_grid } => check_grid(eps_grid),
            Self::Compare { eps_grid, tol } => {
                check_grid(eps_grid)?;
                check_tol(*tol)
            }
            Self::Reproduce { tol, .. } => check_tol(*tol),
        }
    }
}

/// Parses `a:step:b` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Config(format!("bad ε grid `{text}`: {what}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(num).collect(),
        3 => {
            let (a, step, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || b < a {
                return Err(bad("need a positive step and a ≤ b"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(bad("too many points"));
            }
            Ok((0..count)
                .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(bad("expected a:step:b or a comma list")),
    }
}
