//! First-order capacity of the (1,∞)-RLL erasure channel: maximizing
//! `I(θ, ε)` over the θ family, by a deterministic concave search and by
//! stochastic approximation.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::erasure::ErasureProcess;
use crate::error::{Error, Result};
use crate::info::{binary_entropy, to_bits, LOG_FLOOR};
use crate::markov::RllThetaChain;
use crate::mi_rate::{series_first_order, terms_for_tol};
use crate::optimize::{bisect, golden_section_max};

/// Function values stop resolving the maximizer below this bracket width;
/// the last stretch is done on the sign of the derivative.
const GOLDEN_WIDTH: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    GoldenSection,
    StochasticApproximation,
}

impl fmt::Display for CapacityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GoldenSection => "golden_section",
            Self::StochasticApproximation => "stochastic_approximation",
        })
    }
}

/// `capacity` is in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub eps: f64,
    pub theta_star: f64,
    pub capacity: f64,
    pub method: CapacityMethod,
    pub tol: f64,
}

impl CapacityPoint {
    pub fn capacity_bits(&self) -> f64 {
        to_bits(self.capacity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityCurve {
    pub points: Vec<CapacityPoint>,
    pub tol: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Precondition(format!("ε = {eps} is outside [0, 1)")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Precondition(format!("θ = {theta} is outside [0, 1]")));
    }
    Ok(())
}

/// `I(θ, ε)` in nats from the first-order series with tail below `tol`.
pub fn mutual_information(theta: f64, eps: f64, tol: f64) -> Result<f64> {
    let chain = RllThetaChain::new(theta)?;
    Ok(series_first_order(&chain, &ErasureProcess::iid(eps)?, tol)?.value)
}

/// `H'(y) = ln((1-y)/y)`, kept finite at the endpoints.
fn entropy_slope(y: f64) -> f64 {
    let y = y.clamp(LOG_FLOOR, 1.0 - 1e-16);
    ((1.0 - y) / y).ln()
}

/// `g_n(θ)` and its θ-derivative.
fn g_and_slope(theta: f64, n: usize) -> (f64, f64) {
    if n == 1 {
        return (1.0, 0.0);
    }
    let p = (-theta).powi(n as i32 - 1);
    let s = 1.0 + theta;
    let num = 1.0 + theta * p; // 1 - (-θ)^n
    (num / s, n as f64 * p / s - num / (s * s))
}

/// `H(X_0|X_{-n})` and its θ-derivative for the θ chain.
fn lag_entropy_and_slope(theta: f64, n: usize) -> (f64, f64) {
    let f = 1.0 / (1.0 + theta);
    let df = -f * f;
    let (g1, dg1) = g_and_slope(theta, n + 1);
    let (g0, dg0) = g_and_slope(theta, n);
    let (h1, h0) = (binary_entropy(g1), binary_entropy(g0));
    let term = |g: f64, dg: f64| if dg == 0.0 { 0.0 } else { entropy_slope(g) * dg };
    let value = f * h1 + (1.0 - f) * h0;
    let slope = df * (h1 - h0) + f * term(g1, dg1) + (1.0 - f) * term(g0, dg0);
    (value, slope)
}

/// First `n_terms` terms of the series for `I(θ, ε)` and of its
/// θ-derivative, in nats.
pub fn series_value_and_slope(theta: f64, eps: f64, n_terms: usize) -> (f64, f64) {
    let (mut v, mut d) = (0.0, 0.0);
    let mut w = 1.0;
    for k in 0..n_terms {
        let (a, b) = lag_entropy_and_slope(theta, k + 1);
        v += w * a;
        d += w * b;
        w *= eps;
    }
    let q = (1.0 - eps) * (1.0 - eps);
    (q * v, q * d)
}

/// `∂I/∂θ` in nats from the series truncated so its tail is below `tol`.
pub fn mutual_information_slope(theta: f64, eps: f64, tol: f64) -> Result<f64> {
    check_eps(eps)?;
    check_theta(theta)?;
    let n = terms_for_tol(eps, std::f64::consts::LN_2, tol)?;
    Ok(series_value_and_slope(theta, eps, n).1)
}

/// Maximizer of `I(θ, ε)` over `θ ∈ [0, 1]`. The function is strictly
/// concave in θ, so golden-section search brackets the unique peak; once
/// the bracket is below `1e-7` the derivative sign takes over.
pub fn maximize_theta(eps: f64, tol: f64) -> Result<CapacityPoint> {
    check_eps(eps)?;
    if !(tol >= 1e-12) {
        return Err(Error::Precondition(format!("tolerance {tol} is below 1e-12")));
    }
    let series_tol = tol / 10.0;
    let n = terms_for_tol(eps, std::f64::consts::LN_2, series_tol)?;
    let value = |t: f64| Ok(series_value_and_slope(t, eps, n).0);
    let (mut theta, _) = golden_section_max(value, 0.0, 1.0, tol.max(GOLDEN_WIDTH))?;
    if tol < GOLDEN_WIDTH {
        let lo = (theta - GOLDEN_WIDTH).max(0.0);
        let hi = (theta + GOLDEN_WIDTH).min(1.0);
        let slope = |t: f64| Ok(series_value_and_slope(t, eps, n).1);
        if let Ok(t) = bisect(slope, lo, hi, tol) {
            theta = t;
        }
    }
    Ok(CapacityPoint {
        eps,
        theta_star: theta,
        capacity: mutual_information(theta, eps, series_tol)?,
        method: CapacityMethod::GoldenSection,
        tol,
    })
}

/// `maximize_theta` at every grid point. The grid must be strictly
/// increasing inside `[0, 1)`.
pub fn capacity_curve(grid: &[f64], tol: f64) -> Result<CapacityCurve> {
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Precondition("ε grid must be strictly increasing".into()));
        }
    }
    grid.iter().try_for_each(|&e| check_eps(e))?;
    let points: Vec<CapacityPoint> = grid
        .par_iter()
        .map(|&e| maximize_theta(e, tol))
        .collect::<Result<_>>()?;
    for w in points.windows(2) {
        if w[1].capacity > w[0].capacity + tol {
            log::warn!(
                "capacity increased from ε = {} to ε = {}; tolerance {tol} too loose?",
                w[0].eps,
                w[1].eps
            );
        }
    }
    Ok(CapacityCurve { points, tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientEstimator {
    /// Exact derivative of the series truncated at the current window.
    Series,
    /// Central difference of a simulated `I` estimate, common random
    /// numbers on both sides.
    MonteCarlo,
}

/// Stochastic-approximation settings. The step is `a / (1 + n / A)` and the
/// estimator window at step `n` grows like `n^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub steps: usize,
    pub seed: u64,
    pub a: f64,
    #[serde(rename = "A")]
    pub a_scale: f64,
    pub b: f64,
    pub estimator: GradientEstimator,
    /// Series tail tolerance used by the series estimator and for the
    /// final capacity value.
    pub tol: f64,
    /// Starting point; drawn uniformly from the seeded generator if absent.
    pub theta0: Option<f64>,
    pub mc_window_base: usize,
    pub mc_window_cap: usize,
    pub mc_delta: f64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            steps: 10_000,
            seed: 0,
            a: 0.5,
            a_scale: 100.0,
            b: 1.0,
            estimator: GradientEstimator::Series,
            tol: 1e-10,
            theta0: None,
            mc_window_base: 1_000,
            mc_window_cap: 20_000,
            mc_delta: 0.02,
        }
    }
}

impl SaConfig {
    pub fn step_size(&self, n: usize) -> f64 {
        self.a / (1.0 + n as f64 / self.a_scale)
    }

    fn window(&self, n: usize) -> usize {
        ((n as f64 + 1.0).powf(self.b)).ceil() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a_scale > 0.0 && self.b >= 0.0) {
            return Err(Error::Precondition(
                "step constants a, A must be positive and b non-negative".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Precondition("tol must be positive".into()));
        }
        if let Some(t) = self.theta0 {
            check_theta(t)?;
        }
        if self.estimator == GradientEstimator::MonteCarlo
            && (self.mc_window_cap == 0 || !(self.mc_delta > 0.0 && self.mc_delta < 0.5))
        {
            return Err(Error::Precondition(
                "Monte Carlo window cap must be positive and delta in (0, 0.5)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaRun {
    /// `θ_0, θ_1, …, θ_steps`.
    pub trajectory: Vec<f64>,
    pub point: CapacityPoint,
}

/// Simulated `I(θ, ε)` estimate over `ux.len()` symbols: `-(1/L) ln p(y)`
/// by the forward recursion, minus `H(ε)`.
fn simulated_information(theta: f64, eps: f64, ux: &[f64], ue: &[f64]) -> f64 {
    let f = 1.0 / (1.0 + theta);
    let mut x = if ux[0] < f { 0 } else { 1 };
    let mut alpha = [f, 1.0 - f];
    let mut log_p = 0.0;
    for t in 0..ux.len() {
        if t > 0 {
            x = if x == 1 || ux[t] >= theta { 0 } else { 1 };
            alpha = [alpha[0] * (1.0 - theta) + alpha[1], alpha[0] * theta];
        }
        if ue[t] >= eps {
            // received: the output reveals x
            alpha[1 - x] = 0.0;
            alpha[x] *= 1.0 - eps;
        } else {
            alpha[0] *= eps;
            alpha[1] *= eps;
        }
        let c = alpha[0] + alpha[1];
        log_p += c.ln();
        alpha = [alpha[0] / c, alpha[1] / c];
    }
    -log_p / ux.len() as f64 - binary_entropy(eps)
}

/// Robbins–Monro iteration `θ_{n+1} = θ_n + a_n ĝ_n(θ_n)`; a step that
/// would leave `[0, 1]` is skipped and `θ_n` kept.
pub fn stochastic_approximation(eps: f64, config: &SaConfig) -> Result<SaRun> {
    check_eps(eps)?;
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut theta = match config.theta0 {
        Some(t) => t,
        None => rng.gen::<f64>(),
    };
    let full_terms = terms_for_tol(eps, std::f64::consts::LN_2, config.tol)?;
    let mut trajectory = Vec::with_capacity(config.steps + 1);
    trajectory.push(theta);
    let mut ux = Vec::new();
    let mut ue = Vec::new();
    for n in 0..config.steps {
        let grad = match config.estimator {
            GradientEstimator::Series => {
                let terms = config.window(n).clamp(1, full_terms);
                series_value_and_slope(theta, eps, terms).1
            }
            GradientEstimator::MonteCarlo => {
                let len = (config.mc_window_base + config.window(n)).min(config.mc_window_cap);
                ux.clear();
                ue.clear();
                ux.extend((0..len).map(|_| rng.gen::<f64>()));
                ue.extend((0..len).map(|_| rng.gen::<f64>()));
                let hi = (theta + config.mc_delta).min(1.0);
                let lo = (theta - config.mc_delta).max(0.0);
                (simulated_information(hi, eps, &ux, &ue) - simulated_information(lo, eps, &ux, &ue))
                    / (hi - lo)
            }
        };
        let next = theta + config.step_size(n) * grad;
        if (0.0..=1.0).contains(&next) {
            theta = next;
        }
        trajectory.push(theta);
    }
    Ok(SaRun {
        trajectory,
        point: CapacityPoint {
            eps,
            theta_star: theta,
            capacity: mutual_information(theta, eps, config.tol)?,
            method: CapacityMethod::StochasticApproximation,
            tol: config.tol,
        },
    })
}
