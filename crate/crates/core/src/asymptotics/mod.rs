//! Small-ε expansions of the first-order capacity and its maximizer.
//!
//! The linear term for a general constraint comes from conditional
//! entropies of the Parry chain. For the (1,∞)-RLL θ family the full Taylor
//! series is computed with jet arithmetic on the closed forms of
//! `H(X_0 | X_{-n})`: the maximizer `θ_max(ε)` solves
//! `Σ_k ε^k ∂_θ H(X_0|X_{-k-1})(θ) = 0`, which is solved one order at a time,
//! and `C(ε) = (1-ε)² Σ_k ε^k H(X_0|X_{-k-1})(θ_max(ε))`.

mod jet;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use jet::{TaylorJet, MAX_JET_ORDER};

use crate::constraint::ConstraintGraph;
use crate::error::{Error, Result};
use crate::info::{golden_ratio, to_bits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    ThetaMax,
    C1,
    CFb,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ThetaMax => "theta_max",
            Self::C1 => "c1",
            Self::CFb => "c_fb",
        })
    }
}

/// Taylor coefficients in ε. Capacities are in nats, `θ_max` is a
/// probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticExpansion {
    pub quantity: Quantity,
    pub coefficients: Vec<f64>,
    pub order: usize,
}

impl AsymptoticExpansion {
    pub fn is_capacity(&self) -> bool {
        self.quantity != Quantity::ThetaMax
    }

    /// Coefficients in bits for capacities, unchanged for `θ_max`.
    pub fn coefficients_bits(&self) -> Vec<f64> {
        if self.is_capacity() {
            self.coefficients.iter().map(|&c| to_bits(c)).collect()
        } else {
            self.coefficients.clone()
        }
    }

    /// The truncated series at `eps`.
    pub fn eval(&self, eps: f64) -> f64 {
        TaylorJet::new(self.coefficients.clone()).eval(eps)
    }
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_JET_ORDER {
        return Err(Error::Precondition(format!(
            "expansion order {order} is outside 1..={MAX_JET_ORDER}"
        )));
    }
    Ok(())
}

/// `(c0, c1)` in nats with `C(ε) = c0 + c1 ε + O(ε²)`.
///
/// `c1 = Σ_{i=1..m} H(X_0 | X_{[-i-m,-1] ∖ {-i}}) - (m+1) H(X_0 | X_{-m}^{-1})`
/// on the Parry chain of `graph`.
pub fn linear_coefficients(graph: &ConstraintGraph) -> Result<(f64, f64)> {
    let c0 = graph.noiseless_capacity()?;
    let parry = graph.parry_chain()?;
    let m = graph.order() as i64;
    let mut split = 0.0;
    for i in 1..=m {
        let d: Vec<i64> = (-i - m..=-1).filter(|&j| j != -i).collect();
        split += parry.subset_conditional_entropy(&d)?;
    }
    let c1 = split - (m + 1) as f64 * parry.step_conditional_entropy();
    Ok((c0, c1))
}

/// `g_n(θ) = (1 - (-θ)^n) / (1 + θ)` on a jet.
fn g_jet(theta: &TaylorJet, n: usize) -> TaylorJet {
    let recip = theta.add_const(1.0).recip();
    let power = theta.scale(-1.0).powi(n as u32);
    &power.scale(-1.0).add_const(1.0) * &recip
}

/// `H(X_0 | X_{-n})` of the θ chain on a jet.
pub(crate) fn lag_entropy_jet(theta: &TaylorJet, n: usize) -> TaylorJet {
    let f = theta.add_const(1.0).recip();
    let h_next = g_jet(theta, n + 1).binary_entropy();
    let term = &f * &h_next;
    if n == 1 {
        // g_1 ≡ 1 carries no entropy
        return term;
    }
    let h_n = g_jet(theta, n).binary_entropy();
    &term + &(&f.scale(-1.0).add_const(1.0) * &h_n)
}

/// `∂_θ H(X_0 | X_{-n})` of the θ chain on a jet.
fn lag_entropy_slope_jet(theta: &TaylorJet, n: usize) -> TaylorJet {
    let f = theta.add_const(1.0).recip();
    let df = (&f * &f).scale(-1.0);
    let one_minus_f = f.scale(-1.0).add_const(1.0);
    let slope_of = |k: usize| -> (TaylorJet, TaylorJet) {
        let g = g_jet(theta, k);
        let dg = &(&theta.scale(-1.0).powi(k as u32 - 1).scale(k as f64) - &g) * &f;
        // H'(g) = ln(1-g) - ln g
        let dh = &g.scale(-1.0).add_const(1.0).ln() - &g.ln();
        (g.binary_entropy(), &dh * &dg)
    };
    let (h1, s1) = slope_of(n + 1);
    if n == 1 {
        return &(&df * &h1) + &(&f * &s1);
    }
    let (h0, s0) = slope_of(n);
    let a = &df * &(&h1 - &h0);
    let b = &f * &s1;
    let c = &one_minus_f * &s0;
    &(&a + &b) + &c
}

/// `Σ_k ε^k ∂_θ H(X_0|X_{-k-1})` along `θ(ε)`, to the order of the jet.
fn stationarity_jet(theta: &TaylorJet) -> TaylorJet {
    let order = theta.order();
    let mut s = TaylorJet::constant(0.0, order);
    for k in 0..=order {
        s = &s + &lag_entropy_slope_jet(theta, k + 1).shift(k);
    }
    s
}

/// Taylor coefficients of `θ_max(ε)` up to `ε^order`.
pub fn theta_max_taylor(order: usize) -> Result<AsymptoticExpansion> {
    check_order(order)?;
    let lam = golden_ratio();
    let t0 = 1.0 / (lam * lam);
    let curvature = lag_entropy_slope_jet(&TaylorJet::variable(t0, 1), 1).coeff(1);
    if curvature.abs() <= 1e-8 {
        return Err(Error::Precondition(format!(
            "second θ-derivative {curvature} at the noiseless maximizer is too small"
        )));
    }
    let mut coeffs = vec![0.0; order + 1];
    coeffs[0] = t0;
    for n in 1..=order {
        // [ε^n] of the identity is affine in the unknown coefficient
        let residual = stationarity_jet(&TaylorJet::new(coeffs.clone())).coeff(n);
        coeffs[n] = -residual / curvature;
    }
    Ok(AsymptoticExpansion {
        quantity: Quantity::ThetaMax,
        coefficients: coeffs,
        order,
    })
}

/// Taylor coefficients of the first-order capacity up to `ε^order`, nats.
pub fn capacity_taylor(order: usize) -> Result<AsymptoticExpansion> {
    let theta = TaylorJet::new(theta_max_taylor(order)?.coefficients);
    let mut sum = TaylorJet::constant(0.0, order);
    for k in 0..=order {
        sum = &sum + &lag_entropy_jet(&theta, k + 1).shift(k);
    }
    let one_minus = TaylorJet::variable(0.0, order).scale(-1.0).add_const(1.0);
    let c = &(&one_minus * &one_minus) * &sum;
    Ok(AsymptoticExpansion {
        quantity: Quantity::C1,
        coefficients: c.coeffs().to_vec(),
        order,
    })
}

/// Estimates the first `order + 1` Taylor coefficients of `f` at 0 from
/// samples on `[0, points·h]`: polynomial interpolation at `h` and `h/2`
/// followed by one Richardson step per coefficient.
pub fn taylor_from_samples<F>(mut f: F, order: usize, points: usize, h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points < order + 1 || !(h > 0.0) {
        return Err(Error::Precondition(
            "need at least order + 1 sample points and a positive step".into(),
        ));
    }
    let mut fit = |step: f64| -> Result<Vec<f64>> {
        let n = points + 1;
        let v = DMatrix::from_fn(n, n, |i, j| (i as f64).powi(j as i32));
        let y = DVector::from_iterator(n, (0..n).map(|i| f(i as f64 * step)).collect::<Result<Vec<_>>>()?);
        let a = v
            .lu()
            .solve(&y)
            .ok_or(Error::NoConvergence("interpolation solve", 0))?;
        Ok((0..=order).map(|j| a[j] / step.powi(j as i32)).collect())
    };
    let coarse = fit(h)?;
    let fine = fit(h / 2.0)?;
    Ok((0..=order)
        .map(|j| {
            let w = 2f64.powi((points + 1 - j) as i32);
            (w * fine[j] - coarse[j]) / (w - 1.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity_opt::maximize_theta;
    use crate::constraint::ForbiddenWordSet;
    use crate::info::to_nats;
    use crate::markov::RllThetaChain;

    fn graph(preset: &str) -> ConstraintGraph {
        ForbiddenWordSet::preset(preset).unwrap().compile().unwrap()
    }

    #[test]
    fn lag_entropy_jet_value_matches_closed_form() {
        for n in 1..8 {
            let j = lag_entropy_jet(&TaylorJet::variable(0.35, 3), n);
            let direct = RllThetaChain::new(0.35).unwrap().lag_entropy(n);
            assert!((j.value() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn slope_jet_is_derivative_of_value_jet() {
        for n in 1..8 {
            let v = lag_entropy_jet(&TaylorJet::variable(0.42, 4), n);
            let s = lag_entropy_slope_jet(&TaylorJet::variable(0.42, 3), n);
            for k in 0..=3 {
                let lhs = (k + 1) as f64 * v.coeff(k + 1);
                assert!((lhs - s.coeff(k)).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn rll_linear_coefficient() {
        let lam = golden_ratio();
        let (c0, c1) = linear_coefficients(&graph("rll(1,inf)")).unwrap();
        assert!((to_bits(c0) - lam.log2()).abs() < 1e-12);
        assert!((to_bits(c1) + 2.0 / (1.0 + lam * lam)).abs() < 1e-12);
    }

    #[test]
    fn full_shift_linear_coefficient() {
        let (c0, c1) = linear_coefficients(&graph("full(2)")).unwrap();
        assert!((to_bits(c0) - 1.0).abs() < 1e-12);
        assert!((to_bits(c1) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn leading_coefficients() {
        let lam = golden_ratio();
        let t = theta_max_taylor(4).unwrap();
        assert!((t.coefficients[0] - 1.0 / (lam * lam)).abs() < 1e-12);
        let c = capacity_taylor(4).unwrap();
        assert!((c.coefficients_bits()[0] - lam.log2()).abs() < 1e-12);
        let (_, c1) = linear_coefficients(&graph("rll(1,inf)")).unwrap();
        assert!((c.coefficients[1] - c1).abs() < 1e-9);
    }

    #[test]
    fn order_bounds() {
        assert!(theta_max_taylor(0).is_err());
        assert!(theta_max_taylor(13).is_err());
        assert!(theta_max_taylor(12).is_ok());
    }

    #[test]
    fn series_residual_vanishes() {
        let t = theta_max_taylor(6).unwrap();
        let s = stationarity_jet(&TaylorJet::new(t.coefficients));
        for k in 0..=6 {
            assert!(s.coeff(k).abs() < 1e-10, "k={k}: {}", s.coeff(k));
        }
    }

    #[test]
    fn truncated_capacity_matches_optimizer_at_small_eps() {
        let c = capacity_taylor(6).unwrap();
        let eps = 0.05;
        let p = maximize_theta(eps, 1e-12).unwrap();
        let c4 = c.coefficients[4].abs().max(to_nats(1e-3));
        assert!((c.eval(eps) - p.capacity).abs() <= 2.0 * c4 * eps.powi(4));
    }

    #[test]
    fn sample_fit_recovers_polynomial_and_exp() {
        let p = |x: f64| Ok(1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x.powi(3));
        let c = taylor_from_samples(p, 3, 5, 0.1).unwrap();
        for (a, b) in c.iter().zip([1.0, -2.0, 0.5, 3.0]) {
            assert!((a - b).abs() < 1e-9);
        }
        let e = taylor_from_samples(|x: f64| Ok(x.exp()), 3, 6, 0.05).unwrap();
        for (j, a) in e.iter().enumerate() {
            let fact: f64 = (1..=j).map(|i| i as f64).product();
            assert!((a - 1.0 / fact).abs() < 1e-7, "j={j}: {a}");
        }
    }
}
