//! Feedback capacity of the (1,∞)-RLL erasure channel,
//! `C_FB(ε) = max_{0 ≤ p ≤ 1/2} H(p) / (p + 1/(1-ε))`, and its comparison
//! with the first-order capacity without feedback.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{check_order, AsymptoticExpansion, Quantity, TaylorJet};
use crate::capacity_opt::maximize_theta;
use crate::error::{Error, Result};
use crate::info::{binary_entropy, golden_ratio, to_bits};
use crate::optimize::{bisect, golden_section_max};

/// Largest allowed gap between the fixed-point value and a direct search
/// of the objective, nats.
const CROSS_CHECK_TOL: f64 = 1e-10;

/// `c_fb` in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackPoint {
    pub eps: f64,
    pub p_star: f64,
    pub c_fb: f64,
}

impl FeedbackPoint {
    pub fn c_fb_bits(&self) -> f64 {
        to_bits(self.c_fb)
    }
}

fn objective(p: f64, eps: f64) -> f64 {
    binary_entropy(p) / (p + 1.0 / (1.0 - eps))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Precondition(format!("ε = {eps} is outside [0, 1)")));
    }
    Ok(())
}

/// The maximizer solves `p = (1-p)^{2-ε}`; it is found by bisection and the
/// resulting value checked against a golden-section search of the
/// objective.
pub fn feedback_capacity(eps: f64) -> Result<FeedbackPoint> {
    check_eps(eps)?;
    let p_star = bisect(|p| Ok(p - (1.0 - p).powf(2.0 - eps)), 0.0, 0.5, 0.0)?;
    let c_fb = objective(p_star, eps);
    let (_, direct) = golden_section_max(|p| Ok(objective(p, eps)), 0.0, 0.5, 1e-9)?;
    if (direct - c_fb).abs() > CROSS_CHECK_TOL {
        return Err(Error::NoConvergence("feedback fixed point cross-check", 0));
    }
    Ok(FeedbackPoint { eps, p_star, c_fb })
}

/// `(c0, c1)` in nats: `C_FB = ln λ - (λ²/(λ²+1)) ln λ · ε + O(ε²)`.
pub fn feedback_asymptotics() -> (f64, f64) {
    let lam = golden_ratio();
    let l2 = lam * lam;
    (lam.ln(), -l2 / (l2 + 1.0) * lam.ln())
}

/// Taylor coefficients of `C_FB(ε)` in nats: `p(ε)` solves
/// `ln p - (2-ε) ln(1-p) = 0` order by order, then the objective is
/// evaluated on the jet.
pub fn feedback_taylor(order: usize) -> Result<AsymptoticExpansion> {
    check_order(order)?;
    let lam = golden_ratio();
    let p0 = 1.0 / (lam * lam);
    let eps = TaylorJet::variable(0.0, order);
    let two_minus_eps = eps.scale(-1.0).add_const(2.0);
    let identity = |p: &TaylorJet| &p.ln() - &(&two_minus_eps * &p.scale(-1.0).add_const(1.0).ln());
    let slope = 1.0 / p0 + 2.0 / (1.0 - p0);
    let mut coeffs = vec![0.0; order + 1];
    coeffs[0] = p0;
    for n in 1..=order {
        let residual = identity(&TaylorJet::new(coeffs.clone())).coeff(n);
        coeffs[n] = -residual / slope;
    }
    let p = TaylorJet::new(coeffs);
    let inv = eps.scale(-1.0).add_const(1.0).recip();
    let c = p.binary_entropy().div(&(&p + &inv));
    Ok(AsymptoticExpansion {
        quantity: Quantity::CFb,
        coefficients: c.coeffs().to_vec(),
        order,
    })
}

/// `(1-ε) ln K`, the capacity of the unconstrained erasure channel with or
/// without feedback, in nats.
pub fn unconstrained_capacity(alphabet_size: usize, eps: f64) -> Result<f64> {
    if alphabet_size < 2 {
        return Err(Error::Precondition("alphabet size must be at least 2".into()));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Precondition(format!("ε = {eps} is outside [0, 1]")));
    }
    Ok((1.0 - eps) * (alphabet_size as f64).ln())
}

/// One row of the feedback comparison, nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub eps: f64,
    pub p_star: f64,
    pub c_fb: f64,
    pub c1: f64,
    pub gap: f64,
}

/// `C_FB` beside the first-order capacity on a grid. The gap is
/// descriptive only: the first-order capacity is a lower bound on the
/// capacity without feedback.
pub fn feedback_gain_curve(grid: &[f64], tol: f64) -> Result<Vec<GainRow>> {
    grid.iter().try_for_each(|&e| check_eps(e))?;
    grid.par_iter()
        .map(|&eps| {
            let fb = feedback_capacity(eps)?;
            let c1 = maximize_theta(eps, tol)?.capacity;
            Ok(GainRow {
                eps,
                p_star: fb.p_star,
                c_fb: fb.c_fb,
                c1,
                gap: fb.c_fb - c1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::capacity_taylor;

    #[test]
    fn noiseless_point() {
        let lam = golden_ratio();
        let p = feedback_capacity(0.0).unwrap();
        assert!((p.p_star - 1.0 / (lam * lam)).abs() < 1e-12);
        assert!((p.c_fb_bits() - lam.log2()).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_residual_and_maximality() {
        for i in 0..20 {
            let eps = i as f64 * 0.05;
            let p = feedback_capacity(eps).unwrap();
            assert!((p.p_star - (1.0 - p.p_star).powf(2.0 - eps)).abs() <= 1e-12);
            assert!(objective(p.p_star + 1e-6, eps) < p.c_fb);
            assert!(objective(p.p_star - 1e-6, eps) < p.c_fb);
        }
    }

    #[test]
    fn maximizer_tends_to_half() {
        let p = feedback_capacity(1.0 - 1e-9).unwrap();
        assert!((p.p_star - 0.5).abs() < 1e-6);
        assert!(feedback_capacity(1.0).is_err());
    }

    #[test]
    fn value_has_log_form_at_optimum() {
        for eps in [0.0, 0.3, 0.7] {
            let p = feedback_capacity(eps).unwrap();
            let alt = -(1.0 - eps) * p.p_star.ln() / (2.0 - eps);
            assert!((alt - p.c_fb).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_series_agrees_with_closed_asymptotics() {
        let (c0, c1) = feedback_asymptotics();
        let t = feedback_taylor(6).unwrap();
        assert!((t.coefficients[0] - c0).abs() < 1e-13);
        assert!((t.coefficients[1] - c1).abs() < 1e-12);
        let eps = 0.02;
        let exact = feedback_capacity(eps).unwrap().c_fb;
        assert!((t.eval(eps) - exact).abs() < 1e-10);
    }

    #[test]
    fn feedback_slope_is_shallower() {
        let (_, fb) = feedback_asymptotics();
        let c = capacity_taylor(1).unwrap();
        let diff = to_bits(fb - c.coefficients[1]);
        assert!((diff - 0.0505).abs() < 1e-4, "{diff}");
    }

    #[test]
    fn unconstrained_values() {
        assert!((to_bits(unconstrained_capacity(2, 0.25).unwrap()) - 0.75).abs() < 1e-15);
        assert!((to_bits(unconstrained_capacity(4, 0.0).unwrap()) - 2.0).abs() < 1e-15);
        assert!(unconstrained_capacity(1, 0.0).is_err());
    }

    #[test]
    fn gain_curve() {
        let rows = feedback_gain_curve(&[0.0, 0.1, 0.5], 1e-11).unwrap();
        assert!(rows[0].gap.abs() < 2e-11);
        assert!(to_bits(rows[1].gap) > 1e-3);
        assert!(rows.iter().all(|r| r.gap >= -1e-12));
    }
}
