//! Small information-theoretic helpers shared by every module.
//!
//! All internal quantities are in nats; [`to_bits`] is the single
//! presentation-layer conversion.

use std::f64::consts::LN_2;

/// Probabilities below this are treated as zero inside logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

/// The golden ratio, Perron eigenvalue of the (1,∞)-RLL constraint.
pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

#[inline]
pub fn to_bits(nats: f64) -> f64 {
    nats / LN_2
}

#[inline]
pub fn to_nats(bits: f64) -> f64 {
    bits * LN_2
}

/// `-p ln p` with the convention `0 ln 0 = 0`.
#[inline]
pub fn neg_plogp(p: f64) -> f64 {
    if p < LOG_FLOOR {
        0.0
    } else {
        -p * p.ln()
    }
}

/// Binary entropy `H(y) = -y ln y - (1-y) ln(1-y)` in nats.
#[inline]
pub fn binary_entropy(y: f64) -> f64 {
    neg_plogp(y) + neg_plogp(1.0 - y)
}

/// Entropy of a probability vector, in nats.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().map(|&x| neg_plogp(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_endpoints_and_midpoint() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((to_bits(binary_entropy(0.5)) - 1.0).abs() < 1e-15);
        assert!((to_bits(binary_entropy(0.2)) - 0.721_928_094_887_362_3).abs() < 1e-15);
    }

    #[test]
    fn unit_conversion_round_trips() {
        assert!((to_nats(to_bits(0.3)) - 0.3).abs() < 1e-16);
    }
}
