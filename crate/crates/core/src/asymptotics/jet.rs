//! Truncated univariate power series.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Highest order whose coefficients are trusted in double precision.
pub const MAX_JET_ORDER: usize = 12;

/// `c_0 + c_1 ε + … + c_N ε^N`, all arithmetic truncated at order `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorJet {
    coeffs: Vec<f64>,
}

impl TaylorJet {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// `x0 + ε`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Self::constant(x0, order);
        if order > 0 {
            j.coeffs[1] = 1.0;
        }
        j
    }

    /// `ε^k`, zero if `k > order`.
    pub fn monomial(k: usize, order: usize) -> Self {
        let mut j = Self::constant(0.0, order);
        if k <= order {
            j.coeffs[k] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Value of the truncated polynomial at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut j = self.clone();
        j.coeffs[0] += c;
        j
    }

    /// Multiplication by `ε^k`.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.order();
        let mut coeffs = vec![0.0; n + 1];
        if k <= n {
            coeffs[k..].copy_from_slice(&self.coeffs[..=n - k]);
        }
        Self { coeffs }
    }

    pub fn recip(&self) -> Self {
        let a = &self.coeffs;
        assert!(a[0] != 0.0, "reciprocal of a jet with zero constant term");
        let mut q = vec![0.0; a.len()];
        q[0] = 1.0 / a[0];
        for n in 1..a.len() {
            let s: f64 = (1..=n).map(|k| a[k] * q[n - k]).sum();
            q[n] = -s / a[0];
        }
        Self { coeffs: q }
    }

    pub fn div(&self, other: &Self) -> Self {
        self * &other.recip()
    }

    /// Natural logarithm; needs a positive constant term.
    pub fn ln(&self) -> Self {
        let a = &self.coeffs;
        assert!(a[0] > 0.0, "log of a jet with non-positive constant term");
        let mut b = vec![0.0; a.len()];
        b[0] = a[0].ln();
        for n in 1..a.len() {
            let s: f64 = (1..n).map(|k| k as f64 * b[k] * a[n - k]).sum();
            b[n] = (a[n] - s / n as f64) / a[0];
        }
        Self { coeffs: b }
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let mut e = vec![0.0; a.len()];
        e[0] = a[0].exp();
        for n in 1..a.len() {
            let s: f64 = (1..=n).map(|k| k as f64 * a[k] * e[n - k]).sum();
            e[n] = s / n as f64;
        }
        Self { coeffs: e }
    }

    pub fn powi(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(1.0, self.order());
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// `x ln x`, with the constant term required positive.
    pub fn xlog(&self) -> Self {
        self * &self.ln()
    }

    /// Binary entropy `-y ln y - (1-y) ln(1-y)` in nats.
    pub fn binary_entropy(&self) -> Self {
        let one_minus = self.scale(-1.0).add_const(1.0);
        -(&self.xlog() + &one_minus.xlog())
    }

    /// `f ∘ g` where `self` holds the Taylor coefficients of `f` about
    /// `g(0)`, i.e. the result is `Σ_k f_k (g - g_0)^k`.
    pub fn compose(&self, g: &Self) -> Self {
        let order = g.order();
        let mut h = g.clone();
        h.coeffs[0] = 0.0;
        // Horner in the shifted inner series
        let mut acc = Self::constant(0.0, order);
        for &c in self.coeffs.iter().rev() {
            acc = (&acc * &h).add_const(c);
        }
        acc
    }
}

impl Add for &TaylorJet {
    type Output = TaylorJet;
    fn add(self, rhs: &TaylorJet) -> TaylorJet {
        assert_eq!(self.order(), rhs.order(), "jet orders differ");
        TaylorJet::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &TaylorJet {
    type Output = TaylorJet;
    fn sub(self, rhs: &TaylorJet) -> TaylorJet {
        assert_eq!(self.order(), rhs.order(), "jet orders differ");
        TaylorJet::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect())
    }
}

impl Mul for &TaylorJet {
    type Output = TaylorJet;
    fn mul(self, rhs: &TaylorJet) -> TaylorJet {
        assert_eq!(self.order(), rhs.order(), "jet orders differ");
        let n = self.coeffs.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            if self.coeffs[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        TaylorJet::new(c)
    }
}

impl Neg for TaylorJet {
    type Output = TaylorJet;
    fn neg(self) -> TaylorJet {
        self.scale(-1.0)
    }
}

impl Add for TaylorJet {
    type Output = TaylorJet;
    fn add(self, rhs: TaylorJet) -> TaylorJet {
        &self + &rhs
    }
}

impl Sub for TaylorJet {
    type Output = TaylorJet;
    fn sub(self, rhs: TaylorJet) -> TaylorJet {
        &self - &rhs
    }
}

impl Mul for TaylorJet {
    type Output = TaylorJet;
    fn mul(self, rhs: TaylorJet) -> TaylorJet {
        &self * &rhs
    }
}
