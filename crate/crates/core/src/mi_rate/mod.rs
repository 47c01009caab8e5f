//! Output entropies and mutual information rates of the erasure channel
//! `Y_n = X_n E_n`.
//!
//! The exact route decomposes `H(Y_0 | Y_{-n}^{-1})` over the set `D` of
//! received positions in the window:
//!
//! ```text
//! H(Y_0 | Y_{-n}^{-1}) = H(E_0 | E_{-n}^{-1})
//!     + Σ_{D ⊆ [-n,-1]} H(X_0 | X_D) · P(E_0 = 1, E_D = 1, E_{D^c} = 0)
//! ```
//!
//! Subtracting `H(E_0 | E_{-n}^{-1})` gives a finite-window approximation
//! of `I(X;Y)` that decreases to the rate as `n` grows. For i.i.d.
//! erasures and Markov inputs the same sum rearranges into power series in
//! `ε`, see [`series_first_order`] and [`series_mth_order`].

mod brute;
mod series;

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use brute::{brute_force_h_y, BRUTE_MAX_ALPHABET, BRUTE_MAX_N};
pub(crate) use series::terms_for_tol;
pub use series::{
    b2_contains, b2_max_cardinality, b2_subsets, b_formula, series_first_order,
    series_first_order_truncated, series_mth_order, DEFAULT_K_MAX_M2, MAX_K_MAX,
};

use crate::erasure::ErasureProcess;
use crate::error::{Error, Result};
use crate::info::to_bits;
use crate::markov::{LagEntropies, MarkovInput};

/// Largest window accepted by the exact subset enumeration.
pub const MAX_EXACT_N: usize = 22;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactLemma1,
    SeriesFirst,
    SeriesMth,
    FiniteN,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ExactLemma1 => "exact_lemma1",
            Method::SeriesFirst => "series_first",
            Method::SeriesMth => "series_mth",
            Method::FiniteN => "finite_n",
            Method::BruteForce => "brute_force",
        })
    }
}

/// A rate in nats with the truncation that produced it and a bound on the
/// distance to the untruncated value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiResult {
    pub value: f64,
    pub method: Method,
    /// Window length `n` or series truncation index.
    pub truncation: usize,
    pub tail_bound: f64,
}

impl MiResult {
    pub fn value_bits(&self) -> f64 {
        to_bits(self.value)
    }

    pub fn tail_bound_bits(&self) -> f64 {
        to_bits(self.tail_bound)
    }
}

/// Probability of the received/erased pattern `(E_{-n}, …, E_{-1}, E_0 = 1)`
/// encoded as a mask (bit `i` ↔ index `-(i+1)`).
struct PatternTable {
    n: usize,
    kind: PatternKind,
}

enum PatternKind {
    Iid { pow_recv: Vec<f64>, pow_erased: Vec<f64> },
    Markov { t: [[f64; 2]; 2], pi: [f64; 2] },
}

impl PatternTable {
    fn new(e: &ErasureProcess, n: usize) -> Self {
        let kind = match *e {
            ErasureProcess::Iid { eps } => PatternKind::Iid {
                pow_recv: (0..=n + 1).map(|k| (1.0 - eps).powi(k as i32)).collect(),
                pow_erased: (0..=n).map(|k| eps.powi(k as i32)).collect(),
            },
            ErasureProcess::Markov2 {
                transition,
                stationary,
            } => PatternKind::Markov {
                t: transition,
                pi: stationary,
            },
        };
        Self { n, kind }
    }

    #[inline]
    fn prob(&self, mask: u32) -> f64 {
        let n = self.n;
        match &self.kind {
            PatternKind::Iid {
                pow_recv,
                pow_erased,
            } => {
                let ones = mask.count_ones() as usize;
                pow_recv[ones + 1] * pow_erased[n - ones]
            }
            PatternKind::Markov { t, pi } => {
                if n == 0 {
                    return pi[1];
                }
                let bit = |i: usize| ((mask >> i) & 1) as usize;
                let mut p = pi[bit(n - 1)];
                for i in (1..n).rev() {
                    p *= t[bit(i)][bit(i - 1)];
                }
                p * t[bit(0)][1]
            }
        }
    }
}

/// `H(X_0 | X_D)` for every received set `D ⊆ [-n, -1]`, memoised on the
/// part of `D` that the Markov property leaves relevant.
struct ConditionalEntropyTable {
    order: usize,
    marginal: f64,
    by_lag: Vec<f64>,
    by_key: HashMap<u32, f64>,
}

impl ConditionalEntropyTable {
    fn new(chain: &MarkovInput, n: usize) -> Result<Self> {
        let order = chain.order();
        let marginal = chain.marginal_entropy();
        if order == 1 {
            // only the most recent received index matters
            return Ok(Self {
                order,
                marginal,
                by_lag: chain.lag_entropies(n)?,
                by_key: HashMap::new(),
            });
        }
        let mut by_key = HashMap::new();
        for mask in 0..(1u32 << n) {
            let key = relevant_part(mask, order);
            if by_key.contains_key(&key) {
                continue;
            }
            let d = mask_to_indices(key);
            by_key.insert(key, chain.subset_conditional_entropy(&d)?);
        }
        Ok(Self {
            order,
            marginal,
            by_lag: Vec::new(),
            by_key,
        })
    }

    #[inline]
    fn get(&self, mask: u32) -> f64 {
        if mask == 0 {
            self.marginal
        } else if self.order == 1 {
            self.by_lag[mask.trailing_zeros() as usize]
        } else {
            self.by_key[&relevant_part(mask, self.order)]
        }
    }
}

/// Drops every received index older than the most recent run of `m`
/// consecutive received indices; an `m`-th order chain forgets them.
fn relevant_part(mask: u32, m: usize) -> u32 {
    let mut run = 0;
    for i in 0..32 {
        if (mask >> i) & 1 == 1 {
            run += 1;
            if run == m {
                return mask & ((1u64 << (i + 1)) - 1) as u32;
            }
        } else {
            run = 0;
        }
    }
    mask
}

pub(crate) fn mask_to_indices(mask: u32) -> Vec<i64> {
    (0..32)
        .filter(|i| (mask >> i) & 1 == 1)
        .map(|i| -(i as i64) - 1)
        .collect()
}

fn check_window(n: usize) -> Result<()> {
    if n > MAX_EXACT_N {
        Err(Error::cap("window length n", MAX_EXACT_N, n))
    } else {
        Ok(())
    }
}

/// `Σ_D H(X_0|X_D) P(E_0=1, E_D=1, E_{D^c}=0)` over `D ⊆ [-n,-1]`.
fn received_information(chain: &MarkovInput, erasure: &ErasureProcess, n: usize) -> Result<f64> {
    check_window(n)?;
    let entropies = ConditionalEntropyTable::new(chain, n)?;
    let patterns = PatternTable::new(erasure, n);
    let total = 1usize << n;
    // fixed chunks summed in order: the result does not depend on scheduling
    let partial: Vec<f64> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            (lo..hi)
                .map(|mask| {
                    let mask = mask as u32;
                    entropies.get(mask) * patterns.prob(mask)
                })
                .sum::<f64>()
        })
        .collect();
    Ok(partial.iter().sum())
}

/// `H(Y_0 | Y_{-n}^{-1})` in nats, exact up to rounding, `n ≤ 22`.
pub fn h_y_given_past_exact(chain: &MarkovInput, erasure: &ErasureProcess, n: usize) -> Result<f64> {
    Ok(erasure.conditional_entropy(n) + received_information(chain, erasure, n)?)
}

/// `H(Y_0|Y_{-n}^{-1}) - H(E_0|E_{-n}^{-1})`, which upper-bounds `I(X;Y)`
/// and converges to it.
///
/// The reported bound is `log K · P(E_0 = 1, no m consecutive receptions
/// in E_{-n}^{-1})`, which dominates the distance to the limit.
pub fn mi_rate_finite_n(chain: &MarkovInput, erasure: &ErasureProcess, n: usize) -> Result<MiResult> {
    let value = received_information(chain, erasure, n)?;
    let tail_bound = (chain.alphabet_size() as f64).ln()
        * erasure.prob_received_without_run(n, chain.order());
    Ok(MiResult {
        value,
        method: Method::FiniteN,
        truncation: n,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ForbiddenWordSet;
    use crate::info::{binary_entropy, golden_ratio};
    use crate::markov::RllThetaChain;

    fn m2() -> ErasureProcess {
        ErasureProcess::markov_from_stay(0.9, 0.5).unwrap()
    }

    #[test]
    fn window_zero_is_marginal() {
        let c = RllThetaChain::new(0.3).unwrap();
        let e = ErasureProcess::iid(0.2).unwrap();
        let h = h_y_given_past_exact(&c.to_markov(), &e, 0).unwrap();
        let expected = binary_entropy(0.2) + 0.8 * c.marginal_entropy();
        assert!((h - expected).abs() < 1e-15);
    }

    #[test]
    fn uniform_input_gives_one_bit_per_reception() {
        let u = MarkovInput::uniform(2).unwrap();
        for eps in [0.0, 0.25, 0.6] {
            let e = ErasureProcess::iid(eps).unwrap();
            let h = h_y_given_past_exact(&u, &e, 3).unwrap();
            assert!((to_bits(h - binary_entropy(eps)) - (1.0 - eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn pattern_table_matches_pattern_probability() {
        for e in [ErasureProcess::iid(0.3).unwrap(), m2()] {
            let n = 6;
            let table = PatternTable::new(&e, n);
            for mask in 0u32..(1 << n) {
                let mut ones = mask_to_indices(mask);
                ones.push(0);
                let zeros = mask_to_indices(!mask & ((1 << n) - 1));
                let p = e.pattern_probability(&ones, &zeros).unwrap();
                assert!((table.prob(mask) - p).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn relevant_part_truncates_after_run() {
        // indices -1, -2 received (run of 2), -4 older
        assert_eq!(relevant_part(0b1011, 2), 0b11);
        assert_eq!(relevant_part(0b1010, 2), 0b1010);
        assert_eq!(relevant_part(0b1010, 1), 0b10);
    }

    #[test]
    fn finite_n_decreases_with_markov_erasures() {
        let c = RllThetaChain::new(0.4).unwrap().to_markov();
        let e = m2();
        let mut prev = f64::INFINITY;
        for n in 0..=20 {
            let r = mi_rate_finite_n(&c, &e, n).unwrap();
            assert!(r.value.is_finite());
            assert!(r.value <= prev + 1e-14, "n={n}");
            prev = r.value;
        }
    }

    #[test]
    fn second_order_exact_matches_brute_force() {
        let chain = ForbiddenWordSet::preset("rll(2,inf)")
            .unwrap()
            .compile()
            .unwrap()
            .parry_chain()
            .unwrap();
        for e in [ErasureProcess::iid(0.3).unwrap(), m2()] {
            for n in 0..=6 {
                let a = h_y_given_past_exact(&chain, &e, n).unwrap();
                let b = brute_force_h_y(&chain, &e, n).unwrap();
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn window_cap() {
        let u = MarkovInput::uniform(2).unwrap();
        let e = ErasureProcess::iid(0.1).unwrap();
        assert!(matches!(
            h_y_given_past_exact(&u, &e, 23),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn finite_n_tail_bound_covers_limit() {
        let lam = golden_ratio();
        let c = RllThetaChain::new(1.0 / (lam * lam)).unwrap();
        let e = ErasureProcess::iid(0.4).unwrap();
        let limit = series_first_order(&c, &e, 1e-14).unwrap().value;
        for n in [2, 5, 10, 15] {
            let r = mi_rate_finite_n(&c.to_markov(), &e, n).unwrap();
            assert!(r.value >= limit - 1e-13);
            assert!(r.value - limit <= r.tail_bound + 1e-13, "n={n}");
        }
    }
}
