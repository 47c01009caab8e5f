//! Power-series forms of `I(X;Y)` for i.i.d. erasures.
//!
//! First order: `I = (1-ε)² Σ_k H(X_0 | X_{-k-1}) ε^k`.
//!
//! Order `m`: group the received sets by the most recent run of `m`
//! consecutive receptions `[-k-m, -k-1]`. Between that run and the present,
//! the received positions form a subset `S ⊆ [-(k-1), -1]` containing no run
//! of length `m`, so
//!
//! ```text
//! I = (1-ε)^{m+1} Σ_k Σ_t a(k,t) (1-ε)^t ε^{k-t},
//! a(k,t) = Σ_{|S| = t} H(X_0 | X_{S ∪ [-k-m, -k-1]}).
//! ```

use rayon::prelude::*;

use super::{mask_to_indices, MiResult, Method};
use crate::erasure::ErasureProcess;
use crate::error::{Error, Result};
use crate::markov::{LagEntropies, MarkovInput};

/// Largest `k_max` accepted by [`series_mth_order`].
pub const MAX_K_MAX: usize = 18;
pub const DEFAULT_K_MAX_M2: usize = 14;

const MAX_FIRST_ORDER_TERMS: usize = 1_000_000;

fn require_iid(e: &ErasureProcess) -> Result<f64> {
    match *e {
        ErasureProcess::Iid { eps } => Ok(eps),
        _ => Err(Error::Unsupported(
            "the series forms need i.i.d. erasures; use the finite-window rate".into(),
        )),
    }
}

/// The first `n_terms` terms of the first-order series. The neglected tail
/// is at most `(1-ε) log K ε^{n_terms}`.
pub fn series_first_order_truncated<C: LagEntropies>(
    chain: &C,
    erasure: &ErasureProcess,
    n_terms: usize,
) -> Result<MiResult> {
    let eps = require_iid(erasure)?;
    let lags = chain.lag_entropies(n_terms)?;
    let mut value = 0.0;
    let mut w = 1.0;
    for h in &lags {
        value += h * w;
        w *= eps;
    }
    value *= (1.0 - eps) * (1.0 - eps);
    let tail_bound = (1.0 - eps) * (chain.alphabet_size() as f64).ln() * eps.powi(n_terms as i32);
    Ok(MiResult {
        value,
        method: Method::SeriesFirst,
        truncation: n_terms.saturating_sub(1),
        tail_bound,
    })
}

/// Smallest number of first-order terms whose tail bound
/// `(1-ε) log K ε^{terms}` is below `tol`.
pub(crate) fn terms_for_tol(eps: f64, log_k: f64, tol: f64) -> Result<usize> {
    let mut n_terms = 1;
    let mut bound = (1.0 - eps) * log_k * eps;
    while bound >= tol {
        n_terms += 1;
        bound *= eps;
        if n_terms > MAX_FIRST_ORDER_TERMS {
            return Err(Error::cap("series terms", MAX_FIRST_ORDER_TERMS, n_terms));
        }
    }
    Ok(n_terms)
}

/// First-order series truncated once the tail bound drops below `tol`
/// (nats).
pub fn series_first_order<C: LagEntropies>(
    chain: &C,
    erasure: &ErasureProcess,
    tol: f64,
) -> Result<MiResult> {
    let eps = require_iid(erasure)?;
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance {tol} must be positive")));
    }
    let n_terms = terms_for_tol(eps, (chain.alphabet_size() as f64).ln(), tol)?;
    series_first_order_truncated(chain, erasure, n_terms)
}

/// True when the subset of `[-n, -1]` encoded by `mask` has no `m`
/// consecutive members.
#[inline]
pub fn b2_contains(mask: u32, m: usize) -> bool {
    let mut x = mask;
    for _ in 1..m {
        x &= x >> 1;
    }
    m == 0 || x == 0
}

/// Every subset of `[-n, -1]` without `m` consecutive members, as masks
/// (bit `i` ↔ index `-(i+1)`).
pub fn b2_subsets(n: usize, m: usize) -> impl Iterator<Item = u32> {
    (0u32..(1u32 << n)).filter(move |&mask| b2_contains(mask, m))
}

/// Largest such subset, by enumeration.
pub fn b2_max_cardinality(n: usize, m: usize) -> usize {
    b2_subsets(n, m)
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Closed form `(m-1)⌊n/m⌋ + (n mod m)` for the largest cardinality.
pub fn b_formula(n: usize, m: usize) -> usize {
    (m - 1) * (n / m) + n % m
}

/// `a(k, t)` for `t = 0..=k`.
fn coefficient_row(chain: &MarkovInput, k: usize) -> Result<Vec<f64>> {
    let m = chain.order() as i64;
    let run: Vec<i64> = (1..=m).map(|j| -(k as i64) - j).collect();
    let masks: Vec<u32> = if k == 0 {
        vec![0]
    } else {
        b2_subsets(k - 1, m as usize).collect()
    };
    let terms: Vec<(usize, f64)> = masks
        .par_iter()
        .map(|&mask| {
            let mut d = mask_to_indices(mask);
            d.extend_from_slice(&run);
            chain
                .subset_conditional_entropy(&d)
                .map(|h| (mask.count_ones() as usize, h))
        })
        .collect::<Result<_>>()?;
    let mut row = vec![0.0; k + 1];
    for (t, h) in terms {
        row[t] += h;
    }
    Ok(row)
}

/// `m`-th order series truncated at `k ≤ k_max`.
///
/// The tail bound is `(1-ε) log K · P(no m consecutive receptions in
/// k_max + m slots)`, the mass of all received sets not yet accounted for.
pub fn series_mth_order(chain: &MarkovInput, erasure: &ErasureProcess, k_max: usize) -> Result<MiResult> {
    let eps = require_iid(erasure)?;
    if k_max > MAX_K_MAX {
        return Err(Error::cap("series order k_max", MAX_K_MAX, k_max));
    }
    let m = chain.order();
    let q = 1.0 - eps;
    let mut value = 0.0;
    for k in 0..=k_max {
        let row = coefficient_row(chain, k)?;
        for (t, a) in row.iter().enumerate() {
            if *a != 0.0 {
                value += a * q.powi(t as i32) * eps.powi((k - t) as i32);
            }
        }
    }
    value *= q.powi(m as i32 + 1);
    let tail_bound = (chain.alphabet_size() as f64).ln()
        * erasure.prob_received_without_run(k_max + m, m);
    Ok(MiResult {
        value,
        method: Method::SeriesMth,
        truncation: k_max,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ForbiddenWordSet;
    use crate::info::{golden_ratio, to_bits};
    use crate::markov::RllThetaChain;
    use crate::mi_rate::{mi_rate_finite_n, h_y_given_past_exact};
    use proptest::prelude::*;

    fn rll2_parry() -> MarkovInput {
        ForbiddenWordSet::preset("rll(2,inf)")
            .unwrap()
            .compile()
            .unwrap()
            .parry_chain()
            .unwrap()
    }

    #[test]
    fn b_formula_small_cases() {
        assert_eq!(b_formula(5, 1), 0);
        assert_eq!(b_formula(5, 2), 3);
        assert_eq!(b_formula(7, 3), 5);
        for n in 0..=14 {
            for m in 1..=4 {
                assert_eq!(b2_max_cardinality(n, m), b_formula(n, m), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn run_predicate() {
        assert!(b2_contains(0b0101, 2));
        assert!(!b2_contains(0b0110, 2));
        assert!(b2_contains(0b0110, 3));
        assert!(!b2_contains(0b1, 1));
        assert!(b2_contains(0, 1));
    }

    #[test]
    fn first_order_parry_value() {
        let c = RllThetaChain::parry();
        let e = ErasureProcess::iid(0.0).unwrap();
        let r = series_first_order(&c, &e, 1e-12).unwrap();
        assert!((to_bits(r.value) - golden_ratio().log2()).abs() < 1e-12);
        assert_eq!(r.tail_bound, 0.0);
    }

    #[test]
    fn mth_order_reduces_to_first_order_for_m1() {
        let c = RllThetaChain::new(0.37).unwrap();
        let e = ErasureProcess::iid(0.3).unwrap();
        let a = series_first_order_truncated(&c, &e, 16).unwrap();
        let b = series_mth_order(&c.to_markov(), &e, 15).unwrap();
        assert!((a.value - b.value).abs() < 1e-14);
        assert!((a.tail_bound - b.tail_bound).abs() < 1e-15);
    }

    #[test]
    fn second_order_series_matches_finite_window() {
        let chain = rll2_parry();
        let e = ErasureProcess::iid(0.2).unwrap();
        let s = series_mth_order(&chain, &e, 16).unwrap();
        let f = mi_rate_finite_n(&chain, &e, 20).unwrap();
        assert!(s.tail_bound < 1e-3);
        assert!((s.value - f.value).abs() <= s.tail_bound + f.tail_bound + 1e-12);
    }

    #[test]
    fn first_order_series_is_limit_of_exact_window() {
        let c = RllThetaChain::new(0.4).unwrap();
        let e = ErasureProcess::iid(0.1).unwrap();
        let s = series_first_order(&c, &e, 1e-15).unwrap();
        let h = h_y_given_past_exact(&c.to_markov(), &e, 20).unwrap();
        let hy = s.value + crate::info::binary_entropy(0.1);
        assert!((h - hy).abs() < 1e-12);
    }

    #[test]
    fn markov_erasures_are_rejected() {
        let c = RllThetaChain::parry();
        let e = ErasureProcess::markov_from_stay(0.8, 0.4).unwrap();
        assert!(matches!(
            series_first_order(&c, &e, 1e-9),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn k_max_cap() {
        let e = ErasureProcess::iid(0.1).unwrap();
        assert!(matches!(
            series_mth_order(&rll2_parry(), &e, 19),
            Err(Error::ResourceCap { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn doubling_truncation_stays_within_tail(theta in 0.05f64..0.95, eps in 0.0f64..0.9, n in 2usize..40) {
            let c = RllThetaChain::new(theta).unwrap();
            let e = ErasureProcess::iid(eps).unwrap();
            let a = series_first_order_truncated(&c, &e, n).unwrap();
            let b = series_first_order_truncated(&c, &e, 2 * n).unwrap();
            prop_assert!((a.value - b.value).abs() <= a.tail_bound + 1e-15);
        }

        #[test]
        fn b2_formula_matches_enumeration(n in 0usize..16, m in 1usize..5) {
            prop_assert_eq!(b2_max_cardinality(n, m), b_formula(n, m));
        }
    }
}
