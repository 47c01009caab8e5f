//! Direct evaluation of `H(Y_0 | Y_{-n}^{-1})` from the joint law of
//! output strings. Exponential in `n`; used to cross-check the other
//! routes on small cases.

use crate::erasure::ErasureProcess;
use crate::error::{Error, Result};
use crate::info::neg_plogp;
use crate::markov::MarkovInput;

pub const BRUTE_MAX_N: usize = 10;
pub const BRUTE_MAX_ALPHABET: usize = 3;

/// Neumaier-compensated sum; there are up to `(K+1)^{n+1}` tiny terms.
#[derive(Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

struct Walker<'a> {
    chain: &'a MarkovInput,
    erasure: &'a ErasureProcess,
    n: usize,
    last_symbol: Vec<u8>,
    /// H(Y_{-n}^{-1}) and H(Y_{-n}^0) accumulators.
    prefix: Sum,
    full: Sum,
}

impl Walker<'_> {
    /// `alpha[u]` = P(y so far, block ending at the current position = u)
    /// given the erasure pattern; `e_prob` is the pattern probability.
    fn visit(&mut self, depth: usize, alpha: &[f64], e_prob: f64, last_e: usize) {
        if depth == self.n {
            self.prefix.add(neg_plogp(e_prob * alpha.iter().sum::<f64>()));
        }
        let k = self.chain.alphabet_size();
        let kernel = self.chain.kernel();
        for y in 0..=k {
            let e = usize::from(y != 0);
            let pe = if depth == 0 {
                let rate = self.erasure.erasure_rate();
                if e == 1 {
                    1.0 - rate
                } else {
                    rate
                }
            } else {
                self.erasure.step(last_e, e, 1)
            };
            if pe == 0.0 {
                continue;
            }
            let mut next = vec![0.0; alpha.len()];
            if depth == 0 {
                next.copy_from_slice(self.chain.stationary_distribution());
            } else {
                for (u, &w) in alpha.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for (a, &q) in kernel[u].iter().enumerate() {
                        if q > 0.0 {
                            let v = self.chain.successor(u, a as u8 + 1).expect("valid chain");
                            next[v] += w * q;
                        }
                    }
                }
            }
            if y != 0 {
                for (v, w) in next.iter_mut().enumerate() {
                    if self.last_symbol[v] != y as u8 {
                        *w = 0.0;
                    }
                }
            }
            let p = e_prob * pe;
            if depth == self.n {
                self.full.add(neg_plogp(p * next.iter().sum::<f64>()));
            } else {
                if next.iter().all(|&w| w == 0.0) {
                    continue;
                }
                self.visit(depth + 1, &next, p, e);
            }
        }
    }
}

/// `H(Y_0 | Y_{-n}^{-1})` in nats by enumerating every output string of
/// length `n + 1`. Limited to `n ≤ 10` and `K ≤ 3`.
pub fn brute_force_h_y(chain: &MarkovInput, erasure: &ErasureProcess, n: usize) -> Result<f64> {
    if n > BRUTE_MAX_N {
        return Err(Error::cap("brute-force window n", BRUTE_MAX_N, n));
    }
    if chain.alphabet_size() > BRUTE_MAX_ALPHABET {
        return Err(Error::cap(
            "brute-force alphabet size",
            BRUTE_MAX_ALPHABET,
            chain.alphabet_size(),
        ));
    }
    let last_symbol = chain
        .states()
        .iter()
        .map(|s| *s.last().expect("non-empty block"))
        .collect();
    let mut w = Walker {
        chain,
        erasure,
        n,
        last_symbol,
        prefix: Sum::default(),
        full: Sum::default(),
    };
    let start = vec![0.0; chain.states().len()];
    w.visit(0, &start, 1.0, 0);
    let prefix = if n == 0 { 0.0 } else { w.prefix.value() };
    Ok(w.full.value() - prefix)
}
