//! Stationary binary erasure processes.
//!
//! `E_n = 1` means the symbol at time `n` is received, `E_n = 0` that it is
//! erased; the erasure rate is `ε = P(E = 0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{binary_entropy, entropy};

/// Largest index span accepted by [`ErasureProcess::pattern_probability`].
pub const MAX_PATTERN_SPAN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErasureProcess {
    /// i.i.d. erasures with rate `eps`.
    Iid { eps: f64 },
    /// First-order binary chain; `transition[i][j] = P(E_{n+1} = j | E_n = i)`.
    Markov2 {
        transition: [[f64; 2]; 2],
        stationary: [f64; 2],
    },
}

/// JSON form: `{"iid": 0.1}` or `{"markov": [[p00, p01], [p10, p11]]}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum ErasureSpec {
    Iid(f64),
    Markov([[f64; 2]; 2]),
}

impl ErasureProcess {
    pub fn iid(eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidErasure(format!(
                "erasure rate {eps} must lie in [0, 1)"
            )));
        }
        Ok(Self::Iid { eps })
    }

    pub fn markov(transition: [[f64; 2]; 2]) -> Result<Self> {
        for row in &transition {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (row[0] + row[1] - 1.0).abs() > 1e-12
            {
                return Err(Error::InvalidErasure(format!(
                    "row {row:?} is not a probability vector"
                )));
            }
        }
        let leave0 = transition[0][1];
        let leave1 = transition[1][0];
        if leave0 + leave1 == 0.0 {
            return Err(Error::InvalidErasure(
                "identity transition matrix has no unique stationary law".into(),
            ));
        }
        let pi1 = leave0 / (leave0 + leave1);
        if pi1 <= 0.0 {
            return Err(Error::InvalidErasure(
                "stationary probability of reception must be positive".into(),
            ));
        }
        Ok(Self::Markov2 {
            transition,
            stationary: [1.0 - pi1, pi1],
        })
    }

    /// Chain given by `P(1→1)` and `P(0→1)`.
    pub fn markov_from_stay(p11: f64, p01: f64) -> Result<Self> {
        Self::markov([[1.0 - p01, p01], [1.0 - p11, p11]])
    }

    pub fn from_spec(spec: &ErasureSpec) -> Result<Self> {
        match *spec {
            ErasureSpec::Iid(eps) => Self::iid(eps),
            ErasureSpec::Markov(t) => Self::markov(t),
        }
    }

    pub fn to_spec(&self) -> ErasureSpec {
        match *self {
            Self::Iid { eps } => ErasureSpec::Iid(eps),
            Self::Markov2 { transition, .. } => ErasureSpec::Markov(transition),
        }
    }

    pub fn is_iid(&self) -> bool {
        matches!(self, Self::Iid { .. })
    }

    /// `ε = P(E = 0)`.
    pub fn erasure_rate(&self) -> f64 {
        match *self {
            Self::Iid { eps } => eps,
            Self::Markov2 { stationary, .. } => stationary[0],
        }
    }

    fn stationary(&self) -> [f64; 2] {
        match *self {
            Self::Iid { eps } => [eps, 1.0 - eps],
            Self::Markov2 { stationary, .. } => stationary,
        }
    }

    /// `P(E_{i+gap} = to | E_i = from)`.
    pub(crate) fn step(&self, from: usize, to: usize, gap: u64) -> f64 {
        match *self {
            Self::Iid { .. } => self.stationary()[to],
            Self::Markov2 { transition, .. } => {
                let mut m = [[1.0, 0.0], [0.0, 1.0]];
                for _ in 0..gap {
                    m = mul2(&m, &transition);
                }
                m[from][to]
            }
        }
    }

    /// `P(E_i = 1 for i in ones, E_j = 0 for j in zeros)`.
    pub fn pattern_probability(&self, ones: &[i64], zeros: &[i64]) -> Result<f64> {
        if ones.iter().any(|i| zeros.contains(i)) {
            return Err(Error::Precondition(
                "an index cannot be both received and erased".into(),
            ));
        }
        let mut pts: Vec<(i64, usize)> = ones
            .iter()
            .map(|&i| (i, 1))
            .chain(zeros.iter().map(|&i| (i, 0)))
            .collect();
        pts.sort_unstable();
        pts.dedup();
        let Some(&(lo, _)) = pts.first() else {
            return Ok(1.0);
        };
        let span = (pts.last().unwrap().0 - lo) as usize;
        if span > MAX_PATTERN_SPAN {
            return Err(Error::cap("pattern span", MAX_PATTERN_SPAN, span));
        }
        Ok(match *self {
            Self::Iid { eps } => {
                let n1 = pts.iter().filter(|p| p.1 == 1).count() as i32;
                let n0 = pts.len() as i32 - n1;
                (1.0 - eps).powi(n1) * eps.powi(n0)
            }
            Self::Markov2 { .. } => {
                let mut p = self.stationary()[pts[0].1];
                for w in pts.windows(2) {
                    p *= self.step(w[0].1, w[1].1, (w[1].0 - w[0].0) as u64);
                }
                p
            }
        })
    }

    /// `H(E_0 | E_{-n}^{-1})` in nats.
    pub fn conditional_entropy(&self, n: usize) -> f64 {
        match *self {
            Self::Iid { eps } => binary_entropy(eps),
            Self::Markov2 {
                transition,
                stationary,
            } => {
                if n == 0 {
                    entropy(&stationary)
                } else {
                    stationary[0] * entropy(&transition[0]) + stationary[1] * entropy(&transition[1])
                }
            }
        }
    }

    /// Entropy rate `H(E_0 | E_{-∞}^{-1})`.
    pub fn entropy_rate(&self) -> f64 {
        self.conditional_entropy(1)
    }

    /// `P(E_0 = 1` and no run of `m` consecutive 1s in `E_{-n}^{-1})`.
    pub fn prob_received_without_run(&self, n: usize, m: usize) -> f64 {
        // forward pass over (last state, current run length < m)
        let pi = self.stationary();
        let trans = |a: usize, b: usize| self.step(a, b, 1);
        if m == 0 {
            return 0.0;
        }
        // dist[s][r]: probability so far, last symbol s, trailing run of 1s r
        let mut dist = vec![[0.0f64; 2]; m];
        let mut started = false;
        for _ in 0..n {
            let mut next = vec![[0.0f64; 2]; m];
            if !started {
                next[0][0] = pi[0];
                if m > 1 {
                    next[1][1] = pi[1];
                }
                started = true;
            } else {
                for r in 0..m {
                    for s in 0..2 {
                        let w = dist[r][s];
                        if w == 0.0 {
                            continue;
                        }
                        next[0][0] += w * trans(s, 0);
                        if r + 1 < m {
                            next[r + 1][1] += w * trans(s, 1);
                        }
                    }
                }
            }
            dist = next;
        }
        if !started {
            return pi[1];
        }
        dist.iter()
            .map(|d| d[0] * trans(0, 1) + d[1] * trans(1, 1))
            .sum()
    }
}

fn mul2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}
