//! Stationary `m`-th order Markov input chains and the conditional
//! entropies `H(X_0 | X_D)` that every rate formula is built from.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::constraint::{display_word, ConstraintGraph};
use crate::error::{Error, Result};
use crate::info::{binary_entropy, entropy, neg_plogp, LOG_FLOOR};

/// Largest `-min(D)` accepted by [`MarkovInput::subset_conditional_entropy`].
pub const MAX_SUBSET_SPAN: usize = 24;

const ROW_TOL: f64 = 1e-12;

/// A stationary `m`-th order chain on `{1, …, K}`, stored as a first-order
/// chain on its `m`-blocks.
#[derive(Debug, Clone)]
pub struct MarkovInput {
    alphabet_size: usize,
    order: usize,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `kernel[u][a]` = P(next symbol `a + 1` | current block `u`).
    kernel: Vec<Vec<f64>>,
    /// Block reached from `u` by emitting `a + 1`, when it is a state.
    successor: Vec<Vec<Option<usize>>>,
    stationary: Vec<f64>,
}

impl MarkovInput {
    pub fn new(
        alphabet_size: usize,
        order: usize,
        states: Vec<Vec<u8>>,
        kernel: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidChain(msg));
        if order == 0 {
            return bad("order must be at least 1".into());
        }
        if alphabet_size < 2 || alphabet_size > u8::MAX as usize {
            return bad(format!("alphabet size {alphabet_size} out of range"));
        }
        if states.is_empty() || states.len() != kernel.len() {
            return bad(format!(
                "{} states but {} kernel rows",
                states.len(),
                kernel.len()
            ));
        }
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if s.len() != order {
                return bad(format!("state {} is not an {order}-block", display_word(s)));
            }
            if s.iter().any(|&a| a == 0 || a as usize > alphabet_size) {
                return bad(format!("state {} has symbols outside the alphabet", display_word(s)));
            }
            if index.insert(s.clone(), i).is_some() {
                return bad(format!("duplicate state {}", display_word(s)));
            }
        }
        let mut successor = Vec::with_capacity(states.len());
        for (s, row) in states.iter().zip(&kernel) {
            if row.len() != alphabet_size {
                return bad(format!("kernel row for {} has wrong length", display_word(s)));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
                return bad(format!("kernel row for {} has invalid entries", display_word(s)));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL {
                return bad(format!(
                    "kernel row for {} sums to {sum}",
                    display_word(s)
                ));
            }
            let succ: Vec<Option<usize>> = (1..=alphabet_size as u8)
                .map(|a| {
                    let mut next = s[1..].to_vec();
                    next.push(a);
                    index.get(&next).copied()
                })
                .collect();
            for (a, (&p, nxt)) in row.iter().zip(&succ).enumerate() {
                if p > 0.0 && nxt.is_none() {
                    return bad(format!(
                        "state {} emits {} into a block that is not a state",
                        display_word(s),
                        a + 1
                    ));
                }
            }
            successor.push(succ);
        }

        let mut chain = Self {
            alphabet_size,
            order,
            states,
            index,
            kernel,
            successor,
            stationary: Vec::new(),
        };
        chain.stationary = chain.solve_stationary()?;
        Ok(chain)
    }

    /// i.i.d. symbols with the given law, as a first-order chain.
    pub fn iid(probs: &[f64]) -> Result<Self> {
        let k = probs.len();
        let states = (1..=k as u8).map(|a| vec![a]).collect();
        Self::new(k, 1, states, vec![probs.to_vec(); k])
    }

    /// i.i.d. uniform symbols over `{1, …, K}`.
    pub fn uniform(alphabet_size: usize) -> Result<Self> {
        Self::iid(&vec![1.0 / alphabet_size as f64; alphabet_size])
    }

    pub fn from_spec(spec: &ChainSpec) -> Result<Self> {
        match spec {
            ChainSpec::Theta { theta } => Ok(RllThetaChain::new(*theta)?.to_markov()),
            ChainSpec::Kernel { order, kernel } => {
                let alphabet_size = kernel
                    .values()
                    .next()
                    .map(Vec::len)
                    .ok_or_else(|| Error::InvalidChain("empty kernel".into()))?;
                let mut states = Vec::new();
                let mut rows = Vec::new();
                for (block, row) in kernel {
                    let s = block
                        .chars()
                        .map(|c| {
                            c.to_digit(10)
                                .filter(|&d| d > 0)
                                .map(|d| d as u8)
                                .ok_or_else(|| {
                                    Error::InvalidChain(format!("bad block {block:?}"))
                                })
                        })
                        .collect::<Result<Vec<u8>>>()?;
                    states.push(s);
                    rows.push(row.clone());
                }
                Self::new(alphabet_size, *order, states, rows)
            }
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn state_index(&self, block: &[u8]) -> Option<usize> {
        self.index.get(block).copied()
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn successor(&self, state: usize, symbol: u8) -> Option<usize> {
        self.successor[state][symbol as usize - 1]
    }

    /// Stationary law on the `m`-blocks.
    pub fn stationary_distribution(&self) -> &[f64] {
        &self.stationary
    }

    /// Transition matrix of the induced first-order chain on blocks.
    pub fn block_transition_matrix(&self) -> DMatrix<f64> {
        let n = self.states.len();
        let mut p = DMatrix::zeros(n, n);
        for u in 0..n {
            for (a, &q) in self.kernel[u].iter().enumerate() {
                if let Some(v) = self.successor[u][a] {
                    p[(u, v)] += q;
                }
            }
        }
        p
    }

    /// Zero probability on every transition the graph forbids, and every
    /// state a vertex of the graph.
    pub fn is_supported_on(&self, graph: &ConstraintGraph) -> bool {
        if graph.order() != self.order || graph.alphabet_size() != self.alphabet_size {
            return false;
        }
        self.states.iter().enumerate().all(|(u, s)| {
            let Some(gu) = graph.vertex_index(s) else {
                return self.stationary[u] == 0.0;
            };
            self.kernel[u].iter().enumerate().all(|(a, &p)| {
                p == 0.0
                    || self.successor[u][a]
                        .and_then(|v| graph.vertex_index(&self.states[v]))
                        .is_some_and(|gv| graph.has_edge(gu, gv))
            })
        })
    }

    fn solve_stationary(&self) -> Result<Vec<f64>> {
        let n = self.states.len();
        let p = self.block_transition_matrix();

        // A unique stationary law needs exactly one closed class.
        let mut g = DiGraph::<(), ()>::with_capacity(n, n);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for u in 0..n {
            for v in 0..n {
                if p[(u, v)] > 0.0 {
                    g.add_edge(nodes[u], nodes[v], ());
                }
            }
        }
        let sccs = tarjan_scc(&g);
        let mut component = vec![0usize; n];
        for (c, scc) in sccs.iter().enumerate() {
            for node in scc {
                component[node.index()] = c;
            }
        }
        let closed = (0..sccs.len())
            .filter(|&c| {
                (0..n)
                    .filter(|&u| component[u] == c)
                    .all(|u| (0..n).all(|v| p[(u, v)] == 0.0 || component[v] == c))
            })
            .count();
        if closed != 1 {
            return Err(Error::InvalidChain(format!(
                "chain has {closed} closed classes; stationary law is not unique"
            )));
        }

        // Solve π (P − I) = 0 with the last equation replaced by Σπ = 1.
        let mut m = p.transpose() - DMatrix::identity(n, n);
        for j in 0..n {
            m[(n - 1, j)] = 1.0;
        }
        let mut rhs = DVector::zeros(n);
        rhs[n - 1] = 1.0;
        let pi = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidChain("singular stationary system".into()))?;
        let mut pi: Vec<f64> = pi.iter().map(|&x| x.max(0.0)).collect();
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= s);
        Ok(pi)
    }

    /// Law of a single symbol `X_0`.
    pub fn marginal(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.alphabet_size];
        for (s, &w) in self.states.iter().zip(&self.stationary) {
            q[*s.last().unwrap() as usize - 1] += w;
        }
        q
    }

    pub fn marginal_entropy(&self) -> f64 {
        entropy(&self.marginal())
    }

    /// `H(X_0 | X_{-m}^{-1})`, the entropy rate of the chain.
    pub fn step_conditional_entropy(&self) -> f64 {
        self.stationary
            .iter()
            .zip(&self.kernel)
            .map(|(&w, row)| w * entropy(row))
            .sum()
    }

    fn require_first_order(&self, op: &str) -> Result<()> {
        if self.order == 1 {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{op} is defined for first-order chains; use subset_conditional_entropy for order {}",
                self.order
            )))
        }
    }

    /// `H(X_0 | X_{-k-1})` for a first-order chain.
    pub fn gap_conditional_entropy(&self, k: usize) -> Result<f64> {
        self.require_first_order("gap_conditional_entropy")?;
        let p = self.block_transition_matrix();
        let pk = p.pow((k + 1) as u32);
        Ok(self.weighted_row_entropy(&pk))
    }

    fn weighted_row_entropy(&self, p: &DMatrix<f64>) -> f64 {
        // for a first-order chain the blocks are single symbols, so rows of
        // the block matrix are laws of X_0
        (0..p.nrows())
            .map(|u| {
                let row: f64 = (0..p.ncols()).map(|v| neg_plogp(p[(u, v)])).sum();
                self.stationary[u] * row
            })
            .sum()
    }

    /// `H(X_0 | X_D)` for a set of negative indices `D`.
    ///
    /// The joint law of `(X_D, X_0)` is obtained by a forward pass over the
    /// block chain from `min(D)` to `-1`, summing out unobserved positions.
    pub fn subset_conditional_entropy(&self, d: &[i64]) -> Result<f64> {
        if d.iter().any(|&i| i >= 0) {
            return Err(Error::Precondition(
                "conditioning indices must be negative".into(),
            ));
        }
        let Some(&first) = d.iter().min() else {
            return Ok(self.marginal_entropy());
        };
        let span = (-first) as usize;
        if span > MAX_SUBSET_SPAN {
            return Err(Error::cap("conditioning span", MAX_SUBSET_SPAN, span));
        }
        let m = self.order as i64;
        let mut observed = d.to_vec();
        observed.sort_unstable();
        observed.dedup();
        let is_observed = |p: i64| observed.binary_search(&p).is_ok();

        // block ending at `end` covers [end - m + 1, end]
        let end = (first + m - 1).min(-1);
        let mut layer: BTreeMap<(Vec<u8>, usize), f64> = BTreeMap::new();
        for (u, &w) in self.stationary.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let block = &self.states[u];
            let key: Vec<u8> = (0..m)
                .filter(|&j| is_observed(end - m + 1 + j))
                .map(|j| block[j as usize])
                .collect();
            *layer.entry((key, u)).or_insert(0.0) += w;
        }
        for pos in end + 1..=-1 {
            let obs = is_observed(pos);
            let mut next: BTreeMap<(Vec<u8>, usize), f64> = BTreeMap::new();
            for ((key, u), w) in layer {
                for (a, &q) in self.kernel[u].iter().enumerate() {
                    if q == 0.0 {
                        continue;
                    }
                    let v = self.successor[u][a].expect("validated successor");
                    let mut k2 = key.clone();
                    if obs {
                        k2.push(a as u8 + 1);
                    }
                    *next.entry((k2, v)).or_insert(0.0) += w * q;
                }
            }
            layer = next;
        }

        // joint law of (x_D, x_0) from the block at -1
        let mut joint: BTreeMap<Vec<u8>, Vec<f64>> = BTreeMap::new();
        for ((key, u), w) in layer {
            let row = joint
                .entry(key)
                .or_insert_with(|| vec![0.0; self.alphabet_size]);
            for (a, &q) in self.kernel[u].iter().enumerate() {
                row[a] += w * q;
            }
        }
        Ok(joint
            .values()
            .map(|row| {
                let total: f64 = row.iter().sum();
                if total < LOG_FLOOR {
                    return 0.0;
                }
                row.iter().map(|&p| neg_plogp(p)).sum::<f64>() - neg_plogp(total)
            })
            .sum())
    }
}

/// First-order chains that can report `H(X_0 | X_{-k-1})` for `k = 0, 1, …`.
pub trait LagEntropies {
    fn alphabet_size(&self) -> usize;

    /// `[H(X_0|X_{-1}), H(X_0|X_{-2}), …]`, `count` entries, in nats.
    fn lag_entropies(&self, count: usize) -> Result<Vec<f64>>;
}

impl LagEntropies for MarkovInput {
    fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    fn lag_entropies(&self, count: usize) -> Result<Vec<f64>> {
        self.require_first_order("lag_entropies")?;
        let p = self.block_transition_matrix();
        let mut power = p.clone();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(self.weighted_row_entropy(&power));
            power = &power * &p;
        }
        Ok(out)
    }
}

/// Chain description file: `{"theta": x}` or `{"order": m, "kernel": {...}}`
/// where the kernel maps each block (digit string) to its next-symbol law.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ChainSpec {
    Theta { theta: f64 },
    Kernel {
        order: usize,
        kernel: BTreeMap<String, Vec<f64>>,
    },
}

/// First-order chain on the (1,∞)-RLL graph with transition matrix
/// `[[1-θ, θ], [1, 0]]`.
///
/// Its multi-step transitions have the closed form
/// `P(X_n = 1 | X_0 = 1) = g_{n+1}(θ)`, `P(X_n = 1 | X_0 = 2) = g_n(θ)` with
/// `g_n(θ) = (1 - (-θ)^n) / (1 + θ)`, which is used here instead of matrix
/// powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RllThetaChain {
    theta: f64,
}

impl RllThetaChain {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Precondition(format!("theta = {theta} is outside [0, 1]")));
        }
        Ok(Self { theta })
    }

    /// The noiseless-capacity-achieving member, `θ = 1/λ²`.
    pub fn parry() -> Self {
        let lam = crate::info::golden_ratio();
        Self {
            theta: 1.0 / (lam * lam),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `g_n(θ) = (1 - (-θ)^n) / (1 + θ)`.
    pub fn g(&self, n: usize) -> f64 {
        let t = self.theta;
        (1.0 - (-t).powi(n as i32)) / (1.0 + t)
    }

    pub fn stationary(&self) -> [f64; 2] {
        let f = 1.0 / (1.0 + self.theta);
        [f, 1.0 - f]
    }

    pub fn transition_matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.theta, self.theta], [1.0, 0.0]]
    }

    /// `H(X_0 | X_{-1}) = H(θ) / (1 + θ)`.
    pub fn step_conditional_entropy(&self) -> f64 {
        binary_entropy(self.theta) / (1.0 + self.theta)
    }

    pub fn marginal_entropy(&self) -> f64 {
        binary_entropy(self.stationary()[0])
    }

    /// `H(X_0 | X_{-n}) = f H(g_{n+1}) + (1-f) H(g_n)`, `n ≥ 1`.
    pub fn lag_entropy(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let f = self.stationary()[0];
        // g_1 ≡ 1 exactly
        let h_n = if n == 1 { 0.0 } else { binary_entropy(self.g(n)) };
        f * binary_entropy(self.g(n + 1)) + (1.0 - f) * h_n
    }

    /// `H(X_0 | X_{-k-1})`.
    pub fn gap_conditional_entropy(&self, k: usize) -> f64 {
        self.lag_entropy(k + 1)
    }

    pub fn to_markov(&self) -> MarkovInput {
        let t = self.theta;
        MarkovInput::new(
            2,
            1,
            vec![vec![1], vec![2]],
            vec![vec![1.0 - t, t], vec![1.0, 0.0]],
        )
        .expect("theta chain is always valid")
    }
}

impl LagEntropies for RllThetaChain {
    fn alphabet_size(&self) -> usize {
        2
    }

    fn lag_entropies(&self, count: usize) -> Result<Vec<f64>> {
        Ok((0..count).map(|k| self.gap_conditional_entropy(k)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ForbiddenWordSet;
    use crate::info::{golden_ratio, to_bits};
    use proptest::prelude::*;

    fn parry_rll2() -> MarkovInput {
        ForbiddenWordSet::preset("rll(2,inf)")
            .unwrap()
            .compile()
            .unwrap()
            .parry_chain()
            .unwrap()
    }

    #[test]
    fn theta_stationary_law() {
        for &t in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            let c = RllThetaChain::new(t).unwrap();
            let m = c.to_markov();
            let pi = m.stationary_distribution();
            assert!((pi[0] - 1.0 / (1.0 + t)).abs() < 1e-12);
            assert!((pi[1] - t / (1.0 + t)).abs() < 1e-12);
        }
        let u = MarkovInput::uniform(2).unwrap();
        assert_eq!(u.stationary_distribution(), &[0.5, 0.5]);
    }

    #[test]
    fn parry_rll2_stationary_matches_perron_product() {
        let g = ForbiddenWordSet::preset("rll(2,inf)").unwrap().compile().unwrap();
        let p = g.perron().unwrap();
        let chain = g.parry_chain().unwrap();
        let prod: Vec<f64> = p.left.iter().zip(&p.right).map(|(l, r)| l * r).collect();
        let s: f64 = prod.iter().sum();
        for (a, b) in chain.stationary_distribution().iter().zip(&prod) {
            assert!((a - b / s).abs() < 1e-12);
        }
        // residual of π = π P
        let bp = chain.block_transition_matrix();
        let pi = DVector::from_vec(chain.stationary_distribution().to_vec());
        let res = (bp.transpose() * &pi - &pi).amax();
        assert!(res <= 1e-12);
    }

    #[test]
    fn step_entropy_values() {
        let lam = golden_ratio();
        let c = RllThetaChain::parry();
        assert!((c.step_conditional_entropy() - lam.ln()).abs() < 1e-12);
        assert!((c.to_markov().step_conditional_entropy() - lam.ln()).abs() < 1e-12);
        assert_eq!(RllThetaChain::new(0.0).unwrap().step_conditional_entropy(), 0.0);
        let half = RllThetaChain::new(0.5).unwrap();
        assert!((to_bits(half.step_conditional_entropy()) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gap_entropy_parry_values() {
        let lam = golden_ratio();
        let c = RllThetaChain::parry();
        assert!((to_bits(c.gap_conditional_entropy(0)) - lam.log2()).abs() < 1e-12);
        let expected = 2.0 * lam.log2() - 2.0 / (1.0 + lam * lam);
        assert!((to_bits(c.gap_conditional_entropy(1)) - expected).abs() < 1e-12);
    }

    #[test]
    fn gap_entropy_mixes_to_marginal() {
        let c = RllThetaChain::new(0.4).unwrap();
        assert!((c.gap_conditional_entropy(200) - c.marginal_entropy()).abs() < 1e-9);
        let m = c.to_markov();
        assert!((m.gap_conditional_entropy(200).unwrap() - m.marginal_entropy()).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_matrix_powers() {
        for i in 1..=9 {
            let c = RllThetaChain::new(i as f64 / 10.0).unwrap();
            let via_matrix = c.to_markov().lag_entropies(60).unwrap();
            for (k, h) in via_matrix.iter().enumerate() {
                assert!((h - c.gap_conditional_entropy(k)).abs() < 1e-12, "θ={} k={k}", c.theta());
            }
        }
    }

    #[test]
    fn gap_entropy_rejects_higher_order() {
        assert!(matches!(
            parry_rll2().gap_conditional_entropy(1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn subset_entropy_first_order_reduces_to_latest_index() {
        let m = RllThetaChain::new(0.37).unwrap().to_markov();
        let a = m.subset_conditional_entropy(&[-3, -1]).unwrap();
        assert!((a - m.gap_conditional_entropy(0).unwrap()).abs() < 1e-13);
        let b = m.subset_conditional_entropy(&[-4]).unwrap();
        assert!((b - m.gap_conditional_entropy(3).unwrap()).abs() < 1e-13);
        let e = m.subset_conditional_entropy(&[]).unwrap();
        assert!((e - m.marginal_entropy()).abs() < 1e-13);
    }

    /// Joint law of X_{-3}..X_0 by enumerating every length-4 word.
    fn brute_joint(chain: &MarkovInput, len: usize) -> Vec<(Vec<u8>, f64)> {
        let k = chain.alphabet_size() as u8;
        let m = chain.order();
        let mut out = vec![];
        let total = (k as usize).pow(len as u32);
        for code in 0..total {
            let mut w = vec![0u8; len];
            let mut c = code;
            for x in w.iter_mut().rev() {
                *x = (c % k as usize) as u8 + 1;
                c /= k as usize;
            }
            let Some(u) = chain.state_index(&w[..m]) else {
                continue;
            };
            let mut p = chain.stationary_distribution()[u];
            let mut s = u;
            for &a in &w[m..] {
                p *= chain.kernel()[s][a as usize - 1];
                match chain.successor(s, a) {
                    Some(v) => s = v,
                    None => {
                        p = 0.0;
                        break;
                    }
                }
            }
            out.push((w, p));
        }
        out
    }

    fn brute_conditional(chain: &MarkovInput, d: &[i64]) -> f64 {
        let len = 4usize; // positions -3..=0
        let joint = brute_joint(chain, len);
        let pick = |w: &[u8], idx: &[i64]| -> Vec<u8> {
            idx.iter().map(|&i| w[(i + 3) as usize]).collect()
        };
        let mut with0: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        let mut without: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        let mut d0 = d.to_vec();
        d0.push(0);
        for (w, p) in &joint {
            *with0.entry(pick(w, &d0)).or_insert(0.0) += p;
            *without.entry(pick(w, d)).or_insert(0.0) += p;
        }
        with0.values().map(|&p| neg_plogp(p)).sum::<f64>()
            - without.values().map(|&p| neg_plogp(p)).sum::<f64>()
    }

    #[test]
    fn subset_entropy_second_order_matches_enumeration() {
        let chain = parry_rll2();
        for d in [vec![-3, -2], vec![-3], vec![-2], vec![-1], vec![-3, -1], vec![-2, -1]] {
            let fast = chain.subset_conditional_entropy(&d).unwrap();
            let slow = brute_conditional(&chain, &d);
            assert!((fast - slow).abs() < 1e-13, "D={d:?}: {fast} vs {slow}");
        }
        // conditioning on the full block gives the entropy rate
        let h = chain.subset_conditional_entropy(&[-2, -1]).unwrap();
        assert!((h - chain.step_conditional_entropy()).abs() < 1e-13);
    }

    #[test]
    fn subset_entropy_span_cap() {
        let m = MarkovInput::uniform(2).unwrap();
        assert!(matches!(
            m.subset_conditional_entropy(&[-25]),
            Err(Error::ResourceCap { .. })
        ));
        assert!(m.subset_conditional_entropy(&[0]).is_err());
    }

    #[test]
    fn invalid_kernels_rejected() {
        assert!(MarkovInput::new(2, 1, vec![vec![1], vec![2]], vec![vec![0.5, 0.4], vec![1.0, 0.0]]).is_err());
        // two closed classes
        assert!(MarkovInput::new(2, 1, vec![vec![1], vec![2]], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        // transition into a missing block
        assert!(MarkovInput::new(2, 1, vec![vec![1]], vec![vec![0.5, 0.5]]).is_err());
        assert!(RllThetaChain::new(1.5).is_err());
    }

    #[test]
    fn chain_spec_parsing() {
        let spec: ChainSpec = serde_json::from_str(r#"{"theta": 0.3}"#).unwrap();
        assert_eq!(spec, ChainSpec::Theta { theta: 0.3 });
        let spec: ChainSpec =
            serde_json::from_str(r#"{"order": 1, "kernel": {"1": [0.7, 0.3], "2": [1.0, 0.0]}}"#)
                .unwrap();
        let c = MarkovInput::from_spec(&spec).unwrap();
        assert!((c.stationary_distribution()[0] - 1.0 / 1.3).abs() < 1e-12);
    }

    #[test]
    fn supports() {
        let g = ForbiddenWordSet::preset("rll(1,inf)").unwrap().compile().unwrap();
        assert!(RllThetaChain::new(0.3).unwrap().to_markov().is_supported_on(&g));
        assert!(!MarkovInput::uniform(2).unwrap().is_supported_on(&g));
        let g2 = ForbiddenWordSet::preset("rll(2,inf)").unwrap().compile().unwrap();
        assert!(g2.parry_chain().unwrap().is_supported_on(&g2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn lag_entropy_is_monotone_and_bounded(theta in 0.01f64..0.99) {
            let c = RllThetaChain::new(theta).unwrap();
            let h0 = c.marginal_entropy();
            let mut prev = 0.0;
            for k in 0..=50 {
                let h = c.gap_conditional_entropy(k);
                prop_assert!(h + 1e-13 >= prev);
                prop_assert!(h <= h0 + 1e-13);
                prev = h;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn parry_beats_random_chains(theta in 0.0f64..=1.0) {
            let g = ForbiddenWordSet::preset("rll(1,inf)").unwrap().compile().unwrap();
            let cap = g.noiseless_capacity().unwrap();
            let c = RllThetaChain::new(theta).unwrap();
            prop_assert!(c.step_conditional_entropy() <= cap + 1e-10);
        }
    }

    #[test]
    fn lag_entropy_strictly_concave_in_theta() {
        let h = 1e-4;
        for n in 1..=30usize {
            for i in 1..=99 {
                let t = i as f64 / 100.0;
                let f = |x: f64| RllThetaChain::new(x).unwrap().lag_entropy(n);
                let d2 = f(t + h) - 2.0 * f(t) + f(t - h);
                assert!(d2 < 0.0, "n={n} θ={t}: {d2}");
            }
        }
    }
}
