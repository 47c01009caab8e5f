//! Finite-type input constraints.
//!
//! A constraint is given by a finite set of forbidden words over the
//! alphabet `{1, …, K}`. Compiling it yields a [`ConstraintGraph`] whose
//! vertices are the allowed `m`-blocks (`m` = longest forbidden word − 1)
//! and whose edges are the admissible one-symbol overlaps. The noiseless
//! capacity is the log of the Perron eigenvalue of that graph, and the
//! [`parry_chain`](ConstraintGraph::parry_chain) is the unique `m`-th order
//! Markov chain achieving it.
//!
//! The order used is the one implied by the *given* forbidden set. A shorter
//! forbidden set describing the same constraint may exist; no attempt is made
//! to find it.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::MarkovInput;

/// Upper bound on `K^m` when enumerating candidate vertices.
pub const MAX_BLOCKS: usize = 1 << 20;

const PERRON_TOL: f64 = 1e-14;
const PERRON_MAX_ITER: usize = 100_000;

/// Forbidden words over `{1, …, K}`, with redundant words stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenWordSet {
    alphabet_size: usize,
    words: Vec<Vec<u8>>,
}

/// On-disk form: `{"K": 2, "forbidden": ["22"]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConstraintFile {
    #[serde(rename = "K")]
    pub alphabet_size: usize,
    #[serde(default)]
    pub forbidden: Vec<String>,
}

fn contains_factor(word: &[u8], factor: &[u8]) -> bool {
    factor.len() <= word.len() && word.windows(factor.len()).any(|w| w == factor)
}

impl ForbiddenWordSet {
    /// Validates symbols and strips words that contain another forbidden
    /// word as a factor (they forbid nothing new).
    pub fn new(alphabet_size: usize, words: Vec<Vec<u8>>) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::InvalidConstraint(format!(
                "alphabet size must be at least 2, got {alphabet_size}"
            )));
        }
        if alphabet_size > u8::MAX as usize {
            return Err(Error::InvalidConstraint(format!(
                "alphabet size {alphabet_size} is too large"
            )));
        }
        for w in &words {
            if w.is_empty() {
                return Err(Error::InvalidConstraint("empty forbidden word".into()));
            }
            if let Some(&s) = w.iter().find(|&&s| s == 0 || s as usize > alphabet_size) {
                return Err(Error::InvalidConstraint(format!(
                    "symbol {s} outside the alphabet 1..={alphabet_size}"
                )));
            }
        }

        let mut sorted = words;
        sorted.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        sorted.dedup();
        let mut kept: Vec<Vec<u8>> = Vec::with_capacity(sorted.len());
        for w in sorted {
            if let Some(f) = kept.iter().find(|f| contains_factor(&w, f)) {
                log::warn!(
                    "forbidden word {} contains forbidden factor {}; stripped",
                    display_word(&w),
                    display_word(f)
                );
                continue;
            }
            kept.push(w);
        }
        Ok(Self {
            alphabet_size,
            words: kept,
        })
    }

    /// Parses words written as digit strings, e.g. `["22", "212"]`.
    pub fn from_strings<S: AsRef<str>>(alphabet_size: usize, words: &[S]) -> Result<Self> {
        if alphabet_size > 9 {
            return Err(Error::InvalidConstraint(
                "digit-string words support alphabets of size at most 9".into(),
            ));
        }
        let parsed = words
            .iter()
            .map(|w| parse_word(w.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet_size, parsed)
    }

    pub fn from_file(file: &ConstraintFile) -> Result<Self> {
        Self::from_strings(file.alphabet_size, &file.forbidden)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConstraintFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> ConstraintFile {
        ConstraintFile {
            alphabet_size: self.alphabet_size,
            forbidden: self.words.iter().map(|w| display_word(w)).collect(),
        }
    }

    /// The unconstrained shift over `K` symbols.
    pub fn full(alphabet_size: usize) -> Result<Self> {
        Self::new(alphabet_size, Vec::new())
    }

    /// `(d,k)`-RLL over `{1, 2}`: every run of `1`s between two `2`s has
    /// length in `[d, k]` (`k = None` means unbounded).
    ///
    /// For finite `k` the run bound is imposed by forbidding `1^(k+1)`.
    pub fn rll(d: usize, k: Option<usize>) -> Result<Self> {
        if let Some(k) = k {
            if k < d {
                return Err(Error::InvalidConstraint(format!(
                    "rll({d},{k}) needs d <= k"
                )));
            }
        }
        let mut words: Vec<Vec<u8>> = (0..d)
            .map(|l| {
                let mut w = vec![2u8];
                w.extend(std::iter::repeat_n(1u8, l));
                w.push(2);
                w
            })
            .collect();
        if let Some(k) = k {
            words.push(vec![1u8; k + 1]);
        }
        Self::new(2, words)
    }

    /// Named presets: `rll(d,k)` with `k` a number or `inf`, and `full(K)`.
    pub fn preset(name: &str) -> Result<Self> {
        let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Config(format!("unknown constraint preset `{name}`"));
        let args = |prefix: &str| -> Option<Vec<String>> {
            compact
                .strip_prefix(prefix)?
                .strip_suffix(')')
                .map(|s| s.split(',').map(str::to_owned).collect())
        };
        if let Some(a) = args("rll(") {
            if a.len() != 2 {
                return Err(bad());
            }
            let d: usize = a[0].parse().map_err(|_| bad())?;
            let k = match a[1].as_str() {
                "inf" | "∞" | "infinity" => None,
                s => Some(s.parse::<usize>().map_err(|_| bad())?),
            };
            Self::rll(d, k)
        } else if let Some(a) = args("full(") {
            if a.len() != 1 {
                return Err(bad());
            }
            Self::full(a[0].parse().map_err(|_| bad())?)
        } else {
            Err(bad())
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    /// `m` = longest forbidden word − 1, and 1 when that would be 0.
    pub fn order(&self) -> usize {
        self.words
            .iter()
            .map(|w| w.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
            .max(1)
    }

    pub fn allows(&self, word: &[u8]) -> bool {
        !self.words.iter().any(|f| contains_factor(word, f))
    }

    pub fn compile(&self) -> Result<ConstraintGraph> {
        ConstraintGraph::compile(self)
    }
}

fn parse_word(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| {
            c.to_digit(10)
                .filter(|&d| d > 0)
                .map(|d| d as u8)
                .ok_or_else(|| Error::InvalidConstraint(format!("bad symbol {c:?} in word {s:?}")))
        })
        .collect()
}

pub(crate) fn display_word(w: &[u8]) -> String {
    if w.iter().all(|&s| s < 10) {
        w.iter().map(|s| char::from(b'0' + s)).collect()
    } else {
        let parts: Vec<String> = w.iter().map(u8::to_string).collect();
        parts.join(".")
    }
}

/// Perron eigenpair of a nonnegative irreducible matrix.
#[derive(Debug, Clone)]
pub struct Perron {
    pub eigenvalue: f64,
    /// Right eigenvector, normalised to sum 1.
    pub right: Vec<f64>,
    /// Left eigenvector, normalised to sum 1.
    pub left: Vec<f64>,
    pub iterations: usize,
}

/// Compiled constraint: `m`-blocks as vertices, admissible overlaps as edges.
#[derive(Debug, Clone)]
pub struct ConstraintGraph {
    alphabet_size: usize,
    order: usize,
    vertices: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    adjacency: Vec<Vec<bool>>,
}

impl ConstraintGraph {
    pub fn compile(forbidden: &ForbiddenWordSet) -> Result<Self> {
        let k = forbidden.alphabet_size();
        let m = forbidden.order();
        let count = (k as f64).powi(m as i32);
        if count > MAX_BLOCKS as f64 {
            return Err(Error::cap("candidate m-blocks", MAX_BLOCKS, count as usize));
        }

        let mut vertices = Vec::new();
        let mut word = vec![1u8; m];
        loop {
            if forbidden.allows(&word) {
                vertices.push(word.clone());
            }
            // odometer over {1..k}^m
            let mut pos = m;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                if (word[pos] as usize) < k {
                    word[pos] += 1;
                    break;
                }
                word[pos] = 1;
            }
            if word.iter().all(|&s| s == 1) {
                break;
            }
        }

        let n = vertices.len();
        let mut adjacency = vec![vec![false; n]; n];
        let mut block = vec![0u8; m + 1];
        for (i, u) in vertices.iter().enumerate() {
            for (j, v) in vertices.iter().enumerate() {
                if u[1..] != v[..m - 1] {
                    continue;
                }
                block[..m].copy_from_slice(u);
                block[m] = v[m - 1];
                adjacency[i][j] = forbidden.allows(&block);
            }
        }

        // Drop stranded vertices: they lie on no bi-infinite path.
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for i in 0..n {
                if !alive[i] {
                    continue;
                }
                let has_out = (0..n).any(|j| alive[j] && adjacency[i][j]);
                let has_in = (0..n).any(|j| alive[j] && adjacency[j][i]);
                if !has_out || !has_in {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        if keep.is_empty() {
            return Err(Error::EmptyConstraint);
        }
        let vertices: Vec<Vec<u8>> = keep.iter().map(|&i| vertices[i].clone()).collect();
        let adjacency = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| adjacency[i][j]).collect())
            .collect();
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();

        Ok(Self {
            alphabet_size: k,
            order: m,
            vertices,
            index,
            adjacency,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vertices(&self) -> &[Vec<u8>] {
        &self.vertices
    }

    pub fn vertex_index(&self, block: &[u8]) -> Option<usize> {
        self.index.get(block).copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adjacency[from][to]
    }

    /// 0/1 adjacency as integers, row = source vertex.
    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        self.adjacency
            .iter()
            .map(|row| row.iter().map(|&b| b as u8).collect())
            .collect()
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.vertices.len();
        DMatrix::from_fn(n, n, |i, j| if self.adjacency[i][j] { 1.0 } else { 0.0 })
    }

    /// True iff the graph is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        let n = self.vertices.len();
        let mut g = DiGraph::<(), ()>::with_capacity(n, n * self.alphabet_size);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for i in 0..n {
            for j in 0..n {
                if self.adjacency[i][j] {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        n > 0 && tarjan_scc(&g).len() == 1
    }

    fn require_irreducible(&self) -> Result<()> {
        if self.is_irreducible() {
            Ok(())
        } else {
            Err(Error::Reducible)
        }
    }

    /// Perron eigenvalue with right and left eigenvectors.
    ///
    /// Power iteration on `A + I`: the shift makes the dominant eigenvalue
    /// strictly dominant even for periodic graphs.
    pub fn perron(&self) -> Result<Perron> {
        self.require_irreducible()?;
        let a = self.adjacency_matrix();
        let (mu, right, it_r) = shifted_power_iteration(&a)?;
        let (_, left, it_l) = shifted_power_iteration(&a.transpose())?;
        Ok(Perron {
            eigenvalue: mu,
            right,
            left,
            iterations: it_r.max(it_l),
        })
    }

    /// `ln λ` in nats.
    pub fn noiseless_capacity(&self) -> Result<f64> {
        Ok(self.perron()?.eigenvalue.ln())
    }

    /// Max-entropy `m`-th order chain: `P(u→v) = A_uv r_v / (λ r_u)`.
    pub fn parry_chain(&self) -> Result<MarkovInput> {
        let p = self.perron()?;
        let m = self.order;
        let kernel: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, u)| {
                (1..=self.alphabet_size as u8)
                    .map(|a| {
                        let mut next = u[1..].to_vec();
                        next.push(a);
                        match self.vertex_index(&next) {
                            Some(j) if self.adjacency[i][j] => {
                                p.right[j] / (p.eigenvalue * p.right[i])
                            }
                            _ => 0.0,
                        }
                    })
                    .collect()
            })
            .collect();
        // Rows are stochastic up to rounding; renormalise so the chain
        // validator sees exact sums.
        let kernel = kernel
            .into_iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.into_iter().map(|x| x / s).collect()
            })
            .collect();
        MarkovInput::new(self.alphabet_size, m, self.vertices.clone(), kernel)
    }
}

impl fmt::Display for ConstraintGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "order {} over {} symbols, {} vertices",
            self.order,
            self.alphabet_size,
            self.vertices.len()
        )?;
        for (u, row) in self.vertices.iter().zip(&self.adjacency) {
            let bits: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            writeln!(f, "  {:>4}  [{}]", display_word(u), bits.join(" "))?;
        }
        Ok(())
    }
}

/// Returns `(λ, eigenvector normalised to sum 1, iterations)`.
fn shifted_power_iteration(a: &DMatrix<f64>) -> Result<(f64, Vec<f64>, usize)> {
    let n = a.nrows();
    let shifted = a + DMatrix::<f64>::identity(n, n);
    let mut v = nalgebra::DVector::from_element(n, 1.0 / n as f64);
    let mut rq_prev = f64::NAN;
    for it in 1..=PERRON_MAX_ITER {
        let w = &shifted * &v;
        let rq = w.dot(&v) / v.dot(&v);
        let s = w.sum();
        let next = w / s;
        let delta = (&next - &v).amax();
        v = next;
        if (rq - rq_prev).abs() <= PERRON_TOL * rq && delta <= PERRON_TOL {
            // one more pass to read the eigenvalue off the converged vector
            let w = &shifted * &v;
            let mu = w.sum() / v.sum() - 1.0;
            return Ok((mu, v.iter().copied().collect(), it));
        }
        rq_prev = rq;
    }
    Err(Error::NoConvergence("Perron power iteration", PERRON_MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{golden_ratio, to_bits};

    fn rll1() -> ConstraintGraph {
        ForbiddenWordSet::from_strings(2, &["22"]).unwrap().compile().unwrap()
    }

    /// Characteristic-polynomial root by bisection, independent of the
    /// power iteration.
    fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn rll_1_inf_graph() {
        let g = rll1();
        assert_eq!(g.order(), 1);
        assert_eq!(g.vertices(), &[vec![1], vec![2]]);
        assert_eq!(g.adjacency(), vec![vec![1, 1], vec![1, 0]]);
        assert!(g.is_irreducible());
    }

    #[test]
    fn full_shift_graph() {
        let g = ForbiddenWordSet::full(2).unwrap().compile().unwrap();
        assert_eq!(g.adjacency(), vec![vec![1, 1], vec![1, 1]]);
        assert!((to_bits(g.noiseless_capacity().unwrap()) - 1.0).abs() < 1e-12);
        let g3 = ForbiddenWordSet::full(3).unwrap().compile().unwrap();
        assert!(g3.is_irreducible());
    }

    #[test]
    fn rll_2_inf_matches_brute_force_blocks() {
        let f = ForbiddenWordSet::from_strings(2, &["212", "22"]).unwrap();
        let g = f.compile().unwrap();
        assert_eq!(g.order(), 2);
        // brute force over all length-3 words
        let mut expected = vec![];
        for u in g.vertices() {
            let row: Vec<u8> = g
                .vertices()
                .iter()
                .map(|v| {
                    let w = [u[0], u[1], v[1]];
                    let ok = u[1] == v[0]
                        && !w.windows(2).any(|x| x == [2, 2])
                        && w != [2, 1, 2];
                    ok as u8
                })
                .collect();
            expected.push(row);
        }
        assert_eq!(g.vertices(), &[vec![1, 1], vec![1, 2], vec![2, 1]]);
        assert_eq!(g.adjacency(), expected);
    }

    #[test]
    fn noiseless_capacities() {
        let lam = golden_ratio();
        let c = rll1().noiseless_capacity().unwrap();
        assert!((c - lam.ln()).abs() < 1e-12);
        assert!((to_bits(c) - 0.694_241_913_630_617_3).abs() < 1e-12);

        let g2 = ForbiddenWordSet::preset("rll(2,inf)").unwrap().compile().unwrap();
        let root = bisect_root(|x| x * x * x - x * x - 1.0, 1.0, 2.0);
        let c2 = to_bits(g2.noiseless_capacity().unwrap());
        assert!((c2 - root.log2()).abs() < 1e-12);
        assert!((c2 - 0.5515).abs() < 1e-4);
    }

    #[test]
    fn perron_residual() {
        for name in ["rll(1,inf)", "rll(2,inf)", "rll(1,3)", "rll(2,7)", "full(3)"] {
            let g = ForbiddenWordSet::preset(name).unwrap().compile().unwrap();
            let p = g.perron().unwrap();
            let a = g.adjacency_matrix();
            let r = nalgebra::DVector::from_vec(p.right.clone());
            let res = (&a * &r - &r * p.eigenvalue).amax();
            assert!(res <= 1e-12 * r.amax(), "{name}: residual {res}");
        }
    }

    #[test]
    fn reducible_graph_detected() {
        // 12 and 21 forbidden: only constant sequences survive
        let g = ForbiddenWordSet::from_strings(2, &["12", "21"])
            .unwrap()
            .compile()
            .unwrap();
        assert!(!g.is_irreducible());
        assert!(matches!(g.noiseless_capacity(), Err(Error::Reducible)));
    }

    #[test]
    fn empty_constraint_rejected() {
        let f = ForbiddenWordSet::from_strings(2, &["1", "2"]).unwrap();
        assert!(matches!(f.compile(), Err(Error::EmptyConstraint)));
    }

    #[test]
    fn redundant_words_are_stripped() {
        let f = ForbiddenWordSet::from_strings(2, &["22", "122", "22"]).unwrap();
        assert_eq!(f.words(), &[vec![2, 2]]);
        assert_eq!(f.order(), 1);
    }

    #[test]
    fn bad_symbols_rejected() {
        assert!(ForbiddenWordSet::from_strings(2, &["23"]).is_err());
        assert!(ForbiddenWordSet::from_strings(2, &["02"]).is_err());
        assert!(ForbiddenWordSet::new(1, vec![]).is_err());
    }

    #[test]
    fn presets_parse() {
        assert_eq!(
            ForbiddenWordSet::preset("rll(1,inf)").unwrap(),
            ForbiddenWordSet::from_strings(2, &["22"]).unwrap()
        );
        let f = ForbiddenWordSet::preset("rll(1, 3)").unwrap();
        assert_eq!(f.words(), &[vec![2, 2], vec![1, 1, 1, 1]]);
        assert!(ForbiddenWordSet::preset("rll(3,1)").is_err());
        assert!(ForbiddenWordSet::preset("bogus").is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = ForbiddenWordSet::from_json(r#"{"K": 2, "forbidden": ["22", "212"]}"#).unwrap();
        let back = ForbiddenWordSet::from_file(&f.to_file()).unwrap();
        assert_eq!(f, back);
    }
}
