//! Set-function oracles, the greedy algorithm, and exhaustive small-`p` checks.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::{ElementSet, Error, Result};

/// Largest ground set the exhaustive routines accept.
pub const BRUTE_FORCE_LIMIT: usize = 22;

/// A raw set function over `{0, .., ground_size()-1}`.
///
/// Implementations need not vanish on the empty set; [`Oracle`] normalizes.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &ElementSet) -> f64;

    /// Values along a chain: `out[k] = value(head ∪ {order[0], .., order[k-1]})`
    /// for `k = 0..=order.len()`. Elements in neither `head` nor `order` are
    /// outside every set of the chain. Override when marginals are cheap.
    fn chain_values(&self, head: &[usize], order: &[usize]) -> Vec<f64> {
        let mut set = ElementSet::from_indices(self.ground_size(), head.iter().copied());
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(self.value(&set));
        for &j in order {
            set.insert(j);
            out.push(self.value(&set));
        }
        out
    }
}

/// A normalized submodular oracle, possibly a contraction of a larger function.
///
/// Evaluates `F(C) = G(head ∪ lift(C)) - G(head)` where `G` is the wrapped
/// raw function, `head` is a fixed set of root elements and `lift` maps reduced
/// indices to root indices. A fresh oracle has an empty head, so it computes
/// `G(C) - G(∅)`.
#[derive(Clone)]
pub struct Oracle {
    func: Arc<dyn SetFunction>,
    head: Arc<[usize]>,
    ground: Arc<[usize]>,
    offset: f64,
    calls: Arc<AtomicU64>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("p", &self.p())
            .field("fixed", &self.head.len())
            .field("root_size", &self.func.ground_size())
            .finish()
    }
}

impl Oracle {
    pub fn new<F: SetFunction + 'static>(func: F) -> Self {
        Self::from_arc(Arc::new(func))
    }

    pub fn from_arc(func: Arc<dyn SetFunction>) -> Self {
        let n = func.ground_size();
        let offset = func.value(&ElementSet::empty(n));
        Self {
            func,
            head: Arc::from(Vec::new()),
            ground: (0..n).collect::<Vec<_>>().into(),
            offset,
            calls: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Size of the (reduced) ground set.
    pub fn p(&self) -> usize {
        self.ground.len()
    }

    /// Root indices of the reduced ground set, in reduced order.
    pub fn root_indices(&self) -> &[usize] {
        &self.ground
    }

    /// Root elements fixed inside every set by contraction.
    pub fn fixed(&self) -> &[usize] {
        &self.head
    }

    pub fn root_size(&self) -> usize {
        self.func.ground_size()
    }

    /// Number of oracle passes (single evaluations or chain passes) so far,
    /// shared with every contraction of this oracle.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn lift(&self, set: &ElementSet) -> ElementSet {
        assert_eq!(set.universe(), self.p(), "set over wrong ground set");
        let mut root = ElementSet::from_indices(self.root_size(), self.head.iter().copied());
        for i in set.iter() {
            root.insert(self.ground[i]);
        }
        root
    }

    pub fn evaluate(&self, set: &ElementSet) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        if set.is_empty() {
            return 0.0;
        }
        self.func.value(&self.lift(set)) - self.offset
    }

    /// `F(∅), F({j1}), .., F({j1..jk})` along `order` (reduced indices).
    pub fn prefix_values(&self, order: &[usize]) -> Vec<f64> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mapped: Vec<usize> = order.iter().map(|&j| self.ground[j]).collect();
        let mut out = self.func.chain_values(&self.head, &mapped);
        let base = out[0];
        for v in &mut out {
            *v -= base;
        }
        out[0] = 0.0;
        out
    }

    pub fn ground_value(&self) -> f64 {
        self.evaluate(&ElementSet::full(self.p()))
    }

    /// Fixes `active` into every set and drops `inactive` from the ground set.
    /// Both sets are over the current reduced ground set and must be disjoint.
    pub fn contract(&self, active: &ElementSet, inactive: &ElementSet) -> Oracle {
        assert!(active.is_disjoint(inactive));
        let mut head: Vec<usize> = self.head.to_vec();
        head.extend(active.iter().map(|i| self.ground[i]));
        let ground: Vec<usize> = (0..self.p())
            .filter(|&i| !active.contains(i) && !inactive.contains(i))
            .map(|i| self.ground[i])
            .collect();
        let head_set = ElementSet::from_indices(self.root_size(), head.iter().copied());
        let offset = self.func.value(&head_set);
        Oracle {
            func: Arc::clone(&self.func),
            head: head.into(),
            ground: ground.into(),
            offset,
            calls: Arc::clone(&self.calls),
        }
    }
}

/// Indices sorted by decreasing `w`, ties by ascending index.
pub fn decreasing_order(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    order
}

/// One greedy pass: the chain of prefix values along an ordering and the base
/// vertex it induces.
#[derive(Clone, Debug)]
pub struct GreedyPass {
    pub order: Vec<usize>,
    /// `values[k] = F({order[0..k]})`, length `p + 1`.
    pub values: Vec<f64>,
    pub vertex: Vec<f64>,
}

impl GreedyPass {
    pub fn along(oracle: &Oracle, order: Vec<usize>) -> Self {
        let values = oracle.prefix_values(&order);
        let mut vertex = vec![0.0; order.len()];
        for (k, &j) in order.iter().enumerate() {
            vertex[j] = values[k + 1] - values[k];
        }
        Self { order, values, vertex }
    }

    /// Prefix with the smallest value, ties by smallest cardinality.
    pub fn best_prefix(&self) -> (usize, f64) {
        let mut best = (0, self.values[0]);
        for (k, &v) in self.values.iter().enumerate().skip(1) {
            if v < best.1 {
                best = (k, v);
            }
        }
        best
    }

    pub fn prefix_set(&self, k: usize) -> ElementSet {
        ElementSet::from_indices(self.order.len(), self.order[..k].iter().copied())
    }
}

/// A point of the base polytope, optionally with its convex decomposition.
#[derive(Clone, Debug, Default)]
pub struct BasePoint {
    pub coords: Vec<f64>,
    /// `(vertex, weight)` pairs whose weighted sum is `coords`.
    pub atoms: Option<Vec<(Vec<f64>, f64)>>,
}

/// Maximizes `<w, s>` over `B(F)` (Edmonds' greedy algorithm).
pub fn greedy_linear_maximize(oracle: &Oracle, w: &[f64]) -> BasePoint {
    assert_eq!(w.len(), oracle.p());
    let pass = GreedyPass::along(oracle, decreasing_order(w));
    BasePoint {
        coords: pass.vertex,
        atoms: None,
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The Lovász extension `f(w) = <w, greedy(w)>`.
pub fn lovasz_extension(oracle: &Oracle, w: &[f64]) -> f64 {
    dot(w, &greedy_linear_maximize(oracle, w).coords)
}

fn guard(p: usize) -> Result<()> {
    if p > BRUTE_FORCE_LIMIT {
        return Err(Error::GroundSetTooLarge {
            p,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    Ok(())
}

/// `F` on every subset, indexed by bit mask.
pub fn value_table(oracle: &Oracle) -> Result<Vec<f64>> {
    let p = oracle.p();
    guard(p)?;
    Ok((0..1u64 << p)
        .map(|mask| oracle.evaluate(&ElementSet::from_mask(p, mask)))
        .collect())
}

#[derive(Clone, Debug)]
pub struct BruteForceMinimum {
    pub min_value: f64,
    /// Intersection of all minimizers.
    pub minimal: ElementSet,
    /// Union of all minimizers.
    pub maximal: ElementSet,
}

pub fn brute_force_sfm(oracle: &Oracle) -> Result<BruteForceMinimum> {
    let table = value_table(oracle)?;
    Ok(minimizers_from_table(oracle.p(), &table))
}

pub(crate) fn minimizers_from_table(p: usize, table: &[f64]) -> BruteForceMinimum {
    let min = table.iter().copied().fold(f64::INFINITY, f64::min);
    let max = table.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * (max - min);
    let mut inter = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
    let mut union = 0u64;
    for (mask, &v) in table.iter().enumerate() {
        if v <= min + tol {
            inter &= mask as u64;
            union |= mask as u64;
        }
    }
    BruteForceMinimum {
        min_value: min,
        minimal: ElementSet::from_mask(p, inter),
        maximal: ElementSet::from_mask(p, union),
    }
}

/// `s(A) <= F(A) + tol` for every `A` and `|s(V) - F(V)| <= tol`.
pub fn check_base_membership(oracle: &Oracle, s: &[f64], tol: f64) -> Result<bool> {
    let p = oracle.p();
    let table = value_table(oracle)?;
    Ok(base_membership_from_table(p, &table, s, tol))
}

pub(crate) fn base_membership_from_table(p: usize, table: &[f64], s: &[f64], tol: f64) -> bool {
    assert_eq!(s.len(), p);
    let full = (1usize << p) - 1;
    let mut sums = vec![0.0; 1 << p];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + s[low];
        if sums[mask] > table[mask] + tol {
            return false;
        }
    }
    (sums[full] - table[full]).abs() <= tol
}

/// Searches for a violation of `F(A ∪ i) + F(A ∪ j) >= F(A ∪ {i, j}) + F(A) - tol`,
/// which is equivalent to the pairwise submodular inequality over all subsets.
/// Returns the violating pair `(A ∪ i, A ∪ j)` if there is one.
pub fn submodularity_violation(oracle: &Oracle, tol: f64) -> Result<Option<(ElementSet, ElementSet)>> {
    let p = oracle.p();
    let table = value_table(oracle)?;
    for a in 0..(1usize << p) {
        for i in (0..p).filter(|&i| a >> i & 1 == 0) {
            for j in (i + 1..p).filter(|&j| a >> j & 1 == 0) {
                let (ai, aj, aij) = (a | 1 << i, a | 1 << j, a | 1 << i | 1 << j);
                if table[ai] + table[aj] < table[aij] + table[a] - tol {
                    return Ok(Some((
                        ElementSet::from_mask(p, ai as u64),
                        ElementSet::from_mask(p, aj as u64),
                    )));
                }
            }
        }
    }
    Ok(None)
}
