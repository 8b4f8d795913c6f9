//! Concrete submodular functions.

mod cut;
pub mod families;
mod mutual_info;

pub use cut::{CutFunction, WeightedGraph};
pub use mutual_info::{gaussian_kernel, KernelMatrix, LabelPrior, MutualInformation};

use serde::{Deserialize, Serialize};

use crate::submodular::SetFunction;
use crate::ElementSet;

/// `F(A) = sum_{j in A} m_j`.
#[derive(Clone, Debug)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &ElementSet) -> f64 {
        set.iter().map(|j| self.weights[j]).sum()
    }

    fn chain_values(&self, head: &[usize], order: &[usize]) -> Vec<f64> {
        let mut acc: f64 = head.iter().map(|&j| self.weights[j]).sum();
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(acc);
        for &j in order {
            acc += self.weights[j];
            out.push(acc);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcaveShape {
    Sqrt,
    Log1p,
    /// `min(t, k)`
    Truncated(usize),
}

impl ConcaveShape {
    pub fn apply(self, t: usize) -> f64 {
        match self {
            ConcaveShape::Sqrt => (t as f64).sqrt(),
            ConcaveShape::Log1p => (t as f64).ln_1p(),
            ConcaveShape::Truncated(k) => t.min(k) as f64,
        }
    }
}

/// `F(A) = scale * g(|A|) + sum_{j in A} m_j` with `g` concave, `g(0) = 0`.
#[derive(Clone, Debug)]
pub struct ConcaveCardinality {
    shape: ConcaveShape,
    scale: f64,
    weights: Vec<f64>,
}

impl ConcaveCardinality {
    /// `scale` must be nonnegative for the function to be submodular.
    pub fn new(p: usize, shape: ConcaveShape, scale: f64, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), p);
        assert!(scale >= 0.0);
        Self { shape, scale, weights }
    }
}

impl SetFunction for ConcaveCardinality {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &ElementSet) -> f64 {
        self.scale * self.shape.apply(set.len()) + set.iter().map(|j| self.weights[j]).sum::<f64>()
    }

    fn chain_values(&self, head: &[usize], order: &[usize]) -> Vec<f64> {
        let mut modular: f64 = head.iter().map(|&j| self.weights[j]).sum();
        let mut t = head.len();
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(self.scale * self.shape.apply(t) + modular);
        for &j in order {
            t += 1;
            modular += self.weights[j];
            out.push(self.scale * self.shape.apply(t) + modular);
        }
        out
    }
}

/// `F(A) = |A| |V \ A| - sum_{j in A} (5 j - 2 p)` with `j` counted from 1,
/// a classic hard instance for combinatorial SFM codes.
#[derive(Clone, Debug)]
pub struct Iwata {
    p: usize,
}

impl Iwata {
    pub fn new(p: usize) -> Self {
        Self { p }
    }

    fn weight(&self, j: usize) -> f64 {
        5.0 * (j + 1) as f64 - 2.0 * self.p as f64
    }

    fn at(&self, t: usize, modular: f64) -> f64 {
        (t * (self.p - t)) as f64 - modular
    }
}

impl SetFunction for Iwata {
    fn ground_size(&self) -> usize {
        self.p
    }

    fn value(&self, set: &ElementSet) -> f64 {
        self.at(set.len(), set.iter().map(|j| self.weight(j)).sum())
    }

    fn chain_values(&self, head: &[usize], order: &[usize]) -> Vec<f64> {
        let mut modular: f64 = head.iter().map(|&j| self.weight(j)).sum();
        let mut t = head.len();
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(self.at(t, modular));
        for &j in order {
            t += 1;
            modular += self.weight(j);
            out.push(self.at(t, modular));
        }
        out
    }
}
