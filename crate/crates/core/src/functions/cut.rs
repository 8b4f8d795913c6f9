use std::collections::HashSet;

use crate::submodular::SetFunction;
use crate::{ElementSet, Error, Result};

/// An undirected graph with nonnegative edge weights and CSR adjacency.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    p: usize,
    edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    neighbors: Vec<(usize, f64)>,
}

impl WeightedGraph {
    /// Edges are stored with `i < j`; either orientation is accepted on input.
    pub fn new(p: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b, weight) in edges {
            if a >= p || b >= p {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) outside vertex range 0..{p}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            let (i, j) = (a.min(b), a.max(b));
            if !(weight >= 0.0) || !weight.is_finite() {
                return Err(Error::NegativeEdgeWeight { i, j, weight });
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
            normalized.push((i, j, weight));
        }
        let mut degree = vec![0usize; p + 1];
        for &(i, j, _) in &normalized {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = vec![0usize; p + 1];
        for v in 0..p {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![(0, 0.0); offsets[p]];
        for &(i, j, w) in &normalized {
            neighbors[fill[i]] = (j, w);
            fill[i] += 1;
            neighbors[fill[j]] = (i, w);
            fill[j] += 1;
        }
        Ok(Self {
            p,
            edges: normalized,
            offsets,
            neighbors,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.p
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.neighbors(v).iter().map(|&(_, w)| w).sum()
    }
}

/// `F(A) = u(A) + sum of weights of edges crossing (A, V \ A)`.
#[derive(Clone, Debug)]
pub struct CutFunction {
    graph: WeightedGraph,
    unary: Vec<f64>,
    degree: Vec<f64>,
}

impl CutFunction {
    pub fn new(graph: WeightedGraph, unary: Vec<f64>) -> Result<Self> {
        if unary.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.vertex_count(),
                got: unary.len(),
            });
        }
        let degree = (0..graph.vertex_count()).map(|v| graph.weighted_degree(v)).collect();
        Ok(Self { graph, unary, degree })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn unary(&self) -> &[f64] {
        &self.unary
    }

    /// Change in `F` from adding `v` to the set marked by `inside`.
    fn marginal(&self, inside: &[bool], v: usize) -> f64 {
        let into: f64 = self
            .graph
            .neighbors(v)
            .iter()
            .filter(|&&(u, _)| inside[u])
            .map(|&(_, w)| w)
            .sum();
        self.unary[v] + self.degree[v] - 2.0 * into
    }
}

impl SetFunction for CutFunction {
    fn ground_size(&self) -> usize {
        self.graph.vertex_count()
    }

    fn value(&self, set: &ElementSet) -> f64 {
        let unary: f64 = set.iter().map(|j| self.unary[j]).sum();
        let cut: f64 = self
            .graph
            .edges()
            .iter()
            .filter(|&&(i, j, _)| set.contains(i) != set.contains(j))
            .map(|&(_, _, w)| w)
            .sum();
        unary + cut
    }

    fn chain_values(&self, head: &[usize], order: &[usize]) -> Vec<f64> {
        let mut inside = vec![false; self.ground_size()];
        let mut acc = 0.0;
        for &v in head {
            acc += self.marginal(&inside, v);
            inside[v] = true;
        }
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(acc);
        for &v in order {
            acc += self.marginal(&inside, v);
            inside[v] = true;
            out.push(acc);
        }
        out
    }
}
