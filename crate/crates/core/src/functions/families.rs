//! Seeded random instance families for tests and audits.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConcaveCardinality, ConcaveShape, CutFunction, Iwata, Modular, WeightedGraph};
use crate::submodular::Oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Modular,
    ConcaveCardinality,
    GridCut,
    Iwata,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Modular,
        Family::ConcaveCardinality,
        Family::GridCut,
        Family::Iwata,
    ];

    pub fn build(self, rng: &mut ChaCha8Rng, p: usize) -> Oracle {
        match self {
            Family::Modular => random_modular(rng, p),
            Family::ConcaveCardinality => random_concave(rng, p),
            Family::GridCut => random_grid_cut(rng, p),
            Family::Iwata => Oracle::new(Iwata::new(p)),
        }
    }

    /// Deterministic instance for `(family, p, seed)`.
    pub fn instance(self, p: usize, seed: u64) -> Oracle {
        self.build(&mut ChaCha8Rng::seed_from_u64(seed), p)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Modular => "modular",
            Family::ConcaveCardinality => "concave_cardinality",
            Family::GridCut => "grid_cut",
            Family::Iwata => "iwata",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "modular" => Ok(Family::Modular),
            "concave" | "concave_cardinality" => Ok(Family::ConcaveCardinality),
            "cut" | "grid_cut" => Ok(Family::GridCut),
            "iwata" => Ok(Family::Iwata),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

pub fn random_modular(rng: &mut ChaCha8Rng, p: usize) -> Oracle {
    Oracle::new(Modular::new((0..p).map(|_| rng.random_range(-3.0..3.0)).collect()))
}

/// Random concave shape and scale plus a signed modular term.
pub fn random_concave(rng: &mut ChaCha8Rng, p: usize) -> Oracle {
    let shape = match rng.random_range(0..3) {
        0 => ConcaveShape::Sqrt,
        1 => ConcaveShape::Log1p,
        _ => ConcaveShape::Truncated(rng.random_range(1..=p.max(1))),
    };
    let scale = rng.random_range(0.5..4.0);
    let weights = (0..p).map(|_| rng.random_range(-2.5..2.5)).collect();
    Oracle::new(ConcaveCardinality::new(p, shape, scale, weights))
}

/// An 8-neighbor grid of `p` pixels (row-major, last row possibly partial)
/// with random nonnegative edge weights and signed unary potentials.
pub fn random_grid_cut(rng: &mut ChaCha8Rng, p: usize) -> Oracle {
    let width = ((p as f64).sqrt().ceil() as usize).max(1);
    let id = |r: usize, c: usize| r * width + c;
    let mut edges = Vec::new();
    for v in 0..p {
        let (r, c) = (v / width, v % width);
        let mut nbrs = vec![];
        if c + 1 < width {
            nbrs.push(id(r, c + 1));
            nbrs.push(id(r + 1, c + 1));
        }
        nbrs.push(id(r + 1, c));
        if c > 0 {
            nbrs.push(id(r + 1, c - 1));
        }
        for u in nbrs {
            if u < p {
                edges.push((v, u, rng.random_range(0.0..1.5)));
            }
        }
    }
    let unary = (0..p).map(|_| rng.random_range(-4.0..4.0)).collect();
    let graph = WeightedGraph::new(p, edges).expect("grid edges are valid");
    Oracle::new(CutFunction::new(graph, unary).expect("unary length matches"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodular::{brute_force_sfm, submodularity_violation};
    use crate::ElementSet;

    #[test]
    fn every_family_is_submodular() {
        for family in Family::ALL {
            for p in 1..=10 {
                for seed in 0..3 {
                    let f = family.instance(p, seed);
                    assert_eq!(f.evaluate(&ElementSet::empty(p)), 0.0);
                    assert!(
                        submodularity_violation(&f, 1e-9).unwrap().is_none(),
                        "{family} p={p} seed={seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn families_are_deterministic() {
        for family in Family::ALL {
            let a = brute_force_sfm(&family.instance(8, 42)).unwrap();
            let b = brute_force_sfm(&family.instance(8, 42)).unwrap();
            assert_eq!(a.min_value, b.min_value);
            assert_eq!(a.minimal, b.minimal);
        }
    }

    #[test]
    fn modular_family_matches_weights() {
        let f = Oracle::new(Modular::new(vec![1.0, -2.0, 3.0]));
        assert_eq!(f.evaluate(&ElementSet::from_indices(3, [0, 2])), 4.0);
        assert_eq!("cut".parse::<Family>().unwrap(), Family::GridCut);
        assert!("bogus".parse::<Family>().is_err());
    }
}
