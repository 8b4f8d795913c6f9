//! Seeded instance generators: two-moons point clouds and grid images.

mod grid;
mod pnm;

pub use grid::{grid_edge_count, grid_graph_8, seed_unary, GridImage};
pub use pnm::{read_pnm, write_pnm, PnmFormat};

use std::f64::consts::FRAC_PI_2;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::functions::{gaussian_kernel, LabelPrior, MutualInformation};
use crate::{Error, Oracle, Result};

/// Moon centres.
pub const MOON_CENTRES: [[f64; 2]; 2] = [[-0.5, 1.0], [0.5, -1.0]];
/// Kernel bandwidth used by the semi-supervised experiments.
pub const DEFAULT_ALPHA: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoMoonsDataset {
    pub points: Vec<[f64; 2]>,
    /// 1 or 2.
    pub moon_id: Vec<u8>,
    /// `(index, positive)` sorted by index; positive means moon 1.
    pub labels: Vec<(usize, bool)>,
    pub seed: u64,
}

impl TwoMoonsDataset {
    pub fn p(&self) -> usize {
        self.points.len()
    }

    /// Mutual-information objective with a Gaussian kernel of bandwidth `alpha`.
    pub fn oracle(&self, alpha: f64) -> Result<Oracle> {
        let pts: Vec<Vec<f64>> = self.points.iter().map(|p| p.to_vec()).collect();
        let kernel = gaussian_kernel(&pts, alpha)?;
        let prior = LabelPrior::from_labels(self.p(), &self.labels, LabelPrior::DEFAULT_CLAMP)?;
        Ok(Oracle::new(MutualInformation::new(kernel, prior)?))
    }
}

/// Samples `p` points, each on moon 1 or 2 with equal probability, at
/// `c_i + gamma (cos theta, sin theta)` with `gamma ~ N(2, 0.25)`, and labels
/// `p0` of them chosen uniformly without replacement.
pub fn gen_two_moons(p: usize, p0: usize, seed: u64) -> Result<TwoMoonsDataset> {
    if p0 > p {
        return Err(Error::InvalidCounts(format!("p0 = {p0} exceeds p = {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = Normal::new(2.0, 0.5).expect("valid normal");
    let mut points = Vec::with_capacity(p);
    let mut moon_id = Vec::with_capacity(p);
    for _ in 0..p {
        let moon = if rng.random_bool(0.5) { 1u8 } else { 2u8 };
        let theta = if moon == 1 {
            rng.random_range(-FRAC_PI_2..=FRAC_PI_2)
        } else {
            rng.random_range(FRAC_PI_2..=3.0 * FRAC_PI_2)
        };
        let gamma = radius.sample(&mut rng);
        let c = MOON_CENTRES[moon as usize - 1];
        points.push([c[0] + gamma * theta.cos(), c[1] + gamma * theta.sin()]);
        moon_id.push(moon);
    }
    let mut picked = sample(&mut rng, p, p0).into_vec();
    picked.sort_unstable();
    let labels = picked.into_iter().map(|j| (j, moon_id[j] == 1)).collect();
    Ok(TwoMoonsDataset {
        points,
        moon_id,
        labels,
        seed,
    })
}
