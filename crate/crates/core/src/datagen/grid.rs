use serde::{Deserialize, Serialize};

use crate::functions::WeightedGraph;
use crate::{ElementSet, Error, Result};

/// Per-class variance floor for the seed model, in squared intensity units.
pub const VARIANCE_FLOOR: f64 = 1e-4;

/// Row-major pixels with interleaved channels, intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridImage {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub values: Vec<f64>,
}

impl GridImage {
    pub fn new(height: usize, width: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::PreconditionViolated(format!(
                "{channels} channels; expected 1 or 3"
            )));
        }
        if values.len() != height * width * channels {
            return Err(Error::DimensionMismatch {
                expected: height * width * channels,
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::PreconditionViolated(format!("non-finite intensity {v}")));
        }
        Ok(Self {
            height,
            width,
            channels,
            values,
        })
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn pixel(&self, j: usize) -> &[f64] {
        &self.values[j * self.channels..(j + 1) * self.channels]
    }
}

/// `H(W - 1) + (H - 1) W + 2 (H - 1)(W - 1)`.
pub fn grid_edge_count(height: usize, width: usize) -> usize {
    if height == 0 || width == 0 {
        return 0;
    }
    height * (width - 1) + (height - 1) * width + 2 * (height - 1) * (width - 1)
}

/// 8-neighbor grid over the pixels with weights `exp(-|x_i - x_j|^2)`.
pub fn grid_graph_8(image: &GridImage) -> WeightedGraph {
    let (h, w) = (image.height, image.width);
    let mut edges = Vec::with_capacity(grid_edge_count(h, w));
    let weight = |a: usize, b: usize| {
        let d2: f64 = image
            .pixel(a)
            .iter()
            .zip(image.pixel(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        (-d2).exp()
    };
    for r in 0..h {
        for c in 0..w {
            let v = r * w + c;
            let mut link = |u: usize| edges.push((v, u, weight(v, u)));
            if c + 1 < w {
                link(v + 1);
            }
            if r + 1 < h {
                link(v + w);
                if c + 1 < w {
                    link(v + w + 1);
                }
                if c > 0 {
                    link(v + w - 1);
                }
            }
        }
    }
    WeightedGraph::new(h * w, edges).expect("grid edges are distinct and nonnegative")
}

struct DiagonalGaussian {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl DiagonalGaussian {
    fn fit(image: &GridImage, seeds: &ElementSet) -> Self {
        let n = seeds.len() as f64;
        let mut mean = vec![0.0; image.channels];
        for j in seeds.iter() {
            for (m, x) in mean.iter_mut().zip(image.pixel(j)) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; image.channels];
        for j in seeds.iter() {
            for ((v, m), x) in var.iter_mut().zip(&mean).zip(image.pixel(j)) {
                *v += (x - m) * (x - m) / n;
            }
        }
        for v in &mut var {
            *v = v.max(VARIANCE_FLOOR);
        }
        Self { mean, var }
    }

    fn nll(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.mean)
            .zip(&self.var)
            .map(|((x, m), v)| 0.5 * (2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / (2.0 * v))
            .sum()
    }
}

/// Unary potentials from one diagonal Gaussian per seed set:
/// `u_j = strength (NLL_fg(x_j) - NLL_bg(x_j))`, so negative values pull a
/// pixel into the foreground. Seeds are pinned to `-10 strength` (foreground)
/// and `+10 strength` (background).
pub fn seed_unary(image: &GridImage, fg: &ElementSet, bg: &ElementSet, strength: f64) -> Result<Vec<f64>> {
    let p = image.pixels();
    if fg.universe() != p || bg.universe() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: fg.universe().max(bg.universe()),
        });
    }
    if fg.is_empty() || bg.is_empty() || !fg.is_disjoint(bg) {
        return Err(Error::EmptySeeds);
    }
    let fg_model = DiagonalGaussian::fit(image, fg);
    let bg_model = DiagonalGaussian::fit(image, bg);
    Ok((0..p)
        .map(|j| {
            if fg.contains(j) {
                -10.0 * strength
            } else if bg.contains(j) {
                10.0 * strength
            } else {
                let x = image.pixel(j);
                strength * (fg_model.nll(x) - bg_model.nll(x))
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(h: usize, w: usize, values: Vec<f64>) -> GridImage {
        GridImage::new(h, w, 1, values).unwrap()
    }

    /// Counts 8-neighbor pairs by scanning every pixel pair.
    fn enumerate_pairs(h: usize, w: usize) -> usize {
        let mut count = 0;
        for a in 0..h * w {
            for b in a + 1..h * w {
                let (ra, ca) = ((a / w) as i64, (a % w) as i64);
                let (rb, cb) = ((b / w) as i64, (b % w) as i64);
                if (ra - rb).abs() <= 1 && (ca - cb).abs() <= 1 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn small_grids() {
        assert_eq!(grid_edge_count(2, 2), 6);
        assert_eq!(grid_edge_count(3, 4), 29);
        assert_eq!(grid_graph_8(&gray(2, 2, vec![0.0; 4])).edges().len(), 6);
        let g = grid_graph_8(&gray(3, 4, vec![0.5; 12]));
        assert_eq!(g.edges().len(), 29);
        assert!(g.edges().iter().all(|&(i, j, w)| i < j && w == 1.0));
        assert_eq!(grid_edge_count(1, 1), 0);
        assert_eq!(grid_edge_count(0, 5), 0);
    }

    proptest! {
        #[test]
        fn edge_formula_matches_enumeration(h in 1usize..12, w in 1usize..12) {
            prop_assert_eq!(grid_edge_count(h, w), enumerate_pairs(h, w));
            prop_assert_eq!(grid_graph_8(&gray(h, w, vec![0.0; h * w])).edges().len(), grid_edge_count(h, w));
        }
    }

    #[test]
    fn weights_follow_color_distance() {
        let img = GridImage::new(1, 2, 3, vec![0.0, 0.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let g = grid_graph_8(&img);
        assert_eq!(g.edges(), &[(0, 1, (-2.0f64).exp())]);
    }

    #[test]
    fn seed_model_examples() {
        // two-value image: left half dark, right half bright
        let vals = vec![0.1, 0.1, 0.9, 0.9, 0.1, 0.1, 0.9, 0.9];
        let img = gray(2, 4, vals);
        let fg = ElementSet::from_indices(8, [0]);
        let bg = ElementSet::from_indices(8, [3]);
        let u = seed_unary(&img, &fg, &bg, 1.0).unwrap();
        assert_eq!(u[0], -10.0);
        assert_eq!(u[3], 10.0);
        assert!(u[4] < 0.0 && u[1] < 0.0);
        assert!(u[7] > 0.0);
        let swapped = seed_unary(&img, &bg, &fg, 1.0).unwrap();
        for (a, b) in u.iter().zip(&swapped) {
            assert_eq!(*a, -*b);
        }
        let flat = gray(2, 4, vec![0.4; 8]);
        let u = seed_unary(&flat, &fg, &bg, 2.0).unwrap();
        assert!(u.iter().enumerate().all(|(j, &v)| j == 0 || j == 3 || v.abs() < 1e-12));
    }

    #[test]
    fn seed_errors() {
        let img = gray(1, 3, vec![0.0; 3]);
        let one = ElementSet::from_indices(3, [0]);
        assert!(matches!(
            seed_unary(&img, &one, &ElementSet::empty(3), 1.0),
            Err(Error::EmptySeeds)
        ));
        assert!(matches!(seed_unary(&img, &one, &one, 1.0), Err(Error::EmptySeeds)));
        assert!(GridImage::new(1, 2, 2, vec![0.0; 4]).is_err());
        assert!(GridImage::new(1, 2, 1, vec![0.0; 3]).is_err());
    }
}
