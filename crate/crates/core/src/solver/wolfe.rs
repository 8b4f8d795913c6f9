use super::{DualSolver, Snapshot};
use crate::submodular::dot;
use crate::{Error, Oracle, Result};

/// Atoms whose convex weight falls below this are dropped from the corral.
const DROP_WEIGHT: f64 = 1e-12;
const JITTER: f64 = 1e-12;

/// Wolfe's minimum-norm-point algorithm over `B(F)`.
///
/// The iterate is kept as a convex combination of greedy vertices (the
/// corral). Each major cycle adds the vertex minimizing `<x, q>`; minor cycles
/// move to the affine minimizer of the corral and drop atoms until it lies
/// inside the convex hull.
pub struct Wolfe {
    oracle: Oracle,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    gram: Vec<Vec<f64>>,
    snap: Snapshot,
    stalled: bool,
}

impl Wolfe {
    pub fn new(oracle: Oracle, vertex: Vec<f64>) -> Result<Self> {
        let g = dot(&vertex, &vertex);
        let snap = Snapshot::certify(&oracle, vertex.clone())?;
        Ok(Self {
            oracle,
            atoms: vec![vertex],
            weights: vec![1.0],
            gram: vec![vec![g]],
            snap,
            stalled: false,
        })
    }

    pub fn corral_size(&self) -> usize {
        self.atoms.len()
    }

    /// Convex decomposition of the current iterate.
    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.atoms
            .iter()
            .map(|a| a.as_slice())
            .zip(self.weights.iter().copied())
    }

    fn push_atom(&mut self, q: Vec<f64>) {
        let row: Vec<f64> = self.atoms.iter().map(|a| dot(a, &q)).collect();
        for (r, &v) in self.gram.iter_mut().zip(&row) {
            r.push(v);
        }
        let mut row = row;
        row.push(dot(&q, &q));
        self.gram.push(row);
        self.atoms.push(q);
        self.weights.push(0.0);
    }

    fn drop_small(&mut self) {
        let keep: Vec<bool> = self.weights.iter().map(|&l| l >= DROP_WEIGHT).collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut idx = 0;
        self.atoms.retain(|_| {
            idx += 1;
            keep[idx - 1]
        });
        let mut idx = 0;
        self.weights.retain(|_| {
            idx += 1;
            keep[idx - 1]
        });
        let mut idx = 0;
        self.gram.retain(|_| {
            idx += 1;
            keep[idx - 1]
        });
        for row in &mut self.gram {
            let mut idx = 0;
            row.retain(|_| {
                idx += 1;
                keep[idx - 1]
            });
        }
        let total: f64 = self.weights.iter().sum();
        for l in &mut self.weights {
            *l /= total;
        }
    }

    /// Affine minimizer weights: `M^{-1} 1 / (1' M^{-1} 1)` with `M = Q'Q + 11'`.
    fn affine_minimizer(&self) -> Result<Vec<f64>> {
        let k = self.atoms.len();
        let mut m: Vec<Vec<f64>> = self.gram.iter().map(|r| r.iter().map(|v| v + 1.0).collect()).collect();
        let rhs = vec![1.0; k];
        let y = match cholesky_solve(&m, &rhs) {
            Some(y) => y,
            None => {
                let trace: f64 = (0..k).map(|i| m[i][i]).sum();
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] += JITTER * trace;
                }
                cholesky_solve(&m, &rhs)
                    .ok_or_else(|| Error::NumericalBreakdown(format!("corral of {k} atoms is affinely dependent")))?
            }
        };
        let total: f64 = y.iter().sum();
        if !(total.abs() > 0.0) || !total.is_finite() {
            return Err(Error::NumericalBreakdown("degenerate affine minimizer".into()));
        }
        Ok(y.into_iter().map(|v| v / total).collect())
    }

    fn combine(&self) -> Vec<f64> {
        let p = self.oracle.p();
        let mut x = vec![0.0; p];
        for (a, &l) in self.atoms.iter().zip(&self.weights) {
            for (xi, ai) in x.iter_mut().zip(a) {
                *xi += l * ai;
            }
        }
        x
    }

    fn minor_cycles(&mut self) -> Result<()> {
        loop {
            let alpha = self.affine_minimizer()?;
            if alpha.iter().all(|&a| a > DROP_WEIGHT) {
                self.weights = alpha;
                return Ok(());
            }
            // largest step from weights toward alpha that stays feasible
            let mut theta = 1.0f64;
            for (&l, &a) in self.weights.iter().zip(&alpha) {
                if a <= DROP_WEIGHT && l > a {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, &a) in self.weights.iter_mut().zip(&alpha) {
                *l = (*l + theta * (a - *l)).max(0.0);
            }
            let before = self.atoms.len();
            self.drop_small();
            if self.atoms.len() == before {
                // theta hit an atom that rounding kept just above the threshold
                let (j, _) = self
                    .weights
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("corral is nonempty");
                self.weights[j] = 0.0;
                self.drop_small();
            }
        }
    }
}

impl DualSolver for Wolfe {
    fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    fn snapshot(&self) -> &Snapshot {
        &self.snap
    }

    fn step(&mut self) -> Result<()> {
        let x = &self.snap.s;
        let q = self.snap.pass.vertex.clone();
        let scale = self
            .gram
            .iter()
            .enumerate()
            .map(|(i, r)| r[i])
            .fold(dot(&q, &q), f64::max);
        let progress = dot(x, x) - dot(x, &q);
        let duplicate = self
            .atoms
            .iter()
            .any(|a| a.iter().zip(&q).all(|(u, v)| (u - v).abs() <= 1e-14 * (1.0 + v.abs())));
        if progress <= 1e-14 * scale.max(1.0) || duplicate {
            self.stalled = true;
            return Ok(());
        }
        self.push_atom(q);
        self.minor_cycles()?;
        let x = self.combine();
        self.snap = Snapshot::certify(&self.oracle, x)?;
        Ok(())
    }

    fn stalled(&self) -> bool {
        self.stalled
    }
}

/// Solves `M y = b` for symmetric positive definite `M`; `None` on a
/// nonpositive pivot.
fn cholesky_solve(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let k = m.len();
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let sum = m[i][j] - (0..j).map(|t| l[i][t] * l[j][t]).sum::<f64>();
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..k {
        for t in 0..i {
            y[i] -= l[i][t] * y[t];
        }
        y[i] /= l[i][i];
    }
    for i in (0..k).rev() {
        for t in i + 1..k {
            y[i] -= l[t][i] * y[t];
        }
        y[i] /= l[i][i];
    }
    Some(y)
}
