use super::{DualSolver, Snapshot};
use crate::submodular::dot;
use crate::{Oracle, Result};

/// Step size minimizing `|x + t (q - x)|^2` over `t` in `[0, 1]`.
pub fn exact_line_search(x: &[f64], q: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in x.iter().zip(q) {
        let d = a - b;
        num += a * d;
        den += d * d;
    }
    if den <= 0.0 {
        return 0.0;
    }
    (num / den).clamp(0.0, 1.0)
}

/// One conditional-gradient update toward the vertex `q`.
pub fn conditional_gradient_step(x: &[f64], q: &[f64]) -> Vec<f64> {
    let t = exact_line_search(x, q);
    x.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
}

/// Frank-Wolfe with exact line search: the slow, simple reference solver.
///
/// With away steps enabled the iterate keeps its vertex decomposition and may
/// move weight off the worst active vertex, which gives linear convergence on
/// polytopes instead of the `O(1/t)` rate of the plain method.
pub struct FrankWolfe {
    oracle: Oracle,
    snap: Snapshot,
    stalled: bool,
    away: Option<Vec<(Vec<f64>, f64)>>,
}

impl FrankWolfe {
    pub fn new(oracle: Oracle, vertex: Vec<f64>) -> Result<Self> {
        let snap = Snapshot::certify(&oracle, vertex)?;
        Ok(Self {
            oracle,
            snap,
            stalled: false,
            away: None,
        })
    }

    pub fn with_away_steps(oracle: Oracle, vertex: Vec<f64>) -> Result<Self> {
        let mut fw = Self::new(oracle, vertex.clone())?;
        fw.away = Some(vec![(vertex, 1.0)]);
        Ok(fw)
    }

    fn away_step(&mut self) -> Result<()> {
        let x = self.snap.s.clone();
        let q = self.snap.pass.vertex.clone();
        let atoms = self.away.as_mut().expect("away steps enabled");
        let (a, &(ref av, la)) = atoms
            .iter()
            .enumerate()
            .max_by(|u, v| dot(&x, &u.1 .0).total_cmp(&dot(&x, &v.1 .0)))
            .expect("decomposition is nonempty");
        let toward: f64 = dot(&x, &x) - dot(&x, &q);
        let from: f64 = dot(&x, av) - dot(&x, &x);
        let (dir, max_step, is_fw): (Vec<f64>, f64, bool) = if toward >= from {
            (q.iter().zip(&x).map(|(b, a)| b - a).collect(), 1.0, true)
        } else {
            let d = x.iter().zip(av).map(|(a, b)| a - b).collect();
            (d, if la < 1.0 { la / (1.0 - la) } else { f64::INFINITY }, false)
        };
        let dd = dot(&dir, &dir);
        let num = -dot(&x, &dir);
        if dd <= 0.0 || num <= 0.0 {
            self.stalled = toward > 0.0;
            return Ok(());
        }
        let gamma = (num / dd).min(max_step);
        if is_fw {
            for (_, l) in atoms.iter_mut() {
                *l *= 1.0 - gamma;
            }
            match atoms.iter_mut().find(|(v, _)| *v == q) {
                Some((_, l)) => *l += gamma,
                None => atoms.push((q, gamma)),
            }
            if gamma >= 1.0 {
                atoms.retain(|(v, _)| v == &self.snap.pass.vertex);
            }
        } else {
            for (_, l) in atoms.iter_mut() {
                *l *= 1.0 + gamma;
            }
            atoms[a].1 -= gamma;
            if gamma >= max_step {
                atoms.remove(a);
            }
        }
        atoms.retain(|&(_, l)| l > 0.0);
        let mut next = vec![0.0; x.len()];
        for (v, l) in atoms.iter() {
            for (n, vi) in next.iter_mut().zip(v) {
                *n += l * vi;
            }
        }
        self.snap = Snapshot::certify(&self.oracle, next)?;
        Ok(())
    }
}

impl DualSolver for FrankWolfe {
    fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    fn snapshot(&self) -> &Snapshot {
        &self.snap
    }

    fn step(&mut self) -> Result<()> {
        if self.away.is_some() {
            return self.away_step();
        }
        let x = &self.snap.s;
        let q = &self.snap.pass.vertex;
        if exact_line_search(x, q) == 0.0 {
            self.stalled = dot(x, x) - dot(x, q) > 0.0;
            return Ok(());
        }
        let next = conditional_gradient_step(x, q);
        self.snap = Snapshot::certify(&self.oracle, next)?;
        Ok(())
    }

    fn stalled(&self) -> bool {
        self.stalled
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_search_examples() {
        assert_eq!(exact_line_search(&[1.0, 0.0], &[0.0, 1.0]), 0.5);
        assert_eq!(exact_line_search(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
        assert_eq!(exact_line_search(&[1.0, 0.0], &[-1.0, 0.0]), 0.5);
        assert_eq!(exact_line_search(&[1.0, 0.0], &[0.0, 0.0]), 1.0);
        assert_eq!(exact_line_search(&[1.0, 0.0], &[2.0, 0.0]), 0.0);
        let y = conditional_gradient_step(&[1.0, 0.0], &[0.0, 1.0]);
        assert_eq!(y, vec![0.5, 0.5]);
    }
}
