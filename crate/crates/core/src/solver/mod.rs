//! Solvers for the proximal pair
//! `min_w f(w) + |w|^2 / 2` and `max_{s in B(F)} -|s|^2 / 2`.

mod frank_wolfe;
mod pav;
mod wolfe;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use frank_wolfe::{conditional_gradient_step, exact_line_search, FrankWolfe};
pub use pav::pav_refine;
pub use wolfe::Wolfe;

use crate::submodular::{decreasing_order, dot, greedy_linear_maximize, lovasz_extension, GreedyPass};
use crate::{ElementSet, Error, Oracle, Result};

/// Negative gaps above this are floating-point noise and clamp to zero.
pub const GAP_NOISE: f64 = 1e-9;

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v)
}

/// `P(w) = f(w) + |w|^2 / 2`.
pub fn primal_value(oracle: &Oracle, w: &[f64]) -> f64 {
    lovasz_extension(oracle, w) + 0.5 * norm2(w)
}

/// `D(s) = -|s|^2 / 2`.
pub fn dual_value(s: &[f64]) -> f64 {
    -0.5 * norm2(s)
}

fn clamp_gap(gap: f64) -> Result<f64> {
    if gap < -GAP_NOISE || gap.is_nan() {
        return Err(Error::NegativeGap(gap));
    }
    Ok(gap.max(0.0))
}

/// `P(w) - D(s)`, with one fresh greedy pass for `f(w)`.
pub fn duality_gap(oracle: &Oracle, w: &[f64], s: &[f64]) -> Result<f64> {
    clamp_gap(primal_value(oracle, w) - dual_value(s))
}

/// Everything a solver knows about one dual iterate after its greedy pass.
#[derive(Clone, Debug)]
pub struct Snapshot {
    /// Primal candidate: pool-adjacent-violators refinement along the order of `-s`.
    pub w: Vec<f64>,
    /// Dual iterate, a convex combination of greedy vertices.
    pub s: Vec<f64>,
    pub gap: f64,
    /// Greedy pass along the decreasing order of `-s`; its vertex minimizes
    /// `<s, v>` over `B(F)` and its prefixes include every super-level set of `w`.
    pub pass: GreedyPass,
}

impl Snapshot {
    /// Builds the certificate for `s` from one greedy pass.
    ///
    /// On the cone of vectors ordered like `-s` the Lovász extension is linear
    /// with gradient `q` (the greedy vertex), so the best primal point in that
    /// cone is the isotonic projection of `-q`, and `f(w) = <w, q>` there.
    pub fn certify(oracle: &Oracle, s: Vec<f64>) -> Result<Self> {
        let neg: Vec<f64> = s.iter().map(|x| -x).collect();
        let pass = GreedyPass::along(oracle, decreasing_order(&neg));
        let w = pav_refine(&pass.vertex, &pass.order);
        let gap = clamp_gap(dot(&w, &pass.vertex) + 0.5 * norm2(&w) + 0.5 * norm2(&s))?;
        Ok(Self { w, s, gap, pass })
    }

    pub fn dual_norm(&self) -> f64 {
        norm2(&self.s).sqrt()
    }

    /// `F(V)` of the oracle this snapshot was taken on.
    pub fn ground_value(&self) -> f64 {
        *self.pass.values.last().expect("chain has at least one value")
    }

    /// Best prefix of the greedy chain as `(set, value)`.
    pub fn best_superlevel(&self) -> (ElementSet, f64) {
        let (k, v) = self.pass.best_prefix();
        (self.pass.prefix_set(k), v)
    }

    /// `{w > 0}`, or the best prefix of the chain when that is strictly
    /// better by more than `1e-9` relative.
    pub fn recovered_set(&self, oracle: &Oracle) -> (ElementSet, f64) {
        let p = self.w.len();
        let positive = ElementSet::from_indices(p, (0..p).filter(|&j| self.w[j] > 0.0));
        let value = oracle.evaluate(&positive);
        let (best, best_value) = self.best_superlevel();
        if best_value < value - 1e-9 * value.abs().max(1.0) {
            (best, best_value)
        } else {
            (positive, value)
        }
    }
}

/// A dual solver driven one major iteration at a time.
pub trait DualSolver: Send {
    fn oracle(&self) -> &Oracle;

    /// Certificate of the current iterate.
    fn snapshot(&self) -> &Snapshot;

    /// Advances one iteration and re-certifies.
    fn step(&mut self) -> Result<()>;

    /// True when the last step could not move the iterate.
    fn stalled(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Wolfe,
    FrankWolfe,
}

impl SolverKind {
    /// Starts from the greedy vertex at `w` (identity order when `w = 0`).
    pub fn start(self, oracle: Oracle, w: &[f64]) -> Result<Box<dyn DualSolver>> {
        let vertex = greedy_linear_maximize(&oracle, w).coords;
        Ok(match self {
            SolverKind::Wolfe => Box::new(Wolfe::new(oracle, vertex)?),
            SolverKind::FrankWolfe => Box::new(FrankWolfe::with_away_steps(oracle, vertex)?),
        })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Wolfe => "wolfe",
            SolverKind::FrankWolfe => "frank_wolfe",
        })
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "wolfe" | "min_norm" | "minnorm" => Ok(SolverKind::Wolfe),
            "frank_wolfe" | "frank-wolfe" | "fw" => Ok(SolverKind::FrankWolfe),
            other => Err(format!("unknown solver '{other}'")),
        }
    }
}

/// Default major-iteration budget.
pub fn default_max_iter(p: usize) -> usize {
    (50 * p).max(100)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub gap: f64,
    pub dual_norm: f64,
    pub oracle_calls: u64,
    pub elapsed_ns: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub w_star: Vec<f64>,
    pub s_star: Vec<f64>,
    pub final_gap: f64,
    pub iterations: usize,
    pub oracle_calls: u64,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Runs `kind` on `oracle` until the duality gap is at most `eps`.
pub fn solve(
    kind: SolverKind,
    oracle: &Oracle,
    eps: f64,
    max_iter: usize,
    callback: &mut dyn FnMut(&TraceRow, &Snapshot),
) -> Result<SolveReport> {
    if !(eps > 0.0) {
        return Err(Error::PreconditionViolated(format!("eps must be positive, got {eps}")));
    }
    let start = Instant::now();
    let calls0 = oracle.calls();
    let mut solver = kind.start(oracle.clone(), &vec![0.0; oracle.p()])?;
    let mut trace = Vec::new();
    let mut iteration = 0;
    loop {
        let snap = solver.snapshot();
        let row = TraceRow {
            iteration,
            gap: snap.gap,
            dual_norm: snap.dual_norm(),
            oracle_calls: oracle.calls() - calls0,
            elapsed_ns: start.elapsed().as_nanos(),
        };
        callback(&row, snap);
        trace.push(row);
        let done = snap.gap <= eps;
        if done || iteration >= max_iter || solver.stalled() {
            let report = SolveReport {
                w_star: snap.w.clone(),
                s_star: snap.s.clone(),
                final_gap: snap.gap,
                iterations: iteration,
                oracle_calls: oracle.calls() - calls0,
                converged: done,
                trace,
            };
            if done {
                return Ok(report);
            }
            if solver.stalled() {
                return Err(Error::NumericalBreakdown(format!(
                    "solver stalled at gap {:e} after {iteration} iterations",
                    report.final_gap
                )));
            }
            return Err(Error::MaxIterationsExceeded(Box::new(report)));
        }
        solver.step()?;
        iteration += 1;
    }
}

/// Wolfe's minimum-norm-point algorithm to duality gap `eps`.
pub fn min_norm_point(
    oracle: &Oracle,
    eps: f64,
    max_iter: usize,
    callback: &mut dyn FnMut(&TraceRow, &Snapshot),
) -> Result<SolveReport> {
    solve(SolverKind::Wolfe, oracle, eps, max_iter, callback)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::families::Family;
    use crate::functions::{CutFunction, Modular, WeightedGraph};
    use crate::submodular::{brute_force_sfm, check_base_membership};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quiet() -> impl FnMut(&TraceRow, &Snapshot) {
        |_: &TraceRow, _: &Snapshot| {}
    }

    fn path3(unary: Vec<f64>) -> Oracle {
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        Oracle::new(CutFunction::new(g, unary).unwrap())
    }

    #[test]
    fn primal_dual_values() {
        let m = vec![1.0, -2.0, 3.0];
        let f = Oracle::new(Modular::new(m.clone()));
        assert_eq!(primal_value(&f, &[0.0; 3]), 0.0);
        let neg: Vec<f64> = m.iter().map(|x| -x).collect();
        assert!((primal_value(&f, &neg) - (-0.5 * 14.0)).abs() < 1e-12);
        assert_eq!(dual_value(&[0.0, 0.0]), 0.0);
        assert_eq!(dual_value(&[3.0, 4.0]), -12.5);
        assert!(duality_gap(&f, &neg, &m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gap_at_zero_on_path() {
        let f = path3(vec![-2.0, 0.0, 0.0]);
        // identity order: marginals -2+1, 0+1-2, 0+0-1... hand trace:
        // F({0}) = -1, F({0,1}) = -2 + 1 = -1, F(V) = -2.
        let s = greedy_linear_maximize(&f, &[0.0; 3]).coords;
        assert_eq!(s, vec![-1.0, 0.0, -1.0]);
        let gap = duality_gap(&f, &[0.0; 3], &s).unwrap();
        assert!((gap - 0.5 * norm2(&s)).abs() < 1e-12);
        assert_eq!(gap, 1.0);
    }

    #[test]
    fn negative_gap_is_an_error() {
        let f = Oracle::new(Modular::new(vec![1.0, 1.0]));
        // s = 0 lies outside B(F) and beats the true dual optimum
        assert!(matches!(
            duality_gap(&f, &[-1.0, -1.0], &[0.0, 0.0]),
            Err(Error::NegativeGap(_))
        ));
    }

    #[test]
    fn weak_duality_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let p = rng.random_range(1..8);
            let f = Family::GridCut.build(&mut rng, p);
            let w: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
            let u: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
            let s = greedy_linear_maximize(&f, &u).coords;
            assert!(primal_value(&f, &w) - dual_value(&s) >= -1e-9);
            assert!(duality_gap(&f, &w, &s).unwrap() >= 0.0);
        }
    }

    #[test]
    fn modular_converges_immediately() {
        let m = vec![1.0, -2.0, 3.0];
        let f = Oracle::new(Modular::new(m.clone()));
        let r = min_norm_point(&f, 1e-12, 10, &mut quiet()).unwrap();
        assert!(r.iterations <= 1);
        assert_eq!(r.s_star, m);
        assert_eq!(r.w_star, vec![-1.0, 2.0, -3.0]);
        assert!(r.final_gap <= 1e-12);
    }

    #[test]
    fn path_cut_recovers_minimal_minimizer() {
        let f = path3(vec![-2.0, 0.0, 0.0]);
        let r = min_norm_point(&f, 1e-9, 100, &mut quiet()).unwrap();
        let bf = brute_force_sfm(&f).unwrap();
        let positive = ElementSet::from_indices(3, (0..3).filter(|&j| r.w_star[j] > 0.0));
        assert_eq!(positive, bf.minimal);
    }

    #[test]
    fn sandwich_on_random_instances() {
        for seed in 0..200u64 {
            let family = Family::ALL[seed as usize % 4];
            let p = 2 + (seed as usize % 9);
            let f = family.instance(p, seed);
            let r = min_norm_point(&f, 1e-12, default_max_iter(p), &mut quiet()).unwrap();
            let bf = brute_force_sfm(&f).unwrap();
            let tol = 1e-6;
            let strict = ElementSet::from_indices(p, (0..p).filter(|&j| r.w_star[j] > tol));
            let weak = ElementSet::from_indices(p, (0..p).filter(|&j| r.w_star[j] >= -tol));
            assert!(strict.is_subset(&bf.minimal), "{family} seed {seed}");
            assert!(bf.maximal.is_subset(&weak), "{family} seed {seed}");
        }
    }

    #[test]
    fn iterates_stay_in_base_polytope_and_norm_decreases() {
        for seed in 0..30u64 {
            let family = Family::ALL[seed as usize % 4];
            let p = 3 + seed as usize % 7;
            let f = family.instance(p, seed);
            let mut last = f64::INFINITY;
            let mut cb = |_: &TraceRow, snap: &Snapshot| {
                assert!(check_base_membership(&f, &snap.s, 1e-8).unwrap());
                let n = snap.dual_norm();
                assert!(n <= last + 1e-10);
                last = n;
            };
            min_norm_point(&f, 1e-10, default_max_iter(p), &mut cb).unwrap();
        }
    }

    #[test]
    fn gap_ball_contains_optimum() {
        for seed in 0..30u64 {
            let family = Family::ALL[seed as usize % 4];
            let p = 3 + seed as usize % 8;
            let f = family.instance(p, seed);
            let exact = min_norm_point(&f, 1e-12, default_max_iter(p), &mut quiet()).unwrap();
            let mut cb = |row: &TraceRow, snap: &Snapshot| {
                let d2: f64 = snap.w.iter().zip(&exact.w_star).map(|(a, b)| (a - b).powi(2)).sum();
                assert!(d2.sqrt() <= (2.0 * row.gap).sqrt() + 1e-6);
            };
            min_norm_point(&f, 1e-8, default_max_iter(p), &mut cb).unwrap();
        }
    }

    #[test]
    fn max_iterations_carries_best_iterate() {
        let f = Family::GridCut.instance(12, 1);
        match min_norm_point(&f, 1e-14, 1, &mut quiet()) {
            Err(Error::MaxIterationsExceeded(report)) => {
                assert_eq!(report.iterations, 1);
                assert!(!report.converged);
                assert_eq!(report.w_star.len(), 12);
            }
            other => panic!("expected MaxIterationsExceeded, got {other:?}"),
        }
        assert!(min_norm_point(&f, 0.0, 1, &mut quiet()).is_err());
    }

    #[test]
    fn frank_wolfe_agrees_with_wolfe() {
        for seed in 0..12u64 {
            let family = Family::ALL[seed as usize % 4];
            let p = 3 + seed as usize % 8;
            let f = family.instance(p, seed);
            let exact = min_norm_point(&f, 1e-12, default_max_iter(p), &mut quiet()).unwrap();
            let mut fw =
                FrankWolfe::with_away_steps(f.clone(), greedy_linear_maximize(&f, &vec![0.0; p]).coords).unwrap();
            for _ in 0..10_000 {
                if fw.snapshot().gap < 1e-12 {
                    break;
                }
                fw.step().unwrap();
            }
            let a = norm2(&exact.s_star).sqrt();
            let b = fw.snapshot().dual_norm();
            assert!((a - b).abs() < 1e-4, "{family} seed {seed}: {a} vs {b}");
        }
    }
}
