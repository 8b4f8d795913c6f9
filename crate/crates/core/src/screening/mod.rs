//! Safe screening: elements proven to lie inside (active) or outside
//! (inactive) the minimizer are fixed and the problem is contracted.

mod rules;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use rules::{
    best_superlevel_set, bound_coefficients, classify, coordinate_bounds_bp, l1_max_under_sign, CoordinateBounds,
    GapCertificate, ScreeningVariant, SignConstraint, RULE_MARGIN,
};

use crate::solver::{default_max_iter, DualSolver, Snapshot, SolverKind, TraceRow};
use crate::submodular::greedy_linear_maximize;
use crate::{ElementSet, Error, Oracle, Result};

/// Screening verdicts so far, in root indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScreeningState {
    pub active: ElementSet,
    pub inactive: ElementSet,
    /// Root indices of the surviving ground set, ascending.
    pub remaining: Vec<usize>,
    /// `F(active)` on the root function.
    pub f_active: f64,
}

impl ScreeningState {
    pub fn new(p: usize) -> Self {
        Self {
            active: ElementSet::empty(p),
            inactive: ElementSet::empty(p),
            remaining: (0..p).collect(),
            f_active: 0.0,
        }
    }

    pub fn p(&self) -> usize {
        self.active.universe()
    }

    pub fn rejection_ratio(&self) -> f64 {
        let p = self.p();
        if p == 0 {
            return 1.0;
        }
        (self.active.len() + self.inactive.len()) as f64 / p as f64
    }

    /// Adds verdicts in root indices.
    pub fn absorb(&mut self, root: &Oracle, active: &ElementSet, inactive: &ElementSet) -> Result<()> {
        if let Some(j) = active.intersection(inactive).iter().next() {
            return Err(Error::ConflictingVerdict(j));
        }
        if let Some(j) = active.intersection(&self.inactive).iter().next() {
            return Err(Error::ConflictingVerdict(j));
        }
        if let Some(j) = inactive.intersection(&self.active).iter().next() {
            return Err(Error::ConflictingVerdict(j));
        }
        self.active = self.active.union(active);
        self.inactive = self.inactive.union(inactive);
        let decided = self.active.union(&self.inactive);
        self.remaining.retain(|&j| !decided.contains(j));
        self.f_active = root.evaluate(&self.active);
        Ok(())
    }
}

/// `G(C) = F(active ∪ C) - F(active)` on the surviving elements of `root`.
pub fn contract(root: &Oracle, state: &ScreeningState) -> Oracle {
    assert_eq!(root.p(), state.p(), "state built for another ground set");
    root.contract(&state.active, &state.inactive)
}

/// Applies every enabled rule to each coordinate of `cert`, which belongs to
/// the reduced problem of `state`. Returns new verdicts in root indices.
pub fn screen_pass(
    cert: &GapCertificate,
    state: &ScreeningState,
    variant: ScreeningVariant,
) -> Result<(ElementSet, ElementSet)> {
    if cert.p() != state.remaining.len() {
        return Err(Error::DimensionMismatch {
            expected: state.remaining.len(),
            got: cert.p(),
        });
    }
    let p = state.p();
    let mut active = ElementSet::empty(p);
    let mut inactive = ElementSet::empty(p);
    for (j, &root) in state.remaining.iter().enumerate() {
        match classify(cert, j, variant).map_err(|e| match e {
            Error::ConflictingVerdict(_) => Error::ConflictingVerdict(root),
            other => other,
        })? {
            Some(true) => {
                active.insert(root);
            }
            Some(false) => {
                inactive.insert(root);
            }
            None => {}
        }
    }
    Ok((active, inactive))
}

/// Drops screened coordinates from `w_hat` and returns the greedy vertex of the
/// contracted oracle at the restriction. `screened` is over the old reduced set.
pub fn restrict_iterates(w_hat: &[f64], screened: &ElementSet, oracle_new: &Oracle) -> (Vec<f64>, Vec<f64>) {
    let w: Vec<f64> = (0..w_hat.len())
        .filter(|&j| !screened.contains(j))
        .map(|j| w_hat[j])
        .collect();
    assert_eq!(w.len(), oracle_new.p());
    let s = greedy_linear_maximize(oracle_new, &w).coords;
    (w, s)
}

#[derive(Clone, Debug)]
pub struct IaesOptions {
    pub eps: f64,
    pub rho: f64,
    pub solver: SolverKind,
    pub variant: ScreeningVariant,
    /// Budget of solver steps summed over all contractions; `None` uses `50 p`.
    pub max_iter: Option<usize>,
}

impl Default for IaesOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            rho: 0.5,
            solver: SolverKind::Wolfe,
            variant: ScreeningVariant::Iaes,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriggerRow {
    pub trigger_index: usize,
    pub solver_iteration: usize,
    pub gap: f64,
    pub n_active: usize,
    pub n_inactive: usize,
    pub rejection_ratio: f64,
    pub p_hat: usize,
    pub oracle_calls: u64,
    pub elapsed_ns: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IaesReport {
    pub triggers: Vec<TriggerRow>,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub final_gap: f64,
    pub oracle_calls: u64,
    pub screen_time: Duration,
    pub solver_time: Duration,
    pub state: ScreeningState,
}

impl IaesReport {
    pub fn rejection_ratio(&self) -> f64 {
        self.state.rejection_ratio()
    }
}

#[derive(Clone, Debug)]
pub struct IaesOutcome {
    pub set: ElementSet,
    pub value: f64,
    pub report: IaesReport,
}

/// Screened minimization with the default variant (all four rules).
pub fn iaes_solve(oracle: &Oracle, eps: f64, rho: f64, solver: SolverKind) -> Result<IaesOutcome> {
    let opts = IaesOptions {
        eps,
        rho,
        solver,
        ..IaesOptions::default()
    };
    iaes_solve_with(oracle, &opts, &mut |_, _, _| {})
}

/// Runs the solver on a shrinking problem. Whenever the gap falls below
/// `rho` times its value at the previous trigger, the current certificate is
/// screened, decided elements are contracted away and the solver restarts
/// from the restricted iterate. `observer` sees every trace row together with
/// the snapshot and the state it belongs to.
pub fn iaes_solve_with(
    root: &Oracle,
    opts: &IaesOptions,
    observer: &mut dyn FnMut(&TraceRow, &Snapshot, &ScreeningState),
) -> Result<IaesOutcome> {
    if !(opts.eps > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "eps must be positive, got {}",
            opts.eps
        )));
    }
    if !(opts.rho > 0.0 && opts.rho < 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "rho must lie in (0, 1), got {}",
            opts.rho
        )));
    }
    if !root.fixed().is_empty() || root.p() != root.root_size() {
        return Err(Error::PreconditionViolated(
            "iaes_solve expects an uncontracted oracle".into(),
        ));
    }
    let p = root.p();
    let max_iter = opts.max_iter.unwrap_or_else(|| default_max_iter(p));
    let start = Instant::now();
    let calls0 = root.calls();
    let mut screen_time = Duration::ZERO;
    let mut solver_time = Duration::ZERO;

    let mut state = ScreeningState::new(p);
    let mut report = IaesReport {
        triggers: Vec::new(),
        trace: Vec::new(),
        iterations: 0,
        final_gap: f64::INFINITY,
        oracle_calls: 0,
        screen_time,
        solver_time,
        state: state.clone(),
    };
    let finish = |state: ScreeningState, mut report: IaesReport, set: ElementSet, screen_time, solver_time| {
        report.oracle_calls = root.calls() - calls0;
        report.screen_time = screen_time;
        report.solver_time = solver_time;
        report.state = state;
        let value = root.evaluate(&set);
        IaesOutcome { set, value, report }
    };
    if p == 0 {
        report.final_gap = 0.0;
        return Ok(finish(state, report, ElementSet::empty(0), screen_time, solver_time));
    }

    let t = Instant::now();
    let mut oracle = root.clone();
    let mut solver: Box<dyn DualSolver> = opts.solver.start(oracle.clone(), &vec![0.0; p])?;
    solver_time += t.elapsed();
    let mut trigger_gap = f64::INFINITY;
    let mut iteration = 0usize;

    loop {
        let snap = solver.snapshot();
        let row = TraceRow {
            iteration,
            gap: snap.gap,
            dual_norm: snap.dual_norm(),
            oracle_calls: root.calls() - calls0,
            elapsed_ns: start.elapsed().as_nanos(),
        };
        observer(&row, snap, &state);
        report.trace.push(row);
        report.final_gap = snap.gap;
        let converged = snap.gap <= opts.eps;

        if opts.variant != ScreeningVariant::None && (snap.gap < opts.rho * trigger_gap || converged) {
            let t = Instant::now();
            let cert = GapCertificate::from_snapshot(snap);
            let (new_active, new_inactive) = screen_pass(&cert, &state, opts.variant)?;
            let reduced_screened = ElementSet::from_indices(
                oracle.p(),
                (0..oracle.p()).filter(|&j| {
                    let r = state.remaining[j];
                    new_active.contains(r) || new_inactive.contains(r)
                }),
            );
            let w_hat = snap.w.clone();
            let screened_any = !reduced_screened.is_empty();
            if screened_any {
                state.absorb(root, &new_active, &new_inactive)?;
            }
            report.triggers.push(TriggerRow {
                trigger_index: report.triggers.len(),
                solver_iteration: iteration,
                gap: snap.gap,
                n_active: state.active.len(),
                n_inactive: state.inactive.len(),
                rejection_ratio: state.rejection_ratio(),
                p_hat: state.remaining.len(),
                oracle_calls: root.calls() - calls0,
                elapsed_ns: start.elapsed().as_nanos(),
            });
            if state.remaining.is_empty() {
                screen_time += t.elapsed();
                report.iterations = iteration;
                let set = state.active.clone();
                return Ok(finish(state, report, set, screen_time, solver_time));
            }
            if screened_any {
                oracle = contract(root, &state);
                let (w_new, _) = restrict_iterates(&w_hat, &reduced_screened, &oracle);
                solver = opts.solver.start(oracle.clone(), &w_new)?;
                trigger_gap = solver.snapshot().gap;
                screen_time += t.elapsed();
                continue;
            }
            trigger_gap = snap.gap;
            screen_time += t.elapsed();
        }

        let snap = solver.snapshot();
        if converged {
            report.iterations = iteration;
            let (reduced, _) = snap.recovered_set(&oracle);
            let mut set = state.active.clone();
            for j in reduced.iter() {
                set.insert(state.remaining[j]);
            }
            return Ok(finish(state, report, set, screen_time, solver_time));
        }
        if iteration >= max_iter {
            return Err(Error::MaxIterationsExceeded(Box::new(crate::solver::SolveReport {
                w_star: snap.w.clone(),
                s_star: snap.s.clone(),
                final_gap: snap.gap,
                iterations: iteration,
                oracle_calls: root.calls() - calls0,
                converged: false,
                trace: report.trace,
            })));
        }
        if solver.stalled() {
            return Err(Error::NumericalBreakdown(format!(
                "solver stalled at gap {:e} after {iteration} iterations",
                snap.gap
            )));
        }
        let t = Instant::now();
        solver.step()?;
        solver_time += t.elapsed();
        iteration += 1;
    }
}

#[cfg(test)]
mod tests;
