//! Brute-force invariant battery.
//!
//! Every certificate met along a screened solve, plus a few random
//! primal-dual pairs per instance, is checked against exhaustive
//! minimization: screened elements must agree with the minimal and maximal
//! minimizers, the coordinate bounds and the signed `l1` maxima must dominate
//! sampled points of their regions and be attained by an explicit point.

use std::path::Path;

use iaes::functions::families::Family;
use iaes::screening::{
    contract, coordinate_bounds_bp, iaes_solve_with, l1_max_under_sign, screen_pass, GapCertificate, IaesOptions,
    ScreeningState, ScreeningVariant, SignConstraint,
};
use iaes::solver::{norm2, SolverKind};
use iaes::submodular::{
    brute_force_sfm, check_base_membership, greedy_linear_maximize, submodularity_violation, BruteForceMinimum,
    BRUTE_FORCE_LIMIT,
};
use iaes::{Error, Oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::{open_instance, CliError, CliResult};

pub const SUBMODULARITY_TOL: f64 = 1e-8;
pub const BASE_TOL: f64 = 1e-8;
pub const VALUE_TOL: f64 = 1e-9;
/// Relative slack for the closed-form comparisons.
pub const FORM_TOL: f64 = 1e-9;
pub const SAMPLES_PER_CERTIFICATE: usize = 32;
pub const RANDOM_PAIRS: usize = 4;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Number of random instances, or random pairs on a given instance.
    pub trials: usize,
    pub p_max: usize,
    pub seed: u64,
    /// Negate every certificate gap before screening (fault injection).
    pub corrupt_gap: bool,
    pub solver: SolverKind,
    pub eps: f64,
    pub rho: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 500,
            p_max: 10,
            seed: 0,
            corrupt_gap: false,
            solver: SolverKind::Wolfe,
            eps: 1e-6,
            rho: 0.5,
        }
    }
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub instances: usize,
    pub certificates: usize,
    pub screened: usize,
    pub submodularity_violations: usize,
    pub base_violations: usize,
    pub safety_violations: usize,
    pub conflicts: usize,
    pub value_mismatches: usize,
    pub bound_violations: usize,
    pub l1_violations: usize,
    pub numerical_errors: usize,
    pub first_error: Option<String>,
}

impl VerifyReport {
    pub fn violations(&self) -> usize {
        self.submodularity_violations
            + self.base_violations
            + self.safety_violations
            + self.conflicts
            + self.value_mismatches
            + self.bound_violations
            + self.l1_violations
    }

    pub fn to_json(&self) -> Value {
        json!({
            "instances": self.instances,
            "certificates": self.certificates,
            "screened": self.screened,
            "submodularity_violations": self.submodularity_violations,
            "base_violations": self.base_violations,
            "safety_violations": self.safety_violations,
            "conflicts": self.conflicts,
            "value_mismatches": self.value_mismatches,
            "bound_violations": self.bound_violations,
            "l1_violations": self.l1_violations,
            "numerical_errors": self.numerical_errors,
            "violations": self.violations(),
            "passed": self.violations() == 0 && self.numerical_errors == 0,
        })
    }

    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("instances: {}", self.instances),
            format!(
                "certificates: {} ({} elements screened)",
                self.certificates, self.screened
            ),
            format!("submodularity violations: {}", self.submodularity_violations),
            format!("base membership violations: {}", self.base_violations),
            format!("screening safety violations: {}", self.safety_violations),
            format!("conflicting verdicts: {}", self.conflicts),
            format!("value mismatches: {}", self.value_mismatches),
            format!("coordinate bound violations: {}", self.bound_violations),
            format!("l1 maximum violations: {}", self.l1_violations),
            format!("numerical errors: {}", self.numerical_errors),
        ]
    }

    fn record_error(&mut self, e: Error) {
        self.numerical_errors += 1;
        self.first_error.get_or_insert_with(|| e.to_string());
    }
}

fn check_guard(p_max: usize) -> CliResult<()> {
    if p_max > BRUTE_FORCE_LIMIT {
        return Err(CliError::Usage(format!(
            "--p-max {p_max} exceeds the exhaustive limit of {BRUTE_FORCE_LIMIT}"
        )));
    }
    Ok(())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn gaussian(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.sample(StandardNormal)).collect()
}

/// Screening verdicts of `cert` (a certificate of the problem reduced by
/// `state`) must be consistent with brute force on the root problem.
fn check_screening(cert: &GapCertificate, state: &ScreeningState, bf: &BruteForceMinimum, report: &mut VerifyReport) {
    match screen_pass(cert, state, ScreeningVariant::Iaes) {
        Ok((active, inactive)) => {
            report.screened += active.len() + inactive.len();
            report.safety_violations += active.iter().filter(|&j| !bf.maximal.contains(j)).count();
            report.safety_violations += inactive.iter().filter(|&j| bf.minimal.contains(j)).count();
        }
        Err(Error::ConflictingVerdict(_)) => report.conflicts += 1,
        Err(e) => report.record_error(e),
    }
}

/// Coordinate bounds over ball and plane.
fn check_bounds(cert: &GapCertificate, rng: &mut ChaCha8Rng, report: &mut VerifyReport) {
    let p = cert.p();
    if p < 2 {
        return;
    }
    let pf = p as f64;
    let r = cert.radius();
    let delta = cert.w_hat.iter().sum::<f64>() + cert.f_ground;
    let inner = (r * r - delta * delta / pf).max(0.0).sqrt();
    let centre: Vec<f64> = cert.w_hat.iter().map(|w| w - delta / pf).collect();
    let tol = FORM_TOL * (r + cert.w_hat.iter().map(|w| w.abs()).fold(1.0, f64::max));
    let bounds: Vec<_> = match (0..p)
        .map(|j| coordinate_bounds_bp(cert, j))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(b) => b,
        Err(e) => return report.record_error(e),
    };
    for b in &bounds {
        // the extreme point moves from the centre along e_j projected onto the plane
        let scale = inner / ((pf - 1.0) / pf).sqrt();
        for (sign, target) in [(1.0, b.w_max), (-1.0, b.w_min)] {
            let x: Vec<f64> = (0..p)
                .map(|i| centre[i] + sign * scale * (f64::from(u8::from(i == b.j)) - 1.0 / pf))
                .collect();
            let d: Vec<f64> = x.iter().zip(&cert.w_hat).map(|(a, b)| a - b).collect();
            let in_ball = norm2(&d).sqrt() <= r + tol;
            let on_plane = (x.iter().sum::<f64>() + cert.f_ground).abs() <= tol;
            if delta * delta <= pf * r * r && !(in_ball && on_plane && (x[b.j] - target).abs() <= tol) {
                report.bound_violations += 1;
            }
        }
    }
    for _ in 0..SAMPLES_PER_CERTIFICATE {
        let mut u = gaussian(rng, p);
        let mean = u.iter().sum::<f64>() / pf;
        u.iter_mut().for_each(|v| *v -= mean);
        let n = norm2(&u).sqrt();
        if n == 0.0 {
            continue;
        }
        let rad = inner * rng.random::<f64>().sqrt();
        for b in &bounds {
            let x = centre[b.j] + rad * u[b.j] / n;
            if x < b.w_min - tol || x > b.w_max + tol {
                report.bound_violations += 1;
            }
        }
    }
}

/// Signed `l1` maxima over the ball for every coordinate in their domain.
fn check_l1(cert: &GapCertificate, rng: &mut ChaCha8Rng, report: &mut VerifyReport) {
    let p = cert.p();
    let r = cert.radius();
    let pf = p as f64;
    let l1_hat: f64 = cert.w_hat.iter().map(|w| w.abs()).sum();
    let tol = FORM_TOL * (l1_hat + r * pf.sqrt()).max(1.0);
    for j in 0..p {
        let wj = cert.w_hat[j];
        if !(wj != 0.0 && wj.abs() <= r) {
            continue;
        }
        let sign = if wj > 0.0 {
            SignConstraint::Nonpositive
        } else {
            SignConstraint::Nonnegative
        };
        let value = match l1_max_under_sign(cert, j, sign) {
            Ok(v) => v,
            Err(e) => return report.record_error(e),
        };
        let allowed = |x: &[f64]| if wj > 0.0 { x[j] <= tol } else { x[j] >= -tol };
        // explicit maximizer: push every other coordinate away from zero and
        // coordinate j across it
        let x = wj.abs();
        let away = |w: f64| if w < 0.0 { -1.0 } else { 1.0 };
        let point: Vec<f64> = if x < r / pf.sqrt() {
            cert.w_hat
                .iter()
                .enumerate()
                .map(|(i, &w)| w + r / pf.sqrt() * if i == j { -away(wj) } else { away(w) })
                .collect()
        } else {
            let step = (r * r - x * x).max(0.0).sqrt() / (pf - 1.0).max(1.0).sqrt();
            cert.w_hat
                .iter()
                .enumerate()
                .map(|(i, &w)| if i == j { 0.0 } else { w + step * away(w) })
                .collect()
        };
        let d: Vec<f64> = point.iter().zip(&cert.w_hat).map(|(a, b)| a - b).collect();
        let attained = point.iter().map(|v| v.abs()).sum::<f64>();
        if !(norm2(&d).sqrt() <= r + tol && allowed(&point) && (attained - value).abs() <= tol) {
            report.l1_violations += 1;
        }
        for _ in 0..SAMPLES_PER_CERTIFICATE {
            let u = gaussian(rng, p);
            let n = norm2(&u).sqrt();
            if n == 0.0 {
                continue;
            }
            let rad = r * rng.random::<f64>().powf(1.0 / pf);
            let y: Vec<f64> = cert.w_hat.iter().zip(&u).map(|(w, u)| w + rad * u / n).collect();
            if allowed(&y) && y.iter().map(|v| v.abs()).sum::<f64>() > value + tol {
                report.l1_violations += 1;
            }
        }
    }
}

fn check_certificate(
    mut cert: GapCertificate,
    state: &ScreeningState,
    bf: &BruteForceMinimum,
    corrupt_gap: bool,
    rng: &mut ChaCha8Rng,
    report: &mut VerifyReport,
) {
    report.certificates += 1;
    check_bounds(&cert, rng, report);
    check_l1(&cert, rng, report);
    if corrupt_gap {
        cert.gap = -cert.gap;
    }
    check_screening(&cert, state, bf, report);
}

/// Runs the battery on one uncontracted oracle.
pub fn verify_oracle(
    root: &Oracle,
    opts: &VerifyOptions,
    pairs: usize,
    rng: &mut ChaCha8Rng,
    report: &mut VerifyReport,
) -> CliResult<()> {
    let p = root.p();
    if p > opts.p_max {
        return Err(CliError::Usage(format!(
            "instance has p = {p}, above --p-max {}",
            opts.p_max
        )));
    }
    report.instances += 1;
    let bf = brute_force_sfm(root)?;
    if submodularity_violation(root, SUBMODULARITY_TOL)?.is_some() {
        report.submodularity_violations += 1;
    }

    let fresh = ScreeningState::new(p);
    for _ in 0..pairs {
        if p == 0 {
            break;
        }
        let w = gaussian(rng, p);
        let s = greedy_linear_maximize(root, &gaussian(rng, p)).coords;
        match GapCertificate::for_pair(root, w, s) {
            Ok(cert) => check_certificate(cert, &fresh, &bf, opts.corrupt_gap, rng, report),
            Err(e) => report.record_error(e),
        }
    }

    let iaes_opts = IaesOptions {
        eps: opts.eps,
        rho: opts.rho,
        solver: opts.solver,
        variant: ScreeningVariant::Iaes,
        max_iter: None,
    };
    let mut reduced: Option<(usize, Oracle)> = None;
    let result = iaes_solve_with(root, &iaes_opts, &mut |row, snap, state| {
        let cert = GapCertificate::from_snapshot(snap);
        check_certificate(cert, state, &bf, opts.corrupt_gap, rng, report);
        if row.iteration.is_power_of_two() || row.iteration == 0 {
            let stale = reduced.as_ref().is_none_or(|(n, _)| *n != state.remaining.len());
            if stale {
                reduced = Some((state.remaining.len(), contract(root, state)));
            }
            let oracle = &reduced.as_ref().expect("just set").1;
            match check_base_membership(oracle, &snap.s, BASE_TOL) {
                Ok(true) => {}
                Ok(false) => report.base_violations += 1,
                Err(e) => report.record_error(e),
            }
        }
    });
    match result {
        Ok(out) => {
            if !close(out.value, bf.min_value, VALUE_TOL) {
                report.value_mismatches += 1;
            }
            let state = &out.report.state;
            report.safety_violations += state.active.iter().filter(|&j| !bf.maximal.contains(j)).count();
            report.safety_violations += state.inactive.iter().filter(|&j| bf.minimal.contains(j)).count();
        }
        Err(Error::ConflictingVerdict(_)) => report.conflicts += 1,
        Err(e) => report.record_error(e),
    }
    Ok(())
}

/// Random instances drawn from the test families with `1 <= p <= p_max`.
pub fn verify_families(opts: &VerifyOptions) -> CliResult<VerifyReport> {
    check_guard(opts.p_max)?;
    if opts.p_max == 0 {
        return Err(CliError::Usage("--p-max must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = VerifyReport::default();
    for t in 0..opts.trials {
        let family = Family::ALL[t % Family::ALL.len()];
        let p = rng.random_range(1..=opts.p_max);
        let oracle = family.instance(p, rng.random());
        verify_oracle(&oracle, opts, RANDOM_PAIRS, &mut rng, &mut report)?;
    }
    Ok(report)
}

/// One instance file, with `trials` random pairs on top of the solve.
pub fn verify_instance(path: &Path, seed: Option<u64>, opts: &VerifyOptions) -> CliResult<VerifyReport> {
    check_guard(opts.p_max)?;
    let (_, oracle) = open_instance(path, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = VerifyReport::default();
    verify_oracle(&oracle, opts, opts.trials, &mut rng, &mut report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_battery_is_clean() {
        let opts = VerifyOptions {
            trials: 40,
            p_max: 8,
            ..VerifyOptions::default()
        };
        let report = verify_families(&opts).unwrap();
        assert_eq!(report.violations(), 0, "{:?}", report);
        assert_eq!(report.numerical_errors, 0, "{:?}", report.first_error);
        assert!(report.screened > 0);
    }

    #[test]
    fn negated_gap_is_caught() {
        let opts = VerifyOptions {
            trials: 40,
            p_max: 8,
            corrupt_gap: true,
            ..VerifyOptions::default()
        };
        let report = verify_families(&opts).unwrap();
        assert!(report.safety_violations + report.conflicts > 0, "{:?}", report);
    }

    #[test]
    fn guard_rejects_large_p_max() {
        let opts = VerifyOptions {
            p_max: 30,
            ..VerifyOptions::default()
        };
        assert!(matches!(verify_families(&opts), Err(CliError::Usage(_))));
    }
}
