use std::path::PathBuf;

use iaes::io::BenchRow;
use iaes::screening::ScreeningVariant;
use iaes::solver::SolverKind;

use crate::solve::{run, RunConfig};
use crate::{instance_name, open_instance, CliError, CliResult};

/// Relative tolerance between a variant's value and the baseline's.
pub const VALUE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub instances: Vec<PathBuf>,
    pub variants: Vec<ScreeningVariant>,
    pub solver: SolverKind,
    pub eps: f64,
    pub rho: f64,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub trials: usize,
}

#[derive(Clone, Debug)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    /// `(instance, variant)` pairs whose value differs from the baseline.
    pub mismatches: Vec<(String, String)>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn check(config: &BenchConfig) -> CliResult<()> {
    if config.instances.is_empty() {
        return Err(CliError::Usage("bench needs at least one --instance".into()));
    }
    if config.variants.len() < 2 || !config.variants.contains(&ScreeningVariant::None) {
        return Err(CliError::Usage(
            "bench needs at least two variants including the baseline 'none'".into(),
        ));
    }
    if config.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(())
}

/// Runs every variant on every instance `trials` times and reports median
/// screening and solver times. The baseline row always comes first.
pub fn cmd_bench(config: &BenchConfig) -> CliResult<BenchTable> {
    check(config)?;
    let mut variants = vec![ScreeningVariant::None];
    variants.extend(config.variants.iter().copied().filter(|&v| v != ScreeningVariant::None));
    variants.dedup();
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for path in &config.instances {
        let name = instance_name(path);
        let (_, oracle) = open_instance(path, config.seed)?;
        let mut baseline: Option<(f64, f64)> = None;
        for &variant in &variants {
            let mut run_config = RunConfig::new(path, PathBuf::new());
            run_config.solver = config.solver;
            run_config.screening = variant;
            run_config.eps = config.eps;
            run_config.rho = config.rho;
            run_config.max_iter = config.max_iter;
            let mut screen = Vec::with_capacity(config.trials);
            let mut solver = Vec::with_capacity(config.trials);
            let mut total = Vec::with_capacity(config.trials);
            let mut value = f64::NAN;
            for _ in 0..config.trials {
                let out = run(&oracle, &run_config)?;
                let (s, t) = (
                    out.report.screen_time.as_secs_f64(),
                    out.report.solver_time.as_secs_f64(),
                );
                screen.push(s);
                solver.push(t);
                total.push(s + t);
                value = out.value;
            }
            let total = median(total);
            let (base_total, base_value) = *baseline.get_or_insert((total, value));
            if (value - base_value).abs() > VALUE_TOL * base_value.abs().max(1.0) {
                mismatches.push((name.clone(), variant.to_string()));
            }
            rows.push(BenchRow {
                instance_name: name.clone(),
                variant: variant.to_string(),
                screen_time_s: median(screen),
                solver_time_s: median(solver),
                total_time_s: total,
                speedup: base_total / total,
                value,
            });
        }
    }
    Ok(BenchTable { rows, mismatches })
}
