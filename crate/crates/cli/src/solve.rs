use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use iaes::io::{summary_json, write_rejection_csv, write_trace_csv, InstanceKind};
use iaes::screening::{iaes_solve_with, IaesOptions, IaesOutcome, ScreeningVariant};
use iaes::solver::SolverKind;
use iaes::Oracle;
use serde_json::json;

use crate::{open_instance, CliError, CliResult};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub instance: PathBuf,
    pub solver: SolverKind,
    pub screening: ScreeningVariant,
    pub eps: f64,
    pub rho: f64,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn new(instance: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            instance: instance.into(),
            solver: SolverKind::Wolfe,
            screening: ScreeningVariant::Iaes,
            eps: 1e-6,
            rho: 0.5,
            max_iter: None,
            seed: None,
            output_dir: output_dir.into(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.eps > 0.0) {
            return Err(CliError::Usage(format!("--eps must be positive, got {}", self.eps)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(CliError::Usage(format!("--rho must lie in (0, 1), got {}", self.rho)));
        }
        Ok(())
    }

    pub fn options(&self) -> IaesOptions {
        IaesOptions {
            eps: self.eps,
            rho: self.rho,
            solver: self.solver,
            variant: self.screening,
            max_iter: self.max_iter,
        }
    }
}

/// Runs one configuration on an already loaded oracle.
pub fn run(oracle: &Oracle, config: &RunConfig) -> CliResult<IaesOutcome> {
    config.validate()?;
    Ok(iaes_solve_with(oracle, &config.options(), &mut |_, _, _| {})?)
}

/// Solves the configured instance and writes `trace.csv`, `summary.json`
/// and, when screening is enabled, `rejection.csv` into the output directory.
pub fn cmd_solve(config: &RunConfig) -> CliResult<IaesOutcome> {
    config.validate()?;
    let (spec, oracle) = open_instance(&config.instance, config.seed)?;
    let outcome = run(&oracle, config)?;
    write_outputs(&config.output_dir, config, &spec.kind, &outcome)?;
    Ok(outcome)
}

fn write_outputs(dir: &Path, config: &RunConfig, kind: &InstanceKind, out: &IaesOutcome) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    write_trace_csv(BufWriter::new(File::create(dir.join("trace.csv"))?), &out.report.trace)?;
    if config.screening != ScreeningVariant::None {
        write_rejection_csv(
            BufWriter::new(File::create(dir.join("rejection.csv"))?),
            &out.report.triggers,
        )?;
    }
    let mut extra = BTreeMap::new();
    extra.insert("instance".into(), json!(config.instance.display().to_string()));
    extra.insert("kind".into(), json!(kind));
    extra.insert("p".into(), json!(out.report.state.p()));
    extra.insert("solver".into(), json!(config.solver.to_string()));
    extra.insert("screening".into(), json!(config.screening.to_string()));
    extra.insert("eps".into(), json!(config.eps));
    extra.insert("rho".into(), json!(config.rho));
    let summary = summary_json(&out.set, out.value, &out.report, extra);
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(dir.join("summary.json"), text + "\n")?;
    Ok(())
}
