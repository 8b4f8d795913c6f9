use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iaes::functions::families::Family;
use iaes::io::write_bench_csv;
use iaes::screening::ScreeningVariant;
use iaes::solver::SolverKind;
use iaes_cli::bench::{cmd_bench, BenchConfig};
use iaes_cli::generate::{self, GridOptions};
use iaes_cli::solve::{cmd_solve, RunConfig};
use iaes_cli::verify::{verify_families, verify_instance, VerifyOptions};
use iaes_cli::{CliError, CliResult, EXIT_OK};

/// Submodular minimization with safe active/inactive element screening.
#[derive(Parser)]
#[command(name = "iaes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance JSON plus its data files.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Solve one instance and write trace.csv, summary.json and rejection.csv.
    Solve(SolveArgs),
    /// Time every screening variant against the unscreened baseline.
    Bench(BenchArgs),
    /// Check solver and screening invariants against brute force.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Two-moons point cloud with a mutual-information objective.
    TwoMoons {
        #[arg(long, default_value_t = 200)]
        p: usize,
        #[arg(long, default_value_t = 16)]
        p0: usize,
        #[arg(long, default_value_t = iaes::datagen::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-graph cut from a PGM/PPM image or a synthetic disk image.
    Grid {
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        height: usize,
        #[arg(long, default_value_t = 16)]
        width: usize,
        /// Foreground seed pixels (row-major indices); default the centre pixel.
        #[arg(long, value_delimiter = ',')]
        fg: Vec<usize>,
        /// Background seed pixels; default the top-left pixel.
        #[arg(long, value_delimiter = ',')]
        bg: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        strength: f64,
        /// Pixel noise of the synthetic image.
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded member of a random test family.
    Family {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = SolverKind::Wolfe)]
    solver: SolverKind,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Overrides the seed of seeded instance kinds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = ScreeningVariant::Iaes)]
    screening: ScreeningVariant,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Repeat for several instances.
    #[arg(long, required = true)]
    instance: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "none,aes,ies,iaes")]
    screening: Vec<ScreeningVariant>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// Directory for bench.csv; the table is printed either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Verify one instance; random family instances otherwise.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Random instances, or random certificates with --instance.
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long)]
    p_max: Option<usize>,
    /// Negate certificate gaps before screening; the battery must then fail.
    #[arg(long)]
    corrupt_gap: bool,
    #[arg(long, default_value_t = SolverKind::Wolfe)]
    solver: SolverKind,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for verify.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run_config(instance: PathBuf, out: PathBuf, screening: ScreeningVariant, s: &SolverArgs) -> RunConfig {
    RunConfig {
        instance,
        solver: s.solver,
        screening,
        eps: s.eps,
        rho: s.rho,
        max_iter: s.max_iter,
        seed: s.seed,
        output_dir: out,
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate { kind } => {
            let g = match kind {
                GenerateKind::TwoMoons {
                    p,
                    p0,
                    alpha,
                    seed,
                    out,
                } => generate::two_moons(&out, p, p0, alpha, seed)?,
                GenerateKind::Grid {
                    image,
                    height,
                    width,
                    fg,
                    bg,
                    strength,
                    noise,
                    seed,
                    out,
                } => generate::grid(
                    &out,
                    &GridOptions {
                        image,
                        height,
                        width,
                        fg,
                        bg,
                        strength,
                        noise,
                        seed,
                    },
                )?,
                GenerateKind::Family { family, p, seed, out } => generate::family(&out, family, p, seed)?,
            };
            println!("{}", g.describe());
        }
        Command::Solve(a) => {
            let config = run_config(a.instance, a.out, a.screening, &a.solver);
            let out = cmd_solve(&config)?;
            println!(
                "value {} with |A| = {}; {} iterations, final gap {:e}, rejection ratio {}",
                out.value,
                out.set.len(),
                out.report.iterations,
                out.report.final_gap,
                out.report.rejection_ratio()
            );
        }
        Command::Bench(a) => {
            let config = BenchConfig {
                instances: a.instance,
                variants: a.screening,
                solver: a.solver.solver,
                eps: a.solver.eps,
                rho: a.solver.rho,
                max_iter: a.solver.max_iter,
                seed: a.solver.seed,
                trials: a.trials,
            };
            let table = cmd_bench(&config)?;
            if let Some(dir) = &a.out {
                std::fs::create_dir_all(dir)?;
                write_bench_csv(BufWriter::new(File::create(dir.join("bench.csv"))?), &table.rows)?;
            }
            write_bench_csv(std::io::stdout().lock(), &table.rows)?;
            if !table.mismatches.is_empty() {
                return Err(CliError::Verification(format!(
                    "values differ from the baseline for {:?}",
                    table.mismatches
                )));
            }
        }
        Command::Verify(a) => {
            let opts = VerifyOptions {
                trials: a.trials,
                p_max: a.p_max.unwrap_or(if a.instance.is_some() {
                    iaes::submodular::BRUTE_FORCE_LIMIT
                } else {
                    10
                }),
                seed: a.seed,
                corrupt_gap: a.corrupt_gap,
                solver: a.solver,
                eps: a.eps,
                rho: a.rho,
            };
            let report = match &a.instance {
                Some(path) => verify_instance(path, None, &opts)?,
                None => verify_families(&opts)?,
            };
            let mut stdout = std::io::stdout().lock();
            for line in report.lines() {
                writeln!(stdout, "{line}")?;
            }
            if let Some(dir) = &a.out {
                std::fs::create_dir_all(dir)?;
                let text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
                std::fs::write(dir.join("verify.json"), text + "\n")?;
            }
            if report.violations() > 0 {
                return Err(CliError::Verification(format!("{} violations", report.violations())));
            }
            if report.numerical_errors > 0 {
                return Err(CliError::Numerical(report.first_error.unwrap_or_default()));
            }
            writeln!(stdout, "PASS")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
