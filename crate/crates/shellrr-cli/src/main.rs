//! Command-line driver: deterministic scenario runs, the validation suite,
//! field maps of the retarded self-potential, exact-vs-LAD comparisons, and
//! parameter sweeps.
//!
//! Exit codes: 0 success, 1 validation failures, 2 invalid scenario or
//! arguments, 3 velocity-norm drift abort, 4 delay-bound (step too large)
//! abort, 5 numerical root/self-field failure, 6 I/O error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use shellrr::asymptotics::{compare_exact_vs_lad, fit_power_law, ComparisonReport};
use shellrr::export::{
    run_summary_toml, write_comparison_csv, write_diagnostics_csv, write_field_map_csv,
    write_trajectory_csv, FieldMapRow,
};
use shellrr::extfield::ExternalFieldModel;
use shellrr::history::TrajectoryHistory;
use shellrr::integrator::{integrate, IntegrationOutput, IntegratorError};
use shellrr::minkowski::FourVector;
use shellrr::scenario::{Scenario, ScenarioError};
use shellrr::selffield::self_potential;
use shellrr::validation;

#[derive(Parser)]
#[command(
    name = "shellrr",
    version,
    about = "Finite-size charged shell dynamics with exact radiation reaction"
)]
struct Cli {
    /// Suppress progress output (artifacts are still written).
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario; writes trajectory.csv, diagnostics.csv, summary.toml.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the machine-verifiable invariant suite and print a pass/fail table.
    Validate,
    /// Sample the retarded self-potential on the scenario's field_map grid;
    /// writes field_map.csv.
    FieldMap {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Integrate, then compare the exact self-force against the LAD form
    /// along the trajectory; writes comparison.csv.
    CompareLad {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Number of proper-time samples along the integrated worldline.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Re-run a scenario across a list of parameter values (parallel) and
    /// aggregate the results.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum)]
        parameter: SweepParameter,
        /// Comma-separated values, e.g. --values 0.1,0.05,0.025
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepParameter {
    /// Shell charge radius.
    Sigma,
    /// Integrator proper-time step.
    Step,
    /// Field amplitude (plane wave amplitude, or a scale on uniform E and B).
    Amplitude,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Io(_) => 6,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<IntegratorError> for Failure {
    fn from(e: IntegratorError) -> Self {
        let code = match e {
            IntegratorError::ConfigInvalid(_) => 2,
            IntegratorError::DriftExceeded { .. } => 3,
            IntegratorError::StepTooLarge { .. } => 4,
            _ => 5,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(6, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, out } => cmd_run(scenario, out, cli.quiet),
        Command::Validate => cmd_validate(cli.quiet),
        Command::FieldMap { scenario, out } => cmd_field_map(scenario, out, cli.quiet),
        Command::CompareLad {
            scenario,
            out,
            samples,
        } => cmd_compare_lad(scenario, out, *samples, cli.quiet),
        Command::Sweep {
            scenario,
            out,
            parameter,
            values,
        } => cmd_sweep(scenario, out, *parameter, values, cli.quiet),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run_scenario(scenario: &Scenario) -> Result<IntegrationOutput, Failure> {
    let setup = scenario.to_setup()?;
    Ok(integrate(&setup)?)
}

fn write_artifacts(
    dir: &Path,
    scenario: &Scenario,
    output: &IntegrationOutput,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    if scenario.outputs.trajectory {
        let mut w = BufWriter::new(File::create(dir.join("trajectory.csv"))?);
        write_trajectory_csv(&mut w, &output.history)?;
    }
    if scenario.outputs.diagnostics {
        let mut w = BufWriter::new(File::create(dir.join("diagnostics.csv"))?);
        write_diagnostics_csv(&mut w, &output.diagnostics)?;
    }
    if scenario.outputs.summary {
        std::fs::write(
            dir.join("summary.toml"),
            run_summary_toml(&output.summary, scenario),
        )?;
    }
    Ok(())
}

fn cmd_run(path: &Path, out: &Path, quiet: bool) -> Result<u8, Failure> {
    let scenario = Scenario::load(path)?;
    let output = run_scenario(&scenario)?;
    write_artifacts(out, &scenario, &output)?;
    if !quiet {
        println!(
            "run complete: {} steps to s = {}, |u.u - 1| <= {:e}, artifacts in {}",
            output.summary.steps,
            output.summary.s_end,
            output.summary.max_u_norm_residual,
            out.display()
        );
    }
    Ok(0)
}

fn cmd_validate(quiet: bool) -> Result<u8, Failure> {
    let results = validation::run_all();
    let mut failures = 0;
    for r in &results {
        if !r.passed {
            failures += 1;
        }
        if !quiet || !r.passed {
            println!(
                "{:<40} {}  {}",
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.detail
            );
        }
    }
    if !quiet {
        println!("{} checks, {} failed", results.len(), failures);
    }
    Ok(if failures == 0 { 0 } else { 1 })
}

fn cmd_field_map(path: &Path, out: &Path, quiet: bool) -> Result<u8, Failure> {
    let scenario = Scenario::load(path)?;
    let map = scenario
        .field_map
        .clone()
        .ok_or_else(|| Failure::new(2, "scenario has no [field_map] section"))?;
    let setup = scenario.to_setup()?;
    let particle = setup.particle;
    let output = run_scenario(&scenario)?;
    let mut rows = Vec::new();
    for &z in &map.z.values() {
        for &y in &map.y.values() {
            for &x in &map.x.values() {
                let point = FourVector::new(map.ct, x, y, z);
                let result =
                    self_potential(&output.history, point, &particle).map_err(|e| e.to_string());
                rows.push(FieldMapRow { point, result });
            }
        }
    }
    std::fs::create_dir_all(out)?;
    let mut w = BufWriter::new(File::create(out.join("field_map.csv"))?);
    write_field_map_csv(&mut w, &rows)?;
    if !quiet {
        let failed = rows.iter().filter(|r| r.result.is_err()).count();
        println!(
            "field map: {} points ({} unresolved), written to {}",
            rows.len(),
            failed,
            out.join("field_map.csv").display()
        );
    }
    Ok(0)
}

/// Proper-time samples spread over the integrated interval, clear of both
/// ends so central differences and delay lookups stay in range.
fn comparison_samples(history: &TrajectoryHistory, count: usize, margin: f64) -> Vec<f64> {
    let lo = history.s0() + margin;
    let hi = history.s_last() - margin;
    let n = count.max(2);
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn compare_on_history(
    output: &IntegrationOutput,
    scenario: &Scenario,
    samples: usize,
) -> Result<ComparisonReport, Failure> {
    let setup = scenario.to_setup()?;
    let h = scenario.integrator.step;
    let margin = 2.0 * h + scenario.particle.charge_radius;
    let s_list = comparison_samples(&output.history, samples, margin);
    compare_exact_vs_lad(&output.history, &s_list, &setup.particle, h)
        .map_err(|e| Failure::new(5, e.to_string()))
}

fn cmd_compare_lad(path: &Path, out: &Path, samples: usize, quiet: bool) -> Result<u8, Failure> {
    let scenario = Scenario::load(path)?;
    let output = run_scenario(&scenario)?;
    let report = compare_on_history(&output, &scenario, samples)?;
    std::fs::create_dir_all(out)?;
    let mut w = BufWriter::new(File::create(out.join("comparison.csv"))?);
    write_comparison_csv(&mut w, &report, None)?;
    if !quiet {
        println!(
            "exact vs LAD on {} samples: mean relative deviation {:e}, max {:e}",
            report.samples.len(),
            report.mean_deviation(),
            report.max_deviation()
        );
    }
    Ok(0)
}

fn apply_parameter(
    scenario: &Scenario,
    parameter: SweepParameter,
    value: f64,
) -> Result<Scenario, Failure> {
    let mut s = scenario.clone();
    match parameter {
        SweepParameter::Sigma => s.particle.charge_radius = value,
        SweepParameter::Step => s.integrator.step = value,
        SweepParameter::Amplitude => match &mut s.field {
            ExternalFieldModel::PlaneWave { amplitude, .. } => *amplitude = value,
            ExternalFieldModel::UniformStatic { e, b } => {
                for c in e.iter_mut().chain(b.iter_mut()) {
                    *c *= value;
                }
            }
            ExternalFieldModel::Zero => {
                return Err(Failure::new(
                    2,
                    "amplitude sweep is meaningless for a zero field",
                ))
            }
        },
    }
    s.validate()?;
    Ok(s)
}

struct SweepRow {
    value: f64,
    outcome: Result<(IntegrationOutput, Option<ComparisonReport>), String>,
}

fn cmd_sweep(
    path: &Path,
    out: &Path,
    parameter: SweepParameter,
    values: &[f64],
    quiet: bool,
) -> Result<u8, Failure> {
    if values.is_empty() {
        return Err(Failure::new(2, "sweep requires a non-empty --values list"));
    }
    let scenario = Scenario::load(path)?;

    // independent runs; failures stay isolated in their row
    let mut rows: Vec<SweepRow> = Vec::with_capacity(values.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .iter()
            .map(|&value| {
                let scenario = &scenario;
                scope.spawn(move || {
                    let run =
                        || -> Result<(IntegrationOutput, Option<ComparisonReport>), String> {
                            let varied = apply_parameter(scenario, parameter, value)
                                .map_err(|f| f.message)?;
                            let output = run_scenario(&varied).map_err(|f| f.message)?;
                            let report = match parameter {
                                SweepParameter::Sigma => Some(
                                    compare_on_history(&output, &varied, 32)
                                        .map_err(|f| f.message)?,
                                ),
                                _ => None,
                            };
                            Ok((output, report))
                        };
                    SweepRow {
                        value,
                        outcome: run(),
                    }
                })
            })
            .collect();
        for handle in handles {
            rows.push(handle.join().expect("sweep worker panicked"));
        }
    });

    std::fs::create_dir_all(out)?;
    let mut aggregate = BufWriter::new(File::create(out.join("aggregate.csv"))?);
    writeln!(
        aggregate,
        "value,status,steps,s_end,max_u_norm_residual,gamma_final,mean_lad_deviation"
    )?;
    let mut lad_points: Vec<(f64, f64)> = Vec::new();
    let mut finals: Vec<(f64, FourVector)> = Vec::new();
    for row in &rows {
        match &row.outcome {
            Ok((output, report)) => {
                let dir = out.join(format!("{:?}={}", parameter, row.value).to_lowercase());
                let varied =
                    apply_parameter(&scenario, parameter, row.value).expect("validated in worker");
                write_artifacts(&dir, &varied, output)?;
                let mean_dev = report.as_ref().map(|r| r.mean_deviation());
                if let Some(d) = mean_dev {
                    lad_points.push((row.value, d));
                }
                finals.push((row.value, output.summary.final_state.u));
                writeln!(
                    aggregate,
                    "{},ok,{},{},{:e},{},{}",
                    row.value,
                    output.summary.steps,
                    output.summary.s_end,
                    output.summary.max_u_norm_residual,
                    output.summary.gamma_final,
                    mean_dev.map_or(String::from(""), |d| format!("{d:e}"))
                )?;
            }
            Err(msg) => {
                writeln!(
                    aggregate,
                    "{},\"failed: {}\",,,,,",
                    row.value,
                    msg.replace('"', "'")
                )?;
            }
        }
    }
    if lad_points.len() >= 2 {
        let xs: Vec<f64> = lad_points.iter().map(|&(x, _)| x).collect();
        let ys: Vec<f64> = lad_points.iter().map(|&(_, y)| y).collect();
        let fit = fit_power_law(&xs, &ys);
        writeln!(
            aggregate,
            "# lad deviation fit: exponent = {}, prefactor = {}",
            fit.exponent, fit.prefactor
        )?;
    }
    if matches!(parameter, SweepParameter::Step) && finals.len() >= 3 {
        // Richardson order estimate from the three largest steps, assuming a
        // halving sequence ordered as given
        let d1 = (finals[0].1 - finals[1].1).euclidean_norm();
        let d2 = (finals[1].1 - finals[2].1).euclidean_norm();
        if d2 > 0.0 {
            writeln!(
                aggregate,
                "# step convergence order estimate = {}",
                (d1 / d2).log2()
            )?;
        }
    }
    drop(aggregate);
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if !quiet {
        println!(
            "sweep over {:?}: {} runs ({} failed), aggregate in {}",
            parameter,
            rows.len(),
            failed,
            out.join("aggregate.csv").display()
        );
    }
    Ok(if failed == 0 { 0 } else { 1 })
}
