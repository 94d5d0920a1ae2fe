//! Deterministic artifact writers.
//!
//! Numbers are written with Rust's shortest round-trip float formatting and
//! a literal decimal point, so equal runs produce byte-identical files and
//! files re-read reproduce the exact doubles. Column orders are fixed and
//! documented in the README.

use std::io::{self, Write};

use serde::Serialize;

use crate::asymptotics::{ComparisonReport, PowerLawFit};
use crate::history::TrajectoryHistory;
use crate::integrator::{RunSummary, StepDiagnostics};
use crate::minkowski::FourVector;
use crate::scenario::Scenario;
use crate::selffield::SelfPotential;

/// Trajectory CSV: `s,ct,x,y,z,u0,u1,u2,u3,a0,a1,a2,a3`, one row per
/// accepted sample including the turn-on sample.
pub fn write_trajectory_csv<W: Write>(out: &mut W, history: &TrajectoryHistory) -> io::Result<()> {
    writeln!(out, "s,ct,x,y,z,u0,u1,u2,u3,a0,a1,a2,a3")?;
    for smp in history.samples() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt(smp.s),
            join4(smp.r),
            join4(smp.u),
            join4(smp.a)
        )?;
    }
    Ok(())
}

/// Diagnostics CSV: `s,u_norm_residual,s_ret,delay_residual,self_force_norm,ext_force_norm`.
pub fn write_diagnostics_csv<W: Write>(
    out: &mut W,
    diagnostics: &[StepDiagnostics],
) -> io::Result<()> {
    writeln!(
        out,
        "s,u_norm_residual,s_ret,delay_residual,self_force_norm,ext_force_norm"
    )?;
    for d in diagnostics {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt(d.s),
            fmt(d.u_norm_residual),
            fmt(d.s_ret),
            fmt(d.delay_residual),
            fmt(d.self_force_norm),
            fmt(d.ext_force_norm)
        )?;
    }
    Ok(())
}

/// One sampled field-map point; failed evaluations keep their row with the
/// error message in the status column.
pub struct FieldMapRow {
    pub point: FourVector,
    pub result: Result<SelfPotential, String>,
}

/// Field-map CSV: `ct,x,y,z,A0,A1,A2,A3,branch`.
pub fn write_field_map_csv<W: Write>(out: &mut W, rows: &[FieldMapRow]) -> io::Result<()> {
    writeln!(out, "ct,x,y,z,A0,A1,A2,A3,branch")?;
    for row in rows {
        match &row.result {
            Ok(pot) => writeln!(
                out,
                "{},{},{}",
                join4(row.point),
                join4(pot.a),
                pot.branch.label()
            )?,
            Err(msg) => writeln!(
                out,
                "{},nan,nan,nan,nan,error: {}",
                join4(row.point),
                msg.replace([',', '\n'], ";")
            )?,
        }
    }
    Ok(())
}

/// Comparison CSV: `s,epsilon,exact_force_norm,lad_force_norm,deviation`,
/// optionally followed by a `#`-commented fit block.
pub fn write_comparison_csv<W: Write>(
    out: &mut W,
    report: &ComparisonReport,
    fit: Option<&PowerLawFit>,
) -> io::Result<()> {
    writeln!(out, "s,epsilon,exact_force_norm,lad_force_norm,deviation")?;
    for s in &report.samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt(s.s),
            fmt(s.epsilon),
            fmt(s.exact_norm),
            fmt(s.lad_norm),
            fmt(s.deviation)
        )?;
    }
    if let Some(fit) = fit {
        writeln!(out, "# fit: deviation ~ prefactor * sigma^exponent")?;
        writeln!(out, "# exponent = {}", fmt(fit.exponent))?;
        writeln!(out, "# prefactor = {}", fmt(fit.prefactor))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    run: RunTable,
    scenario: &'a Scenario,
}

#[derive(Serialize)]
struct RunTable {
    steps: usize,
    s_end: f64,
    final_s: f64,
    final_position: [f64; 4],
    final_velocity: [f64; 4],
    max_u_norm_residual: f64,
    max_delay_residual: f64,
    min_s_ret: f64,
    max_self_force_norm: f64,
    max_ext_force_norm: f64,
    gamma_max: f64,
    gamma_final: f64,
    renormalizations: usize,
    hard_ramp: bool,
    wall_time_s: f64,
}

/// Run summary as a TOML document: a `[run]` table of results plus the
/// `[scenario]` echo.
pub fn run_summary_toml(summary: &RunSummary, scenario: &Scenario) -> String {
    let doc = SummaryDoc {
        run: RunTable {
            steps: summary.steps,
            s_end: summary.s_end,
            final_s: summary.final_state.s,
            final_position: summary.final_state.r.as_array(),
            final_velocity: summary.final_state.u.as_array(),
            max_u_norm_residual: summary.max_u_norm_residual,
            max_delay_residual: summary.max_delay_residual,
            min_s_ret: summary.min_s_ret,
            max_self_force_norm: summary.max_self_force_norm,
            max_ext_force_norm: summary.max_ext_force_norm,
            gamma_max: summary.gamma_max,
            gamma_final: summary.gamma_final,
            renormalizations: summary.renormalizations,
            hard_ramp: summary.hard_ramp,
            wall_time_s: summary.wall_time_s,
        },
        scenario,
    };
    toml::to_string_pretty(&doc).expect("summary serializes")
}

fn fmt(v: f64) -> String {
    // shortest round-trip representation; pin a ".0" so every value reads
    // back as a float
    let s = format!("{v}");
    if s.contains(['.', 'e', 'n', 'i']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn join4(v: FourVector) -> String {
    format!("{},{},{},{}", fmt(v.ct), fmt(v.x), fmt(v.y), fmt(v.z))
}
