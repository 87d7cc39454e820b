//! CSV output. Numbers use the shortest round-trip formatting, so equal
//! results give byte-identical files.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::sweep::ExperimentResult;
use super::timing::TimingRow;
use crate::error::Result;

pub const COLUMNS: [&str; 9] = [
    "t",
    "case",
    "R",
    "analytic_var",
    "mc_var",
    "mc_stderr",
    "quaternion_var",
    "diff",
    "runtime_s",
];

pub const COMPONENT_COLUMNS: [&str; 9] = [
    "t",
    "case",
    "R",
    "component",
    "analytic_var",
    "mc_var",
    "mc_stderr",
    "quaternion_var",
    "diff",
];

pub const TIMING_COLUMNS: [&str; 6] = [
    "R",
    "horizon",
    "tk_runtime_s",
    "real_runtime_s",
    "ratio",
    "max_estimate_diff",
];

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

/// One row per `t`, then per unit in sweep order; `runtime_s` is left empty.
pub fn write_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(COLUMNS)?;
    for t in 0..result.horizon {
        for s in &result.series {
            w.write_record([
                (t + 1).to_string(),
                s.case.to_string(),
                s.sensors.to_string(),
                num(s.analytic[t]),
                num(s.mc_var[t]),
                num(s.mc_stderr[t]),
                num(s.quaternion[t]),
                num(s.quaternion[t] - s.analytic[t]),
                String::new(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-component variant of [`write_csv`].
pub fn write_components_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(COMPONENT_COLUMNS)?;
    for t in 0..result.horizon {
        for s in &result.series {
            for j in 0..result.n {
                let (mc, se) = s.mc_components[t][j];
                let (a, q) = (s.analytic_components[t][j], s.quaternion_components[t][j]);
                w.write_record([
                    (t + 1).to_string(),
                    s.case.to_string(),
                    s.sensors.to_string(),
                    (j + 1).to_string(),
                    num(a),
                    num(mc),
                    num(se),
                    num(q),
                    num(q - a),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(TIMING_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.sensors.to_string(),
            r.horizon.to_string(),
            num(r.tk_s),
            num(r.real_s),
            num(r.ratio()),
            num(r.max_estimate_diff),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the main CSV to `path`.
pub fn emit_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_csv(result, File::create(path)?)
}

pub fn emit_components_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_components_csv(result, File::create(path)?)
}

pub fn emit_timing_csv(rows: &[TimingRow], path: &Path) -> Result<()> {
    write_timing_csv(rows, File::create(path)?)
}

/// Plain-text summary: mean difference and final variances per unit.
pub fn summary(result: &ExperimentResult) -> String {
    let mut s = format!(
        "{}: horizon {}, {} Monte Carlo runs, seed {}\n",
        result.name, result.horizon, result.mc_runs, result.seed
    );
    s.push_str("case  R  k  final_analytic  final_mc (se)          final_quaternion  mean_diff\n");
    for c in &result.series {
        let last = result.horizon - 1;
        s.push_str(&format!(
            "{:>4} {:>2} {:>2}  {:>14.6}  {:>10.6} ({:.6})  {:>16.6}  {:>9.6}\n",
            c.case,
            c.sensors,
            c.k,
            c.analytic[last],
            c.mc_var[last],
            c.mc_stderr[last],
            c.quaternion[last],
            c.mean_diff()
        ));
    }
    s
}
