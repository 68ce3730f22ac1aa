//! Deterministic CSV artifacts for the command-line front end.
//!
//! Floats are written in fixed-width scientific notation so identical inputs
//! produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::branch::BranchResult;
use crate::error::Result;
use crate::local::SolveResult;
use crate::nash_moser::LevelState;

pub fn fmt_f(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Trace rows: step index, flow time, residual, domain norm of the iterate.
pub fn solve_trace_rows<X>(result: &SolveResult<X>) -> Vec<Vec<String>> {
    result
        .trace
        .iter()
        .map(|s| {
            vec![
                s.index.to_string(),
                fmt_f(s.time),
                fmt_f(s.residual),
                fmt_f(s.x_norm),
            ]
        })
        .collect()
}

pub fn write_solve_trace<X>(path: &Path, result: &SolveResult<X>) -> Result<()> {
    write_csv(
        path,
        &["step", "flow_time", "residual", "x_norm"],
        &solve_trace_rows(result),
    )
}

/// Branch rows over complex targets: sample index, target, solution,
/// segment modulus (empty for the first sample), solve residual.
pub fn write_branch(
    path: &Path,
    samples: &[Complex64],
    result: &BranchResult<Complex64>,
) -> Result<()> {
    let rows: Vec<Vec<String>> = samples
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let g = result.points[i];
            vec![
                i.to_string(),
                fmt_f(y.re),
                fmt_f(y.im),
                fmt_f(g.re),
                fmt_f(g.im),
                if i == 0 {
                    String::new()
                } else {
                    fmt_f(result.modulus[i - 1])
                },
                fmt_f(result.residuals[i]),
            ]
        })
        .collect();
    write_csv(
        path,
        &["sample", "y_re", "y_im", "g_re", "g_im", "modulus", "residual"],
        &rows,
    )
}

/// Level log rows: n, cutoff, increment norm, defect norm, identity
/// residual, cumulative solution norm.
pub fn level_rows(levels: &[LevelState]) -> Vec<Vec<String>> {
    levels
        .iter()
        .map(|l| {
            vec![
                l.n.to_string(),
                fmt_f(l.lambda),
                fmt_f(l.z_norm_s1),
                fmt_f(l.e_norm_s0),
                fmt_f(l.identity_residual),
                fmt_f(l.g_norm_s1),
            ]
        })
        .collect()
}

pub fn write_levels(path: &Path, levels: &[LevelState]) -> Result<()> {
    write_csv(
        path,
        &[
            "n",
            "lambda",
            "z_norm_s1",
            "e_norm_s0",
            "identity_residual",
            "g_norm_s1",
        ],
        &level_rows(levels),
    )
}
