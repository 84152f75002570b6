//! File emitters: CSV tables, JSON reports, dense matrix dumps.
//!
//! All floating-point text is written with `{:.16e}` (17 significant
//! digits) through [`fmt17`], and rows are emitted in a fixed order, so
//! identical inputs produce byte-identical files.

use crate::CliError;
use fracap_core::{Mesh1D, OptimalityReport, SolveReport};
use nalgebra::DMatrix;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// 17-significant-digit scientific notation, the one float format used
/// in every text artifact.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

/// Dense row-major dump, one matrix row per line, entries space-separated.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut out = String::with_capacity(m.nrows() * m.ncols() * 24);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&fmt17(m[(i, j)]));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// `solution.csv`: one row per interior node.
pub fn solution_csv(mesh: &Mesh1D, report: &SolveReport) -> String {
    let xs = mesh.interior_nodes();
    let w = report.w_k.values();
    let z = report.z_k.values();
    let lambda = &report.lambda_k;
    let mu = report.mu_k.weights();
    let mut out = String::with_capacity(xs.len() * 120);
    out.push_str("x,w,z,lambda,mu\n");
    for i in 0..xs.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt17(xs[i]),
            fmt17(w[i]),
            fmt17(z[i]),
            fmt17(lambda[i]),
            fmt17(mu[i])
        );
    }
    out
}

/// Everything `report.json` carries: the run scalars, the optimality
/// diagnostics, and the per-iteration histories. Serialized in
/// declaration order.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub converged: bool,
    pub iterations: usize,
    pub eps_final: f64,
    pub stationarity_residual: f64,
    pub residual_consistent: bool,
    pub lambda_dot_w: f64,
    pub complementarity_gap: f64,
    pub complementarity_gap_quadrature: f64,
    pub support_w_size: usize,
    pub support_z_size: usize,
    pub support_w_measure: f64,
    pub sup_norm_w: f64,
    pub jaccard: f64,
    pub support_inclusion: bool,
    pub eta_min: f64,
    pub eta_nonneg: bool,
    /// Largest relative gap between the recovered density `λ/w` and the
    /// reweighting density on the support; absent when the nonnegativity
    /// hypotheses of that comparison fail.
    pub mu_w_max_rel_diff: Option<f64>,
    pub not_enforced: String,
    pub eps_history: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub smoothed_objective_history: Vec<f64>,
    pub step_history: Vec<f64>,
}

impl RunReport {
    pub fn build(report: &SolveReport, opt: &OptimalityReport) -> Self {
        let sup_norm_w = report
            .w_k
            .values()
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        let support_w_measure = fracap_core::support_measure(
            &report.w_k,
            fracap_core::SUPPORT_REL_THRESHOLD * sup_norm_w,
        );
        RunReport {
            converged: report.converged,
            iterations: report.iterations,
            eps_final: report.eps_k,
            stationarity_residual: opt.stationarity_residual,
            residual_consistent: opt.residual_consistent,
            lambda_dot_w: opt.lambda_dot_w,
            complementarity_gap: opt.complementarity_gap,
            complementarity_gap_quadrature: opt.complementarity_gap_quadrature,
            support_w_size: opt.support_w.len(),
            support_z_size: opt.support_z.len(),
            support_w_measure,
            sup_norm_w,
            jaccard: opt.jaccard,
            support_inclusion: opt.support_inclusion,
            eta_min: opt.eta_min,
            eta_nonneg: opt.eta_nonneg,
            mu_w_max_rel_diff: opt.mu_w_max_rel_diff,
            not_enforced: opt.not_enforced.to_string(),
            eps_history: report.eps_history.clone(),
            objective_history: report.objective_history.clone(),
            smoothed_objective_history: report.smoothed_objective_history.clone(),
            step_history: report.step_history.clone(),
        }
    }
}

/// Assemble a CSV from a header and formatted rows.
pub fn csv_table(header: &str, rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
