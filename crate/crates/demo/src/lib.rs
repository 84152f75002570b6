//! Browser demo bindings: three interactive operations over the core
//! toolkit, each returning a JSON payload ready for canvas plotting.
//!
//! Build for the web with `wasm-pack build --target web --out-dir www/pkg`
//! (the static page in `www/index.html` loads the generated module). The
//! functions also compile natively, which is how they are unit-tested.

use fracap_core::{
    assemble, capacity, dc_solve, mass_matrix, optimality_report, support_measure, FeFunction,
    Mesh1D, ProblemConfig, SpaceKind, SUPPORT_REL_THRESHOLD,
};
use serde::Serialize;
use std::sync::Arc;
use wasm_bindgen::prelude::*;

const N_MIN: usize = 16;
const N_MAX: usize = 384;

fn err_json(msg: String) -> String {
    #[derive(Serialize)]
    struct ErrPayload {
        error: String,
    }
    serde_json::to_string(&ErrPayload { error: msg }).unwrap()
}

fn ok_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(|e| err_json(format!("serialize: {e}")))
}

fn parse_kind(kind: &str) -> Result<SpaceKind, String> {
    match kind {
        "integral_tilde" => Ok(SpaceKind::IntegralTilde),
        "integral_omega" => Ok(SpaceKind::IntegralOmega),
        "spectral" => Ok(SpaceKind::Spectral),
        other => Err(format!("unknown space kind {other:?}")),
    }
}

fn checked_mesh(n: usize) -> Result<Arc<Mesh1D>, String> {
    if !(N_MIN..=N_MAX).contains(&n) {
        return Err(format!("n must lie in [{N_MIN}, {N_MAX}], got {n}"));
    }
    Mesh1D::new(0.0, 1.0, n).map(Arc::new).map_err(|e| e.to_string())
}

fn target_fn(name: &str) -> Result<fn(f64) -> f64, String> {
    match name {
        "well" => Ok(|x| 20.0 * (x - 0.5) * (x - 0.5)),
        "sine" => Ok(|x| 1.5 * (3.0 * std::f64::consts::PI * x).sin()),
        "bump" => Ok(|x| 10.0 * x * (x - 1.0)),
        other => Err(format!("unknown target {other:?}")),
    }
}

fn sup_norm(w: &FeFunction) -> f64 {
    w.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

#[derive(Serialize)]
struct SolvePayload {
    x: Vec<f64>,
    w_d: Vec<f64>,
    w: Vec<f64>,
    z: Vec<f64>,
    mu_log10: Vec<f64>,
    support_w: Vec<usize>,
    converged: bool,
    iterations: usize,
    eps_final: f64,
    stationarity_residual: f64,
    complementarity_gap: f64,
    jaccard: f64,
    support_inclusion: bool,
    support_measure: f64,
    sup_norm_w: f64,
}

/// Run the sparse tracking solve for one of the preset targets and
/// return curves plus optimality diagnostics as JSON.
#[wasm_bindgen]
pub fn solve_demo(target: &str, kind: &str, n: usize, s: f64, alpha: f64, beta: f64, p: f64) -> String {
    let inner = || -> Result<String, String> {
        let mesh = checked_mesh(n)?;
        let kind = parse_kind(kind)?;
        let f = target_fn(target)?;
        let g = assemble(kind, &mesh, s).map_err(|e| e.to_string())?;
        let m = mass_matrix(&mesh);
        let w_d = FeFunction::interpolate(mesh.clone(), f);
        let mut cfg = ProblemConfig::new(alpha, beta, p, w_d.clone());
        cfg.eps_min = 1e-10;
        cfg.max_iter = 600;
        let report = dc_solve(&cfg, &g, &m).map_err(|e| e.to_string())?;
        let opt = optimality_report(&cfg, &report, &g, &m).map_err(|e| e.to_string())?;
        let sup = sup_norm(&report.w_k);
        let payload = SolvePayload {
            x: mesh.interior_nodes(),
            w_d: w_d.values().to_vec(),
            w: report.w_k.values().to_vec(),
            z: report.z_k.values().to_vec(),
            mu_log10: report
                .mu_k
                .weights()
                .iter()
                .map(|&v| if v > 0.0 { v.log10() } else { f64::MIN })
                .collect(),
            support_w: opt.support_w.clone(),
            converged: report.converged,
            iterations: report.iterations,
            eps_final: report.eps_k,
            stationarity_residual: opt.stationarity_residual,
            complementarity_gap: opt.complementarity_gap,
            jaccard: opt.jaccard,
            support_inclusion: opt.support_inclusion,
            support_measure: support_measure(&report.w_k, SUPPORT_REL_THRESHOLD * sup),
            sup_norm_w: sup,
        };
        Ok(ok_json(&payload))
    };
    inner().unwrap_or_else(err_json)
}

#[derive(Serialize)]
struct CapacityPayload {
    x: Vec<f64>,
    minimizer: Vec<f64>,
    value: f64,
    node_count: usize,
    box_constraint_held: bool,
}

/// Capacity of the interval `[l, r)` with its capacitary potential.
#[wasm_bindgen]
pub fn capacity_demo(kind: &str, n: usize, s: f64, l: f64, r: f64) -> String {
    let inner = || -> Result<String, String> {
        let mesh = checked_mesh(n)?;
        let kind = parse_kind(kind)?;
        if !(l < r) {
            return Err(format!("need l < r, got [{l}, {r})"));
        }
        let g = assemble(kind, &mesh, s).map_err(|e| e.to_string())?;
        let nodes = mesh.interior_nodes_in(l, r);
        let result = capacity(&g, &nodes).map_err(|e| e.to_string())?;
        let payload = CapacityPayload {
            x: mesh.interior_nodes(),
            minimizer: result.minimizer.values().to_vec(),
            value: result.value,
            node_count: nodes.len(),
            box_constraint_held: result.box_constraint_held,
        };
        Ok(ok_json(&payload))
    };
    inner().unwrap_or_else(err_json)
}

#[derive(Serialize)]
struct SchedulePayload {
    x: Vec<f64>,
    w_fast: Vec<f64>,
    w_slow: Vec<f64>,
    w_baseline: Vec<f64>,
    sup_fast: f64,
    sup_slow: f64,
    sup_baseline: f64,
    meas_fast: f64,
    meas_slow: f64,
    meas_baseline: f64,
    iters_fast: usize,
    iters_slow: usize,
    iters_baseline: usize,
}

/// Contrast the two smoothing schedules for the zero-norm penalty on the
/// concave target (plus a p = 0.1 baseline): the slow schedule collapses
/// the solution, the fast one keeps a sparse support.
#[wasm_bindgen]
pub fn schedule_demo(n: usize, s: f64) -> String {
    let inner = || -> Result<String, String> {
        let mesh = checked_mesh(n)?;
        let g = assemble(SpaceKind::IntegralTilde, &mesh, s).map_err(|e| e.to_string())?;
        let m = mass_matrix(&mesh);
        let w_d = FeFunction::interpolate(mesh.clone(), target_fn("bump").unwrap());
        // The collapse-versus-survival contrast needs the penalty at this
        // strength on this target (and a mesh of at least ~128 elements).
        let mut base = ProblemConfig::new(1.0, 1.0, 0.0, w_d);
        base.eps_min = 1e-8;
        base.max_iter = 400;

        let mut fast = base.clone();
        fast.eps_factor = 0.4;
        let fast_report = dc_solve(&fast, &g, &m).map_err(|e| e.to_string())?;

        let mut slow = base.clone();
        slow.eps_factor = 0.9;
        let slow_report = dc_solve(&slow, &g, &m).map_err(|e| e.to_string())?;

        let mut baseline = base.clone();
        baseline.p = 0.1;
        baseline.eps_factor = 0.4;
        baseline.eps_min = 1e-10;
        let base_report = dc_solve(&baseline, &g, &m).map_err(|e| e.to_string())?;

        let rel_meas = |w: &FeFunction| support_measure(w, SUPPORT_REL_THRESHOLD * sup_norm(w));
        let payload = SchedulePayload {
            x: mesh.interior_nodes(),
            w_fast: fast_report.w_k.values().to_vec(),
            w_slow: slow_report.w_k.values().to_vec(),
            w_baseline: base_report.w_k.values().to_vec(),
            sup_fast: sup_norm(&fast_report.w_k),
            sup_slow: sup_norm(&slow_report.w_k),
            sup_baseline: sup_norm(&base_report.w_k),
            meas_fast: rel_meas(&fast_report.w_k),
            meas_slow: rel_meas(&slow_report.w_k),
            meas_baseline: rel_meas(&base_report.w_k),
            iters_fast: fast_report.iterations,
            iters_slow: slow_report.iterations,
            iters_baseline: base_report.iterations,
        };
        Ok(ok_json(&payload))
    };
    inner().unwrap_or_else(err_json)
}
