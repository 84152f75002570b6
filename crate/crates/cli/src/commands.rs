//! Subcommand implementations.

use crate::config::{presets, ConfigDoc, OutputPlan};
use crate::expr::Expr;
use crate::output::{self, csv_table, fmt17, RunReport};
use crate::CliError;
use fracap_core::{
    assemble, capacity, dc_solve, gamma_sequence_test, l2_inner, mass_matrix, optimality_report,
    support_measure, FeFunction, GramOperator, Mesh1D, NodalMeasure, ProblemConfig, SolveReport,
    SpaceKind, SUPPORT_REL_THRESHOLD,
};
use nalgebra::DMatrix;
use serde::Serialize;
use std::sync::Arc;

struct Assembled {
    mesh: Arc<Mesh1D>,
    g: GramOperator,
    m: DMatrix<f64>,
}

fn assemble_from(doc: &ConfigDoc) -> Result<Assembled, CliError> {
    let mesh = doc.mesh()?;
    let sp = doc.space()?;
    let g = assemble(sp.kind, &mesh, sp.s)?;
    let m = mass_matrix(&mesh);
    Ok(Assembled { mesh, g, m })
}

fn sup_norm(w: &FeFunction) -> f64 {
    w.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

fn l2_norm(w: &FeFunction) -> f64 {
    l2_inner(w, w).map(|v| v.max(0.0).sqrt()).unwrap_or(0.0)
}

/// Write one solve's artifacts under `plan.dir` and print a summary line.
fn write_run(
    plan: &OutputPlan,
    csv_name: &str,
    json_name: &str,
    mesh: &Mesh1D,
    report: &SolveReport,
    opt: &fracap_core::OptimalityReport,
) -> Result<(), CliError> {
    if plan.csv {
        let path = plan.dir.join(csv_name);
        output::write_text(&path, &output::solution_csv(mesh, report))?;
        println!("wrote {}", path.display());
    }
    if plan.json {
        let path = plan.dir.join(json_name);
        output::write_json(&path, &RunReport::build(report, opt))?;
        println!("wrote {}", path.display());
    }
    println!(
        "{}: converged={} iterations={} eps_final={} stationarity={} gap={}",
        csv_name.trim_end_matches(".csv"),
        report.converged,
        report.iterations,
        fmt17(report.eps_k),
        fmt17(opt.stationarity_residual),
        fmt17(opt.complementarity_gap),
    );
    Ok(())
}

pub fn cmd_assemble(doc: &ConfigDoc) -> Result<(), CliError> {
    let plan = doc.output_plan()?;
    let asm = assemble_from(doc)?;
    output::ensure_dir(&plan.dir)?;
    let gram_path = plan.dir.join("gram.txt");
    output::write_matrix(&gram_path, asm.g.matrix())?;
    println!("wrote {}", gram_path.display());
    let mass_path = plan.dir.join("mass.txt");
    output::write_matrix(&mass_path, &asm.m)?;
    println!("wrote {}", mass_path.display());

    #[derive(Serialize)]
    struct AssembleMeta {
        kind: SpaceKind,
        s: f64,
        a: f64,
        b: f64,
        n: usize,
        dim: usize,
        kernel_constant: Option<f64>,
    }
    if plan.json {
        let meta = AssembleMeta {
            kind: asm.g.kind(),
            s: asm.g.s(),
            a: asm.mesh.a(),
            b: asm.mesh.b(),
            n: asm.mesh.n_elems(),
            dim: asm.mesh.interior_dof_count(),
            kernel_constant: asm.g.c_ds(),
        };
        let meta_path = plan.dir.join("assemble.json");
        output::write_json(&meta_path, &meta)?;
        println!("wrote {}", meta_path.display());
    }
    Ok(())
}

pub fn cmd_solve(doc: &ConfigDoc) -> Result<(), CliError> {
    let plan = doc.output_plan()?;
    let asm = assemble_from(doc)?;
    let cfg = doc.problem(&asm.mesh)?;
    let report = dc_solve(&cfg, &asm.g, &asm.m)?;
    let opt = optimality_report(&cfg, &report, &asm.g, &asm.m)?;
    output::ensure_dir(&plan.dir)?;
    write_run(&plan, "solution.csv", "report.json", &asm.mesh, &report, &opt)
}

pub fn cmd_capacity(doc: &ConfigDoc) -> Result<(), CliError> {
    let plan = doc.output_plan()?;
    let cap_cfg = doc
        .capacity
        .as_ref()
        .ok_or_else(|| CliError::Config("capacity command needs a \"capacity\" section".into()))?;
    if cap_cfg.sets.is_empty() {
        return Err(CliError::Config("capacity.sets must not be empty".into()));
    }
    let asm = assemble_from(doc)?;
    let sp = doc.space()?.clone();
    output::ensure_dir(&plan.dir)?;

    let describe = |iv: &[[f64; 2]]| -> String {
        iv.iter()
            .map(|p| format!("[{};{})", p[0], p[1]))
            .collect::<Vec<_>>()
            .join("+")
    };

    // Per-set capacities on the configured mesh.
    let mut node_sets = Vec::with_capacity(cap_cfg.sets.len());
    let mut values = Vec::with_capacity(cap_cfg.sets.len());
    let mut cap_rows = Vec::new();
    for (i, ivs) in cap_cfg.sets.iter().enumerate() {
        let nodes = ConfigDoc::nodes_of_intervals(&asm.mesh, ivs)?;
        let res = capacity(&asm.g, &nodes)?;
        cap_rows.push(vec![
            i.to_string(),
            describe(ivs),
            nodes.len().to_string(),
            fmt17(res.value),
            res.box_constraint_held.to_string(),
        ]);
        node_sets.push(nodes);
        values.push(res.value);
    }
    if plan.csv {
        let path = plan.dir.join("capacities.csv");
        output::write_text(
            &path,
            &csv_table("set,intervals,nodes,capacity,box_constraint_held", &cap_rows),
        )?;
        println!("wrote {}", path.display());
    }

    // Pairwise monotonicity (where inclusion applies) and subadditivity.
    let tol = 1e-10;
    let mut check_rows = Vec::new();
    for i in 0..cap_cfg.sets.len() {
        for j in (i + 1)..cap_cfg.sets.len() {
            let a: std::collections::BTreeSet<_> = node_sets[i].iter().copied().collect();
            let b: std::collections::BTreeSet<_> = node_sets[j].iter().copied().collect();
            let (nested, monotone_ok) = if a.is_subset(&b) {
                (true, values[i] <= values[j] + tol)
            } else if b.is_subset(&a) {
                (true, values[j] <= values[i] + tol)
            } else {
                (false, true)
            };
            let union: Vec<usize> = a.union(&b).copied().collect();
            let cap_union = capacity(&asm.g, &union)?.value;
            let subadditive_ok = cap_union <= values[i] + values[j] + tol;
            check_rows.push(vec![
                i.to_string(),
                j.to_string(),
                nested.to_string(),
                monotone_ok.to_string(),
                fmt17(values[i]),
                fmt17(values[j]),
                fmt17(cap_union),
                subadditive_ok.to_string(),
            ]);
        }
    }
    if plan.csv && !check_rows.is_empty() {
        let path = plan.dir.join("checks.csv");
        output::write_text(
            &path,
            &csv_table(
                "set_a,set_b,nested,monotone_ok,cap_a,cap_b,cap_union,subadditive_ok",
                &check_rows,
            ),
        )?;
        println!("wrote {}", path.display());
    }

    // Refinement study: the same sets on coarser/finer meshes (reported,
    // not asserted — discrete capacities drift with the mesh).
    let refine_ns = [32usize, 64, 128, 256];
    let mut refine_rows = Vec::new();
    let mut refine_values = vec![Vec::new(); cap_cfg.sets.len()];
    for &n in &refine_ns {
        let mesh_n = Arc::new(Mesh1D::new(asm.mesh.a(), asm.mesh.b(), n)?);
        let g_n = assemble(sp.kind, &mesh_n, sp.s)?;
        for (i, ivs) in cap_cfg.sets.iter().enumerate() {
            let nodes = ConfigDoc::nodes_of_intervals(&mesh_n, ivs)?;
            let value = capacity(&g_n, &nodes)?.value;
            refine_rows.push(vec![i.to_string(), n.to_string(), fmt17(value)]);
            refine_values[i].push(value);
        }
    }
    if plan.csv {
        let path = plan.dir.join("refinement.csv");
        output::write_text(&path, &csv_table("set,n,capacity", &refine_rows))?;
        println!("wrote {}", path.display());
    }

    #[derive(Serialize)]
    struct CapacityJson {
        kind: SpaceKind,
        s: f64,
        sets: Vec<String>,
        node_counts: Vec<usize>,
        capacities: Vec<f64>,
        refinement_ns: Vec<usize>,
        refinement_capacities: Vec<Vec<f64>>,
        all_checks_ok: bool,
    }
    if plan.json {
        let all_ok = check_rows
            .iter()
            .all(|r| r[3] == "true" && r[7] == "true");
        let doc_json = CapacityJson {
            kind: sp.kind,
            s: sp.s,
            sets: cap_cfg.sets.iter().map(|ivs| describe(ivs)).collect(),
            node_counts: node_sets.iter().map(|n| n.len()).collect(),
            capacities: values.clone(),
            refinement_ns: refine_ns.to_vec(),
            refinement_capacities: refine_values,
            all_checks_ok: all_ok,
        };
        let path = plan.dir.join("capacity.json");
        output::write_json(&path, &doc_json)?;
        println!("wrote {}", path.display());
    }
    for (i, v) in values.iter().enumerate() {
        println!("capacity[{i}] = {}", fmt17(*v));
    }
    Ok(())
}

pub fn cmd_gamma_test(doc: &ConfigDoc) -> Result<(), CliError> {
    let plan = doc.output_plan()?;
    let gamma_cfg = doc
        .gamma
        .as_ref()
        .ok_or_else(|| CliError::Config("gamma-test command needs a \"gamma\" section".into()))?;
    if gamma_cfg.scales.is_empty() {
        return Err(CliError::Config("gamma.scales must not be empty".into()));
    }
    if !gamma_cfg.scales.iter().all(|v| v.is_finite() && *v >= 0.0) {
        return Err(CliError::Config(
            "gamma.scales must be finite and nonnegative".into(),
        ));
    }
    if gamma_cfg.rhs_expressions.is_empty() {
        return Err(CliError::Config(
            "gamma.rhs_expressions must not be empty".into(),
        ));
    }
    let asm = assemble_from(doc)?;
    let dim = asm.mesh.interior_dof_count();
    let block = ConfigDoc::nodes_of_intervals(&asm.mesh, &[gamma_cfg.block])?;

    let mut mu_seq = Vec::new();
    let mut scale_labels = Vec::new();
    for &scale in &gamma_cfg.scales {
        let mut weights = vec![0.0; dim];
        for &i in &block {
            weights[i] = scale;
        }
        mu_seq.push(
            NodalMeasure::from_weights(asm.mesh.clone(), weights).map_err(CliError::from)?,
        );
        scale_labels.push(fmt17(scale));
    }
    if gamma_cfg.include_infinite_limit {
        let mut flags = vec![false; dim];
        for &i in &block {
            flags[i] = true;
        }
        mu_seq.push(
            NodalMeasure::new(asm.mesh.clone(), vec![0.0; dim], flags).map_err(CliError::from)?,
        );
        scale_labels.push("inf".to_string());
    }

    let mut f_list = Vec::new();
    for src in &gamma_cfg.rhs_expressions {
        let expr = Expr::parse(src)
            .map_err(|e| CliError::Config(format!("bad rhs expression {src:?}: {e}")))?;
        let f = FeFunction::interpolate(asm.mesh.clone(), |x| expr.eval(x));
        if !f.values().iter().all(|v| v.is_finite()) {
            return Err(CliError::Config(format!(
                "rhs expression {src:?} evaluates to a non-finite value on the mesh"
            )));
        }
        f_list.push(f);
    }

    let report = gamma_sequence_test(&asm.g, &asm.m, &mu_seq, &f_list)?;
    output::ensure_dir(&plan.dir)?;

    if plan.csv {
        let mut header = String::from("k,scale,z_diff");
        for j in 1..=f_list.len() {
            header.push_str(&format!(",f{j}_diff"));
        }
        let mut rows = Vec::new();
        for k in 0..mu_seq.len() {
            let mut row = vec![k.to_string(), scale_labels[k].clone(), fmt17(report.z_diffs[k])];
            for fd in &report.f_diffs {
                row.push(fmt17(fd[k]));
            }
            rows.push(row);
        }
        let path = plan.dir.join("gamma.csv");
        output::write_text(&path, &csv_table(&header, &rows))?;
        println!("wrote {}", path.display());
    }

    #[derive(Serialize)]
    struct GammaJson<'a> {
        scales: &'a [String],
        z_diffs: &'a [f64],
        f_diffs: &'a [Vec<f64>],
        z_apriori: &'a [f64],
        f_apriori: &'a [Vec<f64>],
        f_constants: &'a [f64],
        z_tail_ratio: f64,
        f_tail_ratios: &'a [f64],
        z_cauchy_implies_f_cauchy: bool,
    }
    if plan.json {
        let path = plan.dir.join("gamma.json");
        output::write_json(
            &path,
            &GammaJson {
                scales: &scale_labels,
                z_diffs: &report.z_diffs,
                f_diffs: &report.f_diffs,
                z_apriori: &report.z_apriori,
                f_apriori: &report.f_apriori,
                f_constants: &report.f_constants,
                z_tail_ratio: report.z_tail_ratio,
                f_tail_ratios: &report.f_tail_ratios,
                z_cauchy_implies_f_cauchy: report.z_cauchy_implies_f_cauchy,
            },
        )?;
        println!("wrote {}", path.display());
    }
    println!(
        "gamma: z_tail_ratio={} cauchy_witness={}",
        fmt17(report.z_tail_ratio),
        report.z_cauchy_implies_f_cauchy
    );
    Ok(())
}

fn preset_doc(
    text: &str,
    n: Option<usize>,
    s: Option<f64>,
    out: Option<std::path::PathBuf>,
) -> Result<ConfigDoc, CliError> {
    let mut doc = ConfigDoc::from_str(text)?;
    doc.apply_overrides(n, s, out)?;
    Ok(doc)
}

pub fn cmd_reproduce_1d(
    n: Option<usize>,
    s: Option<f64>,
    out: Option<std::path::PathBuf>,
) -> Result<(), CliError> {
    let doc = preset_doc(presets::REPRODUCE_1D, n, s, out)?;
    cmd_solve(&doc)
}

pub fn cmd_reproduce_spaces(
    n: Option<usize>,
    s: Option<f64>,
    out: Option<std::path::PathBuf>,
) -> Result<(), CliError> {
    let doc = preset_doc(presets::REPRODUCE_SPACES, n, s, out)?;
    let plan = doc.output_plan()?;
    let mesh = doc.mesh()?;
    let sp = doc.space()?;
    let base = doc.problem(&mesh)?;
    let m = mass_matrix(&mesh);
    let g_tilde = assemble(SpaceKind::IntegralTilde, &mesh, sp.s)?;
    let g_spec = assemble(SpaceKind::Spectral, &mesh, sp.s)?;

    // Rescale the smoothness weight so the spectral energy of the target
    // matches its whole-line energy; with it the two runs regularize the
    // target at equal strength and differ only through the space.
    let e_tilde = g_tilde.energy(&base.w_d)?;
    let e_spec = g_spec.energy(&base.w_d)?;
    if !(e_spec > 0.0) {
        return Err(CliError::Config(
            "target has zero spectral energy; cannot rescale".into(),
        ));
    }
    let alpha_rescaled = base.alpha * e_tilde / e_spec;

    let mut rescaled = base.clone();
    rescaled.alpha = alpha_rescaled;

    output::ensure_dir(&plan.dir)?;
    let runs: Vec<(&str, &GramOperator, &ProblemConfig)> = vec![
        ("integral_tilde", &g_tilde, &base),
        ("spectral", &g_spec, &base),
        ("spectral_rescaled", &g_spec, &rescaled),
    ];
    let mut solutions = Vec::new();
    for (name, g, cfg) in &runs {
        let report = dc_solve(cfg, g, &m)?;
        let opt = optimality_report(cfg, &report, g, &m)?;
        write_run(
            &plan,
            &format!("solution_{name}.csv"),
            &format!("report_{name}.json"),
            &mesh,
            &report,
            &opt,
        )?;
        solutions.push((*name, report.w_k.clone()));
    }

    // Pairwise shape comparison: normalized L² correlation is 1 for
    // solutions equal up to a positive amplitude factor.
    let mut rows = Vec::new();
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            let (na, wa) = &solutions[i];
            let (nb, wb) = &solutions[j];
            let inner = l2_inner(wa, wb)?;
            let norm_a = l2_norm(wa);
            let norm_b = l2_norm(wb);
            let correlation = if norm_a > 0.0 && norm_b > 0.0 {
                inner / (norm_a * norm_b)
            } else {
                0.0
            };
            rows.push(vec![
                format!("{na}:{nb}"),
                fmt17(correlation),
                fmt17(norm_a),
                fmt17(norm_b),
                fmt17(sup_norm(wa)),
                fmt17(sup_norm(wb)),
            ]);
        }
    }
    if plan.csv {
        let path = plan.dir.join("comparison.csv");
        output::write_text(
            &path,
            &csv_table(
                "pair,correlation,l2_norm_a,l2_norm_b,sup_norm_a,sup_norm_b",
                &rows,
            ),
        )?;
        println!("wrote {}", path.display());
    }
    println!("alpha_rescaled = {}", fmt17(alpha_rescaled));
    Ok(())
}

pub fn cmd_reproduce_p0(
    n: Option<usize>,
    s: Option<f64>,
    out: Option<std::path::PathBuf>,
) -> Result<(), CliError> {
    let doc = preset_doc(presets::REPRODUCE_P0, n, s, out)?;
    let plan = doc.output_plan()?;
    let mesh = doc.mesh()?;
    let sp = doc.space()?;
    let base = doc.problem(&mesh)?;
    let m = mass_matrix(&mesh);
    let g = assemble(sp.kind, &mesh, sp.s)?;

    // Three runs: the zero-norm penalty under a fast and a slow smoothing
    // schedule, and a small-p baseline for the sparsity comparison. The
    // p > 0 run keeps a deeper smoothing floor so the reweighting density
    // stays well defined near the support boundary.
    struct P0Run {
        name: &'static str,
        p: f64,
        factor: f64,
        eps_min: f64,
    }
    let runs = [
        P0Run { name: "p0_fast", p: 0.0, factor: 0.4, eps_min: 1e-8 },
        P0Run { name: "p0_slow", p: 0.0, factor: 0.9, eps_min: 1e-8 },
        P0Run { name: "p01_fast", p: 0.1, factor: 0.4, eps_min: 1e-10 },
    ];

    output::ensure_dir(&plan.dir)?;
    let mut table_rows = Vec::new();
    for run in &runs {
        let mut cfg = base.clone();
        cfg.p = run.p;
        cfg.eps_factor = run.factor;
        cfg.eps_min = run.eps_min;
        let report = dc_solve(&cfg, &g, &m)?;
        let opt = optimality_report(&cfg, &report, &g, &m)?;
        write_run(
            &plan,
            &format!("solution_{}.csv", run.name),
            &format!("report_{}.json", run.name),
            &mesh,
            &report,
            &opt,
        )?;
        let sup = sup_norm(&report.w_k);
        let meas = support_measure(&report.w_k, SUPPORT_REL_THRESHOLD * sup);
        table_rows.push(vec![
            run.name.to_string(),
            fmt17(run.p),
            fmt17(run.factor),
            fmt17(run.eps_min),
            report.converged.to_string(),
            report.iterations.to_string(),
            fmt17(sup),
            opt.support_w.len().to_string(),
            fmt17(meas),
        ]);
    }
    if plan.csv {
        let path = plan.dir.join("support_table.csv");
        output::write_text(
            &path,
            &csv_table(
                "run,p,factor,eps_min,converged,iterations,sup_norm_w,support_size,support_measure",
                &table_rows,
            ),
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
