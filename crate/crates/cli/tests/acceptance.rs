//! Acceptance suite: one test per criterion, each printed as its own
//! pass/fail line by the harness.
//!
//! The criteria pin the toolkit's contract end to end: quadrature oracle
//! agreement, spectral anchors, relaxed-solve identities, measure
//! round-trips, capacity properties, the two preset reproductions with
//! their support diagnostics, optimality-gap identities, the `p → 0`
//! continuation trend, the measure-sequence harness, and byte-exact
//! determinism of the CLI artifacts.

use fracap_core::{
    assemble, capacity, dc_solve, gamma_sequence_test, l2_inner, mass_matrix, measure_from_z,
    offered_kinds, optimality_report, p_to_zero_continuation, relaxed_dirichlet_solve,
    seminorm_oracle, stiffness_matrix, support_measure, torsion_z, FeFunction, GramOperator,
    Mesh1D, NodalMeasure, ProblemConfig, SpaceKind, SUPPORT_REL_THRESHOLD,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

struct Fixture {
    mesh: Arc<Mesh1D>,
    g: GramOperator,
    m: DMatrix<f64>,
}

fn fixture(cell: &'static OnceLock<Fixture>, n: usize) -> &'static Fixture {
    cell.get_or_init(|| {
        let mesh = Arc::new(Mesh1D::new(0.0, 1.0, n).unwrap());
        let g = assemble(SpaceKind::IntegralTilde, &mesh, 0.1).unwrap();
        let m = mass_matrix(&mesh);
        Fixture { mesh, g, m }
    })
}

static TILDE_64: OnceLock<Fixture> = OnceLock::new();
static TILDE_256: OnceLock<Fixture> = OnceLock::new();
static TILDE_512: OnceLock<Fixture> = OnceLock::new();

fn tilde_64() -> &'static Fixture {
    fixture(&TILDE_64, 64)
}
fn tilde_256() -> &'static Fixture {
    fixture(&TILDE_256, 256)
}
fn tilde_512() -> &'static Fixture {
    fixture(&TILDE_512, 512)
}

fn sup_norm(w: &FeFunction) -> f64 {
    w.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

fn l2_norm(w: &FeFunction) -> f64 {
    l2_inner(w, w).unwrap().max(0.0).sqrt()
}

fn quadratic_target(mesh: &Arc<Mesh1D>) -> FeFunction {
    FeFunction::interpolate(mesh.clone(), |x| 20.0 * (x - 0.5) * (x - 0.5))
}

fn concave_target(mesh: &Arc<Mesh1D>) -> FeFunction {
    FeFunction::interpolate(mesh.clone(), |x| 10.0 * x * (x - 1.0))
}

/// Criterion 1: for n = 16 and s in {0.1, 0.3, 0.45}, the assembled
/// quadratic form matches the adaptive quadrature oracle to 1e-6 relative
/// on 20 random vectors for both integral kinds, within 60 s total.
#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let mesh = Arc::new(Mesh1D::new(0.0, 1.0, 16).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for &s in &[0.1, 0.3, 0.45] {
        for &kind in &[SpaceKind::IntegralTilde, SpaceKind::IntegralOmega] {
            let g = assemble(kind, &mesh, s).unwrap();
            for _ in 0..20 {
                let values: Vec<f64> = (0..mesh.interior_dof_count())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                let w = FeFunction::new(mesh.clone(), values).unwrap();
                let quad_form = g.energy(&w).unwrap();
                let oracle = seminorm_oracle(&w, kind, s, 1e-7).unwrap();
                let rel = (quad_form - oracle).abs() / oracle;
                assert!(
                    rel <= 1e-6,
                    "kind {kind} s={s}: assembly {quad_form} vs oracle {oracle}, rel {rel:.3e}"
                );
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 60.0, "oracle comparison took {elapsed:.1} s > 60 s");
}

/// Criterion 2: the spectral operator lands exactly on the classical
/// anchors at n = 128 — stiffness at s = 1 and mass at s = 0, both to
/// 1e-10 in the relative max norm.
#[test]
fn criterion_02_spectral_anchors() {
    let mesh = Arc::new(Mesh1D::new(0.0, 1.0, 128).unwrap());
    let max_norm = |a: &DMatrix<f64>| a.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));

    let g1 = assemble(SpaceKind::Spectral, &mesh, 1.0).unwrap();
    let k = stiffness_matrix(&mesh);
    let diff1 = max_norm(&(g1.matrix() - &k)) / max_norm(&k);
    assert!(diff1 <= 1e-10, "s=1 vs stiffness: rel max diff {diff1:.3e}");

    let g0 = assemble(SpaceKind::Spectral, &mesh, 0.0).unwrap();
    let m = mass_matrix(&mesh);
    let diff0 = max_norm(&(g0.matrix() - &m)) / max_norm(&m);
    assert!(diff0 <= 1e-10, "s=0 vs mass: rel max diff {diff0:.3e}");
}

/// Criterion 3: the relaxed Dirichlet energy identity and the a-priori
/// bound hold to 1e-10 on 100 random (measure, load) instances at n = 64,
/// s = 0.1, for every offered kind.
#[test]
fn criterion_03_energy_identity_and_apriori() {
    let mesh = Arc::new(Mesh1D::new(0.0, 1.0, 64).unwrap());
    let m = mass_matrix(&mesh);
    let kinds = offered_kinds(0.1);
    assert_eq!(kinds.len(), 3, "expected all three kinds at s = 0.1");
    let operators: Vec<GramOperator> = kinds
        .iter()
        .map(|&k| assemble(k, &mesh, 0.1).unwrap())
        .collect();
    let dim = mesh.interior_dof_count();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..100 {
        let weights: Vec<f64> = (0..dim)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.0..50.0)
                }
            })
            .collect();
        let mu = NodalMeasure::from_weights(mesh.clone(), weights).unwrap();
        let f = FeFunction::new(
            mesh.clone(),
            (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        for g in &operators {
            let sol = relaxed_dirichlet_solve(g, &m, &mu, &f).unwrap();
            let identity_err = (sol.energy_lhs - sol.energy_rhs).abs();
            assert!(
                identity_err <= 1e-10 * (1.0 + sol.energy_lhs.abs()),
                "kind {}: energy identity off by {identity_err:.3e}",
                g.kind()
            );
            assert!(
                sol.w_norm <= sol.rhs_dual_norm * (1.0 + 1e-10) + 1e-10,
                "kind {}: a-priori bound violated: {} > {}",
                g.kind(),
                sol.w_norm,
                sol.rhs_dual_norm
            );
        }
    }
}

/// Criterion 4: reconstructing a measure from its torsion function
/// recovers the weights to 1e-6 relative wherever the torsion function is
/// positive, for 20 random block measures including blocks where the
/// measure is infinite; the infinite set is recovered exactly.
#[test]
fn criterion_04_measure_round_trip() {
    let fx = tilde_64();
    let dim = fx.mesh.interior_dof_count();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for case in 0..20 {
        let mut weights = vec![0.0; dim];
        let mut infinite = vec![false; dim];
        // One or two finite blocks with a shared random weight each.
        for _ in 0..rng.gen_range(1..=2) {
            let start = rng.gen_range(0..dim - 8);
            let len = rng.gen_range(3..=8);
            let w = rng.gen_range(0.5..50.0);
            for i in start..(start + len).min(dim) {
                weights[i] = w;
            }
        }
        // Every other case adds an infinite block.
        if case % 2 == 0 {
            let start = rng.gen_range(0..dim - 6);
            let len = rng.gen_range(2..=6);
            for i in start..(start + len).min(dim) {
                weights[i] = 0.0;
                infinite[i] = true;
            }
        }
        let mu = NodalMeasure::new(fx.mesh.clone(), weights.clone(), infinite.clone()).unwrap();
        let z = torsion_z(&fx.g, &fx.m, &mu).unwrap().w;
        let z_max = sup_norm(&z);
        let threshold = 1e-12 * (1.0 + z_max);
        let recovered = measure_from_z(&fx.g, &fx.m, &z, threshold).unwrap();
        assert_eq!(
            recovered.infinite_set(),
            &infinite[..],
            "case {case}: infinite set not recovered exactly"
        );
        let w_max = weights.iter().cloned().fold(0.0f64, f64::max);
        for i in 0..dim {
            if z.values()[i] <= threshold {
                continue;
            }
            let got = recovered.weights()[i];
            let want = weights[i];
            if want > 0.0 {
                assert!(
                    (got - want).abs() <= 1e-6 * want,
                    "case {case} node {i}: weight {got} vs {want}"
                );
            } else {
                assert!(
                    got.abs() <= 1e-6 * (1.0 + w_max),
                    "case {case} node {i}: spurious weight {got}"
                );
            }
        }
    }
}

/// Criterion 5: capacity is monotone under set inclusion and subadditive
/// under unions, on 50 random interval pairs at n = 64, s = 0.1, with
/// violation tolerance 1e-10.
#[test]
fn criterion_05_capacity_properties() {
    let fx = tilde_64();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let tol = 1e-10;
    let nodes_of = |l: f64, r: f64| fx.mesh.interior_nodes_in(l, r);
    for case in 0..50 {
        let la = rng.gen_range(0.02..0.6);
        let ra = la + rng.gen_range(0.05..0.35);
        let lb = rng.gen_range(0.02..0.6);
        let rb = lb + rng.gen_range(0.05..0.35);
        let a = nodes_of(la, ra.min(0.98));
        let b = nodes_of(lb, rb.min(0.98));
        let mut union = a.clone();
        union.extend(&b);
        union.sort_unstable();
        union.dedup();
        let cap_a = capacity(&fx.g, &a).unwrap().value;
        let cap_b = capacity(&fx.g, &b).unwrap().value;
        let cap_u = capacity(&fx.g, &union).unwrap().value;
        // Monotonicity along A ⊆ A∪B and B ⊆ A∪B.
        assert!(
            cap_a <= cap_u + tol,
            "case {case}: cap(A)={cap_a} > cap(A∪B)={cap_u}"
        );
        assert!(
            cap_b <= cap_u + tol,
            "case {case}: cap(B)={cap_b} > cap(A∪B)={cap_u}"
        );
        // Subadditivity.
        assert!(
            cap_u <= cap_a + cap_b + tol,
            "case {case}: cap(A∪B)={cap_u} > {cap_a}+{cap_b}"
        );
    }
}

/// Criterion 6: the quadratic-target preset at n = 512 reproduces the
/// support coincidence of the solution and its torsion function — Jaccard
/// index at the 1e-8-relative threshold at least 0.95, the inclusion
/// supp(w) ⊆ supp(z) exact — and the measure blows up like p·ε^(p-2)/2 on
/// the complement of supp(w). Completes within 120 s.
#[test]
fn criterion_06_preset_support_coincidence() {
    let start = Instant::now();
    // The shipped preset must describe exactly this run.
    let doc = fracap_cli::config::ConfigDoc::from_str(fracap_cli::config::presets::REPRODUCE_1D)
        .unwrap();
    let mesh_cfg = doc.mesh.as_ref().unwrap();
    assert_eq!((mesh_cfg.a, mesh_cfg.b, mesh_cfg.n), (0.0, 1.0, 512));
    let space = doc.space.as_ref().unwrap();
    assert_eq!(space.kind, SpaceKind::IntegralTilde);
    assert_eq!(space.s, 0.1);

    let fx = tilde_512();
    let cfg = doc.problem(&fx.mesh).unwrap();
    assert_eq!((cfg.alpha, cfg.beta, cfg.p), (1.0, 1.0, 0.5));
    let report = dc_solve(&cfg, &fx.g, &fx.m).unwrap();
    assert!(report.converged, "preset run did not converge");
    let opt = optimality_report(&cfg, &report, &fx.g, &fx.m).unwrap();

    assert!(opt.jaccard >= 0.95, "Jaccard {} < 0.95", opt.jaccard);
    assert!(opt.support_inclusion, "supp(w) ⊄ supp(z)");

    // Measure blow-up on the complement of supp(w).
    let floor = cfg.p * report.eps_k.powf(cfg.p - 2.0) / 2.0;
    let in_support: std::collections::BTreeSet<usize> = opt.support_w.iter().copied().collect();
    for i in 0..fx.mesh.interior_dof_count() {
        if !in_support.contains(&i) {
            let mu_i = report.mu_k.weights()[i];
            assert!(
                mu_i >= floor * (1.0 - 1e-12),
                "node {i}: mu {mu_i:.6e} below blow-up floor {floor:.6e}"
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 120.0, "preset run took {elapsed:.1} s > 120 s");
}

/// Criterion 7: under the zero-norm penalty on the concave target, the
/// slow smoothing schedule 0.9^k drives the solution to zero (sup norm
/// at most 1e-6) while the fast schedule 0.4^k keeps a support of
/// positive measure that is at most the support of the p = 0.1 baseline —
/// at both n = 256 and n = 512.
#[test]
fn criterion_07_schedule_contrast() {
    for fx in [tilde_256(), tilde_512()] {
        let n = fx.mesh.n_elems();
        // The schedule contrast on this target needs the penalty at this
        // strength: with beta = 1 the effective nodal penalty ceiling
        // beta/(2 w^2) overtakes the tracking curvature while the slow
        // schedule still dwells at large ε, and the iteration collapses;
        // at half the weight no schedule collapses and there is nothing
        // to contrast.
        let beta = 1.0;
        let mut slow = ProblemConfig::new(1.0, beta, 0.0, concave_target(&fx.mesh));
        slow.eps_factor = 0.9;
        slow.eps_min = 1e-8;
        slow.max_iter = 400;
        let slow_report = dc_solve(&slow, &fx.g, &fx.m).unwrap();
        assert!(slow_report.converged);
        let slow_sup = sup_norm(&slow_report.w_k);
        assert!(
            slow_sup <= 1e-6,
            "n={n}: slow schedule kept sup norm {slow_sup:.3e}"
        );

        let mut fast = slow.clone();
        fast.eps_factor = 0.4;
        let fast_report = dc_solve(&fast, &fx.g, &fx.m).unwrap();
        assert!(fast_report.converged);
        let fast_sup = sup_norm(&fast_report.w_k);
        let fast_meas = support_measure(&fast_report.w_k, SUPPORT_REL_THRESHOLD * fast_sup);
        assert!(
            fast_meas > 0.0,
            "n={n}: fast schedule lost the whole support"
        );

        let mut baseline = fast.clone();
        baseline.p = 0.1;
        baseline.eps_min = 1e-10;
        let base_report = dc_solve(&baseline, &fx.g, &fx.m).unwrap();
        assert!(base_report.converged);
        let base_sup = sup_norm(&base_report.w_k);
        let base_meas = support_measure(&base_report.w_k, SUPPORT_REL_THRESHOLD * base_sup);
        assert!(
            fast_meas <= base_meas,
            "n={n}: p=0 support {fast_meas} exceeds p=0.1 support {base_meas}"
        );
    }
}

/// Criterion 8: on converged runs with p in (0,1) the pairing ⟨λ, w⟩
/// matches p·∫|w|^p to 1e-6 relative, and p = 0 runs keep the pairing
/// above -1e-10.
#[test]
fn criterion_08_optimality_gap() {
    let fx = tilde_64();
    for &p in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        let mut cfg = ProblemConfig::new(1.0, 1.0, p, quadratic_target(&fx.mesh));
        cfg.eps_min = 1e-10;
        // The fixed-point contraction slows as p approaches 1; iterations
        // at this mesh size are cheap, so give the tail room.
        cfg.max_iter = 4000;
        let report = dc_solve(&cfg, &fx.g, &fx.m).unwrap();
        assert!(report.converged, "p={p} run did not converge");
        let opt = optimality_report(&cfg, &report, &fx.g, &fx.m).unwrap();
        // gap = ⟨λ, w⟩ − p·∫|w|^p, so the integral is pairing − gap.
        let scale = opt.lambda_dot_w - opt.complementarity_gap;
        assert!(
            opt.complementarity_gap.abs() <= 1e-6 * (1.0 + scale),
            "p={p}: gap {:.3e} vs scale {scale:.3e}",
            opt.complementarity_gap
        );
    }
    for &factor in &[0.4, 0.9] {
        let mut cfg = ProblemConfig::new(1.0, 1.0, 0.0, concave_target(&fx.mesh));
        cfg.eps_factor = factor;
        cfg.eps_min = 1e-8;
        cfg.max_iter = 400;
        let report = dc_solve(&cfg, &fx.g, &fx.m).unwrap();
        let opt = optimality_report(&cfg, &report, &fx.g, &fx.m).unwrap();
        assert!(
            opt.lambda_dot_w >= -1e-10,
            "p=0 factor {factor}: pairing {:.3e} below -1e-10",
            opt.lambda_dot_w
        );
    }
}

/// Criterion 9: along the continuation p = 0.5 → 0.01 on the concave
/// target, the recorded pairings ⟨λ, w⟩ stay positive and decay to at
/// most a tenth of their starting value.
#[test]
fn criterion_09_continuation_trend() {
    let fx = tilde_256();
    let mut cfg = ProblemConfig::new(1.0, 0.5, 0.5, concave_target(&fx.mesh));
    cfg.eps_factor = 0.4;
    cfg.eps_min = 1e-10;
    cfg.max_iter = 400;
    let (reports, cont) =
        p_to_zero_continuation(&cfg, &[0.5, 0.25, 0.1, 0.05, 0.01], &fx.g, &fx.m).unwrap();
    assert!(reports.iter().all(|r| r.converged));
    assert!(
        cont.pairings.iter().all(|&v| v > 0.0),
        "pairings not positive: {:?}",
        cont.pairings
    );
    assert!(
        cont.final_over_first <= 0.1,
        "final/first = {} > 0.1 ({:?})",
        cont.final_over_first,
        cont.pairings
    );
}

/// Criterion 10: scaling a block measure by 10^k, k = 0..4, the torsion
/// functions approach the hard-constraint limit strictly monotonically,
/// landing within 1e-3 of the initial torsion norm; three further
/// right-hand sides show the same Cauchy pattern.
#[test]
fn criterion_10_gamma_harness() {
    let fx = tilde_64();
    let dim = fx.mesh.interior_dof_count();
    let block = fx.mesh.interior_nodes_in(0.375, 0.625);
    let mut mu_seq = Vec::new();
    for k in 0..=4 {
        let mut weights = vec![0.0; dim];
        for &i in &block {
            weights[i] = 10f64.powi(k);
        }
        mu_seq.push(NodalMeasure::from_weights(fx.mesh.clone(), weights).unwrap());
    }
    let mut flags = vec![false; dim];
    for &i in &block {
        flags[i] = true;
    }
    mu_seq.push(NodalMeasure::new(fx.mesh.clone(), vec![0.0; dim], flags).unwrap());

    let f_list = [
        FeFunction::interpolate(fx.mesh.clone(), |x| (std::f64::consts::PI * x).sin()),
        FeFunction::interpolate(fx.mesh.clone(), |x| x * (1.0 - x)),
        FeFunction::interpolate(fx.mesh.clone(), |x| x * x * (1.0 - x)),
    ];
    let report = gamma_sequence_test(&fx.g, &fx.m, &mu_seq, &f_list).unwrap();

    // Finite entries approach the infinite-block reference strictly.
    for k in 1..=4 {
        assert!(
            report.z_diffs[k] < report.z_diffs[k - 1],
            "z diffs not strictly decreasing: {:?}",
            report.z_diffs
        );
        for fd in &report.f_diffs {
            assert!(
                fd[k] < fd[k - 1],
                "f diffs not strictly decreasing: {fd:?}"
            );
        }
    }
    let z0 = torsion_z(&fx.g, &fx.m, &mu_seq[0]).unwrap().w;
    let z0_norm = l2_norm(&z0);
    assert!(
        report.z_diffs[4] <= 1e-3 * z0_norm,
        "final diff {} > 1e-3 * {}",
        report.z_diffs[4],
        z0_norm
    );
    assert!(report.z_cauchy_implies_f_cauchy);
}

/// Criterion 11: repeated preset runs emit byte-identical CSV artifacts.
#[test]
fn criterion_11_determinism() {
    let bin = env!("CARGO_BIN_EXE_fracap");
    let base = std::env::temp_dir().join(format!("fracap-accept-{}", std::process::id()));
    let run = |preset: &str, n: &str, dir: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args([preset, "--n", n, "--out"])
            .arg(dir)
            .stdout(std::process::Stdio::null())
            .status()
            .expect("failed to launch fracap");
        assert!(status.success(), "{preset} exited with {status}");
    };
    for (preset, n, files) in [
        ("reproduce-1d", "96", vec!["solution.csv", "report.json"]),
        (
            "reproduce-p0",
            "48",
            vec![
                "solution_p0_fast.csv",
                "solution_p0_slow.csv",
                "solution_p01_fast.csv",
                "support_table.csv",
            ],
        ),
    ] {
        let dir_a = base.join(format!("{preset}-a"));
        let dir_b = base.join(format!("{preset}-b"));
        run(preset, n, &dir_a);
        run(preset, n, &dir_b);
        for file in files {
            let a = std::fs::read(dir_a.join(file)).unwrap();
            let b = std::fs::read(dir_b.join(file)).unwrap();
            assert!(!a.is_empty(), "{preset}/{file} is empty");
            assert_eq!(a, b, "{preset}/{file} differs between runs");
        }
    }
    let _ = std::fs::remove_dir_all(&base);
}

/// The dual-vector entry point accepts a raw load and reports consistent
/// diagnostics (exercised here so the acceptance target covers both rhs
/// paths end to end).
#[test]
fn dual_rhs_path_consistent() {
    let fx = tilde_64();
    let dim = fx.mesh.interior_dof_count();
    let mu = NodalMeasure::zero(fx.mesh.clone());
    let f = FeFunction::interpolate(fx.mesh.clone(), |x| (2.0 * x).cos());
    let by_function = relaxed_dirichlet_solve(&fx.g, &fx.m, &mu, &f).unwrap();
    let load = &fx.m * DVector::from_column_slice(f.values());
    let by_dual = relaxed_dirichlet_solve(&fx.g, &fx.m, &mu, &load).unwrap();
    assert_eq!(by_function.w.values(), by_dual.w.values());
    assert_eq!(dim, by_dual.w.values().len());
}
