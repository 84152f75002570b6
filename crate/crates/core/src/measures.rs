//! Nodal capacitary measures, relaxed Dirichlet solves, torsion functions,
//! capacities of node sets, and the reconstruction of a measure from its
//! torsion function.
//!
//! A [`NodalMeasure`] is a nonnegative density against the lumped nodal
//! quadrature, plus a per-node "infinite" flag. A finite weight enters the
//! relaxed Dirichlet system as a diagonal penalty; an infinite node imposes
//! the hard constraint `w = 0` there (rows and columns eliminated), which is
//! the exact discrete counterpart of a measure charging a set so heavily
//! that admissible functions must vanish on it.
//!
//! The torsion function `z` (solve with right-hand side `f ≡ 1`) determines
//! its measure: the slack `η = M·1 − G·z` of the defining inequality is
//! supported where the measure acts, and `μ = η / z` nodewise, infinite on
//! the plateau `{z = 0}` — see [`measure_from_z`]. Round-tripping through
//! [`torsion_z`] and back is an identity up to solver roundoff.

use crate::error::{Error, Result};
use crate::fe::lumped_masses;
use crate::gram::GramOperator;
use crate::mesh::{FeFunction, Mesh1D};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Nonnegative nodal density with an optional set of "infinite" nodes.
///
/// Weight `weights[i]` is the measure's density against the lumped mass
/// `m_i` at interior node `i`; a node in the infinite set forces `w = 0`
/// there in every relaxed Dirichlet solve. Stored weights on infinite
/// nodes are canonicalized to `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalMeasure {
    mesh: Arc<Mesh1D>,
    weights: Vec<f64>,
    infinite_set: Vec<bool>,
}

impl NodalMeasure {
    /// Build a measure from weights and infinite flags (one per interior
    /// node). Weights must be nonnegative, and finite wherever the node is
    /// not flagged infinite.
    pub fn new(mesh: Arc<Mesh1D>, weights: Vec<f64>, infinite_set: Vec<bool>) -> Result<Self> {
        let n = mesh.interior_dof_count();
        if weights.len() != n || infinite_set.len() != n {
            return Err(Error::InvalidInput(format!(
                "measure needs {n} weights and flags, got {} and {}",
                weights.len(),
                infinite_set.len()
            )));
        }
        let mut weights = weights;
        for (i, w) in weights.iter_mut().enumerate() {
            if infinite_set[i] {
                *w = f64::INFINITY;
            } else if !(*w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "weight {w} at node {i} must be finite and nonnegative"
                )));
            }
        }
        Ok(Self { mesh, weights, infinite_set })
    }

    /// The zero measure.
    pub fn zero(mesh: Arc<Mesh1D>) -> Self {
        let n = mesh.interior_dof_count();
        Self { mesh, weights: vec![0.0; n], infinite_set: vec![false; n] }
    }

    /// A measure with finite weights everywhere.
    pub fn from_weights(mesh: Arc<Mesh1D>, weights: Vec<f64>) -> Result<Self> {
        let flags = vec![false; weights.len()];
        Self::new(mesh, weights, flags)
    }

    /// Underlying mesh.
    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    /// Nodal weights (`+∞` on infinite nodes).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Per-node infinite flags.
    pub fn infinite_set(&self) -> &[bool] {
        &self.infinite_set
    }

    /// Whether any node is flagged infinite.
    pub fn has_infinite(&self) -> bool {
        self.infinite_set.iter().any(|&b| b)
    }

    /// Entrywise `self ≤ other`, treating infinite nodes as `+∞`.
    pub fn le(&self, other: &NodalMeasure) -> bool {
        *self.mesh == *other.mesh
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a <= b)
    }

    fn check_mesh(&self, g: &GramOperator) -> Result<()> {
        if **g.mesh() == *self.mesh {
            Ok(())
        } else {
            Err(Error::MeshMismatch(
                "measure and Gram operator live on different meshes".into(),
            ))
        }
    }
}

/// Result of a relaxed Dirichlet solve, with the residual and the
/// energy/a-priori diagnostics recorded.
#[derive(Debug, Clone)]
pub struct RelaxedDirichletSolution {
    /// The solution (zero on infinite nodes by construction).
    pub w: FeFunction,
    /// The measure the system was built from.
    pub measure: NodalMeasure,
    /// Human-readable description of the right-hand side.
    pub rhs_description: String,
    /// Relative residual of the reduced linear system.
    pub residual_norm: f64,
    /// Energy identity, left side: `wᵀGw + wᵀD_μw` (test `v = w`).
    pub energy_lhs: f64,
    /// Energy identity, right side: `rhsᵀw`.
    pub energy_rhs: f64,
    /// `‖w‖_G = √(wᵀGw)`.
    pub w_norm: f64,
    /// Dual norm of the data, `√(rhsᵀ G⁻¹ rhs)`; the a-priori bound is
    /// `w_norm ≤ rhs_dual_norm` up to roundoff.
    pub rhs_dual_norm: f64,
}

/// Right-hand side data for a relaxed Dirichlet solve: either nodal
/// function data `f` (the load becomes `M f`) or a raw dual vector.
#[derive(Debug, Clone, Copy)]
pub enum RhsData<'a> {
    /// Nodal function data; the system load is `M f`.
    Function(&'a FeFunction),
    /// A dual vector used as the load directly.
    Dual(&'a DVector<f64>),
}

impl<'a> From<&'a FeFunction> for RhsData<'a> {
    fn from(f: &'a FeFunction) -> Self {
        RhsData::Function(f)
    }
}

impl<'a> From<&'a DVector<f64>> for RhsData<'a> {
    fn from(v: &'a DVector<f64>) -> Self {
        RhsData::Dual(v)
    }
}

/// Solve the relaxed Dirichlet problem `(G + D_μ) w = rhs` with
/// `D_μ = diag(weights_i · m_i)`, eliminating infinite nodes (`w = 0`
/// there).
///
/// Records the reduced-system residual, the energy identity sides, and the
/// a-priori pair `‖w‖_G ≤ √(rhsᵀG⁻¹rhs)`.
pub fn relaxed_dirichlet_solve<'a>(
    g: &GramOperator,
    m: &DMatrix<f64>,
    mu: &NodalMeasure,
    f: impl Into<RhsData<'a>>,
) -> Result<RelaxedDirichletSolution> {
    let (rhs, description) = match f.into() {
        RhsData::Function(f) => {
            g.check_mesh(f)?;
            let v = DVector::from_column_slice(f.values());
            (m * v, "load M f from nodal data".to_string())
        }
        RhsData::Dual(v) => (v.clone(), "raw dual vector load".to_string()),
    };
    solve_impl(g, m, mu, rhs, description)
}

fn solve_impl(
    g: &GramOperator,
    m: &DMatrix<f64>,
    mu: &NodalMeasure,
    rhs: DVector<f64>,
    rhs_description: String,
) -> Result<RelaxedDirichletSolution> {
    mu.check_mesh(g)?;
    let n = g.mesh().interior_dof_count();
    if m.nrows() != n || m.ncols() != n || rhs.len() != n {
        return Err(Error::MeshMismatch(format!(
            "mass matrix {}x{} / rhs {} incompatible with {n} dofs",
            m.nrows(),
            m.ncols(),
            rhs.len()
        )));
    }
    let lumped = lumped_masses(g.mesh());
    let free: Vec<usize> = (0..n).filter(|&i| !mu.infinite_set()[i]).collect();
    let nf = free.len();
    let gm = g.matrix();

    let mut w_full = DVector::zeros(n);
    let (residual_norm, energy_lhs, energy_rhs) = if nf == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let mut a = DMatrix::zeros(nf, nf);
        let mut b = DVector::zeros(nf);
        for (r, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate() {
                a[(r, c)] = gm[(i, j)];
            }
            a[(r, r)] += mu.weights()[i] * lumped[i];
            b[r] = rhs[i];
        }
        let chol = a.clone().cholesky().ok_or_else(|| {
            Error::Linalg("reduced relaxed Dirichlet system is not positive definite".into())
        })?;
        let x = chol.solve(&b);
        let ax = &a * &x;
        let residual = (&ax - &b).norm() / (1.0 + b.norm());
        let lhs = x.dot(&ax);
        let rhs_e = b.dot(&x);
        for (r, &i) in free.iter().enumerate() {
            w_full[i] = x[r];
        }
        (residual, lhs, rhs_e)
    };

    let w_norm = (w_full.dot(&(gm * &w_full))).max(0.0).sqrt();
    let g_chol = gm
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Linalg("Gram matrix is not positive definite".into()))?;
    let rhs_dual_norm = rhs.dot(&g_chol.solve(&rhs)).max(0.0).sqrt();

    let w = FeFunction::new(g.mesh().clone(), w_full.iter().copied().collect())?;
    Ok(RelaxedDirichletSolution {
        w,
        measure: mu.clone(),
        rhs_description,
        residual_norm,
        energy_lhs,
        energy_rhs,
        w_norm,
        rhs_dual_norm,
    })
}

/// Torsion function of a measure: the relaxed Dirichlet solve with `f ≡ 1`.
pub fn torsion_z(
    g: &GramOperator,
    m: &DMatrix<f64>,
    mu: &NodalMeasure,
) -> Result<RelaxedDirichletSolution> {
    let n = g.mesh().interior_dof_count();
    let ones = DVector::from_element(n, 1.0);
    solve_impl(g, m, mu, m * ones, "torsion load: f = 1".to_string())
}

/// Outcome of a capacity computation.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// The minimal quadratic value `wᵀGw` under the pinning constraint.
    pub value: f64,
    /// The minimizer (1 on the pinned nodes).
    pub minimizer: FeFunction,
    /// Whether `0 ≤ w_i ≤ 1` held at every node (not guaranteed by the
    /// discrete system; recorded for diagnostics).
    pub box_constraint_held: bool,
}

/// Capacity of a set of interior nodes: minimize `wᵀGw` subject to `w = 1`
/// on the given nodes. Empty input gives capacity 0.
pub fn capacity(g: &GramOperator, k_nodes: &[usize]) -> Result<CapacityResult> {
    let n = g.mesh().interior_dof_count();
    let mut pinned = vec![false; n];
    for &i in k_nodes {
        if i >= n {
            return Err(Error::InvalidInput(format!(
                "node index {i} out of range for {n} interior nodes"
            )));
        }
        pinned[i] = true;
    }
    if k_nodes.is_empty() {
        return Ok(CapacityResult {
            value: 0.0,
            minimizer: FeFunction::zero(g.mesh().clone()),
            box_constraint_held: true,
        });
    }
    let gm = g.matrix();
    let free: Vec<usize> = (0..n).filter(|&i| !pinned[i]).collect();
    let nf = free.len();
    let mut w_full = DVector::from_iterator(n, pinned.iter().map(|&p| if p { 1.0 } else { 0.0 }));
    if nf > 0 {
        // G_FF w_F = -G_FK 1.
        let mut a = DMatrix::zeros(nf, nf);
        let mut b = DVector::zeros(nf);
        for (r, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate() {
                a[(r, c)] = gm[(i, j)];
            }
            let mut load = 0.0;
            for (j, &p) in pinned.iter().enumerate() {
                if p {
                    load -= gm[(i, j)];
                }
            }
            b[r] = load;
        }
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::Linalg("reduced capacity system is not positive definite".into()))?;
        let x = chol.solve(&b);
        for (r, &i) in free.iter().enumerate() {
            w_full[i] = x[r];
        }
    }
    let value = w_full.dot(&(gm * &w_full));
    let box_constraint_held = w_full.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v));
    let minimizer = FeFunction::new(g.mesh().clone(), w_full.iter().copied().collect())?;
    Ok(CapacityResult { value, minimizer, box_constraint_held })
}

/// Per-node membership report for the torsion-function cone: nonnegative
/// functions whose pairing `(z, ·)_G` never exceeds the volume pairing.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    /// Membership verdict at the given tolerance.
    pub is_member: bool,
    /// Tolerance the verdict used.
    pub tol: f64,
    /// Smallest nodal value of `z` (membership needs `≥ -tol`).
    pub min_z: f64,
    /// Per-node slack `η_i = (M·1 - G·z)_i` (membership needs `≥ -tol`).
    pub slack: Vec<f64>,
    /// Smallest slack entry.
    pub min_slack: f64,
}

/// Check membership of `z` in the torsion-function cone: `z ≥ -tol`
/// nodally and `(G z)_i ≤ (M·1)_i + tol` for every interior hat.
pub fn check_k_membership(
    g: &GramOperator,
    m: &DMatrix<f64>,
    z: &FeFunction,
    tol: f64,
) -> Result<MembershipReport> {
    g.check_mesh(z)?;
    let n = g.mesh().interior_dof_count();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::MeshMismatch("mass matrix size mismatch".into()));
    }
    let zv = DVector::from_column_slice(z.values());
    let ones = DVector::from_element(n, 1.0);
    let slack_v = m * ones - g.matrix() * zv;
    let slack: Vec<f64> = slack_v.iter().copied().collect();
    let min_z = z.values().iter().copied().fold(f64::INFINITY, f64::min);
    let min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MembershipReport {
        is_member: min_z >= -tol && min_slack >= -tol,
        tol,
        min_z,
        slack,
        min_slack,
    })
}

/// Reconstruct the measure from a torsion function: weights
/// `η_i / (m_i z_i)` where `z_i > zero_threshold`, infinite where
/// `z_i ≤ zero_threshold`. Fails if `z` is not in the torsion cone (up to
/// a roundoff-scaled tolerance).
pub fn measure_from_z(
    g: &GramOperator,
    m: &DMatrix<f64>,
    z: &FeFunction,
    zero_threshold: f64,
) -> Result<NodalMeasure> {
    let scale = 1.0
        + z.values().iter().fold(0.0f64, |a, v| a.max(v.abs()))
        + g.mesh().h();
    let tol = 1e-8 * scale;
    let report = check_k_membership(g, m, z, tol)?;
    if !report.is_member {
        return Err(Error::Precondition(format!(
            "z is not a torsion function: min z = {:.3e}, min slack = {:.3e}, tol = {:.3e}",
            report.min_z, report.min_slack, tol
        )));
    }
    let lumped = lumped_masses(g.mesh());
    let n = z.values().len();
    let mut weights = vec![0.0; n];
    let mut infinite = vec![false; n];
    for i in 0..n {
        if z.values()[i] > zero_threshold {
            weights[i] = report.slack[i].max(0.0) / (lumped[i] * z.values()[i]);
        } else {
            infinite[i] = true;
        }
    }
    NodalMeasure::new(g.mesh().clone(), weights, infinite)
}
