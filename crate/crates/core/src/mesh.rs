//! Uniform 1D meshes and P1 nodal finite-element functions.
//!
//! Degrees of freedom are the interior nodes only: every function handled
//! by this crate satisfies a homogeneous boundary condition and is extended
//! by zero outside the interval, matching the three space realizations in
//! [`crate::gram`].

use crate::error::{Error, Result};
use std::sync::Arc;

/// Uniform partition of an interval `(a, b)` into `n_elems` P1 elements.
///
/// Interior nodes `x_i = a + i·h`, `i = 1..n_elems`, carry the degrees of
/// freedom; the boundary nodes are constrained to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    a: f64,
    b: f64,
    n_elems: usize,
    nodes: Vec<f64>,
}

impl Mesh1D {
    /// Build a uniform mesh on `(a, b)` with `n_elems ≥ 2` elements.
    pub fn new(a: f64, b: f64, n_elems: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidInput(format!(
                "interval ({a}, {b}) must be finite with b > a"
            )));
        }
        if n_elems < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 elements for one interior node, got {n_elems}"
            )));
        }
        let h = (b - a) / n_elems as f64;
        let mut nodes = Vec::with_capacity(n_elems + 1);
        for i in 0..=n_elems {
            nodes.push(a + h * i as f64);
        }
        // Guard against accumulation drift: pin the right endpoint.
        *nodes.last_mut().unwrap() = b;
        let mesh = Self { a, b, n_elems, nodes };
        debug_assert!(mesh.uniformity_ok());
        Ok(mesh)
    }

    fn uniformity_ok(&self) -> bool {
        let h = self.h();
        self.nodes
            .windows(2)
            .all(|p| ((p[1] - p[0]) - h).abs() <= 1e-14 * (1.0 + h.abs()))
    }

    /// Left endpoint.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Right endpoint.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of elements.
    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    /// Element width.
    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n_elems as f64
    }

    /// All nodes including the two boundary nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of interior nodes (degrees of freedom).
    pub fn interior_dof_count(&self) -> usize {
        self.n_elems - 1
    }

    /// Coordinates of the interior nodes, in index order.
    pub fn interior_nodes(&self) -> Vec<f64> {
        self.nodes[1..self.n_elems].to_vec()
    }

    /// Map interior node indices (0-based over interior dofs) contained in
    /// the half-open interval `[l, r)`.
    pub fn interior_nodes_in(&self, l: f64, r: f64) -> Vec<usize> {
        (0..self.interior_dof_count())
            .filter(|&i| {
                let x = self.nodes[i + 1];
                l <= x && x < r
            })
            .collect()
    }
}

/// A P1 function on a [`Mesh1D`], represented by its interior nodal values;
/// implicitly zero at the boundary nodes and outside the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    mesh: Arc<Mesh1D>,
    values: Vec<f64>,
}

impl FeFunction {
    /// Wrap interior nodal values on a mesh.
    pub fn new(mesh: Arc<Mesh1D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.interior_dof_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} interior values, got {}",
                mesh.interior_dof_count(),
                values.len()
            )));
        }
        Ok(Self { mesh, values })
    }

    /// The zero function.
    pub fn zero(mesh: Arc<Mesh1D>) -> Self {
        let n = mesh.interior_dof_count();
        Self { mesh, values: vec![0.0; n] }
    }

    /// Nodal interpolant of a scalar function at the interior nodes.
    pub fn interpolate(mesh: Arc<Mesh1D>, f: impl Fn(f64) -> f64) -> Self {
        let values = mesh.interior_nodes().iter().map(|&x| f(x)).collect();
        Self { mesh, values }
    }

    /// Underlying mesh.
    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    /// Interior nodal values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable interior nodal values.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Evaluate the piecewise-linear function at `x` (zero outside `(a,b)`).
    pub fn eval(&self, x: f64) -> f64 {
        let m = &self.mesh;
        if x <= m.a() || x >= m.b() {
            return 0.0;
        }
        let h = m.h();
        let t = (x - m.a()) / h;
        let e = (t.floor() as usize).min(m.n_elems() - 1);
        let frac = t - e as f64;
        let left = self.node_value(e);
        let right = self.node_value(e + 1);
        left + (right - left) * frac
    }

    /// Value at global node index `i ∈ 0..=n_elems` (boundary nodes give 0).
    pub fn node_value(&self, i: usize) -> f64 {
        if i == 0 || i == self.mesh.n_elems() {
            0.0
        } else {
            self.values[i - 1]
        }
    }

    /// Max-norm of the nodal values.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Indices of interior nodes with `|v_i| > rel_threshold · max|v|`.
    pub fn support_nodes(&self, rel_threshold: f64) -> Vec<usize> {
        let m = self.max_abs();
        if m == 0.0 {
            return Vec::new();
        }
        let thr = rel_threshold * m;
        (0..self.values.len())
            .filter(|&i| self.values[i].abs() > thr)
            .collect()
    }

    /// Check that `other` lives on the same mesh.
    pub fn same_mesh(&self, other: &FeFunction) -> Result<()> {
        if Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh {
            Ok(())
        } else {
            Err(Error::MeshMismatch(
                "FeFunctions built on different meshes".into(),
            ))
        }
    }
}
