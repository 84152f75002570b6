//! Discrete inner products (Gram operators) for the three realizations of
//! a fractional-order Sobolev space on an interval.
//!
//! * [`SpaceKind::IntegralTilde`] — the whole-line integral inner product
//!   of the zero extension: mass term, singular double integral over the
//!   domain, and an analytic exterior correction.
//! * [`SpaceKind::IntegralOmega`] — mass term plus the double integral
//!   over the domain only.
//! * [`SpaceKind::Spectral`] — fractional power of the Dirichlet
//!   Laplacian through the generalized P1 eigenproblem.
//!
//! For `s < 1/2` all three induce equivalent norms on the common discrete
//! space; for `s > 1/2` only the first and third are offered; `s = 1/2` is
//! excluded throughout.

mod integral;
mod oracle;
mod spectral;

pub use oracle::seminorm_oracle;
pub use spectral::{assemble_spectral, SpectralBasis};

use crate::error::{Error, Result};
use crate::mesh::{FeFunction, Mesh1D};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Which realization of the fractional inner product a Gram operator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    /// Whole-line integral form of the zero extension.
    IntegralTilde,
    /// Integral form over the domain only.
    IntegralOmega,
    /// Spectral form from Dirichlet–Laplacian eigenpairs.
    Spectral,
}

impl std::fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SpaceKind::IntegralTilde => "integral_tilde",
            SpaceKind::IntegralOmega => "integral_omega",
            SpaceKind::Spectral => "spectral",
        };
        f.write_str(name)
    }
}

/// The kinds that realize an equivalent norm at a given order `s`.
///
/// Returns an empty list at `s = 1/2` (excluded) and outside `(0, 1)`.
pub fn offered_kinds(s: f64) -> Vec<SpaceKind> {
    if !(0.0 < s && s < 1.0) || s == 0.5 {
        return Vec::new();
    }
    if s < 0.5 {
        vec![
            SpaceKind::IntegralTilde,
            SpaceKind::IntegralOmega,
            SpaceKind::Spectral,
        ]
    } else {
        vec![SpaceKind::IntegralTilde, SpaceKind::Spectral]
    }
}

/// A symmetric positive-definite matrix realizing one of the fractional
/// inner products on the interior nodes of a mesh.
#[derive(Debug, Clone)]
pub struct GramOperator {
    kind: SpaceKind,
    s: f64,
    mesh: Arc<Mesh1D>,
    matrix: DMatrix<f64>,
    /// Kernel normalization constant (integral kinds only).
    c_ds: Option<f64>,
}

impl GramOperator {
    pub(crate) fn new(
        kind: SpaceKind,
        s: f64,
        mesh: Arc<Mesh1D>,
        matrix: DMatrix<f64>,
        c_ds: Option<f64>,
    ) -> Self {
        Self { kind, s, mesh, matrix, c_ds }
    }

    /// Space realization this operator represents.
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Fractional order.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Underlying mesh.
    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    /// Dense symmetric matrix over the interior nodes.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Kernel constant `c_{1,s}` for the integral kinds, `None` for the
    /// spectral kind.
    pub fn c_ds(&self) -> Option<f64> {
        self.c_ds
    }

    /// Check that a function lives on this operator's mesh.
    pub fn check_mesh(&self, w: &FeFunction) -> Result<()> {
        if Arc::ptr_eq(&self.mesh, w.mesh()) || *self.mesh == **w.mesh() {
            Ok(())
        } else {
            Err(Error::MeshMismatch(
                "FeFunction mesh differs from GramOperator mesh".into(),
            ))
        }
    }

    /// Quadratic form `wᵀ G w`.
    pub fn energy(&self, w: &FeFunction) -> Result<f64> {
        gram_inner(self, w, w)
    }
}

/// Inner product `uᵀ G w` of two functions on the operator's mesh.
pub fn gram_inner(g: &GramOperator, u: &FeFunction, w: &FeFunction) -> Result<f64> {
    g.check_mesh(u)?;
    g.check_mesh(w)?;
    let n = g.matrix.nrows();
    let uv = u.values();
    let wv = w.values();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += g.matrix[(i, j)] * wv[j];
        }
        acc += uv[i] * row;
    }
    Ok(acc)
}

/// Assemble the Gram operator of the requested kind. The integral kinds
/// are gated by the offered-kind table for the fractional order `s`; the
/// spectral scale extends to the whole range `s ∈ [0, 1]` (its endpoints
/// reproduce the mass and stiffness matrices).
pub fn assemble(kind: SpaceKind, mesh: &Arc<Mesh1D>, s: f64) -> Result<GramOperator> {
    if kind != SpaceKind::Spectral && !offered_kinds(s).contains(&kind) {
        return Err(Error::BadOrder {
            s,
            reason: format!("kind {kind} is not offered at this order"),
        });
    }
    match kind {
        SpaceKind::IntegralTilde => assemble_integral_tilde(mesh, s),
        SpaceKind::IntegralOmega => assemble_integral_omega(mesh, s),
        SpaceKind::Spectral => assemble_spectral(mesh, s),
    }
}

/// Whole-line integral Gram operator of the zero extension (mass + double
/// integral + exterior correction).
pub fn assemble_integral_tilde(mesh: &Arc<Mesh1D>, s: f64) -> Result<GramOperator> {
    integral::assemble_integral(mesh, s, true)
}

/// Domain-only integral Gram operator (mass + double integral over the
/// domain, no exterior term).
pub fn assemble_integral_omega(mesh: &Arc<Mesh1D>, s: f64) -> Result<GramOperator> {
    integral::assemble_integral(mesh, s, false)
}
