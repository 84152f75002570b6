//! Spectral Gram operator from the generalized P1 eigenproblem.
//!
//! With `K Φ = M Φ Λ` and `Φ` M-orthonormal, the matrix
//! `G = (MΦ) Λ^s (MΦ)ᵀ` realizes `wᵀGw = Σ λ_n^s ŵ_n²` on the spectral
//! coefficients `ŵ_n = φ_nᵀ M w`. The eigenproblem is reduced to standard
//! symmetric form through the Cholesky factor of `M`:
//! `A = L⁻¹ K L⁻ᵀ = Q Λ Qᵀ`, and `MΦ = LQ`, so `G = LQ Λ^s QᵀLᵀ`.
//!
//! The decomposition is independent of `s`; [`SpectralBasis`] stores it so
//! operators for several orders reuse one eigensolve.

use super::{GramOperator, SpaceKind};
use crate::error::{Error, Result};
use crate::fe::{mass_matrix, stiffness_matrix};
use crate::mesh::Mesh1D;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// The `s`-independent part of the spectral construction: generalized
/// eigenvalues and the factor `LQ`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    mesh: Arc<Mesh1D>,
    eigenvalues: DVector<f64>,
    lq: DMatrix<f64>,
}

impl SpectralBasis {
    /// Solve the generalized eigenproblem for a mesh.
    pub fn new(mesh: &Arc<Mesh1D>) -> Result<Self> {
        let m = mass_matrix(mesh);
        let k = stiffness_matrix(mesh);
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Linalg("mass matrix Cholesky failed".into()))?;
        let l = chol.l();
        // A = L⁻¹ K L⁻ᵀ, symmetric positive definite.
        let mut b = k;
        l.solve_lower_triangular_mut(&mut b); // b = L⁻¹ K
        let mut bt = b.transpose();
        l.solve_lower_triangular_mut(&mut bt); // bt = L⁻¹ Kᵀ L⁻ᵀ = Aᵀ
        let a = (bt.transpose() + bt) * 0.5;
        let eig = a.symmetric_eigen();
        // Sort eigenpairs ascending for reproducible output.
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[i]
                .partial_cmp(&eig.eigenvalues[j])
                .expect("eigenvalues are finite")
        });
        let mut eigenvalues = DVector::zeros(n);
        let mut q = DMatrix::zeros(n, n);
        for (col, &idx) in order.iter().enumerate() {
            eigenvalues[col] = eig.eigenvalues[idx];
            q.set_column(col, &eig.eigenvectors.column(idx));
        }
        if eigenvalues[0] <= 0.0 {
            return Err(Error::Linalg(format!(
                "generalized eigenproblem returned non-positive eigenvalue {}",
                eigenvalues[0]
            )));
        }
        let lq = l * q;
        Ok(Self { mesh: mesh.clone(), eigenvalues, lq })
    }

    /// Discrete Dirichlet eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Gram operator for order `s ∈ [0, 1]` (the endpoints reproduce the
    /// mass and stiffness matrices and serve as anchors).
    pub fn gram(&self, s: f64) -> Result<GramOperator> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::BadOrder {
                s,
                reason: "spectral kind needs s in [0, 1]".into(),
            });
        }
        let n = self.eigenvalues.len();
        let mut scaled = self.lq.clone();
        for j in 0..n {
            let f = self.eigenvalues[j].powf(s);
            for i in 0..n {
                scaled[(i, j)] *= f;
            }
        }
        let g = &scaled * self.lq.transpose();
        let gt = g.transpose();
        let g = (g + gt) * 0.5;
        Ok(GramOperator::new(
            SpaceKind::Spectral,
            s,
            self.mesh.clone(),
            g,
            None,
        ))
    }
}

/// Assemble the spectral Gram operator for one order. Reuse a
/// [`SpectralBasis`] directly when several orders share a mesh.
pub fn assemble_spectral(mesh: &Arc<Mesh1D>, s: f64) -> Result<GramOperator> {
    SpectralBasis::new(mesh)?.gram(s)
}
