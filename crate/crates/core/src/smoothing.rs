//! Smoothing families for the `L^p` pseudo-norm, `0 ≤ p < 1`.
//!
//! Both families regularize the map `t ↦ t^{p/2}` applied to `t = w²`:
//!
//! * **power family** (`p ∈ (0,1)`): quadratic near the origin, exact for
//!   `t ≥ ε²`, globally C¹ and concave in `t`;
//! * **zero-norm family** (`p = 0`): `t ↦ t/(t+ε)`, a smooth surrogate for
//!   the support indicator, recovered pointwise as `ε → 0`.
//!
//! Everything is composed with `t = w²`, so no absolute values appear and
//! the chain rule gives the reweighting density `2 w ψ'(w²)` used by the
//! solver.

use crate::error::{Error, Result};
use crate::mesh::FeFunction;
use crate::quadrature::GaussRule;

/// A smoothing family for the `L^p` pseudo-norm; `ZeroNorm` is the `p = 0`
/// case, `PowerP` covers `p ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingFamily {
    /// `ψ_ε(t) = (p/2)·t/ε^{2−p} + (1−p/2)·ε^p` on `[0, ε²)`, `t^{p/2}` beyond.
    PowerP {
        /// Exponent `p ∈ (0, 1)`.
        p: f64,
    },
    /// `ψ⁰_ε(t) = t/(t+ε)`.
    ZeroNorm,
}

impl SmoothingFamily {
    /// Family for a given exponent: `ZeroNorm` at `p = 0`, `PowerP`
    /// for `p ∈ (0,1)`.
    pub fn for_exponent(p: f64) -> Result<Self> {
        if p == 0.0 {
            Ok(Self::ZeroNorm)
        } else if (0.0..1.0).contains(&p) {
            Ok(Self::PowerP { p })
        } else {
            Err(Error::InvalidInput(format!(
                "smoothing exponent must lie in [0, 1), got {p}"
            )))
        }
    }

    /// The exponent this family smooths (0 for `ZeroNorm`).
    pub fn p(&self) -> f64 {
        match *self {
            Self::PowerP { p } => p,
            Self::ZeroNorm => 0.0,
        }
    }

    fn validate(&self, t: f64, eps: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "smoothing argument t must be nonnegative, got {t}"
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "smoothing parameter eps must be positive, got {eps}"
            )));
        }
        Ok(())
    }

    /// `ψ_ε(t)` (power family) or `ψ⁰_ε(t)` (zero-norm family), `t ≥ 0`.
    pub fn psi(&self, t: f64, eps: f64) -> Result<f64> {
        self.validate(t, eps)?;
        Ok(match *self {
            Self::PowerP { p } => {
                if t < eps * eps {
                    0.5 * p * t / eps.powf(2.0 - p) + (1.0 - 0.5 * p) * eps.powf(p)
                } else {
                    t.powf(0.5 * p)
                }
            }
            Self::ZeroNorm => t / (t + eps),
        })
    }

    /// Derivative in `t`: `ψ'_ε(t) = (p/2)·min(ε^{p−2}, t^{(p−2)/2})`
    /// (finite at `t = 0`) or `ψ⁰_ε'(t) = ε/(t+ε)²`.
    pub fn psi_prime(&self, t: f64, eps: f64) -> Result<f64> {
        self.validate(t, eps)?;
        Ok(match *self {
            Self::PowerP { p } => {
                let cap = eps.powf(p - 2.0);
                let slope = if t > 0.0 { t.powf(0.5 * (p - 2.0)) } else { f64::INFINITY };
                0.5 * p * cap.min(slope)
            }
            Self::ZeroNorm => eps / ((t + eps) * (t + eps)),
        })
    }
}

/// Smoothed penalty `Σ_i m_i ψ_ε(w_i²)` by lumped nodal quadrature.
///
/// Lumping is what makes the solver's diagonal reweighting the exact
/// first-order condition of this functional; use [`g_eps_quadrature`] when a
/// consistent-quadrature value is wanted for reporting.
pub fn g_eps(
    family: SmoothingFamily,
    w: &FeFunction,
    eps: f64,
    m_lumped: &[f64],
) -> Result<f64> {
    if m_lumped.len() != w.values().len() {
        return Err(Error::MeshMismatch(format!(
            "lumped mass vector has {} entries for {} dofs",
            m_lumped.len(),
            w.values().len()
        )));
    }
    let mut total = 0.0;
    for (&wi, &mi) in w.values().iter().zip(m_lumped) {
        total += mi * family.psi(wi * wi, eps)?;
    }
    Ok(total)
}

/// Smoothed penalty `∫ ψ_ε(w(x)²) dx` by per-element Gauss quadrature
/// (reporting variant; the solver's optimality system closes against
/// [`g_eps`], not this).
pub fn g_eps_quadrature(
    family: SmoothingFamily,
    w: &FeFunction,
    eps: f64,
    order: usize,
) -> Result<f64> {
    if order < 2 {
        return Err(Error::InvalidInput(format!(
            "quadrature order must be at least 2, got {order}"
        )));
    }
    // The integrand is smooth, so plain per-element Gauss converges; any
    // psi error (negative eps) surfaces via the validation below.
    family.validate(0.0, eps)?;
    let rule = GaussRule::legendre(order);
    let mesh = w.mesh();
    let (a, h, n) = (mesh.a(), mesh.h(), mesh.n_elems());
    let mut total = 0.0;
    for e in 0..n {
        total += rule.integrate(a + e as f64 * h, a + (e + 1) as f64 * h, |x| {
            let v = w.eval(x);
            family
                .psi(v * v, eps)
                .expect("psi is total for t >= 0, eps > 0")
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::lp_integral;
    use crate::fe::lumped_masses;
    use crate::mesh::Mesh1D;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn family_construction_and_exponent() {
        assert_eq!(SmoothingFamily::for_exponent(0.0).unwrap(), SmoothingFamily::ZeroNorm);
        assert_eq!(
            SmoothingFamily::for_exponent(0.5).unwrap(),
            SmoothingFamily::PowerP { p: 0.5 }
        );
        assert!(SmoothingFamily::for_exponent(1.0).is_err());
        assert!(SmoothingFamily::for_exponent(-0.1).is_err());
        assert_eq!(SmoothingFamily::ZeroNorm.p(), 0.0);
    }

    #[test]
    fn psi_values_at_reference_points() {
        let fam = SmoothingFamily::PowerP { p: 0.5 };
        // Breakpoint t = eps^2: both branches give eps^p.
        let eps = 0.1f64;
        let at_break = fam.psi(eps * eps, eps).unwrap();
        assert_relative_eq!(at_break, eps.powf(0.5), max_relative = 1e-14);
        let below = 0.5 * 0.5 * 0.0025 / eps.powf(1.5) + 0.75 * eps.powf(0.5);
        assert_relative_eq!(fam.psi(0.0025, eps).unwrap(), below, max_relative = 1e-14);
        assert_relative_eq!(fam.psi(0.0025, eps).unwrap(), 0.2569350598886808, max_relative = 1e-12);
        // Beyond the breakpoint the family is exact: 4^{p/2} = sqrt(2).
        assert_relative_eq!(
            fam.psi(4.0, eps).unwrap(),
            2.0f64.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            SmoothingFamily::ZeroNorm.psi(1.0, 1.0).unwrap(),
            0.5,
            max_relative = 1e-15
        );
        assert!(fam.psi(-1.0, eps).is_err());
        assert!(fam.psi(1.0, 0.0).is_err());
    }

    #[test]
    fn psi_prime_values_at_reference_points() {
        let fam = SmoothingFamily::PowerP { p: 0.5 };
        let eps = 0.1f64;
        // min picks the t-branch at t = 1.
        assert_relative_eq!(fam.psi_prime(1.0, eps).unwrap(), 0.25, max_relative = 1e-14);
        // min picks the eps-branch at t = 0; 0.25 * 0.1^{-1.5}.
        assert_relative_eq!(
            fam.psi_prime(0.0, eps).unwrap(),
            7.905694150420948,
            max_relative = 1e-12
        );
        // Zero-norm derivative at 0 equals 1/eps.
        assert_relative_eq!(
            SmoothingFamily::ZeroNorm.psi_prime(0.0, 0.5).unwrap(),
            2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn c1_at_breakpoint() {
        let fam = SmoothingFamily::PowerP { p: 0.5 };
        for eps in [0.3f64, 0.05] {
            let t_star = eps * eps;
            let expected = 0.5 * 0.5 * eps.powf(0.5 - 2.0);
            let left = fam.psi_prime(t_star * (1.0 - 1e-10), eps).unwrap();
            let right = fam.psi_prime(t_star * (1.0 + 1e-10), eps).unwrap();
            assert_relative_eq!(left, expected, max_relative = 1e-6);
            assert_relative_eq!(right, expected, max_relative = 1e-6);
            // One-sided difference quotients agree across the breakpoint.
            let d = 1e-7 * t_star;
            let fd_left = (fam.psi(t_star, eps).unwrap() - fam.psi(t_star - d, eps).unwrap()) / d;
            let fd_right = (fam.psi(t_star + d, eps).unwrap() - fam.psi(t_star, eps).unwrap()) / d;
            assert_relative_eq!(fd_left, expected, max_relative = 1e-5);
            assert_relative_eq!(fd_right, expected, max_relative = 1e-5);
        }
    }

    #[test]
    fn majorization_and_exactness() {
        let fam = SmoothingFamily::PowerP { p: 0.3 };
        let eps = 0.2;
        for k in 0..200 {
            let t = 1e-4 * (k as f64 + 1.0) * 50.0;
            let smooth = fam.psi(t, eps).unwrap();
            let exact = t.powf(0.15);
            assert!(smooth >= exact - 1e-14, "t={t}: {smooth} < {exact}");
            if t >= eps * eps {
                assert_relative_eq!(smooth, exact, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn derivatives_monotone_in_t() {
        let eps = 0.17;
        let fams = [SmoothingFamily::PowerP { p: 0.5 }, SmoothingFamily::ZeroNorm];
        for fam in fams {
            let mut prev = f64::INFINITY;
            for k in 0..400 {
                let t = 0.01 * k as f64;
                let d = fam.psi_prime(t, eps).unwrap();
                assert!(d > 0.0);
                assert!(d <= prev + 1e-15, "t={t}");
                prev = d;
            }
        }
    }

    #[test]
    fn finite_difference_consistency() {
        let fams = [SmoothingFamily::PowerP { p: 0.5 }, SmoothingFamily::ZeroNorm];
        let eps = 0.3;
        for fam in fams {
            for t in [0.5f64 * eps * eps, 2.0 * eps * eps, 1.0, 3.7] {
                let delta = 1e-6 * t.max(eps * eps);
                let fd = (fam.psi(t + delta, eps).unwrap() - fam.psi(t - delta, eps).unwrap())
                    / (2.0 * delta);
                assert!(
                    (fd - fam.psi_prime(t, eps).unwrap()).abs() <= 1e-6,
                    "family {fam:?}, t={t}"
                );
            }
        }
    }

    #[test]
    fn lumped_g_eps_anchors() {
        let mesh = Arc::new(Mesh1D::new(0.0, 1.0, 16).unwrap());
        let m = lumped_masses(&mesh);
        let zero = FeFunction::zero(mesh.clone());
        // Zero function, power family: constant first branch everywhere.
        let fam = SmoothingFamily::PowerP { p: 0.5 };
        let eps = 0.1f64;
        let expected = (1.0 - 0.25) * eps.powf(0.5) * m.iter().sum::<f64>();
        assert_relative_eq!(g_eps(fam, &zero, eps, &m).unwrap(), expected, max_relative = 1e-14);
        assert_eq!(g_eps(SmoothingFamily::ZeroNorm, &zero, eps, &m).unwrap(), 0.0);
        assert!(g_eps(fam, &zero, eps, &m[1..]).is_err());
    }

    #[test]
    fn zero_norm_monotone_in_eps_and_converges_to_support_measure() {
        let mesh = Arc::new(Mesh1D::new(0.0, 1.0, 16).unwrap());
        // Exactly 1 on nodes 4..=10, zero elsewhere: a clean block.
        let mut vals = vec![0.0; 15];
        for v in &mut vals[4..=10] {
            *v = 1.0;
        }
        let w = FeFunction::new(mesh, vals).unwrap();
        let fam = SmoothingFamily::ZeroNorm;
        let mut prev = -1.0;
        let mut last = 0.0;
        for k in 1..=6 {
            let eps = 10f64.powi(-k);
            let val = g_eps_quadrature(fam, &w, eps, 12).unwrap();
            assert!(val > prev, "eps={eps}: {val} <= {prev}");
            prev = val;
            last = val;
        }
        let support = lp_integral(&w, 0.0, 1e-12).unwrap();
        assert!(
            (last - support).abs() <= 1e-3,
            "g_eps(1e-6) = {last}, support measure = {support}"
        );
    }

    #[test]
    fn lp_integral_converges_as_p_drops() {
        let mesh = Arc::new(Mesh1D::new(0.0, 1.0, 16).unwrap());
        let mut vals = vec![0.0; 15];
        for v in &mut vals[4..=10] {
            *v = 2.0;
        }
        let w = FeFunction::new(mesh, vals).unwrap();
        let limit = lp_integral(&w, 0.0, 1e-12).unwrap();
        let mut prev_gap = f64::INFINITY;
        let mut final_gap = f64::INFINITY;
        for p in [0.5, 0.1, 0.05, 0.01] {
            let gap = (lp_integral(&w, p, 0.0).unwrap() - limit).abs();
            assert!(gap < prev_gap, "p={p}");
            prev_gap = gap;
            final_gap = gap;
        }
        assert!(final_gap <= 1e-2, "gap at p=0.01 is {final_gap}");
    }
}
