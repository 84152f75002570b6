//! P1 element matrices and element-wise integral functionals.

use crate::error::{Error, Result};
use crate::mesh::{FeFunction, Mesh1D};
use crate::quadrature::GaussRule;
use nalgebra::DMatrix;

/// Exact P1 mass matrix on the interior nodes: tridiagonal with diagonal
/// `2h/3` and off-diagonal `h/6`.
pub fn mass_matrix(mesh: &Mesh1D) -> DMatrix<f64> {
    let n = mesh.interior_dof_count();
    let h = mesh.h();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 2.0 * h / 3.0;
        if i + 1 < n {
            m[(i, i + 1)] = h / 6.0;
            m[(i + 1, i)] = h / 6.0;
        }
    }
    m
}

/// Exact P1 Dirichlet stiffness matrix: tridiagonal with diagonal `2/h`
/// and off-diagonal `−1/h`.
pub fn stiffness_matrix(mesh: &Mesh1D) -> DMatrix<f64> {
    let n = mesh.interior_dof_count();
    let h = mesh.h();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 2.0 / h;
        if i + 1 < n {
            k[(i, i + 1)] = -1.0 / h;
            k[(i + 1, i)] = -1.0 / h;
        }
    }
    k
}

/// Lumped nodal masses: row sums of the mass matrix (`h` at interior
/// nodes, `5h/6` at the two nodes adjacent to the boundary).
pub fn lumped_masses(mesh: &Mesh1D) -> Vec<f64> {
    let n = mesh.interior_dof_count();
    let h = mesh.h();
    let mut m = vec![h; n];
    if n >= 1 {
        m[0] = 5.0 * h / 6.0;
        m[n - 1] = 5.0 * h / 6.0;
    }
    if n == 1 {
        // Single interior hat: row sum is just the diagonal 2h/3.
        m[0] = 2.0 * h / 3.0;
    }
    m
}

/// `L²` inner product `uᵀ M w` of two P1 functions, evaluated exactly
/// through the tridiagonal mass action.
pub fn l2_inner(u: &FeFunction, w: &FeFunction) -> Result<f64> {
    u.same_mesh(w)?;
    let h = u.mesh().h();
    let uv = u.values();
    let wv = w.values();
    let n = uv.len();
    let mut acc = 0.0;
    for i in 0..n {
        let left = if i > 0 { wv[i - 1] } else { 0.0 };
        let right = if i + 1 < n { wv[i + 1] } else { 0.0 };
        acc += uv[i] * (h / 6.0) * (left + 4.0 * wv[i] + right);
    }
    Ok(acc)
}

/// The `L^p` pseudo-norm `∫ |w|^p dx` of a P1 function for `p ∈ [0, 1)`.
///
/// For `p > 0` each element is split at its sign change and integrated by
/// Gauss–Legendre quadrature under the substitution that absorbs the
/// `|w|^p` endpoint degeneracy (the transformed integrand is constant, so
/// the rule's order does not matter beyond roundoff). For `p = 0` the
/// Lebesgue measure of `{ |w| > zero_threshold }` is computed exactly from
/// the linear pieces.
pub fn lp_integral(w: &FeFunction, p: f64, zero_threshold: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Precondition(format!("p = {p} outside [0, 1)")));
    }
    if zero_threshold < 0.0 {
        return Err(Error::Precondition("zero_threshold must be >= 0".into()));
    }
    if p == 0.0 {
        return Ok(support_measure(w, zero_threshold));
    }
    lp_integral_with_order(w, p, 8)
}

/// `p > 0` branch with an explicit Gauss order (used by the order-doubling
/// invariant test).
pub fn lp_integral_with_order(w: &FeFunction, p: f64, order: usize) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Precondition(format!("p = {p} outside (0, 1)")));
    }
    if order < 5 {
        return Err(Error::Precondition("Gauss order must be >= 5".into()));
    }
    let rule = GaussRule::legendre(order);
    let mesh = w.mesh();
    let h = mesh.h();
    let mut acc = 0.0;
    for e in 0..mesh.n_elems() {
        let vl = w.node_value(e);
        let vr = w.node_value(e + 1);
        if vl * vr < 0.0 {
            // Sign change: split at the root of the affine function.
            let root = h * vl / (vl - vr);
            acc += lp_piece(vl.abs(), 0.0, root, p, &rule);
            acc += lp_piece(0.0, vr.abs(), h - root, p, &rule);
        } else {
            acc += lp_piece(vl.abs(), vr.abs(), h, p, &rule);
        }
    }
    Ok(acc)
}

/// `∫₀^len |v(t)|^p dt` where `|v|` is affine from `u0` to `u1`, both
/// nonnegative. Uses the substitution `T = T1·u^{1/(1+p)}` measured from
/// the (possibly virtual) zero of the affine function, under which the
/// integrand is constant and Gauss quadrature is exact.
fn lp_piece(u0: f64, u1: f64, len: f64, p: f64, rule: &GaussRule) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let scale = u0.max(u1);
    if scale == 0.0 {
        return 0.0;
    }
    if (u1 - u0).abs() <= 1e-14 * scale {
        // Flat piece: |v|^p is constant.
        return rule.integrate(0.0, len, |_| scale.powf(p));
    }
    // Orient so the affine profile increases from lo to hi.
    let (lo, hi) = if u0 < u1 { (u0, u1) } else { (u1, u0) };
    let sigma = (hi - lo) / len; // positive slope of |v| toward hi
    // Distances from the zero of the extended affine function.
    let t1 = hi / sigma;
    let u_lo = (lo / hi).powf(1.0 + p);
    // t(u) = t1 · u^{1/(1+p)};  |v| = sigma · t;  dt = t1/(1+p) · u^{1/(1+p)-1} du.
    let inv = 1.0 / (1.0 + p);
    rule.integrate(u_lo, 1.0, |u| {
        let t = t1 * u.powf(inv);
        let jac = t1 * inv * u.powf(inv - 1.0);
        (sigma * t).powf(p) * jac
    })
}

/// Exact Lebesgue measure of `{ x : |w(x)| > thr }` for a P1 function.
pub fn support_measure(w: &FeFunction, thr: f64) -> f64 {
    let mesh = w.mesh();
    let h = mesh.h();
    let mut total = 0.0;
    for e in 0..mesh.n_elems() {
        let vl = w.node_value(e);
        let vr = w.node_value(e + 1);
        let slope = (vr - vl) / h;
        if slope == 0.0 {
            if vl.abs() > thr {
                total += h;
            }
            continue;
        }
        // The sublevel set {|v| <= thr} of an affine function is the
        // preimage of [-thr, thr]: one interval.
        let ta = (-thr - vl) / slope;
        let tb = (thr - vl) / slope;
        let (tlo, thi) = if ta < tb { (ta, tb) } else { (tb, ta) };
        let inside = (thi.min(h) - tlo.max(0.0)).max(0.0);
        total += h - inside;
    }
    total
}
