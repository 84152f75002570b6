//! Assembly of the integral-form Gram matrices.
//!
//! The double integral of the singular kernel `|x−y|^{−1−2s}` against
//! differences of P1 hats is assembled from per-distance local matrices:
//! on a uniform mesh the pair integral over elements `(e, f)` depends only
//! on `d = f − e`, so each local matrix is computed once per distance.
//!
//! * `d = 0` — closed form: the radial part integrates to
//!   `2 / ((2−2s)(3−2s))` against products of hat slopes.
//! * `d = 1` — Duffy-type split of the corner singularity: after the
//!   change of variables the angular integrand is smooth and a 16-point
//!   Gauss rule resolves it; the radial direction is exact.
//! * `d ≥ 2` — the kernel is smooth on the pair; tensor Gauss with order
//!   decreasing in distance.
//!
//! The whole-line (tilde) variant adds the exterior correction
//! `2 ∫ w(x)² ρ(x) dx` with the analytic exterior density
//! `ρ(x) = (1/(2s)) [(x−a)^{−2s} + (b−x)^{−2s}]`, integrated per element;
//! on the two boundary elements the integrable endpoint singularity is
//! resolved in closed form (the surviving hat vanishes there like the
//! distance, so the integrand is a pure power).

use super::{GramOperator, SpaceKind};
use crate::error::{Error, Result};
use crate::fe::mass_matrix;
use crate::mesh::Mesh1D;
use crate::quadrature::GaussRule;
use crate::special::c_ds;
use nalgebra::DMatrix;
use std::sync::Arc;

/// Gauss order for the Duffy angular integral and the exterior density.
const ANGULAR_ORDER: usize = 16;

pub(super) fn assemble_integral(
    mesh: &Arc<Mesh1D>,
    s: f64,
    with_exterior: bool,
) -> Result<GramOperator> {
    if !(0.0 < s && s < 1.0) {
        return Err(Error::BadOrder { s, reason: "need s in (0, 1)".into() });
    }
    if s == 0.5 {
        return Err(Error::BadOrder {
            s,
            reason: "s = 1/2 is excluded for the integral kinds".into(),
        });
    }
    let n = mesh.n_elems();
    let ndof = mesh.interior_dof_count();
    let h = mesh.h();
    let cs = c_ds(1, s)?;
    let scale = h.powf(1.0 - 2.0 * s);

    // Per-distance local matrices.
    let local0 = local_same_element(s);
    let local1 = local_adjacent(s);
    let mut local_far: Vec<[[f64; 4]; 4]> = Vec::with_capacity(n.saturating_sub(2));
    for d in 2..n {
        local_far.push(local_distant(s, d));
    }

    // Scatter into the interior-node matrix. Pairs with f > e are doubled
    // (the form is symmetric in the two elements).
    let mut sing = DMatrix::<f64>::zeros(ndof, ndof);
    let mut add = |na: usize, nb: usize, v: f64| {
        if (1..n).contains(&na) && (1..n).contains(&nb) {
            sing[(na - 1, nb - 1)] += v;
        }
    };
    for e in 0..n {
        // d = 0.
        for (ia, na) in [(0usize, e), (1, e + 1)] {
            for (ib, nb) in [(0usize, e), (1, e + 1)] {
                add(na, nb, scale * local0[ia][ib]);
            }
        }
        // d = 1.
        if e + 1 < n {
            let nodes = [e, e + 1, e + 2];
            for (ia, &na) in nodes.iter().enumerate() {
                for (ib, &nb) in nodes.iter().enumerate() {
                    add(na, nb, 2.0 * scale * local1[ia][ib]);
                }
            }
        }
        // d >= 2.
        for f in (e + 2)..n {
            let local = &local_far[f - e - 2];
            let nodes = [e, e + 1, f, f + 1];
            for (ia, &na) in nodes.iter().enumerate() {
                for (ib, &nb) in nodes.iter().enumerate() {
                    add(na, nb, 2.0 * scale * local[ia][ib]);
                }
            }
        }
    }

    let mut g = mass_matrix(mesh) + (cs / 2.0) * sing;

    let kind = if with_exterior {
        g += cs * exterior_matrix(mesh, s);
        SpaceKind::IntegralTilde
    } else {
        SpaceKind::IntegralOmega
    };

    // Enforce exact symmetry against roundoff drift in the scatter.
    let gt = g.transpose();
    g = (g + gt) * 0.5;

    Ok(GramOperator::new(kind, s, mesh.clone(), g, Some(cs)))
}

/// Local matrix for a pair of identical elements, over the element's two
/// nodes. The singular radial integral has the closed form
/// `∫∫ |x−y|^{1−2s}-moment = 2/((2−2s)(3−2s))` against the constant
/// slope products; slopes of the two hats are `(−1, +1)`.
fn local_same_element(s: f64) -> [[f64; 2]; 2] {
    let i0 = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    let sigma = [-1.0, 1.0];
    let mut l = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            l[a][b] = sigma[a] * sigma[b] * i0;
        }
    }
    l
}

/// Local matrix for adjacent elements `(T_e, T_{e+1})`, over the three
/// nodes `e, e+1, e+2`. After the Duffy split of the common-corner
/// singularity the radial part integrates exactly to `1/(3−2s)` and the
/// angular part is the smooth integral of
/// `(P(1,t) + P(t,1)) (1+t)^{−1−2s}` with `P` the product of hat-slope
/// differences, parameterized by per-node slopes on the left and right
/// element: node e: (−1, 0); node e+1: (+1, −1); node e+2: (0, +1).
fn local_adjacent(s: f64) -> [[f64; 3]; 3] {
    let slopes = [(-1.0, 0.0), (1.0, -1.0), (0.0, 1.0)];
    let rule = GaussRule::legendre(ANGULAR_ORDER);
    let mut l = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let (sal, sar) = slopes[a];
            let (sbl, sbr) = slopes[b];
            let val = rule.integrate(0.0, 1.0, |t| {
                let p_1t = (sal + sar * t) * (sbl + sbr * t);
                let p_t1 = (sal * t + sar) * (sbl * t + sbr);
                (p_1t + p_t1) * (1.0 + t).powf(-1.0 - 2.0 * s)
            });
            l[a][b] = val / (3.0 - 2.0 * s);
        }
    }
    l
}

/// Local matrix for elements at distance `d ≥ 2`, over the four nodes
/// `e, e+1, f, f+1`. The kernel `(d + u − t)^{−1−2s}` is smooth; hat
/// differences evaluate to `(1−t, t, −(1−u), −u)`.
fn local_distant(s: f64, d: usize) -> [[f64; 4]; 4] {
    let order = if d <= 3 {
        12
    } else if d <= 10 {
        8
    } else {
        6
    };
    let rule = GaussRule::legendre(order);
    let q = rule.nodes.len();
    let mut l = [[0.0; 4]; 4];
    for i in 0..q {
        let t = rule.nodes[i];
        let wi = rule.weights[i];
        for j in 0..q {
            let u = rule.nodes[j];
            let w2 = wi * rule.weights[j];
            let kern = (d as f64 + u - t).powf(-1.0 - 2.0 * s);
            let dv = [1.0 - t, t, -(1.0 - u), -u];
            for a in 0..4 {
                for b in 0..4 {
                    l[a][b] += w2 * dv[a] * dv[b] * kern;
                }
            }
        }
    }
    l
}

/// Exterior correction matrix `E_ij = ∫ φ_i φ_j ρ` with
/// `ρ(x) = (1/(2s)) [(x−a)^{−2s} + (b−x)^{−2s}]`, assembled per element.
/// On the first element only the hat of node 1 survives and behaves like
/// `t`, so the `(x−a)`-part is the exact moment `∫ t^{2−2s} = 1/(3−2s)`;
/// the last element mirrors it for the `(b−x)`-part.
fn exterior_matrix(mesh: &Arc<Mesh1D>, s: f64) -> DMatrix<f64> {
    let n = mesh.n_elems();
    let ndof = mesh.interior_dof_count();
    let h = mesh.h();
    let rule = GaussRule::legendre(ANGULAR_ORDER);
    let factor = h.powf(1.0 - 2.0 * s) / (2.0 * s);
    let boundary_moment = 1.0 / (3.0 - 2.0 * s);
    let mut e_mat = DMatrix::<f64>::zeros(ndof, ndof);
    for e in 0..n {
        // Hats on element e: node e has shape 1−t, node e+1 has shape t.
        let hats: [(usize, fn(f64) -> f64); 2] = [(e, |t| 1.0 - t), (e + 1, |t| t)];
        for (na, sa) in hats {
            if !(1..n).contains(&na) {
                continue;
            }
            for (nb, sb) in hats {
                if !(1..n).contains(&nb) {
                    continue;
                }
                // (x−a)-part: kernel (e + t)^{−2s}.
                let v_left = if e == 0 {
                    // Only the (1,1) pairing reaches here: P(t) = t².
                    boundary_moment
                } else {
                    let ef = e as f64;
                    rule.integrate(0.0, 1.0, |t| sa(t) * sb(t) * (ef + t).powf(-2.0 * s))
                };
                // (b−x)-part: kernel (em + 1 − t)^{−2s} with the mirrored
                // element index em = n−1−e.
                let em = n - 1 - e;
                let v_right = if em == 0 {
                    // Only the (n−1, n−1) pairing: P(t) = (1−t)².
                    boundary_moment
                } else {
                    let emf = em as f64;
                    rule.integrate(0.0, 1.0, |t| {
                        sa(t) * sb(t) * (emf + 1.0 - t).powf(-2.0 * s)
                    })
                };
                e_mat[(na - 1, nb - 1)] += factor * (v_left + v_right);
            }
        }
    }
    e_mat
}
