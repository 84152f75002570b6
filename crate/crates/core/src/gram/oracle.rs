//! Assembly-independent quadrature oracle for the integral-form norms.
//!
//! Evaluates `‖w‖²` for a P1 function directly from its pointwise values:
//! the mass term by per-element Gauss quadrature, the double integral by
//! adaptive quadtree refinement toward the diagonal `x = y` with Aitken Δ²
//! extrapolation in the refinement depth, and (for the zero-extension form)
//! the exterior weight by dyadically graded quadrature toward the endpoints,
//! where the weight is singular.
//!
//! Nothing here shares code with the Gram assembly: quadrature rules are
//! staggered (different orders in `x` and `y`, so no quadrature node ever
//! lands exactly on the diagonal), panels follow the geometric singularity
//! instead of precomputed per-distance formulas, and the kernel is evaluated
//! from scratch. Agreement between [`seminorm_oracle`] and
//! [`GramOperator::energy`](super::GramOperator::energy) therefore checks the
//! assembly end to end.

use super::SpaceKind;
use crate::error::{Error, Result};
use crate::mesh::FeFunction;
use crate::quadrature::GaussRule;
use crate::special::c_ds;

/// Gauss order in `x`; staggered against [`ORDER_Y`].
const ORDER_X: usize = 10;
/// Gauss order in `y`. Odd, so its midpoint node can never pair with an
/// [`ORDER_X`] node to hit `x = y` on a symmetric cell.
const ORDER_Y: usize = 11;
/// First refinement depth at which an extrapolated value exists.
const START_DEPTH: usize = 6;
/// Refinement budget; exceeding it reports failure instead of a bad value.
const MAX_DEPTH: usize = 14;
/// Dyadic levels toward each endpoint for the exterior weight
/// (`2⁻⁴⁵ ≈ 3e-14` leftover tail, below the extrapolation noise).
const EXTERIOR_LEVELS: usize = 45;

struct OracleCtx<'a> {
    w: &'a FeFunction,
    s: f64,
    rule_x: GaussRule,
    rule_y: GaussRule,
}

impl OracleCtx<'_> {
    /// `∬_{cell} (w(x)-w(y))² |x-y|^{-1-2s} dy dx` by staggered tensor Gauss.
    fn cell(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let sx = x1 - x0;
        let sy = y1 - y0;
        let expo = -1.0 - 2.0 * self.s;
        let mut wy = [0.0f64; ORDER_Y];
        let mut ys = [0.0f64; ORDER_Y];
        for (j, &tj) in self.rule_y.nodes.iter().enumerate() {
            ys[j] = y0 + sy * tj;
            wy[j] = self.w.eval(ys[j]);
        }
        let mut total = 0.0;
        for (i, &ti) in self.rule_x.nodes.iter().enumerate() {
            let x = x0 + sx * ti;
            let wx = self.w.eval(x);
            let wxi = self.rule_x.weights[i];
            let mut row = 0.0;
            for j in 0..ORDER_Y {
                let diff = wx - wy[j];
                row += self.rule_y.weights[j] * diff * diff * (x - ys[j]).abs().powf(expo);
            }
            total += wxi * row;
        }
        total * sx * sy
    }

    /// Near-diagonal contribution (element pairs with `|e-f| ≤ 1`), refined
    /// `depth` levels toward the diagonal by quadtree subdivision.
    fn band(&self, depth: usize) -> f64 {
        let mesh = self.w.mesh();
        let (a, h, n) = (mesh.a(), mesh.h(), mesh.n_elems());
        let mut total = 0.0;
        let mut stack: Vec<(f64, f64, f64, f64, usize)> = Vec::new();
        for e in 0..n {
            let fmin = e.saturating_sub(1);
            let fmax = (e + 1).min(n - 1);
            for f in fmin..=fmax {
                stack.push((
                    a + e as f64 * h,
                    a + (e + 1) as f64 * h,
                    a + f as f64 * h,
                    a + (f + 1) as f64 * h,
                    0,
                ));
                while let Some((x0, x1, y0, y1, dep)) = stack.pop() {
                    // The diagonal meets the closed cell iff the coordinate
                    // projections overlap (corner contact included).
                    let touches = x0 <= y1 && y0 <= x1;
                    if !touches || dep >= depth {
                        total += self.cell(x0, x1, y0, y1);
                        continue;
                    }
                    let xm = 0.5 * (x0 + x1);
                    let ym = 0.5 * (y0 + y1);
                    stack.push((x0, xm, y0, ym, dep + 1));
                    stack.push((x0, xm, ym, y1, dep + 1));
                    stack.push((xm, x1, y0, ym, dep + 1));
                    stack.push((xm, x1, ym, y1, dep + 1));
                }
            }
        }
        total
    }

    /// Element pairs with `|e-f| ≥ 2`: the kernel is smooth there, one
    /// staggered Gauss cell each suffices.
    fn far(&self) -> f64 {
        let mesh = self.w.mesh();
        let (a, h, n) = (mesh.a(), mesh.h(), mesh.n_elems());
        let mut total = 0.0;
        for e in 0..n {
            for f in 0..n {
                if e.abs_diff(f) < 2 {
                    continue;
                }
                total += self.cell(
                    a + e as f64 * h,
                    a + (e + 1) as f64 * h,
                    a + f as f64 * h,
                    a + (f + 1) as f64 * h,
                );
            }
        }
        total
    }

    /// `∫ w(x)² ρ(x) dx` with the exterior interaction weight
    /// `ρ(x) = (1/2s)[(x-a)^{-2s} + (b-x)^{-2s}]`.
    fn exterior(&self) -> f64 {
        let mesh = self.w.mesh();
        let (a, b, h, n) = (mesh.a(), mesh.b(), mesh.h(), mesh.n_elems());
        let inv2s = 1.0 / (2.0 * self.s);
        let expo = -2.0 * self.s;
        let f_ext = |x: f64| {
            let v = self.w.eval(x);
            v * v * inv2s * ((x - a).powf(expo) + (b - x).powf(expo))
        };
        let mut total = 0.0;
        let mut piece = |l: f64, r: f64| {
            total += self.rule_x.integrate(l, r, f_ext);
        };
        for e in 0..n {
            if e == 0 {
                // Graded toward a: w² ~ (x-a)² keeps every piece regular.
                for k in 0..EXTERIOR_LEVELS {
                    piece(a + h / 2f64.powi(k as i32 + 1), a + h / 2f64.powi(k as i32));
                }
            } else if e == n - 1 {
                for k in 0..EXTERIOR_LEVELS {
                    piece(b - h / 2f64.powi(k as i32), b - h / 2f64.powi(k as i32 + 1));
                }
            } else {
                piece(a + e as f64 * h, a + (e + 1) as f64 * h);
            }
        }
        total
    }

    /// `∫ w²` by per-element Gauss quadrature.
    fn mass(&self) -> f64 {
        let mesh = self.w.mesh();
        let (a, h, n) = (mesh.a(), mesh.h(), mesh.n_elems());
        let mut total = 0.0;
        for e in 0..n {
            total += self.rule_x.integrate(a + e as f64 * h, a + (e + 1) as f64 * h, |x| {
                let v = self.w.eval(x);
                v * v
            });
        }
        total
    }
}

fn aitken(v0: f64, v1: f64, v2: f64) -> f64 {
    let d1 = v1 - v0;
    let d2 = v2 - v1;
    let den = d1 - d2;
    if den == 0.0 {
        v2
    } else {
        v2 + d2 * d2 / den
    }
}

/// Evaluate `‖w‖²` for an integral-form kind by direct quadrature, to a
/// relative tolerance `tol` on the singular double integral.
///
/// The double integral is extrapolated over three consecutive refinement
/// depths; refinement continues until two successive extrapolated values
/// agree to `tol/2` relative, or fails with
/// [`Error::QuadratureBudget`] once the depth budget is exhausted.
/// The spectral kind has no integral representation and is rejected.
pub fn seminorm_oracle(w: &FeFunction, kind: SpaceKind, s: f64, tol: f64) -> Result<f64> {
    let with_exterior = match kind {
        SpaceKind::IntegralTilde => true,
        SpaceKind::IntegralOmega => false,
        SpaceKind::Spectral => {
            return Err(Error::Precondition(
                "the quadrature oracle covers the integral-form kinds only; \
                 spectral norms are checked against their eigendecomposition"
                    .into(),
            ))
        }
    };
    if !(s > 0.0 && s < 1.0) || s == 0.5 {
        return Err(Error::BadOrder {
            s,
            reason: "integral-form kinds need s in (0, 1) with s != 1/2".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "oracle tolerance must be positive, got {tol}"
        )));
    }
    let ctx = OracleCtx {
        w,
        s,
        rule_x: GaussRule::legendre(ORDER_X),
        rule_y: GaussRule::legendre(ORDER_Y),
    };
    let far = ctx.far();
    // vals[k] = far + band at depth START_DEPTH - 2 + k.
    let mut vals: Vec<f64> = (START_DEPTH - 2..=START_DEPTH)
        .map(|d| far + ctx.band(d))
        .collect();
    let mut prev = aitken(vals[0], vals[1], vals[2]);
    let double = loop {
        let depth = START_DEPTH + vals.len() - 2;
        if depth > MAX_DEPTH {
            return Err(Error::QuadratureBudget(format!(
                "double integral not converged to rel. tol {tol} within depth {MAX_DEPTH}"
            )));
        }
        vals.push(far + ctx.band(depth));
        let m = vals.len();
        let cur = aitken(vals[m - 3], vals[m - 2], vals[m - 1]);
        if (cur - prev).abs() <= 0.5 * tol * cur.abs() {
            break cur;
        }
        prev = cur;
    };
    let cs = c_ds(1, s)?;
    let mut total = ctx.mass() + 0.5 * cs * double;
    if with_exterior {
        total += cs * ctx.exterior();
    }
    Ok(total)
}
