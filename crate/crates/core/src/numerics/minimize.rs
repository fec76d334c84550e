//! Bracketed scalar minimization: golden-section search with parabolic
//! acceleration (Brent), plus a Newton polish on the stationarity condition.

use crate::error::{Error, Result};
use crate::numerics::finite_diff::fd_derivatives;
use serde::Serialize;

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizeResult {
    pub x_star: f64,
    pub f_star: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub converged: bool,
}

/// Minimizes `f` on `[lo, hi]`.
///
/// For unimodal `f` the returned abscissa satisfies
/// `|x_star − argmin| ≤ tol · (1 + |x_star|)`; `tol` is floored at
/// `√ε`, below which function values cannot resolve the minimum.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<MinimizeResult> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let tol = tol.max(f64::EPSILON.sqrt());

    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for iter in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        let tol1 = 0.25 * tol * (1.0 + x.abs());
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(MinimizeResult {
                x_star: x,
                f_star: fx,
                iterations: iter,
                bracket: (lo, hi),
                converged: true,
            });
        }

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    Ok(MinimizeResult {
        x_star: x,
        f_star: fx,
        iterations: MAX_ITER,
        bracket: (lo, hi),
        converged: false,
    })
}

/// Sharpens an approximate minimizer by Newton steps on `f′ = 0`, with
/// Richardson-extrapolated central differences and a relative step `rel_h`.
/// Steps leaving `[lo, hi]` or pointing uphill in curvature are rejected and
/// the input is returned unchanged.
pub fn refine_minimum<F: Fn(f64) -> f64>(f: F, x0: f64, lo: f64, hi: f64, rel_h: f64) -> f64 {
    let mut x = x0;
    for _ in 0..8 {
        let h = rel_h * x.abs().max(f64::MIN_POSITIVE);
        let (d1, d2) = fd_derivatives(&f, x, h);
        if !(d2 > 0.0) || !d1.is_finite() {
            break;
        }
        let step = d1 / d2;
        let next = x - step;
        if !(next > lo && next < hi) {
            break;
        }
        x = next;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}
