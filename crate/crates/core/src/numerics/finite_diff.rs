//! Central finite differences with one level of Richardson extrapolation.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdResult {
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
}

/// Default step `1e-4 · (1 + |x|)`.
pub fn default_step(x: f64) -> f64 {
    1e-4 * (1.0 + x.abs())
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Second differences use this multiple of the gradient step; at
/// `1e-4` their roundoff (`ε·|f|/h²`) would exceed `1e-8`.
pub const HESSIAN_STEP_FACTOR: f64 = 20.0;

/// Gradient and Hessian of `f: ℝ² → ℝ` at `x`. `h` is the gradient step per
/// coordinate (`None` uses [`default_step`]); the Hessian uses
/// `HESSIAN_STEP_FACTOR · h`.
pub fn fd_gradient_hessian<F: Fn([f64; 2]) -> f64>(f: F, x: [f64; 2], h: Option<[f64; 2]>) -> FdResult {
    let h = h.unwrap_or([default_step(x[0]), default_step(x[1])]);
    let hh = [HESSIAN_STEP_FACTOR * h[0], HESSIAN_STEP_FACTOR * h[1]];
    let at = |dx: f64, dy: f64| f([x[0] + dx, x[1] + dy]);
    let f0 = at(0.0, 0.0);

    let first = |i: usize, s: f64| {
        let (dx, dy) = if i == 0 { (s, 0.0) } else { (0.0, s) };
        (at(dx, dy) - at(-dx, -dy)) / (2.0 * s)
    };
    let second = |i: usize, s: f64| {
        let (dx, dy) = if i == 0 { (s, 0.0) } else { (0.0, s) };
        (at(dx, dy) - 2.0 * f0 + at(-dx, -dy)) / (s * s)
    };
    let mixed = |sx: f64, sy: f64| (at(sx, sy) - at(sx, -sy) - at(-sx, sy) + at(-sx, -sy)) / (4.0 * sx * sy);

    let gradient = [
        richardson(first(0, h[0]), first(0, 0.5 * h[0])),
        richardson(first(1, h[1]), first(1, 0.5 * h[1])),
    ];
    let hxx = richardson(second(0, hh[0]), second(0, 0.5 * hh[0]));
    let hyy = richardson(second(1, hh[1]), second(1, 0.5 * hh[1]));
    let hxy = richardson(mixed(hh[0], hh[1]), mixed(0.5 * hh[0], 0.5 * hh[1]));
    FdResult {
        gradient,
        hessian: [[hxx, hxy], [hxy, hyy]],
    }
}

/// First and second derivative of a scalar function at `x` with step `h`.
pub fn fd_derivatives<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> (f64, f64) {
    let f0 = f(x);
    let d1 = |s: f64| (f(x + s) - f(x - s)) / (2.0 * s);
    let d2 = |s: f64| (f(x + s) - 2.0 * f0 + f(x - s)) / (s * s);
    (richardson(d1(h), d1(0.5 * h)), richardson(d2(h), d2(0.5 * h)))
}
