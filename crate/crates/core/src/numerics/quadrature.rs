//! Adaptive Gauss-Kronrod (7/15) quadrature on `[k_min, k_max]` or
//! `[k_min, ∞)`.
//!
//! The semi-infinite case is mapped onto `t ∈ [0, 1)` through
//! `k = k_min + k0 · t / (1 − t)`, where `k0` is the characteristic scale of
//! the integrand supplied by the caller. The Kronrod nodes are interior, so
//! the endpoint `t = 1` is never evaluated.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Upper integration limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperLimit {
    Finite(f64),
    /// `[k_min, ∞)` through the rational map with scale `k0`.
    MappedInfinity {
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Infrared cutoff.
    pub k_min: f64,
    pub k_max: UpperLimit,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            k_min: 0.0,
            k_max: UpperLimit::MappedInfinity { scale: 1.0 },
        }
    }
}

impl QuadratureSettings {
    pub fn with_scale(scale: f64) -> Self {
        Self {
            k_max: UpperLimit::MappedInfinity { scale },
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidSettings("quadrature tolerances must be positive".into()));
        }
        if !(self.k_min >= 0.0) || !self.k_min.is_finite() {
            return Err(Error::InvalidSettings(format!(
                "k_min must be >= 0, got {}",
                self.k_min
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidSettings("max_subdivisions must be positive".into()));
        }
        match self.k_max {
            UpperLimit::Finite(k) if !(k > self.k_min) || !k.is_finite() => Err(Error::InvalidSettings(format!(
                "k_max = {k} must exceed k_min = {}",
                self.k_min
            ))),
            UpperLimit::MappedInfinity { scale } if !(scale > 0.0) || !scale.is_finite() => Err(
                Error::InvalidSettings(format!("map scale must be positive, got {scale}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod evaluation with the QUADPACK error heuristic.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, s: &QuadratureSettings) -> Result<QuadratureResult> {
    let (v0, e0) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v0,
        error: e0,
    });
    let mut total = v0;
    let mut total_err = e0;
    let mut evaluations = 15;
    let mut subdivisions = 1;

    loop {
        let target = s.abs_tol.max(s.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if subdivisions >= s.max_subdivisions {
            return Err(Error::QuadratureNotConverged {
                estimate: total,
                error_bound: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("non-empty segment heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Segment collapsed to adjacent floats; nothing left to refine.
            return Err(Error::QuadratureNotConverged {
                estimate: total,
                error_bound: total_err,
                subdivisions,
            });
        }
        let (vl, el) = gk15(f, worst.a, mid);
        let (vr, er) = gk15(f, mid, worst.b);
        evaluations += 30;
        subdivisions += 1;
        total += vl + vr - worst.value;
        total_err += el + er - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: vl,
            error: el,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: vr,
            error: er,
        });
    }

    // Re-sum to shed the drift of the running updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let abs_error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadratureResult {
        value,
        abs_error,
        evaluations,
        subdivisions,
    })
}

/// Integrates `f` over `[k_min, k_max]`, or over `[k_min, ∞)` via the
/// rational map when `k_max` is [`UpperLimit::MappedInfinity`].
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, settings: &QuadratureSettings) -> Result<QuadratureResult> {
    settings.check()?;
    let k_min = settings.k_min;
    match settings.k_max {
        UpperLimit::Finite(k_max) => adaptive(&f, k_min, k_max, settings),
        UpperLimit::MappedInfinity { scale } => {
            let mapped = |t: f64| {
                let one_minus = 1.0 - t;
                let k = k_min + scale * t / one_minus;
                let jac = scale / (one_minus * one_minus);
                let v = f(k) * jac;
                // f decays at least like 1/k², so the mapped integrand is bounded
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            adaptive(&mapped, 0.0, 1.0, settings)
        }
    }
}
