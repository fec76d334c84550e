//! Energy density, chemical potentials and the Hessian stability test.
//!
//! Derivatives with respect to the condensate densities are taken with the
//! unreduced fluctuations `ñ_ij = Ñ_ij·√(n_ci n_cj)` (and likewise `m̃_ij`)
//! held fixed and with `n_i − n_ci` held fixed. Under this convention the
//! gradient of the energy density is `(μ1, μ2)` and its Hessian is
//! `[[G1, G12], [G12, G2]]`.

use crate::error::{Error, Result};
use crate::model::{ensure_valid, FluctuationSet, MixtureParams};
use crate::numerics::finite_diff::{fd_gradient_hessian, FdResult};
use serde::Serialize;
use std::fmt;

/// Trace or determinant within this fraction of its scale counts as zero.
pub const MARGINAL_REL_TOL: f64 = 1e-12;

/// Finite-difference Hessian deviating more than this is a formula bug.
pub const FD_CONSISTENCY_LIMIT: f64 = 1e-4;

fn fluct_term(nt: f64, mt: f64) -> f64 {
    2.0 * (nt + mt) + nt * nt + mt * mt
}

fn energy_raw(p: &MixtureParams, fl: &FluctuationSet) -> f64 {
    0.5 * p.g11 * p.n1 * p.n1
        + 0.5 * p.g22 * p.n2 * p.n2
        + p.g12 * p.n1 * p.n2
        + 0.5 * p.g11 * p.nc1 * p.nc1 * fluct_term(fl.nt11, fl.mt11)
        + 0.5 * p.g22 * p.nc2 * p.nc2 * fluct_term(fl.nt22, fl.mt22)
        + p.g12 * p.nc1 * p.nc2 * fluct_term(fl.nt12, fl.mt12)
}

/// Energy per unit length including the normal and anomalous fluctuation
/// contributions of both species and of the interspecies channel.
pub fn energy_density(params: &MixtureParams, fl: &FluctuationSet) -> Result<f64> {
    ensure_valid(params)?;
    Ok(energy_raw(params, fl))
}

/// `μ1 = g11 n1 + g12 n2 + g11 nc1 (Ñ11+M̃11) + g12 nc2 (Ñ12+M̃12)` and its mirror.
pub fn chemical_potentials(params: &MixtureParams, fl: &FluctuationSet) -> Result<(f64, f64)> {
    ensure_valid(params)?;
    let p = params;
    let f12 = fl.f12();
    let mu1 = p.g11 * p.n1 + p.g12 * p.n2 + p.g11 * p.nc1 * (fl.nt11 + fl.mt11) + p.g12 * p.nc2 * f12;
    let mu2 = p.g22 * p.n2 + p.g12 * p.n1 + p.g22 * p.nc2 * (fl.nt22 + fl.mt22) + p.g12 * p.nc1 * f12;
    Ok((mu1, mu2))
}

/// `(G1, G2, G12)` with `G1 = g11 − g12 (f12/2)(nc2/nc1)`, `G12 = g12 (1 + f12/2)`.
pub fn generalized_couplings(params: &MixtureParams, fl: &FluctuationSet) -> Result<(f64, f64, f64)> {
    ensure_valid(params)?;
    let p = params;
    let half = 0.5 * fl.f12();
    Ok((
        p.g11 - p.g12 * half * p.nc2 / p.nc1,
        p.g22 - p.g12 * half * p.nc1 / p.nc2,
        p.g12 * (1.0 + half),
    ))
}

/// The energy density as a function of `(nc1, nc2)` under the
/// differentiation convention described in the module docs.
pub fn energy_at_condensates(params: &MixtureParams, fl: &FluctuationSet) -> impl Fn([f64; 2]) -> f64 {
    let base = *params;
    let root = (base.nc1 * base.nc2).sqrt();
    let unreduced = [
        fl.nt11 * base.nc1,
        fl.nt22 * base.nc2,
        fl.nt12 * root,
        fl.mt11 * base.nc1,
        fl.mt22 * base.nc2,
        fl.mt12 * root,
    ];
    move |x: [f64; 2]| {
        let p = MixtureParams {
            n1: base.n1 + (x[0] - base.nc1),
            n2: base.n2 + (x[1] - base.nc2),
            nc1: x[0],
            nc2: x[1],
            ..base
        };
        let r = (x[0] * x[1]).sqrt();
        let reduced = FluctuationSet::from_array([
            unreduced[0] / x[0],
            unreduced[1] / x[1],
            unreduced[2] / r,
            unreduced[3] / x[0],
            unreduced[4] / x[1],
            unreduced[5] / r,
        ]);
        energy_raw(&p, &reduced)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    /// Unstable against collapse only (Tr A ≤ 0).
    Collapse,
    /// Unstable against phase separation only (Det A ≤ 0).
    Separation,
    Both,
    /// Tr A or Det A numerically zero.
    Marginal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Collapse => "collapse",
            Verdict::Separation => "separation",
            Verdict::Both => "both",
            Verdict::Marginal => "marginal",
        }
    }

    /// Verdict of the 2×2 Hessian `[[g1, g12], [g12, g2]]`.
    pub fn classify(g1: f64, g2: f64, g12: f64) -> Verdict {
        let trace = g1 + g2;
        let det = g1 * g2 - g12 * g12;
        let scale = g1.abs().max(g2.abs()).max(g12.abs());
        if trace.abs() <= MARGINAL_REL_TOL * scale || det.abs() <= MARGINAL_REL_TOL * scale * scale {
            return Verdict::Marginal;
        }
        match (trace > 0.0, det > 0.0) {
            (true, true) => Verdict::Stable,
            (false, true) => Verdict::Collapse,
            (true, false) => Verdict::Separation,
            (false, false) => Verdict::Both,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Finite-difference cross-check attached to a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdCheck {
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
    pub mu: [f64; 2],
    pub gradient_rel_dev: f64,
    pub hessian_rel_dev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub g1_eff: f64,
    pub g2_eff: f64,
    pub g12_eff: f64,
    pub trace_a: f64,
    pub det_a: f64,
    /// Tr A > 0.
    pub stable_collapse: bool,
    /// Det A > 0.
    pub stable_separation: bool,
    pub verdict: Verdict,
    pub fluctuation_input: FluctuationSet,
    pub hessian_fd: Option<FdCheck>,
}

impl StabilityReport {
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        [[self.g1_eff, self.g12_eff], [self.g12_eff, self.g2_eff]]
    }
}

/// Largest absolute deviation divided by the largest reference magnitude.
pub fn rel_deviation(reference: &[f64], other: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dev = reference
        .iter()
        .zip(other)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        dev
    } else {
        dev / scale
    }
}

/// Gradient and Hessian of [`energy_at_condensates`] by finite differences.
pub fn fd_thermodynamics(params: &MixtureParams, fl: &FluctuationSet) -> Result<FdResult> {
    ensure_valid(params)?;
    let f = energy_at_condensates(params, fl);
    let h = [1e-4 * params.nc1, 1e-4 * params.nc2];
    Ok(fd_gradient_hessian(f, [params.nc1, params.nc2], Some(h)))
}

/// Stability against collapse (`Tr A > 0`) and phase separation
/// (`Det A > 0`) of the Hessian `A = [[G1, G12], [G12, G2]]`.
///
/// With `with_fd_check` the finite-difference derivatives of the energy
/// density are attached; a Hessian deviation above [`FD_CONSISTENCY_LIMIT`]
/// is reported as an error.
pub fn stability_check(params: &MixtureParams, fl: &FluctuationSet, with_fd_check: bool) -> Result<StabilityReport> {
    if !fl.is_finite() {
        return Err(Error::Domain("fluctuations must be finite".into()));
    }
    let (g1, g2, g12) = generalized_couplings(params, fl)?;
    let trace_a = g1 + g2;
    let det_a = g1 * g2 - g12 * g12;
    let hessian_fd = if with_fd_check {
        let fd = fd_thermodynamics(params, fl)?;
        let (mu1, mu2) = chemical_potentials(params, fl)?;
        let h = fd.hessian;
        let hessian_rel_dev = rel_deviation(&[g1, g12, g12, g2], &[h[0][0], h[0][1], h[1][0], h[1][1]]);
        if !(hessian_rel_dev <= FD_CONSISTENCY_LIMIT) {
            return Err(Error::InconsistentHessian {
                rel_dev: hessian_rel_dev,
            });
        }
        Some(FdCheck {
            gradient: fd.gradient,
            hessian: h,
            mu: [mu1, mu2],
            gradient_rel_dev: rel_deviation(&[mu1, mu2], &fd.gradient),
            hessian_rel_dev,
        })
    } else {
        None
    };
    Ok(StabilityReport {
        g1_eff: g1,
        g2_eff: g2,
        g12_eff: g12,
        trace_a,
        det_a,
        stable_collapse: trace_a > 0.0,
        stable_separation: det_a > 0.0,
        verdict: Verdict::classify(g1, g2, g12),
        fluctuation_input: *fl,
        hessian_fd,
    })
}
