//! Reduced normal and anomalous fluctuations of the balanced mixture.
//!
//! The closed forms are the values used downstream. Quadrature of the
//! Bogoliubov momentum sums is a diagnostic channel: in one dimension the
//! normal and anomalous integrals diverge separately in the infrared, and
//! only their sum `Ñ + M̃` is cutoff independent.

use crate::bogoliubov::branch_gap;
use crate::error::{Error, Result};
use crate::model::{gamma_1d, BranchLabel, FluctuationSet, SymmetricParams};
use crate::numerics::quadrature::{integrate_semi_infinite, QuadratureSettings, UpperLimit};
use serde::{Deserialize, Serialize};

/// Closed-form coefficient of Ñ: `(1 − asinh(1)/√2)/(2π)`.
pub fn a_n() -> f64 {
    (1.0 - 1f64.asinh() / std::f64::consts::SQRT_2) / (2.0 * std::f64::consts::PI)
}

/// Closed-form coefficient of −M̃: `√2/8`.
pub fn a_m() -> f64 {
    std::f64::consts::SQRT_2 / 8.0
}

/// LHY coefficient `2(a_M − a_N)` in `γ = coeff·√(m/ħ²)`.
pub fn lhy_coefficient_exact() -> f64 {
    2.0 * (a_m() - a_n())
}

/// The rounded LHY coefficient quoted for figure reproduction.
pub const LHY_COEFFICIENT_ROUNDED: f64 = 0.234;

fn branch_root(branch: BranchLabel, lambda: f64) -> Result<f64> {
    let radicand = branch.radicand(lambda);
    if radicand < 0.0 || radicand.is_nan() {
        return Err(Error::BranchDomain { branch, radicand });
    }
    Ok(radicand.sqrt())
}

/// `(Ñ, M̃) = (a_N, −a_M)·γ1D·√(1∓λ)`, minus branch with `1 − λ`.
pub fn closed_form_intraspecies(branch: BranchLabel, lambda: f64, gamma1d: f64) -> Result<(f64, f64)> {
    let root = branch_root(branch, lambda)?;
    Ok(closed_form_with_root(root, gamma1d))
}

fn closed_form_with_root(root: f64, gamma1d: f64) -> (f64, f64) {
    (a_n() * gamma1d * root, -a_m() * gamma1d * root)
}

/// Interspecies closure: `(Ñ12, M̃12) = ∓(Ñ, M̃)` on the minus/plus branch.
pub fn branch_closure(branch: BranchLabel, nt: f64, mt: f64) -> FluctuationSet {
    let s = branch.closure_sign();
    FluctuationSet::symmetric(nt, mt, s * nt, s * mt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluctuationMode {
    #[default]
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationQuadratureSettings {
    /// `k_min` is absolute; a mapped upper limit's `scale` is relative to
    /// the healing wavenumber `√(4 m g n_c)/ħ`.
    pub quad: QuadratureSettings,
    /// Temperature in energy units (`k_B = 1`). Nonzero values use the Bose
    /// factor in the integrands; that path is not validated.
    pub temperature: f64,
    pub mode: FluctuationMode,
}

impl Default for FluctuationQuadratureSettings {
    fn default() -> Self {
        Self {
            quad: QuadratureSettings::default(),
            temperature: 0.0,
            mode: FluctuationMode::ClosedForm,
        }
    }
}

impl FluctuationQuadratureSettings {
    fn check(&self) -> Result<()> {
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidSettings(format!(
                "temperature must be finite and >= 0, got {}",
                self.temperature
            )));
        }
        self.quad.check()
    }

    fn resolved(&self, sym: &SymmetricParams, k_min: f64) -> QuadratureSettings {
        let k_max = match self.quad.k_max {
            UpperLimit::MappedInfinity { scale } => UpperLimit::MappedInfinity {
                scale: scale * sym.healing_wavenumber(),
            },
            fixed => fixed,
        };
        QuadratureSettings {
            k_min,
            k_max,
            ..self.quad
        }
    }
}

/// Measured infrared sensitivity: `[value at k_min, value at 2·k_min]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrDiagnostics {
    pub k_min: f64,
    pub nt_sensitivity: [f64; 2],
    pub mt_sensitivity: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureFluctuations {
    pub nt: f64,
    pub mt: f64,
    /// Cutoff-free `Ñ + M̃`, integrated from `k = 0`.
    pub sum_ir_safe: f64,
    pub sum_ir_safe_error: f64,
    pub diagnostics: IrDiagnostics,
    /// True when a finite temperature was used.
    pub unvalidated: bool,
}

/// Bogoliubov integrands of one balanced branch at given ε and gap c̃.
#[derive(Debug, Clone, Copy)]
struct Integrands {
    gap: f64,
    /// `g n_c / T`, or infinity at zero temperature.
    beta_unit: f64,
}

impl Integrands {
    fn bose(&self, omega: f64) -> f64 {
        if self.beta_unit.is_infinite() {
            0.0
        } else {
            1.0 / (self.beta_unit * omega).exp_m1()
        }
    }

    fn omega(&self, eps: f64) -> f64 {
        (eps * (eps + 2.0 * self.gap)).sqrt()
    }

    /// `v² + f(u² + v²)`.
    fn normal(&self, eps: f64) -> f64 {
        let w = self.omega(eps);
        let v2 = self.gap * self.gap / (2.0 * w * (eps + self.gap + w));
        let f = self.bose(w);
        if f == 0.0 {
            v2
        } else {
            v2 + f * (eps + self.gap) / w
        }
    }

    /// `−(1 + 2f)·uv`.
    fn anomalous(&self, eps: f64) -> f64 {
        let w = self.omega(eps);
        -(1.0 + 2.0 * self.bose(w)) * self.gap / (2.0 * w)
    }

    /// `(v² − uv) + f(u − v)²`, finite at ε = 0.
    fn ir_safe(&self, eps: f64) -> f64 {
        let c = self.gap;
        let s = (eps + 2.0 * c).sqrt();
        let base = -c / (s * (eps.sqrt() + s));
        let f = self.bose(self.omega(eps));
        if f == 0.0 {
            base
        } else {
            base + f * eps / self.omega(eps)
        }
    }
}

fn integrands(sym: &SymmetricParams, branch: BranchLabel, f12: f64, temperature: f64) -> Result<Integrands> {
    let gap = branch_gap(branch, sym.lambda, f12);
    if gap < 0.0 || gap.is_nan() {
        return Err(Error::BranchDomain { branch, radicand: gap });
    }
    let beta_unit = if temperature == 0.0 {
        f64::INFINITY
    } else {
        sym.energy_unit() / temperature
    };
    Ok(Integrands { gap, beta_unit })
}

fn check_sym(sym: &SymmetricParams) -> Result<()> {
    for (name, v) in [("m", sym.m), ("g", sym.g), ("nc", sym.nc), ("hbar", sym.hbar)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("quadrature needs {name} > 0, got {v}")));
        }
    }
    Ok(())
}

/// `(1/(π n_c))∫[(v² − uv) + f ε/ω̃] dk` from `settings.quad.k_min`; returns
/// the value and its error bound.
pub fn ir_safe_sum(
    sym: &SymmetricParams,
    branch: BranchLabel,
    f12: f64,
    settings: &FluctuationQuadratureSettings,
) -> Result<(f64, f64)> {
    settings.check()?;
    check_sym(sym)?;
    let it = integrands(sym, branch, f12, settings.temperature)?;
    let pref = 1.0 / (std::f64::consts::PI * sym.nc);
    let q = settings.resolved(sym, settings.quad.k_min);
    let r = integrate_semi_infinite(|k| pref * it.ir_safe(sym.eps(k)), &q)?;
    Ok((r.value, r.abs_error))
}

/// Closed form of [`ir_safe_sum`] at zero temperature and `k_min = 0`:
/// `−√(m g/(ħ² n_c))·√c̃/π`.
pub fn ir_safe_sum_exact(sym: &SymmetricParams, gap: f64) -> f64 {
    -(sym.m * sym.g / (sym.hbar * sym.hbar * sym.nc)).sqrt() * gap.sqrt() / std::f64::consts::PI
}

/// Reduced fluctuations from the momentum sums
/// `Ñ = (1/(π n_c))∫_{k_min}^∞ [v² + f(u²+v²)] dk`,
/// `M̃ = −(1/(π n_c))∫_{k_min}^∞ (1+2f)uv dk`,
/// plus the cutoff-free sum and the measured cutoff sensitivity.
pub fn quadrature_intraspecies(
    sym: &SymmetricParams,
    branch: BranchLabel,
    f12: f64,
    settings: &FluctuationQuadratureSettings,
) -> Result<QuadratureFluctuations> {
    settings.check()?;
    check_sym(sym)?;
    let k_min = settings.quad.k_min;
    if !(k_min > 0.0) {
        return Err(Error::MissingInfraredCutoff);
    }
    let it = integrands(sym, branch, f12, settings.temperature)?;
    let pref = 1.0 / (std::f64::consts::PI * sym.nc);
    let pair = |kmin: f64| -> Result<(f64, f64)> {
        let q = settings.resolved(sym, kmin);
        let nt = integrate_semi_infinite(|k| pref * it.normal(sym.eps(k)), &q)?;
        let mt = integrate_semi_infinite(|k| pref * it.anomalous(sym.eps(k)), &q)?;
        Ok((nt.value, mt.value))
    };
    let (nt, mt) = pair(k_min)?;
    let (nt2, mt2) = pair(2.0 * k_min)?;
    let safe = FluctuationQuadratureSettings {
        quad: QuadratureSettings {
            k_min: 0.0,
            ..settings.quad
        },
        ..*settings
    };
    let (sum, err) = ir_safe_sum(sym, branch, f12, &safe)?;
    Ok(QuadratureFluctuations {
        nt,
        mt,
        sum_ir_safe: sum,
        sum_ir_safe_error: err,
        diagnostics: IrDiagnostics {
            k_min,
            nt_sensitivity: [nt, nt2],
            mt_sensitivity: [mt, mt2],
        },
        unvalidated: settings.temperature > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfConsistencySettings {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SelfConsistencySettings {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl SelfConsistencySettings {
    fn check(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidSettings(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidSettings(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidSettings("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfConsistentResult {
    pub fluctuations: FluctuationSet,
    pub iterations: usize,
    pub residual: f64,
}

/// Feeds `Ñ12 + M̃12` back into the soft-branch gap until the closed forms
/// and the branch closure agree with the gap they were computed from.
pub fn self_consistent_loop(
    sym: &SymmetricParams,
    branch: BranchLabel,
    settings: &SelfConsistencySettings,
) -> Result<SelfConsistentResult> {
    let gamma = gamma_1d(sym)?.value;
    self_consistent_with_gamma(sym.lambda, gamma, branch, settings)
}

/// [`self_consistent_loop`] with γ1D given directly.
pub fn self_consistent_with_gamma(
    lambda: f64,
    gamma1d: f64,
    branch: BranchLabel,
    settings: &SelfConsistencySettings,
) -> Result<SelfConsistentResult> {
    settings.check()?;
    if !(gamma1d >= 0.0) || !gamma1d.is_finite() {
        return Err(Error::Domain(format!("gamma1d must be finite and >= 0, got {gamma1d}")));
    }
    let mut current = FluctuationSet::zero();
    let mut residual = f64::INFINITY;
    for iteration in 1..=settings.max_iter {
        let gap = branch_gap(branch, lambda, current.f12());
        if gap < 0.0 || gap.is_nan() {
            return Err(Error::UnstableIteration {
                iteration,
                gap,
                last_stable: current,
            });
        }
        let (nt, mt) = closed_form_with_root(gap.sqrt(), gamma1d);
        let target = branch_closure(branch, nt, mt).as_array();
        let old = current.as_array();
        let d = settings.damping;
        let next = FluctuationSet::from_array([0, 1, 2, 3, 4, 5].map(|i| (1.0 - d) * old[i] + d * target[i]));
        residual = next.max_abs_diff(&current);
        current = next;
        if residual < settings.tol {
            return Ok(SelfConsistentResult {
                fluctuations: current,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(Error::MaxIterations {
        max_iter: settings.max_iter,
        residual,
        last: current,
    })
}

/// Fluctuation report in the published JSON layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluctuationReport {
    pub branch: BranchLabel,
    pub gamma1d: f64,
    pub nt: f64,
    pub mt: f64,
    pub nt12: f64,
    pub mt12: f64,
    /// `Ñ + M̃`: closed form, or the cutoff-free quadrature sum.
    pub lhy_sum: f64,
    pub method: FluctuationMode,
    pub ir_diagnostics: Option<IrDiagnostics>,
}

/// Intraspecies fluctuations of `sym` on `branch` with the closure applied.
///
/// In quadrature mode the integrals use the bare branch gap (`f12 = 0`),
/// the same order at which the closed forms are stated.
pub fn fluctuation_report(
    sym: &SymmetricParams,
    branch: BranchLabel,
    settings: &FluctuationQuadratureSettings,
) -> Result<FluctuationReport> {
    let gamma = gamma_1d(sym)?.value;
    let (nt, mt, lhy_sum, diag) = match settings.mode {
        FluctuationMode::ClosedForm => {
            let (nt, mt) = closed_form_intraspecies(branch, sym.lambda, gamma)?;
            (nt, mt, nt + mt, None)
        }
        FluctuationMode::Quadrature => {
            let q = quadrature_intraspecies(sym, branch, 0.0, settings)?;
            (q.nt, q.mt, q.sum_ir_safe, Some(q.diagnostics))
        }
    };
    let set = branch_closure(branch, nt, mt);
    Ok(FluctuationReport {
        branch,
        gamma1d: gamma,
        nt,
        mt,
        nt12: set.nt12,
        mt12: set.mt12,
        lhy_sum,
        method: settings.mode,
        ir_diagnostics: diag,
    })
}
