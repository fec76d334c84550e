//! Energy landscapes of the balanced mixture near the collapse line
//! `1 + λ = δg/g ≪ 1`, with and without interspecies correlations, and the
//! resulting self-bound (droplet) equilibria.

use crate::error::{Error, Result};
use crate::fluctuations::{a_m, a_n, lhy_coefficient_exact, LHY_COEFFICIENT_ROUNDED};
use crate::model::BranchLabel;
use crate::numerics::minimize::{minimize_scalar, refine_minimum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropletForm {
    /// Complete energy with closed-form fluctuations at γ1D(n).
    Full,
    /// Leading order in δg/g: `E = δg n² − A n^{3/2}`.
    #[default]
    Asymptotic,
    /// Leading order with the first δg/g correction to the minus-branch `A`.
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhyCoefficient {
    #[default]
    Exact,
    PaperRounded,
}

impl LhyCoefficient {
    pub fn value(self) -> f64 {
        match self {
            LhyCoefficient::Exact => lhy_coefficient_exact(),
            LhyCoefficient::PaperRounded => LHY_COEFFICIENT_ROUNDED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropletConfig {
    pub m: f64,
    pub hbar: f64,
    pub g: f64,
    /// `δg = g12 + g`, so that `1 + λ = δg/g`.
    pub dg: f64,
    pub branch: BranchLabel,
    pub correlated: bool,
    pub form: DropletForm,
    /// Only the asymptotic forms use the rounded coefficient; the full form
    /// always evaluates the exact closed-form fluctuations.
    pub lhy_coeff_mode: LhyCoefficient,
}

impl DropletConfig {
    /// Unit mass and ħ, correlated, leading-order form, exact coefficient.
    pub fn new(g: f64, dg: f64, branch: BranchLabel) -> Self {
        Self {
            m: 1.0,
            hbar: 1.0,
            g,
            dg,
            branch,
            correlated: true,
            form: DropletForm::Asymptotic,
            lhy_coeff_mode: LhyCoefficient::Exact,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.dg / self.g - 1.0
    }

    /// `γ = coeff·√(m/ħ²)`.
    pub fn gamma(&self) -> f64 {
        self.lhy_coeff_mode.value() * self.m.sqrt() / self.hbar
    }

    pub fn with_correlated(self, correlated: bool) -> Self {
        Self { correlated, ..self }
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("hbar", self.hbar), ("g", self.g)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("droplet needs {name} > 0, got {v}")));
            }
        }
        if !self.dg.is_finite() {
            return Err(Error::Domain(format!("dg must be finite, got {}", self.dg)));
        }
        match self.form {
            DropletForm::Full => {
                let radicand = self.branch.radicand(self.lambda());
                if radicand < 0.0 {
                    return Err(Error::BranchDomain {
                        branch: self.branch,
                        radicand,
                    });
                }
            }
            DropletForm::Asymptotic | DropletForm::FirstOrder => {
                if self.dg < 0.0 {
                    return Err(Error::Domain(format!("asymptotic forms need dg >= 0, got {}", self.dg)));
                }
            }
        }
        Ok(())
    }

    /// Human-readable cautions about the validity of the chosen form.
    pub fn warnings(&self) -> Vec<String> {
        let ratio = self.dg / self.g;
        let mut out = Vec::new();
        if self.form != DropletForm::Full && ratio > 0.1 {
            out.push(format!("dg/g = {ratio} is not small; asymptotic form is unreliable"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            out.push(format!("dg/g = {ratio} lies outside the droplet regime (0, 1)"));
        }
        out
    }

    /// `A` in `E = δg n² − A n^{3/2}`; `None` for the full form.
    pub fn lhy_prefactor(&self) -> Option<f64> {
        let gamma = self.gamma();
        let (g, dg) = (self.g, self.dg);
        let first = self.form == DropletForm::FirstOrder;
        let a = match (self.branch, self.correlated) {
            (_, _) if self.form == DropletForm::Full => return None,
            (BranchLabel::Plus, true) => gamma * dg.powf(1.5),
            (BranchLabel::Plus, false) => gamma * g * dg.sqrt(),
            (BranchLabel::Minus, true) => {
                let corr = if first { 1.0 - 0.75 * dg / g } else { 1.0 };
                8f64.sqrt() * corr * gamma * g.powf(1.5)
            }
            (BranchLabel::Minus, false) => {
                let corr = if first { 1.0 - 0.25 * dg / g } else { 1.0 };
                2f64.sqrt() * corr * gamma * g.powf(1.5)
            }
        };
        Some(a)
    }

    fn eval(&self, n: f64) -> f64 {
        match self.form {
            DropletForm::Full => full_terms(n, self).total(),
            _ => {
                let a = self.lhy_prefactor().expect("asymptotic form");
                self.dg * n * n - a * n.powf(1.5)
            }
        }
    }
}

/// Decomposition of the full energy density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTerms {
    /// `(1+λ) g n²`.
    pub mean_field: f64,
    /// Linear fluctuation term.
    pub lhy: f64,
    /// Quadratic fluctuation term.
    pub quadratic: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.mean_field + self.lhy + self.quadratic
    }
}

fn full_terms(n: f64, cfg: &DropletConfig) -> EnergyTerms {
    let lambda = cfg.lambda();
    let root = cfg.branch.radicand(lambda).sqrt();
    let gamma1d = (cfg.m * cfg.g / (cfg.hbar * cfg.hbar * n)).sqrt();
    let nt = a_n() * gamma1d * root;
    let mt = -a_m() * gamma1d * root;
    let gn2 = cfg.g * n * n;
    let (lin, quad) = if cfg.correlated {
        (2.0 * cfg.branch.radicand(lambda), 1.0 + lambda)
    } else {
        (2.0, 1.0)
    };
    EnergyTerms {
        mean_field: gn2 * (1.0 + lambda),
        lhy: gn2 * (lin * (nt + mt)),
        quadratic: gn2 * (quad * (nt * nt + mt * mt)),
    }
}

fn check_density(n: f64) -> Result<()> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Domain(format!("density must be positive, got {n}")));
    }
    Ok(())
}

/// Terms of the full energy density `E(n)`.
///
/// Correlated: `g n²[1+λ + 2(1∓λ)(Ñ+M̃) + (1+λ)(Ñ²+M̃²)]`;
/// uncorrelated: `g n²[1+λ + 2(Ñ+M̃) + Ñ²+M̃²]`, where Ñ and M̃ carry
/// `γ1D(n)·√(1∓λ)` in both cases.
pub fn energy_terms(n: f64, cfg: &DropletConfig) -> Result<EnergyTerms> {
    check_density(n)?;
    let cfg = DropletConfig {
        form: DropletForm::Full,
        ..*cfg
    };
    cfg.check()?;
    Ok(full_terms(n, &cfg))
}

pub fn energy_full(n: f64, cfg: &DropletConfig) -> Result<f64> {
    energy_terms(n, cfg).map(|t| t.total())
}

/// `δg n² − A n^{3/2}` with the branch and correlation dependent `A`.
/// A `Full` form in `cfg` is evaluated at leading order.
pub fn energy_asymptotic(n: f64, cfg: &DropletConfig) -> Result<f64> {
    check_density(n)?;
    let cfg = match cfg.form {
        DropletForm::Full => DropletConfig {
            form: DropletForm::Asymptotic,
            ..*cfg
        },
        _ => *cfg,
    };
    cfg.check()?;
    Ok(cfg.eval(n))
}

/// Energy of the form selected in `cfg`.
pub fn energy(n: f64, cfg: &DropletConfig) -> Result<f64> {
    check_density(n)?;
    cfg.check()?;
    Ok(cfg.eval(n))
}

/// Stationary point of `δg n² − A n^{3/2}`: `n* = 9A²/(16δg²)`,
/// `E* = −δg n*²/3`. `None` for the full form or `δg ≤ 0`.
pub fn closed_form_minimum(cfg: &DropletConfig) -> Option<(f64, f64)> {
    let a = cfg.lhy_prefactor()?;
    if !(cfg.dg > 0.0) || !(a > 0.0) {
        return None;
    }
    let n = 9.0 * a * a / (16.0 * cfg.dg * cfg.dg);
    Some((n, -cfg.dg * n * n / 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormComparison {
    pub n_star: f64,
    pub e_star: f64,
    pub rel_dev_n: f64,
    pub rel_dev_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Equilibrium {
    Minimum {
        n_star: f64,
        e_star: f64,
        iterations: usize,
        closed_form: Option<ClosedFormComparison>,
    },
    /// The energy decreases towards a bracket edge: no self-bound state there.
    NoDroplet { bracket: (f64, f64), edge: f64 },
}

impl Equilibrium {
    pub fn minimum(&self) -> Option<(f64, f64)> {
        match *self {
            Equilibrium::Minimum { n_star, e_star, .. } => Some((n_star, e_star)),
            Equilibrium::NoDroplet { .. } => None,
        }
    }
}

/// Density range searched when no closed-form estimate exists.
const FALLBACK_BRACKET: (f64, f64) = (1e-8, 1e8);

/// Bracket `[1e−3, 10]·n_cf` around the closed-form estimate of the
/// leading-order (for the full form: first-order) energy.
pub fn default_bracket(cfg: &DropletConfig) -> (f64, f64) {
    let estimate = match cfg.form {
        DropletForm::Full => closed_form_minimum(&DropletConfig {
            form: DropletForm::FirstOrder,
            ..*cfg
        }),
        _ => closed_form_minimum(cfg),
    };
    match estimate {
        Some((n, _)) => (1e-3 * n, 10.0 * n),
        None => FALLBACK_BRACKET,
    }
}

/// Minimizes the configured energy form over `n`.
///
/// The search runs in `ln n` (Brent) and is polished by Newton steps on
/// `E′(n) = 0`. A minimum pinned to the bracket edge yields
/// [`Equilibrium::NoDroplet`].
pub fn equilibrium(cfg: &DropletConfig, bracket: Option<(f64, f64)>) -> Result<Equilibrium> {
    cfg.check()?;
    let (lo, hi) = bracket.unwrap_or_else(|| default_bracket(cfg));
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let r = minimize_scalar(|u| cfg.eval(u.exp()), ulo, uhi, 1e-12)?;
    let margin = 1e-6 * (uhi - ulo);
    let interior =
        r.x_star - ulo > margin && uhi - r.x_star > margin && r.f_star < cfg.eval(lo) && r.f_star < cfg.eval(hi);
    if !interior {
        let edge = if r.x_star - ulo < uhi - r.x_star { lo } else { hi };
        return Ok(Equilibrium::NoDroplet {
            bracket: (lo, hi),
            edge,
        });
    }
    let n_star = refine_minimum(|n| cfg.eval(n), r.x_star.exp(), lo, hi, 1e-3);
    let e_star = cfg.eval(n_star);
    let closed_form = closed_form_minimum(cfg).map(|(n, e)| ClosedFormComparison {
        n_star: n,
        e_star: e,
        rel_dev_n: (n_star - n).abs() / n,
        rel_dev_e: (e_star - e).abs() / e.abs(),
    });
    Ok(Equilibrium::Minimum {
        n_star,
        e_star,
        iterations: r.iterations,
        closed_form,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub log: bool,
}

impl DensityGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |msg: String| Err(Error::InvalidGrid(msg));
        if self.points == 0 {
            return bad("grid needs at least one point".into());
        }
        if !(self.lo > 0.0) || !self.hi.is_finite() {
            return bad(format!(
                "densities must be positive and finite, got [{}, {}]",
                self.lo, self.hi
            ));
        }
        if self.points == 1 {
            return Ok(vec![self.lo]);
        }
        if !(self.lo < self.hi) {
            return bad(format!("lo = {} must be below hi = {}", self.lo, self.hi));
        }
        let last = (self.points - 1) as f64;
        let values = (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + t * (self.hi - self.lo)
                }
            })
            .collect();
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub n: f64,
    pub e_correlated: f64,
    pub e_uncorrelated: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveMinimum {
    pub n: f64,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropletCurve {
    pub samples: Vec<CurveSample>,
    pub minimum_correlated: Option<CurveMinimum>,
    pub minimum_uncorrelated: Option<CurveMinimum>,
    pub closed_form_correlated: Option<(f64, f64)>,
    pub closed_form_uncorrelated: Option<(f64, f64)>,
    pub config: DropletConfig,
}

/// Refines the lowest interior sample between its neighbours.
fn sampled_minimum(cfg: &DropletConfig, ns: &[f64], es: &[f64]) -> Option<CurveMinimum> {
    if ns.len() < 3 {
        return None;
    }
    let best = (0..es.len()).min_by(|&i, &j| es[i].total_cmp(&es[j]))?;
    if best == 0 || best == ns.len() - 1 {
        return None;
    }
    let (lo, hi) = (ns[best - 1], ns[best + 1]);
    let r = minimize_scalar(|n| cfg.eval(n), lo, hi, 1e-12).ok()?;
    let n = refine_minimum(|n| cfg.eval(n), r.x_star, lo, hi, 1e-3);
    Some(CurveMinimum { n, e: cfg.eval(n) })
}

/// Samples the correlated and uncorrelated energies of `cfg`'s branch and
/// form on `grid`, with refined minima where the lowest sample is interior.
pub fn figure_curve(cfg: &DropletConfig, grid: &DensityGrid) -> Result<DropletCurve> {
    let ns = grid.values()?;
    let corr = cfg.with_correlated(true);
    let unc = cfg.with_correlated(false);
    corr.check()?;
    let ec: Vec<f64> = ns.iter().map(|&n| corr.eval(n)).collect();
    let eu: Vec<f64> = ns.iter().map(|&n| unc.eval(n)).collect();
    let samples = ns
        .iter()
        .zip(ec.iter().zip(&eu))
        .map(|(&n, (&c, &u))| CurveSample {
            n,
            e_correlated: c,
            e_uncorrelated: u,
        })
        .collect();
    Ok(DropletCurve {
        samples,
        minimum_correlated: sampled_minimum(&corr, &ns, &ec),
        minimum_uncorrelated: sampled_minimum(&unc, &ns, &eu),
        closed_form_correlated: closed_form_minimum(&corr),
        closed_form_uncorrelated: closed_form_minimum(&unc),
        config: *cfg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratios {
    pub n: Option<f64>,
    pub e: Option<f64>,
}

/// Correlated vs uncorrelated equilibria of one branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimaSummary {
    pub branch: BranchLabel,
    pub n_star_corr: Option<f64>,
    pub e_star_corr: Option<f64>,
    pub n_star_uncorr: Option<f64>,
    pub e_star_uncorr: Option<f64>,
    pub ratios: Ratios,
    pub config: DropletConfig,
}

pub fn minima_summary(cfg: &DropletConfig) -> Result<MinimaSummary> {
    let corr = equilibrium(&cfg.with_correlated(true), None)?.minimum();
    let unc = equilibrium(&cfg.with_correlated(false), None)?.minimum();
    let ratio = |a: Option<f64>, b: Option<f64>| Some(a? / b?);
    Ok(MinimaSummary {
        branch: cfg.branch,
        n_star_corr: corr.map(|m| m.0),
        e_star_corr: corr.map(|m| m.1),
        n_star_uncorr: unc.map(|m| m.0),
        e_star_uncorr: unc.map(|m| m.1),
        ratios: Ratios {
            n: ratio(corr.map(|m| m.0), unc.map(|m| m.0)),
            e: ratio(corr.map(|m| m.1), unc.map(|m| m.1)),
        },
        config: *cfg,
    })
}
