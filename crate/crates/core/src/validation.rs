//! Self-check suite: closed-form anchors and cross-checks between
//! independent routes through the library.

use crate::bogoliubov::{dispersion_minus, dispersion_plus, solve_bdg, symmetry_breaking_gap, ModeBranch};
use crate::droplet::{energy_full, energy_terms, equilibrium, DropletConfig, DropletForm, LhyCoefficient};
use crate::fluctuations::{closed_form_intraspecies, ir_safe_sum, FluctuationQuadratureSettings};
use crate::model::{BranchLabel, FluctuationSet, MixtureParams, SymmetricParams};
use crate::stability::{rel_deviation, stability_check, Verdict};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Measured worst deviation (or count of failures, for grid checks).
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

fn check(name: &'static str, measured: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed: measured <= tolerance,
        measured,
        tolerance,
        detail,
    }
}

fn failed(name: &'static str, tolerance: f64, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed: false,
        measured: f64::INFINITY,
        tolerance,
        detail,
    }
}

fn lhy_coefficient() -> CheckResult {
    match closed_form_intraspecies(BranchLabel::Minus, 0.0, 1.0) {
        Ok((nt, mt)) => check(
            "lhy_coefficient",
            (nt + mt + 0.116812).abs(),
            1e-6,
            format!("(N+M)/gamma = {:.9}", nt + mt),
        ),
        Err(e) => failed("lhy_coefficient", 1e-6, e.to_string()),
    }
}

fn quadrature_anchor() -> CheckResult {
    let sym = SymmetricParams::new(1.0, 1.0, 0.0, 1.0, 1.0);
    match ir_safe_sum(&sym, BranchLabel::Minus, 0.0, &FluctuationQuadratureSettings::default()) {
        Ok((v, _)) => check(
            "quadrature_ir_safe",
            (v + std::f64::consts::FRAC_1_PI).abs(),
            1e-9,
            format!("sum = {v:.12}"),
        ),
        Err(e) => failed("quadrature_ir_safe", 1e-9, e.to_string()),
    }
}

fn bdg_vs_analytic() -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for lambda in [-0.99, -0.5, 0.0, 0.5, 0.99] {
        let sym = SymmetricParams::new(1.0, 1.0, lambda, 1.0, 1.0);
        for i in 0..200 {
            let eps = 10f64.powf(-4.0 + 8.0 * i as f64 / 199.0);
            let modes = match solve_bdg(sym.k_of_eps(eps), &sym.to_mixture(), &FluctuationSet::zero()) {
                Ok(m) => m,
                Err(e) => return failed("bdg_vs_analytic", 1e-10, e.to_string()),
            };
            for (branch, exact) in [
                (ModeBranch::Minus, dispersion_minus(eps, lambda, 0.0).re),
                (ModeBranch::Plus, dispersion_plus(eps, lambda).re),
            ] {
                match modes.iter().find(|m| m.branch == branch) {
                    Some(m) => {
                        worst = worst.max((m.omega.re - exact).abs() / exact);
                        worst_norm = worst_norm.max((m.norm - 1.0).abs());
                    }
                    None => worst = f64::INFINITY,
                }
            }
        }
    }
    let mut r = check(
        "bdg_vs_analytic",
        worst,
        1e-10,
        format!("max norm error {worst_norm:.2e}"),
    );
    r.passed &= worst_norm <= 1e-9;
    r
}

fn fd_thermodynamics() -> CheckResult {
    let mut worst_grad: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    // deterministic spread of admissible inputs
    for i in 0..20 {
        let t = i as f64 / 19.0;
        let p = MixtureParams {
            g11: 0.3 + 2.0 * t,
            g22: 1.7 - t,
            g12: -1.0 + 2.3 * (1.0 - t) * t + 0.4 * t,
            n1: 0.5 + t,
            n2: 2.0 - 0.8 * t,
            nc1: (0.5 + t) * (0.6 + 0.3 * t),
            nc2: (2.0 - 0.8 * t) * 0.9,
            ..MixtureParams::default()
        };
        let s = (t * 7.0).sin() * 0.05;
        let fl = FluctuationSet {
            nt11: 0.02 + s,
            nt22: 0.01,
            nt12: s,
            mt11: -0.04,
            mt22: -0.03 + s,
            mt12: -s * 0.7,
        };
        match stability_check(&p, &fl, true) {
            Ok(r) => {
                let fd = r.hessian_fd.expect("requested");
                worst_grad = worst_grad.max(fd.gradient_rel_dev);
                worst_hess = worst_hess.max(fd.hessian_rel_dev);
            }
            Err(e) => return failed("fd_thermodynamics", 1e-6, e.to_string()),
        }
    }
    let mut r = check(
        "fd_thermodynamics",
        worst_hess,
        1e-6,
        format!("gradient {worst_grad:.2e}"),
    );
    r.passed &= worst_grad <= 1e-8;
    r
}

fn classic_limit() -> CheckResult {
    let mut disagreements = 0usize;
    for i in 0..101 {
        let ratio = -1.5 + 3.0 * i as f64 / 100.0;
        for j in 1..=101 {
            let g = 2.0 * j as f64 / 101.0;
            let p = MixtureParams {
                g11: g,
                g22: g,
                g12: ratio * g,
                ..MixtureParams::default()
            };
            let expected = g > 0.0 && g * g - p.g12 * p.g12 > 0.0;
            match stability_check(&p, &FluctuationSet::zero(), false) {
                Ok(r) if (r.verdict == Verdict::Stable) == expected => {}
                _ => disagreements += 1,
            }
        }
    }
    check(
        "classic_limit",
        disagreements as f64,
        0.0,
        format!("{disagreements} disagreements"),
    )
}

fn droplet_ratios() -> CheckResult {
    let cfg = DropletConfig {
        lhy_coeff_mode: LhyCoefficient::PaperRounded,
        ..DropletConfig::new(1.0, 0.01, BranchLabel::Minus)
    };
    let run = |c: &DropletConfig| equilibrium(c, None).ok().and_then(|e| e.minimum());
    match (run(&cfg), run(&cfg.with_correlated(false))) {
        (Some((nc, ec)), Some((nu, eu))) => {
            let dev = ((nc / nu - 4.0).abs() / 1e-9).max((ec / eu - 16.0).abs() / 1e-8);
            let mut r = check(
                "droplet_ratios",
                dev,
                1.0,
                format!("n* = {nc:.6}, ratios {:.12} {:.12}", nc / nu, ec / eu),
            );
            r.passed &= (nc - 2464.0).abs() / 2464.0 <= 1e-3;
            r
        }
        _ => failed("droplet_ratios", 1.0, "no droplet found".into()),
    }
}

fn symmetry_gap() -> CheckResult {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let eps = 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0);
        for j in 0..21 {
            let lambda = -0.9 + 1.8 * j as f64 / 20.0;
            worst = worst.max(symmetry_breaking_gap(eps, lambda, 0.0).norm());
        }
    }
    let broken = symmetry_breaking_gap(1.0, 0.5, -0.3).re;
    let direct = 3.7f64.sqrt() - 2.0;
    let mut r = check(
        "symmetry_gap",
        worst,
        1e-12,
        format!("gap(1, 0.5, -0.3) = {broken:.12}"),
    );
    r.passed &= (broken - direct).abs() <= 1e-12 && broken != 0.0;
    r
}

fn branch_cancellation() -> CheckResult {
    let plus = DropletConfig {
        form: DropletForm::Full,
        ..DropletConfig::new(1.0, 0.0, BranchLabel::Plus)
    };
    let minus = DropletConfig {
        branch: BranchLabel::Minus,
        ..plus
    };
    let mut worst: f64 = 0.0;
    for k in 0..40 {
        let n = 10f64.powf(-3.0 + 7.0 * k as f64 / 39.0);
        let (Ok(e), Ok(c), Ok(u)) = (
            energy_full(n, &plus),
            energy_terms(n, &minus),
            energy_terms(n, &minus.with_correlated(false)),
        ) else {
            return failed("branch_cancellation", 0.0, "evaluation failed".into());
        };
        worst = worst.max(e.abs()).max(rel_deviation(&[c.lhy], &[2.0 * u.lhy]));
    }
    check(
        "branch_cancellation",
        worst,
        0.0,
        "plus correlated E and LHY doubling".into(),
    )
}

/// Runs every check in a fixed order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        lhy_coefficient(),
        quadrature_anchor(),
        bdg_vs_analytic(),
        fd_thermodynamics(),
        classic_limit(),
        droplet_ratios(),
        symmetry_gap(),
        branch_cancellation(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_green() {
        for r in run_all() {
            assert!(r.passed, "{r:?}");
        }
    }
}
